import json
from fractions import Fraction as F

import pytest

from localcake.cli import main
from localcake.errors import AuditMismatch, InvalidFamily, ParseError
from localcake.estimators import CakeDivider
from localcake.instances import FAMILIES, PROFILES, gen_instance
from localcake.measure import Piece
from localcake.runner import check_replay, execute, replay
from localcake.serialization import Instance, allocation_from_json, piece_from_json, piece_to_json


class TestGenerator:
    def test_path_uniform(self):
        inst = gen_instance(3, "path", 7, "uniform")
        assert inst.graph.edges == ((0, 1), (1, 2))
        assert all(f.weights == (1,) for f in inst.densities)
        assert inst.root == 0 and inst.parents == (None, 0, 1)

    def test_single_agent(self):
        for fam in FAMILIES:
            inst = gen_instance(1, fam, 3, "random-k-cells")
            assert inst.n == 1 and inst.graph.edges == ()

    def test_deterministic(self):
        for fam in FAMILIES:
            for prof in PROFILES:
                assert gen_instance(5, fam, 11, prof).dumps() == gen_instance(5, fam, 11, prof).dumps()

    def test_unknown_family(self):
        with pytest.raises(InvalidFamily):
            gen_instance(3, "lattice", 0)
        with pytest.raises(InvalidFamily):
            gen_instance(3, "path", 0, "bumpy")

    def test_families_shape(self):
        assert len(gen_instance(5, "cycle", 0).graph.edges) == 5
        assert gen_instance(5, "star", 0).graph.degree(0) == 4
        assert len(gen_instance(5, "complete", 0).graph.edges) == 10
        assert gen_instance(6, "tree", 4).graph.is_tree()
        for s in range(5):
            gen_instance(6, "gnp", s)  # connected by construction

    def test_densities_normalised(self):
        for prof in PROFILES:
            for s in range(10):
                for f in gen_instance(4, "path", s, prof).densities:
                    assert f.value(Piece.whole()) == 1


class TestSerialization:
    def test_instance_roundtrip(self):
        inst = gen_instance(4, "tree", 2, "adversarial-skew")
        again = Instance.from_dict(json.loads(inst.dumps()))
        assert again.dumps() == inst.dumps()

    def test_piece_roundtrip(self):
        p = Piece([(0, F(1, 3)), (F(1, 2), 1)])
        assert piece_to_json(p) == [["0", "1/3"], ["1/2", "1"]]
        assert piece_from_json(piece_to_json(p)) == p

    def test_non_canonical_piece_rejected(self):
        with pytest.raises(ParseError):
            piece_from_json([["1/2", "1"], ["0", "1/2"]])
        with pytest.raises(ParseError):
            piece_from_json([["0", "x"]])

    def test_overlapping_allocation_rejected(self):
        with pytest.raises(ParseError):
            allocation_from_json({"pieces": [[["0", "1/2"]], [["1/4", "1"]]], "residue": []})
        with pytest.raises(ParseError):
            allocation_from_json({"pieces": [[["0", "1/2"]]], "residue": []})

    def test_bad_instance(self):
        d = gen_instance(3, "path", 0).to_dict()
        d["edges"] = [[0, 1]]
        with pytest.raises(ParseError):
            Instance.from_dict(d)
        d = gen_instance(3, "path", 0).to_dict()
        d["densities"][0]["weights"] = ["2"]
        with pytest.raises(ParseError):
            Instance.from_dict(d)


class TestRunner:
    def test_main_on_edge(self):
        res = execute(gen_instance(2, "path", 1, "random-k-cells"))
        assert res.report["checks"] == {"locally_proportional": True, "complete": True}
        assert res.report["fairness"]["locally_envy_free"]

    def test_treecore_on_star(self):
        res = execute(gen_instance(6, "star", 3, "random-k-cells"), "treecore")
        assert res.report["checks"]["root_share"] == "1/6"
        assert res.ok

    def test_core_once_symmetric(self):
        res = execute(gen_instance(3, "complete", 0, "uniform"), "core-once")
        assert res.report["allocation"]["residue"] == []
        assert res.ok

    def test_determinism_and_replay(self):
        inst = gen_instance(5, "gnp", 2, "adversarial-skew")
        a = execute(inst)
        b = execute(inst)
        assert json.dumps(a.report, sort_keys=True) == json.dumps(b.report, sort_keys=True)
        assert replay(a.trace) == a.report
        check_replay(a.trace, a.report)

    def test_replay_detects_tampering(self):
        res = execute(gen_instance(4, "cycle", 0, "random-k-cells"))
        log = json.loads(json.dumps(res.trace))
        for ev in log["events"]:
            if ev["type"] == "phase_end":
                ev["ledger"]["eval"][0] += 1
                ev["ledger"]["total_eval"] += 1
                ev["ledger"]["total"] += 1
                break
        with pytest.raises(AuditMismatch):
            check_replay(log, res.report)

    def test_ledger_conservation(self):
        res = execute(gen_instance(5, "path", 9, "random-k-cells"))
        total = sum(p["total"] for p in res.report["phases"].values())
        assert total == res.report["queries"]["total"]

    def test_denominator_budget_aborts(self):
        from localcake.errors import DenominatorBudgetExceeded
        with pytest.raises(DenominatorBudgetExceeded):
            execute(gen_instance(5, "path", 9, "random-k-cells"), max_denominator_bits=2)


def run_cli(*args):
    return main([str(a) for a in args])


class TestCommandLine:
    def test_gen_run_verify_replay(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        assert run_cli("gen", "--n", 4, "--family", "cycle", "--profile", "random-k-cells",
                       "--seed", 5, "--out", inst) == 0
        out = tmp_path / "o"
        assert run_cli("run", "--instance", inst, "--out-dir", out, "--trace") == 0
        assert {p.name for p in out.iterdir()} == {"report.json", "allocation.json", "trace.json", "timings.json"}
        assert run_cli("verify", "--instance", inst, "--allocation", out / "allocation.json") == 0
        verified = json.loads(capsys.readouterr().out.split("\n", 1)[1])
        report = json.loads((out / "report.json").read_text())
        assert verified == report["fairness"]
        assert run_cli("replay", "--trace", out / "trace.json", "--report", out / "report.json",
                       "--out", tmp_path / "again.json") == 0
        assert (tmp_path / "again.json").read_bytes() == (out / "report.json").read_bytes()

    def test_gen_stdout_matches_file(self, tmp_path, capsys):
        run_cli("gen", "--n", 3, "--seed", 1, "--out", tmp_path / "a.json")
        run_cli("gen", "--n", 3, "--seed", 1)
        assert capsys.readouterr().out == (tmp_path / "a.json").read_text()

    def test_parse_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli("run", "--instance", bad, "--out-dir", tmp_path) == 4
        assert run_cli("gen", "--n", 3, "--family", "lattice") == 4
        inst = tmp_path / "i.json"
        run_cli("gen", "--n", 4, "--family", "cycle", "--out", inst)
        assert run_cli("run", "--instance", inst, "--protocol", "treecore", "--out-dir", tmp_path) == 4
        tampered = tmp_path / "t.json"
        tampered.write_text(json.dumps({"pieces": [[["0", "1/2"]], [["1/4", "1"]], [], []], "residue": []}))
        assert run_cli("verify", "--instance", inst, "--allocation", tampered) == 4

    def test_audit_failure_exit(self, tmp_path):
        inst = tmp_path / "i.json"
        run_cli("gen", "--n", 2, "--out", inst)
        unfair = tmp_path / "a.json"
        unfair.write_text(json.dumps({"pieces": [[], [["0", "1"]]], "residue": []}))
        assert run_cli("verify", "--instance", inst, "--allocation", unfair) == 2

    def test_replay_mismatch_exit(self, tmp_path):
        inst = tmp_path / "i.json"
        run_cli("gen", "--n", 3, "--family", "complete", "--profile", "random-k-cells", "--out", inst)
        run_cli("run", "--instance", inst, "--out-dir", tmp_path / "o", "--trace")
        rep = json.loads((tmp_path / "o" / "report.json").read_text())
        rep["core_calls"] += 1
        (tmp_path / "o" / "report.json").write_text(json.dumps(rep))
        assert run_cli("replay", "--trace", tmp_path / "o" / "trace.json",
                       "--report", tmp_path / "o" / "report.json") == 2

    def test_engine_error_exit(self, tmp_path):
        inst = tmp_path / "i.json"
        run_cli("gen", "--n", 5, "--family", "path", "--profile", "random-k-cells", "--seed", 9, "--out", inst)
        assert run_cli("run", "--instance", inst, "--out-dir", tmp_path, "--max-denominator-bits", 2) == 3

    def test_bench_csv(self, tmp_path):
        out = tmp_path / "b.csv"
        assert run_cli("bench", "--n-min", 2, "--n-max", 3, "--family", "path", "--family", "star",
                       "--profile", "uniform", "--seeds", 2, "--out", out) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("protocol,family,profile,n,seed")
        assert len(lines) == 1 + 2 * 2 * 2
        assert run_cli("bench", "--n-min", 2, "--n-max", 3, "--protocol", "treecore",
                       "--profile", "uniform", "--out", out) == 0


def test_estimator_facade():
    from sklearn.base import clone
    est = CakeDivider(protocol="treecore")
    inst = gen_instance(4, "tree", 1, "random-k-cells")
    alloc = est.fit_predict(inst)
    assert len(alloc.pieces) == 4 and est.report_["ok"]
    other = clone(est).set_params(protocol="main")
    assert other.get_params()["protocol"] == "main"
    assert other.score(inst) >= 0
