import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cstar_powernorms import AlgebraDescriptor, ModuleOperator, sample_operator, sample_vector
from cstar_powernorms import cli
from cstar_powernorms.serialize import (
    SchemaError,
    descriptor_from_json,
    dumps_canonical,
    element_from_json,
    operator_from_json,
    operator_to_json,
    vector_from_json,
    vector_to_json,
)
from strategies import descriptors, ranks, seeds

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_scenario(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj, encoding="utf-8")
    return str(p)


class TestCanonicalJson:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert json.loads(dumps_canonical(x)) == x

    def test_sorted_keys_and_float_markers(self):
        assert dumps_canonical({"b": 1.0, "a": [0.0, 2, True, None]}) == \
            '{"a":[0.0,2,true,null],"b":1.0}'

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            dumps_canonical(float("nan"))

    def test_complex(self):
        assert dumps_canonical(1 - 2j) == "[1.0,-2.0]"

    @given(descriptors, ranks, seeds)
    def test_vector_round_trip(self, d, m, seed):
        x = sample_vector(d, m, seed)
        text = dumps_canonical(vector_to_json(x))
        back = vector_from_json(json.loads(text), d, m, "x")
        assert back.array_equal(x)
        assert dumps_canonical(vector_to_json(back)) == text

    @given(descriptors, ranks, ranks, seeds)
    def test_operator_round_trip(self, d, m, mp, seed):
        t = sample_operator(d, m, mp, seed=seed)
        text = dumps_canonical(operator_to_json(t))
        back = operator_from_json(json.loads(text), d, m, mp, "t")
        assert back.array_equal(t)

    def test_scalar_shorthand(self):
        d = AlgebraDescriptor((1,))
        assert element_from_json(3, d, "e").blocks[0][0, 0] == 3
        assert element_from_json([1, 2], d, "e").blocks[0][0, 0] == 1 + 2j

    @pytest.mark.parametrize("bad,path", [
        ("x", "algebra"), ([], "algebra"), ([0], "algebra"), ([True], "algebra")])
    def test_bad_descriptor(self, bad, path):
        with pytest.raises(SchemaError) as info:
            descriptor_from_json(bad)
        assert info.value.path == path

    def test_paths_in_errors(self):
        d = AlgebraDescriptor((2,))
        with pytest.raises(SchemaError) as info:
            vector_from_json([{"blocks": [[[1, 0], [0, "x"]]]}], d, 1, "operands[3]")
        assert info.value.path == "operands[3][0].blocks[0][1][1]"


class TestNormCommand:
    def test_mu_star_basis_pair(self, capsys):
        code, out, _ = run_cli(["norm", str(SCENARIOS / "mu_star_basis.json")], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["results"]["value"] == 1.0 and rep["results"]["kind"] == "exact"
        assert rep["scenario"]["task"] == "mu_star" and rep["version"]

    def test_rank_mismatch(self, capsys):
        code, _, err = run_cli(["norm", str(SCENARIOS / "bad_rank.json")], capsys)
        assert code == 2 and "operands[0]" in err

    def test_parse_error(self, tmp_path, capsys):
        path = write_scenario(tmp_path, '{\n  "algebra": [1],\n  "rank": 2,,\n}')
        code, _, err = run_cli(["norm", path], capsys)
        assert code == 2 and "line 3 column" in err

    def test_unknown_task(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {"algebra": [1], "rank": 1, "task": "nope",
                                         "operands": [[1]]})
        code, _, err = run_cli(["norm", path], capsys)
        assert code == 2 and "task" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run_cli(["norm", str(tmp_path / "absent.json")], capsys)
        assert code == 2

    def test_unsupported_algebra(self, tmp_path, capsys):
        path = write_scenario(tmp_path, {"algebra": [2], "rank": 1, "task": "lattice_multinorm",
                                         "operands": [[{"blocks": [[[1, 0], [0, 1]]]}]]})
        code, _, _ = run_cli(["norm", path], capsys)
        assert code == 2

    def test_deterministic_and_out_file(self, tmp_path, capsys):
        scen = str(SCENARIOS / "hilbert_pair.json")
        out_path = tmp_path / "r.json"
        code1, out1, _ = run_cli(["norm", scen, "--out", str(out_path)], capsys)
        code2, out2, _ = run_cli(["norm", scen], capsys)
        r1, r2 = json.loads(out1), json.loads(out2)
        assert code1 == code2 == 0
        assert dumps_canonical(r1["results"]) == dumps_canonical(r2["results"])
        assert abs(r1["results"]["value"] - np.sqrt(2)) <= 1e-6
        assert all(c["passed"] for c in r1["checks"])
        assert json.loads(out_path.read_text())["results"] == r1["results"]

    def test_replay_embedded_scenario(self, tmp_path, capsys):
        _, out, _ = run_cli(["norm", str(SCENARIOS / "hilbert_pair.json")], capsys)
        rep = json.loads(out)
        path = write_scenario(tmp_path, rep["scenario"])
        _, out2, _ = run_cli(["norm", path], capsys)
        assert json.loads(out2)["results"] == rep["results"]

    def test_triangle_scenario(self, capsys):
        code, out, _ = run_cli(["norm", str(SCENARIOS / "triangle_pair.json")], capsys)
        assert code == 0 and json.loads(out)["passed"]

    @pytest.mark.parametrize("task,layout_operands,extra", [
        ("op_norm", "operator", {}),
        ("polar_decompose", "operator", {}),
        ("polar_power_identity_check", "operator", {"params": {"alpha": 0.5}}),
        ("pi2_frame", "operator", {}),
        ("pi1", "operator", {}),
        ("pi2_estimate", "operator", {"budget": {"samples": 200, "restarts": 1,
                                                 "local_steps": 10}}),
        ("pi_adjoint_symmetry_check", "operator", {}),
        ("amplification_norm", "operator", {"params": {"n": 2},
                                            "budget": {"samples": 200, "restarts": 1,
                                                       "local_steps": 10}}),
        ("mb_norm", "operator", {"params": {"n_max": 2},
                                 "budget": {"samples": 200, "restarts": 1, "local_steps": 10}}),
        ("lattice_multinorm", "vectors", {}),
        ("dual_lattice_multinorm", "vectors", {}),
        ("mu", "vectors", {}),
        ("l2_module_norm", "vectors", {}),
        ("classical_mu2", "vectors", {}),
        ("mu_star_min_lambda_check", "vectors", {"params": {"trials": 20}}),
    ])
    def test_every_task_runs(self, tmp_path, capsys, task, layout_operands, extra):
        d = AlgebraDescriptor((1,))
        if layout_operands == "operator":
            ops = [operator_to_json(sample_operator(d, 2, seed=1))]
        else:
            ops = [vector_to_json(sample_vector(d, 2, i)) for i in range(2)]
        scen = {"algebra": [1], "rank": 2, "task": task, "seed": 1, "operands": ops, **extra}
        code, out, err = run_cli(["norm", write_scenario(tmp_path, scen)], capsys)
        assert code == 0, err
        assert json.loads(out)["passed"]

    def test_all_tasks_registered(self):
        expected = {"lattice_multinorm", "dual_lattice_multinorm", "hilbert_cstar_multinorm",
                    "mu", "mu_star", "l2_module_norm", "classical_mu2",
                    "mu_star_min_lambda_check", "vec_norm", "op_norm", "polar_decompose",
                    "polar_power_identity_check", "amplification_norm", "mb_norm", "pi2_frame",
                    "pi2_estimate", "pi1", "pi_adjoint_symmetry_check", "triangle_decomposition"}
        assert expected <= set(cli.TASKS)

    def test_scenario_round_trip(self):
        text = (SCENARIOS / "mu_star_basis.json").read_text()
        sc = cli.load_scenario(text)
        again = cli.load_scenario(dumps_canonical(sc.raw))
        for a, b in zip(sc.operands, again.operands):
            assert a.array_equal(b)
        assert dumps_canonical(sc.raw) == dumps_canonical(json.loads(dumps_canonical(sc.raw)))


class TestVerifyCommand:
    def test_polar_suite(self, capsys):
        code, out, _ = run_cli(["verify", "polar", "--seed", "3", "--budget-scale", "0.3"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["passed"]
        assert all(c["citation"] for c in rep["checks"])

    def test_unknown_suite(self, capsys):
        code, _, _ = run_cli(["verify", "bogus"], capsys)
        assert code == 2

    def test_bad_scale(self, capsys):
        code, _, _ = run_cli(["verify", "polar", "--budget-scale", "0"], capsys)
        assert code == 2

    def test_small_summing_scale_never_fails_on_convergence(self, capsys):
        code, out, _ = run_cli(["verify", "summing", "--budget-scale", "0.1"], capsys)
        rep = json.loads(out)
        for c in rep["checks"]:
            if c["mode"] == "advisory":
                assert c["passed"]
        assert code == (0 if rep["passed"] else 1)

    def test_failure_exit_code(self, monkeypatch, capsys):
        from cstar_powernorms.batteries import Check
        monkeypatch.setattr(cli, "run_suite",
                            lambda *a: [Check("forced", "tag", 1.0, 0.0, 1)])
        code, _, _ = run_cli(["verify", "polar"], capsys)
        assert code == 1


def test_zero_operator_polar_via_cli(tmp_path, capsys):
    d = AlgebraDescriptor((2,))
    scen = {"algebra": [2], "rank": 1, "task": "polar_decompose",
            "operands": [operator_to_json(ModuleOperator.zero(d, 1, 1))]}
    code, out, _ = run_cli(["norm", write_scenario(tmp_path, scen)], capsys)
    assert code == 0
