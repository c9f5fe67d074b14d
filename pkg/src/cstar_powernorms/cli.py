"""Command-line front end.

    cstar-norms norm <scenario.json> [--out report.json]
    cstar-norms verify <suite> [--seed N] [--budget-scale X] [--out report.json]

Exit codes: 0 success, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from . import __version__
from . import hilbert_module as hm
from . import powernorms as pn
from . import summing as sm
from .batteries import SUITES, run_suite
from .errors import (
    CStarError,
    ConstructionError,
    DecompositionVerificationError,
    ShapeError,
    UnsupportedAlgebraError,
    UnsupportedKindError,
)
from .search import SearchBudget
from .serialize import (
    SchemaError,
    descriptor_from_json,
    dumps_canonical,
    element_from_json,
    operator_from_json,
    to_jsonable,
    vector_from_json,
)

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class Scenario:
    raw: dict
    task: str
    descriptor: Any
    rank: int
    codomain_rank: int
    operands: list
    seed: int = 0
    budget: SearchBudget = field(default_factory=SearchBudget)
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)


# task -> (operand layout, runner(scenario) -> (result, checks))
TASKS: dict[str, tuple[str, Callable]] = {}


def task(name: str, layout: str):
    def deco(fn):
        TASKS[name] = (layout, fn)
        return fn
    return deco


def _estimate_checks(est: pn.NormEstimate, recompute=None) -> list:
    checks = []
    if est.kind == pn.LOWER_BOUND and recompute is not None:
        again = recompute()
        checks.append({"name": "witness reproduces value", "worst": abs(again - est.value),
                       "tolerance": 1e-10})
    return checks


def _norm_task(kind):
    def run(sc: Scenario):
        xs = sc.operands
        est = pn.evaluate(kind, xs, sc.budget, sc.seed)
        recompute = None
        if est.kind == pn.LOWER_BOUND:
            recompute = lambda: pn.reevaluate_witness(kind, xs, est)  # noqa: E731
        return est, _estimate_checks(est, recompute)
    return run


for _tag, _name in (("lattice", "lattice_multinorm"), ("dual_lattice", "dual_lattice_multinorm"),
                    ("hilbert_cstar", "hilbert_cstar_multinorm"), ("mu", "mu"),
                    ("mu_star", "mu_star"), ("l2_module", "l2_module_norm"),
                    ("classical_mu2", "classical_mu2")):
    task(_name, "vectors")(_norm_task(_tag))


@task("mu_star_min_lambda_check", "vectors")
def _min_lambda(sc):
    rep = pn.mu_star_min_lambda_check(sc.operands, trials=int(sc.params.get("trials", 500)),
                                      seed=sc.seed, tol=sc.tolerances.get("order", 1e-8))
    return rep, [{"name": "min-lambda", "worst": 0.0 if rep.passed else 1.0, "tolerance": 0.0}]


@task("vec_norm", "vector")
def _vec_norm(sc):
    return {"value": hm.vec_norm(sc.operands[0])}, []


@task("op_norm", "operator")
def _op_norm(sc):
    return {"value": hm.op_norm(sc.operands[0])}, []


@task("polar_decompose", "operator")
def _polar(sc):
    pol = hm.polar_decompose(sc.operands[0], tol=sc.tolerances.get("polar", 1e-9))
    return {"W": pol.W, "abs": pol.abs_t, "residuals": pol.residuals}, []


@task("polar_power_identity_check", "operator")
def _polar_power(sc):
    alpha = float(sc.params.get("alpha", 0.5))
    rep = hm.polar_power_identity_check(sc.operands[0], alpha, tol=sc.tolerances.get("polar", 1e-9))
    return rep, [{"name": f"polar powers alpha={alpha}", "worst": max(rep.residuals.values()),
                  "tolerance": rep.tol}]


@task("amplification_norm", "operator")
def _amplification(sc):
    est = pn.amplification_norm(sc.operands[0], int(sc.params.get("n", 2)),
                                sc.params.get("domain_kind", "hilbert_cstar"),
                                sc.params.get("codomain_kind", "hilbert_cstar"),
                                sc.budget, sc.seed)
    seq = est.extras["sequence"]
    return est, [{"name": "amplification sequence nondecreasing",
                  "worst": max([0.0] + [a - b for a, b in zip(seq, seq[1:])]), "tolerance": 0.0}]


@task("mb_norm", "operator")
def _mb(sc):
    kinds = tuple(sc.params.get("kinds", ("hilbert_cstar", "hilbert_cstar")))
    est = pn.mb_norm(sc.operands[0], int(sc.params.get("n_max", 3)), kinds, sc.budget, sc.seed)
    return est, []


@task("pi2_frame", "operator")
def _pi2_frame(sc):
    return sm.pi2_frame(sc.operands[0]), []


@task("pi2_estimate", "operator")
def _pi2_estimate(sc):
    n_max = sc.params.get("n_max")
    return sm.pi2_estimate(sc.operands[0], None if n_max is None else int(n_max), sc.budget,
                           sc.seed), []


@task("pi1", "operator")
def _pi1(sc):
    n_max = sc.params.get("n_max")
    return sm.pi1(sc.operands[0], sc.params.get("mode", "frame_exact"),
                  None if n_max is None else int(n_max), sc.budget, sc.seed), []


@task("pi_adjoint_symmetry_check", "operator")
def _symmetry(sc):
    rep = sm.pi_adjoint_symmetry_check(sc.operands[0], sc.budget, sc.seed)
    return rep, [{"name": "adjoint symmetry", "worst": 0.0 if rep.passed else 1.0,
                  "tolerance": 0.0}]


@task("triangle_decomposition", "elements")
def _triangle(sc):
    a, b = sc.operands
    eps = float(sc.params.get("eps", 0.0))
    u, v = sm.triangle_decomposition(a, b, eps, tol=sc.tolerances.get("order", 1e-9))
    margin = sm.triangle_margin(a, b, u, v, eps)
    return {"u": u, "v": v, "margin": margin}, [
        {"name": "unitary triangle inequality", "worst": -margin, "tolerance": 1e-9}]


# -- scenario parsing --------------------------------------------------------------

def _int_field(raw, key, default=None, minimum=1):
    val = raw.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
        raise SchemaError(key, f"expected an integer >= {minimum}")
    return val


def parse_scenario(raw) -> Scenario:
    if not isinstance(raw, dict):
        raise SchemaError("$", "scenario must be a JSON object")
    name = raw.get("task")
    if name not in TASKS:
        raise SchemaError("task", f"unknown task {name!r}; known: {sorted(TASKS)}")
    desc = descriptor_from_json(raw.get("algebra"))
    rank = _int_field(raw, "rank")
    codomain_rank = _int_field(raw, "codomain_rank", rank)
    seed = _int_field(raw, "seed", 0, minimum=0)
    budget_raw = raw.get("budget", {})
    if not isinstance(budget_raw, dict):
        raise SchemaError("budget", "expected an object")
    try:
        budget = SearchBudget(**budget_raw)
    except (TypeError, ValueError) as exc:
        raise SchemaError("budget", str(exc)) from exc
    params = raw.get("params", {})
    tolerances = raw.get("tolerances", {})
    for key, val in (("params", params), ("tolerances", tolerances)):
        if not isinstance(val, dict):
            raise SchemaError(key, "expected an object")
    ops = raw.get("operands")
    if not isinstance(ops, list) or not ops:
        raise SchemaError("operands", "expected a nonempty list")
    layout = TASKS[name][0]
    if layout in ("vectors", "vector"):
        if layout == "vector" and len(ops) != 1:
            raise SchemaError("operands", "expected exactly one vector")
        operands = [vector_from_json(o, desc, rank, f"operands[{i}]") for i, o in enumerate(ops)]
    elif layout == "operator":
        if len(ops) != 1:
            raise SchemaError("operands", "expected exactly one operator")
        operands = [operator_from_json(ops[0], desc, rank, codomain_rank, "operands[0]")]
    else:
        if len(ops) != 2:
            raise SchemaError("operands", "expected exactly two algebra elements")
        operands = [element_from_json(o, desc, f"operands[{i}]") for i, o in enumerate(ops)]
    return Scenario(raw, name, desc, rank, codomain_rank, operands, seed, budget, params,
                    tolerances)


def load_scenario(text: str) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return parse_scenario(raw)
    except SchemaError as exc:
        raise InputError(f"invalid scenario field {exc}") from exc


def _result_json(result):
    if isinstance(result, pn.NormEstimate):
        return {"value": result.value, "kind": result.kind, "witness": to_jsonable(result.witness),
                "budget_used": result.budget_used, "seed": result.seed,
                "extras": to_jsonable(result.extras)}
    if isinstance(result, sm.SummingReport):
        return {"estimate": _result_json(result.estimate),
                "admissible_tuples_used": result.admissible_tuples_used,
                "normalization": result.normalization, "converged": result.converged,
                "sequence": result.sequence}
    return to_jsonable(result)


def _finish_checks(checks):
    out = []
    for c in checks:
        c = dict(c)
        c["passed"] = bool(c["worst"] <= c["tolerance"])
        out.append(c)
    return out


def run_scenario(sc: Scenario) -> tuple[dict, int]:
    start = time.perf_counter()
    _, runner = TASKS[sc.task]
    try:
        result, checks = runner(sc)
    except (DecompositionVerificationError, ConstructionError) as exc:
        report = {"scenario": sc.raw, "results": None, "error": str(exc),
                  "residuals": exc.residuals, "checks": [], "passed": False,
                  "version": __version__, "seed": sc.seed,
                  "wall_clock_seconds": time.perf_counter() - start}
        return report, EXIT_FAILED
    checks = _finish_checks(checks)
    passed = all(c["passed"] for c in checks)
    report = {"scenario": sc.raw, "task": sc.task, "results": _result_json(result),
              "checks": checks, "passed": passed, "version": __version__, "seed": sc.seed,
              "wall_clock_seconds": time.perf_counter() - start}
    return report, EXIT_OK if passed else EXIT_FAILED


def verify_report(suite: str, seed: int, budget_scale: float) -> tuple[dict, int]:
    start = time.perf_counter()
    checks = run_suite(suite, seed, budget_scale)
    rows = [c.as_dict() for c in checks]
    results = {f"{c.detail.get('suite', '')}: {c.name}": c.worst for c in checks}
    passed = all(c.passed for c in checks)
    report = {"suite": suite, "seed": seed, "budget_scale": budget_scale,
              "results": results, "checks": rows, "passed": passed,
              "warnings": sum(c.warning for c in checks), "version": __version__,
              "wall_clock_seconds": time.perf_counter() - start}
    return report, EXIT_OK if passed else EXIT_FAILED


def _emit(report: dict, out: str | None):
    text = dumps_canonical(report)
    sys.stdout.write(text + "\n")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cstar-norms", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    n = sub.add_parser("norm", help="evaluate a scenario file")
    n.add_argument("scenario")
    n.add_argument("--out")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--budget-scale", type=float, default=1.0)
    v.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "norm":
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                text = fh.read()
            sc = load_scenario(text)
        except OSError as exc:
            print(f"error: cannot read scenario: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except InputError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        try:
            report, code = run_scenario(sc)
        except SchemaError as exc:
            print(f"error: invalid scenario field {exc}", file=sys.stderr)
            return EXIT_INPUT
        except (ShapeError, UnsupportedAlgebraError, UnsupportedKindError) as exc:
            print(f"error: invalid scenario: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except CStarError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAILED
        _emit(report, args.out)
        if code == EXIT_FAILED:
            print("verification failed; residuals are in the report", file=sys.stderr)
        return code
    if args.budget_scale <= 0:
        print("error: --budget-scale must be positive", file=sys.stderr)
        return EXIT_INPUT
    report, code = verify_report(args.suite, args.seed, args.budget_scale)
    _emit(report, args.out)
    for c in report["checks"]:
        if not c["passed"]:
            print(f"FAILED {c['name']}: worst {c['worst']:.3e} > {c['tolerance']:.1e}",
                  file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
