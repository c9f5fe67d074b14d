"""Verification batteries run by ``cstar-norms verify <suite>``.

Each check records the worst observed excess over its tolerance region (a
check passes when ``worst <= tolerance``), the number of instances, whether
it is exact or statistical, and a descriptive citation tag naming the result
it exercises.  Instance counts scale with ``budget_scale``; seeds derive from
the suite seed only, so reruns are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import powernorms as pn
from . import summing as sm
from .algebra import AlgebraDescriptor, AlgebraElement, alg_norm, alg_sample, ginibre
from .hilbert_module import (
    ModuleOperator,
    ModuleVector,
    op_norm,
    polar_decompose,
    polar_power_identity_check,
    sample_operator,
    sample_vector,
    theta,
    vec_norm,
)
from .search import SearchBudget, sub_rng

DESCRIPTORS = ((1,), (2,), (1, 1), (1, 1, 1), (2, 1))
COMMUTATIVE = ((1,), (1, 1), (1, 1, 1))
NONCOMMUTATIVE = ((2,), (2, 1))
SUITES = ("axioms", "multinorm", "summing", "polar", "triangle")


@dataclass
class Check:
    name: str
    citation: str
    worst: float
    tolerance: float
    count: int
    mode: str = "exact"
    warning: bool = False
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.warning or bool(self.worst <= self.tolerance)

    def as_dict(self) -> dict:
        return {"name": self.name, "citation": self.citation, "worst": float(self.worst),
                "tolerance": self.tolerance, "count": self.count, "mode": self.mode,
                "warning": self.warning, "passed": self.passed, "detail": self.detail}


class Battery:
    def __init__(self, seed: int, scale: float):
        self.seed = int(seed)
        self.scale = float(scale)
        self.checks: list[Check] = []

    def count(self, base: int, minimum: int = 2) -> int:
        return max(minimum, int(round(base * self.scale)))

    def budget(self, base: SearchBudget) -> SearchBudget:
        return base.scaled(self.scale) if self.scale != 1 else base

    def rng(self, *keys) -> np.random.Generator:
        return sub_rng(self.seed, *keys)

    def add(self, name, citation, excesses, tol, mode="exact", **detail):
        excesses = list(excesses)
        worst = float(max(excesses)) if excesses else -np.inf
        self.checks.append(Check(name, citation, worst, tol, len(excesses), mode,
                                 detail=detail))

    def warn(self, name, citation, message):
        self.checks.append(Check(name, citation, 0.0, 0.0, 1, "advisory", True,
                                 {"message": message}))


def _cycle(items, i):
    return items[i % len(items)]


# -- axioms ----------------------------------------------------------------------

AXIOM_CASES = (
    ("lattice", (1, 1), "exact"), ("lattice", (1, 1, 1), "exact"),
    ("dual_lattice", (1, 1), "exact"), ("dual_lattice", (1, 1, 1), "exact"),
    ("mu_star", (2, 1), "exact"), ("mu_star", (1, 1), "exact"),
    ("l2_module", (2,), "exact"), ("classical_mu2", (1,), "exact"),
    ("hilbert_cstar", (1, 1), "statistical"), ("hilbert_cstar", (2,), "statistical"),
    ("hilbert_cstar", (2, 1), "statistical"),
)


def run_axioms(b: Battery, exact_samples: int = 40, search_samples: int = 8):
    budget = b.budget(SearchBudget(samples=400, restarts=2, local_steps=30))
    for idx, (kind, desc, mode) in enumerate(AXIOM_CASES):
        samples = b.count(exact_samples if mode == "exact" else search_samples)
        rep = pn.axiom_check(kind, desc, rank=2, n=3, samples=samples,
                             seed=b.seed * 1000 + idx, budget=budget)
        for name, res in rep.results.items():
            # AxiomResult.worst is excess in tolerance units
            b.add(f"axiom {name} {kind} {list(desc)}", "power-norm-axioms", [res.worst], 1.0,
                  res.mode)


# -- multinorm -------------------------------------------------------------------

def _pair_oracle(x1: ModuleVector, x2: ModuleVector) -> float:
    """Exact two-term projection-family value over commutative blocks."""
    vals = []
    for a, c in zip(x1.mats, x2.mats):
        w = np.linalg.eigvalsh(a @ a.conj().T - c @ c.conj().T)
        vals.append(np.sqrt(np.linalg.norm(c) ** 2 + w[w > 0].sum()))
    return float(max(vals))


def _synthesis_norm_via_entries(xs) -> float:
    rows = []
    for b_idx in range(xs[0].rank):
        rows.append([x.entries[b_idx] for x in xs])
    return op_norm(ModuleOperator.from_entries(rows))


def mu_star_sampling(xs, samples: int, seed: int):
    """Sampled values of the mu_star objective and of derived coefficient tuples.

    Each unit y gives the coefficients a_i = <x_i, y>/gamma with
    gamma = ||(sum |<x_i,y>|^2)^{1/2}||, so ||sum |a_i|^2|| = 1 and
    ||sum x_i a_i|| >= gamma.  Returns (gamma, ||sum x_i a_i||, ||sum |a_i|^2||).
    """
    desc, rank = xs[0].descriptor, xs[0].rank
    rng = sub_rng(seed, 81)
    ys = [ginibre((samples, rank * k, k), rng) for k in desc.block_sizes]
    nrm = np.max([np.linalg.norm(y, 2, axis=(1, 2)) for y in ys], axis=0)
    ys = [y / nrm[:, None, None] for y in ys]
    coeffs = [np.einsum("ab,sak->sbk", pn.stacked(xs, j).conj(), y) for j, y in enumerate(ys)]
    gam = np.max([np.linalg.norm(c, 2, axis=(1, 2)) for c in coeffs], axis=0)
    keep = gam > 0
    gam = gam[keep]
    coeffs = [c[keep] / gam[:, None, None] for c in coeffs]
    combo = np.max([np.linalg.norm(np.einsum("ab,sbk->sak", pn.stacked(xs, j), c), 2,
                                   axis=(1, 2)) for j, c in enumerate(coeffs)], axis=0)
    adm = np.max([np.linalg.norm(c, 2, axis=(1, 2)) ** 2 for c in coeffs], axis=0)
    return gam, combo, adm


def run_multinorm(b: Battery):
    default = b.budget(SearchBudget())
    small = b.budget(SearchBudget(samples=500, restarts=3, local_steps=50))

    d1 = AlgebraDescriptor((1,))
    est = pn.hilbert_cstar_multinorm([ModuleVector.basis(d1, 2, 0), ModuleVector.basis(d1, 2, 1)],
                                     default, b.seed)
    b.add("hilbert orthonormal pair", "projection-family-multinorm",
          [abs(est.value - np.sqrt(2))], 1e-6)

    exc = []
    for i in range(b.count(20)):
        desc = AlgebraDescriptor(_cycle(COMMUTATIVE, i))
        rng = b.rng(1, i)
        x1, x2 = sample_vector(desc, 1 + i % 3, rng), sample_vector(desc, 1 + i % 3, rng)
        est = pn.hilbert_cstar_multinorm([x1, x2], small, b.seed + i)
        exc.append(abs(est.value - _pair_oracle(x1, x2)))
    b.add("hilbert two-term oracle", "projection-family-multinorm", exc, 1e-6, "statistical")

    iso, sound, reach, a_sound, a_adm = [], [], [], [], []
    for i in range(b.count(40)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        rank, n = 1 + i % 3, 1 + (i // 5) % 4
        rng = b.rng(2, i)
        xs = [sample_vector(desc, rank, rng) for _ in range(n)]
        value = pn.mu_star(xs).value
        iso.append(abs(value - _synthesis_norm_via_entries(xs)))
        gam, combo, adm = mu_star_sampling(xs, b.count(5000, 50), b.seed * 100 + i)
        sound.append(float(np.max(gam)) - value)
        a_sound.append(float(np.max(combo)) - value)
        a_adm.append(float(np.max(adm)) - 1)
        reach.append(0.95 * value - float(np.max(combo)))
    b.add("mu_star equals synthesis operator norm", "synthesis-isometry", iso, 1e-12)
    b.add("mu_star sampled y never exceeds value", "synthesis-isometry", sound, 1e-9)
    b.add("coefficient tuples admissible", "synthesis-isometry", a_adm, 1e-9)
    b.add("coefficient samples never exceed value", "synthesis-isometry", a_sound, 1e-9)
    b.add("coefficient samples reach 0.95 value", "synthesis-isometry", reach, 0.0,
          "statistical")

    same = []
    for i in range(b.count(30)):
        rng = b.rng(3, i)
        xs = [sample_vector(d1, 1 + i % 3, rng) for _ in range(1 + i % 4)]
        v1, v2, v3 = pn.classical_mu2(xs).value, pn.mu_star(xs).value, pn.mu(xs).value
        same.append(0.0 if v1 == v2 == v3 else 1.0)
        desc = AlgebraDescriptor(_cycle(COMMUTATIVE, i))
        ys = [sample_vector(desc, 2, rng) for _ in range(3)]
        same.append(0.0 if pn.mu(ys).value == pn.mu_star(ys).value else 1.0)
    b.add("mu equals mu_star over commutative algebras", "mu-commutative", same, 0.0)

    upper, level = [], []
    for i in range(b.count(10)):
        desc = AlgebraDescriptor(_cycle(NONCOMMUTATIVE, i))
        rng = b.rng(4, i)
        xs = [sample_vector(desc, 1 + i % 2, rng) for _ in range(2 + i % 3)]
        est = pn.mu(xs, small, b.seed + i)
        upper.append(est.value - est.extras["upper_bound"])
        level.append(max(vec_norm(x) for x in xs) - est.value)
        level.append(abs(pn.mu([xs[0]], small, b.seed).value - vec_norm(xs[0])) - 1e-9)
    b.add("mu below certified upper bound", "mu-upper-bound", upper, 1e-9, "statistical")
    b.add("mu at least each vector norm", "power-norm-axioms", level, 1e-6, "statistical")

    d2 = AlgebraDescriptor((2,))
    frame = [ModuleVector.basis(d2, 2, 0), ModuleVector.basis(d2, 2, 1)]
    est = pn.mu(frame, default, b.seed)
    b.add("standard frame over M2 has mu = sqrt 2", "frame-formula-noncommutative-gap",
          [abs(est.value - np.sqrt(2)), abs(pn.mu_star(frame).value - 1)], 1e-9)

    contr, contr_mu = [], []
    for i in range(b.count(40)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        m = 1 + i % 3
        rng = b.rng(5, i)
        t = sample_operator(desc, m, 1 + (i + 1) % 3, seed=rng)
        xs = [sample_vector(desc, m, rng) for _ in range(1 + i % 4)]
        contr.append(pn.mu_star([t @ x for x in xs]).value - op_norm(t) * pn.mu_star(xs).value)
        if not desc.commutative() and i < b.count(8):
            lhs = pn.mu([t @ x for x in xs], small, b.seed + i).value
            rhs = pn.mu(xs, small, b.seed + i).value
            # lhs is a lower bound, rhs compared through its certified upper bound too
            contr_mu.append(lhs - op_norm(t) * max(rhs, 0) * 1.01)
    b.add("mu_star contraction under operators", "mu-contraction", contr, 1e-9)
    b.add("mu contraction (paired seeds)", "mu-contraction", contr_mu, 0.0, "statistical")

    lam = []
    for i in range(b.count(10)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        rng = b.rng(6, i)
        xs = [sample_vector(desc, 2, rng) for _ in range(2)]
        rep = pn.mu_star_min_lambda_check(xs, trials=b.count(50), seed=b.seed + i)
        lam.append(0.0 if rep.passed else 1.0)
    b.add("mu_star is the least admissible lambda", "min-lambda", lam, 0.0)

    cons = []
    for i in range(b.count(8)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        elems = [alg_sample(desc, "generic", b.seed * 97 + i * 5 + j) for j in range(2 + i % 2)]
        xs = [ModuleVector.from_entries([a]) for a in elems]
        full = pn.hilbert_cstar_multinorm(xs, small, b.seed + i).value
        restricted = pn.hilbert_cstar_multinorm_in_algebra(elems, b.count(2000), b.seed + i).value
        cons.append(abs(full - restricted) / full)
    b.add("projections of A reproduce the module search on E = A",
          "multiplier-algebra-consistency", cons, 0.01, "statistical")

    amp, mono = [], []
    amp_budget = b.budget(SearchBudget(samples=2000, restarts=3, local_steps=100))
    for i in range(b.count(4)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        t = sample_operator(desc, 1 + i % 3, seed=b.rng(7, i))
        est = pn.amplification_norm(t, 3, budget=amp_budget, seed=b.seed + i)
        nt = op_norm(t)
        amp.append(max(nt - 1e-9 - est.value, est.value - 1.02 * nt))
        mono.append(0.0 if est.extras["monotone"] else 1.0)
    b.add("hilbert amplification stays within 2% of the norm", "multi-bounded-equals-norm",
          amp, 0.0, "statistical")
    b.add("amplification sequence nondecreasing", "amplification-monotone", mono, 0.0)

    mb = []
    for i in range(b.count(4)):
        desc = AlgebraDescriptor(_cycle(COMMUTATIVE, i))
        rng = b.rng(8, i)
        m = 1 + i % 3
        th = theta(sample_vector(desc, m, rng), sample_vector(desc, m, rng))
        est = pn.mb_norm(th, 2 * m, ("mu_star", "l2_module"), small, b.seed + i)
        exact = sm.pi2_frame(th).value
        mb.append(max(est.value - exact - 1e-9, 0.9 * exact - est.value))
    b.add("multi-bounded estimate matches pi2 of rank-one operators", "pi2-equals-mb-norm",
          mb, 0.0, "statistical")


# -- summing -----------------------------------------------------------------------

def run_summing(b: Battery):
    budget = b.budget(SearchBudget())
    d1 = AlgebraDescriptor((1,))

    hs, tr = [], []
    for i in range(b.count(40)):
        t = sample_operator(d1, 1 + i % 3, 1 + (i // 3) % 3, seed=b.rng(10, i))
        hs.append(abs(sm.pi2_frame(t).value - float(np.sqrt(np.sum(np.abs(t.mats[0]) ** 2)))))
        if t.is_square:
            tr.append(abs(sm.pi1(t).value - float(np.sum(np.linalg.svd(t.mats[0],
                                                                        compute_uv=False)))))
    b.add("pi2 frame value equals Frobenius norm on Hilbert spaces", "hilbert-schmidt", hs,
          1e-10)
    b.add("pi1 frame value equals trace norm on Hilbert spaces", "trace-class", tr, 1e-9)

    indep = []
    for i in range(b.count(20)):
        desc = AlgebraDescriptor(_cycle(COMMUTATIVE, i))
        m = 1 + i % 3
        t = sample_operator(desc, m, seed=b.rng(11, i))
        f2 = sm.rotated_frame(desc, m, seed=b.seed + i)
        indep.append(abs(sm.pi2_frame(t).value - sm.pi2_frame(t, f2).value))
    b.add("pi2 frame value independent of the tight frame", "frame-formula", indep, 1e-9)

    c, d = sm.frame_verify(sm.Frame([ModuleVector.basis(d1, 2, 0),
                                     ModuleVector.basis(d1, 2, 0) + ModuleVector.basis(d1, 2, 1)]),
                           trials=b.count(20), seed=b.seed)
    b.add("frame bounds of a skew pair", "frame-bounds",
          [abs(c - (3 - np.sqrt(5)) / 2), abs(d - (3 + np.sqrt(5)) / 2)], 1e-12)

    th_product, th_norm, th_sound = [], [], []
    for i in range(b.count(40)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        rng = b.rng(12, i)
        m = 1 + i % 3
        x, y = sample_vector(desc, m, rng), sample_vector(desc, 1 + (i + 1) % 3, rng)
        th = theta(y, x)
        prod = vec_norm(x) * vec_norm(y)
        if desc.commutative():
            val = sm.pi2_frame(th).value
            th_norm.append(abs(val - op_norm(th)))
            if desc.block_sizes == (1,):
                th_product.append(abs(val - prod))
        else:
            val = sm.pi2_estimate(th, budget=budget, seed=b.seed + i).value
            th_norm.append(op_norm(th) - val)
        th_sound.append(val - prod)
    b.add("pi2 of a rank-one operator equals the vector-norm product over C", "theta-pi2",
          th_product, 1e-9)
    b.add("pi2 of a rank-one operator equals its norm", "theta-pi2", th_norm, 1e-9)
    b.add("pi2 of a rank-one operator at most the vector-norm product", "theta-pi2", th_sound,
          1e-9)

    ideal, props = [], {k: [] for k in ("subadditive", "homogeneous", "dominates norm",
                                         "left ideal", "pi2 squared")}
    for i in range(b.count(40)):
        desc = AlgebraDescriptor(_cycle(COMMUTATIVE, i))
        rng = b.rng(13, i)
        m1, m2, m3 = 1 + i % 3, 1 + (i + 1) % 3, 1 + (i + 2) % 3
        t = sample_operator(desc, m1, m2, seed=rng)
        s = sample_operator(desc, m2, m3, seed=rng)
        st = s @ t
        p_st = sm.pi2_frame(st).value
        ideal.append(p_st - op_norm(s) * sm.pi2_frame(t).value)
        ideal.append(p_st - sm.pi2_frame(s).value * op_norm(t))
        a = sample_operator(desc, m1, seed=rng)
        c2 = sample_operator(desc, m1, seed=rng)
        p1a, p1c = sm.pi1(a).value, sm.pi1(c2).value
        props["subadditive"].append(sm.pi1(a + c2).value - p1a - p1c)
        lam = complex(ginibre((), rng))
        props["homogeneous"].append(abs(sm.pi1(a * lam).value - abs(lam) * p1a)
                                    - 1e-9 * (1 + p1a))
        props["dominates norm"].append(op_norm(a) - p1a)
        props["left ideal"].append(sm.pi1(a @ c2).value - op_norm(a) * p1c)
        props["pi2 squared"].append(sm.pi2_frame(a).value ** 2 - op_norm(a) * p1a)
    b.add("pi2 two-sided ideal inequalities", "pi2-ideal", ideal, 1e-9)
    for name, vals in props.items():
        tol = 0.0 if name == "homogeneous" else 1e-9
        b.add(f"pi1 {name}", "pi1-properties", vals, tol)

    attain, sound = [], []
    for i in range(b.count(20)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        t = sample_operator(desc, 1, seed=b.rng(14, i))
        rep = sm.pi2_estimate(t, budget=budget, seed=b.seed + i)
        nt = op_norm(t)
        attain.append(abs(rep.value - nt))
        sound.append(rep.value - nt)
        p1 = sm.pi1(t, "estimate", budget=budget, seed=b.seed + i).value
        attain.append(abs(p1 - nt))
    b.add("pi2 and pi1 on E = A attain the operator norm", "pi2-on-algebra", attain, 1e-10)
    b.add("pi2 on E = A never exceeds the operator norm", "pi2-on-algebra", sound, 1e-9)

    lower, reach, p1c = [], [], []
    for i in range(b.count(12)):
        desc = AlgebraDescriptor(_cycle(COMMUTATIVE, i))
        t = sample_operator(desc, 1 + i % 3, seed=b.rng(15, i))
        exact = sm.pi2_frame(t).value
        rep = sm.pi2_estimate(t, budget=budget, seed=b.seed + i)
        lower.append(rep.value - exact)
        reach.append(0.9 * exact - rep.value)
        p1c.append(sm.pi1(t, "estimate", budget=budget, seed=b.seed + i).value - sm.pi1(t).value)
        if not rep.converged:
            b.warn(f"pi2 estimate not converged (instance {i})", "pi2-frame-consistency",
                   "best value still improving in the upper half of tuple lengths")
    b.add("pi2 estimate below frame value", "frame-formula", lower, 1e-9)
    b.add("pi2 estimate reaches 0.9 frame value", "frame-formula", reach, 0.0, "statistical")
    b.add("pi1 estimate below frame value", "frame-formula", p1c, 1e-9)

    sym_exact, sym_stat = [], []
    for i in range(b.count(12)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        m = 1 + i % 3
        t = sample_operator(desc, m, m if i % 2 else 1 + (i + 1) % 3, seed=b.rng(16, i))
        rep = sm.pi_adjoint_symmetry_check(t, budget, b.seed + i)
        (sym_exact if rep.mode == "exact" else sym_stat).append(0.0 if rep.passed else 1.0)
    b.add("pi2 and pi1 invariant under adjoints", "adjoint-symmetry", sym_exact, 0.0)
    b.add("pi2 and pi1 adjoint estimates agree", "adjoint-symmetry", sym_stat, 0.0,
          "statistical")


# -- polar, triangle ---------------------------------------------------------------

def run_polar(b: Battery):
    recon, proj, angles = [], [], []
    powers = {0.5: [], 1.0: [], 2.0: []}
    for i in range(b.count(60)):
        desc = AlgebraDescriptor(_cycle(DESCRIPTORS, i))
        m = 1 + i % 3
        t = sample_operator(desc, m, 1 + (i // 5) % 3, seed=b.rng(20, i),
                            rank_deficiency=(i // 3) % 3)
        pol = polar_decompose(t)
        r = pol.residuals
        recon.append(r["reconstruction"] / (1 + op_norm(t)))
        proj.append(max(r["source_projection"], r["range_projection"]))
        angles.append(max(r["source_angle"], r["range_angle"], r["kernel_angle"]))
        for alpha in powers:
            rep = polar_power_identity_check(t, alpha, polar=pol)
            powers[alpha].append(max(rep.residuals.values()))
    b.add("polar reconstruction", "polar-decomposition", recon, 1e-9)
    b.add("polar source and range are projections", "polar-decomposition", proj, 1e-9)
    b.add("polar ranges and kernel", "polar-decomposition", angles, 1e-8)
    for alpha, vals in powers.items():
        b.add(f"polar power identities alpha={alpha}", "polar-powers", vals, 1e-9)


def run_triangle(b: Battery):
    unit, margin = [], []
    for desc_sizes in DESCRIPTORS:
        desc = AlgebraDescriptor(desc_sizes)
        for i in range(b.count(30)):
            a = alg_sample(desc, "generic", b.seed * 7919 + 2 * i)
            c = alg_sample(desc, "generic", b.seed * 7919 + 2 * i + 1)
            for eps in (0.0, 1e-6):
                u, v = sm.triangle_decomposition(a, c, eps)
                one = AlgebraElement.identity(desc)
                unit.append(max(alg_norm(w.adjoint() @ w - one) for w in (u, v)))
                margin.append(-sm.triangle_margin(a, c, u, v, eps))
    b.add("triangle unitaries are unitary", "unitary-triangle", unit, 1e-10)
    b.add("triangle inequality holds up to unitary conjugation", "unitary-triangle", margin,
          1e-10)
    d2 = AlgebraDescriptor((2,))
    a = AlgebraElement(d2, [np.array([[1, 0], [0, 0]], dtype=complex)])
    c = AlgebraElement(d2, [np.array([[0, 1], [0, 0]], dtype=complex)])
    u, v = sm.triangle_decomposition(a, c)
    b.add("stored pair violates the plain triangle inequality", "unitary-triangle",
          [sm.plain_triangle_margin(a, c) + 0.4], 0.0)
    b.add("stored pair satisfies the unitary triangle inequality", "unitary-triangle",
          [-sm.triangle_margin(a, c, u, v)], 1e-10)


RUNNERS = {"axioms": run_axioms, "multinorm": run_multinorm, "summing": run_summing,
           "polar": run_polar, "triangle": run_triangle}


def run_suite(name: str, seed: int = 0, budget_scale: float = 1.0) -> list[Check]:
    if name == "all":
        names = SUITES
    elif name in RUNNERS:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    if budget_scale <= 0:
        raise ValueError("budget scale must be positive")
    b = Battery(seed, budget_scale)
    for n in names:
        start = len(b.checks)
        RUNNERS[n](b)
        for c in b.checks[start:]:
            c.detail.setdefault("suite", n)
    return b.checks
