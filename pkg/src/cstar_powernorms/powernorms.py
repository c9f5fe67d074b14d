"""Power-norms on tuples (x_1, ..., x_n) of vectors in a free Hilbert C*-module.

Exact constructions (closed-form linear algebra): lattice and dual lattice
norms, ``mu_star``, ``classical_mu2``, the l2-module norm, ``mu`` when the
algebra is commutative.  Sup-type constructions (the projection-family
multi-norm, ``mu`` over noncommutative algebras, amplification norms) return
certified lower bounds: the witness reproduces the reported value.

Per algebra block j every tuple is handled through the stacked matrix
``[X_1 ... X_n]`` of flattened vectors (shape N x n*k, N = m*k).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .algebra import AlgebraElement, alg_norm, alg_sample, ginibre, haar_unitary
from .errors import ShapeError, UnsupportedAlgebraError, UnsupportedKindError
from .hilbert_module import (
    ModuleOperator,
    ModuleVector,
    inner_product,
    op_norm,
    sample_vector,
    vec_norm,
)
from .search import (
    BlockScorer,
    ProjectionFamily,
    SearchBudget,
    argmax_first,
    identity_states,
    search_states,
    sphere_ascent,
    sub_rng,
)

EXACT = "exact"
LOWER_BOUND = "lower_bound"

KINDS = ("lattice", "dual_lattice", "hilbert_cstar", "mu", "mu_star", "l2_module",
         "classical_mu2")


@dataclass
class NormEstimate:
    value: float
    kind: str
    witness: Any = None
    budget_used: dict = field(default_factory=dict)
    seed: int | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (EXACT, LOWER_BOUND):
            raise ValueError(f"unknown estimate kind {self.kind!r}")
        self.value = float(self.value)


@dataclass(frozen=True)
class PowerNormKind:
    tag: str
    budget: SearchBudget = field(default_factory=SearchBudget)

    def __post_init__(self):
        if self.tag not in KINDS:
            raise UnsupportedKindError(f"unknown power-norm kind {self.tag!r}")

    def supports(self, desc) -> bool:
        if self.tag in ("lattice", "dual_lattice"):
            return desc.commutative()
        if self.tag == "classical_mu2":
            return desc.block_sizes == (1,)
        return True

    @property
    def exact(self) -> bool:
        return self.tag not in ("hilbert_cstar", "mu")


def as_kind(kind) -> PowerNormKind:
    return kind if isinstance(kind, PowerNormKind) else PowerNormKind(kind)


def check_tuple(xs: Sequence[ModuleVector]) -> list[ModuleVector]:
    xs = list(xs)
    if not xs:
        raise ShapeError("tuple must be nonempty")
    for i, x in enumerate(xs):
        if not isinstance(x, ModuleVector):
            raise ShapeError(f"tuple entry {i} is not a ModuleVector")
        if x.descriptor != xs[0].descriptor or x.rank != xs[0].rank:
            raise ShapeError(f"tuple entry {i} lives in a different module")
    return xs


def stacked(xs: Sequence[ModuleVector], j: int) -> np.ndarray:
    """[X_1 ... X_n] for algebra block j."""
    return np.hstack([x.mats[j] for x in xs])


def block_tensor(xs: Sequence[ModuleVector], j: int) -> np.ndarray:
    """Shape (n, N, k) array of flattened entries for block j."""
    return np.stack([x.mats[j] for x in xs])


def _require_commutative(xs, what):
    if not xs[0].descriptor.commutative():
        raise UnsupportedAlgebraError(f"{what} needs a commutative algebra, got {xs[0].descriptor}")


def vector_abs_coords(x: ModuleVector) -> np.ndarray:
    """|x| over A = C^d as a nonnegative d-vector (commutative descriptors)."""
    return np.array([np.sqrt(np.sum(np.abs(m) ** 2)) for m in x.mats])


# -- exact constructions --------------------------------------------------------

def lattice_multinorm(xs: Sequence[ModuleVector]) -> NormEstimate:
    xs = check_tuple(xs)
    _require_commutative(xs, "lattice multi-norm")
    coords = np.max([vector_abs_coords(x) for x in xs], axis=0)
    return NormEstimate(float(np.max(coords)), EXACT)


def dual_lattice_multinorm(xs: Sequence[ModuleVector]) -> NormEstimate:
    xs = check_tuple(xs)
    _require_commutative(xs, "dual lattice multi-norm")
    coords = np.sum([vector_abs_coords(x) for x in xs], axis=0)
    return NormEstimate(float(np.max(coords)), EXACT)


def l2_module_norm(xs: Sequence[ModuleVector]) -> NormEstimate:
    """Norm of (x_1..x_n) in l^2_n(E): ||sum <x_i, x_i>||^{1/2}."""
    xs = check_tuple(xs)
    total = inner_product(xs[0], xs[0])
    for x in xs[1:]:
        total = total + inner_product(x, x)
    return NormEstimate(float(np.sqrt(alg_norm(total))), EXACT)


def mu_upper_bound(xs: Sequence[ModuleVector]) -> float:
    """Certified upper bound ||sum |x_i|^2||^{1/2} for mu (via Cauchy-Schwarz)."""
    return l2_module_norm(xs).value


def _stacked_sigma(xs) -> tuple[float, int]:
    vals = [float(np.linalg.norm(stacked(xs, j), 2)) for j in range(xs[0].descriptor.n_blocks)]
    j = argmax_first(vals)
    return vals[j], j


def synthesis_operator(xs: Sequence[ModuleVector]) -> ModuleOperator:
    """T_x: l^2_n(A) -> E, (a_1..a_n) -> sum x_i a_i; column i holds x_i."""
    xs = check_tuple(xs)
    return ModuleOperator(xs[0].descriptor, len(xs), xs[0].rank,
                          [stacked(xs, j) for j in range(xs[0].descriptor.n_blocks)])


def mu_star(xs: Sequence[ModuleVector]) -> NormEstimate:
    """Exact: the operator norm of the synthesis operator T_x."""
    xs = check_tuple(xs)
    value, _ = _stacked_sigma(xs)
    return NormEstimate(value, EXACT)


def classical_mu2(xs: Sequence[ModuleVector]) -> NormEstimate:
    """Hilbert-space 2-summing norm: largest singular value of [x_1 ... x_n]."""
    xs = check_tuple(xs)
    if xs[0].descriptor.block_sizes != (1,):
        raise UnsupportedAlgebraError("classical_mu2 is defined over A = C only")
    return mu_star(xs)


def mu_star_objective(xs: Sequence[ModuleVector], y: ModuleVector) -> float:
    """||(sum_i |<x_i, y>|^2)^{1/2}|| at a single y."""
    total = None
    for x in xs:
        ip = inner_product(x, y)
        t = ip.adjoint() @ ip
        total = t if total is None else total + t
    return float(np.sqrt(alg_norm(total)))


def mu_objective(xs: Sequence[ModuleVector], y: ModuleVector) -> float:
    """||(sum_i |<y, x_i>|^2)^{1/2}|| at a single y."""
    total = None
    for x in xs:
        ip = inner_product(y, x)
        t = ip.adjoint() @ ip
        total = t if total is None else total + t
    return float(np.sqrt(alg_norm(total)))


def mu_star_witness(xs: Sequence[ModuleVector]) -> ModuleVector:
    """Unit y attaining the sup defining mu_star (top left singular vectors)."""
    xs = check_tuple(xs)
    desc, rank = xs[0].descriptor, xs[0].rank
    mats = []
    for j, k in enumerate(desc.block_sizes):
        u, _, _ = np.linalg.svd(stacked(xs, j))
        y = np.zeros((rank * k, k), dtype=complex)
        y[:, 0] = u[:, 0]
        mats.append(y)
    return ModuleVector(desc, rank, mats)


# -- mu over noncommutative algebras ------------------------------------------

def _kyfan_sq(b: np.ndarray, k: int) -> float:
    s = np.linalg.svd(b, compute_uv=False)
    return float(np.sum(s[:k] ** 2))


def _mu_block(x3: np.ndarray, k: int, budget: SearchBudget, rng_seed: tuple):
    """Lower bound for one block: max over unit v in C^k of Ky Fan_k([X_i v]_i).

    Any v yields a feasible y (top-k left singular vectors of [X_i v]) whose
    objective is at least the Ky Fan value, so the search stays a lower bound.
    """
    n, N, _ = x3.shape

    def f(v):
        return _kyfan_sq(np.einsum("iak,k->ai", x3, v), k)

    cands = []
    for c in range(k):
        e = np.zeros(k, dtype=complex)
        e[c] = 1.0
        cands.append((f(e), e))
    if k > 1:
        rng = sub_rng(*rng_seed, 0)
        if budget.samples:
            vs = ginibre((budget.samples, k), rng)
            vs /= np.linalg.norm(vs, axis=1, keepdims=True)
            bs = np.einsum("iak,sk->sai", x3, vs)
            s = np.linalg.svd(bs, compute_uv=False)
            vals = np.sum(s[:, :k] ** 2, axis=1)
            order = np.argsort(-vals, kind="stable")
            for idx in order[: max(1, budget.restarts)]:
                cands.append((float(vals[idx]), vs[idx]))
        starts = [c[1] for c in sorted(cands, key=lambda c: -c[0])[: max(1, budget.restarts)]]
        for r, v0 in enumerate(starts):
            v, val = sphere_ascent(f, v0, sub_rng(*rng_seed, 1, r), budget)
            cands.append((val, v))
    i = argmax_first([c[0] for c in cands])
    v = cands[i][1]
    u, _, _ = np.linalg.svd(np.einsum("iak,k->ai", x3, v))
    return u[:, :k]


def mu(xs: Sequence[ModuleVector], budget: SearchBudget | None = None, seed: int = 0) -> NormEstimate:
    """sup over unit y of ||(sum |<y, x_i>|^2)^{1/2}||.

    Commutative algebras: equals ``mu_star`` (exact).  Otherwise a lower bound
    with its witness y, plus the certified upper bound in ``extras``.
    """
    xs = check_tuple(xs)
    budget = budget or SearchBudget()
    desc, rank = xs[0].descriptor, xs[0].rank
    upper = mu_upper_bound(xs)
    if desc.commutative():
        est = mu_star(xs)
        return NormEstimate(est.value, EXACT, mu_star_witness(xs), seed=seed,
                            extras={"upper_bound": upper})
    mats = []
    for j, k in enumerate(desc.block_sizes):
        mats.append(_mu_block(block_tensor(xs, j), k, budget, (seed, 11, j)))
    cands = [ModuleVector(desc, rank, mats)]
    for x in xs:
        nx = vec_norm(x)
        if nx > 0:
            cands.append(x / nx)
    vals = [mu_objective(xs, y) for y in cands]
    i = argmax_first(vals)
    if vals[i] > upper * (1 + 1e-9) + 1e-12:
        raise ArithmeticError(f"mu lower bound {vals[i]} exceeds certified upper bound {upper}")
    return NormEstimate(vals[i], LOWER_BOUND, cands[i], budget.as_dict(), seed,
                        extras={"upper_bound": upper})


# -- Hilbert C*-multi-norm ------------------------------------------------------

def _hilbert_scorer(x3: np.ndarray) -> BlockScorer:
    n, N, k = x3.shape
    rows = np.arange(N)

    def zmat(q, labels):
        c = np.einsum("ba,ibk->iak", q.conj(), x3)
        return c[labels, rows]

    def score(states):
        z = zmat(*states[0])
        if k == 1:
            return float(np.sqrt(np.sum(np.abs(z) ** 2)))
        return float(np.linalg.norm(z, 2))

    def score_batch(qs, labels):
        c = np.einsum("sba,ibk->siak", qs.conj(), x3)
        s_idx = np.arange(qs.shape[0])[:, None]
        z = c[s_idx, labels, rows[None, :]]
        if k == 1:
            return np.sqrt(np.sum(np.abs(z) ** 2, axis=(1, 2)))
        g = np.einsum("sak,sal->skl", z.conj(), z)
        return np.sqrt(np.clip(np.linalg.eigvalsh(g)[:, -1], 0, None))

    def pair_vectors(states, b):
        z = zmat(*states[0])
        if k == 1:
            v = np.ones(1, dtype=complex)
        else:
            _, _, vh = np.linalg.svd(z)
            v = vh[0].conj()
        return [x3[i] @ v for i in range(n)]

    return BlockScorer(score, score_batch, pair_vectors)


def hilbert_family_value(xs: Sequence[ModuleVector], family: ProjectionFamily) -> float:
    """||P_1 x_1 + ... + P_n x_n|| for one family."""
    return vec_norm(family.apply(xs))


def hilbert_cstar_multinorm(xs: Sequence[ModuleVector], budget: SearchBudget | None = None,
                            seed: int = 0) -> NormEstimate:
    """Lower bound for sup ||sum P_i x_i|| over projection families in L(E).

    L(A^m) is block diagonal over the algebra blocks, so each block is searched
    independently and the witness family is assembled blockwise.
    """
    xs = check_tuple(xs)
    budget = budget or SearchBudget()
    desc, rank, n = xs[0].descriptor, xs[0].rank, len(xs)
    states = []
    used = {}
    for j, k in enumerate(desc.block_sizes):
        dim = rank * k
        x3 = block_tensor(xs, j)
        if n == 1:
            states.append((np.eye(dim, dtype=complex), np.zeros(dim, dtype=int)))
            continue
        structured = [identity_states([dim], n, i) for i in range(n)]
        res = search_states([dim], n, _hilbert_scorer(x3), budget, sub_seed(seed, j), structured)
        states.append(res.states[0])
        used = res.evaluations
    family = ProjectionFamily.from_states(desc, rank, n, states)
    value = hilbert_family_value(xs, family)
    kind = EXACT if n == 1 else LOWER_BOUND
    return NormEstimate(value, kind, family, used, seed)


def sub_seed(seed: int, *keys: int) -> int:
    """Derive a child integer seed from (seed, keys)."""
    return int(np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1)[0])


def hilbert_cstar_multinorm_in_algebra(elements: Sequence[AlgebraElement],
                                       samples: int = 5000, seed: int = 0) -> NormEstimate:
    """Same norm for E = A, searched over projections p_i of A itself.

    Families are drawn as u diag(group pattern) u* with u a sampled unitary of
    A, independently of the operator-level search code.
    """
    elements = list(elements)
    desc = elements[0].descriptor
    n = len(elements)
    rng = sub_rng(seed, 21)
    one = AlgebraElement.identity(desc)
    best, best_fam = -1.0, None
    for i in range(n):
        fam = [one if t == i else AlgebraElement.zero(desc) for t in range(n)]
        val = alg_norm(_sum_products(fam, elements))
        if val > best:
            best, best_fam = val, fam
    for _ in range(samples):
        blocks_per = [[] for _ in range(n)]
        for k in desc.block_sizes:
            u = haar_unitary(k, rng)
            labels = rng.integers(0, n, size=k)
            for t in range(n):
                d = (labels == t).astype(float)
                blocks_per[t].append((u * d) @ u.conj().T)
        fam = [AlgebraElement(desc, b) for b in blocks_per]
        val = alg_norm(_sum_products(fam, elements))
        if val > best:
            best, best_fam = val, fam
    return NormEstimate(best, LOWER_BOUND, best_fam, {"samples": samples}, seed)


def _sum_products(ps, xs):
    out = ps[0] @ xs[0]
    for p, x in zip(ps[1:], xs[1:]):
        out = out + p @ x
    return out


# -- dispatch -------------------------------------------------------------------

def evaluate(kind, xs: Sequence[ModuleVector], budget: SearchBudget | None = None,
             seed: int = 0) -> NormEstimate:
    """Evaluate the power-norm ``kind`` on a tuple."""
    kind = as_kind(kind)
    xs = check_tuple(xs)
    if not kind.supports(xs[0].descriptor):
        raise UnsupportedAlgebraError(f"{kind.tag} is not defined over {xs[0].descriptor}")
    budget = budget or kind.budget
    if len(xs) == 1 and kind.tag in ("hilbert_cstar", "mu"):
        return NormEstimate(vec_norm(xs[0]), EXACT, xs[0] / vec_norm(xs[0])
                            if not xs[0].is_zero() else None, seed=seed)
    if kind.tag == "lattice":
        return lattice_multinorm(xs)
    if kind.tag == "dual_lattice":
        return dual_lattice_multinorm(xs)
    if kind.tag == "hilbert_cstar":
        return hilbert_cstar_multinorm(xs, budget, seed)
    if kind.tag == "mu":
        return mu(xs, budget, seed)
    if kind.tag == "mu_star":
        return mu_star(xs)
    if kind.tag == "l2_module":
        return l2_module_norm(xs)
    return classical_mu2(xs)


def reevaluate_witness(kind, xs: Sequence[ModuleVector], estimate: NormEstimate) -> float:
    """Objective at the stored witness (for lower-bound estimates)."""
    kind = as_kind(kind)
    if kind.tag == "hilbert_cstar" and isinstance(estimate.witness, ProjectionFamily):
        return hilbert_family_value(xs, estimate.witness)
    if kind.tag == "mu" and isinstance(estimate.witness, ModuleVector):
        return mu_objective(xs, estimate.witness)
    raise ValueError("no witness to re-evaluate")


# -- min-lambda characterization of mu_star -------------------------------------

@dataclass
class MinLambdaReport:
    lam: float
    trials: int
    violations: int
    worst_margin: float
    minimality_witnessed: bool

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.minimality_witnessed


def _column_abs(xs, y):
    """(sum_i |<x_i, y>|^2)^{1/2} as an algebra element."""
    from .algebra import alg_sqrt_psd
    total = None
    for x in xs:
        ip = inner_product(x, y)
        t = ip.adjoint() @ ip
        total = t if total is None else total + t
    return alg_sqrt_psd(total)


def mu_star_min_lambda_check(xs: Sequence[ModuleVector], trials: int = 500, seed: int = 0,
                             tol: float = 1e-8) -> MinLambdaReport:
    """Check (sum |<x_i,x>|^2)^{1/2} <= lam |x| for sampled x, lam = mu_star(xs).

    Minimality: at the top singular direction the inequality fails for
    lam * (1 - 1e-3).
    """
    from .algebra import alg_order_margin
    from .hilbert_module import vec_abs
    xs = check_tuple(xs)
    desc, rank = xs[0].descriptor, xs[0].rank
    lam = mu_star(xs).value
    violations, worst = 0, np.inf
    for t in range(trials):
        x = sample_vector(desc, rank, sub_rng(seed, 31, t))
        margin = alg_order_margin(_column_abs(xs, x), lam * vec_abs(x))
        worst = min(worst, margin)
        if margin < -tol:
            violations += 1
    witnessed = False
    if lam > 0:
        _, j = _stacked_sigma(xs)
        mats = [np.zeros_like(m) for m in xs[0].mats]
        u, _, _ = np.linalg.svd(stacked(xs, j))
        mats[j][:, 0] = u[:, 0]
        y = ModuleVector(desc, rank, mats)
        shrunk = lam * (1 - 1e-3)
        witnessed = alg_order_margin(_column_abs(xs, y), shrunk * vec_abs(y)) < -tol
    return MinLambdaReport(lam, trials, violations, float(worst), witnessed)


# -- amplification and multi-bounded norms ------------------------------------

def top_singular_vector(t: ModuleOperator) -> ModuleVector:
    """Unit z with ||T z|| = ||T||: top right singular vector in every block."""
    mats = []
    for m, k in zip(t.mats, t.descriptor.block_sizes):
        _, _, vh = np.linalg.svd(m)
        z = np.zeros((t.domain_rank * k, k), dtype=complex)
        z[:, 0] = vh[0].conj()
        mats.append(z)
    return ModuleVector(t.descriptor, t.domain_rank, mats)


def singular_frame(t: ModuleOperator) -> list[ModuleVector]:
    """Right singular vectors of T, one tuple slot per singular direction."""
    desc, rank = t.descriptor, t.domain_rank
    per_block = []
    for m in t.mats:
        _, _, vh = np.linalg.svd(m)
        per_block.append(vh.conj().T)
    out = []
    width = max(rank * k for k in desc.block_sizes)
    for c in range(width):
        mats = []
        for j, k in enumerate(desc.block_sizes):
            z = np.zeros((rank * k, k), dtype=complex)
            # distribute columns c*k .. c*k+k-1 of the singular basis
            cols = per_block[j][:, c * k:(c + 1) * k] if (c + 1) * k <= rank * k else None
            if cols is not None:
                z[:, :] = cols
            mats.append(z)
        v = ModuleVector(desc, rank, mats)
        if not v.is_zero():
            out.append(v)
    return out


def standard_basis_tuple(desc, rank: int) -> list[ModuleVector]:
    return [ModuleVector.basis(desc, rank, i) for i in range(rank)]


def _pad(xs, n):
    zero = ModuleVector.zero(xs[0].descriptor, xs[0].rank)
    return list(xs[:n]) + [zero] * max(0, n - len(xs))


def inner_budget(budget: SearchBudget) -> SearchBudget:
    """Reduced budget for norm evaluations nested inside a tuple search."""
    return SearchBudget(samples=max(1, budget.samples // 20),
                        restarts=max(1, budget.restarts // 8),
                        local_steps=max(1, budget.local_steps // 20),
                        step_scale=budget.step_scale,
                        stagnation_halvings=budget.stagnation_halvings)


@dataclass
class _Ratio:
    value: float
    xs: list
    num: NormEstimate
    den: NormEstimate


def _ratio(t, xs, dk, ck, budget, seed) -> _Ratio | None:
    den = evaluate(dk, xs, budget, seed)
    if den.value <= 1e-300:
        return None
    num = evaluate(ck, [t @ x for x in xs], budget, seed)
    return _Ratio(num.value / den.value, xs, num, den)


def amplification_norm(t: ModuleOperator, n: int, domain_kind="hilbert_cstar",
                       codomain_kind="hilbert_cstar", budget: SearchBudget | None = None,
                       seed: int = 0) -> NormEstimate:
    """Estimate ||T^(n)|| = sup ||(Tx_i)||_n / ||(x_i)||_n between two power-norms.

    Candidates per level n' <= n: the best tuple of level n'-1 padded with a
    zero, structured tuples (top singular vector, standard basis, singular
    frame) and ``budget.restarts`` Gaussian tuples.  Nested norm evaluations of
    a candidate share one seed; when a candidate beats the incumbent its
    denominator is re-searched with a fresh seed and the larger (better) lower
    bound kept, damping winner's-curse bias.  The sequence over n' is
    nondecreasing by construction and reported in ``extras``.
    """
    dk, ck = as_kind(domain_kind), as_kind(codomain_kind)
    if n < 1:
        raise ValueError("n must be >= 1")
    desc = t.descriptor
    for kind in (dk, ck):
        if not kind.supports(desc):
            raise UnsupportedKindError(f"{kind.tag} is not evaluable over {desc}")
    budget = budget or SearchBudget()
    ib = inner_budget(budget)
    norm_t = op_norm(t)
    z = top_singular_vector(t)
    best = _Ratio(vec_norm(t @ z) / vec_norm(z), [z], None, None)
    sequence = [best.value]
    evaluated = 1
    basis = standard_basis_tuple(desc, t.domain_rank)
    sframe = singular_frame(t)
    for level in range(2, n + 1):
        cands = [basis[:level], sframe[:level]]
        for r in range(budget.restarts):
            rng = sub_rng(seed, 41, level, r)
            cands.append([sample_vector(desc, t.domain_rank, rng) for _ in range(level)])
        for c_idx, xs in enumerate(cands):
            if not xs:
                continue
            xs = _pad(xs, level)
            pseed = sub_seed(seed, level, c_idx)
            rat = _ratio(t, xs, dk, ck, ib, pseed)
            evaluated += 1
            if rat is None or rat.value <= best.value:
                continue
            if not rat.den.kind == EXACT:
                den2 = evaluate(dk, xs, budget, sub_seed(seed, level, c_idx, 1))
                if den2.value > rat.den.value:
                    rat = _Ratio(rat.num.value / den2.value, xs, rat.num, den2)
            if rat.value > best.value:
                best = rat
        sequence.append(best.value)
    kind = EXACT if n == 1 else LOWER_BOUND
    witness = {"tuple": _pad(best.xs, n),
               "numerator": best.num.witness if best.num else None,
               "denominator": best.den.witness if best.den else None}
    monotone = all(b >= a for a, b in zip(sequence, sequence[1:]))
    return NormEstimate(best.value, kind, witness,
                        {**ib.as_dict(), "tuples": evaluated}, seed,
                        extras={"sequence": sequence, "op_norm": norm_t,
                                "monotone": monotone,
                                "upper_bound_n_norm": n * norm_t})


def mb_norm(t: ModuleOperator, n_max: int, kinds=("hilbert_cstar", "hilbert_cstar"),
            budget: SearchBudget | None = None, seed: int = 0) -> NormEstimate:
    """Finite-stage lower bound for the multi-bounded norm (the limit of ||T^(n)||)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return amplification_norm(t, n_max, kinds[0], kinds[1], budget, seed)


# -- axiom checker --------------------------------------------------------------

@dataclass
class AxiomResult:
    name: str
    passed: bool
    mode: str
    worst: float
    count: int


@dataclass
class AxiomReport:
    kind: str
    results: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())


def axiom_check(kind, desc, rank: int = 2, n: int = 3, samples: int = 100, seed: int = 0,
                budget: SearchBudget | None = None, tol: float = 1e-10,
                slack: float = 0.01) -> AxiomReport:
    """Check power-norm axioms on sampled tuples.

    Exact kinds are checked against ``tol`` (scaled by 1 + value).  Search
    kinds compare two runs with a shared seed and accept a relative ``slack``;
    those results are labelled statistical.
    """
    from .algebra import as_descriptor
    kind = as_kind(kind)
    desc = as_descriptor(desc)
    if not kind.supports(desc):
        raise UnsupportedAlgebraError(f"{kind.tag} is not defined over {desc}")
    budget = budget or SearchBudget(samples=500, restarts=3, local_steps=40)
    exact = kind.exact or (kind.tag == "mu" and desc.commutative())
    mode = "exact" if exact else "statistical"
    worst: dict[str, float] = {}

    def note(name, excess, scale):
        # excess > 0 is a violation; normalized to tolerance units
        allowed = tol * (1 + scale) if exact else slack * max(scale, 1e-300)
        worst[name] = max(worst.get(name, -np.inf), excess / allowed)

    for s in range(samples):
        rng = sub_rng(seed, 51, s)
        xs = [sample_vector(desc, rank, rng) * float(rng.uniform(0.2, 2.0)) for _ in range(n)]
        es = sub_seed(seed, s)

        def ev(tup):
            return evaluate(kind, tup, budget, es).value

        base = ev(xs)
        norms = [vec_norm(x) for x in xs]
        # level 1
        v1 = ev(xs[:1])
        note("level1", abs(v1 - norms[0]), norms[0])
        # A1 permutation
        perm = rng.permutation(n)
        note("A1", abs(ev([xs[i] for i in perm]) - base), base)
        # A2 scalar contraction
        alphas = ginibre(n, rng)
        amax = float(np.max(np.abs(alphas)))
        note("A2", ev([complex(a) * x for a, x in zip(alphas, xs)]) - amax * base, amax * base)
        # A3 drop trailing zero
        zero = ModuleVector.zero(desc, rank)
        note("A3", abs(ev(xs + [zero]) - base), base)
        # sandwich
        note("sandwich_lower", max(norms) - base, base)
        note("sandwich_upper", base - sum(norms), sum(norms))
        if kind.tag == "mu_star":
            elems = [alg_sample(desc, "generic", int(rng.integers(2 ** 31))) for _ in range(n)]
            amax = max(alg_norm(a) for a in elems)
            note("B2", ev([x @ a for x, a in zip(xs, elems)]) - amax * base, amax * base)
        if kind.tag in ("lattice", "hilbert_cstar") and n >= 2:
            dup = xs[:n - 1] + [xs[n - 2]]
            ref = ev(xs[:n - 1])
            note("A4", ev(dup) - ref, ref)
        if kind.tag == "dual_lattice" and n >= 2:
            dup = xs[:n - 1] + [xs[n - 2]]
            dbl = xs[:n - 2] + [2.0 * xs[n - 2]]
            ref = ev(dbl)
            note("B4", abs(ev(dup) - ref), ref)
    results = {name: AxiomResult(name, w <= 1.0, mode, float(w), samples)
               for name, w in worst.items()}
    return AxiomReport(kind.tag, results)
