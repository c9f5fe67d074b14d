"""Summing norms, frames, and the unitary triangle inequality for |a + b|.

pi2(T) is the sup of ||sum |T x_i|^2||^{1/2} over tuples with mu(x) <= 1, and
pi1(T) the sup of ||sum <|T| x_i, x_i>|| over the same tuples.  Over
commutative algebras both have closed forms through any normalized tight
frame; otherwise only certified lower bounds are produced.  Every evaluated
tuple is scaled to be admissible, by exact mu in the commutative case and by
the upper bound ||sum |x_i|^2||^{1/2} >= mu otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    alg_abs,
    alg_leq,
    alg_norm,
    alg_order_margin,
    as_descriptor,
    canonical_phase,
    ginibre,
    haar_unitary,
)
from .errors import ConstructionError, FrameError, ShapeError, UnsupportedAlgebraError
from .hilbert_module import (
    ModuleOperator,
    ModuleVector,
    inner_product,
    op_abs,
    polar_decompose,
    sample_vector,
)
from .powernorms import (
    EXACT,
    LOWER_BOUND,
    NormEstimate,
    singular_frame,
    standard_basis_tuple,
    top_singular_vector,
)
from .search import SearchBudget, argmax_first, sub_rng

FRAME_TOL = 1e-8


@dataclass
class Frame:
    vectors: list
    bounds: tuple = field(default=None)

    def __post_init__(self):
        if not self.vectors:
            raise FrameError("a frame needs at least one vector")
        v0 = self.vectors[0]
        for v in self.vectors:
            if v.descriptor != v0.descriptor or v.rank != v0.rank:
                raise ShapeError("frame vectors must live in one module")
        if self.bounds is None:
            self.bounds = frame_bounds(self.vectors)

    @property
    def descriptor(self):
        return self.vectors[0].descriptor

    @property
    def rank(self) -> int:
        return self.vectors[0].rank

    @property
    def normalized_tight(self) -> bool:
        c, d = self.bounds
        return abs(c - 1) <= FRAME_TOL and abs(d - 1) <= FRAME_TOL


def frame_operator(vectors: Sequence[ModuleVector]) -> ModuleOperator:
    """S(x) = sum f_i <f_i, x>."""
    v0 = vectors[0]
    mats = [sum(f.mats[j] @ f.mats[j].conj().T for f in vectors)
            for j in range(v0.descriptor.n_blocks)]
    return ModuleOperator(v0.descriptor, v0.rank, v0.rank, mats)


def frame_bounds(vectors: Sequence[ModuleVector]) -> tuple[float, float]:
    """Optimal (C, D) from the spectrum of the frame operator."""
    s = frame_operator(vectors)
    eig = [np.linalg.eigvalsh((m + m.conj().T) / 2) for m in s.mats]
    c = float(min(e[0] for e in eig))
    d = float(max(e[-1] for e in eig))
    if c <= 1e-10:
        raise FrameError(f"not a frame: smallest frame-operator eigenvalue {c:.3e}")
    return c, d


def frame_verify(f: Frame, trials: int = 100, seed: int = 0) -> tuple[float, float]:
    """Bounds (C, D), cross-checked against the frame inequality on sampled x."""
    c, d = frame_bounds(f.vectors)
    for t in range(trials):
        x = sample_vector(f.descriptor, f.rank, sub_rng(seed, 61, t))
        xx = inner_product(x, x)
        total = None
        for v in f.vectors:
            ip = inner_product(x, v)
            term = ip @ ip.adjoint()
            total = term if total is None else total + term
        scale = FRAME_TOL * (1 + alg_norm(xx))
        if not (alg_leq(xx * c, total, scale) and alg_leq(total, xx * d, scale)):
            raise FrameError(f"frame inequality failed on sample {t}")
    return c, d


def standard_frame(desc, m: int) -> Frame:
    desc = as_descriptor(desc)
    return Frame(standard_basis_tuple(desc, m), bounds=(1.0, 1.0))


def rotated_frame(desc, m: int, seed: int = 0) -> Frame:
    """Image of the standard frame under a sampled unitary of L(A^m)."""
    desc = as_descriptor(desc)
    rng = sub_rng(seed, 62)
    u = ModuleOperator(desc, m, m, [haar_unitary(m * k, rng) for k in desc.block_sizes])
    return Frame([u @ v for v in standard_basis_tuple(desc, m)])


def _require_commutative(t, what):
    if not t.descriptor.commutative():
        raise UnsupportedAlgebraError(f"{what} is only available over commutative algebras")


def _square_sum(vecs: Sequence[ModuleVector]) -> AlgebraElement:
    total = inner_product(vecs[0], vecs[0])
    for v in vecs[1:]:
        total = total + inner_product(v, v)
    return total


def pi2_frame(t: ModuleOperator, frame: Frame | None = None) -> NormEstimate:
    """Closed form ||sum <T f_i, T f_i>||^{1/2} for a normalized tight frame."""
    _require_commutative(t, "pi2_frame")
    frame = frame or standard_frame(t.descriptor, t.domain_rank)
    if frame.rank != t.domain_rank or frame.descriptor != t.descriptor:
        raise ShapeError("frame does not live in the domain of T")
    if not frame.normalized_tight:
        raise FrameError(f"frame is not normalized tight, bounds {frame.bounds}")
    value = np.sqrt(alg_norm(_square_sum([t @ f for f in frame.vectors])))
    return NormEstimate(float(value), EXACT, frame)


@dataclass
class SummingReport:
    estimate: NormEstimate
    admissible_tuples_used: int
    normalization: str
    converged: bool = True
    sequence: list = field(default_factory=list)

    def __post_init__(self):
        if self.normalization not in ("exact_mu", "certified_upper_bound", "closed_form"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def value(self) -> float:
        return self.estimate.value


def _block_arrays(xs, j):
    return np.stack([x.mats[j] for x in xs])


def _normalizers(xs_blocks, commutative):
    """Per tuple: exact mu (sigma_max of [X_1..X_n]) or ||sum X_i^H X_i||^{1/2}."""
    # xs_blocks[j]: (S, n, N, k)
    vals = []
    for xb in xs_blocks:
        s, n, nn, k = xb.shape
        if commutative:
            flat = xb.reshape(s, n, nn).transpose(0, 2, 1)
            vals.append(np.linalg.norm(flat, 2, axis=(1, 2)))
        else:
            g = np.einsum("sirk,sirl->skl", xb.conj(), xb)
            vals.append(np.sqrt(np.clip(np.linalg.eigvalsh(g)[:, -1], 0, None)))
    return np.max(vals, axis=0)


def _objective_batch(op_mats, xs_blocks, weight="square"):
    """Per tuple: ||sum |T x_i|^2||^{1/2} or ||sum <W x_i, x_i>|| with W = |T|."""
    vals = []
    for m, xb in zip(op_mats, xs_blocks):
        if weight == "square":
            y = np.einsum("ab,sibk->siak", m, xb)
            g = np.einsum("sirk,sirl->skl", y.conj(), y)
            vals.append(np.sqrt(np.clip(np.linalg.eigvalsh(g)[:, -1], 0, None)))
        else:
            wx = np.einsum("ab,sibk->siak", m, xb)
            g = np.einsum("sirk,sirl->skl", xb.conj(), wx)
            g = (g + np.conj(np.swapaxes(g, 1, 2))) / 2
            vals.append(np.max(np.abs(np.linalg.eigvalsh(g)), axis=1))
    return np.max(vals, axis=0)


def _tuple_value(t_mats, xs, commutative, weight):
    blocks = [_block_arrays(xs, j)[None] for j in range(len(t_mats))]
    nrm = float(_normalizers(blocks, commutative)[0])
    if nrm <= 0:
        return 0.0, xs
    scaled = [x / nrm for x in xs]
    blocks = [_block_arrays(scaled, j)[None] for j in range(len(t_mats))]
    return float(_objective_batch(t_mats, blocks, weight)[0]), scaled


def _summing_search(t: ModuleOperator, weight_mats, weight, n_max, budget, seed):
    desc, m = t.descriptor, t.domain_rank
    commutative = desc.commutative()
    if n_max is None:
        n_max = 2 * m * desc.total_dim()
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    budget = budget or SearchBudget()
    cands = []
    structured = [[top_singular_vector(t)]]
    if m == 1:
        structured.append([ModuleVector.basis(desc, 1, 0)])
    structured.append(standard_basis_tuple(desc, m))
    structured.append(singular_frame(t))
    for xs in structured:
        if not xs or len(xs) > n_max:
            xs = xs[:n_max]
        if not xs:
            continue
        val, scaled = _tuple_value(weight_mats, xs, commutative, weight)
        cands.append((val, scaled))
    per_level = max(1, budget.samples // n_max)
    best_by_level = []
    for n in range(1, n_max + 1):
        rng = sub_rng(seed, 71, n)
        blocks = [ginibre((per_level, n, m * k, k), rng) for k in desc.block_sizes]
        nrm = _normalizers(blocks, commutative)
        nrm = np.where(nrm > 0, nrm, 1.0)
        blocks = [b / nrm[:, None, None, None] for b in blocks]
        vals = _objective_batch(weight_mats, blocks, weight)
        i = argmax_first(vals)
        xs = [ModuleVector(desc, m, [b[i, c] for b in blocks]) for c in range(n)]
        cands.append((float(vals[i]), xs))
        best_by_level.append(max(c[0] for c in cands))
    i = argmax_first([c[0] for c in cands])
    value, witness = cands[i]
    # re-evaluate the witness through the module layer
    if weight == "square":
        value = float(np.sqrt(alg_norm(_square_sum([t @ x for x in witness]))))
    else:
        w = ModuleOperator(desc, m, m, weight_mats)
        total = inner_product(w @ witness[0], witness[0])
        for x in witness[1:]:
            total = total + inner_product(w @ x, x)
        value = alg_norm(total)
    half = best_by_level[max(0, n_max // 2 - 1)]
    converged = best_by_level[-1] <= half * (1 + 1e-12) + 1e-300
    kind = LOWER_BOUND
    norm = "exact_mu" if commutative else "certified_upper_bound"
    est = NormEstimate(value, kind, witness, {**budget.as_dict(), "n_max": n_max,
                                              "per_level": per_level}, seed)
    return SummingReport(est, len(structured) + per_level * n_max, norm, converged,
                         best_by_level)


def pi2_estimate(t: ModuleOperator, n_max: int | None = None,
                 budget: SearchBudget | None = None, seed: int = 0) -> SummingReport:
    """Certified lower bound for pi2(T) from sampled and structured admissible tuples.

    ``n_max`` defaults to 2 m (total block dimension); tuples of length n use
    their own random stream, so the estimate is monotone in ``n_max``.
    """
    return _summing_search(t, list(t.mats), "square", n_max, budget, seed)


def weighted_tuple_admissibility(xs: Sequence[ModuleVector]) -> float:
    """The normalizer used for a tuple (exact mu or its certified upper bound)."""
    desc = xs[0].descriptor
    blocks = [_block_arrays(xs, j)[None] for j in range(desc.n_blocks)]
    return float(_normalizers(blocks, desc.commutative())[0])


def pi1(t: ModuleOperator, mode: str = "frame_exact", n_max: int | None = None,
        budget: SearchBudget | None = None, seed: int = 0) -> SummingReport:
    """pi1(T) = sup ||sum <|T| x_i, x_i>|| over admissible tuples."""
    if not t.is_square:
        raise ShapeError("pi1 needs an operator on a single module")
    abs_t = op_abs(t)
    if mode == "frame_exact":
        _require_commutative(t, "pi1 frame_exact")
        frame = standard_frame(t.descriptor, t.domain_rank)
        total = inner_product(abs_t @ frame.vectors[0], frame.vectors[0])
        for f in frame.vectors[1:]:
            total = total + inner_product(abs_t @ f, f)
        est = NormEstimate(alg_norm(total), EXACT, frame)
        return SummingReport(est, len(frame.vectors), "closed_form")
    if mode == "estimate":
        return _summing_search(t, list(abs_t.mats), "weighted", n_max, budget, seed)
    raise ValueError(f"unknown pi1 mode {mode!r}")


# -- unitary triangle inequality ---------------------------------------------

def _herm_desc(m):
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    return w[order], canonical_phase(v[:, order])


def _triangle_block(a: np.ndarray, b: np.ndarray):
    u_s, _, vh = np.linalg.svd(a + b)
    w = u_s @ vh  # unitary with a + b = w |a + b|
    out = []
    for c in (a, b):
        _, p = _herm_desc(psd_abs(c))
        _, r = _herm_desc(w.conj().T @ c)
        out.append(p @ r.conj().T)
    return out


def psd_abs(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m.conj().T @ m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def triangle_decomposition(a: AlgebraElement, b: AlgebraElement, eps: float = 0.0,
                           tol: float = 1e-9):
    """Unitaries (u, v) with |a + b| <= u*|a|u + v*|b|v + eps 1.

    Per block, with a + b = w|a + b| and w unitary, |a + b| = Re(w*a) + Re(w*b).
    Each Re(w*c) has eigenvalues dominated by the singular values of c, so the
    unitary carrying the ordered eigenbasis of Re(w*c) onto that of |c| gives
    Re(w*c) <= u*|c|u.  The result is verified before it is returned.
    """
    if a.descriptor != b.descriptor:
        raise ShapeError("operands live in different algebras")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    ub, vb = [], []
    for x, y in zip(a.blocks, b.blocks):
        u, v = _triangle_block(np.asarray(x), np.asarray(y))
        ub.append(u)
        vb.append(v)
    desc = a.descriptor
    u, v = AlgebraElement(desc, ub), AlgebraElement(desc, vb)
    one = AlgebraElement.identity(desc)
    rhs = u.adjoint() @ alg_abs(a) @ u + v.adjoint() @ alg_abs(b) @ v + one * eps
    margin = alg_order_margin(alg_abs(a + b), rhs)
    unit_err = max(alg_norm(w.adjoint() @ w - one) for w in (u, v))
    if margin < -tol or unit_err > 1e-10:
        raise ConstructionError("triangle construction failed verification",
                                {"margin": margin, "unitary": unit_err})
    return u, v


def triangle_margin(a, b, u, v, eps: float = 0.0) -> float:
    """Smallest eigenvalue of u*|a|u + v*|b|v + eps 1 - |a + b|."""
    one = AlgebraElement.identity(a.descriptor)
    rhs = u.adjoint() @ alg_abs(a) @ u + v.adjoint() @ alg_abs(b) @ v + one * eps
    return alg_order_margin(alg_abs(a + b), rhs)


def plain_triangle_margin(a: AlgebraElement, b: AlgebraElement) -> float:
    """Smallest eigenvalue of |a| + |b| - |a + b| (negative: no plain triangle)."""
    return alg_order_margin(alg_abs(a + b), alg_abs(a) + alg_abs(b))


# -- adjoint symmetry ------------------------------------------------------------

@dataclass
class SymmetryReport:
    mode: str
    pi2: tuple
    pi1: tuple | None
    tol: float
    passed: bool
    polar_residuals: dict


def pi_adjoint_symmetry_check(t: ModuleOperator, budget: SearchBudget | None = None,
                              seed: int = 0, slack: float = 0.02) -> SymmetryReport:
    """pi2(T) = pi2(T*) and, for square T, pi1(T) = pi1(T*).

    Commutative algebras use the closed forms at 1e-9; otherwise paired-seed
    lower bounds are compared at relative ``slack``.  The polar decomposition
    of T is verified along the way (its range projections exist and are
    checked, which is all the finite-dimensional argument needs).
    """
    pol = polar_decompose(t)
    ts = t.adjoint()
    if t.descriptor.commutative():
        p2 = (pi2_frame(t).value, pi2_frame(ts).value)
        p1 = (pi1(t).value, pi1(ts).value) if t.is_square else None
        tol = 1e-9
        ok = abs(p2[0] - p2[1]) <= tol * (1 + p2[0])
        if p1 is not None:
            ok = ok and abs(p1[0] - p1[1]) <= tol * (1 + p1[0])
        return SymmetryReport("exact", p2, p1, tol, ok, pol.residuals)
    p2 = (pi2_estimate(t, budget=budget, seed=seed).value,
          pi2_estimate(ts, budget=budget, seed=seed).value)
    p1 = None
    if t.is_square:
        p1 = (pi1(t, "estimate", budget=budget, seed=seed).value,
              pi1(ts, "estimate", budget=budget, seed=seed).value)

    def close(pair):
        return abs(pair[0] - pair[1]) <= slack * max(pair)

    ok = close(p2) and (p1 is None or close(p1))
    return SymmetryReport("statistical", p2, p1, slack, ok, pol.residuals)
