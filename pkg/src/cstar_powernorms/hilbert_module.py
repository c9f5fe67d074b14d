"""Free Hilbert C*-modules E = A^m and the adjointable operators between them.

Storage uses one fixed flattening per algebra block j (size k = k_j):

* a vector x = (x_1, ..., x_m) is the (m*k) x k matrix stacking x_1, ..., x_m
  vertically, so row ``b*k + r`` holds row r of x_b;
* an operator T = [T_ab] (m' x m over A, codomain-major) is the (m'*k) x (m*k)
  matrix with entry ``[a*k + r, b*k + c] = T_ab[r, c]``.

Under this isomorphism M_m(M_k) = M_{mk}, applying T is a matrix product,
``<x, y> = X^H Y`` blockwise, and norms are largest singular values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import subspace_angles

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    alg_classify,
    alg_norm,
    alg_sqrt_psd,
    as_descriptor,
    ginibre,
    psd_power_matrix,
    psd_sqrt_matrix,
)
from .errors import DecompositionVerificationError, ShapeError

RANK_TOL = 1e-10
ANGLE_TOL = 1e-8


def _readonly(m) -> np.ndarray:
    out = np.array(m, dtype=complex)
    out.setflags(write=False)
    return out


class ModuleVector:
    """Element of A^m; ``mats[j]`` is the flattened (m*k_j) x k_j block."""

    __slots__ = ("descriptor", "rank", "mats")

    def __init__(self, descriptor, rank: int, mats: Sequence):
        descriptor = as_descriptor(descriptor)
        rank = int(rank)
        if rank < 1:
            raise ShapeError("module rank must be >= 1")
        mats = tuple(mats)
        if len(mats) != descriptor.n_blocks:
            raise ShapeError(f"expected {descriptor.n_blocks} blocks, got {len(mats)}")
        out = []
        for j, (k, m) in enumerate(zip(descriptor.block_sizes, mats)):
            m = np.asarray(m, dtype=complex)
            if m.shape != (rank * k, k):
                raise ShapeError(f"block {j}: shape {m.shape}, expected {(rank * k, k)}")
            out.append(_readonly(m) if m.flags.writeable else m)
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "mats", tuple(out))

    def __setattr__(self, name, value):
        raise AttributeError("ModuleVector is immutable")

    @classmethod
    def from_entries(cls, entries: Sequence[AlgebraElement]) -> ModuleVector:
        entries = list(entries)
        if not entries:
            raise ShapeError("a module vector needs at least one entry")
        desc = entries[0].descriptor
        for i, e in enumerate(entries):
            if e.descriptor != desc:
                raise ShapeError(f"entry {i} has descriptor {e.descriptor}, expected {desc}")
        mats = [np.vstack([e.blocks[j] for e in entries]) for j in range(desc.n_blocks)]
        return cls(desc, len(entries), mats)

    @classmethod
    def zero(cls, descriptor, rank: int) -> ModuleVector:
        descriptor = as_descriptor(descriptor)
        return cls(descriptor, rank, [np.zeros((rank * k, k)) for k in descriptor.block_sizes])

    @classmethod
    def basis(cls, descriptor, rank: int, i: int) -> ModuleVector:
        """delta_i: the unit of A in slot i, zeros elsewhere."""
        descriptor = as_descriptor(descriptor)
        if not 0 <= i < rank:
            raise ShapeError(f"basis index {i} out of range for rank {rank}")
        mats = []
        for k in descriptor.block_sizes:
            m = np.zeros((rank * k, k), dtype=complex)
            m[i * k:(i + 1) * k] = np.eye(k)
            mats.append(m)
        return cls(descriptor, rank, mats)

    @property
    def entries(self) -> list[AlgebraElement]:
        ks = self.descriptor.block_sizes
        return [AlgebraElement(self.descriptor,
                               [m[i * k:(i + 1) * k] for m, k in zip(self.mats, ks)])
                for i in range(self.rank)]

    def _check(self, other: ModuleVector):
        if not isinstance(other, ModuleVector):
            raise TypeError(f"expected ModuleVector, got {type(other).__name__}")
        if other.descriptor != self.descriptor or other.rank != self.rank:
            raise ShapeError(
                f"module mismatch: ({self.descriptor}, m={self.rank}) vs "
                f"({other.descriptor}, m={other.rank})")

    def __add__(self, other):
        self._check(other)
        return ModuleVector(self.descriptor, self.rank, [a + b for a, b in zip(self.mats, other.mats)])

    def __sub__(self, other):
        self._check(other)
        return ModuleVector(self.descriptor, self.rank, [a - b for a, b in zip(self.mats, other.mats)])

    def __neg__(self):
        return ModuleVector(self.descriptor, self.rank, [-a for a in self.mats])

    def __mul__(self, c):
        if isinstance(c, (AlgebraElement, ModuleVector)):
            raise TypeError("use `x @ a` for the right module action")
        return ModuleVector(self.descriptor, self.rank, [complex(c) * a for a in self.mats])

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / complex(c))

    def __matmul__(self, a: AlgebraElement) -> ModuleVector:
        """Right module action x . a."""
        if not isinstance(a, AlgebraElement):
            return NotImplemented
        if a.descriptor != self.descriptor:
            raise ShapeError("descriptor mismatch in right action")
        return ModuleVector(self.descriptor, self.rank, [m @ b for m, b in zip(self.mats, a.blocks)])

    def allclose(self, other: ModuleVector, atol: float = 1e-10) -> bool:
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.mats, other.mats))

    def array_equal(self, other: ModuleVector) -> bool:
        self._check(other)
        return all(np.array_equal(a, b) for a, b in zip(self.mats, other.mats))

    def is_zero(self) -> bool:
        return all(not np.any(m) for m in self.mats)

    def __repr__(self):
        return f"ModuleVector({self.descriptor}, m={self.rank})"


class ModuleOperator:
    """Adjointable operator A^m -> A^m', stored as flattened per-block matrices."""

    __slots__ = ("descriptor", "domain_rank", "codomain_rank", "mats")

    def __init__(self, descriptor, domain_rank: int, codomain_rank: int, mats: Sequence):
        descriptor = as_descriptor(descriptor)
        domain_rank, codomain_rank = int(domain_rank), int(codomain_rank)
        if domain_rank < 1 or codomain_rank < 1:
            raise ShapeError("module ranks must be >= 1")
        mats = tuple(mats)
        if len(mats) != descriptor.n_blocks:
            raise ShapeError(f"expected {descriptor.n_blocks} blocks, got {len(mats)}")
        out = []
        for j, (k, m) in enumerate(zip(descriptor.block_sizes, mats)):
            m = np.asarray(m, dtype=complex)
            if m.shape != (codomain_rank * k, domain_rank * k):
                raise ShapeError(f"block {j}: shape {m.shape}, expected "
                                 f"{(codomain_rank * k, domain_rank * k)}")
            out.append(_readonly(m) if m.flags.writeable else m)
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "domain_rank", domain_rank)
        object.__setattr__(self, "codomain_rank", codomain_rank)
        object.__setattr__(self, "mats", tuple(out))

    def __setattr__(self, name, value):
        raise AttributeError("ModuleOperator is immutable")

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[AlgebraElement]]) -> ModuleOperator:
        """Build from a codomain-major matrix of algebra elements."""
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise ShapeError("operator needs at least one entry")
        mp, m = len(rows), len(rows[0])
        if any(len(r) != m for r in rows):
            raise ShapeError("ragged operator entries")
        desc = rows[0][0].descriptor
        if any(e.descriptor != desc for r in rows for e in r):
            raise ShapeError("operator entries with mixed descriptors")
        mats = [np.block([[e.blocks[j] for e in r] for r in rows]) for j in range(desc.n_blocks)]
        return cls(desc, m, mp, mats)

    @classmethod
    def identity(cls, descriptor, rank: int) -> ModuleOperator:
        descriptor = as_descriptor(descriptor)
        return cls(descriptor, rank, rank, [np.eye(rank * k) for k in descriptor.block_sizes])

    @classmethod
    def zero(cls, descriptor, domain_rank: int, codomain_rank: int) -> ModuleOperator:
        descriptor = as_descriptor(descriptor)
        return cls(descriptor, domain_rank, codomain_rank,
                   [np.zeros((codomain_rank * k, domain_rank * k)) for k in descriptor.block_sizes])

    @classmethod
    def diagonal(cls, entries: Sequence[AlgebraElement]) -> ModuleOperator:
        entries = list(entries)
        desc = entries[0].descriptor
        zero = AlgebraElement.zero(desc)
        return cls.from_entries([[entries[i] if i == j else zero for j in range(len(entries))]
                                 for i in range(len(entries))])

    def entry(self, i: int, j: int) -> AlgebraElement:
        ks = self.descriptor.block_sizes
        return AlgebraElement(self.descriptor,
                              [m[i * k:(i + 1) * k, j * k:(j + 1) * k] for m, k in zip(self.mats, ks)])

    @property
    def entries(self) -> list[list[AlgebraElement]]:
        return [[self.entry(i, j) for j in range(self.domain_rank)]
                for i in range(self.codomain_rank)]

    @property
    def is_square(self) -> bool:
        return self.domain_rank == self.codomain_rank

    def adjoint(self) -> ModuleOperator:
        return ModuleOperator(self.descriptor, self.codomain_rank, self.domain_rank,
                              [m.conj().T for m in self.mats])

    @property
    def H(self) -> ModuleOperator:
        return self.adjoint()

    def _check_same(self, other: ModuleOperator):
        if not isinstance(other, ModuleOperator):
            raise TypeError(f"expected ModuleOperator, got {type(other).__name__}")
        if (other.descriptor, other.domain_rank, other.codomain_rank) != (
                self.descriptor, self.domain_rank, self.codomain_rank):
            raise ShapeError("operator shape mismatch")

    def __add__(self, other):
        self._check_same(other)
        return ModuleOperator(self.descriptor, self.domain_rank, self.codomain_rank,
                              [a + b for a, b in zip(self.mats, other.mats)])

    def __sub__(self, other):
        self._check_same(other)
        return ModuleOperator(self.descriptor, self.domain_rank, self.codomain_rank,
                              [a - b for a, b in zip(self.mats, other.mats)])

    def __neg__(self):
        return self * -1.0

    def __mul__(self, c):
        if isinstance(c, (ModuleOperator, ModuleVector, AlgebraElement)):
            raise TypeError("use `@` to apply or compose operators")
        return ModuleOperator(self.descriptor, self.domain_rank, self.codomain_rank,
                              [complex(c) * a for a in self.mats])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, ModuleVector):
            if other.descriptor != self.descriptor or other.rank != self.domain_rank:
                raise ShapeError(f"cannot apply operator with domain rank {self.domain_rank} "
                                 f"to vector of rank {other.rank}")
            return ModuleVector(self.descriptor, self.codomain_rank,
                                [t @ x for t, x in zip(self.mats, other.mats)])
        if isinstance(other, ModuleOperator):
            if other.descriptor != self.descriptor or other.codomain_rank != self.domain_rank:
                raise ShapeError("operator composition shape mismatch")
            return ModuleOperator(self.descriptor, other.domain_rank, self.codomain_rank,
                                  [a @ b for a, b in zip(self.mats, other.mats)])
        return NotImplemented

    def __call__(self, x: ModuleVector) -> ModuleVector:
        return self @ x

    def as_algebra_element(self) -> AlgebraElement:
        """View a square operator as an element of L(E) = M_{m k_1} + ... + M_{m k_r}."""
        if not self.is_square:
            raise ShapeError("only square operators live in the C*-algebra L(E)")
        desc = AlgebraDescriptor(tuple(self.domain_rank * k for k in self.descriptor.block_sizes))
        return AlgebraElement(desc, self.mats)

    def allclose(self, other: ModuleOperator, atol: float = 1e-10) -> bool:
        self._check_same(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.mats, other.mats))

    def array_equal(self, other: ModuleOperator) -> bool:
        self._check_same(other)
        return all(np.array_equal(a, b) for a, b in zip(self.mats, other.mats))

    def __repr__(self):
        return (f"ModuleOperator({self.descriptor}, {self.codomain_rank}x{self.domain_rank})")


# -- operations --------------------------------------------------------------

def inner_product(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    """<x, y> = sum_i x_i* y_i (conjugate-linear in x, A-linear in y)."""
    x._check(y)
    return AlgebraElement(x.descriptor, [a.conj().T @ b for a, b in zip(x.mats, y.mats)])


def vec_abs(x: ModuleVector) -> AlgebraElement:
    return alg_sqrt_psd(inner_product(x, x))


def vec_norm(x: ModuleVector) -> float:
    return float(np.sqrt(alg_norm(inner_product(x, x))))


def theta(y: ModuleVector, x: ModuleVector) -> ModuleOperator:
    """theta_{y,x}: z -> y <x, z>, an operator from x's module to y's."""
    if y.descriptor != x.descriptor:
        raise ShapeError("theta requires a common algebra")
    return ModuleOperator(x.descriptor, x.rank, y.rank,
                          [b @ a.conj().T for a, b in zip(x.mats, y.mats)])


def op_norm(t: ModuleOperator) -> float:
    return max(float(np.linalg.norm(m, 2)) for m in t.mats)


def op_sqrt_psd(t: ModuleOperator) -> ModuleOperator:
    return ModuleOperator(t.descriptor, t.domain_rank, t.codomain_rank,
                          [psd_sqrt_matrix(m) for m in t.mats])


def op_power_psd(t: ModuleOperator, alpha: float) -> ModuleOperator:
    return ModuleOperator(t.descriptor, t.domain_rank, t.codomain_rank,
                          [psd_power_matrix(m, alpha) for m in t.mats])


def op_abs(t: ModuleOperator) -> ModuleOperator:
    """|T| = (T*T)^{1/2} in L(E)."""
    return op_sqrt_psd(t.adjoint() @ t)


def op_classify(t: ModuleOperator, tol: float = 1e-10) -> frozenset:
    """Flags of a square operator, read off in the C*-algebra L(E)."""
    if t.is_square:
        return alg_classify(t.as_algebra_element(), tol)
    flags = alg_classify((t.adjoint() @ t).as_algebra_element(), tol)
    return frozenset({"partial_isometry"}) if "projection" in flags else frozenset()


def sample_vector(desc, rank: int, seed) -> ModuleVector:
    desc = as_descriptor(desc)
    rng = np.random.default_rng(seed)
    return ModuleVector(desc, rank, [ginibre((rank * k, k), rng) for k in desc.block_sizes])


def sample_operator(desc, domain_rank: int, codomain_rank: int | None = None, seed=0,
                    rank_deficiency: int = 0) -> ModuleOperator:
    """Gaussian operator; ``rank_deficiency > 0`` drops that many dimensions per block."""
    desc = as_descriptor(desc)
    codomain_rank = domain_rank if codomain_rank is None else codomain_rank
    rng = np.random.default_rng(seed)
    mats = []
    for k in desc.block_sizes:
        rows, cols = codomain_rank * k, domain_rank * k
        if rank_deficiency:
            r = max(0, min(rows, cols) - rank_deficiency)
            mats.append(ginibre((rows, r), rng) @ ginibre((r, cols), rng))
        else:
            mats.append(ginibre((rows, cols), rng))
    return ModuleOperator(desc, domain_rank, codomain_rank, mats)


# -- polar decomposition -------------------------------------------------------

def _range_basis(m: np.ndarray, cutoff: float) -> np.ndarray:
    u, s, _ = np.linalg.svd(m)
    return u[:, : int(np.sum(s > cutoff))]


def _subspace_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle; inf when the dimensions differ."""
    if a.shape[1] != b.shape[1]:
        return float("inf")
    if a.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(a, b)))


@dataclass
class PolarDecomposition:
    W: ModuleOperator
    abs_t: ModuleOperator
    residuals: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.W, self.abs_t))


def polar_decompose(t: ModuleOperator, tol: float = 1e-9,
                    angle_tol: float = ANGLE_TOL) -> PolarDecomposition:
    """T = W|T| with W a partial isometry vanishing on ker(T).

    Singular values below ``RANK_TOL * ||T||`` are treated as zero.  The result
    is verified before return: reconstruction, the projection property of W*W
    and WW*, their ranges against ran(T*) and ran(T), and ker(W) = ker(T).
    """
    norm = op_norm(t)
    cutoff = RANK_TOL * norm
    ws, abss = [], []
    res = {"reconstruction": 0.0, "source_projection": 0.0, "range_projection": 0.0,
           "source_angle": 0.0, "range_angle": 0.0, "kernel_angle": 0.0}
    for m in t.mats:
        u, s, vh = np.linalg.svd(m)
        r = int(np.sum(s > cutoff))
        w = u[:, :r] @ vh[:r]
        a = (vh[:r].conj().T * s[:r]) @ vh[:r]
        a = (a + a.conj().T) / 2
        ws.append(w)
        abss.append(a)

        res["reconstruction"] = max(res["reconstruction"], float(np.linalg.norm(w @ a - m, 2)))
        src = w.conj().T @ w
        rng_ = w @ w.conj().T
        res["source_projection"] = max(res["source_projection"],
                                       float(np.linalg.norm(src @ src - src, 2)))
        res["range_projection"] = max(res["range_projection"],
                                      float(np.linalg.norm(rng_ @ rng_ - rng_, 2)))
        # ranges compared via independent SVDs of the verified objects
        res["source_angle"] = max(res["source_angle"], _subspace_gap(
            _range_basis(src, 0.5), _range_basis(m.conj().T, cutoff)))
        res["range_angle"] = max(res["range_angle"], _subspace_gap(
            _range_basis(rng_, 0.5), _range_basis(m, cutoff)))
        ker_w = _null_basis(w, 0.5)
        ker_t = _null_basis(m, cutoff)
        res["kernel_angle"] = max(res["kernel_angle"], _subspace_gap(ker_w, ker_t))

    W = ModuleOperator(t.descriptor, t.domain_rank, t.codomain_rank, ws)
    A = ModuleOperator(t.descriptor, t.domain_rank, t.domain_rank, abss)
    bad = {}
    if res["reconstruction"] > tol * (1.0 + norm):
        bad["reconstruction"] = res["reconstruction"]
    for key in ("source_projection", "range_projection"):
        if res[key] > tol:
            bad[key] = res[key]
    for key in ("source_angle", "range_angle", "kernel_angle"):
        if res[key] > angle_tol:
            bad[key] = res[key]
    if bad:
        raise DecompositionVerificationError(f"polar decomposition failed checks: {bad}", res)
    return PolarDecomposition(W, A, res)


def _null_basis(m: np.ndarray, cutoff: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(m)
    r = int(np.sum(s > cutoff))
    return vh[r:].conj().T


@dataclass
class PolarPowerReport:
    alpha: float
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())


def polar_power_identity_check(t: ModuleOperator, alpha: float, tol: float = 1e-9,
                               polar: PolarDecomposition | None = None) -> PolarPowerReport:
    """Residuals of W|T|^a W* = (W|T|W*)^a = |T*|^a and W*|T*|^a W = (W*|T*|W)^a = |T|^a.

    The right-hand sides come from eigendecompositions of TT* and T*T directly,
    independent of the decomposition being checked.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    W, abs_t = polar if polar is not None else polar_decompose(t)
    Wh = W.adjoint()
    abs_t_star_alpha = op_power_psd(t @ t.adjoint(), alpha / 2)
    abs_t_alpha_direct = op_power_psd(t.adjoint() @ t, alpha / 2)
    abs_t_star = W @ abs_t @ Wh
    lhs1 = W @ op_power_psd(abs_t, alpha) @ Wh
    mid1 = op_power_psd(abs_t_star, alpha)
    lhs2 = Wh @ abs_t_star_alpha @ W
    mid2 = op_power_psd(Wh @ op_power_psd(t @ t.adjoint(), 0.5) @ W, alpha)
    residuals = {
        "W|T|^aW* - |T*|^a": op_norm(lhs1 - abs_t_star_alpha),
        "(W|T|W*)^a - |T*|^a": op_norm(mid1 - abs_t_star_alpha),
        "W*|T*|^aW - |T|^a": op_norm(lhs2 - abs_t_alpha_direct),
        "(W*|T*|W)^a - |T|^a": op_norm(mid2 - abs_t_alpha_direct),
    }
    return PolarPowerReport(alpha, residuals, tol)
