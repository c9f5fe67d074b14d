"""Finite-dimensional C*-algebras A = M_{k_1}(C) + ... + M_{k_r}(C).

Elements are tuples of complex blocks.  The algebra product is ``a @ b``;
``*`` is reserved for complex scalars.  All values are immutable: block arrays
are stored read-only and every operation returns a new element.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotHermitianError, NotPositiveError, RankError, ShapeError

HERMITIAN_TOL = 1e-10
ORDER_TOL = 1e-10

HERMITIAN = "hermitian"
POSITIVE = "positive"
PROJECTION = "projection"
UNITARY = "unitary"
PARTIAL_ISOMETRY = "partial_isometry"
ALL_FLAGS = frozenset({HERMITIAN, POSITIVE, PROJECTION, UNITARY, PARTIAL_ISOMETRY})

SAMPLE_KINDS = ("generic", "hermitian", "positive", "unitary", "projection")


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Block sizes (k_1, ..., k_r) of A = M_{k_1}(C) + ... + M_{k_r}(C)."""

    block_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.block_sizes)
        if not sizes:
            raise ShapeError("block_sizes must be nonempty")
        if any(k < 1 for k in sizes):
            raise ShapeError(f"block sizes must be >= 1, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    def commutative(self) -> bool:
        return all(k == 1 for k in self.block_sizes)

    def total_dim(self) -> int:
        return sum(k * k for k in self.block_sizes)

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)

    def __str__(self):
        return "+".join(f"M{k}" for k in self.block_sizes)


def as_descriptor(desc) -> AlgebraDescriptor:
    if isinstance(desc, AlgebraDescriptor):
        return desc
    return AlgebraDescriptor(tuple(desc))


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


class AlgebraElement:
    """An element of a finite-dimensional C*-algebra, stored blockwise."""

    __slots__ = ("descriptor", "blocks")

    def __init__(self, descriptor, blocks: Sequence):
        descriptor = as_descriptor(descriptor)
        blocks = tuple(blocks)
        if len(blocks) != descriptor.n_blocks:
            raise ShapeError(
                f"expected {descriptor.n_blocks} blocks for {descriptor}, got {len(blocks)}")
        frozen = []
        for j, (k, b) in enumerate(zip(descriptor.block_sizes, blocks)):
            b = np.asarray(b, dtype=complex)
            if b.ndim == 0 and k == 1:
                b = b.reshape(1, 1)
            if b.shape != (k, k):
                raise ShapeError(f"block {j} has shape {b.shape}, expected {(k, k)}")
            frozen.append(b if not b.flags.writeable else _frozen(b))
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "blocks", tuple(frozen))

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    @classmethod
    def identity(cls, descriptor) -> AlgebraElement:
        descriptor = as_descriptor(descriptor)
        return cls(descriptor, [np.eye(k) for k in descriptor.block_sizes])

    @classmethod
    def zero(cls, descriptor) -> AlgebraElement:
        descriptor = as_descriptor(descriptor)
        return cls(descriptor, [np.zeros((k, k)) for k in descriptor.block_sizes])

    @classmethod
    def scalar(cls, descriptor, c: complex) -> AlgebraElement:
        descriptor = as_descriptor(descriptor)
        return cls(descriptor, [c * np.eye(k) for k in descriptor.block_sizes])

    def _check(self, other: AlgebraElement):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.descriptor != self.descriptor:
            raise ShapeError(f"descriptor mismatch: {self.descriptor} vs {other.descriptor}")

    def adjoint(self) -> AlgebraElement:
        return AlgebraElement(self.descriptor, [b.conj().T for b in self.blocks])

    @property
    def H(self) -> AlgebraElement:
        return self.adjoint()

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.descriptor, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.descriptor, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.descriptor, [-a for a in self.blocks])

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.descriptor, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            raise TypeError("use `@` for the algebra product")
        return AlgebraElement(self.descriptor, [complex(c) * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / complex(c))

    def allclose(self, other: AlgebraElement, atol: float = 1e-10) -> bool:
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def array_equal(self, other: AlgebraElement) -> bool:
        self._check(other)
        return all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def __repr__(self):
        return f"AlgebraElement({self.descriptor}, {[b.tolist() for b in self.blocks]})"


# -- matrix-level functional calculus, shared with the module layer ---------

def hermitian_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - m.conj().T, 2)) if m.size else 0.0


def _herm_eigh(m: np.ndarray, tol: float):
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    defect = hermitian_defect(m)
    if defect > tol * scale:
        raise NotHermitianError(f"||a - a*|| = {defect:.3e} exceeds {tol:.1e}")
    return np.linalg.eigh((m + m.conj().T) / 2)


def psd_sqrt_matrix(m: np.ndarray, tol_psd: float | None = None,
                    herm_tol: float = HERMITIAN_TOL) -> np.ndarray:
    w, v = _herm_eigh(m, herm_tol)
    if tol_psd is None:
        tol_psd = 1e-10 * (1.0 + float(np.max(np.abs(w), initial=0.0)))
    if w.size and w.min() < -tol_psd:
        raise NotPositiveError(f"eigenvalue {w.min():.3e} below -{tol_psd:.1e}")
    w = np.clip(w, 0.0, None)
    out = (v * np.sqrt(w)) @ v.conj().T
    return (out + out.conj().T) / 2


def psd_power_matrix(m: np.ndarray, alpha: float, rel_cutoff: float = 1e-12,
                     herm_tol: float = HERMITIAN_TOL) -> np.ndarray:
    """``m**alpha`` for PSD ``m``; eigenvalues below ``rel_cutoff * max`` count as zero.

    Zeroing (rather than only clipping negatives) keeps fractional powers of
    rank-deficient operators free of roundoff leakage such as (1e-17)**0.25.
    """
    w, v = _herm_eigh(m, herm_tol)
    top = float(np.max(np.abs(w), initial=0.0))
    if w.size and w.min() < -max(1e-10 * (1.0 + top), 0.0):
        raise NotPositiveError(f"eigenvalue {w.min():.3e} is negative")
    w = np.where(w > rel_cutoff * top, w, 0.0)
    out = (v * w ** alpha) @ v.conj().T
    return (out + out.conj().T) / 2


def canonical_phase(vecs: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    vecs = np.array(vecs, dtype=complex)
    for c in range(vecs.shape[1]):
        col = vecs[:, c]
        idx = np.flatnonzero(np.abs(col) > eps)
        if idx.size:
            z = col[idx[0]]
            vecs[:, c] = col * (abs(z) / z)
    return vecs


def haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary(ies) via QR of a Ginibre matrix with phase fix."""
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * ph[..., None, :]


def ginibre(shape, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


# -- element-level operations -----------------------------------------------

def alg_norm(a: AlgebraElement) -> float:
    """C*-norm: the largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in a.blocks)


def alg_sqrt_psd(a: AlgebraElement, tol_psd: float | None = None,
                 herm_tol: float = HERMITIAN_TOL) -> AlgebraElement:
    """Unique positive square root; eigenvalues in [-tol_psd, 0) are clipped to 0.

    ``tol_psd`` defaults to ``1e-10 * (1 + ||a||)``.
    """
    if tol_psd is None:
        tol_psd = 1e-10 * (1.0 + alg_norm(a))
    return AlgebraElement(a.descriptor, [psd_sqrt_matrix(b, tol_psd, herm_tol) for b in a.blocks])


def alg_abs(a: AlgebraElement) -> AlgebraElement:
    """|a| = (a* a)^{1/2}."""
    return alg_sqrt_psd(a.adjoint() @ a)


def alg_power_psd(a: AlgebraElement, alpha: float) -> AlgebraElement:
    return AlgebraElement(a.descriptor, [psd_power_matrix(b, alpha) for b in a.blocks])


def alg_leq(a: AlgebraElement, b: AlgebraElement, tol: float = ORDER_TOL,
            herm_tol: float = HERMITIAN_TOL) -> bool:
    """a <= b in the order of the self-adjoint part, up to ``tol`` on eigenvalues."""
    return alg_order_margin(a, b, herm_tol) >= -tol


def alg_order_margin(a: AlgebraElement, b: AlgebraElement,
                     herm_tol: float = HERMITIAN_TOL) -> float:
    """Smallest eigenvalue of b - a over all blocks (>= 0 iff a <= b)."""
    a._check(b)
    margin = np.inf
    for x, y in zip(a.blocks, b.blocks):
        for m in (x, y):
            scale = max(1.0, float(np.linalg.norm(m, 2)))
            if hermitian_defect(m) > herm_tol * scale:
                raise NotHermitianError("alg_leq requires Hermitian operands")
        d = y - x
        margin = min(margin, float(np.linalg.eigvalsh((d + d.conj().T) / 2).min()))
    return margin


def alg_classify(a: AlgebraElement, tol: float = 1e-10) -> frozenset:
    flags = set()
    one = AlgebraElement.identity(a.descriptor)
    herm = alg_norm(a - a.adjoint()) <= tol
    if herm:
        flags.add(HERMITIAN)
        w = min(float(np.linalg.eigvalsh((b + b.conj().T) / 2).min()) for b in a.blocks)
        if w >= -tol:
            flags.add(POSITIVE)
        if alg_norm(a @ a - a) <= tol:
            flags.add(PROJECTION)
    ata = a.adjoint() @ a
    if alg_norm(ata - one) <= tol and alg_norm(a @ a.adjoint() - one) <= tol:
        flags.add(UNITARY)
    if alg_norm(ata @ ata - ata) <= tol and alg_norm(ata - ata.adjoint()) <= tol:
        flags.add(PARTIAL_ISOMETRY)
    return frozenset(flags)


def alg_sample(desc, kind: str = "generic", seed: int = 0,
               ranks: Iterable[int] | None = None) -> AlgebraElement:
    """Deterministic random element of the requested kind.

    ``ranks`` (one entry per block) is the rank profile for ``kind="projection"``;
    when omitted each block gets a uniformly drawn rank.
    """
    desc = as_descriptor(desc)
    if kind not in SAMPLE_KINDS:
        raise ValueError(f"unknown sample kind {kind!r}")
    rng = np.random.default_rng(seed)
    if kind == "projection":
        if ranks is None:
            ranks = [int(rng.integers(0, k + 1)) for k in desc.block_sizes]
        ranks = list(ranks)
        if len(ranks) != desc.n_blocks or any(
                not 0 <= r <= k for r, k in zip(ranks, desc.block_sizes)):
            raise RankError(f"rank profile {ranks} invalid for {desc}")
    blocks = []
    for j, k in enumerate(desc.block_sizes):
        if kind == "generic":
            b = ginibre((k, k), rng)
        elif kind == "hermitian":
            g = ginibre((k, k), rng)
            b = (g + g.conj().T) / 2
        elif kind == "positive":
            g = ginibre((k, k), rng)
            b = g @ g.conj().T
            b = (b + b.conj().T) / 2
        elif kind == "unitary":
            b = haar_unitary(k, rng)
        else:
            u = haar_unitary(k, rng)
            d = np.zeros(k)
            d[: ranks[j]] = 1.0
            b = (u * d) @ u.conj().T
            b = (b + b.conj().T) / 2
        blocks.append(b)
    return AlgebraElement(desc, blocks)
