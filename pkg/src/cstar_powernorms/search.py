"""Seeded stochastic search: unit-sphere sampling, projection families, local ascent.

Determinism: every random draw comes from a generator keyed by
``(seed, tag, index)``, so results are pure functions of the inputs and the
seed.  Increasing any budget field with the same seed only adds candidates or
extends trajectories, so returned values are monotone in the budget.

Projection families in L(A^m) are block diagonal over the algebra blocks.  In
one block of dimension N = m*k a family of n mutually orthogonal projections
summing to the identity is encoded as a unitary Q (N x N) plus a label in
[0, n) for each column: P_i = Q diag(labels == i) Q^H.  Empty groups give zero
projections.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .algebra import as_descriptor, ginibre, haar_unitary
from .errors import ShapeError
from .hilbert_module import ModuleOperator, ModuleVector, vec_norm

THREADS_ENV = "CSTAR_THREADS"
STAGNATION_WINDOW = 20
SAMPLE_CHUNK = 256

TAG_SPHERE = 1
TAG_SAMPLE = 2
TAG_RESTART = 3
TAG_STRUCTURED = 4
TAG_ASCENT = 5


@dataclass(frozen=True)
class SearchBudget:
    samples: int = 5000
    restarts: int = 8
    local_steps: int = 200
    step_scale: float = 0.1
    stagnation_halvings: int = 5

    def __post_init__(self):
        for name in ("samples", "restarts", "local_steps", "stagnation_halvings"):
            if getattr(self, name) < 0:
                raise ValueError(f"SearchBudget.{name} must be nonnegative")
        if self.step_scale < 0:
            raise ValueError("SearchBudget.step_scale must be nonnegative")

    def scaled(self, factor: float) -> SearchBudget:
        """Scale the count fields by ``factor`` (each kept >= 1)."""
        def s(v):
            return max(1, int(round(v * factor)))
        return replace(self, samples=s(self.samples), restarts=s(self.restarts),
                       local_steps=s(self.local_steps))

    def as_dict(self) -> dict:
        return {"samples": self.samples, "restarts": self.restarts,
                "local_steps": self.local_steps, "step_scale": self.step_scale,
                "stagnation_halvings": self.stagnation_halvings}


def sub_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def candidate_map(fn: Callable, items: Sequence) -> list:
    """Map in input order; results never depend on the thread count."""
    threads = thread_count()
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def argmax_first(values: Sequence[float]) -> int:
    """Index of the maximum, ties broken by the lowest index."""
    best, idx = -np.inf, 0
    for i, v in enumerate(values):
        if v > best:
            best, idx = v, i
    return idx


# -- sphere sampling ---------------------------------------------------------

def sphere_sample(rank: int, desc, count: int, seed: int) -> list[ModuleVector]:
    """``count`` vectors with vec_norm 1, each a pure function of (seed, index)."""
    desc = as_descriptor(desc)
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for i in range(count):
        attempt = 0
        while True:
            rng = sub_rng(seed, TAG_SPHERE, i, attempt)
            x = ModuleVector(desc, rank, [ginibre((rank * k, k), rng) for k in desc.block_sizes])
            nrm = vec_norm(x)
            if nrm > 0:
                out.append(x / nrm)
                break
            attempt += 1
    return out


def cayley(x: np.ndarray) -> np.ndarray:
    """(I - X/2)^{-1}(I + X/2): exactly unitary for skew-Hermitian X up to roundoff."""
    eye = np.eye(x.shape[-1])
    return np.linalg.solve(eye - x / 2, eye + x / 2)


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre((n, n), rng)
    return (g - g.conj().T) / 2


def sphere_ascent(f: Callable[[np.ndarray], float], v0: np.ndarray, rng: np.random.Generator,
                  budget: SearchBudget) -> tuple[np.ndarray, float]:
    """Random-perturbation hill climb on the unit sphere of C^d.

    Accepts only strict improvements, so the objective is nondecreasing.
    """
    v = v0 / np.linalg.norm(v0)
    val = f(v)
    scale, stale, halvings = budget.step_scale, 0, 0
    for _ in range(budget.local_steps):
        w = v + scale * ginibre(v.shape, rng)
        w = w / np.linalg.norm(w)
        fw = f(w)
        if fw > val:
            v, val, stale = w, fw, 0
        else:
            stale += 1
            if stale >= STAGNATION_WINDOW:
                scale, stale, halvings = scale / 2, 0, halvings + 1
                if halvings > budget.stagnation_halvings:
                    break
    return v, val


# -- projection families -----------------------------------------------------

class ProjectionFamily:
    """n mutually orthogonal projections in L(E) summing to the identity."""

    def __init__(self, projections: Sequence[ModuleOperator], validate: bool = True,
                 tol: float = 1e-8):
        self.projections = tuple(projections)
        if not self.projections:
            raise ShapeError("a projection family needs at least one member")
        p0 = self.projections[0]
        for p in self.projections:
            if (p.descriptor, p.domain_rank, p.codomain_rank) != (
                    p0.descriptor, p0.domain_rank, p0.domain_rank):
                raise ShapeError("projection family members must act on one module")
        if validate:
            defects = self.defects()
            if max(defects.values()) > tol:
                raise ShapeError(f"not a projection family: {defects}")

    @property
    def n(self) -> int:
        return len(self.projections)

    @property
    def descriptor(self):
        return self.projections[0].descriptor

    @property
    def rank(self) -> int:
        return self.projections[0].domain_rank

    def defects(self) -> dict:
        idem = herm = ortho = 0.0
        total = None
        for i, p in enumerate(self.projections):
            for m in p.mats:
                idem = max(idem, float(np.linalg.norm(m @ m - m, 2)))
                herm = max(herm, float(np.linalg.norm(m - m.conj().T, 2)))
            for q in self.projections[i + 1:]:
                for a, b in zip(p.mats, q.mats):
                    ortho = max(ortho, float(np.linalg.norm(a @ b, 2)))
            total = p.mats if total is None else [t + m for t, m in zip(total, p.mats)]
        ident = max(float(np.linalg.norm(t - np.eye(t.shape[0]), 2)) for t in total)
        return {"idempotent": idem, "hermitian": herm, "orthogonal": ortho, "sum_to_identity": ident}

    @classmethod
    def from_states(cls, desc, rank: int, n: int, states, validate: bool = True):
        desc = as_descriptor(desc)
        projs = []
        for i in range(n):
            mats = []
            for q, labels in states:
                mask = (labels == i).astype(float)
                mats.append((q * mask) @ q.conj().T)
            projs.append(ModuleOperator(desc, rank, rank, mats))
        return cls(projs, validate=validate)

    def to_states(self):
        """Recover (Q, labels) per algebra block from the projection ranges."""
        states = []
        for j in range(self.descriptor.n_blocks):
            cols, labels = [], []
            for i, p in enumerate(self.projections):
                w, v = np.linalg.eigh((p.mats[j] + p.mats[j].conj().T) / 2)
                sel = w > 0.5
                cols.append(v[:, sel])
                labels += [i] * int(sel.sum())
            q = np.hstack(cols)
            # re-orthonormalize against roundoff
            u, _, vh = np.linalg.svd(q)
            states.append((u @ vh, np.array(labels, dtype=int)))
        return states

    def apply(self, xs: Sequence[ModuleVector]) -> ModuleVector:
        """sum_i P_i x_i."""
        if len(xs) != self.n:
            raise ShapeError(f"family has {self.n} members, tuple has {len(xs)}")
        out = self.projections[0] @ xs[0]
        for p, x in zip(self.projections[1:], xs[1:]):
            out = out + p @ x
        return out


@dataclass
class BlockScorer:
    """Objective over per-block states for the family search engine.

    ``score(states)`` evaluates a full list of (Q, labels) states.  Optional
    hooks speed things up: ``score_batch(qs, labels)`` for single-block search,
    and ``pair_vectors(states, b)`` returning one vector per group, which
    enables exact two-group re-splitting of block ``b`` (valid when the
    objective is a largest singular value that this linearization bounds below).
    """

    score: Callable
    score_batch: Callable | None = None
    pair_vectors: Callable | None = None


def _random_state(dim: int, n: int, rng: np.random.Generator):
    return haar_unitary(dim, rng), rng.integers(0, n, size=dim)


def _sample_states(dims: Sequence[int], n: int, budget: SearchBudget, seed: int):
    """Stream of random multi-block states; prefix-stable in ``budget.samples``."""
    out = []
    for chunk in range(-(-budget.samples // SAMPLE_CHUNK)):
        rng = sub_rng(seed, TAG_SAMPLE, chunk)
        qs = [haar_unitary(d, rng, size=SAMPLE_CHUNK) for d in dims]
        labels = [rng.integers(0, n, size=(SAMPLE_CHUNK, d)) for d in dims]
        take = min(SAMPLE_CHUNK, budget.samples - chunk * SAMPLE_CHUNK)
        out.append(([q[:take] for q in qs], [lab[:take] for lab in labels]))
    return out


def _reassign(states, scorer: BlockScorer, value: float, n: int):
    """Best single-column group change, repeated until none improves."""
    improved = False
    while True:
        best = (value, None)
        for b, (q, labels) in enumerate(states):
            for r in range(len(labels)):
                for lab in range(n):
                    if lab == labels[r]:
                        continue
                    new_labels = labels.copy()
                    new_labels[r] = lab
                    trial = list(states)
                    trial[b] = (q, new_labels)
                    v = scorer.score(trial)
                    if v > best[0] * (1 + 1e-14) + 1e-300:
                        best = (v, trial)
        if best[1] is None:
            return states, value, improved
        states, value, improved = best[1], best[0], True


def _pair_split(states, scorer: BlockScorer, value: float, n: int):
    improved = False
    for b in range(len(states)):
        for i in range(n):
            for j in range(i + 1, n):
                q, labels = states[b]
                mask = (labels == i) | (labels == j)
                if not mask.any():
                    continue
                vecs = scorer.pair_vectors(states, b)
                s = q[:, mask]
                bi, bj = s.conj().T @ vecs[i], s.conj().T @ vecs[j]
                d = np.outer(bi, bi.conj()) - np.outer(bj, bj.conj())
                w, v = np.linalg.eigh((d + d.conj().T) / 2)
                new_q = q.copy()
                new_q[:, mask] = s @ v
                new_labels = labels.copy()
                new_labels[mask] = np.where(w > 0, i, j)
                trial = list(states)
                trial[b] = (new_q, new_labels)
                val = scorer.score(trial)
                if val > value * (1 + 1e-14) + 1e-300:
                    states, value, improved = trial, val, True
    return states, value, improved


def family_ascent(states, scorer: BlockScorer, n: int, budget: SearchBudget,
                  rng: np.random.Generator):
    """Local refinement: group reassignment, exact pair splits, Cayley rotations.

    Only improvements are accepted, so the value is nondecreasing.  The step
    scale halves after ``STAGNATION_WINDOW`` unproductive steps; the loop ends
    after ``local_steps`` steps or ``stagnation_halvings`` halvings.
    """
    states = [(q.copy(), labels.copy()) for q, labels in states]
    value = scorer.score(states)
    scale, stale, halvings = budget.step_scale, 0, 0
    settled = False
    for _ in range(budget.local_steps):
        improved = False
        if not settled:
            states, value, imp1 = _reassign(states, scorer, value, n)
            imp2 = False
            if scorer.pair_vectors is not None and n > 1:
                states, value, imp2 = _pair_split(states, scorer, value, n)
            improved = imp1 or imp2
            settled = not improved
        trial = [(q @ cayley(scale * random_skew(q.shape[0], rng)), labels)
                 for q, labels in states]
        tv = scorer.score(trial)
        if tv > value * (1 + 1e-14) + 1e-300:
            states, value, improved, settled = trial, tv, True, False
        if improved:
            stale = 0
        else:
            stale += 1
            if stale >= STAGNATION_WINDOW:
                scale, stale, halvings = scale / 2, 0, halvings + 1
                if halvings > budget.stagnation_halvings:
                    break
    return states, value


@dataclass
class FamilySearchResult:
    states: list
    value: float
    evaluations: dict


def search_states(dims: Sequence[int], n: int, scorer: BlockScorer, budget: SearchBudget,
                  seed: int, structured: Sequence = ()) -> FamilySearchResult:
    """Best multi-block state over structured starts, random samples and restarts.

    Candidate order (and hence tie-breaking): structured, samples, refined
    structured starts, random restarts.
    """
    cands: list = []
    for st in structured:
        cands.append((scorer.score(st), st))
    for qs, labels in _sample_states(dims, n, budget, seed):
        size = qs[0].shape[0]
        if size == 0:
            continue
        if scorer.score_batch is not None and len(dims) == 1:
            vals = scorer.score_batch(qs[0], labels[0])
            i = argmax_first(vals)
            cands.append((float(vals[i]), [(qs[0][i], labels[0][i])]))
        else:
            vals = [scorer.score([(qs[b][s], labels[b][s]) for b in range(len(dims))])
                    for s in range(size)]
            i = argmax_first(vals)
            cands.append((vals[i], [(qs[b][i], labels[b][i]) for b in range(len(dims))]))

    def refine(job):
        kind, idx, start = job
        rng = sub_rng(seed, kind, idx)
        if start is None:
            start = [_random_state(d, n, rng) for d in dims]
        st, val = family_ascent(start, scorer, n, budget, rng)
        return val, st

    jobs = [(TAG_STRUCTURED, i, st) for i, st in enumerate(structured)]
    jobs += [(TAG_RESTART, r, None) for r in range(budget.restarts)]
    if budget.local_steps > 0:
        cands += candidate_map(refine, jobs)
    elif budget.restarts:
        for r in range(budget.restarts):
            rng = sub_rng(seed, TAG_RESTART, r)
            st = [_random_state(d, n, rng) for d in dims]
            cands.append((scorer.score(st), st))
    if not cands:
        st = [(np.eye(d, dtype=complex), np.zeros(d, dtype=int)) for d in dims]
        cands.append((scorer.score(st), st))
    i = argmax_first([c[0] for c in cands])
    return FamilySearchResult(cands[i][1], cands[i][0], {
        "structured": len(structured), "samples": budget.samples,
        "restarts": budget.restarts, "local_steps": budget.local_steps})


def identity_states(dims: Sequence[int], n: int, group: int):
    return [(np.eye(d, dtype=complex), np.full(d, group, dtype=int)) for d in dims]


def projection_family_search(objective: Callable[[ProjectionFamily], float], n: int,
                             desc, rank: int, budget: SearchBudget | None = None,
                             seed: int = 0) -> tuple[ProjectionFamily, float]:
    """Maximize an arbitrary objective over projection families in L(A^rank).

    The returned value is the objective evaluated at the returned family.
    """
    desc = as_descriptor(desc)
    budget = budget or SearchBudget()
    dims = [rank * k for k in desc.block_sizes]

    def score(states):
        fam = ProjectionFamily.from_states(desc, rank, n, states, validate=False)
        try:
            return float(objective(fam))
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise RuntimeError(f"objective failed on candidate family: {exc}") from exc

    structured = [identity_states(dims, n, i) for i in range(n)]
    res = search_states(dims, n, BlockScorer(score), budget, seed, structured)
    fam = ProjectionFamily.from_states(desc, rank, n, res.states)
    return fam, float(objective(fam))


def local_ascent(objective: Callable, start, budget: SearchBudget | None = None,
                 seed: int = 0):
    """Hill climb from a unit ModuleVector or a ProjectionFamily.

    Returns ``(point, value)``; the value never falls below the start value.
    """
    budget = budget or SearchBudget()
    rng = sub_rng(seed, TAG_ASCENT, 0)
    if isinstance(start, ModuleVector):
        desc, rank = start.descriptor, start.rank
        shapes = [m.shape for m in start.mats]
        sizes = [int(np.prod(s)) for s in shapes]

        def unpack(v):
            mats, off = [], 0
            for s, z in zip(shapes, sizes):
                mats.append(v[off:off + z].reshape(s))
                off += z
            return ModuleVector(desc, rank, mats)

        def f(v):
            x = unpack(v)
            return float(objective(x / vec_norm(x)))

        v0 = np.concatenate([m.ravel() for m in start.mats])
        v0 = v0 / vec_norm(start)
        start_val = f(v0)
        v, val = sphere_ascent(f, v0, rng, budget)
        if val <= start_val:
            return start, float(objective(start))
        x = unpack(v)
        x = x / vec_norm(x)
        return x, float(objective(x))
    if isinstance(start, ProjectionFamily):
        desc, rank, n = start.descriptor, start.rank, start.n

        def score(states):
            return float(objective(ProjectionFamily.from_states(desc, rank, n, states,
                                                                validate=False)))

        states, _ = family_ascent(start.to_states(), BlockScorer(score), n, budget, rng)
        fam = ProjectionFamily.from_states(desc, rank, n, states)
        val = float(objective(fam))
        start_val = float(objective(start))
        if val < start_val:
            return start, start_val
        return fam, val
    raise TypeError("start must be a ModuleVector or ProjectionFamily")
