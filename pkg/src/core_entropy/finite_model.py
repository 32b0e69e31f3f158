"""Finite quotients of periodic wedge graphs and Perron eigenvalues.

For a wedge of period p and pre-period q, indices are identified by

    i ~ j  iff  (min(i, j) <= q and i == j) or (min(i, j) >= q+1 and i == j mod p)

and the wedge graph collapses onto a finite graph on the non-diagonal
classes of pairs.  Thurston's pair matrix of a rational angle is the
adjacency matrix of that quotient; it is built here a second time, directly
from the angles, so the two constructions check each other.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .angles import Angle, OrbitInfo, doubling, label_of_sides, orbit, partition_side
from .exact import charpoly, largest_real_root
from .spectral import GrowthResult, Method
from .wedge import LabeledWedge, index_class


class ConsistencyError(ValueError):
    """A wedge's labels contradict the claimed (p, q) periodicity."""


class ConvergenceError(ArithmeticError):
    """Power iteration hit its iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def equiv_pq(i: int, j: int, p: int, q: int) -> bool:
    if p < 1 or q < 0:
        raise ValueError("need p >= 1 and q >= 0")
    if min(i, j) <= q:
        return i == j
    return (i - j) % p == 0


@dataclass(frozen=True, order=True)
class PairClass:
    """Canonical representative {a, b}, 1 <= a < b <= p+q, of a non-diagonal class."""

    a: int
    b: int

    def __str__(self) -> str:
        return f"{self.a},{self.b}"


def canonical_pair(i: int, j: int, p: int, q: int) -> PairClass | None:
    """Class of the unordered pair {i, j}; None when it is diagonal."""
    a, b = index_class(i, p, q), index_class(j, p, q)
    if a == b:
        return None
    return PairClass(min(a, b), max(a, b))


def finite_vertices(p: int, q: int) -> list[PairClass]:
    n = p + q
    # representatives 1..p+q are pairwise inequivalent, so every pair counts
    return [PairClass(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]


@dataclass(frozen=True)
class TransitionMatrix:
    """Nonnegative integer matrix together with its vertex labels.

    Stored by rows as sorted tuples of target indices (a target repeated k
    times is an entry k); rows have at most two entries.
    """

    labels: tuple
    targets: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, labels: Sequence, rows: Sequence[Sequence[int]]) -> "TransitionMatrix":
        targets = tuple(tuple(k for k, c in enumerate(r) for _ in range(int(c))) for r in rows)
        return cls(tuple(labels), targets)

    @property
    def dimension(self) -> int:
        return len(self.labels)

    @cached_property
    def _position(self) -> dict:
        return {v: k for k, v in enumerate(self.labels)}

    def index(self, label) -> int:
        return self._position[label]

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(x) for x in r) for r in self.array())

    def array(self) -> np.ndarray:
        a = np.zeros((self.dimension, self.dimension), dtype=np.int64)
        for k, ts in enumerate(self.targets):
            for t in ts:
                a[k, t] += 1
        return a

    def sparse(self) -> csr_matrix:
        rows = [k for k, ts in enumerate(self.targets) for _ in ts]
        cols = [t for ts in self.targets for t in ts]
        data = np.ones(len(cols))
        # duplicate (row, col) pairs are summed
        return csr_matrix((data, (rows, cols)), shape=(self.dimension, self.dimension))

    def __getitem__(self, key: tuple) -> int:
        src, dst = key
        return self.targets[self.index(src)].count(self.index(dst))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dimension": self.dimension,
                "vertices": [_label_text(v) for v in self.labels],
                "rows": [[int(x) for x in r] for r in self.rows],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "TransitionMatrix":
        data = json.loads(text)
        labels = tuple(_parse_label(s) for s in data["vertices"])
        rows = data["rows"]
        if len(labels) != data["dimension"] or len(rows) != len(labels) or any(len(r) != len(labels) for r in rows):
            raise ValueError("matrix dump has inconsistent dimensions")
        return cls.from_rows(labels, rows)


def _label_text(v) -> str:
    if isinstance(v, PairClass):
        return f"{{{v.a},{v.b}}}"
    a, b = v
    return f"({a},{b})"


def _parse_label(text: str):
    inner = text[1:-1]
    a, b = (int(x) for x in inner.split(","))
    return PairClass(a, b) if text.startswith("{") else (a, b)


def _build(labels: Sequence, targets) -> TransitionMatrix:
    index = {v: k for k, v in enumerate(labels)}
    out = []
    for v in labels:
        out.append(tuple(sorted(index[t] for t in targets(v) if t is not None)))
    return TransitionMatrix(tuple(labels), tuple(out))


def thurston_matrix(theta: Angle) -> TransitionMatrix:
    """Thurston's linear map on pairs of distinct postcritical angles.

    A non-separated pair {x, y} goes to {2x, 2y}; a separated pair to
    {theta, 2x} + {theta, 2y}; pairs of equal angles are dropped.
    """
    info = orbit(theta)
    points = info.points
    where = {x: k + 1 for k, x in enumerate(points)}
    sides = [partition_side(theta, x) for x in points]

    def pair(x: Angle, y: Angle) -> PairClass | None:
        if x == y:
            return None
        a, b = where[x], where[y]
        return PairClass(min(a, b), max(a, b))

    def targets(v: PairClass):
        x, y = points[v.a - 1], points[v.b - 1]
        if label_of_sides(sides[v.a - 1], sides[v.b - 1]).separated:
            return [pair(theta, doubling(x)), pair(theta, doubling(y))]
        return [pair(doubling(x), doubling(y))]

    return _build(finite_vertices(info.period, info.preperiod), targets)


def check_periodicity(w: LabeledWedge, p: int, q: int) -> None:
    """Raise ConsistencyError unless w's labels are constant on (p, q) classes."""
    if w.periodicity == (p, q):
        return
    n = p + q
    limit = n + 2 * p + 1
    for j in range(2, limit + 1):
        for i in range(1, j):
            cls = canonical_pair(i, j, p, q)
            lab = w.separated(i, j)
            if cls is None:
                if lab:
                    raise ConsistencyError(f"diagonal pair ({i}, {j}) is labeled separated")
            elif lab != w.separated(cls.a, cls.b):
                raise ConsistencyError(
                    f"label of ({i}, {j}) differs from its class representative ({cls.a}, {cls.b})"
                )


def finite_graph_adjacency(w: LabeledWedge, p: int, q: int) -> TransitionMatrix:
    """Adjacency of the quotient graph on non-diagonal unordered classes."""
    check_periodicity(w, p, q)

    def targets(v: PairClass):
        i, j = v.a, v.b
        if w.separated(i, j):
            return [canonical_pair(1, j + 1, p, q), canonical_pair(1, i + 1, p, q)]
        return [canonical_pair(i + 1, j + 1, p, q)]

    return _build(finite_vertices(p, q), targets)


def two_cover_vertices(p: int, q: int) -> list[tuple[int, int]]:
    n = p + q
    return [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]


def two_cover_adjacency(w: LabeledWedge, p: int, q: int) -> TransitionMatrix:
    """Adjacency of the quotient on ordered non-diagonal class pairs.

    The ordered pair (a, b) records which coordinate is the height, so the
    forward edge goes to (1, b+1), the backward edge to (1, a+1) and the
    upward edge to (a+1, b+1).
    """
    check_periodicity(w, p, q)

    def ordered(i: int, j: int):
        a, b = index_class(i, p, q), index_class(j, p, q)
        return None if a == b else (a, b)

    def targets(v: tuple[int, int]):
        a, b = v
        if w.separated(a, b):
            return [ordered(1, b + 1), ordered(1, a + 1)]
        return [ordered(a + 1, b + 1)]

    return _build(two_cover_vertices(p, q), targets)


def cover_projection(p: int, q: int) -> dict[tuple[int, int], PairClass]:
    """The quotient map Gamma^(2) -> Gamma^F forgetting the order."""
    return {(a, b): PairClass(min(a, b), max(a, b)) for a, b in two_cover_vertices(p, q)}


# --------------------------------------------------------------------------
# Perron eigenvalue
# --------------------------------------------------------------------------


def _component_radius(a, tol: float, max_iter: int) -> tuple[float, float, float, int]:
    """Collatz-Wielandt enclosure of the spectral radius of an irreducible block.

    Iterates on B = A + I, which is primitive whenever A is irreducible.
    Returns (estimate, lower, upper, iterations) for rho(A).
    """
    n = a.shape[0]
    x = np.full(n, 1.0 / n)
    lo, hi = 0.0, math.inf
    for it in range(1, max_iter + 1):
        y = a @ x + x
        ratios = y / x
        lo, hi = float(ratios.min()), float(ratios.max())
        x = y / y.sum()
        if hi - lo <= tol * max(1.0, hi):
            break
    else:
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} steps (residual {hi - lo:.3g})",
            residual=hi - lo,
            iterations=max_iter,
        )
    # the bounds are floating point; widen by a few ulps of the work done
    pad = 8 * n * np.finfo(float).eps * hi
    return (lo + hi) / 2 - 1, lo - pad - 1, hi + pad - 1, it


def leading_eigenvalue(
    m: TransitionMatrix | np.ndarray | Sequence[Sequence[int]],
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> GrowthResult:
    """Spectral radius of a nonnegative matrix with an enclosure.

    The radius is the maximum over strongly connected components; blocks
    without a cycle (single vertex, no loop) contribute 0.
    """
    if isinstance(m, TransitionMatrix):
        a = m.sparse()
    else:
        dense = np.asarray(m, dtype=np.int64)
        a = csr_matrix(dense.astype(float)) if dense.size else csr_matrix((0, 0))
    n = a.shape[0]
    if n == 0:
        return _eig_result(0.0, 0.0, 0.0, 0, ())
    ncomp, comp = connected_components(a, directed=True, connection="strong")
    best = (0.0, 0.0, 0.0)
    iterations = 0
    sizes = np.bincount(comp, minlength=ncomp)
    diagonal = a.diagonal()
    # a single vertex is its own block: its radius is its loop count
    for k in np.flatnonzero(sizes[comp] == 1):
        loops = float(diagonal[k])
        if loops > best[0]:
            best = (loops, loops, loops)
    for c in np.flatnonzero(sizes > 1):
        idx = np.flatnonzero(comp == c)
        block = a[idx][:, idx]
        est, lo, hi, it = _component_radius(block, tol, max_iter)
        iterations += it
        if est > best[0]:
            best = (est, lo, hi)
        elif hi > best[2]:
            best = (best[0], max(best[1], lo), hi)
    est, lo, hi = best
    flags: list[str] = []
    if n <= 8:
        root = largest_real_root(charpoly(a.toarray().astype(np.int64).tolist()))
        exact = float(root) if root is not None else 0.0
        exact = max(exact, 0.0)
        if not lo - 1e-9 <= exact <= hi + 1e-9:
            raise ArithmeticError(
                f"power iteration enclosure [{lo}, {hi}] misses the characteristic root {exact}"
            )
        flags.append("exact characteristic polynomial check")
        est, lo, hi = exact, min(lo, exact), max(hi, exact)
    return _eig_result(est, max(lo, 0.0), max(hi, 0.0), iterations, tuple(flags))


def _eig_result(rate: float, lo: float, hi: float, iterations: int, flags: tuple[str, ...]) -> GrowthResult:
    return GrowthResult(
        rate=max(rate, 0.0),
        rate_lo=min(lo, max(rate, 0.0)),
        rate_hi=max(hi, rate),
        method=Method.FINITE_MODEL_EIGENVALUE,
        depth=iterations,
        certified=True,
        flags=flags,
    )


def finite_model(theta: Angle) -> tuple[OrbitInfo, TransitionMatrix]:
    info = orbit(theta)
    return info, thurston_matrix(theta)
