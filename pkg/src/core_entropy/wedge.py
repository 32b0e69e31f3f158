"""Labeled wedges and their infinite graphs.

A labeled wedge assigns Separated / NonSeparated to every pair (i, j) with
1 <= i < j.  Its graph has one upward edge (i, j) -> (i+1, j+1) out of each
non-separated pair, and a forward edge (i, j) -> (1, j+1) plus a backward
edge (i, j) -> (1, i+1) out of each separated pair.

Closed paths of length n never leave the window {(i, j) : j <= 2n}, which is
what makes every computation here finite.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence, TextIO

import numpy as np

from .angles import (
    Angle,
    OrbitInfo,
    PairLabel,
    PartitionSide,
    label_of_sides,
    orbit,
    partition_endpoints,
    partition_side,
)

S = PairLabel.SEPARATED
N = PairLabel.NON_SEPARATED


class WedgeFormatError(ValueError):
    pass


# --------------------------------------------------------------------------
# Provenance records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FromAngle:
    theta: Angle


@dataclass(frozen=True)
class Explicit:
    table: Mapping[tuple[int, int], PairLabel]
    default: PairLabel = N


@dataclass(frozen=True)
class OneSided:
    """Limit wedge W_{theta+} (direction=+1) or W_{theta-} (direction=-1)."""

    theta: Angle
    direction: int


@dataclass(frozen=True)
class Periodic:
    """Periodic wedge given by labels on the unordered classes of Sigma_{p,q}."""

    period: int
    preperiod: int
    class_labels: Mapping[tuple[int, int], PairLabel]


Provenance = FromAngle | Explicit | OneSided | Periodic


def index_class(i: int, p: int, q: int) -> int:
    """Representative in 1..p+q of the class of i under the (p, q) relation."""
    if i <= p + q:
        return i
    return q + 1 + (i - q - 1) % p


class LabeledWedge:
    """A total, deterministic label oracle on Sigma = {(i, j) : 1 <= i < j}.

    Build instances with :meth:`from_angle`, :meth:`explicit`,
    :meth:`one_sided` or :meth:`periodic`.  Instances are read-only; the only
    internal state is a precomputed side table, so concurrent readers are safe.
    """

    def __init__(
        self,
        provenance: Provenance,
        oracle: Callable[[int, int], bool],
        periodicity: tuple[int, int] | None = None,
    ):
        self.provenance = provenance
        self._separated = oracle
        # (p, q) when the wedge is known to be periodic
        self.periodicity = periodicity

    def __repr__(self) -> str:
        return f"LabeledWedge({self.provenance!r})"

    def separated(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        if i < 1 or i == j:
            raise ValueError(f"({i}, {j}) is not a wedge vertex")
        return self._separated(i, j)

    def label(self, i: int, j: int) -> PairLabel:
        return S if self.separated(i, j) else N

    # constructors ---------------------------------------------------------

    @classmethod
    def from_angle(cls, theta: Angle) -> "LabeledWedge":
        info = orbit(theta)
        sides = [partition_side(theta, x) for x in info.points]
        return cls._from_sides(FromAngle(theta), info, sides)

    @classmethod
    def one_sided(cls, theta: Angle, direction: int) -> "LabeledWedge":
        """Limit of W_{theta'} as theta' -> theta from above (+1) or below (-1).

        A point x_i sitting on the boundary moves with derivative 2^(i-1),
        faster than the boundary (derivative 1/2), so it leaves the boundary
        in the direction of the perturbation.
        """
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        info = orbit(theta)
        lo, hi = partition_endpoints(theta)
        sides = []
        for x in info.points:
            side = partition_side(theta, x)
            if side is PartitionSide.BOUNDARY:
                at_lo = x.fraction == lo
                # just past lo lands in A, just past hi lands in B
                if direction > 0:
                    side = PartitionSide.SIDE_A if at_lo else PartitionSide.SIDE_B
                else:
                    side = PartitionSide.SIDE_B if at_lo else PartitionSide.SIDE_A
            sides.append(side)
        return cls._from_sides(OneSided(theta, direction), info, sides)

    @classmethod
    def _from_sides(
        cls, provenance: Provenance, info: OrbitInfo, sides: Sequence[PartitionSide]
    ) -> "LabeledWedge":
        p, q = info.period, info.preperiod
        n = p + q
        table = [[False] * (n + 1) for _ in range(n + 1)]
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                if a != b:
                    table[a][b] = label_of_sides(sides[a - 1], sides[b - 1]) is S

        def oracle(i: int, j: int) -> bool:
            return table[index_class(i, p, q)][index_class(j, p, q)]

        return cls(provenance, oracle, periodicity=(p, q))

    @classmethod
    def explicit(
        cls,
        table: Mapping[tuple[int, int], PairLabel] | Iterable[tuple[int, int]],
        default: PairLabel = N,
    ) -> "LabeledWedge":
        """Wedge from a finite table; pairs not listed get ``default``.

        ``table`` may also be an iterable of pairs, all taken as separated.
        """
        if not isinstance(table, Mapping):
            table = {pair: S for pair in table}
        clean: dict[tuple[int, int], PairLabel] = {}
        for (i, j), lab in table.items():
            if not 1 <= i < j:
                raise ValueError(f"({i}, {j}) is not a wedge vertex")
            clean[(i, j)] = PairLabel(lab)
        frozen = dict(clean)
        default_sep = default is S

        def oracle(i: int, j: int) -> bool:
            lab = frozen.get((i, j))
            return default_sep if lab is None else lab is S

        return cls(Explicit(frozen, default), oracle)

    @classmethod
    def periodic(
        cls, p: int, q: int, class_labels: Mapping[tuple[int, int], PairLabel] | Iterable[tuple[int, int]]
    ) -> "LabeledWedge":
        """Periodic wedge of period p, pre-period q.

        ``class_labels`` maps representatives {a, b} with 1 <= a < b <= p+q to
        labels (or lists the separated ones); missing classes are
        non-separated, and diagonal pairs are always non-separated.
        """
        if p < 1 or q < 0:
            raise ValueError("need p >= 1 and q >= 0")
        if not isinstance(class_labels, Mapping):
            class_labels = {pair: S for pair in class_labels}
        n = p + q
        table = [[False] * (n + 1) for _ in range(n + 1)]
        frozen: dict[tuple[int, int], PairLabel] = {}
        for (a, b), lab in class_labels.items():
            a, b = min(a, b), max(a, b)
            if not 1 <= a < b <= n:
                raise ValueError(f"class {{{a}, {b}}} outside Sigma_{{{p},{q}}}")
            frozen[(a, b)] = PairLabel(lab)
            table[a][b] = table[b][a] = PairLabel(lab) is S

        def oracle(i: int, j: int) -> bool:
            return table[index_class(i, p, q)][index_class(j, p, q)]

        return cls(Periodic(p, q, frozen), oracle, periodicity=(p, q))

    @classmethod
    def random_explicit(
        cls, rng: random.Random, size: int, density: float = 0.5
    ) -> "LabeledWedge":
        """Random labels on all pairs with j <= size, non-separated beyond."""
        table = {
            (i, j): (S if rng.random() < density else N)
            for j in range(2, size + 1)
            for i in range(1, j)
        }
        return cls.explicit(table, N)

    @classmethod
    def random_periodic(
        cls, rng: random.Random, p: int, q: int, density: float = 0.5
    ) -> "LabeledWedge":
        n = p + q
        labels = {
            (a, b): (S if rng.random() < density else N)
            for a in range(1, n + 1)
            for b in range(a + 1, n + 1)
        }
        return cls.periodic(p, q, labels)


def wedge_from_angle(theta: Angle) -> LabeledWedge:
    return LabeledWedge.from_angle(theta)


# --------------------------------------------------------------------------
# Text fixture format
# --------------------------------------------------------------------------


def read_wedge(stream: TextIO | str) -> LabeledWedge:
    """Parse the fixture format: a ``default S|N`` header, then ``i j S|N`` lines."""
    text = stream if isinstance(stream, str) else stream.read()
    default: PairLabel | None = None
    table: dict[tuple[int, int], PairLabel] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "default" and len(parts) == 2:
                if default is not None:
                    raise WedgeFormatError(f"line {lineno}: duplicate default header")
                default = PairLabel(parts[1])
                continue
            if len(parts) != 3:
                raise WedgeFormatError(f"line {lineno}: expected 'i j S|N'")
            i, j, lab = int(parts[0]), int(parts[1]), PairLabel(parts[2])
        except ValueError as exc:
            if isinstance(exc, WedgeFormatError):
                raise
            raise WedgeFormatError(f"line {lineno}: {exc}") from None
        if not 1 <= i < j:
            raise WedgeFormatError(f"line {lineno}: ({i}, {j}) is not a wedge vertex")
        table[(i, j)] = lab
    if default is None:
        raise WedgeFormatError("missing 'default S|N' header")
    return LabeledWedge.explicit(table, default)


def write_wedge(wedge: LabeledWedge) -> str:
    prov = wedge.provenance
    if not isinstance(prov, Explicit):
        raise TypeError("only explicit wedges have a finite text form")
    lines = [f"default {prov.default.value}"]
    lines += [f"{i} {j} {lab.value}" for (i, j), lab in sorted(prov.table.items())]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Graph structure
# --------------------------------------------------------------------------


class WedgeVertex(NamedTuple):
    height: int
    width: int


class EdgeKind(enum.Enum):
    UPWARD = "U"
    FORWARD = "F"
    BACKWARD = "B"


class WedgeEdge(NamedTuple):
    source: WedgeVertex
    target: WedgeVertex
    kind: EdgeKind


def successors(w: LabeledWedge, v: WedgeVertex | tuple[int, int]) -> list[WedgeEdge]:
    """Outgoing edges of v: one upward edge, or forward then backward."""
    i, j = v
    v = WedgeVertex(i, j)
    if not w.separated(i, j):
        return [WedgeEdge(v, WedgeVertex(i + 1, j + 1), EdgeKind.UPWARD)]
    return [
        WedgeEdge(v, WedgeVertex(1, j + 1), EdgeKind.FORWARD),
        WedgeEdge(v, WedgeVertex(1, i + 1), EdgeKind.BACKWARD),
    ]


@dataclass
class WindowGraph:
    """Finite induced subgraph on {(i, j) : 1 <= i < j <= max_width}."""

    max_width: int
    vertices: list[WedgeVertex]
    index: dict[WedgeVertex, int]
    edges: list[WedgeEdge]
    succ: list[list[int]] = field(repr=False)

    def __len__(self) -> int:
        return len(self.vertices)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((len(self.vertices), len(self.vertices)), dtype=np.int64)
        for k, targets in enumerate(self.succ):
            for t in targets:
                a[k, t] += 1
        return a


def window_vertices(max_width: int) -> list[WedgeVertex]:
    return [WedgeVertex(i, j) for i in range(1, max_width) for j in range(i + 1, max_width + 1)]


def window_subgraph(w: LabeledWedge, n: int, max_width: int | None = None) -> WindowGraph:
    """Window {j <= 2n}, which holds every closed path of length <= n."""
    if n < 1:
        raise ValueError("window size must be >= 1")
    width = 2 * n if max_width is None else max_width
    verts = window_vertices(width)
    index = {v: k for k, v in enumerate(verts)}
    edges: list[WedgeEdge] = []
    succ: list[list[int]] = []
    for v in verts:
        out = []
        for e in successors(w, v):
            t = index.get(e.target)
            if t is not None:
                edges.append(e)
                out.append(t)
        succ.append(out)
    return WindowGraph(width, verts, index, edges, succ)


# --------------------------------------------------------------------------
# Closed path counts
# --------------------------------------------------------------------------


def climb_heights(w: LabeledWedge, max_width: int, max_height: int) -> dict[int, int]:
    """For each a in 2..max_width, the height of the first separated vertex on
    the diagonal through (1, a), if it is at most ``max_height``."""
    out = {}
    for a in range(2, max_width + 1):
        d = a - 1
        for h in range(1, max_height + 1):
            if w.separated(h, h + d):
                out[a] = h
                break
    return out


def closed_path_counts(w: LabeledWedge, n: int) -> list[int]:
    """C(Gamma, 1..n): the number of closed paths of each length, exactly.

    Equal to Tr(A^m) for the window adjacency A.  Rather than powering the
    O(n^2)-vertex window matrix, the walk is collapsed onto the height-one
    vertices (1, a): from (1, a) the path climbs its diagonal through
    non-separated vertices up to the first separated one at height h, then
    takes F to (1, a + h) or B to (1, h + 1), in h steps either way.  Every
    closed path passes height one, and each collapsed closed walk based at
    (1, a) stands for h(a) closed paths, one per base point on its first climb.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    width = 2 * n
    climb = climb_heights(w, width, n)
    starts = list(range(2, width + 1))
    nstart = len(starts)
    pos = {a: k for k, a in enumerate(starts)}
    # 2n^2 * 2^n bounds every entry; beyond int64 fall back to Python ints
    dtype = np.int64 if n <= 50 else object
    dp = np.zeros((n + 1, nstart, nstart), dtype=dtype)
    for a in starts:
        h = climb.get(a)
        if h is None or h > n:
            continue
        row = pos[a]
        for target in (a + h, h + 1):
            if target <= width:
                dp[h, row, pos[target]] += h
    moves = []
    for a in starts:
        h = climb.get(a)
        if h is None:
            continue
        targets = [pos[t] for t in (a + h, h + 1) if t <= width]
        moves.append((pos[a], h, targets))
    counts = [0] * (n + 1)
    diag = np.arange(nstart)
    for m in range(1, n + 1):
        layer = dp[m]
        counts[m] = int(layer[diag, diag].sum())
        for col, h, targets in moves:
            if m + h > n:
                continue
            src = layer[:, col]
            nxt = dp[m + h]
            for t in targets:
                nxt[:, t] += src
    return counts[1:]


# --------------------------------------------------------------------------
# Simple cycles and multi-cycles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleCycle:
    """Vertices in path order, rotated so the smallest vertex comes first."""

    vertices: tuple[WedgeVertex, ...]

    @property
    def length(self) -> int:
        return len(self.vertices)

    @classmethod
    def canonical(cls, vertices: Sequence[tuple[int, int]]) -> "SimpleCycle":
        vs = [WedgeVertex(*v) for v in vertices]
        k = vs.index(min(vs))
        return cls(tuple(vs[k:] + vs[:k]))


@dataclass(frozen=True)
class MultiCycle:
    cycles: tuple[SimpleCycle, ...]

    @property
    def length(self) -> int:
        return sum(c.length for c in self.cycles)

    @property
    def components(self) -> int:
        return len(self.cycles)

    @property
    def sign(self) -> int:
        return -1 if self.components % 2 else 1


def enumerate_simple_cycles(w: LabeledWedge, n: int) -> list[SimpleCycle]:
    """All simple cycles of length <= n, each once, sorted by (root, vertices).

    Depth-first search rooted at each vertex r, visiting only vertices larger
    than r, so a cycle is found exactly once, from its minimal vertex.
    """
    g = window_subgraph(w, n)
    verts = g.vertices
    out: list[SimpleCycle] = []
    # the smallest vertex of a cycle has height 1
    roots = [k for k, v in enumerate(verts) if v.height == 1]
    for r in sorted(roots, key=lambda k: verts[k]):
        rv = verts[r]
        path = [r]
        on_path = {r}
        stack: list[Iterator[int]] = [iter(g.succ[r])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt == r:
                out.append(SimpleCycle(tuple(verts[k] for k in path)))
                continue
            if nxt in on_path or verts[nxt] < rv or len(path) >= n:
                continue
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(g.succ[nxt]))
    out.sort(key=lambda c: (c.vertices[0], c.length, c.vertices))
    return out


def assemble_multicycles(cycles: Sequence[SimpleCycle], n: int) -> list[MultiCycle]:
    """Every vertex-disjoint union of the given cycles with total length <= n,
    including the empty multi-cycle."""
    ordered = sorted(cycles, key=lambda c: (c.vertices[0], c.length, c.vertices))
    supports = [frozenset(c.vertices) for c in ordered]
    result: list[MultiCycle] = []

    def extend(start: int, chosen: list[int], used: set[WedgeVertex], length: int) -> None:
        result.append(MultiCycle(tuple(ordered[k] for k in chosen)))
        for k in range(start, len(ordered)):
            c = ordered[k]
            if length + c.length > n or used & supports[k]:
                continue
            chosen.append(k)
            used |= supports[k]
            extend(k + 1, chosen, used, length + c.length)
            used -= supports[k]
            chosen.pop()

    extend(0, [], set(), 0)
    return result


def enumerate_multicycles(w: LabeledWedge, n: int) -> list[MultiCycle]:
    """All non-empty multi-cycles of total length <= n."""
    return [m for m in assemble_multicycles(enumerate_simple_cycles(w, n), n) if m.cycles]
