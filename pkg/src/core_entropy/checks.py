"""Invariant suites shared by the ``verify`` command and the test-suite.

Each check returns a list of failure descriptions (empty on success), so a
caller can print the offending instance and carry on.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from math import gcd
from typing import Iterator

import numpy as np

from .angles import Angle, make_angle, orbit
from .engine import compute_entropy
from .finite_model import (
    cover_projection,
    finite_graph_adjacency,
    thurston_matrix,
    two_cover_adjacency,
)
from .spectral import verify_exp_identity
from .wedge import LabeledWedge, WedgeVertex, enumerate_multicycles, window_subgraph


def reduced_angles(max_denominator: int) -> Iterator[Angle]:
    """All reduced fractions in [0, 1) with denominator <= max_denominator."""
    for d in range(1, max_denominator + 1):
        for n in range(d):
            if gcd(n, d) == 1:
                yield make_angle(n, d)


def closed_paths(w: LabeledWedge, n: int, max_width: int | None = None) -> Iterator[tuple[WedgeVertex, ...]]:
    """Every closed path of length <= n inside the window, once per base point.

    Brute force over the window {j <= max_width} (default 3n, wider than the
    region the paths are expected to occupy).  The only pruning used is the
    exact distance back to the base vertex: a height can only drop by
    jumping to height 1, so from (i, j) the base (i0, j0) is at least
    i0 - i steps away on the same diagonal below it, and i0 steps otherwise.
    """
    width = 3 * n if max_width is None else max_width
    g = window_subgraph(w, n, max_width=width)
    verts = g.vertices

    def dist(k: int, base: WedgeVertex) -> int:
        v = verts[k]
        if v.width - v.height == base.width - base.height and v.height <= base.height:
            return base.height - v.height
        return base.height

    for b, base in enumerate(verts):
        path = [b]
        stack = [iter(g.succ[b])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                path.pop()
                continue
            if nxt == b:
                yield tuple(verts[k] for k in path)
            if len(path) + dist(nxt, base) > n or len(path) >= n:
                continue
            path.append(nxt)
            stack.append(iter(g.succ[nxt]))


def path_property_failures(w: LabeledWedge, n: int) -> list[str]:
    """Properties (1)-(4) of closed paths of length <= n."""
    out = []
    for path in closed_paths(w, n):
        m = len(path)
        if max(v.height for v in path) > m:
            out.append(f"height bound fails on {path}")
        if not any(v.height == 1 and 2 <= v.width <= m + 1 for v in path):
            out.append(f"no (1, k) with k <= n+1 on {path}")
        if max(v.width for v in path) > 2 * m:
            out.append(f"width bound fails on {path}")
        seen: dict[int, WedgeVertex] = {}
        for v in set(path):
            if w.separated(v.height, v.width):
                d = v.width - v.height
                if d in seen and seen[d] != v:
                    out.append(f"two separated vertices on diagonal {d} in {path}")
                seen[d] = v
    return out


def multicycle_count_failures(w: LabeledWedge, n: int) -> list[str]:
    counts = [0] * (n + 1)
    for m in enumerate_multicycles(w, n):
        counts[m.length] += 1
    return [
        f"{counts[k]} multi-cycles of length {k} exceed (2k)^sqrt(2k)"
        for k in range(1, n + 1)
        if counts[k] > (2 * k) ** math.sqrt(2 * k)
    ]


def _trace_counts(a: np.ndarray, n: int) -> list[int]:
    a = a.astype(object)
    power = np.identity(a.shape[0], dtype=object)
    out = []
    for _ in range(n):
        power = power.dot(a)
        out.append(int(np.trace(power)))
    return out


def weak_cover_failures(w: LabeledWedge, p: int, q: int, n: int = 8) -> list[str]:
    """C(G2, m) <= m |V(G2)| C(GF, m) and equal spectral radii for the 2-cover."""
    two = two_cover_adjacency(w, p, q)
    fin = finite_graph_adjacency(w, p, q)
    out = []
    c2 = _trace_counts(two.array(), n)
    cf = _trace_counts(fin.array(), n)
    for m in range(1, n + 1):
        if c2[m - 1] > m * two.dimension * cf[m - 1]:
            out.append(f"p={p} q={q}: C2({m})={c2[m - 1]} > {m}*{two.dimension}*{cf[m - 1]}")
    # the projection must be a weak cover: onto, and bijective on out-edges
    proj = cover_projection(p, q)
    a2 = two.array()
    af = fin.array()
    for k, v in enumerate(two.labels):
        image = np.zeros(fin.dimension, dtype=np.int64)
        for t in np.flatnonzero(a2[k]):
            image[fin.index(proj[two.labels[t]])] += a2[k, t]
        if not np.array_equal(image, af[fin.index(proj[v])]):
            out.append(f"p={p} q={q}: out-edges of {v} do not map bijectively")
    return out


@dataclass
class SuiteReport:
    passed: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, problems: list[str]) -> None:
        if problems:
            self.failures.extend(problems)
        else:
            self.passed += 1

    @property
    def failed(self) -> int:
        return len(self.failures)


def agreement_suite(max_denominator: int, depth: int) -> SuiteReport:
    rep = SuiteReport()
    for theta in reduced_angles(max_denominator):
        r = compute_entropy(theta, depth)
        problems = []
        if not r.agree:
            problems.append(f"{theta}: h_det={r.h_det!r} h_eig={r.h_eig!r} disagree beyond enclosures")
        info = orbit(theta)
        if thurston_matrix(theta) != finite_graph_adjacency(LabeledWedge.from_angle(theta), info.period, info.preperiod):
            problems.append(f"{theta}: pair matrix differs from the finite model")
        rep.record(problems)
    return rep


def exp_identity_suite(seed: int, count: int, n: int, max_denominator: int) -> SuiteReport:
    rep = SuiteReport()
    rng = random.Random(seed)
    for k in range(count):
        w = LabeledWedge.random_explicit(rng, size=2 * n, density=rng.uniform(0.2, 0.8))
        rep.record([] if verify_exp_identity(w, n) else [f"random wedge #{k} (seed {seed})"])
    for theta in reduced_angles(max_denominator):
        w = LabeledWedge.from_angle(theta)
        rep.record([] if verify_exp_identity(w, n) else [f"wedge of {theta}"])
    return rep


def property_suite(seed: int, count: int, n: int) -> SuiteReport:
    rep = SuiteReport()
    rng = random.Random(seed)
    for k in range(count):
        w = LabeledWedge.random_explicit(rng, size=3 * n, density=rng.uniform(0.2, 0.8))
        problems = path_property_failures(w, n) + multicycle_count_failures(w, n)
        rep.record([f"random wedge #{k} (seed {seed}): {p}" for p in problems])
    return rep


def cover_suite(seed: int, count: int, n: int = 8) -> SuiteReport:
    rep = SuiteReport()
    rng = random.Random(seed)
    for k in range(count):
        p, q = rng.randint(1, 5), rng.randint(0, 3)
        w = LabeledWedge.random_periodic(rng, p, q, density=rng.uniform(0.2, 0.8))
        rep.record([f"periodic wedge #{k} (seed {seed}): {x}" for x in weak_cover_failures(w, p, q, n)])
    return rep
