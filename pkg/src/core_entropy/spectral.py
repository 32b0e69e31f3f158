"""Truncated spectral determinants and certified growth rates.

For a graph with bounded cycles the spectral determinant

    P(t) = sum over multi-cycles g of (-1)^{#components(g)} t^{length(g)}

satisfies 1/P(t) = exp(sum_m Tr(A^m) t^m / m), and its smallest positive
zero is 1/r where r is the growth rate of closed paths.  We only ever know
P modulo t^(N+1); the neglected tail is bounded term by term by a majorant
on the number of multi-cycles of each length.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .wedge import (
    LabeledWedge,
    MultiCycle,
    closed_path_counts,
    enumerate_multicycles,
)

_EPS = np.finfo(float).eps


class ConsistencyError(ArithmeticError):
    """An internal identity failed (e.g. a non-integral determinant coefficient)."""


class InsufficientDepth(ArithmeticError):
    """The tail bound at this truncation order is too large for the request."""

    def __init__(self, message: str, achievable: float):
        super().__init__(message)
        self.achievable = achievable


class Method(enum.Enum):
    SPECTRAL_DETERMINANT = "det"
    FINITE_MODEL_EIGENVALUE = "matrix"


@dataclass(frozen=True)
class SpectralPolynomial:
    """Integer coefficients c_0..c_N of P(t) mod t^(N+1)."""

    coefficients: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.coefficients or self.coefficients[0] != 1:
            raise ValueError("a spectral determinant starts with c_0 = 1")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k: int) -> int:
        return self.coefficients[k]

    def __call__(self, t: Fraction | int) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def to_json(self) -> str:
        return json.dumps([str(c) for c in self.coefficients])

    @classmethod
    def from_json(cls, text: str) -> "SpectralPolynomial":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
            raise ValueError("expected a JSON array of decimal integer strings")
        return cls(tuple(int(x) for x in data))


def coefficients_from_traces(traces: Sequence[int]) -> SpectralPolynomial:
    """Invert exp(sum Tr(A^m) t^m / m) by the Newton recurrence

        k c_k = - sum_{m=1..k} Tr(A^m) c_{k-m}.
    """
    c = [1]
    for k in range(1, len(traces) + 1):
        s = -sum(traces[m - 1] * c[k - m] for m in range(1, k + 1))
        q, r = divmod(s, k)
        if r:
            raise ConsistencyError(f"coefficient c_{k} = {s}/{k} is not an integer")
        c.append(q)
    return SpectralPolynomial(tuple(c))


def coefficients_from_multicycles(cycles: Sequence[MultiCycle], n: int) -> SpectralPolynomial:
    """c_k = sum over multi-cycles of length k of (-1)^{components}; c_0 = 1."""
    c = [0] * (n + 1)
    c[0] = 1
    for m in cycles:
        if m.components == 0:
            continue
        if m.length <= n:
            c[m.length] += m.sign
    return SpectralPolynomial(tuple(c))


def spectral_polynomial(w: LabeledWedge, n: int) -> SpectralPolynomial:
    return coefficients_from_traces(closed_path_counts(w, n))


def verify_exp_identity(w: LabeledWedge, n: int) -> bool:
    """Newton route and multi-cycle route agree exactly up to degree n."""
    by_traces = spectral_polynomial(w, n)
    by_cycles = coefficients_from_multicycles(enumerate_multicycles(w, n), n)
    return by_traces == by_cycles


# --------------------------------------------------------------------------
# Majorants for |c_k|
# --------------------------------------------------------------------------


def power_majorant_log(k: int) -> float:
    """log of (2k)^sqrt(2k), the general count bound for multi-cycles of length k."""
    return math.sqrt(2 * k) * math.log(2 * k)


_PARTITION_CACHE_LIMIT = 1200


@lru_cache(maxsize=1)
def _distinct_partition_table() -> tuple[int, ...]:
    q = [0] * (_PARTITION_CACHE_LIMIT + 1)
    q[0] = 1
    for part in range(1, _PARTITION_CACHE_LIMIT + 1):
        for total in range(_PARTITION_CACHE_LIMIT, part - 1, -1):
            q[total] += q[total - part]
    return tuple(q)


def distinct_partitions(k: int) -> int:
    """Number of partitions of k into distinct parts."""
    if k < 0:
        return 0
    if k <= _PARTITION_CACHE_LIMIT:
        return _distinct_partition_table()[k]
    raise ValueError("use distinct_partition_log for large k")


def distinct_partition_log(k: int) -> float:
    """log of an upper bound on the number of multi-cycles of length k.

    A multi-cycle is fixed by the sources of its backward edges; these sit on
    pairwise distinct diagonals j - i = d and the lengths add up to the sum of
    those d.  So the count is at most the number of partitions of k into
    distinct parts, itself at most exp(pi sqrt(k/3)).
    """
    if k <= _PARTITION_CACHE_LIMIT:
        return math.log(distinct_partitions(k))
    return math.pi * math.sqrt(k / 3)


_MAJORANTS = ("partitions", "power")
_POWER_TABLE_LIMIT = 20000


def _envelope_log(majorant: str, k: float) -> float:
    """Smooth majorant with log-concave growth, valid for every k >= 1."""
    if majorant == "partitions":
        return math.pi * math.sqrt(k / 3)
    return power_majorant_log(k)


@lru_cache(maxsize=None)
def _log_table(majorant: str) -> np.ndarray:
    """log m(k) for k = 0..K; beyond K the smooth envelope takes over."""
    if majorant == "partitions":
        table = _distinct_partition_table()
        return np.array([math.log(x) for x in table])
    if majorant == "power":
        ks = np.arange(1, _POWER_TABLE_LIMIT + 1, dtype=float)
        return np.concatenate([[0.0], np.sqrt(2 * ks) * np.log(2 * ks)])
    raise ValueError(f"unknown majorant {majorant!r}; expected one of {_MAJORANTS}")


def majorant_value(k: int, majorant: str = "partitions") -> float:
    table = _log_table(majorant)
    if k < len(table):
        return math.exp(table[k])
    return math.exp(_envelope_log(majorant, k))


def tail_bounds(n: int, t, majorant: str = "partitions") -> np.ndarray:
    """Vectorised rigorous upper bound on sum_{k > n} m(k) t^k.

    Terms up to the table limit K are summed exactly in floating point; the
    rest is dominated by the smooth envelope, whose term ratio decreases in k
    (its log is concave), so it is at most a geometric series started at K+1.
    Returns inf where that series does not converge.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t <= 0) | (t >= 1)):
        raise ValueError("tail bound needs 0 < t < 1")
    logs = _log_table(majorant)
    big_k = len(logs) - 1
    log_t = np.log(t)
    head = np.zeros_like(t)
    k = max(n + 1, 1)
    with np.errstate(over="ignore"):
        while True:
            # geometric remainder from k on, using the envelope
            env_a = _envelope_log(majorant, k)
            ratio_log = _envelope_log(majorant, k + 1) - env_a + log_t
            rem = np.exp(env_a + k * log_t) / -np.expm1(np.minimum(ratio_log, -1e-300))
            rem = np.where(ratio_log < 0, rem, np.inf)
            if k > big_k or np.all(rem <= 1e-8 * head + 1e-300):
                out = head + rem
                break
            stop = min(big_k + 1, k + 128)
            ks = np.arange(k, stop, dtype=float)
            head = head + np.exp(logs[k:stop][None, :] + np.outer(log_t, ks)).sum(axis=1)
            k = stop
    # slack for rounding in exp/log and the summation
    return out * (1 + 1e-9) + 1e-300


def tail_bound(n: int, t: float | Fraction, majorant: str = "partitions") -> float:
    """Scalar form of :func:`tail_bounds`."""
    return float(tail_bounds(n, float(t), majorant)[0])


# --------------------------------------------------------------------------
# Certified root extraction
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthResult:
    """Growth rate r with a rigorous enclosure rate_lo <= r <= rate_hi.

    ``rate`` is the point estimate; for the spectral route it is the inverse
    of the first sign change of the truncated polynomial.
    """

    rate: float
    rate_lo: float
    rate_hi: float
    method: Method
    depth: int
    certified: bool
    root_detected: bool = True
    flags: tuple[str, ...] = ()
    root_enclosure: tuple[float, float] | None = field(default=None, compare=False)

    @property
    def entropy(self) -> float:
        return math.log(self.rate) if self.rate > 1 else 0.0

    @property
    def entropy_lo(self) -> float:
        return math.log(self.rate_lo) if self.rate_lo > 1 else 0.0

    @property
    def entropy_hi(self) -> float:
        if math.isinf(self.rate_hi):
            return math.inf
        return math.log(self.rate_hi) if self.rate_hi > 1 else 0.0

    @property
    def entropy_err(self) -> float:
        """Half-width style bound: |h_true - entropy| <= entropy_err."""
        return max(self.entropy_hi - self.entropy, self.entropy - self.entropy_lo)


class _TruncatedEvaluator:
    """Float evaluation of the truncated polynomial with a rounding allowance.

    Positive and negative coefficients are summed separately; for t >= 0 each
    sum is monotone, which gives a cheap lower bound on an interval.
    """

    def __init__(self, coeffs: Sequence[int]):
        c = np.array([float(x) for x in coeffs])
        self.pos = np.where(c > 0, c, 0.0)
        self.neg = np.where(c < 0, c, 0.0)
        self.powers = np.arange(len(c))
        self.slack = 4 * (len(c) + 2) * _EPS

    def parts(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        tk = np.power.outer(np.atleast_1d(t), self.powers)
        return tk @ self.pos, tk @ self.neg

    def lower_on(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        pu, _ = self.parts(u)
        pv, nv = self.parts(v)
        _, nu = self.parts(u)
        return pu + nv - self.slack * (pv - nu)

    def upper_at(self, t: float) -> float:
        p, n = self.parts(np.array([t]))
        return float(p[0] + n[0] + self.slack * (p[0] - n[0]))


def _first_sign_change(poly: SpectralPolynomial, limit: float) -> tuple[Fraction, Fraction] | None:
    """Bracket [a, b] with P(a) > 0 > P(b) around the smallest sign change in (0, limit)."""
    c = list(poly.coefficients)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if len(c) == 1:
        return None
    roots = np.roots([float(x) for x in reversed(c)])
    cands = sorted(
        r.real for r in roots if abs(r.imag) <= 1e-7 and 0 < r.real < limit + 1e-9
    )
    prev = Fraction(0)
    for r in cands:
        hi = Fraction(min(r * (1 + 1e-9) + 1e-15, limit))
        if hi <= prev:
            continue
        if poly(hi) < 0 and poly(prev) > 0:
            return prev, hi
        if poly(hi) > 0:
            prev = hi
    return None


def _refine(poly: SpectralPolynomial, lo: Fraction, hi: Fraction, width: float) -> tuple[Fraction, Fraction]:
    """Exact bisection on dyadic rationals keeping P(lo) > 0 >= P(hi)."""
    while hi - lo > width:
        mid = (lo + hi) / 2
        # keep denominators small: snap to a nearby dyadic
        mid = Fraction(float(mid))
        if not lo < mid < hi:
            break
        if poly(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def smallest_positive_root(
    poly: SpectralPolynomial,
    width: float = 1e-9,
    precision: float | None = None,
    margin: float = 1e-3,
    majorant: str = "partitions",
) -> GrowthResult:
    """Growth rate from the smallest positive zero of a truncated determinant.

    The point estimate is the first sign change of the truncated polynomial,
    located to float resolution.  The enclosure is rigorous for the full
    (untruncated) determinant: the upper bound on r comes from certifying
    P > 0 on [0, t_a] (lower bound of the truncated part minus the tail
    bound, on a subdivision), the lower bound from a point t_b with truncated
    value below minus the tail bound.  ``width`` is the target width of the
    enclosure of the root s = 1/r.

    Raises :class:`InsufficientDepth` when ``precision`` is given and the
    certified enclosure of s cannot be made that narrow at this order.
    """
    if poly[0] != 1:
        raise ValueError("c_0 must be 1")
    n = poly.order
    limit = 1.0 - margin
    ev = _TruncatedEvaluator(poly.coefficients)

    def tail(t):
        return tail_bounds(n, t, majorant)

    bracket = _first_sign_change(poly, limit)
    flags: list[str] = []
    if bracket is None:
        t_a = _certify_positive_up_to(ev, tail, Fraction(limit), width)
        rate_hi = _inv_up(t_a) if t_a > 0 else math.inf
        flags.append("no root detected up to truncation")
        certified = t_a >= limit * (1 - 1e-12)
        if not certified:
            flags.append("uncertified")
        result = GrowthResult(
            rate=1.0,
            rate_lo=0.0,
            rate_hi=rate_hi,
            method=Method.SPECTRAL_DETERMINANT,
            depth=n,
            certified=certified,
            root_detected=False,
            flags=tuple(flags),
            root_enclosure=(float(t_a), 1.0),
        )
        if precision is not None and not certified:
            raise InsufficientDepth(
                f"no root certified at order {n}; the truncation tail dominates below t = {limit}",
                achievable=math.inf,
            )
        return result

    lo, hi = _refine(poly, bracket[0], bracket[1], 1e-15)
    s_est = float((lo + hi) / 2)

    t_a = _certify_positive_up_to(ev, tail, lo, width)
    t_b = _certify_negative_after(ev, tail, hi, limit, width)
    rate = 1.0 / s_est
    rate_hi = _inv_up(t_a) if t_a > 0 else math.inf
    if t_b is None:
        flags.append("uncertified")
        rate_lo = 0.0
        enclosure = (float(t_a), math.inf)
    else:
        rate_lo = _inv_down(t_b)
        enclosure = (float(t_a), float(t_b))
    certified = t_b is not None and t_a > 0
    result = GrowthResult(
        rate=rate,
        rate_lo=min(rate_lo, rate),
        rate_hi=max(rate_hi, rate),
        method=Method.SPECTRAL_DETERMINANT,
        depth=n,
        certified=certified,
        root_detected=True,
        flags=tuple(flags),
        root_enclosure=enclosure,
    )
    if precision is not None:
        achieved = enclosure[1] - enclosure[0]
        if not certified or achieved > precision:
            raise InsufficientDepth(
                f"order {n} certifies the root only to width {achieved:.3g}, "
                f"requested {precision:.3g}",
                achievable=achieved,
            )
    return result


def _inv_up(t: Fraction | float) -> float:
    return math.nextafter(1.0 / float(t), math.inf)


def _inv_down(t: Fraction | float) -> float:
    return math.nextafter(1.0 / float(t), 0.0)


def _point_positive(ev: _TruncatedEvaluator, tail, t: float) -> bool:
    x = np.array([t])
    return bool(ev.lower_on(x, x)[0] - tail(x)[0] > 0)


def _positive_on(ev: _TruncatedEvaluator, tail, end: float) -> bool:
    """Certify P > 0 on [0, end] by adaptive subdivision."""
    if end <= 0:
        return True
    if not _point_positive(ev, tail, end):
        return False
    pieces = np.linspace(0.0, end, 33)
    u, v = pieces[:-1], pieces[1:]
    for _ in range(60):
        tails = tail(np.maximum(v, 1e-300))
        ok = ev.lower_on(u, v) - tails > 0
        if ok.all():
            return True
        u, v = u[~ok], v[~ok]
        if len(u) > 4096 or np.any(v - u < 1e-15 * np.maximum(v, 1e-300)):
            return False
        mid = (u + v) / 2
        u, v = np.concatenate([u, mid]), np.concatenate([mid, v])
    return False


def _certify_positive_up_to(ev: _TruncatedEvaluator, tail, lo: Fraction, width: float) -> float:
    """Largest t_a (approximately) <= lo with P > 0 certified on [0, t_a]."""
    cand = float(lo) - width / 2
    if cand <= 0:
        return 0.0
    if _positive_on(ev, tail, cand):
        return cand
    # locate where the pointwise test first fails, then certify below it
    good, bad = 0.0, cand
    for _ in range(80):
        if bad - good <= width / 4:
            break
        mid = (good + bad) / 2
        if _point_positive(ev, tail, mid):
            good = mid
        else:
            bad = mid
    step = width / 4
    while good > 0:
        if _positive_on(ev, tail, good):
            return good
        good -= step
        step *= 4
    return 0.0


def _certify_negative_after(
    ev: _TruncatedEvaluator,
    tail: Callable[[float], float],
    hi: Fraction,
    limit: float,
    width: float,
) -> float | None:
    """Smallest t_b (approximately) >= hi where P(t_b) < 0 is certified."""
    hi_f = float(hi)

    def ok(t: float) -> bool:
        return ev.upper_at(t) + float(tail(t)[0]) < 0

    step = width / 2
    found = None
    last_bad = hi_f
    while hi_f + step < 1.0:
        cand = hi_f + step
        if cand > limit:
            cand = limit
        if ok(cand):
            found = cand
            break
        if ev.upper_at(cand) - 2 * ev.slack > 0 and float(cand) > hi_f + 1e-12:
            # the truncated polynomial turned positive again: no certificate
            return None
        last_bad = cand
        if cand >= limit:
            return None
        step *= 4
    if found is None:
        return None
    for _ in range(30):
        if found - last_bad <= width / 2:
            break
        mid = (found + last_bad) / 2
        if ok(mid):
            found = mid
        else:
            last_bad = mid
    return found


def growth_from_wedge(
    w: LabeledWedge, n: int, width: float = 1e-9, precision: float | None = None, majorant: str = "partitions"
) -> GrowthResult:
    return smallest_positive_root(spectral_polynomial(w, n), width=width, precision=precision, majorant=majorant)
