"""Entropy of a rational angle by both routes, plus continuity experiments."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .angles import Angle, OrbitInfo, from_fraction, orbit
from .finite_model import leading_eigenvalue, thurston_matrix
from .spectral import GrowthResult, Method, growth_from_wedge
from .wedge import wedge_from_angle

DEFAULT_DEPTH = 40
SWEEP_DEPTH = 24

ALL_METHODS = (Method.SPECTRAL_DETERMINANT, Method.FINITE_MODEL_EIGENVALUE)


class AngleComputationError(ArithmeticError):
    """A submodule failure, tagged with the angle being evaluated."""

    def __init__(self, theta: Angle, cause: Exception):
        super().__init__(f"{theta}: {cause}")
        self.theta = theta
        self.cause = cause


def parse_methods(text: str | Iterable[Method | str]) -> tuple[Method, ...]:
    """Accept 'det', 'matrix', 'both' or an iterable of those / Method values."""
    if isinstance(text, (str, Method)):
        text = [text]
    out: list[Method] = []
    for item in text:
        if isinstance(item, Method):
            chosen = [item]
        elif item == "both":
            chosen = list(ALL_METHODS)
        else:
            chosen = [Method(item)]
        out.extend(m for m in chosen if m not in out)
    return tuple(out)


@dataclass(frozen=True)
class EntropyReport:
    theta: Angle
    orbit: OrbitInfo
    results: tuple[GrowthResult, ...]
    flags: tuple[str, ...] = ()

    def result(self, method: Method) -> GrowthResult | None:
        for r in self.results:
            if r.method is method:
                return r
        return None

    @property
    def h_det(self) -> float | None:
        r = self.result(Method.SPECTRAL_DETERMINANT)
        return None if r is None else r.entropy

    @property
    def h_eig(self) -> float | None:
        r = self.result(Method.FINITE_MODEL_EIGENVALUE)
        return None if r is None else r.entropy

    @property
    def discrepancy(self) -> float | None:
        if self.h_det is None or self.h_eig is None:
            return None
        return abs(self.h_det - self.h_eig)

    @property
    def agree(self) -> bool | None:
        """Both enclosures of h overlap (None unless both routes ran)."""
        det = self.result(Method.SPECTRAL_DETERMINANT)
        eig = self.result(Method.FINITE_MODEL_EIGENVALUE)
        if det is None or eig is None:
            return None
        return self.discrepancy <= det.entropy_err + eig.entropy_err + 1e-12

    @property
    def entropy(self) -> float:
        """Preferred value: the eigenvalue route when present."""
        eig = self.h_eig
        return eig if eig is not None else self.h_det

    def to_dict(self) -> dict:
        det = self.result(Method.SPECTRAL_DETERMINANT)
        eig = self.result(Method.FINITE_MODEL_EIGENVALUE)
        return {
            "theta": str(self.theta),
            "period": self.orbit.period,
            "preperiod": self.orbit.preperiod,
            "h_det": None if det is None else det.entropy,
            "h_det_err": None if det is None else _finite_or_none(det.entropy_err),
            "h_eig": None if eig is None else eig.entropy,
            "h_eig_err": None if eig is None else eig.entropy_err,
            "agree": self.agree,
            "discrepancy": self.discrepancy,
            "depth": None if det is None else det.depth,
            "certified": all(r.certified for r in self.results),
            "flags": list(self.flags) + [f for r in self.results for f in r.flags],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _finite_or_none(x: float) -> float | None:
    return None if math.isinf(x) else x


def compute_entropy(
    theta: Angle,
    depth: int = DEFAULT_DEPTH,
    methods: Sequence[Method | str] | str = ALL_METHODS,
    precision: float | None = None,
    majorant: str = "partitions",
) -> EntropyReport:
    """Core entropy of ``theta`` by the requested routes."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    methods = parse_methods(methods)
    info = orbit(theta)
    results = []
    try:
        for m in methods:
            if m is Method.SPECTRAL_DETERMINANT:
                results.append(
                    growth_from_wedge(wedge_from_angle(theta), depth, precision=precision, majorant=majorant)
                )
            else:
                results.append(leading_eigenvalue(thurston_matrix(theta)))
    except ArithmeticError as exc:
        raise AngleComputationError(theta, exc) from exc
    flags = []
    if info.purely_periodic:
        flags.append("purely periodic")
    return EntropyReport(theta, info, tuple(results), tuple(flags))


def entropy(theta: Angle, depth: int = DEFAULT_DEPTH, method: Method | str = Method.FINITE_MODEL_EIGENVALUE) -> float:
    return compute_entropy(theta, depth, [method]).entropy


# --------------------------------------------------------------------------
# Continuity probes
# --------------------------------------------------------------------------


def default_offset(theta: Angle) -> Fraction:
    """delta_0 = 1 / (3 * 2^(p+q)), small against the orbit's dyadic scale."""
    info = orbit(theta)
    return Fraction(1, 3 * 2 ** info.size)


@dataclass(frozen=True)
class ContinuityProbe:
    base: Angle
    side: int
    offsets: tuple[Fraction, ...]
    angles: tuple[Angle, ...]
    values: tuple[float, ...]
    base_value: float
    method: Method

    @property
    def limit(self) -> float:
        """Estimate of the one-sided limit: the value at the closest probe."""
        return self.values[-1]

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(abs(v - self.base_value) for v in self.values)


def _side_sign(side: int | str) -> int:
    if side in (1, "+", "plus"):
        return 1
    if side in (-1, "-", "minus"):
        return -1
    raise ValueError("side must be '+' or '-'")


def one_sided_probe(
    theta: Angle,
    side: int | str,
    k_max: int,
    depth: int = 32,
    method: Method | str = Method.SPECTRAL_DETERMINANT,
    delta: Fraction | None = None,
) -> ContinuityProbe:
    """h at theta +/- delta * 2^(-k) for k = 1..k_max."""
    sign = _side_sign(side)
    method = parse_methods(method)[0]
    delta = default_offset(theta) if delta is None else Fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValueError("offset must lie in (0, 1/2)")
    offsets, angles, values = [], [], []
    for k in range(1, k_max + 1):
        off = delta / 2**k
        a = from_fraction(theta.fraction + sign * off)
        offsets.append(off)
        angles.append(a)
        values.append(compute_entropy(a, depth, [method]).entropy)
    base = compute_entropy(theta, depth, [method]).entropy
    return ContinuityProbe(theta, sign, tuple(offsets), tuple(angles), tuple(values), base, method)


@dataclass(frozen=True)
class HolderProbe:
    base: Angle
    base_value: float
    table: tuple[tuple[float, float], ...]
    exponent: float | None
    flags: tuple[str, ...] = field(default=())


def holder_probe(
    theta: Angle,
    radii: Sequence[Fraction] | None = None,
    depth: int = DEFAULT_DEPTH,
    method: Method | str = Method.FINITE_MODEL_EIGENVALUE,
) -> HolderProbe:
    """Fit |h(theta) - h(theta')| ~ C |theta - theta'|^alpha on a log-log scale.

    Purely experimental; each radius is probed on both sides and the larger
    gap kept.
    """
    method = parse_methods(method)[0]
    if radii is None:
        d0 = default_offset(theta)
        radii = [d0 / 2**k for k in range(1, 11)]
    base = compute_entropy(theta, depth, [method]).entropy
    flags: list[str] = []
    if base <= 0:
        flags.append("h(theta) = 0: no Hoelder bound expected here")
    rows = []
    for r in radii:
        r = Fraction(r)
        gap = 0.0
        for sign in (1, -1):
            a = from_fraction(theta.fraction + sign * r)
            gap = max(gap, abs(compute_entropy(a, depth, [method]).entropy - base))
        rows.append((float(r), gap))
    exponent = None
    usable = [(r, g) for r, g in rows if g > 0]
    if len(rows) < 2:
        flags.append("fewer than two radii: regression skipped")
    elif len(usable) < 2:
        flags.append("fewer than two nonzero gaps: regression skipped")
    else:
        x = np.log([r for r, _ in usable])
        y = np.log([g for _, g in usable])
        exponent = float(np.polyfit(x, y, 1)[0])
    return HolderProbe(theta, base, tuple(rows), exponent, tuple(flags))
