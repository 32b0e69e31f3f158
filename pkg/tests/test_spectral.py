import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from core_entropy.angles import PairLabel, make_angle
from core_entropy.exact import bareiss_det, charpoly, det_one_minus_tA, largest_real_root
from core_entropy.spectral import (
    ConsistencyError,
    InsufficientDepth,
    SpectralPolynomial,
    coefficients_from_multicycles,
    coefficients_from_traces,
    distinct_partitions,
    majorant_value,
    smallest_positive_root,
    spectral_polynomial,
    tail_bound,
    tail_bounds,
    verify_exp_identity,
)
from core_entropy.wedge import LabeledWedge, enumerate_multicycles, successors, wedge_from_angle

S = PairLabel.SEPARATED
seeds = st.integers(min_value=0, max_value=10**6)

t = sympy.symbols("t")


def sympy_det_series(rows):
    """Coefficients of det(I - tA), lowest degree first, by sympy."""
    n = len(rows)
    m = sympy.eye(n) - t * sympy.Matrix(rows)
    poly = sympy.Poly(m.det(), t)
    coeffs = [int(c) for c in reversed(poly.all_coeffs())]
    return coeffs + [0] * (n + 1 - len(coeffs))


def traces(rows, n):
    a = np.array(rows, dtype=object)
    p = np.identity(len(rows), dtype=object)
    out = []
    for _ in range(n):
        p = p.dot(a)
        out.append(int(np.trace(p)))
    return out


def quartic_root():
    """Real root > 1 of x^4 - 2x - 1 by sympy."""
    x = sympy.symbols("x")
    return max(float(r) for r in sympy.Poly(x**4 - 2 * x - 1, x).real_roots())


def test_newton_examples():
    assert coefficients_from_traces([1, 3, 7, 15]).coefficients == (1, -1, -1, -1, -1)
    assert coefficients_from_traces([0] * 6).coefficients == (1,) + (0,) * 6
    fig7 = [[0, 1, 0], [0, 0, 2], [1, 0, 1]]
    got = coefficients_from_traces(traces(fig7, 6)).coefficients
    assert list(got) == sympy_det_series(fig7) + [0, 0, 0]
    assert list(got[:4]) == [1, -1, 0, -2]


def test_newton_rejects_non_integral():
    with pytest.raises(ConsistencyError):
        coefficients_from_traces([1, 0])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 8))
def test_newton_equals_det_for_finite_graphs(seed, n):
    rng = random.Random(seed)
    rows = [[rng.choice([0, 0, 0, 1, 1, 2]) for _ in range(n)] for _ in range(n)]
    expected = sympy_det_series(rows)
    assert list(coefficients_from_traces(traces(rows, n)).coefficients) == expected
    # beyond degree n the series vanishes
    assert set(coefficients_from_traces(traces(rows, n + 4)).coefficients[n + 1 :]) <= {0}
    assert det_one_minus_tA(rows) == expected


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 7))
def test_bareiss_and_charpoly_match_sympy(seed, n):
    rng = random.Random(seed)
    rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
    m = sympy.Matrix(rows)
    assert bareiss_det(rows) == int(m.det())
    x = sympy.symbols("x")
    assert charpoly(rows) == [int(c) for c in reversed(sympy.Poly(m.charpoly(x).as_expr(), x).all_coeffs())]


def test_bareiss_small_cases():
    assert bareiss_det([[2, 1, 3], [0, 0, 1], [1, 4, 2]]) == -7
    assert bareiss_det([]) == 1


def test_largest_real_root():
    assert largest_real_root([-2, 0, -1, 1]) == pytest.approx(1.6956207695598624, abs=1e-14)
    assert largest_real_root([4, -4, 1]) == 2  # (x - 2)^2: no sign change without square-free part
    assert largest_real_root([1, 0, 1]) is None


def test_multicycle_route_examples():
    half = wedge_from_angle(make_angle(1, 2))
    assert coefficients_from_multicycles(enumerate_multicycles(half, 6), 6).coefficients == (1,) + (-1,) * 6
    assert coefficients_from_multicycles([], 4).coefficients == (1, 0, 0, 0, 0)
    w = LabeledWedge.explicit({(1, 2): S, (2, 4): S})
    c = coefficients_from_multicycles(enumerate_multicycles(w, 3), 3).coefficients
    # c_3: the 3-cycles counted with -1 plus the loop and 2-cycle together with +1
    singles = sum(1 for m in enumerate_multicycles(w, 3) if m.length == 3 and m.components == 1)
    assert c[3] == 1 - singles


def test_exp_identity_examples():
    assert verify_exp_identity(wedge_from_angle(make_angle(1, 2)), 10)
    assert verify_exp_identity(LabeledWedge.explicit({}), 10)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_exp_identity_random_wedges(seed):
    rng = random.Random(seed)
    w = LabeledWedge.random_explicit(rng, 16, density=rng.uniform(0.1, 0.9))
    assert verify_exp_identity(w, 8)


def test_polynomial_json_round_trip():
    p = SpectralPolynomial((1, -3, 10**30, 0))
    text = p.to_json()
    assert text == '["1", "-3", "1000000000000000000000000000000", "0"]'
    assert SpectralPolynomial.from_json(text) == p
    with pytest.raises(ValueError):
        SpectralPolynomial.from_json("[1, 2]")
    with pytest.raises(ValueError):
        SpectralPolynomial((2, 1))


def brute_distinct_partitions(k, largest=None):
    largest = k if largest is None else largest
    if k == 0:
        return 1
    return sum(brute_distinct_partitions(k - part, part - 1) for part in range(1, min(k, largest) + 1))


def test_distinct_partition_table():
    for k in range(0, 40):
        assert distinct_partitions(k) == brute_distinct_partitions(k)
    # the smooth envelope dominates everywhere in the table
    for k in range(1, 1201):
        assert math.log(distinct_partitions(k)) <= math.pi * math.sqrt(k / 3)


def backward_sources(m, w):
    out = []
    for cyc in m.cycles:
        vs = cyc.vertices
        for k, v in enumerate(vs):
            nxt = vs[(k + 1) % len(vs)]
            if w.separated(*v) and nxt == (1, v.height + 1):
                out.append(v)
    return out


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 10))
def test_multicycle_counts_below_partition_majorant(seed, n):
    rng = random.Random(seed)
    w = LabeledWedge.random_explicit(rng, 2 * n, density=rng.uniform(0.1, 0.9))
    counts = [0] * (n + 1)
    for m in enumerate_multicycles(w, n):
        counts[m.length] += 1
        # each multi-cycle's length is the sum of distinct diagonal indices of its B-edge sources
        diagonals = [v.width - v.height for v in backward_sources(m, w)]
        assert len(set(diagonals)) == len(diagonals)
        assert sum(diagonals) == m.length
    for k in range(1, n + 1):
        assert counts[k] <= distinct_partitions(k) <= (2 * k) ** math.sqrt(2 * k)


def test_tail_bound_rejects_out_of_range():
    for bad in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            tail_bound(10, bad)


def test_tail_bound_monotone_in_depth():
    vals = [tail_bound(n, 0.5) for n in range(1, 80)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    power = [tail_bound(n, 0.5, "power") for n in range(1, 80, 5)]
    assert all(a > b for a, b in zip(power, power[1:]))


def test_tail_bound_diverges_near_one():
    assert tail_bound(0, 0.999) > 1e6
    assert tail_bound(0, 0.9) > tail_bound(0, 0.5)


@pytest.mark.parametrize("n", [5, 10, 20, 30])
@pytest.mark.parametrize("tt", [0.1, 0.3, 0.5, 0.7])
def test_tail_bound_covers_half_closed_form(n, tt):
    # P = (1 - 2t)/(1 - t) = 1 - t - t^2 - ...; the neglected part is t^(n+1)/(1-t)
    assert tail_bound(n, tt) >= tt ** (n + 1) / (1 - tt)


def test_tail_bound_against_direct_sum():
    for majorant in ("partitions", "power"):
        for n in (3, 17, 40):
            for tt in (0.2, 0.6):
                direct = math.fsum(majorant_value(k, majorant) * tt**k for k in range(n + 1, 3000))
                bound = tail_bound(n, tt, majorant)
                assert direct <= bound <= direct * (1 + 1e-6) + 1e-300
    assert np.allclose(tail_bounds(10, [0.2, 0.4]), [tail_bound(10, 0.2), tail_bound(10, 0.4)])


def test_root_of_geometric_polynomial():
    p = SpectralPolynomial((1,) + (-1,) * 20)
    r = smallest_positive_root(p)
    assert r.certified
    assert r.rate_lo <= 2 <= r.rate_hi
    assert r.rate == pytest.approx(2, abs=1e-5)
    assert r.entropy == pytest.approx(math.log(2), abs=1e-5)


def test_no_root():
    r = smallest_positive_root(SpectralPolynomial((1,) + (0,) * 20))
    assert not r.root_detected
    assert r.rate == 1 and r.entropy == 0
    assert "no root detected up to truncation" in r.flags
    assert r.rate_lo <= 1 <= r.rate_hi


def test_quartic_angle_at_depth_40():
    lam = quartic_root()
    r = smallest_positive_root(spectral_polynomial(wedge_from_angle(make_angle(1, 5)), 40))
    assert r.certified
    assert r.rate_lo <= lam <= r.rate_hi
    assert abs(r.rate - lam) < 1e-6


def test_insufficient_depth_names_achievable_width():
    p = spectral_polynomial(wedge_from_angle(make_angle(1, 5)), 20)
    with pytest.raises(InsufficientDepth) as info:
        smallest_positive_root(p, precision=1e-12)
    assert info.value.achievable > 1e-12
    assert "width" in str(info.value)


@pytest.mark.parametrize("num, den", [(1, 2), (1, 5), (3, 7), (5, 13), (1, 9), (7, 23)])
@pytest.mark.parametrize("n", [24, 40])
def test_certificates_hold(num, den, n):
    """At 1/r_lo the truncated value plus tail is negative; on [0, 1/r_hi] it stays positive."""
    p = spectral_polynomial(wedge_from_angle(make_angle(num, den)), n)
    r = smallest_positive_root(p)
    if (num, den) == (1, 2) or (num, den, n) == (1, 5, 40):
        assert r.certified
    if not (r.certified and r.root_detected):
        return
    tb = Fraction(1 / r.rate_lo)
    ta = Fraction(1 / r.rate_hi)
    assert float(p(tb)) + tail_bound(n, float(tb)) < 0
    grid = [ta * k / 400 for k in range(1, 401)]
    assert all(float(p(x)) - tail_bound(n, float(x)) > 0 for x in grid)


@pytest.mark.parametrize("num, den", [(1, 5), (3, 7), (5, 13), (7, 23), (2, 9)])
def test_enclosures_stabilise_with_depth(num, den):
    w = wedge_from_angle(make_angle(num, den))
    results = [smallest_positive_root(spectral_polynomial(w, n)) for n in (24, 32, 40, 48)]
    certified = [r for r in results if r.certified]
    for a, b in zip(certified, certified[1:]):
        assert a.rate_lo <= b.rate_hi and b.rate_lo <= a.rate_hi
        assert b.rate_hi - b.rate_lo <= a.rate_hi - a.rate_lo


def test_wedge_coefficients_below_majorant():
    for num, den in [(1, 5), (3, 7), (1, 51), (13, 45)]:
        p = spectral_polynomial(wedge_from_angle(make_angle(num, den)), 40)
        assert all(abs(c) <= distinct_partitions(k) for k, c in enumerate(p.coefficients) if k)
