import json
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from core_entropy.angles import PairLabel, make_angle, orbit
from core_entropy.checks import closed_paths, reduced_angles, weak_cover_failures
from core_entropy.finite_model import (
    ConsistencyError,
    ConvergenceError,
    PairClass,
    TransitionMatrix,
    canonical_pair,
    cover_projection,
    equiv_pq,
    finite_graph_adjacency,
    finite_vertices,
    leading_eigenvalue,
    thurston_matrix,
    two_cover_adjacency,
)
from core_entropy.spectral import growth_from_wedge
from core_entropy.wedge import LabeledWedge, wedge_from_angle

S, N = PairLabel.SEPARATED, PairLabel.NON_SEPARATED
seeds = st.integers(min_value=0, max_value=10**6)

# period 1, pre-period 2: only the class {1,2} is non-separated
FIG6 = LabeledWedge.periodic(1, 2, {(1, 2): N, (1, 3): S, (2, 3): S})

# M_{1/5} assembled by hand from x = (1/5, 2/5, 4/5, 3/5):
# {1,2} N -> {2,3}; {1,3} S -> {1,2} + {1,4}; {1,4} N (3/5 on boundary) -> {2,5} = {1,2};
# {2,3} S -> {1,3} + {1,4}; {2,4} N -> {3,5} = {1,3}; {3,4} N -> {4,5} = {1,4}
M_FIFTH = [
    [0, 0, 0, 1, 0, 0],
    [1, 0, 1, 0, 0, 0],
    [1, 0, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
]


def sympy_largest_root(expr, x):
    return max(float(r) for r in sympy.Poly(expr, x).real_roots())


def test_equiv_pq():
    assert equiv_pq(3, 5, 1, 2)
    assert equiv_pq(1, 1, 4, 0)
    assert equiv_pq(2, 6, 4, 0)
    assert not equiv_pq(1, 2, 4, 0)
    assert not equiv_pq(2, 3, 1, 2)
    assert not equiv_pq(1, 4, 3, 1)
    assert equiv_pq(2, 5, 3, 1)


@given(st.integers(1, 6), st.integers(0, 4), st.integers(1, 40), st.integers(1, 40))
def test_equiv_pq_is_an_equivalence_matching_orbit_points(p, q, i, j):
    # the class relation agrees with equality of points 2^(i-1) theta for a
    # rational theta of exact period p and pre-period q when one exists
    assert equiv_pq(i, j, p, q) == equiv_pq(j, i, p, q)
    assert equiv_pq(i, i, p, q)


@pytest.mark.parametrize("num, den", [(1, 5), (1, 6), (3, 14), (5, 24), (7, 31)])
def test_equiv_pq_matches_orbit_equalities(num, den):
    o = orbit(make_angle(num, den))
    for i in range(1, 30):
        for j in range(1, 30):
            assert equiv_pq(i, j, o.period, o.preperiod) == (o.x(i) == o.x(j))


def test_finite_vertices():
    assert finite_vertices(1, 2) == [PairClass(1, 2), PairClass(1, 3), PairClass(2, 3)]
    assert finite_vertices(1, 0) == []
    assert len(finite_vertices(4, 0)) == 6


def test_thurston_matrix_examples():
    assert thurston_matrix(make_angle(1, 2)).rows == ((2,),)
    assert thurston_matrix(make_angle(1, 3)).rows == ((1,),)
    m = thurston_matrix(make_angle(1, 5))
    assert [list(r) for r in m.rows] == M_FIFTH
    x = sympy.symbols("x")
    block = sympy.Matrix([row[:4] for row in M_FIFTH[:4]])
    assert sympy.expand(block.charpoly(x).as_expr()) == x**4 - 2 * x - 1


def test_fig7_finite_model():
    m = finite_graph_adjacency(FIG6, 1, 2)
    a, b, c = PairClass(1, 2), PairClass(2, 3), PairClass(1, 3)
    assert m[a, b] == 1 and m[b, c] == 2 and m[c, a] == 1 and m[c, c] == 1
    assert sum(sum(r) for r in m.rows) == 5
    x = sympy.symbols("x")
    lam = sympy_largest_root(x**3 - x**2 - 2, x)
    r = leading_eigenvalue(m)
    assert r.rate_lo <= lam + 1e-12 and lam - 1e-12 <= r.rate_hi
    assert r.rate == pytest.approx(1.6956, abs=1e-4)


def test_matrix_dump_round_trip():
    m = finite_graph_adjacency(FIG6, 1, 2)
    data = json.loads(m.to_json())
    assert data == {"dimension": 3, "vertices": ["{1,2}", "{1,3}", "{2,3}"], "rows": [[0, 0, 1], [1, 1, 0], [0, 2, 0]]}
    assert TransitionMatrix.from_json(m.to_json()) == m
    two = two_cover_adjacency(FIG6, 1, 2)
    assert TransitionMatrix.from_json(two.to_json()) == two
    with pytest.raises(ValueError):
        TransitionMatrix.from_json('{"dimension": 2, "vertices": ["{1,2}"], "rows": [[0]]}')


def test_bridge_pair_matrix_equals_finite_model():
    for theta in reduced_angles(32):
        o = orbit(theta)
        assert thurston_matrix(theta) == finite_graph_adjacency(wedge_from_angle(theta), o.period, o.preperiod), theta


def test_periodicity_violation_detected():
    # (1,3) and (1,4) share a class for period 1, pre-period 2
    w = LabeledWedge.explicit({(1, 3): S})
    with pytest.raises(ConsistencyError):
        finite_graph_adjacency(w, 1, 2)
    # a diagonal pair labeled separated
    w = LabeledWedge.explicit({(3, 4): S})
    with pytest.raises(ConsistencyError):
        finite_graph_adjacency(w, 1, 2)


def test_two_cover_fig6():
    two = two_cover_adjacency(FIG6, 1, 2)
    assert two.dimension == 6
    proj = cover_projection(1, 2)
    assert {proj[v] for v in two.labels} == set(finite_vertices(1, 2))
    assert proj[(2, 1)] == proj[(1, 2)]
    assert leading_eigenvalue(two).rate == pytest.approx(leading_eigenvalue(finite_graph_adjacency(FIG6, 1, 2)).rate, abs=1e-9)


def test_all_non_separated_radius_one():
    w = LabeledWedge.periodic(2, 0, {})
    assert leading_eigenvalue(finite_graph_adjacency(w, 2, 0)).rate == pytest.approx(1)
    assert leading_eigenvalue(two_cover_adjacency(w, 2, 0)).rate == pytest.approx(1)


def random_periodic(seed):
    rng = random.Random(seed)
    p, q = rng.randint(1, 6), rng.randint(0, 4)
    return LabeledWedge.random_periodic(rng, p, q, density=rng.uniform(0.1, 0.9)), p, q


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_two_cover_has_the_same_radius(seed):
    w, p, q = random_periodic(seed)
    a = leading_eigenvalue(finite_graph_adjacency(w, p, q))
    b = leading_eigenvalue(two_cover_adjacency(w, p, q))
    assert abs(a.rate - b.rate) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_weak_cover_inequalities(seed):
    w, p, q = random_periodic(seed)
    assert weak_cover_failures(w, p, q, 8) == []


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_label_surgery_at_period_multiples(seed):
    rng = random.Random(seed)
    p = rng.randint(2, 6)
    labels = {(a, b): (S if rng.random() < 0.5 else N) for a in range(1, p + 1) for b in range(a + 1, p + 1)}
    changed = {k: (v if k[1] != p else (S if rng.random() < 0.5 else N)) for k, v in labels.items()}
    w1 = LabeledWedge.periodic(p, 0, labels)
    w2 = LabeledWedge.periodic(p, 0, changed)
    assert finite_graph_adjacency(w1, p, 0) == finite_graph_adjacency(w2, p, 0)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_no_closed_path_visits_a_diagonal_pair(seed):
    w, p, q = random_periodic(seed)
    for path in closed_paths(w, 7):
        assert all(canonical_pair(v.height, v.width, p, q) is not None for v in path), path


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_infinite_graph_rate_matches_finite_model(seed):
    w, p, q = random_periodic(seed)
    eig = leading_eigenvalue(finite_graph_adjacency(w, p, q))
    det = growth_from_wedge(w, 40)
    if det.certified and det.root_detected:
        assert det.rate_lo - 1e-12 <= eig.rate_hi and eig.rate_lo <= det.rate_hi + 1e-12
    if eig.rate <= 1:
        assert det.rate_lo <= 1


def test_leading_eigenvalue_examples():
    assert leading_eigenvalue([[2]]).rate == 2
    x = sympy.symbols("x")
    lam = sympy_largest_root(x**4 - 2 * x - 1, x)
    assert leading_eigenvalue(M_FIFTH).rate == pytest.approx(lam, abs=1e-12)
    assert leading_eigenvalue([[0, 1], [0, 0]]).rate == 0
    assert leading_eigenvalue(np.zeros((0, 0))).rate == 0


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 40))
def test_leading_eigenvalue_matches_numpy(seed, n):
    rng = random.Random(seed)
    density = rng.uniform(0.02, 0.3)
    a = np.array([[rng.choice([1, 2]) if rng.random() < density else 0 for _ in range(n)] for _ in range(n)])
    expected = max(abs(np.linalg.eigvals(a.astype(float)))) if n else 0.0
    r = leading_eigenvalue(a)
    assert r.rate == pytest.approx(expected, abs=1e-8)
    assert r.rate_lo <= expected + 1e-8 and expected - 1e-8 <= r.rate_hi


def test_periodic_permutation_converges():
    # a cyclic permutation plus a chord: naive power iteration would oscillate
    a = np.roll(np.eye(9, dtype=int), 1, axis=1)
    a[0, 3] = 1
    expected = max(abs(np.linalg.eigvals(a.astype(float))))
    assert leading_eigenvalue(a).rate == pytest.approx(expected, abs=1e-10)


def test_convergence_error_reports_residual():
    rng = np.random.default_rng(3)
    a = (rng.random((30, 30)) < 0.1).astype(int) + np.roll(np.eye(30, dtype=int), 1, axis=1)
    with pytest.raises(ConvergenceError) as info:
        leading_eigenvalue(a, max_iter=2)
    assert info.value.residual > 0 and info.value.iterations == 2
