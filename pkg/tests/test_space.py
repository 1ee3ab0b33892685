import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from frechetnet import space
from frechetnet.errors import DimensionError, ValidationError
from frechetnet.space import HalfSpaceLabel, SeminormFamily, Side

H, G = SeminormFamily.HILBERT, SeminormFamily.GRADED

vectors = st.integers(1, 16).flatmap(
    lambda d: arrays(np.float64, (d,), elements=st.floats(-1e3, 1e3, allow_subnormal=False))
)


def pair_of(d, lo=-1e3, hi=1e3):
    return arrays(np.float64, (2, d), elements=st.floats(lo, hi, allow_subnormal=False))


# -- seminorms ---------------------------------------------------------------


def test_hilbert_seminorm_ignores_k():
    assert space.seminorm(H, 3, [3.0, 4.0]) == 5.0


def test_graded_seminorm_brute_force():
    x = [0.0, 1.0, 0.0]
    brute = max(n**2 * abs(v) for n, v in enumerate(x, start=1))
    assert space.seminorm(G, 2, x) == brute == 4.0


@pytest.mark.parametrize("fam", list(SeminormFamily))
def test_seminorm_of_zero(fam):
    assert space.seminorm(fam, 1, np.zeros(3)) == 0.0


def test_seminorm_rejects_k0():
    with pytest.raises(ValueError):
        space.seminorm(H, 0, [1.0])


def test_seminorm_batched(rng):
    x = rng.normal(size=(5, 7))
    assert np.allclose(space.seminorm(G, 2, x), [space.seminorm(G, 2, r) for r in x])


def test_graded_overflow_is_infinite_not_nan():
    x = np.zeros(64)
    x[-1] = 1.0
    assert space.seminorm(G, 200, x) == math.inf


@given(vectors, st.integers(1, 8))
def test_seminorm_monotone_in_k(x, k):
    for fam in SeminormFamily:
        assert space.seminorm(fam, k, x) <= space.seminorm(fam, k + 1, x)


@given(st.integers(1, 12).flatmap(pair_of), st.floats(-50, 50), st.integers(1, 4))
def test_seminorm_homogeneous_and_subadditive(xy, c, k):
    x, y = xy
    for fam in SeminormFamily:
        px, py = space.seminorm(fam, k, x), space.seminorm(fam, k, y)
        assert space.seminorm(fam, k, c * x) == pytest.approx(abs(c) * px, rel=1e-12, abs=1e-300)
        assert space.seminorm(fam, k, x + y) <= (px + py) * (1 + 1e-12)


# -- metric ------------------------------------------------------------------


def test_metric_unit_distance_hilbert():
    x = np.zeros(4)
    y = np.array([0.0, 1.0, 0.0, 0.0])
    oracle = sum(2.0**-k * 0.5 for k in range(1, 65))
    assert space.metric(H, x, y, 64) == pytest.approx(oracle, abs=1e-15)
    assert abs(space.metric(H, x, y, 64) - 0.5) <= 2.0**-64 + 1e-15


def test_metric_graded_example():
    # p_k(e_2) = 2^k, so the summand is 2^-k * 2^k / (1 + 2^k)
    oracle = math.fsum(1.0 / (1.0 + 2.0**k) for k in range(1, 65))
    d = space.metric(G, [0.0, 1.0, 0.0], np.zeros(3), 64)
    assert d == pytest.approx(oracle, rel=1e-14)
    assert round(d, 4) == 0.7645


def test_metric_identity(rng):
    x = rng.normal(size=5)
    assert space.metric(G, x, x) == 0.0


def test_metric_dimension_mismatch():
    with pytest.raises(DimensionError):
        space.metric(H, np.zeros(2), np.zeros(3))


def test_metric_huge_graded_difference_is_bounded():
    x = np.zeros(64)
    x[-1] = 1e300
    assert space.metric(G, x, np.zeros(64)) <= 1.0


@given(st.integers(1, 16).flatmap(lambda d: arrays(np.float64, (3, d), elements=st.floats(-100, 100))))
def test_metric_axioms(xyz):
    x, y, z = xyz
    for fam in SeminormFamily:
        dxy, dyx = space.metric(fam, x, y), space.metric(fam, y, x)
        assert dxy >= 0.0
        assert dxy == dyx
        assert dxy <= space.metric(fam, x, z) + space.metric(fam, z, y) + 1e-12


@given(st.integers(1, 16).flatmap(lambda d: arrays(np.float64, (2, d), elements=st.floats(-100, 100))))
def test_metric_hilbert_closed_form(xy):
    x, y = xy
    r = float(np.linalg.norm(x - y))
    assert abs(space.metric(H, x, y, 64) - r / (1 + r)) <= 2.0**-64 + 1e-12


# -- pairing, operators, projections -------------------------------------------


def test_pairing_examples():
    assert space.pairing([1.0, 0.0, 2.0], [3.0, 1.0, 0.5]) == 4.0
    assert space.pairing(np.zeros(3), [5.0, -1.0, 2.0]) == 0.0
    assert space.pairing([1.0, 1.0], [2.0, -2.0]) == 0.0


def test_apply_operator_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(space.apply_operator(np.eye(3), x), x)
    assert np.array_equal(space.apply_operator(np.zeros((3, 3)), x), np.zeros(3))
    assert np.array_equal(space.apply_operator(np.diag([2.0, 3.0]), [1.0, 1.0]), [2.0, 3.0])


def test_apply_operator_linear(rng):
    a, x, y = rng.normal(size=(4, 4)), rng.normal(size=4), rng.normal(size=4)
    lhs = space.apply_operator(a, 2.0 * x - 3.0 * y)
    rhs = 2.0 * space.apply_operator(a, x) - 3.0 * space.apply_operator(a, y)
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-13)


def test_project_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(space.project(x, 2), [1.0, 2.0, 0.0])
    assert np.array_equal(space.project(x, 3), x)
    assert np.array_equal(space.project(np.zeros(5), 2), np.zeros(5))
    assert np.array_equal(x, [1.0, 2.0, 3.0])  # input untouched


@pytest.mark.parametrize("n", [0, 4])
def test_project_out_of_range(n):
    with pytest.raises(DimensionError):
        space.project(np.ones(3), n)
    with pytest.raises(DimensionError):
        space.project_operator(np.eye(3), n)


def test_project_operator_examples():
    assert np.array_equal(space.project_operator(np.eye(3), 2), np.diag([1.0, 1.0, 0.0]))
    a = np.zeros((3, 3))
    a[:2, :2] = [[1.0, 2.0], [3.0, 4.0]]
    assert np.array_equal(space.project_operator(a, 2), a)
    expected = np.zeros((3, 3))
    expected[:2, :2] = 1.0
    p = np.diag([1.0, 1.0, 0.0])
    assert np.array_equal(space.project_operator(np.ones((3, 3)), 2), expected)
    assert np.array_equal(p @ np.ones((3, 3)) @ p, expected)


def test_project_operator_commutes(rng):
    for _ in range(500):
        d = int(rng.integers(1, 12))
        n = int(rng.integers(1, d + 1))
        a, x = rng.normal(size=(d, d)), rng.normal(size=d)
        lhs = space.apply_operator(space.project_operator(a, n), x)
        rhs = space.project(space.apply_operator(a, space.project(x, n)), n)
        assert np.array_equal(lhs, rhs)


@given(vectors, st.integers(1, 16), st.integers(1, 5))
def test_projection_contracts(x, n, k):
    n = min(n, len(x))
    px = space.project(x, n)
    assert np.linalg.norm(px) <= np.linalg.norm(x)
    assert space.seminorm(G, k, px) <= space.seminorm(G, k, x)


# -- half-spaces ---------------------------------------------------------------


def test_half_space_examples():
    e1 = [1.0, 0.0]
    assert space.half_space_classify(e1, [2.0, 0.0]) is HalfSpaceLabel.PLUS
    assert space.half_space_classify(e1, [-1.0, 5.0]) is HalfSpaceLabel.MINUS
    assert space.half_space_classify(e1, [0.0, 7.0]) is HalfSpaceLabel.ZERO


def test_half_space_zero_functional():
    with pytest.raises(ValidationError):
        space.half_space_classify([0.0, 0.0], [1.0, 1.0])


def _line_search_distance(psi, c, side, x):
    # minimize |s| over x + s psi inside the set; psi is unit so this is the distance
    s = np.linspace(-20.0, 20.0, 400_001)
    level = psi @ x + s
    inside = {Side.GE: level >= c, Side.LE: level <= c, Side.EQ: np.isclose(level, c, atol=1e-4)}[side]
    best = float(np.min(np.abs(s[inside])))
    if side is Side.EQ:
        best = abs(c - psi @ x)  # the exact root on the line refines the grid hit
    return best


def test_distance_examples():
    e1 = np.array([1.0, 0.0])
    assert space.distance_to_halfspace(e1, 1.0, Side.GE, [0.8, 0.0]) == pytest.approx(0.2, abs=1e-15)
    assert space.distance_to_halfspace(e1, 1.0, Side.GE, [3.0, 4.0]) == 0.0
    assert space.distance_to_halfspace(e1, 0.0, Side.EQ, [-3.0, 1.0]) == 3.0


def test_distance_matches_line_search(rng):
    for _ in range(50):
        psi = rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        x, c = rng.normal(size=3), float(rng.normal())
        for side in Side:
            oracle = _line_search_distance(psi, c, side, x)
            assert space.distance_to_halfspace(psi, c, side, x) == pytest.approx(oracle, abs=1e-4)


def test_distance_requires_unit_psi():
    with pytest.raises(ValidationError):
        space.distance_to_halfspace([2.0, 0.0], 0.0, Side.GE, [1.0, 1.0])


def test_as_vector_rejects_nan():
    with pytest.raises(ValidationError):
        space.as_vector([1.0, float("nan")])


def test_basis_vector():
    assert np.array_equal(space.basis_vector(2, 3), [0.0, 1.0, 0.0])
    with pytest.raises(DimensionError):
        space.basis_vector(4, 3)
