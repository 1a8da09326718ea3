import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from primo.errors import DomainError
from primo.pareto import (
    dominates,
    hvi,
    hypervolume,
    hypervolume_mc,
    non_dominated_mask,
    normalized_hv_regret,
    pareto_set,
)

points2 = arrays(np.float64, st.tuples(st.integers(1, 25), st.just(2)), elements=st.floats(0, 1))
coarse2 = arrays(
    np.float64,
    st.tuples(st.integers(1, 8), st.just(2)),
    elements=st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]),
)
points3 = arrays(np.float64, st.tuples(st.integers(1, 25), st.just(3)), elements=st.floats(0, 1))


def test_dominates_examples():
    assert dominates((1, 2), (2, 3))
    assert not dominates((1, 3), (2, 2))
    assert not dominates((1, 2), (1, 2))
    with pytest.raises(DomainError):
        dominates((1, 2), (1, 2, 3))


def test_pareto_set_examples():
    np.testing.assert_array_equal(pareto_set([(1, 2), (2, 1), (2, 2)]), [(1, 2), (2, 1)])
    np.testing.assert_array_equal(pareto_set([(1, 1)]), [(1, 1)])
    np.testing.assert_array_equal(pareto_set([(2, 2)] * 3), [(2, 2)] * 3)


def test_pareto_set_with_payloads_keeps_input_order():
    out = pareto_set([(2, 1), (3, 3), (1, 2)], payloads=["a", "b", "c"])
    assert [p for p, _ in out] == ["a", "c"]


@settings(max_examples=150, deadline=None)
@given(st.one_of(points2, points3))
def test_mask_matches_pairwise_definition(pts):
    mask = non_dominated_mask(pts)
    for i, p in enumerate(pts):
        dominated = any(dominates(q, p) for j, q in enumerate(pts) if j != i)
        assert mask[i] == (not dominated)


def test_hypervolume_examples():
    assert hypervolume([(1, 2), (2, 1)], (3, 3)) == pytest.approx(3.0)
    assert hypervolume(np.empty((0, 2)), (3, 3)) == 0.0
    assert hypervolume([(1, 1)], (3, 3)) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        hypervolume([(1, 1)], (3, 3, 3))


def test_points_outside_box_are_clipped():
    assert hypervolume([(4, 1)], (3, 3)) == 0.0
    assert hypervolume([(1, 4), (2, 2)], (3, 3)) == pytest.approx(1.0)


def test_one_objective_is_a_length():
    assert hypervolume([[0.5], [2.0]], [3.0]) == pytest.approx(2.5)


def test_hvi_examples():
    p = [(1, 2), (2, 1)]
    assert hvi(p, (3, 3), [(0.5, 0.5)]) == pytest.approx(3.25)
    assert hvi(p, (3, 3), [(2.5, 2.5)]) == 0.0
    assert hvi(p, (3, 3), p) == 0.0


@settings(max_examples=150, deadline=None)
@given(points2, st.floats(0, 1.2), st.floats(0, 1.2))
def test_hypervolume_monotone(pts, x, y):
    ref = (1.2, 1.2)
    before = hypervolume(pts, ref)
    after = hypervolume(np.vstack([pts, [x, y]]), ref)
    assert after >= before - 1e-12
    if any(dominates(p, (x, y)) or tuple(p) == (x, y) for p in pts):
        assert after == pytest.approx(before, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(coarse2, coarse2)
def test_hvi_zero_iff_nothing_new(p, g):
    ref = (1.0, 1.0)
    gain = hvi(p, ref, g)
    assert gain >= 0
    covered = all(any(np.all(q <= x) for q in p) or np.any(x >= 1.0) for x in g)
    if covered:
        assert gain == pytest.approx(0.0, abs=1e-12)
    else:
        assert gain > 0


def _hv3_exact(points, ref):
    # inclusion-exclusion; fine for a handful of points
    total = 0.0
    for r in range(1, len(points) + 1):
        for sub in itertools.combinations(points, r):
            total += (-1) ** (r + 1) * np.prod(np.clip(ref - np.max(sub, axis=0), 0, None))
    return total


def test_three_objectives_monte_carlo():
    rng = np.random.default_rng(11)
    pts = rng.random((6, 3))
    ref = np.ones(3)
    est, se = hypervolume_mc(pts, ref, rng=np.random.default_rng(0))
    assert abs(est - _hv3_exact(pts, ref)) <= 4 * se
    assert hypervolume(pts, ref) == est  # default rng is seeded


def test_normalized_regret():
    np.testing.assert_allclose(normalized_hv_regret([0, 2.0], 2.0), [1.0, 0.0])
    np.testing.assert_allclose(normalized_hv_regret([1.0], 2.0), [0.5])
    r = normalized_hv_regret(np.cumsum(np.random.default_rng(0).random(20)) / 20, 1.0)
    assert np.all(np.diff(r) <= 0)
    with pytest.raises(DomainError):
        normalized_hv_regret([0.1], 0.0)
