import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from primo.errors import DomainError
from primo.pareto import dominates
from primo.scalarization import sample_weights, scalarize

vec2 = st.lists(st.floats(-100, 100), min_size=2, max_size=2)


def test_weights_single_objective():
    assert sample_weights(1, np.random.default_rng(0)).tolist() == [1.0]


def test_weights_simplex():
    rng = np.random.default_rng(1)
    draws = np.array([sample_weights(2, rng) for _ in range(10_000)])
    assert np.all(draws > 0)
    np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
    assert abs(draws[:, 0].mean() - 0.5) <= 0.02


def test_weights_need_an_objective():
    with pytest.raises(DomainError):
        sample_weights(0, np.random.default_rng(0))


def test_scalarize_examples():
    assert scalarize([0.5, 0.5], [2, 4]) == pytest.approx(3.0)
    assert scalarize([0.999, 0.001], [2, 4]) == pytest.approx(2.002)
    np.testing.assert_allclose(scalarize([0.5, 0.5], [[2, 4], [0, 0]]), [3.0, 0.0])
    with pytest.raises(DomainError):
        scalarize([0.5, 0.5], [1, 2, 3])


@given(vec2, vec2, st.integers(0, 2**32 - 1))
def test_scalarize_preserves_dominance(a, b, seed):
    w = sample_weights(2, np.random.default_rng(seed))
    if dominates(a, b):
        sa, sb = scalarize(w, a), scalarize(w, b)
        assert sa <= sb
        if float(np.dot(w, np.subtract(b, a))) > 1e-9 * (1 + abs(sb)):
            assert sa < sb


@given(vec2, st.floats(1e-3, 1e3))
def test_scalarize_linear(y, alpha):
    w = np.array([0.3, 0.7])
    assert scalarize(w, np.array(y) * alpha) == pytest.approx(alpha * scalarize(w, y), rel=1e-9, abs=1e-9)
