import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tunnelnav.cnn import AdamState, adam_step

from .oracles import adam_recurrence


def test_zero_gradient_is_fixed_point():
    p = [np.array([1.0, -2.0]), np.array([[3.0]])]
    before = [q.copy() for q in p]
    state = AdamState()
    for _ in range(3):
        adam_step(p, [np.zeros(2), np.zeros((1, 1))], state)
    assert all(np.array_equal(a, b) for a, b in zip(p, before))
    assert not state.m[0].any() and not state.v[0].any()
    assert state.t == 3


def test_first_step_value():
    p = [np.array([0.0])]
    adam_step(p, [np.array([1.0])], AdamState())
    assert p[0][0] == pytest.approx(-1e-3 / (1 + 1e-8), rel=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8), st.floats(-5, 5))
def test_matches_recurrence(grads, theta0):
    p = [np.array([theta0])]
    state = AdamState()
    for g in grads:
        adam_step(p, [np.array([g])], state)
    assert p[0][0] == pytest.approx(adam_recurrence(theta0, grads), rel=1e-9, abs=1e-12)
    assert state.t == len(grads)


def test_two_constant_steps():
    p = [np.array([0.0])]
    state = AdamState()
    for _ in range(2):
        adam_step(p, [np.array([1.0])], state)
    assert p[0][0] == pytest.approx(adam_recurrence(0.0, [1.0, 1.0]), rel=1e-12)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        adam_step([np.zeros(2)], [np.zeros(3)], AdamState())
    with pytest.raises(ValueError):
        adam_step([np.zeros(2)], [], AdamState())
    state = AdamState()
    adam_step([np.zeros(2)], [np.ones(2)], state)
    with pytest.raises(ValueError):
        adam_step([np.zeros(3)], [np.ones(3)], state)
