import numpy as np
import pytest

from tensor_core.errors import DimensionError, NonFiniteGradientError
from training.models import AdamState
from training.optimizer import adam_step


def test_zero_gradient_leaves_parameters_unchanged():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    adam_step(params, {"w": np.zeros(3)}, AdamState(), 1e-3)
    np.testing.assert_array_equal(params["w"], [1.0, -2.0, 3.0])


def test_first_step_fixture():
    params = {"w": np.array([0.5])}
    state = AdamState()
    adam_step(params, {"w": np.array([1.0])}, state, 0.001)
    assert params["w"][0] == pytest.approx(0.5 - 0.001 / (1.0 + 1e-8), abs=1e-9)
    assert state.t == 1
    assert state.m["w"][0] == pytest.approx(0.1)
    assert state.v["w"][0] == pytest.approx(0.001)


def test_constant_gradient_update_approaches_lr():
    params = {"w": np.zeros(2)}
    state = AdamState()
    grads = {"w": np.array([0.3, -4.0])}
    for _ in range(200):
        before = params["w"].copy()
        adam_step(params, grads, state, 1e-2)
    step = np.abs(params["w"] - before)
    np.testing.assert_allclose(step, 1e-2, rtol=1e-6)
    assert state.t == 200
    assert (state.v["w"] >= 0).all()


def test_non_finite_gradient_aborts_whole_step():
    params = {"a": np.ones(2), "b": np.ones(2)}
    state = AdamState()
    with pytest.raises(NonFiniteGradientError, match="'b'"):
        adam_step(params, {"a": np.ones(2), "b": np.array([1.0, np.nan])}, state, 1e-3)
    np.testing.assert_array_equal(params["a"], np.ones(2))
    assert state.t == 0 and not state.m


def test_shape_mismatch_and_bad_lr_are_rejected():
    with pytest.raises(DimensionError):
        adam_step({"w": np.ones(2)}, {"w": np.ones(3)}, AdamState(), 1e-3)
    with pytest.raises(DimensionError):
        adam_step({"w": np.ones(2)}, {}, AdamState(), 1e-3)
    with pytest.raises(ValueError):
        adam_step({"w": np.ones(2)}, {"w": np.ones(2)}, AdamState(), 0.0)


def test_float32_parameters_stay_float32():
    params = {"w": np.ones(3, dtype=np.float32)}
    adam_step(params, {"w": np.ones(3)}, AdamState(), 1e-3)
    assert params["w"].dtype == np.float32
