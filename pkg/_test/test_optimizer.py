import numpy as np
import pytest

from sis.config import SisConfig
from sis.gradients import Batch, batch_loss, value_and_gradients
from sis.masks import SensorMask
from sis.optimizer import AdamState, adam_step, adam_update, project_sample_weights
from sis.params import SAMPLE_WEIGHTS, init_params


def test_first_step_moves_by_lr():
    tensors = {'w': np.array([1.0])}
    updated, state = adam_update(tensors, {'w': np.array([1.0])}, AdamState(), lr=0.1)
    assert updated['w'][0] == pytest.approx(0.9, abs=1e-6)
    assert state.t == 1
    assert tensors['w'][0] == 1.0


def test_zero_gradient_leaves_params_unchanged():
    config = SisConfig(f=3, f_h=2, hidden_dims=[4], S=2, N_train=4)
    params = init_params(config, np.random.default_rng(0))
    grads = {name: np.zeros_like(value) for name, value in params.named_tensors().items()}
    updated, _ = adam_step(params, grads, lr=0.01)
    for name, value in params.named_tensors().items():
        np.testing.assert_array_equal(updated.named_tensors()[name], value)


def test_sample_weight_projection():
    np.testing.assert_allclose(project_sample_weights(np.array([-1.0, 1.0, 2.0])), [0.0, 1.0, 2.0])
    np.testing.assert_allclose(project_sample_weights(np.array([-1.0, 3.0])), [0.0, 2.0])
    np.testing.assert_array_equal(project_sample_weights(np.array([-1.0, -2.0])), [1.0, 1.0])


def test_step_driving_v_negative_is_projected():
    config = SisConfig(f=3, f_h=2, hidden_dims=[4], S=2, N_train=3)
    params = init_params(config, np.random.default_rng(0))
    grads = {SAMPLE_WEIGHTS: np.array([1.0, -1.0, -1.0])}
    updated, _ = adam_step(params, grads, lr=2.0)
    v = updated.v
    assert v[0] == 0.0
    assert np.all(v >= 0)
    assert v.mean() == pytest.approx(1.0)


def test_state_accumulates():
    tensors = {'w': np.array([0.0, 0.0])}
    state = AdamState()
    for _ in range(3):
        tensors, state = adam_update(tensors, {'w': np.array([1.0, -1.0])}, state, lr=0.01)
    assert state.t == 3
    assert tensors['w'][0] < 0 < tensors['w'][1]


def test_fifty_steps_halve_loss_on_tiny_batch():
    config = SisConfig(f=3, f_h=4, hidden_dims=[8], S=1, N_train=8)
    rng = np.random.default_rng(3)
    x = rng.normal(size=(8, 1, 3))
    batch = Batch(x=x, y=x[:, 0, :] + 1.0, indices=np.arange(8))
    mask = SensorMask.full(1)

    params = init_params(config, np.random.default_rng(0))
    state = AdamState()
    first, _ = value_and_gradients(batch, mask, params, config)
    for _ in range(50):
        _, grads = value_and_gradients(batch, mask, params, config)
        params, state = adam_step(params, grads, state, lr=0.05)
    assert batch_loss(batch, mask, params, config).total <= 0.5 * first.total
