import numpy as np
import pytest

from csi_core.errors import NumericError
from sis.config import SisConfig
from sis.gradients import Batch, batch_loss, gradients, value_and_gradients
from sis.masks import SensorMask
from sis.params import SENSOR_WEIGHTS, init_params, params_from_tensors


def _random_problem(activation='softplus', lambda_fuse=0.0, n=5, seed=0, sensor_context=True, heads=('all',)):
    config = SisConfig(f=4, f_h=3, hidden_dims=[5], S=2, N_train=n, activation=activation,
                       lambda_s=0.05, lambda_v=0.3, lambda_fuse=lambda_fuse,
                       sensor_context=sensor_context, heads=list(heads))
    rng = np.random.default_rng(seed)
    params = init_params(config, rng)
    tensors = params.named_tensors()
    for name in tensors:
        if name.endswith('.bias'):
            tensors[name] = rng.normal(0.0, 0.1, size=tensors[name].shape)
    tensors[SENSOR_WEIGHTS] = np.array([0.4, -0.3])
    tensors['sample_weights'] = rng.uniform(0.5, 1.5, size=n)
    params = params_from_tensors(config, tensors)
    batch = Batch(x=rng.normal(size=(n, 2, 4)), y=rng.normal(size=(n, 3)), indices=np.arange(n))
    return config, params, batch


def _finite_difference(batch, mask, params, config, step=1e-5, head=0):
    numeric = {}
    tensors = params.named_tensors()
    for name, value in tensors.items():
        grad = np.zeros_like(value)
        for index in np.ndindex(value.shape):
            plus, minus = value.copy(), value.copy()
            plus[index] += step
            minus[index] -= step
            loss_plus = batch_loss(batch, mask, params.replace({name: plus}), config, head).total
            loss_minus = batch_loss(batch, mask, params.replace({name: minus}), config, head).total
            grad[index] = (loss_plus - loss_minus) / (2 * step)
        numeric[name] = grad
    return numeric


@pytest.mark.parametrize('activation', ['softplus', 'tanh', 'elu'])
def test_gradients_match_finite_differences(activation):
    config, params, batch = _random_problem(activation)
    mask = SensorMask.full(2)
    analytic = gradients(batch, mask, params, config)
    numeric = _finite_difference(batch, mask, params, config)
    for name in numeric:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-4, atol=1e-7, err_msg=name)


def test_gradients_with_fusion_term_and_partial_batch():
    config, params, _ = _random_problem(lambda_fuse=0.5, n=6, seed=4)
    rng = np.random.default_rng(9)
    batch = Batch(x=rng.normal(size=(4, 2, 4)), y=rng.normal(size=(4, 3)), indices=np.array([0, 2, 2, 5]))
    mask = SensorMask.full(2)
    analytic = gradients(batch, mask, params, config)
    numeric = _finite_difference(batch, mask, params, config)
    for name in numeric:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-4, atol=1e-7, err_msg=name)
    assert analytic['sample_weights'][1] == 0.0


def test_inactive_sensor_input_has_no_effect():
    config, params, batch = _random_problem()
    mask = SensorMask.from_label('1', 2)
    changed = Batch(x=batch.x.copy(), y=batch.y, indices=batch.indices)
    changed.x[:, 1, :] += 10.0
    a = gradients(batch, mask, params, config)
    b = gradients(changed, mask, params, config)
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])


def test_masked_gradients_match_finite_differences():
    config, params, batch = _random_problem(lambda_fuse=0.2, seed=2)
    mask = SensorMask.from_label('2', 2)
    analytic = gradients(batch, mask, params, config)
    numeric = _finite_difference(batch, mask, params, config)
    for name in numeric:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-4, atol=1e-7, err_msg=name)


def test_zero_loss_gradients_vanish_except_l1():
    config = SisConfig(f=2, f_h=2, hidden_dims=[2], S=2, N_train=3, lambda_s=0.01)
    params = init_params(config, np.random.default_rng(0))
    truth = np.array([1.0, -2.0, 0.5])
    params = params.replace({
        'regressor.weight': np.zeros((1, 2, 3)),
        'regressor.bias': truth[None, :],
        SENSOR_WEIGHTS: np.array([0.3, 0.0]),
    })
    batch = Batch(x=np.random.default_rng(1).normal(size=(3, 2, 2)), y=np.tile(truth, (3, 1)), indices=np.arange(3))
    terms, grads = value_and_gradients(batch, SensorMask.full(2), params, config)
    assert terms.pred == 0.0 and terms.sam == 0.0
    for name, grad in grads.items():
        if name == SENSOR_WEIGHTS:
            np.testing.assert_allclose(grad, [0.01, 0.0])
        else:
            assert np.all(grad == 0.0), name


def test_non_finite_input_names_tensor():
    config, params, batch = _random_problem()
    batch.x[0, 0, 0] = np.inf
    with pytest.raises(NumericError) as info:
        gradients(batch, SensorMask.full(2), params, config)
    assert info.value.tensor


def test_per_sensor_model_gradients_match_finite_differences():
    config, params, batch = _random_problem(sensor_context=False, seed=6)
    mask = SensorMask.from_label('1', 2)
    analytic = gradients(batch, mask, params, config)
    numeric = _finite_difference(batch, mask, params, config)
    assert not any(name.startswith('context.') for name in analytic)
    for name in numeric:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-4, atol=1e-7, err_msg=name)


def test_only_selected_head_receives_gradient():
    config, params, batch = _random_problem(heads=('1@1.00', '1-2@1.00'), seed=7)
    mask = SensorMask.full(2)
    analytic = gradients(batch, mask, params, config, head=1)
    numeric = _finite_difference(batch, mask, params, config, head=1)
    for name in numeric:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=1e-4, atol=1e-7, err_msg=name)
    assert np.all(analytic['regressor.weight'][0] == 0.0)
    assert np.all(analytic['regressor.bias'][0] == 0.0)
    assert np.any(analytic['regressor.weight'][1] != 0.0)


def test_context_slot_gradients_vanish_for_inactive_sensor():
    config, params, batch = _random_problem(seed=8)
    grads = gradients(batch, SensorMask.from_label('2', 2), params, config)
    assert np.all(grads['context.slot.weight'][0] == 0.0)
    assert np.all(grads['context.slot.bias'][0] == 0.0)
    assert np.any(grads['context.slot.weight'][1] != 0.0)
