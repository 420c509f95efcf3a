import math

import numpy as np
import pytest

from csi_core.errors import InputError, InputShapeError
from sis.config import SisConfig
from sis.losses import loss_pred, loss_sam, loss_sor, loss_terms, loss_total
from sis.masks import SensorMask
from sis.model import (
    extract_features,
    forward,
    fuse_batch,
    fuse_prediction,
    fusion_coefficients,
    mix_sensors,
    predict,
    regress_positions,
    resolve_head,
    select_head,
)
from sis.params import SAMPLE_WEIGHTS, init_params, params_from_tensors, zero_params


def _tiny_config(**overrides) -> SisConfig:
    values = dict(f=2, f_h=2, hidden_dims=[2], S=1, N_train=1, sensor_context=False)
    values.update(overrides)
    return SisConfig(**values)


def _fixed_params(config: SisConfig):
    tensors = {
        'extractor.0.weight': np.array([[0.5, -1.0], [2.0, 0.25]]),
        'extractor.0.bias': np.array([0.1, -0.2]),
        'extractor.1.weight': np.array([[1.0, 0.5], [-0.5, 2.0]]),
        'extractor.1.bias': np.array([0.0, 0.3]),
        'regressor.weight': np.array([[[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]]]),
        'regressor.bias': np.array([[0.5, 0.0, 0.0]]),
        'sensor_weights': np.zeros(config.S),
        'sample_weights': np.ones(config.N_train),
    }
    return params_from_tensors(config, tensors)


def test_mask_labels():
    mask = SensorMask.from_label('1-3', 3)
    assert mask.active == (True, False, True)
    assert mask.label == '1-3'
    assert SensorMask.from_label('all', 3) == SensorMask.full(3)
    with pytest.raises(InputError):
        SensorMask((False, False))
    with pytest.raises(InputError):
        SensorMask.from_label('4', 3)


def test_zero_params_give_zero_features():
    config = SisConfig(f=4, f_h=3, hidden_dims=[5], S=2)
    features = extract_features(np.ones((2, 4)), SensorMask.full(2), zero_params(config))
    assert features.shape == (2, 3)
    assert np.all(features == 0.0)


def test_inactive_sensor_rows_are_zero():
    config = SisConfig(f=4, f_h=3, hidden_dims=[5], S=3)
    params = init_params(config, np.random.default_rng(0))
    mask = SensorMask.from_label('2', 3)
    features = extract_features(np.random.default_rng(1).normal(size=(3, 4)), mask, params)
    assert np.all(features[0] == 0.0) and np.all(features[2] == 0.0)
    assert np.any(features[1] != 0.0)


def test_forward_matches_hand_computation():
    config = _tiny_config()
    params = _fixed_params(config)
    x = np.array([1.0, 0.0])

    softplus = lambda z: math.log1p(math.exp(z))
    hidden = [softplus(1.0 * 0.5 + 0.1), softplus(1.0 * -1.0 - 0.2)]
    feature = [
        hidden[0] * 1.0 + hidden[1] * -0.5 + 0.0,
        hidden[0] * 0.5 + hidden[1] * 2.0 + 0.3,
    ]
    expected = [feature[0] + 0.5, feature[1], 2.0 * feature[0] - feature[1]]

    mask = SensorMask.full(1)
    features = extract_features(x[None, :], mask, params)
    np.testing.assert_allclose(features[0], feature, rtol=1e-12)
    np.testing.assert_allclose(regress_positions(features, params)[0], expected, rtol=1e-12)
    np.testing.assert_allclose(predict(x[None, :], mask, params)[0], expected, rtol=1e-12)


def test_regressor_bias_only():
    config = SisConfig(f=2, f_h=4, hidden_dims=[3], S=2)
    params = zero_params(config)
    params = params.replace({'regressor.bias': np.array([[1.0, 2.0, 3.0]])})
    rows = regress_positions(np.random.default_rng(0).normal(size=(2, 4)), params)
    np.testing.assert_array_equal(rows, [[1.0, 2.0, 3.0]] * 2)
    np.testing.assert_array_equal(regress_positions(np.zeros((2, 4)), params), [[1.0, 2.0, 3.0]] * 2)


def test_shape_mismatch():
    config = SisConfig(f=4, f_h=3, hidden_dims=[5], S=2)
    params = zero_params(config)
    with pytest.raises(InputShapeError):
        extract_features(np.ones((2, 5)), SensorMask.full(2), params)
    with pytest.raises(InputShapeError):
        extract_features(np.ones((3, 4)), SensorMask.full(3), params)


def test_fusion_single_active_sensor():
    rows = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
    mask = SensorMask.from_label('2', 3)
    fused = fuse_prediction(rows, mask, np.array([5.0, -1.0, 3.0]))
    assert fused.as_array().tolist() == [4.0, 5.0, 6.0]


def test_fusion_uniform_weights_is_mean():
    rows = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
    fused = fuse_prediction(rows, SensorMask.full(3), np.full(3, 0.7))
    np.testing.assert_allclose(fused.as_array(), rows.mean(axis=0))


def test_fusion_softmax_weights():
    rows = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    fused = fuse_prediction(rows, SensorMask.full(3), np.array([math.log(3.0), 0.0, 0.0]))
    np.testing.assert_allclose(fused.as_array(), [0.6, 0.2, 0.2])


def test_fusion_coefficients_ignore_inactive():
    coefficients = fusion_coefficients(SensorMask.from_label('1-3', 3), np.array([0.0, 100.0, 0.0]))
    np.testing.assert_allclose(coefficients, [0.5, 0.0, 0.5])


def test_loss_pred_examples():
    assert loss_pred(np.zeros((2, 1, 3)), np.zeros((2, 3))) == 0.0
    assert loss_pred(np.array([[[1.0, 0, 0]]]), np.zeros((1, 3))) == pytest.approx(1.0)
    pred = np.array([[[1.0, 0, 0]], [[2.0, 0, 0]]])
    assert loss_pred(pred, np.zeros((2, 3))) == pytest.approx(2.5)


def test_loss_pred_ignores_inactive_sensors():
    pred = np.array([[[1.0, 0, 0], [100.0, 0, 0]]])
    assert loss_pred(pred, np.zeros((1, 3)), SensorMask.from_label('1', 2)) == pytest.approx(1.0)


def test_loss_sor_examples():
    assert loss_sor(np.zeros(3), 0.01) == 0.0
    assert loss_sor(np.array([0.5, -0.5, 0.0]), 0.01) == pytest.approx(0.01)
    assert loss_sor(np.array([3.0, -2.0, 1.0]), 0.0) == 0.0


def test_loss_sam_examples():
    assert loss_sam(np.ones((3, 2, 3)), np.zeros((3, 3)), np.zeros(3)) == 0.0
    assert loss_sam(np.array([[[1.0, 0, 0]]]), np.zeros((1, 3)), np.array([2.0])) == pytest.approx(4.0)
    with pytest.raises(InputError):
        loss_sam(np.ones((1, 1, 3)), np.zeros((1, 3)), np.array([-1.0]))
    with pytest.raises(InputShapeError):
        loss_sam(np.ones((2, 1, 3)), np.zeros((2, 3)), np.ones(3))


def test_loss_sam_unit_weights_scale_loss_pred():
    rng = np.random.default_rng(3)
    pred = rng.normal(size=(5, 3, 3))
    truth = rng.normal(size=(5, 3))
    assert loss_sam(pred, truth, np.ones(5)) == pytest.approx(5 * loss_pred(pred, truth), rel=1e-12)


def test_loss_total_examples():
    config = SisConfig(f=2, f_h=2, hidden_dims=[2], S=2, N_train=2)
    params = zero_params(config)
    truth = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 0.0]])
    perfect = np.repeat(truth[:, None, :], 2, axis=1)
    assert loss_total(perfect, truth, params, config) == 0.0

    rng = np.random.default_rng(8)
    params = params.replace({'sensor_weights': rng.normal(size=2), SAMPLE_WEIGHTS: rng.uniform(0.5, 1.5, size=2)})
    pred = rng.normal(size=(2, 2, 3))
    terms = loss_terms(pred, truth, params, config)
    expected = (loss_pred(pred, truth) + loss_sor(params.w_s, config.lambda_s)
                + config.lambda_v * loss_sam(pred, truth, params.v))
    assert terms.total == pytest.approx(expected, abs=1e-12)
    assert terms.fuse == 0.0


def test_loss_total_weighted_sum():
    config = SisConfig(f=2, f_h=2, hidden_dims=[2], S=1, N_train=1, lambda_s=0.01, lambda_v=0.1)
    params = zero_params(config).replace({'sensor_weights': np.array([1.0])})
    pred = np.array([[[math.sqrt(0.5), 0.0, 0.0]]])
    terms = loss_terms(pred, np.zeros((1, 3)), params, config, sample_weights=np.array([math.sqrt(0.4)]))
    assert (terms.pred, terms.sor, terms.sam) == pytest.approx((0.5, 0.01, 0.2))
    assert terms.total == pytest.approx(0.53)


def _context_params(seed=0, **overrides):
    values = dict(f=4, f_h=3, hidden_dims=[5], S=3, heads=['3@1.00', '1-3@0.50', '1-3@1.00', '1-2-3@1.00'])
    values.update(overrides)
    config = SisConfig(**values)
    rng = np.random.default_rng(seed)
    tensors = init_params(config, rng).named_tensors()
    for name in tensors:
        if name.endswith('.bias'):
            tensors[name] = rng.normal(0.0, 0.2, size=tensors[name].shape)
    return config, params_from_tensors(config, tensors)


def test_mix_sensors_matches_loop():
    _, params = _context_params()
    rng = np.random.default_rng(4)
    mask = SensorMask.from_label('1-3', 3)
    features = rng.normal(size=(2, 3, 3)) * mask.as_array()[None, :, None]
    mixed, _ = mix_sensors(features, mask, params)

    ctx = params.context
    softplus = lambda z: np.logaddexp(0.0, z)
    for b in range(2):
        shared = sum(features[b, t] @ ctx.slot_weight[t] + ctx.slot_bias[t] for t in (0, 2))
        for s in range(3):
            if s == 1:
                assert np.all(mixed[b, s] == 0.0)
                continue
            expected = softplus(features[b, s] @ ctx.self_weight + shared + ctx.bias)
            np.testing.assert_allclose(mixed[b, s], expected, rtol=1e-12)


def test_context_lets_sensors_see_each_other():
    _, params = _context_params()
    rng = np.random.default_rng(5)
    x = rng.normal(size=(1, 3, 4))
    changed = x.copy()
    changed[0, 2] += 1.0

    full = SensorMask.full(3)
    before = forward(x, full, params).per_sensor
    after = forward(changed, full, params).per_sensor
    assert not np.allclose(before[0, 0], after[0, 0])

    # 未激活传感器的输入不影响任何输出
    without_third = SensorMask.from_label('1-2', 3)
    np.testing.assert_array_equal(forward(x, without_third, params).per_sensor,
                                  forward(changed, without_third, params).per_sensor)


def test_without_context_sensors_are_independent():
    _, params = _context_params(sensor_context=False)
    x = np.random.default_rng(6).normal(size=(1, 3, 4))
    changed = x.copy()
    changed[0, 2] += 1.0
    full = SensorMask.full(3)
    np.testing.assert_array_equal(forward(x, full, params).per_sensor[0, :2],
                                  forward(changed, full, params).per_sensor[0, :2])
    assert params.context is None


def test_head_selection_prefers_same_mask_then_full():
    heads = ('3@1.00', '1-3@0.50', '1-3@1.00', '1-2-3@1.00')
    assert select_head(heads, SensorMask.from_label('1-3', 3)) == 2
    assert select_head(heads, SensorMask.from_label('3', 3)) == 0
    # 没有专属头的组合落到全传感器头
    assert select_head(heads, SensorMask.from_label('2', 3)) == 3
    assert select_head(('all',), SensorMask.from_label('2', 3)) == 0
    assert select_head(('1@1.00', '3@1.00'), SensorMask.from_label('2', 3)) == 0


def test_resolve_head_by_name_and_unknown():
    _, params = _context_params()
    mask = SensorMask.full(3)
    assert resolve_head(params, mask, '1-3@0.50') == 1
    assert resolve_head(params, mask) == 3
    with pytest.raises(InputError):
        resolve_head(params, mask, '2@1.00')
    with pytest.raises(InputError):
        resolve_head(params, mask, 7)


def test_heads_give_different_predictions():
    _, params = _context_params()
    x = np.random.default_rng(7).normal(size=(2, 3, 4))
    mask = SensorMask.from_label('1-3', 3)
    assert not np.allclose(predict(x, mask, params, '1-3@0.50'), predict(x, mask, params, '1-3@1.00'))
    np.testing.assert_array_equal(predict(x, mask, params), predict(x, mask, params, '1-3@1.00'))


def test_fusion_is_invariant_to_shifting_sensor_weights():
    rng = np.random.default_rng(11)
    per_sensor = rng.normal(size=(4, 3, 3))
    w_s = rng.normal(size=3)
    for label in ('1', '1-3', '1-2-3'):
        mask = SensorMask.from_label(label, 3)
        for shift in (-5.0, 0.3, 12.0):
            np.testing.assert_allclose(fuse_batch(per_sensor, mask, w_s + shift),
                                       fuse_batch(per_sensor, mask, w_s), rtol=1e-12, atol=1e-12)
