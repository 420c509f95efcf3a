import numpy as np
import pytest

from csi_core.errors import InputError, InputShapeError
from sis.checkpoint import VERSION, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from sis.config import SisConfig
from sis.masks import SensorMask
from sis.model import predict
from sis.params import Scaler, init_params, params_from_tensors


@pytest.fixture
def model():
    config = SisConfig(f=4, f_h=3, hidden_dims=[6, 5], S=3, N_train=7, activation='tanh', lambda_fuse=0.25,
                       heads=['1@1.00', '1-2-3@0.50', '1-2-3@1.00'])
    params = init_params(config, np.random.default_rng(5))
    rng = np.random.default_rng(6)
    params.scaler = Scaler.fit(rng.normal(size=(7, 3, 4)), rng.normal(size=(7, 3)))
    return params, config


def test_roundtrip_is_exact(model):
    params, config = model
    restored, restored_config = decode_checkpoint(encode_checkpoint(params, config))
    assert restored_config == config
    for name, value in params.named_tensors().items():
        np.testing.assert_array_equal(restored.named_tensors()[name], value)
    np.testing.assert_array_equal(restored.scaler.x_std, params.scaler.x_std)

    x = np.random.default_rng(0).normal(size=(2, 3, 4))
    mask = SensorMask.full(3)
    assert restored.heads == params.heads
    for head in config.heads:
        np.testing.assert_array_equal(predict(x, mask, restored, head), predict(x, mask, params, head))


def test_save_and_load(tmp_path, model):
    params, config = model
    path = tmp_path / 'nested' / 'model.sism'
    save_checkpoint(str(path), params, config)
    assert path.read_bytes()[:4] == b'SISM'
    restored, _ = load_checkpoint(str(path))
    np.testing.assert_array_equal(restored.w_s, params.w_s)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(str(tmp_path / 'absent.sism'))


def test_bad_magic(model):
    data = bytearray(encode_checkpoint(*model))
    data[:4] = b'XXXX'
    with pytest.raises(InputError):
        decode_checkpoint(bytes(data))


def test_truncated_and_trailing(model):
    data = encode_checkpoint(*model)
    with pytest.raises(InputError):
        decode_checkpoint(data[:-1])
    with pytest.raises(InputError):
        decode_checkpoint(data + b'\x00')


def test_shape_mismatch_rejected():
    config = SisConfig(f=4, f_h=3, hidden_dims=[5], S=2, N_train=2)
    tensors = init_params(config, np.random.default_rng(0)).named_tensors()
    tensors['regressor.weight'] = np.zeros((4, 3))
    with pytest.raises(InputShapeError):
        params_from_tensors(config, tensors)


def test_per_sensor_model_roundtrip():
    config = SisConfig(f=4, f_h=3, hidden_dims=[5], S=2, N_train=3, sensor_context=False)
    params = init_params(config, np.random.default_rng(1))
    restored, restored_config = decode_checkpoint(encode_checkpoint(params, config))
    assert restored_config.sensor_context is False
    assert restored.context is None
    assert set(restored.named_tensors()) == set(params.named_tensors())


def test_older_version_rejected(model):
    data = bytearray(encode_checkpoint(*model))
    data[4:6] = (VERSION - 1).to_bytes(2, 'little')
    with pytest.raises(InputError):
        decode_checkpoint(bytes(data))
