import struct
import zlib

import numpy as np
import pytest

from csi_core.types import CsiFrame
from sensornet.wire import (
    MAX_SUBCARRIERS,
    CorruptionError,
    FrameSizeError,
    ProtocolError,
    TruncationError,
    decode_frame,
    encode_frame,
    encode_with_status,
    end_marker,
    frame_length,
    is_end_marker,
)


def _golden_zero_frame() -> bytes:
    body = b'CIUW' + struct.pack('<H', 1) + struct.pack('<H', 0) + struct.pack('<I', 0)
    body += struct.pack('<Q', 0) + struct.pack('<h', 0) + struct.pack('<H', 1) + b'\x00' * 4
    return body + struct.pack('<I', zlib.crc32(body))


def _zero_frame() -> CsiFrame:
    return CsiFrame(sensor_id=0, seq=0, timestamp_us=0, agc_gain_db=0.0, subcarriers=np.zeros(1))


def test_zero_frame_matches_golden_vector():
    golden = _golden_zero_frame()
    assert len(golden) == frame_length(1) == 32
    assert encode_frame(_zero_frame()) == golden


def test_golden_vector_decodes_to_zero_frame():
    frame = decode_frame(_golden_zero_frame())
    assert frame.same_values(_zero_frame())


def test_every_single_byte_corruption_is_rejected():
    golden = _golden_zero_frame()
    for position in range(len(golden)):
        corrupted = bytearray(golden)
        corrupted[position] ^= 0xFF
        with pytest.raises(CorruptionError):
            decode_frame(bytes(corrupted))


def test_roundtrip_within_quantization():
    rng = np.random.default_rng(0)
    values = rng.uniform(-50, 50, size=50) + 1j * rng.uniform(-50, 50, size=50)
    frame = CsiFrame(sensor_id=2, seq=123456, timestamp_us=9_876_543_210, agc_gain_db=-12.34, subcarriers=values)
    decoded = decode_frame(encode_frame(frame))
    assert (decoded.sensor_id, decoded.seq, decoded.timestamp_us) == (2, 123456, 9_876_543_210)
    assert decoded.agc_gain_db == pytest.approx(-12.34)
    assert np.max(np.abs(decoded.subcarriers.real - values.real)) <= 2 ** -9
    assert np.max(np.abs(decoded.subcarriers.imag - values.imag)) <= 2 ** -9


def test_saturation_is_reported():
    frame = CsiFrame(sensor_id=0, seq=0, timestamp_us=0, agc_gain_db=0.0, subcarriers=np.array([500.0 + 0j]))
    encoded = encode_with_status(frame)
    assert encoded.saturated
    assert decode_frame(encoded.data).subcarriers[0].real == pytest.approx(32767 / 256)


def test_empty_input_is_truncated():
    with pytest.raises(TruncationError):
        decode_frame(b'')


def _with_crc(body: bytes) -> bytes:
    return body + struct.pack('<I', zlib.crc32(body))


def test_wrong_magic_is_protocol_error():
    body = bytearray(_golden_zero_frame()[:-4])
    body[:4] = b'XXXX'
    with pytest.raises(ProtocolError):
        decode_frame(_with_crc(bytes(body)))


def test_wrong_version_is_protocol_error():
    body = bytearray(_golden_zero_frame()[:-4])
    body[4:6] = struct.pack('<H', 9)
    with pytest.raises(ProtocolError):
        decode_frame(_with_crc(bytes(body)))


def test_length_mismatch_is_truncation():
    body = _golden_zero_frame()[:-4] + b'\x00' * 4
    with pytest.raises(TruncationError):
        decode_frame(_with_crc(body))


def test_oversized_frames_rejected():
    too_many = CsiFrame(0, 0, 0, 0.0, np.zeros(MAX_SUBCARRIERS + 1))
    with pytest.raises(FrameSizeError):
        encode_frame(too_many)
    body = bytearray(_golden_zero_frame()[:-4])
    body[22:24] = struct.pack('<H', MAX_SUBCARRIERS + 1)
    with pytest.raises(FrameSizeError):
        decode_frame(_with_crc(bytes(body)))


def test_end_marker():
    frame = decode_frame(end_marker(sensor_id=3, generated=100, timestamp_us=5))
    assert is_end_marker(frame)
    assert (frame.sensor_id, frame.seq) == (3, 100)


def test_random_frames_roundtrip_within_quantization():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        n_sub = int(rng.integers(1, 65))
        values = rng.uniform(-120, 120, size=n_sub) + 1j * rng.uniform(-120, 120, size=n_sub)
        frame = CsiFrame(
            sensor_id=int(rng.integers(0, 2 ** 16)),
            seq=int(rng.integers(0, 2 ** 32)),
            timestamp_us=int(rng.integers(0, 2 ** 63)),
            agc_gain_db=float(rng.uniform(-30, 30)),
            subcarriers=values,
        )
        encoded = encode_with_status(frame)
        assert not encoded.saturated
        decoded = decode_frame(encoded.data)
        assert (decoded.sensor_id, decoded.seq, decoded.timestamp_us) == (frame.sensor_id, frame.seq, frame.timestamp_us)
        assert abs(decoded.agc_gain_db - frame.agc_gain_db) <= 0.005 + 1e-9
        assert np.max(np.abs(decoded.subcarriers.real - values.real)) <= 2 ** -9
        assert np.max(np.abs(decoded.subcarriers.imag - values.imag)) <= 2 ** -9
