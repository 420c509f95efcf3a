# utils/rng.py
"""所有随机性都从一个 --seed 派生：按名字与索引生成独立子流"""
import hashlib

import numpy as np


def _name_key(name: str | int) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name)
    digest = hashlib.sha256(str(name).encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')


def substream(seed: int, *names: str | int) -> np.random.Generator:
    """(seed, 名字, 索引...) -> 确定性的独立随机数发生器"""
    entropy = [int(seed) & 0xFFFFFFFF] + [_name_key(n) for n in names]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def child_seed(seed: int, *names: str | int) -> int:
    return int(substream(seed, *names).integers(0, 2**32 - 1))
