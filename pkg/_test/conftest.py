import numpy as np
import pytest

from synth.scene import GridPlan, SceneConfig


@pytest.fixture
def small_scene() -> SceneConfig:
    return SceneConfig(subcarrier_count=8, rng_seed=7)


@pytest.fixture
def small_plan(small_scene) -> GridPlan:
    return GridPlan.build(small_scene.room, grid_n=2, heights=(1.0,), frames_per_point=3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope='session')
def tiny_matrices():
    """小规模训练/测试幅度矩阵：2×2 网格、两个高度、每点 6 帧、8 个子载波"""
    from dsp.pipeline import preprocess
    from synth.generator import generate_dataset

    scene = SceneConfig(subcarrier_count=8, rng_seed=21)
    plan = GridPlan.build(scene.room, grid_n=2, heights=(1.0, 2.0), frames_per_point=6)
    train = preprocess(generate_dataset(scene, plan, 'train'))
    test = preprocess(generate_dataset(scene, plan, 'test'))
    return train, test
