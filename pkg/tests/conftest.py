import numpy as np
import pytest

from dqdmp import DualQuaternion, Pose, dq_from_pose


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


def random_unit_quat(rng) -> np.ndarray:
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def random_rotvec(rng, max_angle: float) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return axis * rng.uniform(0.0, max_angle)


def random_unit_dq(rng, pos_scale: float = 2.0) -> DualQuaternion:
    return dq_from_pose(Pose(rng.uniform(-pos_scale, pos_scale, size=3),
                             random_unit_quat(rng)))
