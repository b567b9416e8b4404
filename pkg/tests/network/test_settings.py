"""
Tests for end-party measurement settings.
"""
import numpy as np
import pytest

from src.linalg.matkernel import IDENTITY2
from src.network.settings import (
    ChainSettings, ChshSettings, DichotomicSetting, StarSettings, chain_settings_from_star,
    euler_frame, sphere_point,
)
from src.utils.errors import ValidationError


def test_dichotomic_setting_unit_norm():
    with pytest.raises(ValidationError):
        DichotomicSetting(np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValidationError):
        DichotomicSetting.from_vector([0, 0, 0])
    setting = DichotomicSetting.from_vector([3, 0, 4])
    assert setting.to_list() == pytest.approx([0.6, 0.0, 0.8])
    observable = setting.observable()
    assert np.allclose(observable @ observable, IDENTITY2)


def test_sphere_point_poles():
    assert np.allclose(sphere_point(0.0, 1.3), [0, 0, 1])
    assert np.allclose(sphere_point(np.pi / 2, 0.0), [1, 0, 0])


def test_symmetric_chain_settings():
    """Test the optimal in-plane family a, a' = (+-sin alpha, 0, cos alpha)."""
    settings = ChainSettings.symmetric()
    s = np.sin(np.pi / 4)
    assert np.allclose(settings.a0.axis, [s, 0, s])
    assert np.allclose(settings.a1.axis, [-s, 0, s])
    assert np.allclose(settings.c0.axis + settings.c1.axis, [0, 0, 2 * s])
    assert set(settings.to_dict()) == {"a0", "a1", "c0", "c1"}


def test_chain_settings_from_angles():
    settings = ChainSettings.from_angles([0, 0, np.pi / 2, 0, np.pi, 0, np.pi / 2, np.pi / 2])
    assert np.allclose(settings.a1.axis, [1, 0, 0])
    assert np.allclose(settings.c1.axis, [0, 1, 0])
    with pytest.raises(ValidationError):
        ChainSettings.from_angles([0.0] * 7)


def test_euler_frame_is_rotation():
    frame = euler_frame(0.3, 1.1, -0.7)
    assert np.allclose(frame.T @ frame, np.eye(3), atol=1e-12)
    assert np.linalg.det(frame) == pytest.approx(1.0)


def test_star_settings_validation():
    with pytest.raises(ValidationError):
        StarSettings.uniform(3, 0.5, [0, 0, 1], [0, 0.6, 0.8])
    with pytest.raises(ValidationError):
        StarSettings((), np.array([0, 0, 1.0]), np.array([1.0, 0, 0]))


def test_star_sum_difference():
    """Test that A_0 + A_1 = 2 cos(alpha) n.sigma and A_0 - A_1 = 2 sin(alpha) n'.sigma."""
    settings = StarSettings.from_frame([0.4, 1.2], 0.3, 0.9, 2.0)
    for party in range(2):
        a0, a1 = settings.observables(party)
        total, difference = settings.sum_difference(party)
        assert np.allclose(a0 + a1, total, atol=1e-12)
        assert np.allclose(a0 - a1, difference, atol=1e-12)
    assert settings.n == 2
    assert settings.to_dict()["alpha"] == [0.4, 1.2]


def test_chain_settings_from_star():
    star = StarSettings.uniform(2, np.pi / 4, [0, 0, 1], [1, 0, 0])
    chain = chain_settings_from_star(star)
    assert np.allclose(chain.a0.axis, star.settings(0)[0].axis)
    assert np.allclose(chain.c1.axis, star.settings(1)[1].axis)
    with pytest.raises(ValidationError):
        chain_settings_from_star(StarSettings.uniform(3, 0.1, [0, 0, 1], [1, 0, 0]))


def test_chsh_settings_dict():
    z = DichotomicSetting(np.array([0.0, 0.0, 1.0]))
    assert ChshSettings(z, z, z, z).to_dict()["b1"] == [0.0, 0.0, 1.0]
