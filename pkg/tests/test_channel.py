import numpy as np
import pytest

from twrelay.channel import (
    ChannelSet,
    SystemConfig,
    draw_channels,
    load_config,
    parse_config,
    relay_rx_covariance,
    trial_seed,
)
from twrelay.exceptions import InvalidInputError


def test_config_validation():
    for bad in (dict(m_r=0), dict(p_t1=0.0), dict(p_nr=-1.0), dict(d2=0.0), dict(d2=1.0), dict(nu=-1)):
        with pytest.raises(InvalidInputError):
            SystemConfig(**bad)
    cfg = SystemConfig(d2=0.3)
    assert cfg.d1 == pytest.approx(0.7)


def test_same_seed_bit_identical():
    cfg = SystemConfig()
    a, b = draw_channels(cfg, 99), draw_channels(cfg, 99)
    for name in ("h1f", "h2f", "h1b", "h2b"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert not np.array_equal(a.h1f, draw_channels(cfg, 100).h1f)


def test_reciprocity_copies_backward_channels():
    ch = draw_channels(SystemConfig(), 1)
    assert np.array_equal(ch.h1b, ch.h1f) and np.array_equal(ch.h2b, ch.h2f)
    ch = draw_channels(SystemConfig(reciprocal=False), 1)
    assert not np.array_equal(ch.h1b, ch.h1f)


def test_sample_variance_matches_path_loss():
    # 10^5 entries per channel via one draw with a large relay array
    cfg = SystemConfig(m_r=100000, d2=0.5, nu=3.0)
    ch = draw_channels(cfg, 2024)
    for h in (ch.h1f, ch.h2f):
        assert np.mean(np.abs(h) ** 2) == pytest.approx(8.0, rel=0.02)
        # circular symmetry: real and imaginary parts carry half each
        assert np.var(h.real) == pytest.approx(4.0, rel=0.02)
        assert abs(np.mean(h * h)) < 0.1


def test_asymmetric_distance_variances():
    cfg = SystemConfig(m_r=100000, d2=0.25, nu=3.0)
    ch = draw_channels(cfg, 5)
    assert np.mean(np.abs(ch.h1f) ** 2) == pytest.approx(0.75 ** -3, rel=0.02)
    assert np.mean(np.abs(ch.h2f) ** 2) == pytest.approx(0.25 ** -3, rel=0.02)


def test_zero_path_loss_gives_unit_variance():
    ch = draw_channels(SystemConfig(m_r=100000, d2=0.1, nu=0.0), 3)
    assert np.mean(np.abs(ch.h1f) ** 2) == pytest.approx(1.0, rel=0.02)
    assert np.mean(np.abs(ch.h2f) ** 2) == pytest.approx(1.0, rel=0.02)


def test_rx_covariance_examples():
    cfg = SystemConfig(m_r=3, p_nr=0.7)
    z = np.zeros(3, complex)
    r = relay_rx_covariance(cfg, ChannelSet(z, z, z, z))
    assert np.allclose(r, 0.7 * np.eye(3))
    cfg = SystemConfig(m_r=1, p_nr=0.1)
    one = ChannelSet(np.array([1.0 + 0j]), np.array([2.0 + 0j]), np.array([1.0 + 0j]), np.array([2.0 + 0j]))
    assert relay_rx_covariance(cfg, one)[0, 0] == pytest.approx(5.1)


def test_rx_covariance_bounded_below_by_noise():
    cfg = SystemConfig(m_r=4, p_nr=0.3)
    for seed in range(20):
        r = relay_rx_covariance(cfg, draw_channels(cfg, seed))
        assert np.allclose(r, r.conj().T)
        assert np.linalg.eigvalsh(r)[0] >= 0.3 - 1e-10


def test_colored_relay_noise():
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    cfg = SystemConfig(m_r=2, relay_noise_cov=cov)
    assert not cfg.white_relay_noise
    z = np.zeros(2, complex)
    assert np.allclose(relay_rx_covariance(cfg, ChannelSet(z, z, z, z)), cov)
    with pytest.raises(InvalidInputError):
        SystemConfig(m_r=3, relay_noise_cov=cov)


def test_trial_seed_is_stable_and_distinct():
    assert trial_seed(7, 1, 2) == trial_seed(7, 1, 2)
    seeds = {trial_seed(7, i, t) for i in range(5) for t in range(50)}
    assert len(seeds) == 250


def test_parse_config(tmp_path):
    text = "# relay setup\nm_r = 4\np_nr=0.5  # noisy\nreciprocal = no\n\n"
    cfg = parse_config(text)
    assert (cfg.m_r, cfg.p_nr, cfg.reciprocal) == (4, 0.5, False)
    path = tmp_path / "cfg.txt"
    path.write_text("d2=0.2\n")
    assert load_config(path, base=cfg).d2 == 0.2
    assert load_config(path, base=cfg).m_r == 4
    for bad in ("m_r 4", "bogus=1", "reciprocal=maybe", "m_r=2.5", "p_t1=abc"):
        with pytest.raises(InvalidInputError):
            parse_config(bad)
