import math

import numpy as np
import pytest
from scipy import stats as sps

from risee.channel import (
    los_components,
    path_loss,
    realization_rng,
    sample_realization,
    sample_setup,
    setup_rng,
    steering_ula,
    steering_uspa,
)
from risee.config import SystemConfig


def test_path_loss_reference_values():
    aG, aF, aD = path_loss(100.0, [1.0], [1.0])
    assert aG == pytest.approx(1e-5, rel=1e-12)
    assert 10 * np.log10(aF[0]) == pytest.approx(-10.6, abs=1e-12)
    assert 10 * np.log10(aD[0]) == pytest.approx(-35.6, abs=1e-12)


@pytest.mark.parametrize("d_g,d_F,d_D", [(0.0, [1.0], [1.0]), (1.0, [-1.0], [1.0]), (1.0, [1.0], [0.0])])
def test_path_loss_rejects_nonpositive_distance(d_g, d_F, d_D):
    with pytest.raises(ValueError):
        path_loss(d_g, d_F, d_D)


def test_steering_ula_examples():
    np.testing.assert_allclose(steering_ula(7, 0.0), np.ones(7))
    np.testing.assert_allclose(steering_ula(1, 1.3), [1.0])
    np.testing.assert_allclose(steering_ula(2, np.pi / 2, 0.5), [1.0, -1.0], atol=1e-15)


def test_steering_uspa_examples():
    np.testing.assert_allclose(steering_uspa(1, 0.3, 0.7), [1.0])
    np.testing.assert_allclose(steering_uspa(9, 0.0, np.pi / 2), np.ones(9), atol=1e-15)
    # x is the fast index: rows of the 2x2 array read [1, exp(j pi)]
    np.testing.assert_allclose(steering_uspa(4, np.pi / 2, np.pi / 2, 0.5), [1, -1, 1, -1], atol=1e-15)
    with pytest.raises(ValueError):
        steering_uspa(5, 0.1, 0.2)


def test_steering_vectors_unit_modulus(rng=np.random.default_rng(3)):
    for _ in range(20):
        a = steering_uspa(36, *rng.uniform(-np.pi, np.pi, 2))
        b = steering_ula(17, rng.uniform(-np.pi, np.pi))
        for x in (a, b):
            np.testing.assert_allclose(np.abs(x), 1.0, atol=1e-14)
            assert x[0] == 1.0


def test_degenerate_disk_and_bs_ris_distance():
    cfg = SystemConfig.from_units(ue_radius=0.0)
    g = sample_setup(cfg, setup_rng(1, 0))
    np.testing.assert_allclose(g.ue_pos, np.tile([100.0, 50.0], (cfg.K, 1)))
    assert np.linalg.norm(g.ris_pos - g.bs_pos) == 100.0
    assert g.alpha_G == pytest.approx(1e-5)


def test_setup_within_disk_and_gains_below_one():
    cfg = SystemConfig.from_units()
    for s in range(20):
        g = sample_setup(cfg, setup_rng(5, s))
        assert np.all(np.linalg.norm(g.ue_pos - np.array([100.0, 50.0]), axis=1) <= 15.0 + 1e-12)
        for a in (g.alpha_G, g.alpha_F, g.alpha_D):
            assert np.all((np.asarray(a) > 0) & (np.asarray(a) < 1))


def test_angle_ranges_and_uniformity():
    cfg = SystemConfig.from_units(K=10)
    n_setups = 10_000  # 1e5 per-UE angle draws
    rng = setup_rng(11, 0)
    aod_bs, aoa_az, aoa_el, ue_az, ue_el = [], [], [], [], []
    for _ in range(n_setups):
        g = sample_setup(cfg, rng)
        aod_bs.append(g.aod_bs)
        aoa_az.append(g.aoa_ris[0])
        aoa_el.append(g.aoa_ris[1])
        ue_az.extend(g.aod_ris[:, 0])
        ue_el.extend(g.aod_ris[:, 1])
    cases = [
        (aod_bs, -np.pi / 2, np.pi / 2),
        (aoa_az, -np.pi / 2, np.pi / 2),
        (aoa_el, 0.0, np.pi / 2),
        (ue_az, -np.pi / 3, np.pi / 3),
        (ue_el, 0.0, np.pi / 2),
    ]
    for x, lo, hi in cases:
        x = np.asarray(x)
        assert x.min() >= lo and x.max() <= hi
        counts, _ = np.histogram(x, bins=20, range=(lo, hi))
        assert sps.chisquare(counts).pvalue > 0.01


def test_los_components_structure():
    cfg = SystemConfig.from_units(N=16, M_max=32)
    g = sample_setup(cfg, setup_rng(2, 0))
    a_M, a_N, G_los, F_los = los_components(g, cfg)
    assert np.linalg.matrix_rank(G_los) == 1
    np.testing.assert_allclose(np.abs(G_los), 1.0, atol=1e-12)
    np.testing.assert_allclose(a_N, steering_uspa(16, *g.aoa_ris))
    np.testing.assert_allclose(F_los[:, 3], steering_uspa(16, *g.aod_ris[3]))


def test_rician_limit():
    cfg = SystemConfig.from_units(N=16, M_max=32, K1=1e6)
    g = sample_setup(cfg, setup_rng(2, 0))
    real = sample_realization(g, cfg, realization_rng(2, 0, 0))
    _, _, G_los, _ = los_components(g, cfg)
    np.testing.assert_allclose(real.G / math.sqrt(g.alpha_G), G_los, atol=1e-2)


def test_second_moments():
    cfg = SystemConfig.from_units(K=4, N=4, M_max=8, K1=0.0)
    g = sample_setup(cfg, setup_rng(3, 0))
    draws = [sample_realization(g, cfg, realization_rng(3, 0, t)) for t in range(10_000)]
    G2 = np.mean([np.abs(r.G) ** 2 for r in draws])
    D2 = np.mean([np.abs(r.D) ** 2 for r in draws], axis=(0, 1))
    assert G2 == pytest.approx(g.alpha_G, rel=0.05)
    np.testing.assert_allclose(D2, g.alpha_D, rtol=0.05)
    # F carries no randomness
    np.testing.assert_array_equal(draws[0].F, draws[1].F)


def test_rician_mixed_moment():
    cfg = SystemConfig.from_units(K=2, N=4, M_max=4, K1=3.5)
    g = sample_setup(cfg, setup_rng(4, 0))
    G = np.array([sample_realization(g, cfg, realization_rng(4, 0, t)).G for t in range(10_000)])
    # E|G_mn|^2 = alpha_G (1 + K1 |LoS|^2)/(K1+1) = alpha_G for unit-modulus LoS
    assert np.mean(np.abs(G) ** 2) == pytest.approx(g.alpha_G, rel=0.05)


def test_realizations_reproducible():
    cfg = SystemConfig.from_units(N=4, M_max=16)
    g = sample_setup(cfg, setup_rng(9, 3))
    a = sample_realization(g, cfg, realization_rng(9, 3, 17))
    b = sample_realization(g, cfg, realization_rng(9, 3, 17))
    np.testing.assert_array_equal(a.D, b.D)
    np.testing.assert_array_equal(a.G, b.G)
