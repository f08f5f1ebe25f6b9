"""Setup geometry, path losses, array responses and channel draws.

Conventions: the BS carries a ULA, the RIS a square planar array of
``N = X * X`` elements indexed ``n = y * X + x`` (x fastest). Azimuth
angles are called ``varphi`` and elevation angles ``phi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

# stream ids for SeedSequence spawn keys
_SETUP_STREAM = 0
_REALIZATION_STREAM = 1
_INIT_STREAM = 2


def setup_rng(seed: int, setup_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SETUP_STREAM, setup_index)))


def realization_rng(seed: int, setup_index: int, t: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_REALIZATION_STREAM, setup_index, t))
    return np.random.default_rng(ss)


def init_rng(seed: int, setup_index: int, tag: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_INIT_STREAM, setup_index, tag))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class SetupGeometry:
    bs_pos: np.ndarray
    ris_pos: np.ndarray
    ue_pos: np.ndarray  # (K, 2)
    aod_bs: float
    aoa_ris: tuple[float, float]  # (azimuth, elevation)
    aod_ris: np.ndarray  # (K, 2) columns (azimuth, elevation)
    alpha_G: float
    alpha_F: np.ndarray
    alpha_D: np.ndarray

    @property
    def K(self) -> int:
        return self.ue_pos.shape[0]


@dataclass(frozen=True)
class ChannelRealization:
    D: np.ndarray  # (M_max, K)
    G: np.ndarray  # (M_max, N)
    F: np.ndarray  # (N, K)


def path_loss(d_g, d_F, d_D):
    """Large-scale gains (linear) of the BS-RIS, RIS-UE and BS-UE links.

    alpha_G = -25 log10(d_g) dB, alpha_F = -10.6 - 20 log10(d_F) dB and
    alpha_D = -35.6 - 40 log10(d_D) dB.
    """
    d_F = np.asarray(d_F, dtype=float)
    d_D = np.asarray(d_D, dtype=float)
    if d_g <= 0 or np.any(d_F <= 0) or np.any(d_D <= 0):
        raise ValueError("distances must be positive")
    alpha_G = 10.0 ** (-25.0 * math.log10(d_g) / 10.0)
    alpha_F = 10.0 ** ((-10.6 - 20.0 * np.log10(d_F)) / 10.0)
    alpha_D = 10.0 ** ((-35.6 - 40.0 * np.log10(d_D)) / 10.0)
    return alpha_G, alpha_F, alpha_D


def steering_ula(M: int, varphi: float, spacing_ratio: float = 0.5) -> np.ndarray:
    x = np.arange(M)
    return np.exp(2j * np.pi * spacing_ratio * x * math.sin(varphi))


def steering_uspa(N: int, varphi: float, phi: float, spacing_ratio: float = 0.5) -> np.ndarray:
    side = math.isqrt(N)
    if side * side != N:
        raise ValueError(f"N={N} is not a perfect square")
    x = np.tile(np.arange(side), side)
    y = np.repeat(np.arange(side), side)
    phase = x * math.sin(phi) * math.sin(varphi) + y * math.cos(phi)
    return np.exp(2j * np.pi * spacing_ratio * phase)


def _uniform_disk(rng: np.random.Generator, n: int, center, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    ang = rng.uniform(0.0, 2 * np.pi, n)
    return np.column_stack((center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)))


def sample_setup(config: SystemConfig, rng: np.random.Generator) -> SetupGeometry:
    K = config.K
    bs = np.asarray(config.bs_pos, dtype=float)
    ris = np.asarray(config.ris_pos, dtype=float)
    ue = _uniform_disk(rng, K, config.ue_center, config.ue_radius)

    aod_bs = rng.uniform(-np.pi / 2, np.pi / 2)
    aoa_ris = (rng.uniform(-np.pi / 2, np.pi / 2), rng.uniform(0.0, np.pi / 2))
    aod_ris = np.column_stack(
        (rng.uniform(-np.pi / 3, np.pi / 3, K), rng.uniform(0.0, np.pi / 2, K))
    )

    d_g = float(np.linalg.norm(ris - bs))
    d_F = np.linalg.norm(ue - ris, axis=1)
    d_D = np.linalg.norm(ue - bs, axis=1)
    alpha_G, alpha_F, alpha_D = path_loss(d_g, d_F, d_D)
    return SetupGeometry(
        bs_pos=bs,
        ris_pos=ris,
        ue_pos=ue,
        aod_bs=float(aod_bs),
        aoa_ris=(float(aoa_ris[0]), float(aoa_ris[1])),
        aod_ris=aod_ris,
        alpha_G=alpha_G,
        alpha_F=alpha_F,
        alpha_D=alpha_D,
    )


def los_components(geometry: SetupGeometry, config: SystemConfig):
    """Return ``(a_M, a_N, G_LoS, F_LoS)`` with ``G_LoS = a_M a_N^H``."""
    d = config.spacing_ratio
    a_M = steering_ula(config.M_max, geometry.aod_bs, d)
    a_N = steering_uspa(config.N, *geometry.aoa_ris, spacing_ratio=d)
    G_los = np.outer(a_M, a_N.conj())
    F_los = np.column_stack(
        [steering_uspa(config.N, az, el, spacing_ratio=d) for az, el in geometry.aod_ris]
    )
    return a_M, a_N, G_los, F_los


def ris_ue_channel(geometry: SetupGeometry, config: SystemConfig) -> np.ndarray:
    """Deterministic RIS-UE channel F = F_LoS diag(alpha_F)^(1/2)."""
    _, _, _, F_los = los_components(geometry, config)
    return F_los * np.sqrt(geometry.alpha_F)[None, :]


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def sample_realization(
    geometry: SetupGeometry, config: SystemConfig, rng: np.random.Generator, los=None
) -> ChannelRealization:
    """Draw one realization of D (Rayleigh), G (Rician) and F (LoS).

    ``los`` may carry a precomputed :func:`los_components` tuple.
    """
    if los is None:
        los = los_components(geometry, config)
    _, _, G_los, F_los = los
    M, N, K = config.M_max, config.N, config.K
    D = _cn(rng, (M, K)) * np.sqrt(geometry.alpha_D)[None, :]
    K1 = config.K1
    G = math.sqrt(geometry.alpha_G / (K1 + 1.0)) * _cn(rng, (M, N))
    if K1 > 0:
        G = G + math.sqrt(geometry.alpha_G * K1 / (K1 + 1.0)) * G_los
    F = F_los * np.sqrt(geometry.alpha_F)[None, :]
    return ChannelRealization(D=D, G=G, F=F)
