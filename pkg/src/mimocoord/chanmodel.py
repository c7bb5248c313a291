"""Seeded random channel generation.

Two ensembles: unit-variance i.i.d. Rayleigh channels for canonical
benchmarking, and a dense multi-cell drop with distance pathloss, log-normal
shadowing, and (optionally Rician) small-scale fading. Every generator is a
pure function of (parameters, seed).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BelowMinDistance, DimensionMismatch, RejectionBudgetExceeded
from .netmodel import ChannelSet, NetworkConfig

SPEED_OF_LIGHT = 299_792_458.0
REJECTION_BUDGET = 1000


@dataclass(frozen=True)
class DeploymentSpec:
    """Dense-deployment geometry and propagation parameters.

    Cells sit on a square grid (``cells`` must be a perfect square) with
    inter-site distance ``2 * cell_radius``; users drop uniformly in each
    cell's disc, never closer than ``min_distance`` to any base station.
    """

    cells: int
    cell_radius: float = 10.0
    carrier_freq: float = 28e9
    pathloss_exponent: float = 3.4
    shadowing_std: float = 9.0
    min_distance: float = 1.0
    rician_k: float = 0.0

    def __post_init__(self):
        side = math.isqrt(self.cells)
        if side * side != self.cells:
            raise DimensionMismatch("cells must be a perfect square for the grid layout")
        if not (self.cell_radius > self.min_distance > 0):
            raise DimensionMismatch("require cell_radius > min_distance > 0")
        if self.carrier_freq <= 0 or self.shadowing_std < 0 or self.rician_k < 0:
            raise DimensionMismatch("carrier_freq must be positive; std and K-factor non-negative")

    @property
    def grid_side(self):
        return math.isqrt(self.cells)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq


@dataclass(frozen=True)
class Geometry:
    """Planar drop: base stations (L, 2) and users (L, K, 2), in meters."""

    bs_positions: np.ndarray
    user_positions: np.ndarray


def _cn01(rng, shape):
    """Complex circular Gaussian, zero mean, unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def iid_channels(cfg: NetworkConfig, seed: int) -> ChannelSet:
    """Block-fading channels with i.i.d. CN(0, 1) entries, deterministic in seed."""
    rng = np.random.default_rng(seed)
    h = _cn01(rng, (cfg.L, cfg.L, cfg.K, cfg.N, cfg.M))
    return ChannelSet(h=h)


def pathloss_db(distance: float, spec: DeploymentSpec, shadow: float = 0.0) -> float:
    """Distance pathloss in dB: 20 log10(4 pi / lambda) + 10 n_p log10(D) + shadow."""
    if distance < spec.min_distance:
        raise BelowMinDistance(f"distance {distance:g} m below minimum {spec.min_distance:g} m")
    return (
        20.0 * math.log10(4.0 * math.pi / spec.wavelength)
        + 10.0 * spec.pathloss_exponent * math.log10(distance)
        + shadow
    )


def _fading(rng, spec: DeploymentSpec, shape):
    """Unit-power small-scale fading; Rician mixes a deterministic-phase
    line-of-sight term with the scattered part when rician_k > 0."""
    scattered = _cn01(rng, shape)
    if spec.rician_k == 0.0:
        return scattered
    k = spec.rician_k
    return math.sqrt(k / (k + 1.0)) + math.sqrt(1.0 / (k + 1.0)) * scattered


def dense_drop(cfg: NetworkConfig, spec: DeploymentSpec, seed: int):
    """Drop users on the grid deployment and draw the full channel tensor.

    Returns (ChannelSet, Geometry). Entry (p, q) of the channel from user
    (i, k) to base station l is sqrt(g) * fading with g the linear gain
    10^(-pathloss_db / 10) of that link.

    Draw order is fixed (geometry, then shadowing, then fading) so a
    (spec, seed) pair reproduces everything bit-exactly.
    """
    if cfg.cells != spec.cells:
        raise DimensionMismatch("config and deployment disagree on the cell count")
    rng = np.random.default_rng(seed)
    side = spec.grid_side
    spacing = 2.0 * spec.cell_radius
    bs = np.array([(col * spacing, row * spacing) for row in range(side) for col in range(side)])

    users = np.zeros((cfg.L, cfg.K, 2))
    for l in range(cfg.L):
        for k in range(cfg.K):
            for attempt in range(REJECTION_BUDGET):
                radius = spec.cell_radius * math.sqrt(rng.uniform())
                angle = 2.0 * math.pi * rng.uniform()
                pos = bs[l] + radius * np.array([math.cos(angle), math.sin(angle)])
                if np.min(np.linalg.norm(bs - pos, axis=1)) >= spec.min_distance:
                    users[l, k] = pos
                    break
            else:
                raise RejectionBudgetExceeded(
                    f"user ({l},{k}) violated min_distance {REJECTION_BUDGET} times"
                )

    shadows = rng.normal(0.0, spec.shadowing_std, size=(cfg.L, cfg.L, cfg.K))
    h = np.zeros((cfg.L, cfg.L, cfg.K, cfg.N, cfg.M), dtype=complex)
    for l in range(cfg.L):
        for i in range(cfg.L):
            for k in range(cfg.K):
                dist = float(np.linalg.norm(users[i, k] - bs[l]))
                loss = pathloss_db(dist, spec, shadow=float(shadows[l, i, k]))
                gain = 10.0 ** (-loss / 10.0)
                h[l, i, k] = math.sqrt(gain) * _fading(rng, spec, (cfg.N, cfg.M))

    geometry = Geometry(bs_positions=bs, user_positions=users)
    return ChannelSet(h=h, geometry=geometry), geometry


def calibrate_noise(ch: ChannelSet, cfg: NetworkConfig, target_snr_db: float) -> float:
    """Noise power making the average direct-link effective SNR hit the target.

    The effective SNR of a direct link is P_t ||H||_F^2 / (M sigma^2); the
    returned sigma^2 sets the mean over all L*K direct links to
    10^(target_snr_db / 10).
    """
    gains = [np.linalg.norm(ch.direct(n), "fro") ** 2 for n in cfg.users()]
    if not gains:
        raise DimensionMismatch("empty channel set")
    mean_gain = float(np.mean(gains))
    return cfg.tx_power * mean_gain / (cfg.M * 10.0 ** (target_snr_db / 10.0))
