import math

import numpy as np
import pytest

from mimocoord.chanmodel import (
    SPEED_OF_LIGHT,
    DeploymentSpec,
    calibrate_noise,
    dense_drop,
    iid_channels,
    pathloss_db,
)
from mimocoord.errors import BelowMinDistance, DimensionMismatch, RejectionBudgetExceeded
from mimocoord.netmodel import NetworkConfig


def cfg(**kw):
    base = dict(cells=2, users_per_cell=2, tx_antennas=3, rx_antennas=4, streams=2)
    base.update(kw)
    return NetworkConfig(**base)


class TestIidChannels:
    def test_deterministic(self):
        a = iid_channels(cfg(), seed=123)
        b = iid_channels(cfg(), seed=123)
        assert np.array_equal(a.h, b.h)
        c = iid_channels(cfg(), seed=124)
        assert not np.array_equal(a.h, c.h)

    def test_shape(self):
        ch = iid_channels(cfg(cells=3), seed=0)
        assert ch.h.shape == (3, 3, 2, 4, 3)

    def test_moment_oracle(self):
        # >= 1e5 pooled entries: mean near 0, unit variance within 3%
        big = NetworkConfig(cells=1, users_per_cell=1, tx_antennas=320, rx_antennas=320,
                            streams=1)
        entries = iid_channels(big, seed=77).h.ravel()
        assert entries.size >= 100_000
        assert abs(entries.mean()) <= 3.0 / math.sqrt(entries.size)
        assert abs(np.mean(np.abs(entries) ** 2) - 1.0) <= 0.03

    def test_immutable(self):
        ch = iid_channels(cfg(), seed=5)
        with pytest.raises(ValueError):
            ch.h[0, 0, 0, 0, 0] = 0


class TestPathloss:
    def test_exponent_difference(self):
        spec = DeploymentSpec(cells=4, pathloss_exponent=3.4, min_distance=0.5)
        diff = pathloss_db(10.0, spec) - pathloss_db(1.0, spec)
        assert diff == pytest.approx(34.0, abs=1e-12)

    def test_reference_term(self):
        spec = DeploymentSpec(cells=4, carrier_freq=28e9, min_distance=0.5)
        lam = SPEED_OF_LIGHT / 28e9
        assert pathloss_db(1.0, spec) == pytest.approx(20 * math.log10(4 * math.pi / lam),
                                                       abs=1e-12)

    def test_shadow_passthrough_and_monotonicity(self):
        spec = DeploymentSpec(cells=4)
        assert pathloss_db(5.0, spec, shadow=7.5) == pytest.approx(
            pathloss_db(5.0, spec) + 7.5, abs=1e-12)
        samples = [pathloss_db(d, spec) for d in np.linspace(1.0, 9.0, 50)]
        assert np.all(np.diff(samples) > 0)

    def test_below_min_distance(self):
        spec = DeploymentSpec(cells=4, min_distance=1.0)
        with pytest.raises(BelowMinDistance):
            pathloss_db(0.5, spec)

    def test_shadowing_std_statistic(self):
        # infer realized shadowing from generated channels: measured per-link
        # loss minus deterministic pathloss, pooled over many drops
        spec = DeploymentSpec(cells=4, shadowing_std=9.0)
        net = NetworkConfig(cells=4, users_per_cell=8, tx_antennas=8, rx_antennas=8,
                            streams=1)
        shadows = []
        for seed in range(800):
            ch, geo = dense_drop(net, spec, seed=seed)
            for l in range(4):
                for i in range(4):
                    for k in range(8):
                        dist = float(np.linalg.norm(geo.user_positions[i, k]
                                                    - geo.bs_positions[l]))
                        measured = -10.0 * math.log10(np.mean(np.abs(ch.h[l, i, k]) ** 2))
                        shadows.append(measured - pathloss_db(dist, spec))
        shadows = np.asarray(shadows)
        assert shadows.size >= 100_000
        # 64 fading samples per link add ~0.56 dB of estimation noise in
        # quadrature: sqrt(81 + 0.31) = 9.02, well inside the 3% band
        assert abs(shadows.std() - 9.0) <= 0.03 * 9.0


class TestDenseDrop:
    def test_geometry_invariants(self):
        spec = DeploymentSpec(cells=9)
        net = NetworkConfig(cells=9, users_per_cell=8, tx_antennas=4, rx_antennas=8,
                            streams=2)
        ch, geo = dense_drop(net, spec, seed=11)
        assert geo.user_positions.shape == (9, 8, 2)
        assert ch.h.shape == (9, 9, 8, 8, 4)
        for l in range(9):
            for k in range(8):
                own = np.linalg.norm(geo.user_positions[l, k] - geo.bs_positions[l])
                assert own <= spec.cell_radius + 1e-9
                dists = np.linalg.norm(geo.bs_positions - geo.user_positions[l, k], axis=1)
                assert dists.min() >= spec.min_distance

    def test_grid_layout(self):
        spec = DeploymentSpec(cells=9, cell_radius=10.0)
        net = NetworkConfig(cells=9, users_per_cell=1, tx_antennas=2, rx_antennas=2,
                            streams=1)
        _, geo = dense_drop(net, spec, seed=0)
        xs = sorted(set(geo.bs_positions[:, 0]))
        assert xs == [0.0, 20.0, 40.0]

    def test_deterministic(self):
        spec = DeploymentSpec(cells=4)
        net = cfg(cells=4)
        a, ga = dense_drop(net, spec, seed=9)
        b, gb = dense_drop(net, spec, seed=9)
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(ga.user_positions, gb.user_positions)

    def test_fading_moment_oracle(self):
        # with shadowing off, the per-link second moment matches the
        # deterministic pathloss gain
        spec = DeploymentSpec(cells=4, shadowing_std=0.0)
        net = NetworkConfig(cells=4, users_per_cell=1, tx_antennas=10, rx_antennas=10,
                            streams=1)
        ratios = []
        for seed in range(100):
            ch, geo = dense_drop(net, spec, seed=seed)
            dist = float(np.linalg.norm(geo.user_positions[0, 0] - geo.bs_positions[0]))
            gain = 10.0 ** (-pathloss_db(dist, spec) / 10.0)
            ratios.append(np.mean(np.abs(ch.h[0, 0, 0]) ** 2) / gain)
        pooled = np.mean(ratios)
        assert abs(pooled - 1.0) <= 0.03

    def test_rician_unit_power(self):
        spec = DeploymentSpec(cells=4, shadowing_std=0.0, rician_k=5.0)
        net = NetworkConfig(cells=4, users_per_cell=1, tx_antennas=16, rx_antennas=16,
                            streams=1)
        ratios = []
        for seed in range(60):
            ch, geo = dense_drop(net, spec, seed=seed)
            dist = float(np.linalg.norm(geo.user_positions[0, 0] - geo.bs_positions[0]))
            gain = 10.0 ** (-pathloss_db(dist, spec) / 10.0)
            ratios.append(np.mean(np.abs(ch.h[0, 0, 0]) ** 2) / gain)
        assert abs(np.mean(ratios) - 1.0) <= 0.03

    def test_dense_reference_configuration_user_count(self):
        spec = DeploymentSpec(cells=9, cell_radius=10.0)
        net = NetworkConfig(cells=9, users_per_cell=8, tx_antennas=4, rx_antennas=8,
                            streams=2)
        _, geo = dense_drop(net, spec, seed=1)
        assert geo.user_positions.shape[0] * geo.user_positions.shape[1] == 72

    def test_rejection_budget(self):
        # annulus so thin the seeded sampler exhausts its retries
        spec = DeploymentSpec(cells=4, cell_radius=10.0, min_distance=9.9999)
        net = cfg(cells=4)
        with pytest.raises(RejectionBudgetExceeded):
            dense_drop(net, spec, seed=0)

    def test_spec_validation(self):
        with pytest.raises(DimensionMismatch):
            DeploymentSpec(cells=5)
        with pytest.raises(DimensionMismatch):
            DeploymentSpec(cells=4, cell_radius=1.0, min_distance=2.0)
        with pytest.raises(DimensionMismatch):
            dense_drop(cfg(cells=2), DeploymentSpec(cells=4), seed=0)


class TestCalibrateNoise:
    def test_unit_scalar_channels(self):
        net = NetworkConfig(cells=1, users_per_cell=1, tx_antennas=1, rx_antennas=1,
                            streams=1, tx_power=1.0)
        h = np.ones((1, 1, 1, 1, 1), dtype=complex)
        from mimocoord.netmodel import ChannelSet

        assert calibrate_noise(ChannelSet(h=h), net, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_power_linearity(self):
        net = cfg(tx_power=1.0)
        ch = iid_channels(net, seed=21)
        doubled = cfg(tx_power=2.0)
        assert calibrate_noise(ch, doubled, 10.0) == pytest.approx(
            2.0 * calibrate_noise(ch, net, 10.0), rel=1e-12)

    def test_dense_closure_at_19db(self):
        # re-measured average effective SNR within 0.1 dB of the target
        spec = DeploymentSpec(cells=9)
        net = NetworkConfig(cells=9, users_per_cell=8, tx_antennas=4, rx_antennas=8,
                            streams=2, tx_power=1.0)
        ch, _ = dense_drop(net, spec, seed=33)
        sigma2 = calibrate_noise(ch, net, 19.0)
        snrs = [net.tx_power * np.linalg.norm(ch.direct(n), "fro") ** 2
                / (net.tx_antennas * sigma2) for n in net.users()]
        measured_db = 10.0 * math.log10(np.mean(snrs))
        assert abs(measured_db - 19.0) <= 0.1
