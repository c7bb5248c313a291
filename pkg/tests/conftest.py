"""Shared seeded-instance generators for the test suite."""

import itertools

import numpy as np
import pytest

from mimocoord.netmodel import CovariancePair, FilterBank, NetworkConfig


def cn(rng, *shape):
    """Complex circular Gaussian entries, unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_psd(rng, n, rank=None, scale=1.0):
    rank = rank if rank is not None else n
    g = cn(rng, n, rank)
    return scale * (g @ g.conj().T) / rank


def random_pd(rng, n, floor=0.1, scale=1.0):
    return random_psd(rng, n, scale=scale) + floor * np.eye(n)


def random_cov_pair(rng, n, side="forward", rank=None, q_floor=0.1):
    return CovariancePair(
        r=random_psd(rng, n, rank=rank),
        q=random_pd(rng, n, floor=q_floor),
        side=side,
        owner=(0, 0),
    )


def random_bank(rng, cfg: NetworkConfig) -> FilterBank:
    """Random filter bank on the power-constraint surface."""
    u = cn(rng, cfg.L, cfg.K, cfg.N, cfg.d)
    v = cn(rng, cfg.L, cfg.K, cfg.M, cfg.d)
    for l in range(cfg.L):
        for k in range(cfg.K):
            u[l, k] *= np.sqrt(cfg.rx_filter_power) / np.linalg.norm(u[l, k], "fro")
            v[l, k] *= np.sqrt(cfg.tx_power) / np.linalg.norm(v[l, k], "fro")
    return FilterBank(u=u, v=v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


# ---------------------------------------------------------------------------
# Independent oracles for the waterfilling solver, shared by the unit and
# acceptance suites.

def alloc_objective(x, alpha):
    """The per-stream allocation objective the waterfilling formula solves."""
    x = np.asarray(x, float)
    alpha = np.asarray(alpha, float)
    terms = np.where(alpha > 1e-12, np.log(1.0 + alpha * x), 0.0)
    return float(np.sum(x) - np.sum(terms))


def _face_min_pair(alpha, beta, zeta, stages=4, points=400):
    """Grid minimum over the open face {x1, x2 > 0, b1 x1 + b2 x2 = zeta}."""
    lo, hi = 0.0, zeta / beta[0]
    best_x1 = 0.0
    for _ in range(stages):
        x1 = np.linspace(lo, hi, points)
        x2 = (zeta - beta[0] * x1) / beta[1]
        vals = (x1 + x2
                - np.where(alpha[0] > 1e-12, np.log1p(alpha[0] * x1), 0.0)
                - np.where(alpha[1] > 1e-12, np.log1p(alpha[1] * x2), 0.0))
        j = int(np.argmin(vals))
        best_x1 = x1[j]
        width = (hi - lo) / (points - 1)
        lo = max(0.0, best_x1 - 2 * width)
        hi = min(zeta / beta[0], best_x1 + 2 * width)
    x = np.array([best_x1, (zeta - beta[0] * best_x1) / beta[1]])
    return alloc_objective(x, alpha)


def _face_min_triple(alpha, beta, zeta, stages=4, points=260):
    """Grid minimum over the face {x > 0 componentwise, sum(b x) = zeta}."""
    lo = np.zeros(2)
    hi = np.array([zeta / beta[0], zeta / beta[1]])
    best = np.zeros(2)
    for _ in range(stages):
        x1 = np.linspace(lo[0], hi[0], points)
        x2 = np.linspace(lo[1], hi[1], points)
        g1, g2 = np.meshgrid(x1, x2, indexing="ij")
        rem = zeta - beta[0] * g1 - beta[1] * g2
        mask = rem >= 0
        g3 = np.where(mask, rem / beta[2], 0.0)
        vals = (g1 + g2 + g3
                - np.where(alpha[0] > 1e-12, np.log1p(alpha[0] * g1), 0.0)
                - np.where(alpha[1] > 1e-12, np.log1p(alpha[1] * g2), 0.0)
                - np.where(alpha[2] > 1e-12, np.log1p(alpha[2] * g3), 0.0))
        vals = np.where(mask, vals, np.inf)
        j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        best = np.array([g1[j], g2[j]])
        width = (hi - lo) / (points - 1)
        lo = np.maximum(0.0, best - 3 * width)
        hi = np.minimum([zeta / beta[0], zeta / beta[1]], best + 3 * width)
    x3 = max((zeta - beta[0] * best[0] - beta[1] * best[1]) / beta[2], 0.0)
    return alloc_objective(np.array([best[0], best[1], x3]), alpha)


def grid_min_allocation(alpha, beta, zeta):
    """Brute-force minimum of the allocation objective on the budget simplex
    {x >= 0, sum(beta x) = zeta} for r <= 3.

    Enumerates every support set: the constrained minimum lies in the
    relative interior of some face, and each face is solved by a refined
    grid (or exactly, for singleton supports), so boundary optima are never
    missed.
    """
    alpha = np.asarray(alpha, float)
    beta = np.asarray(beta, float)
    r = alpha.size
    best = np.inf
    for i in range(r):
        x = np.zeros(r)
        x[i] = zeta / beta[i]
        best = min(best, alloc_objective(x, alpha))
    if r >= 2:
        for i, j in itertools.combinations(range(r), 2):
            face = _face_min_pair(alpha[[i, j]], beta[[i, j]], zeta)
            best = min(best, face)
    if r == 3:
        best = min(best, _face_min_triple(alpha, beta, zeta))
    if r > 3:
        raise ValueError("grid oracle supports r <= 3 only")
    return best


def matrix_objective(x_mat, r_mat, q_mat):
    """tr(X^H Q X) - log|I + X^H R X| in natural log."""
    a = x_mat.conj().T @ r_mat @ x_mat
    b = x_mat.conj().T @ q_mat @ x_mat
    _, logdet = np.linalg.slogdet(np.eye(a.shape[0]) + a)
    return float(np.real(np.trace(b))) - logdet


def kkt_residuals(pa):
    """Stationarity residuals of an allocation: active-stream equation and
    inactive-stream multiplier slack."""
    active_res, inactive_slack = [], []
    for a, b, x in zip(pa.alpha, pa.beta, pa.x):
        if a <= 1e-12:
            continue
        if x > 0:
            active_res.append(abs(1.0 - 1.0 / (x + 1.0 / a) + pa.mu * b))
        else:
            inactive_slack.append(pa.mu - (a - 1.0) / b)
    return active_res, inactive_slack
