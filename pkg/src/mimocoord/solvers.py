"""Per-node optimization kernels.

* ``gmrq_max`` — the generalized-eigenvector maximizer of the multi-dimensional
  Rayleigh quotient |X^H R X| / |X^H Q X|.
* ``rank_adapt`` — stream count chosen as the number of whitened eigenvalues
  at or above one.
* ``power_alloc`` / ``nh_waterfill`` — non-homogeneous waterfilling: minimize
  tr(X^H Q X) - ln|I + X^H R X| (natural log, matching the closed-form water
  level) under the exact Frobenius budget ||X||_F^2 = zeta, which prices
  stream i at beta_i and switches off streams with low quasi-SINR alpha_i.
* ``max_sinr_update`` — the classical per-stream SINR-maximizing update,
  kept as a benchmark.
* ``eigen_beamform`` — single-link SVD beamforming (uncoordinated baseline).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput, SingularProjection
from .matrixkit import herm_eig, solve_lower_herm, whiten
from .netmodel import ChannelSet, FilterBank, NetworkConfig

ALPHA_FLOOR = 1e-12
STREAM_EPS_SCALE = 1e-6
BISECT_MAX_ITER = 200
BISECT_MU_TOL = 1e-12


@dataclass(frozen=True)
class PowerAllocation:
    """Waterfilling solution: stream powers x, multiplier mu, and the
    (alpha, beta, zeta) problem data they solve."""

    x: np.ndarray
    mu: float
    alpha: np.ndarray
    beta: np.ndarray
    zeta: float


@dataclass(frozen=True)
class SolverOutput:
    """Filter update with its power allocation and active stream count."""

    filter: np.ndarray
    allocation: PowerAllocation
    active_streams: int


def gmrq_max(r_mat, q_mat, r: int) -> np.ndarray:
    """Maximize the r-dimensional Rayleigh quotient |X^H R X| / |X^H Q X|.

    Returns X = L^-H Psi with Psi the top-r eigenvectors of the whitened
    matrix L^-1 R L^-H, i.e. the dominant generalized eigenvectors:
    R X = Q X Lambda_r.
    """
    factor, m = whiten(r_mat, q_mat)
    if not 1 <= r <= factor.dim:
        raise DimensionMismatch(f"rank {r} outside 1..{factor.dim}")
    pair = herm_eig(m)
    return solve_lower_herm(factor, pair.vectors[:, :r])


def rank_adapt(r_mat, q_mat, d_max: int) -> int:
    """Stream count: whitened eigenvalues >= 1, floored at 1, capped at d_max.

    The floor keeps the link alive when every mode is interference-dominated;
    the cap is the hardware stream limit.
    """
    if d_max < 1:
        raise InvalidInput("d_max must be at least 1")
    _, m = whiten(r_mat, q_mat)
    values = np.linalg.eigvalsh(m)
    count = int(np.count_nonzero(values >= 1.0))
    return max(1, min(count, d_max))


def _alloc_fallback(alpha, beta, zeta):
    """Degenerate case (no stream carries signal): spend the budget on the
    cheapest-per-power stream, i.e. the one with the largest beta."""
    j = int(np.argmax(beta))
    x = np.zeros_like(beta)
    x[j] = zeta / beta[j]
    return PowerAllocation(x=x, mu=-1.0 / beta[j], alpha=alpha, beta=beta, zeta=zeta)


def _budget_gap(mu, alpha, beta, active, zeta):
    """g(mu): bought power minus budget at water level mu."""
    x = 1.0 / (1.0 + mu * beta[active]) - 1.0 / alpha[active]
    return float(np.sum(beta[active] * np.maximum(x, 0.0))) - zeta


def power_alloc(alpha, beta, zeta: float) -> PowerAllocation:
    """Solve min sum_i (x_i - ln(1 + alpha_i x_i)) s.t. sum_i beta_i x_i = zeta, x >= 0.

    The solution is x_i = (1 / (1 + mu beta_i) - 1 / alpha_i)^+ with mu the
    unique root of the budget gap g(mu) on ]-1/max_i beta_i, inf[, where g is
    monotone decreasing; mu is bracketed by doubling and bisected, then
    polished with Newton steps on the identified active set so the budget
    residual reaches float precision.

    Streams with alpha_i <= ALPHA_FLOOR carry no signal. Normally they get
    zero power, but when even the left edge of the water-level interval
    cannot spend the whole budget on the signal-bearing streams, the
    multiplier pins to -1/max beta and the largest-beta zero-signal stream
    absorbs the remainder as the cheapest place to burn the mandatory
    budget (the closed form above implicitly assumes every alpha_i > 0 and
    misses this boundary case). With no signal-bearing stream at all, the
    entire budget lands there.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.ndim != 1 or alpha.shape != beta.shape or alpha.size == 0:
        raise InvalidInput("alpha and beta must be equal-length non-empty vectors")
    if np.any(beta <= 0) or not np.all(np.isfinite(beta)):
        raise InvalidInput("beta entries must be strictly positive")
    if zeta <= 0 or not np.isfinite(zeta):
        raise InvalidInput("zeta must be strictly positive")
    if np.any(alpha < 0):
        raise InvalidInput("alpha entries must be non-negative")

    active = alpha > ALPHA_FLOOR
    if not np.any(active):
        return _alloc_fallback(alpha, beta, zeta)

    edge = -1.0 / float(np.max(beta))
    if np.max(beta) > np.max(beta[active]) and _budget_gap(edge, alpha, beta, active, zeta) <= 0.0:
        # The cheapest stream carries no signal and the signal-bearing
        # streams cannot absorb the budget even at the edge: the multiplier
        # pins there and that stream soaks up the remainder.
        sink = int(np.argmax(beta))
        mu = -1.0 / beta[sink]
        x = np.zeros_like(alpha)
        raw = 1.0 / (1.0 + mu * beta[active]) - 1.0 / alpha[active]
        x[active] = np.maximum(raw, 0.0)
        x[sink] = (zeta - float(np.sum(beta[active] * x[active]))) / beta[sink]
        return PowerAllocation(x=x, mu=float(mu), alpha=alpha, beta=beta, zeta=float(zeta))

    offset = 1e-12
    lo = edge + offset
    while _budget_gap(lo, alpha, beta, active, zeta) <= 0.0 and offset > 1e-300:
        offset /= 1024.0
        lo = edge + offset
    hi = 0.0
    if _budget_gap(hi, alpha, beta, active, zeta) > 0.0:
        hi = 1.0
        while _budget_gap(hi, alpha, beta, active, zeta) > 0.0:
            hi *= 2.0
            if hi > 1e18:
                raise InvalidInput("water level search diverged")
    mu = 0.5 * (lo + hi)
    for _ in range(BISECT_MAX_ITER):
        mu = 0.5 * (lo + hi)
        gap = _budget_gap(mu, alpha, beta, active, zeta)
        if abs(gap) <= 1e-12 * zeta or (hi - lo) <= BISECT_MU_TOL * max(1.0, abs(mu)):
            break
        if gap > 0.0:
            lo = mu
        else:
            hi = mu

    # Newton polish: the active set is stable near the root, and on it the
    # budget equation is smooth and monotone, so a few steps reach float
    # precision on the constraint residual.
    inv_alpha = np.zeros_like(alpha)
    inv_alpha[active] = 1.0 / alpha[active]
    for _ in range(10):
        live = active & (1.0 / (1.0 + mu * beta) - inv_alpha > 0.0)
        if not np.any(live):
            break
        target = zeta + float(np.sum(beta[live] * inv_alpha[live]))
        converged = False
        for _ in range(50):
            denom = 1.0 + mu * beta[live]
            g = float(np.sum(beta[live] / denom)) - target
            if abs(g) <= 1e-15 * max(1.0, target):
                converged = True
                break
            dg = -float(np.sum((beta[live] / denom) ** 2))
            mu_next = mu - g / dg
            if mu_next <= -1.0 / float(np.max(beta[live])):
                break
            mu = mu_next
        same_set = np.array_equal(live, active & (1.0 / (1.0 + mu * beta) - inv_alpha > 0.0))
        if converged and same_set:
            break

    x = np.zeros_like(alpha)
    x[active] = np.maximum(1.0 / (1.0 + mu * beta[active]) - inv_alpha[active], 0.0)
    return PowerAllocation(x=x, mu=float(mu), alpha=alpha, beta=beta, zeta=float(zeta))


def nh_waterfill(r_mat, q_mat, r: int, zeta: float) -> SolverOutput:
    """Non-homogeneous waterfilling filter update.

    Whitens (R, Q), reads the top-r quasi-SINRs alpha and stream costs beta,
    allocates power with :func:`power_alloc`, and maps back through L^-H.
    Switched-off streams keep a vanishing placeholder power
    (STREAM_EPS_SCALE * sqrt(zeta / r)) so they stay revivable in later
    forward-backward rounds; the filter is rescaled to restore
    ||X||_F^2 = zeta exactly.
    """
    factor, m = whiten(r_mat, q_mat)
    if not 1 <= r <= factor.dim:
        raise DimensionMismatch(f"rank {r} outside 1..{factor.dim}")
    if zeta <= 0:
        raise InvalidInput("zeta must be strictly positive")
    pair = herm_eig(m)
    alpha = np.maximum(pair.values[:r], 0.0)
    w = solve_lower_herm(factor, pair.vectors[:, :r])
    beta = np.real(np.sum(w.conj() * w, axis=0))
    alloc = power_alloc(alpha, beta, zeta)

    delta = STREAM_EPS_SCALE * np.sqrt(zeta / r)
    active_streams = int(np.count_nonzero(alloc.x > delta * delta))
    sigma = np.sqrt(alloc.x)
    sigma[alloc.x <= delta * delta] = delta
    x_mat = w * sigma[np.newaxis, :]
    x_mat *= np.sqrt(zeta) / np.linalg.norm(x_mat, "fro")
    return SolverOutput(filter=x_mat, allocation=alloc, active_streams=active_streams)


def max_sinr_update(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank, node, side: str) -> np.ndarray:
    """Per-stream SINR-maximizing filter update (benchmark).

    For each stream m, invert the full received covariance minus that
    stream's own rank-one term, apply it to the stream's effective direct
    channel, and normalize the column to sqrt(P / d): equal power per stream
    by construction.
    """
    if side == "forward":
        l, j = node
        total = cfg.noise_fwd * np.eye(cfg.N, dtype=complex)
        for other in cfg.users():
            e = ch.gain(l, other) @ fb.tx(other)
            total += e @ e.conj().T
        direct = ch.gain(l, node) @ fb.tx(node)
        budget = cfg.rx_filter_power
    elif side == "reverse":
        i, k = node
        total = cfg.sigma2_rev * np.eye(cfg.M, dtype=complex)
        for other in cfg.users():
            lo, _ = other
            e = ch.gain(lo, node).conj().T @ fb.rx(other)
            total += e @ e.conj().T
        direct = ch.direct(node).conj().T @ fb.rx(node)
        budget = cfg.tx_power
    else:
        raise DimensionMismatch(f"side must be 'forward' or 'reverse', got {side!r}")

    d = direct.shape[1]
    columns = []
    scale = np.sqrt(budget / d)
    for m in range(d):
        own = np.outer(direct[:, m], direct[:, m].conj())
        try:
            col = np.linalg.solve(total - own, direct[:, m])
        except np.linalg.LinAlgError as exc:
            raise SingularProjection(f"stream {m} covariance singular: {exc}") from exc
        norm = np.linalg.norm(col)
        if norm == 0.0:
            raise SingularProjection(f"stream {m} direction vanished")
        columns.append(col * (scale / norm))
    return np.column_stack(columns)


def eigen_beamform(h, d: int, power: float):
    """Single-link SVD beamforming: top-d right/left singular vectors.

    Returns (V, U): V columns are right singular vectors scaled to
    sqrt(power / d) each, U the matching unit-norm left singular vectors,
    phased so U^H H V is the non-negative descending singular-value diagonal.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2:
        raise DimensionMismatch(f"channel must be a matrix, got shape {h.shape}")
    n, m = h.shape
    if not 1 <= d <= min(n, m):
        raise DimensionMismatch(f"d={d} outside 1..min{(n, m)}")
    left, _, right_h = np.linalg.svd(h)
    v = right_h.conj().T[:, :d]
    u = left[:, :d]
    for i in range(d):
        idx = np.flatnonzero(np.abs(v[:, i]) > 1e-12)
        if idx.size:
            rot = v[idx[0], i].conjugate() / abs(v[idx[0], i])
            v[:, i] *= rot
            u[:, i] *= rot
    return v * np.sqrt(power / d), u
