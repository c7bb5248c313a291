"""Network data model: configuration, channels, filter banks, covariances, rates.

Index convention: a user is the pair ``(cell, slot)`` with ``cell`` in
``0..L-1`` and ``slot`` in ``0..K-1``. The channel tensor holds the N x M
matrix from user ``(i, k)`` to base station ``l`` at ``[l, i, k]``. The same
engine covers uplink and downlink: a downlink deployment is expressed by
swapping which physical device carries the transmit antenna count M and the
receive count N (pure relabeling, one code path).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, SingularProjection
from .matrixkit import hermitize

LN2 = float(np.log(2.0))
COND_LIMIT = 1e12
RIDGE_SCALE = 1e-12


@dataclass(frozen=True)
class NetworkConfig:
    """Topology and power/noise budget of an interfering multi-cell network.

    ``noise_rev`` (the reverse-link noise) defaults to the forward value,
    the symmetric-TDD assumption.
    """

    cells: int
    users_per_cell: int
    tx_antennas: int
    rx_antennas: int
    streams: int
    tx_power: float = 1.0
    rx_filter_power: float = 1.0
    noise_fwd: float = 1.0
    noise_rev: Optional[float] = None

    def __post_init__(self):
        for name in ("cells", "users_per_cell", "tx_antennas", "rx_antennas", "streams"):
            if getattr(self, name) < 1:
                raise DimensionMismatch(f"{name} must be a positive integer")
        if self.streams > min(self.tx_antennas, self.rx_antennas):
            raise DimensionMismatch("streams must not exceed min(tx_antennas, rx_antennas)")
        for name in ("tx_power", "rx_filter_power"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DimensionMismatch(f"{name} must be finite and non-negative")
        if self.noise_fwd <= 0 or not np.isfinite(self.noise_fwd):
            raise DimensionMismatch("noise_fwd must be strictly positive")
        if self.noise_rev is not None and (self.noise_rev <= 0 or not np.isfinite(self.noise_rev)):
            raise DimensionMismatch("noise_rev must be strictly positive")

    # Short aliases used in formula-dense code.
    @property
    def L(self):
        return self.cells

    @property
    def K(self):
        return self.users_per_cell

    @property
    def M(self):
        return self.tx_antennas

    @property
    def N(self):
        return self.rx_antennas

    @property
    def d(self):
        return self.streams

    @property
    def sigma2_rev(self):
        return self.noise_fwd if self.noise_rev is None else self.noise_rev

    def users(self):
        """All user indices (cell, slot) in row-major order."""
        return [(l, k) for l in range(self.cells) for k in range(self.users_per_cell)]


@dataclass(frozen=True)
class ChannelSet:
    """All cross-link MIMO channels, ``h[l, i, k]`` of shape (N, M), plus
    optional deployment geometry metadata."""

    h: np.ndarray
    geometry: Optional[object] = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim != 5 or h.shape[0] != h.shape[1]:
            raise DimensionMismatch(f"channel tensor must be (L, L, K, N, M), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise DimensionMismatch("channel entries must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    def gain(self, rx_cell, user):
        """Channel from user (i, k) to base station rx_cell."""
        i, k = user
        return self.h[rx_cell, i, k]

    def direct(self, user):
        """Channel of user (l, j) to its serving base station l."""
        l, j = user
        return self.h[l, l, j]


@dataclass
class FilterBank:
    """Receive filters ``u[l, j]`` (N x d) and transmit filters ``v[i, k]`` (M x d)."""

    u: np.ndarray
    v: np.ndarray

    def copy(self):
        return FilterBank(u=self.u.copy(), v=self.v.copy())

    def rx(self, user):
        l, j = user
        return self.u[l, j]

    def tx(self, user):
        i, k = user
        return self.v[i, k]


@dataclass(frozen=True)
class CovariancePair:
    """Signal (R, PSD) and interference-plus-noise (Q, PD) covariances of one node."""

    r: np.ndarray
    q: np.ndarray
    side: str
    owner: tuple


def _check_bank(cfg: NetworkConfig, fb: FilterBank):
    if fb.u.shape != (cfg.L, cfg.K, cfg.N, cfg.d):
        raise DimensionMismatch(f"receive bank shape {fb.u.shape} inconsistent with config")
    if fb.v.shape != (cfg.L, cfg.K, cfg.M, cfg.d):
        raise DimensionMismatch(f"transmit bank shape {fb.v.shape} inconsistent with config")


def fwd_covariances(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank, user) -> CovariancePair:
    """Forward (receive-side) covariances of one user.

    R is the desired rank-d term through the direct channel; Q sums every
    other transmitter's contribution plus the noise floor, so Q >= sigma^2 I
    holds exactly.
    """
    _check_bank(cfg, fb)
    l, j = user
    hv = ch.gain(l, user) @ fb.tx(user)
    r = hv @ hv.conj().T
    q = cfg.noise_fwd * np.eye(cfg.N, dtype=complex)
    for other in cfg.users():
        if other == user:
            continue
        e = ch.gain(l, other) @ fb.tx(other)
        q = q + e @ e.conj().T
    return CovariancePair(r=hermitize(r), q=hermitize(q), side="forward", owner=tuple(user))


def rev_covariances(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank, user) -> CovariancePair:
    """Reverse (transmit-side) covariances of one user, the TDD mirror image.

    The desired term projects the user's own receive filter through its
    direct channel; interference collects every receive filter in the
    network through that user's channel to each base station.
    """
    _check_bank(cfg, fb)
    i, k = user
    hu = ch.direct(user).conj().T @ fb.rx(user)
    r = hu @ hu.conj().T
    q = cfg.sigma2_rev * np.eye(cfg.M, dtype=complex)
    for other in cfg.users():
        if other == user:
            continue
        l, j = other
        e = ch.gain(l, user).conj().T @ fb.rx(other)
        q = q + e @ e.conj().T
    return CovariancePair(r=hermitize(r), q=hermitize(q), side="reverse", owner=tuple(user))


def all_fwd_covariances(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank):
    """Forward covariances of every user at once.

    Shares the per-cell interference total across same-cell users; returns a
    dict keyed by user. Matches :func:`fwd_covariances` to round-off.
    """
    _check_bank(cfg, fb)
    # Effective channels e[l, i, k] = h[l, i, k] @ v[i, k], shape (L, L, K, N, d).
    eff = np.einsum("liknm,ikmd->liknd", ch.h, fb.v)
    totals = np.einsum("liknd,likpd->lnp", eff, eff.conj())
    eye = np.eye(cfg.N, dtype=complex)
    out = {}
    for l in range(cfg.L):
        base = totals[l] + cfg.noise_fwd * eye
        for j in range(cfg.K):
            r = eff[l, l, j] @ eff[l, l, j].conj().T
            out[(l, j)] = CovariancePair(
                r=hermitize(r), q=hermitize(base - r), side="forward", owner=(l, j)
            )
    return out


def all_rev_covariances(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank):
    """Reverse covariances of every user at once (shares per-cell filter Grams)."""
    _check_bank(cfg, fb)
    # Per-cell receive-filter Gram g[l] = sum_j u[l, j] u[l, j]^H, shape (L, N, N).
    gram = np.einsum("ljnd,ljpd->lnp", fb.u, fb.u.conj())
    totals = np.einsum("liknm,lnp,likpq->ikmq", ch.h.conj(), gram, ch.h)
    eye = np.eye(cfg.M, dtype=complex)
    out = {}
    for i in range(cfg.L):
        for k in range(cfg.K):
            hu = ch.h[i, i, k].conj().T @ fb.u[i, k]
            r = hu @ hu.conj().T
            q = totals[i, k] + cfg.sigma2_rev * eye - r
            out[(i, k)] = CovariancePair(
                r=hermitize(r), q=hermitize(q), side="reverse", owner=(i, k)
            )
    return out


def _projected(u, cov: CovariancePair, regularize):
    """Project (R, Q) through a filter; optionally ridge a singular Q projection."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != cov.q.shape[0]:
        raise DimensionMismatch(f"filter shape {u.shape} does not match covariance dim {cov.q.shape[0]}")
    a = hermitize(u.conj().T @ cov.r @ u)
    b = hermitize(u.conj().T @ cov.q @ u)
    w = np.linalg.eigvalsh(b)
    if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        if not regularize:
            raise SingularProjection(
                f"projected I+N matrix singular (condition number > {COND_LIMIT:g})"
            )
        b = b + RIDGE_SCALE * float(np.real(np.trace(cov.q))) * np.eye(b.shape[0])
    return a, b


def _logdet2(m):
    """log2 determinant of a Hermitian positive-definite matrix."""
    _, logdet = np.linalg.slogdet(m)
    return logdet / LN2


def user_rate(u, cov: CovariancePair, regularize: bool = False) -> float:
    """Achievable rate log2|I + (U^H R U)(U^H Q U)^-1| in bits per channel use.

    Raises SingularProjection if the projected I+N matrix is numerically
    singular; with ``regularize=True`` a small ridge proportional to trace(Q)
    is added instead, so rank-collapsed filters (after stream switch-off)
    still evaluate to their limiting rate.
    """
    a, b = _projected(u, cov, regularize)
    return max(_logdet2(b + a) - _logdet2(b), 0.0)


def sum_rate(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank, regularize: bool = True) -> float:
    """Network sum-rate: user_rate totalled over all L*K users."""
    covs = all_fwd_covariances(cfg, ch, fb)
    return float(sum(user_rate(fb.rx(n), covs[n], regularize=regularize) for n in cfg.users()))


def gmrq_value(u, cov: CovariancePair) -> float:
    """Separability |U^H R U| / |U^H Q U| between signal and I+N subspaces.

    Invariant to right-multiplication of U by any nonsingular matrix.
    """
    a, b = _projected(u, cov, regularize=False)
    det_a = max(float(np.real(np.linalg.det(a))), 0.0)
    det_b = float(np.real(np.linalg.det(b)))
    return det_a / det_b


def dlt_user_lb(u, cov: CovariancePair, regularize: bool = False) -> float:
    """Per-user difference-of-log-and-trace rate lower bound (bits - power)."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != cov.q.shape[0]:
        raise DimensionMismatch(f"filter shape {u.shape} does not match covariance dim {cov.q.shape[0]}")
    a = hermitize(u.conj().T @ cov.r @ u)
    b = u.conj().T @ cov.q @ u
    eye = np.eye(a.shape[0])
    return _logdet2(eye + a) - float(np.real(np.trace(b)))


def dlt_objective(cfg: NetworkConfig, ch: ChannelSet, fb: FilterBank, side: str) -> float:
    """Network DLT objective, evaluated on the forward or reverse covariances.

    The two sides agree identically when the noise-weighted filter energies
    balance (sigma^2 * sum ||U||_F^2 == sigma_rev^2 * sum ||V||_F^2), which
    holds under the default symmetric noise with banks normalized to equal
    forward/reverse power budgets.
    """
    if side == "forward":
        covs = all_fwd_covariances(cfg, ch, fb)
        return float(sum(dlt_user_lb(fb.rx(n), covs[n]) for n in cfg.users()))
    if side == "reverse":
        covs = all_rev_covariances(cfg, ch, fb)
        return float(sum(dlt_user_lb(fb.tx(n), covs[n]) for n in cfg.users()))
    raise DimensionMismatch(f"side must be 'forward' or 'reverse', got {side!r}")


def interference_limited_check(u, cov: CovariancePair) -> bool:
    """True iff every eigenvalue of U^H Q U is at least one.

    This is the operating condition under which the DLT expression is a
    valid lower bound on the user rate.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != cov.q.shape[0]:
        raise DimensionMismatch(f"filter shape {u.shape} does not match covariance dim {cov.q.shape[0]}")
    b = hermitize(u.conj().T @ cov.q @ u)
    w = np.linalg.eigvalsh(b)
    if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        raise SingularProjection("projected I+N matrix is singular")
    return bool(w[0] >= 1.0)
