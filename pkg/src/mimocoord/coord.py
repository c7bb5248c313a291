"""Forward-backward coordination engine.

One round = a forward phase (every receive filter updated from its current
signal / I+N covariances) followed by a backward phase (every transmit
filter updated from the reverse-network covariances). Within a phase the
node updates are independent; the engine itself is deterministic in
(algorithm, config, channels, T, seed).

Hosted algorithms: AIMS (whole-filter separability maximization), AIMS with
rank adaptation, max-DLT (non-homogeneous waterfilling on the separable
sum-rate lower bound), per-stream max-SINR, and the uncoordinated
single-link eigen-beamforming baseline.
"""

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidInput, MimocoordError
from .netmodel import (
    ChannelSet,
    FilterBank,
    NetworkConfig,
    all_fwd_covariances,
    all_rev_covariances,
    dlt_objective,
    dlt_user_lb,
    sum_rate,
)
from .solvers import eigen_beamform, gmrq_max, max_sinr_update, nh_waterfill, rank_adapt


class AlgorithmId(Enum):
    AIMS = "aims"
    AIMS_RA = "aims_ra"
    MAX_DLT = "max_dlt"
    MAX_SINR = "max_sinr"
    UNCOORDINATED = "uncoordinated"

    @classmethod
    def parse(cls, text: str) -> "AlgorithmId":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise InvalidInput(f"unknown algorithm {text!r}; choose from "
                               f"{', '.join(a.name for a in cls)}") from None


@dataclass
class RunTrace:
    """Per-iteration record of one engine run.

    Entry 0 describes the initial filter bank before any update. For each
    entry: network sum-rate (bits), forward DLT objective, the worst
    relative deviation of any filter norm from its power budget, per-user
    (rx, tx) active stream counts, and seconds elapsed since the run
    started (the only field that is not a pure function of the inputs).
    """

    sum_rate: list = field(default_factory=list)
    dlt_fwd: list = field(default_factory=list)
    filter_norm_dev: list = field(default_factory=list)
    active_ranks: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)

    def append(self, sum_rate, dlt_fwd, filter_norm_dev, active_ranks, wall_time):
        self.sum_rate.append(sum_rate)
        self.dlt_fwd.append(dlt_fwd)
        self.filter_norm_dev.append(filter_norm_dev)
        self.active_ranks.append(active_ranks)
        self.wall_time.append(wall_time)

    def __len__(self):
        return len(self.sum_rate)


def _normalize(mat, budget):
    norm = np.linalg.norm(mat, "fro")
    if norm == 0.0:
        raise InvalidInput("cannot normalize an all-zero filter")
    return mat * (np.sqrt(budget) / norm)


def init_filters(cfg: NetworkConfig, ch: ChannelSet, policy: str = "eigen", seed: int = 0) -> FilterBank:
    """Build the starting filter bank.

    ``eigen``: per-link SVD beamformers (deterministic, matches the
    uncoordinated baseline at T=0). ``random``: orthonormalized Gaussian
    columns, deterministic in the seed. Both meet the power budgets exactly.
    """
    u = np.zeros((cfg.L, cfg.K, cfg.N, cfg.d), dtype=complex)
    v = np.zeros((cfg.L, cfg.K, cfg.M, cfg.d), dtype=complex)
    if policy == "eigen":
        for (l, k) in cfg.users():
            v_lk, u_lk = eigen_beamform(ch.direct((l, k)), cfg.d, cfg.tx_power)
            v[l, k] = v_lk
            u[l, k] = u_lk * np.sqrt(cfg.rx_filter_power / cfg.d)
    elif policy == "random":
        rng = np.random.default_rng(seed)
        for (l, k) in cfg.users():
            gu = rng.standard_normal((cfg.N, cfg.d)) + 1j * rng.standard_normal((cfg.N, cfg.d))
            gv = rng.standard_normal((cfg.M, cfg.d)) + 1j * rng.standard_normal((cfg.M, cfg.d))
            qu, _ = np.linalg.qr(gu)
            qv, _ = np.linalg.qr(gv)
            u[l, k] = qu * np.sqrt(cfg.rx_filter_power / cfg.d)
            v[l, k] = qv * np.sqrt(cfg.tx_power / cfg.d)
    else:
        raise InvalidInput(f"unknown init policy {policy!r} (use 'eigen' or 'random')")
    return FilterBank(u=u, v=v)


def _norm_deviation(cfg: NetworkConfig, fb: FilterBank) -> float:
    dev = 0.0
    for n in cfg.users():
        dev = max(dev, abs(np.linalg.norm(fb.rx(n), "fro") ** 2 - cfg.rx_filter_power) / cfg.rx_filter_power)
        dev = max(dev, abs(np.linalg.norm(fb.tx(n), "fro") ** 2 - cfg.tx_power) / cfg.tx_power)
    return dev


def _padded(mat, cols):
    """Zero-pad a tall matrix to the bank's fixed stream width."""
    if mat.shape[1] == cols:
        return mat
    out = np.zeros((mat.shape[0], cols), dtype=complex)
    out[:, : mat.shape[1]] = mat
    return out


def _annotate(exc: MimocoordError, node, phase, iteration):
    return type(exc)(f"{exc} [node={node}, phase={phase}, iteration={iteration}]")


def run(
    algo: AlgorithmId,
    cfg: NetworkConfig,
    ch: ChannelSet,
    T: int,
    seed: int = 0,
    init: str = "eigen",
    ra_last_iter_only: bool = False,
):
    """Execute T forward-backward rounds of the chosen algorithm.

    Returns (final FilterBank, RunTrace). Trace entry t is recorded after
    the backward phase of round t completes; with T=0 only the initial
    entry exists and the filters are returned untouched.

    The uncoordinated baseline consumes no coordination rounds: it applies
    per-link eigen-beamforming once (for any T >= 1) and its trace holds the
    initial entry plus that single assignment.

    AIMS with rank adaptation recomputes each pair's stream count fresh at
    the start of every round as min(receive-side rank, transmit-side rank),
    so both phases of a round use one shared rank per pair and a collapsed
    rank can revive later. ``ra_last_iter_only=True`` restricts adaptation
    to the final round (plain AIMS before).

    max-DLT node updates carry a monotone acceptance rule: the waterfilled
    candidate replaces the incumbent filter only if it does not decrease
    that node's DLT term. The waterfilling direction basis is exactly
    optimal only under homogeneous stream costs, so without the rule an
    interference-limited update can regress the bound; with it the traced
    objective is non-decreasing by construction, as the block-descent
    convergence argument requires.
    """
    if T < 0:
        raise InvalidInput("T must be non-negative")
    if not isinstance(algo, AlgorithmId):
        algo = AlgorithmId.parse(str(algo))
    fb = init_filters(cfg, ch, policy=init, seed=seed)
    users = cfg.users()
    started = time.perf_counter()
    trace = RunTrace()

    def snapshot(ranks):
        trace.append(
            sum_rate(cfg, ch, fb),
            dlt_objective(cfg, ch, fb, "forward"),
            _norm_deviation(cfg, fb),
            dict(ranks),
            time.perf_counter() - started,
        )

    full_ranks = {n: (cfg.d, cfg.d) for n in users}
    snapshot(full_ranks)
    if T == 0:
        return fb, trace

    if algo is AlgorithmId.UNCOORDINATED:
        for n in users:
            l, k = n
            v_lk, u_lk = eigen_beamform(ch.direct(n), cfg.d, cfg.tx_power)
            fb.v[l, k] = v_lk
            fb.u[l, k] = u_lk * np.sqrt(cfg.rx_filter_power / cfg.d)
        snapshot(full_ranks)
        return fb, trace

    carried_ranks = dict(full_ranks)
    for t in range(1, T + 1):
        ranks = dict(full_ranks) if algo is not AlgorithmId.MAX_DLT else dict(carried_ranks)
        fwd = all_fwd_covariances(cfg, ch, fb)

        if algo is AlgorithmId.AIMS_RA and (not ra_last_iter_only or t == T):
            rev0 = all_rev_covariances(cfg, ch, fb)
            for n in users:
                try:
                    r_rx = rank_adapt(fwd[n].r, fwd[n].q, cfg.d)
                    r_tx = rank_adapt(rev0[n].r, rev0[n].q, cfg.d)
                except MimocoordError as exc:
                    raise _annotate(exc, n, "rank", t) from exc
                shared = min(r_rx, r_tx)
                ranks[n] = (shared, shared)

        # Forward phase: receive filter updates from (R, Q).
        for n in users:
            l, k = n
            cov = fwd[n]
            try:
                if algo in (AlgorithmId.AIMS, AlgorithmId.AIMS_RA):
                    new_u = gmrq_max(cov.r, cov.q, ranks[n][0])
                    fb.u[l, k] = _normalize(_padded(new_u, cfg.d), cfg.rx_filter_power)
                elif algo is AlgorithmId.MAX_DLT:
                    out = nh_waterfill(cov.r, cov.q, cfg.d, cfg.rx_filter_power)
                    if dlt_user_lb(out.filter, cov) >= dlt_user_lb(fb.u[l, k], cov):
                        fb.u[l, k] = out.filter
                        ranks[n] = (out.active_streams, ranks[n][1])
                elif algo is AlgorithmId.MAX_SINR:
                    fb.u[l, k] = max_sinr_update(cfg, ch, fb, n, "forward")
                else:
                    raise InvalidInput(f"unsupported algorithm {algo}")
            except MimocoordError as exc:
                raise _annotate(exc, n, "forward", t) from exc

        # Backward phase: transmit filter updates from the reverse network.
        rev = all_rev_covariances(cfg, ch, fb)
        for n in users:
            l, k = n
            cov = rev[n]
            try:
                if algo in (AlgorithmId.AIMS, AlgorithmId.AIMS_RA):
                    new_v = gmrq_max(cov.r, cov.q, ranks[n][1])
                    fb.v[l, k] = _normalize(_padded(new_v, cfg.d), cfg.tx_power)
                elif algo is AlgorithmId.MAX_DLT:
                    out = nh_waterfill(cov.r, cov.q, cfg.d, cfg.tx_power)
                    if dlt_user_lb(out.filter, cov) >= dlt_user_lb(fb.v[l, k], cov):
                        fb.v[l, k] = out.filter
                        ranks[n] = (ranks[n][0], out.active_streams)
                elif algo is AlgorithmId.MAX_SINR:
                    fb.v[l, k] = max_sinr_update(cfg, ch, fb, n, "reverse")
            except MimocoordError as exc:
                raise _annotate(exc, n, "backward", t) from exc

        carried_ranks = dict(ranks)
        snapshot(ranks)

    return fb, trace


OVERHEAD_FAMILIES = ("prop", "wmmse", "ccp_wmmse")


def overhead(algo_family: str, T: int, K: int, L: int, M: int = 0, N: int = 0, d: int = 0, I: int = 0) -> int:
    """Analytic pilot overhead in channel uses for T coordination rounds.

    ``prop`` covers the forward-backward family (AIMS, max-DLT, max-SINR,
    and similar): d orthogonal pilots per user per direction. ``wmmse`` adds
    the per-round weight feedback; ``ccp_wmmse`` adds cross-cell CSI sharing
    plus I over-the-air turbo rounds.
    """
    values = {"T": T, "K": K, "L": L, "M": M, "N": N, "I": I, "d": d}
    for name, value in values.items():
        if not isinstance(value, (int, np.integer)) or value < 0:
            raise InvalidInput(f"{name} must be a non-negative integer, got {value!r}")
    if algo_family == "prop":
        return 2 * T * K * L * d
    if algo_family == "wmmse":
        return T * (K * L * d + K * L * M + K * L * d)
    if algo_family == "ccp_wmmse":
        return T * (K * L * M * (L - 1) + I * K * L * N)
    raise InvalidInput(f"unknown overhead family {algo_family!r}; choose from {OVERHEAD_FAMILIES}")
