"""Experiment runner: config parsing, seeded Monte-Carlo sweeps, CSV output.

An experiment is a grid of (algorithm, iteration count, SNR point) cells,
each averaged over seeded channel realizations. Channel and filter-init
seeds are derived from the master seed and the channel-relevant grid axes
only (SNR point and realization index), so every algorithm and every T value
sees the same channel ensemble and rows are independent of worker count.
"""

import concurrent.futures
import configparser
import csv
import io
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .chanmodel import DeploymentSpec, calibrate_noise, dense_drop, iid_channels
from .coord import AlgorithmId, overhead, run
from .errors import ParseError, ValidationError
from .netmodel import NetworkConfig

CSV_HEADER = [
    "algo", "L", "K", "M", "N", "d", "T", "snr_db", "realization",
    "sum_rate_bits", "dlt_objective", "overhead", "wall_time_s",
]

DEFAULT_REALIZATIONS = 500
DEFAULT_ITERATIONS = [4]
DEFAULT_SNR_DB = [20.0]

# Seed-derivation stream tags (documented counter scheme: the seed of each
# random draw is SeedSequence([master_seed, tag, snr_index, realization])).
_CHANNEL_STREAM = 0
_INIT_STREAM = 1


@dataclass(frozen=True)
class IidChannelSpec:
    """Unit-variance Rayleigh ensemble swept over SNR points (dB)."""

    snr_db_list: tuple


@dataclass(frozen=True)
class DenseChannelSpec:
    """Grid deployment ensemble calibrated to one effective-SNR target (dB)."""

    deployment: DeploymentSpec
    target_snr_db: float


@dataclass(frozen=True)
class ExperimentSpec:
    network: NetworkConfig
    channel: object
    algos: tuple
    iteration_list: tuple
    realizations: int = DEFAULT_REALIZATIONS
    master_seed: int = 0
    output_path: str = "results.csv"
    init_policy: str = "eigen"

    def __post_init__(self):
        if self.realizations < 1:
            raise ValidationError("realizations must be at least 1")
        if not self.algos:
            raise ValidationError("algos must be non-empty")
        if not self.iteration_list:
            raise ValidationError("iteration_list must be non-empty")
        if any(t < 0 for t in self.iteration_list):
            raise ValidationError("iteration counts must be non-negative")

    def snr_points(self):
        if isinstance(self.channel, IidChannelSpec):
            return list(self.channel.snr_db_list)
        return [self.channel.target_snr_db]


@dataclass(frozen=True)
class ResultRow:
    algo: str
    L: int
    K: int
    M: int
    N: int
    d: int
    T: int
    snr_db: float
    realization: int
    sum_rate_bits: float
    dlt_objective: float
    overhead: int
    wall_time_s: float


@dataclass(frozen=True)
class RowFailure:
    algo: str
    T: int
    snr_db: float
    realization: int
    message: str


def _derive_seed(master_seed, stream, snr_index, realization):
    ss = np.random.SeedSequence([int(master_seed), stream, int(snr_index), int(realization)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _get(section, key, cast, default=None, invariant=None):
    if key not in section:
        if default is not None:
            return default
        raise ValidationError(f"missing required key '{key}' in section [{section.name}]")
    raw = section[key]
    try:
        return cast(raw)
    except (TypeError, ValueError):
        kind = getattr(cast, "__name__", str(cast))
        hint = f" ({invariant})" if invariant else ""
        raise ValidationError(f"key '{key}' must parse as {kind}{hint}, got {raw!r}") from None


def _parse_list(cast):
    def inner(raw):
        return tuple(cast(item.strip()) for item in raw.split(",") if item.strip())

    return inner


def parse_experiment(text: str) -> ExperimentSpec:
    """Parse the line-oriented key = value config format.

    Sections: [network] (L, K, M, N, d, optional P_t / P_r), [channel]
    (type = iid with snr_db or type = dense with deployment fields), and
    [run] (algos, iterations, realizations, master_seed, output, init).
    Defaults: realizations 500, iterations 4, snr_db 20, eigen init,
    master_seed 0, P_t = P_r = 1.
    """
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        detail = f" (line {lineno})" if lineno else ""
        raise ParseError(f"config parse failure{detail}: {exc}") from exc

    if "network" not in parser:
        raise ValidationError("missing required section [network]")
    net = parser["network"]
    try:
        network = NetworkConfig(
            cells=_get(net, "l", int),
            users_per_cell=_get(net, "k", int),
            tx_antennas=_get(net, "m", int),
            rx_antennas=_get(net, "n", int),
            streams=_get(net, "d", int),
            tx_power=_get(net, "p_t", float, default=1.0),
            rx_filter_power=_get(net, "p_r", float, default=1.0),
        )
    except Exception as exc:
        raise ValidationError(f"invalid [network] section: {exc}") from exc

    if "channel" not in parser:
        parser.add_section("channel")
    chan_section = parser["channel"]
    chan_type = (chan_section.get("type", "iid") or "iid").strip().lower()
    if chan_type == "iid":
        snr = _get(chan_section, "snr_db", _parse_list(float), default=tuple(DEFAULT_SNR_DB))
        channel = IidChannelSpec(snr_db_list=snr)
    elif chan_type == "dense":
        try:
            deployment = DeploymentSpec(
                cells=network.cells,
                cell_radius=_get(chan_section, "cell_radius", float, default=10.0),
                carrier_freq=_get(chan_section, "carrier_freq", float, default=28e9),
                pathloss_exponent=_get(chan_section, "pathloss_exponent", float, default=3.4),
                shadowing_std=_get(chan_section, "shadowing_std", float, default=9.0),
                min_distance=_get(chan_section, "min_distance", float, default=1.0),
                rician_k=_get(chan_section, "rician_k", float, default=0.0),
            )
        except Exception as exc:
            raise ValidationError(f"invalid [channel] section: {exc}") from exc
        channel = DenseChannelSpec(
            deployment=deployment,
            target_snr_db=_get(chan_section, "target_snr_db", float, default=19.0),
        )
    else:
        raise ValidationError(f"channel type must be 'iid' or 'dense', got {chan_type!r}")

    run_section = parser["run"] if "run" in parser else None
    if run_section is not None:
        algos = tuple(
            AlgorithmId.parse(a)
            for a in _get(run_section, "algos", _parse_list(str), default=("max_dlt",))
        )
        iterations = _get(run_section, "iterations", _parse_list(int),
                          default=tuple(DEFAULT_ITERATIONS))
        realizations = _get(run_section, "realizations", int, default=DEFAULT_REALIZATIONS)
        master_seed = _get(run_section, "master_seed", int, default=0)
        output_path = run_section.get("output", "results.csv")
        init_policy = run_section.get("init", "eigen")
    else:
        algos = (AlgorithmId.MAX_DLT,)
        iterations = tuple(DEFAULT_ITERATIONS)
        realizations = DEFAULT_REALIZATIONS
        master_seed = 0
        output_path = "results.csv"
        init_policy = "eigen"

    try:
        return ExperimentSpec(
            network=network,
            channel=channel,
            algos=algos,
            iteration_list=tuple(iterations),
            realizations=realizations,
            master_seed=master_seed,
            output_path=output_path,
            init_policy=init_policy,
        )
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(str(exc)) from exc


def serialize_experiment(spec: ExperimentSpec) -> str:
    """Render a spec back to config text; parse(serialize(spec)) == spec."""
    out = io.StringIO()
    net = spec.network
    out.write("[network]\n")
    out.write(f"l = {net.cells}\nk = {net.users_per_cell}\nm = {net.tx_antennas}\n")
    out.write(f"n = {net.rx_antennas}\nd = {net.streams}\n")
    out.write(f"p_t = {net.tx_power!r}\np_r = {net.rx_filter_power!r}\n\n")
    out.write("[channel]\n")
    if isinstance(spec.channel, IidChannelSpec):
        out.write("type = iid\n")
        out.write("snr_db = " + ", ".join(repr(s) for s in spec.channel.snr_db_list) + "\n\n")
    else:
        dep = spec.channel.deployment
        out.write("type = dense\n")
        out.write(f"cell_radius = {dep.cell_radius!r}\ncarrier_freq = {dep.carrier_freq!r}\n")
        out.write(f"pathloss_exponent = {dep.pathloss_exponent!r}\n")
        out.write(f"shadowing_std = {dep.shadowing_std!r}\nmin_distance = {dep.min_distance!r}\n")
        out.write(f"rician_k = {dep.rician_k!r}\n")
        out.write(f"target_snr_db = {spec.channel.target_snr_db!r}\n\n")
    out.write("[run]\n")
    out.write("algos = " + ", ".join(a.name.lower() for a in spec.algos) + "\n")
    out.write("iterations = " + ", ".join(str(t) for t in spec.iteration_list) + "\n")
    out.write(f"realizations = {spec.realizations}\nmaster_seed = {spec.master_seed}\n")
    out.write(f"output = {spec.output_path}\ninit = {spec.init_policy}\n")
    return out.getvalue()


def _realize_row(spec: ExperimentSpec, algo: AlgorithmId, T: int, snr_index: int,
                 snr_db: float, realization: int) -> ResultRow:
    net = spec.network
    chan_seed = _derive_seed(spec.master_seed, _CHANNEL_STREAM, snr_index, realization)
    init_seed = _derive_seed(spec.master_seed, _INIT_STREAM, snr_index, realization)

    if isinstance(spec.channel, IidChannelSpec):
        sigma2 = 10.0 ** (-snr_db / 10.0)
        cfg = replace(net, noise_fwd=sigma2)
        ch = iid_channels(cfg, seed=chan_seed)
    else:
        ch, _ = dense_drop(replace(net, noise_fwd=1.0), spec.channel.deployment, seed=chan_seed)
        sigma2 = calibrate_noise(ch, net, spec.channel.target_snr_db)
        cfg = replace(net, noise_fwd=sigma2)

    started = time.perf_counter()
    _, trace = run(algo, cfg, ch, T=T, seed=init_seed, init=spec.init_policy)
    elapsed = time.perf_counter() - started

    if algo is AlgorithmId.UNCOORDINATED:
        pilots = 0
    else:
        pilots = overhead("prop", T, net.users_per_cell, net.cells, d=net.streams)
    return ResultRow(
        algo=algo.name.lower(),
        L=net.cells, K=net.users_per_cell, M=net.tx_antennas, N=net.rx_antennas,
        d=net.streams, T=T, snr_db=snr_db, realization=realization,
        sum_rate_bits=trace.sum_rate[-1],
        dlt_objective=trace.dlt_fwd[-1],
        overhead=pilots,
        wall_time_s=elapsed,
    )


def _task(args):
    spec, algo_name, T, snr_index, snr_db, realization = args
    algo = AlgorithmId[algo_name]
    try:
        return _realize_row(spec, algo, T, snr_index, snr_db, realization), None
    except Exception as exc:  # failure must not abort the sweep
        return None, RowFailure(algo=algo_name.lower(), T=T, snr_db=snr_db,
                                realization=realization, message=str(exc))


def run_experiment(spec: ExperimentSpec, workers: int = 1,
                   failure_log: Optional[list] = None) -> list:
    """Run the full grid and return rows sorted by grid indices.

    Per-row failures are collected into ``failure_log`` (when given) instead
    of aborting. All result fields except ``wall_time_s`` are a pure
    function of the spec.
    """
    tasks = []
    for algo in spec.algos:
        for T in spec.iteration_list:
            for snr_index, snr_db in enumerate(spec.snr_points()):
                for realization in range(spec.realizations):
                    tasks.append((spec, algo.name, T, snr_index, snr_db, realization))

    if workers <= 1:
        outcomes = [_task(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_task, tasks, chunksize=8))

    rows = []
    for row, failure in outcomes:
        if row is not None:
            rows.append(row)
        elif failure_log is not None:
            failure_log.append(failure)
    order = {algo.name.lower(): i for i, algo in enumerate(spec.algos)}
    rows.sort(key=lambda r: (order[r.algo], r.T, r.snr_db, r.realization))
    return rows


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def emit_csv(rows, path):
    """Write rows to CSV: exact header order, 12 significant digits."""
    if not rows:
        raise ValidationError("refusing to write an empty result set")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([
                row.algo, row.L, row.K, row.M, row.N, row.d, row.T,
                _fmt(row.snr_db), row.realization,
                _fmt(row.sum_rate_bits), _fmt(row.dlt_objective),
                row.overhead, _fmt(row.wall_time_s),
            ])


def read_csv(path):
    """Read an emitted CSV back into ResultRow objects."""
    rows = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        for rec in reader:
            rows.append(ResultRow(
                algo=rec["algo"], L=int(rec["L"]), K=int(rec["K"]), M=int(rec["M"]),
                N=int(rec["N"]), d=int(rec["d"]), T=int(rec["T"]),
                snr_db=float(rec["snr_db"]), realization=int(rec["realization"]),
                sum_rate_bits=float(rec["sum_rate_bits"]),
                dlt_objective=float(rec["dlt_objective"]),
                overhead=int(rec["overhead"]), wall_time_s=float(rec["wall_time_s"]),
            ))
    return rows


def summarize(rows) -> str:
    """Console table: mean and standard error per (algo, T, snr) group."""
    if not rows:
        raise ValidationError("nothing to summarize")
    groups = {}
    for row in rows:
        groups.setdefault((row.algo, row.T, row.snr_db), []).append(row.sum_rate_bits)
    lines = [f"{'algo':<14} {'T':>4} {'snr_db':>8} {'n':>5} {'mean_bits':>12} {'stderr':>10}"]
    for (algo, T, snr), vals in sorted(groups.items()):
        arr = np.asarray(vals)
        stderr = arr.std(ddof=1) / np.sqrt(arr.size) if arr.size > 1 else 0.0
        lines.append(f"{algo:<14} {T:>4} {snr:>8.2f} {arr.size:>5} {arr.mean():>12.4f} {stderr:>10.4f}")
    return "\n".join(lines)
