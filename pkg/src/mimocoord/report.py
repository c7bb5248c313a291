"""Figure rendering for benchmark results.

Consumes the CSV emitted by the runner and writes ergodic sum-rate figures
(vs iteration count and vs SNR) next to it. Kept separate from the runner:
the CSV is the data contract, figures are a view of it.
"""

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ValidationError


def _grouped_means(rows):
    """mean sum-rate per (algo, T, snr_db)."""
    acc = defaultdict(list)
    for row in rows:
        acc[(row.algo, row.T, row.snr_db)].append(row.sum_rate_bits)
    return {key: sum(vals) / len(vals) for key, vals in acc.items()}


def _save(fig, outdir, name, written):
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def render_figures(rows, outdir):
    """Render sum-rate-vs-T and sum-rate-vs-SNR figures; return written paths.

    One vs-T figure per SNR point (when several T values exist) and one
    vs-SNR figure per T (when several SNR points exist), one curve per
    algorithm in each.
    """
    if not rows:
        raise ValidationError("no rows to plot")
    os.makedirs(outdir, exist_ok=True)
    means = _grouped_means(rows)
    algos = sorted({a for a, _, _ in means})
    t_values = sorted({t for _, t, _ in means})
    snr_values = sorted({s for _, _, s in means})
    written = []

    if len(t_values) > 1:
        for snr in snr_values:
            fig, ax = plt.subplots(figsize=(6.0, 4.0))
            for algo in algos:
                pts = [(t, means[(algo, t, snr)]) for t in t_values if (algo, t, snr) in means]
                if pts:
                    ax.plot(*zip(*pts), marker="o", label=algo)
            ax.set_xlabel("forward-backward iterations T")
            ax.set_ylabel("ergodic sum-rate [bits/channel use]")
            ax.set_title(f"sum-rate vs T at {snr:g} dB")
            ax.grid(True, alpha=0.4)
            ax.legend()
            _save(fig, outdir, f"sumrate_vs_T_snr{snr:g}dB.png", written)

    if len(snr_values) > 1:
        for t in t_values:
            fig, ax = plt.subplots(figsize=(6.0, 4.0))
            for algo in algos:
                pts = [(s, means[(algo, t, s)]) for s in snr_values if (algo, t, s) in means]
                if pts:
                    ax.plot(*zip(*pts), marker="s", label=algo)
            ax.set_xlabel("SNR 1/sigma^2 [dB]")
            ax.set_ylabel("ergodic sum-rate [bits/channel use]")
            ax.set_title(f"sum-rate vs SNR at T={t}")
            ax.grid(True, alpha=0.4)
            ax.legend()
            _save(fig, outdir, f"sumrate_vs_snr_T{t}.png", written)

    if not written:
        # Single grid point: bar chart of per-algorithm means.
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        t, snr = t_values[0], snr_values[0]
        vals = [means[(algo, t, snr)] for algo in algos]
        ax.bar(algos, vals)
        ax.set_ylabel("ergodic sum-rate [bits/channel use]")
        ax.set_title(f"sum-rate at T={t}, {snr:g} dB")
        ax.grid(True, axis="y", alpha=0.4)
        _save(fig, outdir, f"sumrate_T{t}_snr{snr:g}dB.png", written)

    return written
