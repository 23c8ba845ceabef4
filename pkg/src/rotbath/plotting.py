"""Figure rendering for the report path: PNG files next to the CSV output.

Headless (Agg) and deterministic: fixed sizes, no timestamps, and the
matplotlib software tag stripped from the PNG metadata so identical runs
produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE = dict(dpi=130, metadata={"Software": None})


def _finish(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def spectrum_figure(path, entries) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    by_m = {}
    for mode, rate, _cls in entries:
        by_m.setdefault(mode.m, []).append((mode.omega, rate))
    for m in sorted(by_m):
        pts = sorted(by_m[m])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=f"m = {m}")
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel("vacuum emission rate")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def kinetics_figure(path, trajectories) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for traj in trajectories:
        mode = traj.mode
        label = f"$\\omega$={mode.omega:g}, m={mode.m}" if mode else None
        ax.plot(traj.times, traj.nbar, label=label)
    ax.set_xlabel("time")
    ax.set_ylabel(r"$\bar n$")
    if trajectories and max(t.nbar.max() for t in trajectories) > 50.0:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def birthdeath_figure(path, modes, results) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    for mode, (snaps, _err) in zip(modes, results):
        if not snaps:
            continue
        times = [d.time for d in snaps]
        ax1.plot(times, [d.mean() for d in snaps],
                 label=f"$\\omega$={mode.omega:g}, m={mode.m}")
        final = snaps[-1]
        mask = final.probs > 0
        ax2.plot(np.arange(final.probs.size)[mask], final.probs[mask],
                 drawstyle="steps-mid")
    ax1.set_xlabel("time")
    ax1.set_ylabel(r"$\langle n \rangle$")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.set_xlabel("n")
    ax2.set_ylabel(r"$P_n$ (final)")
    ax2.grid(alpha=0.3)
    return _finish(fig, path)


def gillespie_figure(path, modes, results) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mode, res in zip(modes, results):
        band = np.sqrt(res.variance)
        line, = ax.plot(res.times, res.mean,
                        label=f"$\\omega$={mode.omega:g}, m={mode.m}")
        ax.fill_between(res.times, res.mean - band, res.mean + band,
                        alpha=0.2, color=line.get_color())
    ax.set_xlabel("time")
    ax.set_ylabel(r"ensemble $\langle n \rangle \pm \sigma$")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def thermo_figure(path, ledger) -> Path:
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0))
    panels = [
        (ledger.entropy, "S"),
        (ledger.sigma, r"$\sigma$"),
        (ledger.heat, "J"),
        (None, "residuals"),
    ]
    for ax, (series, label) in zip(axes.flat, panels):
        if series is not None:
            ax.plot(ledger.times, series)
        else:
            ax.semilogy(ledger.times, np.maximum(ledger.residual_first, 1e-300),
                        label="first law")
            finite = np.isfinite(ledger.residual_second)
            if finite.any():
                ax.semilogy(ledger.times[finite],
                            np.maximum(ledger.residual_second[finite], 1e-300),
                            label="second law")
            ax.legend(fontsize=8)
        ax.set_xlabel("time")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    return _finish(fig, path)


def shear_figure(path, cases) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    colors = {"stable": "tab:blue", "marginal": "tab:orange", "unstable": "tab:red"}
    for cfg, regime, wave in cases:
        ax.scatter(cfg.V / cfg.v, wave, color=colors[regime.value], s=24)
    ax.axvline(1.0, color="gray", lw=0.8)
    ax.axhline(1.0, color="gray", lw=0.8)
    ax.set_xlabel("V / v")
    ax.set_ylabel("wave energy fraction v / V")
    ax.grid(alpha=0.3)
    return _finish(fig, path)
