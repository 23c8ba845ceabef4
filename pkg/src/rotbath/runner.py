"""Scenario execution: dispatch to the computation modules, write outputs.

One scenario in, a directory of flat comma-delimited files out.  Every file
starts with '#'-prefixed metadata (tool version, scenario hash and the full
canonical scenario text, bath parameters, seed, status), followed by a
column-name row and data rows with floats printed to 17 significant
digits.  Outputs are byte-identical for identical scenarios and seeds at
any thread count: per-mode work is embarrassingly parallel and results are
always emitted in (omega, m, alpha) order, and stochastic runs derive one
substream per mode from the scenario seed.

Runaway conditions (a superradiant mean crossing its ceiling, or the
birth-death cutoff hitting its hard limit) do not destroy the run: partial
output is written, the status goes into the headers, and the caller gets a
nonzero exit code.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bathmodels import (
    flat_spectrum,
    hawking_spectrum,
    load_correlation,
    ohmic_spectrum,
    spectrum_from_correlation_model,
)
from .birthdeath import (
    HARD_CEILING,
    ModeDistribution,
    NonlinearParams,
    RunawayTruncationError,
    delta_state,
    evolve_distribution,
    geometric_state,
    gillespie,
)
from .classical import ShearConfig, comoving_frequency, energy_split, shear_classify
from .core import BathSpec, Mode, Statistics, local_beta, rates
from .core import LocalTemperatureError
from .kinetics import emission_spectrum, evolve_mean
from .scenario import (
    BathConfig,
    ModeGrid,
    Scenario,
    print_scenario,
    scenario_hash,
)
from .thermo import LedgerComponent, bh_ledger, build_ledger


@dataclass
class RunResult:
    status: str
    out_dir: Path
    files: list[Path] = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def build_bath(cfg: BathConfig, base_dir: Path | str = ".") -> BathSpec:
    """Construct the BathSpec described by a scenario's [bath] section."""
    if cfg.family == "ohmic":
        spec = ohmic_spectrum(cfg.amplitude, cfg.exponent, cfg.cutoff, cfg.beta)
    elif cfg.family == "flat":
        spec = flat_spectrum(cfg.level, cfg.beta)
    elif cfg.family == "hawking":
        spec = hawking_spectrum(cfg.formfactor, cfg.beta)
    elif cfg.family == "correlation":
        corr = load_correlation(Path(base_dir) / cfg.file)
        spec = spectrum_from_correlation_model(corr)
    else:
        raise ValueError(f"unknown bath family {cfg.family!r}")
    return BathSpec(cfg.beta, cfg.omega_rot, spec)


def expand_modes(modes_config) -> list[Mode]:
    """Materialize the mode list, sorted by (omega, m, alpha)."""
    modes: list[Mode] = []
    if isinstance(modes_config, ModeGrid):
        g = modes_config
        omegas = np.linspace(g.omega_start, g.omega_stop, g.omega_count)
        for m in range(g.m_min, g.m_max + 1):
            for omega in omegas:
                modes.append(Mode(float(omega), m, Statistics(g.statistics), g.alpha))
    else:
        for e in modes_config:
            modes.append(Mode(e.omega, e.m, Statistics(e.statistics), e.alpha))
    return sorted(modes, key=Mode.sort_key)


# ---------------------------------------------------------------------------
# Output formatting
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if hasattr(value, "value"):  # str enums
        return str(value.value)
    return str(value)


def _write_csv(path: Path, meta: list[str], columns: list[str], rows) -> Path:
    with open(path, "w", newline="\n") as handle:
        for line in meta:
            handle.write(f"# {line}\n")
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _meta_lines(s: Scenario, status: str, extra: list[str] = ()) -> list[str]:
    lines = [
        f"rotbath {__version__}",
        f"scenario-sha256: {scenario_hash(s)}",
        "units: hbar = k_B = 1 (energies, rates, temperatures in natural units)",
        f"beta = {_fmt(s.bath.beta)}",
        f"omega_rot = {_fmt(s.bath.omega_rot)}",
        f"seed = {s.run.seed if s.run.seed is not None else 'none'}",
        f"status = {status}",
        *extra,
        "scenario (canonical, reparseable after stripping '# | '):",
    ]
    lines += [f"| {line}" for line in print_scenario(s).splitlines()]
    return lines


def _map_modes(fn, items, threads: int):
    """Order-preserving map over per-mode work items."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _initial_state(run, statistics: Statistics) -> np.ndarray:
    if run.nbar0 is not None:
        return geometric_state(run.nbar0, statistics, run.tail_tol)
    return delta_state(run.n0 or 0, statistics)


def _time_grid(run) -> np.ndarray:
    return np.linspace(0.0, run.t_max, run.points)


def _rate_scale(rate_sets) -> float:
    scale = max((max(r.gamma_down, r.gamma_up) for r in rate_sets), default=0.0)
    return scale if scale > 0.0 else 1.0


# ---------------------------------------------------------------------------
# Per-kind runs
# ---------------------------------------------------------------------------

def _run_rates(s, bath, modes, threads, out, files, plots):
    def one(mode):
        rs = rates(bath, mode)
        try:
            beta_loc = local_beta(bath, mode)
        except LocalTemperatureError:
            beta_loc = rs.beta_loc  # signed limit; the strict op is undefined here
        return (mode.omega, mode.m, mode.alpha, mode.statistics, rs.gamma_down,
                rs.gamma_up, beta_loc, rs.classification)

    rows = _map_modes(one, modes, threads)
    files.append(_write_csv(out / "rates.csv", _meta_lines(s, "ok"),
                            ["omega", "m", "alpha", "statistics", "gamma_down",
                             "gamma_up", "beta_loc", "classification"], rows))
    return "ok", ""


def _run_spectrum(s, bath, modes, threads, out, files, plots):
    entries = emission_spectrum(bath, modes)
    rows = [(m.omega, m.m, m.alpha, m.statistics, rate, cls)
            for (m, rate, cls) in entries]
    files.append(_write_csv(out / "spectrum.csv", _meta_lines(s, "ok"),
                            ["omega", "m", "alpha", "statistics", "rate",
                             "classification"], rows))
    if plots:
        from . import plotting
        files.append(plotting.spectrum_figure(out / "spectrum.png", entries))
    return "ok", ""


def _run_kinetics(s, bath, modes, threads, out, files, plots):
    t_grid = _time_grid(s.run)
    nbar0 = s.run.nbar0 if s.run.nbar0 is not None else float(s.run.n0 or 0)

    def one(mode):
        rs = rates(bath, mode)
        start = min(nbar0, 1.0) if mode.statistics is Statistics.FERMI else nbar0
        return evolve_mean(rs, mode.statistics, start, t_grid,
                           ceiling=s.run.ceiling, mode=mode)

    trajectories = _map_modes(one, modes, threads)
    rows = []
    status, message = "ok", ""
    for traj in trajectories:
        mode = traj.mode
        for t, n in zip(traj.times, traj.nbar):
            rows.append((mode.omega, mode.m, mode.alpha, mode.statistics, t, n))
        if traj.status != "ok":
            status = "exponential-runaway"
            message = (f"mode (omega={mode.omega:g}, m={mode.m}) crossed the "
                       f"population ceiling {s.run.ceiling:g}; trajectory truncated")
    files.append(_write_csv(out / "kinetics.csv", _meta_lines(s, status),
                            ["omega", "m", "alpha", "statistics", "time", "nbar"],
                            rows))
    if plots:
        from . import plotting
        files.append(plotting.kinetics_figure(out / "kinetics.png", trajectories))
    return status, message


def _snapshot_times(times: np.ndarray, count: int) -> np.ndarray:
    idx = np.unique(np.linspace(0, times.size - 1, min(count, times.size)).astype(int))
    return idx


def _run_birthdeath(s, bath, modes, threads, out, files, plots):
    t_grid = _time_grid(s.run)
    nl = NonlinearParams(s.run.kappa)

    def one(mode):
        rs = rates(bath, mode)
        p0 = _initial_state(s.run, mode.statistics)
        try:
            snaps = evolve_distribution(rs, mode.statistics, nl, p0, t_grid,
                                        s.run.tail_tol, mode=mode)
            return snaps, None
        except RunawayTruncationError as err:
            return err.partial, err

    results = _map_modes(one, modes, threads)
    status, message = "ok", ""
    moment_rows, dist_rows = [], []
    for mode, (snaps, err) in zip(modes, results):
        if err is not None:
            status = "runaway-truncation"
            message = (f"mode (omega={mode.omega:g}, m={mode.m}): {err}; "
                       f"partial output retained")
        for d in snaps:
            moment_rows.append((mode.omega, mode.m, mode.alpha, mode.statistics,
                                d.time, d.mean(), d.variance()))
        times = np.array([d.time for d in snaps])
        for i in _snapshot_times(times, s.run.snapshots):
            d = snaps[i]
            for n, p in enumerate(d.probs):
                if p > 0.0:
                    dist_rows.append((mode.omega, mode.m, mode.alpha, d.time, n, p))
    files.append(_write_csv(out / "bd_moments.csv", _meta_lines(s, status),
                            ["omega", "m", "alpha", "statistics", "time", "mean",
                             "variance"], moment_rows))
    files.append(_write_csv(out / "bd_distribution.csv", _meta_lines(s, status),
                            ["omega", "m", "alpha", "time", "n", "p"], dist_rows))
    if plots:
        from . import plotting
        files.append(plotting.birthdeath_figure(out / "birthdeath.png", modes, results))
    return status, message


def _run_gillespie(s, bath, modes, threads, out, files, plots):
    nl = NonlinearParams(s.run.kappa)
    # one derived substream per mode; fixed by the scenario seed alone
    mode_seeds = np.random.SeedSequence(s.run.seed).generate_state(len(modes))

    def one(pair):
        idx, mode = pair
        rs = rates(bath, mode)
        n0 = s.run.n0 or 0
        if mode.statistics is Statistics.FERMI:
            n0 = min(n0, 1)
        return gillespie(rs, mode.statistics, nl, n0, s.run.t_max,
                         s.run.n_traj, int(mode_seeds[idx]),
                         n_bins=s.run.bins, n_sample_paths=s.run.sample_paths)

    results = _map_modes(one, list(enumerate(modes)), threads)
    meta = _meta_lines(s, "ok", [f"rng = {results[0].rng_algorithm}" if results else "rng = numpy-PCG64"])
    rows = []
    for mode, res in zip(modes, results):
        for t, mean, var in zip(res.times, res.mean, res.variance):
            rows.append((mode.omega, mode.m, mode.alpha, t, mean, var, res.n_traj))
    files.append(_write_csv(out / "gillespie.csv", meta,
                            ["omega", "m", "alpha", "time", "mean", "variance",
                             "n_traj"], rows))
    if s.run.sample_paths > 0:
        path_rows = []
        for mode, res in zip(modes, results):
            for p_idx, (times, states) in enumerate(res.sample_paths):
                for t, n in zip(times, states):
                    path_rows.append((mode.omega, mode.m, mode.alpha, p_idx, t, int(n)))
        files.append(_write_csv(out / "gillespie_paths.csv", meta,
                                ["omega", "m", "alpha", "path", "time", "n"],
                                path_rows))
    if plots:
        from . import plotting
        files.append(plotting.gillespie_figure(out / "gillespie.png", modes, results))
    return "ok", ""


def _run_thermo(s, bath, modes, threads, out, files, plots):
    nl = NonlinearParams(s.run.kappa)
    rate_sets = [rates(bath, m) for m in modes]
    dt = s.run.t_max / s.run.points
    times = dt * np.arange(1, s.run.points + 1)
    h = s.run.fd_step if s.run.fd_step is not None else 1e-3 / _rate_scale(rate_sets)
    h = min(h, dt / 4.0)
    union = np.unique(np.concatenate([[0.0], times - h, times, times + h]))
    center_idx = np.searchsorted(union, times)

    def one(pair):
        mode, rs = pair
        p0 = _initial_state(s.run, mode.statistics)
        try:
            snaps = evolve_distribution(rs, mode.statistics, nl, p0, union,
                                        s.run.tail_tol, mode=mode)
            return snaps, None
        except RunawayTruncationError as err:
            return err.partial, err

    results = _map_modes(one, list(zip(modes, rate_sets)), threads)
    status, message = "ok", ""
    n_done = min(len(snaps) for snaps, _ in results)
    for mode, (snaps, err) in zip(modes, results):
        if err is not None:
            status = "runaway-truncation"
            message = (f"mode (omega={mode.omega:g}, m={mode.m}): {err}; "
                       f"ledger truncated to the common reach")
    usable = [i for i, c in enumerate(center_idx) if c + 1 < n_done]
    components = [
        LedgerComponent(
            mode, rs,
            [snaps[center_idx[i] - 1].probs for i in usable],
            [snaps[center_idx[i]].probs for i in usable],
            [snaps[center_idx[i] + 1].probs for i in usable],
        )
        for (mode, rs), (snaps, _) in zip(zip(modes, rate_sets), results)
    ]
    ledger = build_ledger(bath, components, times[usable], h, nl)
    extra = [f"fd_step = {_fmt(h)}"]
    if bool(np.any(ledger.floored)):
        extra.append("note: entropy-production log floor engaged on some samples")
    rows = list(zip(ledger.times, ledger.entropy, ledger.sigma, ledger.heat,
                    ledger.energy, ledger.angular_momentum,
                    ledger.residual_first, ledger.residual_second))
    files.append(_write_csv(out / "ledger.csv", _meta_lines(s, status, extra),
                            ["time", "S", "sigma", "J", "U", "Lz", "res1", "res2"],
                            rows))
    if plots:
        from . import plotting
        files.append(plotting.thermo_figure(out / "thermo.png", ledger))
    return status, message


def _run_shear(s, bath, modes, threads, out, files, plots):
    rows = []
    cases = []
    for case in s.shear:
        cfg = ShearConfig(case.V, case.v, case.k)
        regime = shear_classify(cfg)
        wave, dissipated = energy_split(cfg)
        rows.append((cfg.V, cfg.v, cfg.k, regime, wave, dissipated,
                     comoving_frequency(cfg.omega, cfg.V, cfg.v)))
        cases.append((cfg, regime, wave))
    files.append(_write_csv(out / "shear.csv", _meta_lines(s, "ok"),
                            ["V", "v", "k", "classification", "wave_fraction",
                             "dissipated_fraction", "omega_comoving"], rows))
    if plots:
        from . import plotting
        files.append(plotting.shear_figure(out / "shear.png", cases))
    return "ok", ""


def _run_bh_ledger(s, bath, modes, threads, out, files, plots):
    omega_rot = s.bath.omega_rot
    t_h = s.quanta.t_hawking
    rows = []
    for q in s.quanta.entries:
        entry = bh_ledger([(q.omega, q.m, q.count)], omega_rot, t_h)
        rows.append((q.omega, q.m, q.count, entry.d_mass,
                     entry.d_angular_momentum, entry.d_area))
    total = bh_ledger([(q.omega, q.m, q.count) for q in s.quanta.entries],
                      omega_rot, t_h)
    meta = _meta_lines(s, "ok", [f"t_hawking = {_fmt(t_h)}",
                                 "units: c = hbar = G = k_B = 1"])
    files.append(_write_csv(out / "bh_quanta.csv", meta,
                            ["omega", "m", "count", "dM", "dL", "dA"], rows))
    files.append(_write_csv(out / "bh_ledger.csv", meta, ["dM", "dL", "dA"],
                            [(total.d_mass, total.d_angular_momentum, total.d_area)]))
    return "ok", ""


_DISPATCH = {
    "rates": _run_rates,
    "spectrum": _run_spectrum,
    "kinetics": _run_kinetics,
    "birthdeath": _run_birthdeath,
    "gillespie": _run_gillespie,
    "thermo": _run_thermo,
    "shear": _run_shear,
    "bh-ledger": _run_bh_ledger,
}


def run_scenario(
    s: Scenario,
    *,
    out_dir: str | Path | None = None,
    seed: int | None = None,
    threads: int = 1,
    plots: bool | None = None,
    base_dir: str | Path = ".",
) -> RunResult:
    """Execute a scenario and write its output files.

    ``seed`` and ``plots`` override the scenario's values and are folded
    into the canonical text embedded in the headers, so a header always
    reproduces its run.  ``out_dir`` falls back to the scenario's [output]
    dir, resolved against ``base_dir``.
    """
    if seed is not None:
        s = replace(s, run=replace(s.run, seed=seed))
    if plots is not None:
        s = replace(s, output=replace(s.output, plots=plots))
    if s.run.kind == "gillespie" and s.run.seed is None:
        raise ValueError("gillespie runs require a seed")

    out = Path(out_dir) if out_dir is not None else Path(base_dir) / s.output.dir
    out.mkdir(parents=True, exist_ok=True)

    needs_bath = s.run.kind != "shear"
    bath = build_bath(s.bath, base_dir) if needs_bath else None
    modes = expand_modes(s.modes) if s.modes is not None else []

    files: list[Path] = []
    status, message = _DISPATCH[s.run.kind](s, bath, modes, threads, out, files,
                                            s.output.plots)
    return RunResult(status, out, files, message)
