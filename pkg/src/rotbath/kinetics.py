"""Mean-occupation kinetics of a single mode.

The mean population obeys the linear one-dimensional flow

    d nbar / dt = gamma_up * (1 +/- nbar) - gamma_down * nbar

with + for bosons (stimulated emission) and - for fermions (Pauli
blocking).  The closed-form solution is an exponential relaxation toward
the Bose-Einstein or Fermi-Dirac occupation with chemical potential
m*Omega; for superradiant bosons the decay constant changes sign and the
population grows, at zero temperature exactly as
(1 + nbar0) * exp(gamma_up * t) - 1.  The marginal boundary omega = m*Omega
is the analytic 0/0 limit of the stable formula: linear growth
nbar0 + gamma_down * t.

The numeric integrator exists as the second, independent route to the same
trajectories; both are exercised against each other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import BathSpec, Classification, Mode, RateSet, Statistics, classify, rates

#: adaptive integration tolerances; tight enough that the 1e-8 absolute
#: oracle bound survives superradiant growth over ten e-folds
RTOL = 1e-12
ATOL = 1e-14

#: default population ceiling for superradiant runs
DEFAULT_CEILING = 1e12


class NoStationaryPopulationError(ValueError):
    """Asked for the asymptote of a mode that has none (marginal/superradiant Bose)."""


@dataclass(frozen=True)
class MeanTrajectory:
    """Mean occupation on a time grid, with the rates that produced it.

    ``status`` is "ok" for a completed run and "exponential-runaway" when a
    superradiant trajectory crossed the population ceiling; in that case
    the arrays stop at the last grid point before the crossing.
    """

    times: np.ndarray
    nbar: np.ndarray
    rates: RateSet
    statistics: Statistics
    mode: Mode | None = None
    status: str = "ok"


def _sign(statistics: Statistics) -> float:
    return 1.0 if statistics is Statistics.BOSE else -1.0


def decay_constant(rate_set: RateSet, statistics: Statistics) -> float:
    """Rate constant of the linear flow: gamma_down -/+ gamma_up.

    Positive for relaxing modes, zero at the bosonic marginal point,
    negative in the superradiant regime.
    """
    return rate_set.gamma_down - _sign(statistics) * rate_set.gamma_up


def mean_rhs(rate_set: RateSet, statistics: Statistics, nbar: float) -> float:
    """Right-hand side gamma_up*(1 +/- nbar) - gamma_down*nbar."""
    return rate_set.gamma_up * (1.0 + _sign(statistics) * nbar) - rate_set.gamma_down * nbar


def closed_form_mean(rate_set: RateSet, statistics: Statistics, nbar0: float, t: float) -> float:
    """Exact solution of the mean kinetic equation at time t >= 0.

    Covers all regimes through one expression: with
    lam = gamma_down -/+ gamma_up,

        nbar(t) = gamma_up/lam + (nbar0 - gamma_up/lam) * exp(-lam t)

    for lam != 0, and the marginal limit nbar0 + gamma_up * t otherwise.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    lam = decay_constant(rate_set, statistics)
    if lam == 0.0:
        return nbar0 + rate_set.gamma_up * t
    n_inf = rate_set.gamma_up / lam
    return n_inf + (nbar0 - n_inf) * math.exp(-lam * t)


def _check_initial(statistics: Statistics, nbar0: float):
    if nbar0 < 0.0:
        raise ValueError(f"initial occupation must be >= 0, got {nbar0!r}")
    if statistics is Statistics.FERMI and nbar0 > 1.0:
        raise ValueError(f"fermionic occupation cannot exceed 1, got {nbar0!r}")


def evolve_mean(
    rate_set: RateSet,
    statistics: Statistics,
    nbar0: float,
    t_grid,
    *,
    ceiling: float = DEFAULT_CEILING,
    mode: Mode | None = None,
) -> MeanTrajectory:
    """Adaptive integration of the mean kinetic equation on a fixed output grid.

    Dense output is interpolated onto ``t_grid`` (increasing, starting at
    0).  Growth past ``ceiling`` terminates the run with the
    "exponential-runaway" status; the linear model has no saturation.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be strictly increasing with at least two points")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    _check_initial(statistics, nbar0)

    def rhs(_t, y):
        return [mean_rhs(rate_set, statistics, y[0])]

    def hit_ceiling(_t, y):
        return y[0] - ceiling

    hit_ceiling.terminal = True
    hit_ceiling.direction = 1.0

    sol = solve_ivp(
        rhs,
        (t_grid[0], t_grid[-1]),
        [float(nbar0)],
        method="DOP853",
        t_eval=t_grid,
        rtol=RTOL,
        atol=ATOL,
        events=hit_ceiling,
    )
    if not sol.success and sol.status != 1:
        raise RuntimeError(f"mean integration failed: {sol.message}")

    nbar = sol.y[0]
    times = sol.t
    status = "ok"
    if sol.status == 1:  # ceiling event fired
        status = "exponential-runaway"
    if statistics is Statistics.FERMI:
        # integration noise at the boundary only; anything larger is a bug
        if np.any(nbar > 1.0 + 1e-9) or np.any(nbar < -1e-9):
            raise RuntimeError("fermionic trajectory left [0, 1]")
        nbar = np.clip(nbar, 0.0, 1.0)
    return MeanTrajectory(times, nbar, rate_set, statistics, mode, status)


def asymptotic_population(bath: BathSpec, mode: Mode) -> float:
    """Stationary occupation 1 / (exp(beta*(omega - m*Omega)) -/+ 1).

    Fermi modes always have one (the Fermi-Dirac value with chemical
    potential m*Omega, equal to 1/2 on the marginal surface).  Bose modes
    only relax when omega > m*Omega; otherwise there is no stationary
    population and :class:`NoStationaryPopulationError` is raised.
    """
    gap = mode.omega - mode.m * bath.omega_rot
    if gap == 0.0:
        x = 0.0
    elif math.isinf(bath.beta):
        x = math.copysign(math.inf, gap)
    else:
        x = bath.beta * gap

    if mode.statistics is Statistics.FERMI:
        if x >= 0.0:
            e = math.exp(-x)
            return e / (1.0 + e)
        return 1.0 / (math.exp(x) + 1.0)
    if x <= 0.0:
        raise NoStationaryPopulationError(
            f"bosonic mode with omega - m*Omega = {gap!r} has no stationary population"
        )
    return 1.0 / math.expm1(x)


def emission_spectrum(bath: BathSpec, mode_grid) -> list[tuple[Mode, float, Classification]]:
    """Vacuum emission rate d nbar/dt at nbar = 0 (i.e. gamma_up) per mode.

    At beta = inf this is nonzero exactly on the superradiant set
    omega < m*Omega; at finite beta with Omega = 0 it reduces to the purely
    thermal spectrum gamma0(omega) * exp(-beta*omega).
    """
    out = []
    for mode in mode_grid:
        rs = rates(bath, mode)
        out.append((mode, rs.gamma_up, rs.classification))
    return out
