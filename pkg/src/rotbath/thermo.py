"""Thermodynamic ledger: entropy, entropy production, heat and work balance.

The diagonal product state of the field makes every quantity a sum over
modes.  Entropy production follows the Spohn construction: relative
entropy decay against the per-mode reference weights

    pi_n  proportional to  (gamma_up / gamma_down)**n,

which satisfy detailed balance on any truncation window; the reference
normalization cancels because the generator conserves probability, which
is what keeps superradiant (unnormalizable) references usable on a finite
window.  The two balance laws then read

    dS/dt = sigma + beta * J         (sigma >= 0)
    dU/dt = J + Omega * dLz/dt

with J the heat current from the bath into the field evaluated at the
comoving frequencies, J = sum_k (omega_k - m_k*Omega) * dnbar_k/dt.

The black-hole entry converts an emitted-quanta list into mass, angular
momentum and horizon-area changes with c = hbar = G = k_B = 1; the charge
channel is fixed to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .birthdeath import BirthDeathGenerator, ModeDistribution, NonlinearParams, LINEAR, bd_generator
from .core import BathSpec, Mode, RateSet, Statistics
from .kinetics import MeanTrajectory, mean_rhs

#: probability floor used inside logarithms (flagged when it bites)
LOG_FLOOR = 1e-300


class GridAlignmentError(ValueError):
    """Per-mode time grids do not coincide."""


def _probs(dist) -> np.ndarray:
    return dist.probs if isinstance(dist, ModeDistribution) else np.asarray(dist, dtype=float)


def entropy(dists) -> float:
    """Shannon/von Neumann entropy -sum p ln p, additive over modes.

    Accepts one distribution (``ModeDistribution`` or probability vector)
    or a list of them; 0 * ln 0 = 0.
    """
    if isinstance(dists, (list, tuple)):
        return float(sum(entropy(d) for d in dists))
    p = _probs(dists)
    mask = p > 0.0
    return float(-np.sum(p[mask] * np.log(p[mask])))


def entropy_production_detailed(
    dist,
    rate_set: RateSet,
    statistics: Statistics,
    nl: NonlinearParams = LINEAR,
) -> tuple[float, bool]:
    """Spohn entropy production and a flag marking probability-floor use.

    sigma = -sum_n (L P)_n * (ln P_n - n * ln(gamma_up/gamma_down)).

    Nonnegative for the linear (kappa = 0) process, where the reference
    weights are stationary; with kappa > 0 the same expression is reported
    as a diagnostic only.  Vanishing P_n under nonzero flow is regularized
    by a floor of 1e-300 and flagged.
    """
    if rate_set.gamma_down <= 0.0 or rate_set.gamma_up <= 0.0:
        raise ValueError(
            "entropy production needs gamma_up > 0 and gamma_down > 0 "
            "(zero-temperature references are degenerate)"
        )
    p = _probs(dist)
    gen = bd_generator(rate_set, statistics, nl)
    flow = gen(p)
    log_ratio = math.log(rate_set.gamma_up) - math.log(rate_set.gamma_down)
    n = np.arange(p.size)
    floored = bool(np.any((p <= 0.0) & (np.abs(flow) > 0.0)))
    logp = np.log(np.maximum(p, LOG_FLOOR))
    sigma = -float(np.dot(flow, logp - n * log_ratio))
    return sigma, floored


def entropy_production(
    dist,
    rate_set: RateSet,
    statistics: Statistics,
    nl: NonlinearParams = LINEAR,
) -> float:
    return entropy_production_detailed(dist, rate_set, statistics, nl)[0]


def heat_current(modes, dnbar_dt, bath: BathSpec) -> float:
    """J = sum_k (omega_k - m_k*Omega) * dnbar_k/dt."""
    modes = list(modes)
    rates_of_change = list(dnbar_dt)
    if len(modes) != len(rates_of_change):
        raise ValueError("modes and dnbar_dt must pair up")
    return float(
        sum(
            (mode.omega - mode.m * bath.omega_rot) * dn
            for mode, dn in zip(modes, rates_of_change)
        )
    )


@dataclass(frozen=True)
class EnergyBalance:
    """First-law decomposition dU/dt = J + Omega * dLz/dt along a run."""

    times: np.ndarray
    du_dt: np.ndarray
    heat: np.ndarray
    power: np.ndarray
    residual: np.ndarray


def energy_balance(modes, trajectories, bath: BathSpec) -> EnergyBalance:
    """Split the field's energy change into heat and rotational work.

    ``trajectories`` are mean trajectories on one shared time grid (a
    mismatch raises :class:`GridAlignmentError`).  The populations' rates
    of change are evaluated exactly from the kinetic equation, so the
    residual |dU/dt - J - power| is a pure floating-point check of an
    algebraic identity.
    """
    modes = list(modes)
    trajectories = list(trajectories)
    if len(modes) != len(trajectories):
        raise ValueError("modes and trajectories must pair up")
    if not trajectories:
        raise ValueError("need at least one trajectory")
    times = trajectories[0].times
    for tr in trajectories[1:]:
        if tr.times.shape != times.shape or np.any(tr.times != times):
            raise GridAlignmentError("trajectories are not on a shared time grid")

    du = np.zeros_like(times)
    heat = np.zeros_like(times)
    lz_rate = np.zeros_like(times)
    for mode, tr in zip(modes, trajectories):
        ndot = np.array([mean_rhs(tr.rates, tr.statistics, v) for v in tr.nbar])
        du += mode.omega * ndot
        heat += (mode.omega - mode.m * bath.omega_rot) * ndot
        lz_rate += mode.m * ndot
    power = bath.omega_rot * lz_rate
    residual = np.abs(du - heat - power)
    return EnergyBalance(times, du, heat, power, residual)


# ---------------------------------------------------------------------------
# Ledger over exact distribution trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThermoLedger:
    """Time series of the thermodynamic bookkeeping for one run.

    residual_first is |dU/dt - J - Omega dLz/dt| (algebraic identity);
    residual_second is |dS/dt - sigma - beta*J| with dS/dt by centered
    finite differences (NaN at infinite beta, where beta*J is undefined).
    ``floored`` marks samples where the entropy-production log floor bit.
    """

    times: np.ndarray
    entropy: np.ndarray
    sigma: np.ndarray
    heat: np.ndarray
    energy: np.ndarray
    angular_momentum: np.ndarray
    residual_first: np.ndarray
    residual_second: np.ndarray
    floored: np.ndarray
    beta: float
    omega_rot: float


@dataclass(frozen=True)
class LedgerComponent:
    """One mode's contribution: snapshots at t-h, t, t+h for each ledger time."""

    mode: Mode
    rate_set: RateSet
    below: list
    center: list
    above: list


def build_ledger(bath: BathSpec, components, times, fd_step: float, nl: NonlinearParams = LINEAR) -> ThermoLedger:
    """Assemble the ledger from per-mode distribution snapshots.

    sigma and the currents are instantaneous functionals of the central
    snapshots; only dS/dt uses the flanking ones, through a centered
    difference of step ``fd_step``.
    """
    components = list(components)
    times = np.asarray(times, dtype=float)
    n_t = times.size
    for c in components:
        if not (len(c.below) == len(c.center) == len(c.above) == n_t):
            raise GridAlignmentError("component snapshots do not match the time grid")

    s = np.zeros(n_t)
    s_lo = np.zeros(n_t)
    s_hi = np.zeros(n_t)
    sigma = np.zeros(n_t)
    heat = np.zeros(n_t)
    du = np.zeros(n_t)
    lz_rate = np.zeros(n_t)
    energy = np.zeros(n_t)
    lz = np.zeros(n_t)
    floored = np.zeros(n_t, dtype=bool)

    for c in components:
        gen = bd_generator(c.rate_set, c.mode.statistics, nl)
        gap = c.mode.omega - c.mode.m * bath.omega_rot
        # a one-sided rate set (zero temperature) has no usable reference state
        degenerate = c.rate_set.gamma_down <= 0.0 or c.rate_set.gamma_up <= 0.0
        for i in range(n_t):
            p = _probs(c.center[i])
            s[i] += entropy(p)
            s_lo[i] += entropy(c.below[i])
            s_hi[i] += entropy(c.above[i])
            if degenerate:
                sigma[i] = math.nan
            else:
                sig, flag = entropy_production_detailed(p, c.rate_set, c.mode.statistics, nl)
                sigma[i] += sig
                floored[i] |= flag
            ndot = gen.first_moment_rate(p)
            nbar = float(np.dot(np.arange(p.size), p))
            heat[i] += gap * ndot
            du[i] += c.mode.omega * ndot
            lz_rate[i] += c.mode.m * ndot
            energy[i] += c.mode.omega * nbar
            lz[i] += c.mode.m * nbar

    ds_dt = (s_hi - s_lo) / (2.0 * fd_step)
    residual_first = np.abs(du - heat - bath.omega_rot * lz_rate)
    if math.isinf(bath.beta):
        residual_second = np.full(n_t, math.nan)
    else:
        residual_second = np.abs(ds_dt - sigma - bath.beta * heat)
    return ThermoLedger(
        times, s, sigma, heat, energy, lz, residual_first, residual_second, floored,
        bath.beta, bath.omega_rot,
    )


# ---------------------------------------------------------------------------
# Black-hole bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BhLedgerEntry:
    """Mass, angular momentum and horizon-area changes (c = hbar = G = 1)."""

    d_mass: float
    d_angular_momentum: float
    d_area: float


def bh_ledger(quanta, omega_rot: float, t_hawking: float) -> BhLedgerEntry:
    """Ledger entry for emitting the listed quanta from a rotating horizon.

    ``quanta`` is an iterable of (omega, m, count).  Emission costs
    dM = -sum count*omega and dL = -sum count*m; the area change follows
    from dM = T_H dA/4 + Omega dL with the charge channel fixed to zero.
    Superradiant quanta (omega < m*Omega) give dM < 0 together with
    dA > 0; at omega = m*Omega the exchange is reversible (dA = 0).
    """
    if not (t_hawking > 0.0):
        raise ValueError(f"Hawking temperature must be positive, got {t_hawking!r}")
    d_mass = 0.0
    d_lz = 0.0
    for omega, m, count in quanta:
        if omega < 0.0:
            raise ValueError("quantum energy must be >= 0")
        if count < 0:
            raise ValueError("count must be >= 0")
        d_mass -= count * omega
        d_lz -= count * m
    d_area = 4.0 * (d_mass - omega_rot * d_lz) / t_hawking
    return BhLedgerEntry(d_mass, d_lz, d_area)
