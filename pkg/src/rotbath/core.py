"""Mode bookkeeping and the rate calculus for a rotating thermal bath.

A field mode of energy ``omega`` and axial angular momentum ``m`` couples
to a bath rotating at angular velocity ``Omega`` through the bath's
coupling spectrum ``gamma0(x)``.  The rotation enters only as a frequency
shift of the spectrum, and the ratio of pumping to damping is a Boltzmann
factor at the mode's local inverse temperature ``beta * (1 - m*Omega/omega)``.
Modes with ``omega < m*Omega`` are population inverted; bosonic ones are
amplified without bound (rotational superradiance in the Zel'dovich sense).

All quantities are in natural units, hbar = k_B = 1.  Everything here is
immutable and side-effect free, so it is safe to evaluate concurrently
across modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable


class Statistics(str, Enum):
    BOSE = "bose"
    FERMI = "fermi"


class Classification(str, Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    SUPERRADIANT = "superradiant"


class LocalTemperatureError(ValueError):
    """The local inverse temperature is undefined (omega = 0 with m != 0)."""


def _safe_exp(x: float) -> float:
    """exp() that saturates to +inf instead of raising OverflowError."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Mode:
    """One field mode ``(omega, m, alpha)`` with a fixed statistics tag.

    Parameters
    ----------
    omega : float
        Mode energy, >= 0 (hbar = 1).
    m : int
        Angular momentum quantum number along the rotation axis.
    statistics : Statistics
        Bose or Fermi; fixed for the lifetime of the mode.
    alpha : str
        Opaque label for spin and any remaining quantum numbers.
    """

    omega: float
    m: int
    statistics: Statistics
    alpha: str = "0"

    def __post_init__(self):
        if not (self.omega >= 0.0):
            raise ValueError(f"mode energy must be >= 0, got {self.omega!r}")
        if self.m != int(self.m):
            raise ValueError(f"m must be an integer, got {self.m!r}")

    def reversed(self) -> "Mode":
        """Time-reversed partner: same energy, opposite m."""
        return Mode(self.omega, -self.m, self.statistics, self.alpha)

    def sort_key(self):
        return (self.omega, self.m, self.alpha)


@dataclass(frozen=True)
class BathSpec:
    """A rotating bath: inverse temperature, angular velocity, coupling spectrum.

    ``beta`` may be ``math.inf`` (zero temperature); that limit has a
    qualitatively different rate structure and is handled exactly rather
    than through a large float.  ``spectrum`` is any callable ``x -> rate``
    total on the real line; spectra built by :mod:`rotbath.bathmodels`
    satisfy the KMS condition at ``beta`` by construction, and
    ``kms_check`` measures the residual for imported ones.
    """

    beta: float
    omega_rot: float
    spectrum: Callable[[float], float]

    def __post_init__(self):
        if not (self.beta > 0.0):
            raise ValueError(f"beta must be > 0 (math.inf allowed), got {self.beta!r}")
        if not (self.omega_rot >= 0.0):
            raise ValueError(f"omega_rot must be >= 0, got {self.omega_rot!r}")
        built_at = getattr(self.spectrum, "beta", None)
        if built_at is not None and built_at != self.beta:
            raise ValueError(
                f"spectrum was built at beta={built_at!r} but bath has beta={self.beta!r}"
            )


@dataclass(frozen=True)
class RateSet:
    """Damping/pumping rates and stability data for one (bath, mode) pair."""

    gamma_down: float
    gamma_up: float
    beta_loc: float
    classification: Classification


def shifted_spectrum(bath: BathSpec, mode: Mode, x: float) -> float:
    """Coupling spectrum seen by ``mode`` in the rotating bath: gamma0(x + m*Omega)."""
    return bath.spectrum(x + mode.m * bath.omega_rot)


def classify(bath: BathSpec, mode: Mode) -> Classification:
    """Stability of a mode.

    Fermi modes always relax.  Bose modes are stable for omega > m*Omega,
    marginal on the boundary and superradiant (exponentially growing)
    below it.  The classification never goes through beta_loc, so it stays
    defined at omega = 0.
    """
    if mode.statistics is Statistics.FERMI:
        return Classification.STABLE
    gap = mode.omega - mode.m * bath.omega_rot
    if gap > 0.0:
        return Classification.STABLE
    if gap == 0.0:
        return Classification.MARGINAL
    return Classification.SUPERRADIANT


def local_beta(bath: BathSpec, mode: Mode) -> float:
    """Local (mode-dependent) inverse temperature ``beta * (1 - m*Omega/omega)``.

    Negative exactly for superradiant kinematics (omega < m*Omega).  At the
    marginal point the value is 0 for every beta, including beta = inf.

    Raises
    ------
    LocalTemperatureError
        If omega = 0 with m != 0; the expression genuinely diverges there
        even though rates and classification remain defined.
    """
    if mode.omega == 0.0 and mode.m != 0:
        raise LocalTemperatureError(
            f"local inverse temperature undefined for omega=0, m={mode.m}"
        )
    return _beta_loc_value(bath, mode)


def _beta_loc_value(bath: BathSpec, mode: Mode) -> float:
    """beta_loc as a float, using signed limits where the formula degenerates."""
    momega = mode.m * bath.omega_rot
    if momega == 0.0:
        return bath.beta
    if mode.omega == 0.0:
        # limit omega -> 0+ of beta*(1 - m*Omega/omega)
        return -math.inf if momega > 0.0 else math.inf
    factor = 1.0 - momega / mode.omega
    if math.isinf(bath.beta):
        if factor == 0.0:
            return 0.0
        return math.copysign(math.inf, factor)
    return bath.beta * factor


def rates(bath: BathSpec, mode: Mode) -> RateSet:
    """Damping and pumping rates for one mode.

    Finite beta: ``gamma_down = gamma0(omega + m*Omega)`` and
    ``gamma_up = exp(-beta*(omega - m*Omega)) * gamma_down``.

    Zero temperature (beta = inf) keeps its own rate structure instead of a
    limit of large floats: the pumping rate stays positive on the
    superradiant set, ``gamma_up = gamma0(m*Omega - omega)`` for
    omega < m*Omega and 0 otherwise, while detailed balance forces
    ``gamma_down = 0`` on the superradiant set.
    """
    momega = mode.m * bath.omega_rot
    gap = mode.omega - momega
    cls = classify(bath, mode)
    beta_loc = _beta_loc_value(bath, mode)

    if math.isinf(bath.beta):
        if gap < 0.0:
            gamma_up = bath.spectrum(-gap)
            gamma_down = 0.0
        else:
            gamma_up = 0.0
            gamma_down = bath.spectrum(mode.omega + momega)
    else:
        gamma_down = bath.spectrum(mode.omega + momega)
        if gamma_down == 0.0:
            gamma_up = 0.0
        else:
            gamma_up = _safe_exp(-bath.beta * gap) * gamma_down

    if gamma_down < 0.0 or gamma_up < 0.0:
        raise ValueError("coupling spectrum returned a negative rate")
    return RateSet(gamma_down, gamma_up, beta_loc, cls)


def shifted_kms_residual(bath: BathSpec, m: int, grid: Iterable[float]) -> float:
    """Max relative residual of the rotating-frame KMS relation.

    For a bath at finite beta the shifted spectra of a mode with angular
    momentum ``m`` and of its m-reversed partner satisfy

        gamma_m(-x) = exp(-beta*(x - m*Omega)) * gamma_{-m}(x),

    which reduces pointwise to the static KMS condition of the underlying
    spectrum.  The m-reversal matters: the relation couples a mode to its
    time-reversed partner, not to itself.
    """
    if math.isinf(bath.beta):
        raise ValueError("shifted KMS residual requires finite beta")
    momega = m * bath.omega_rot
    worst = 0.0
    for x in grid:
        lhs = bath.spectrum(-x + momega)
        rhs = _safe_exp(-bath.beta * (x - momega)) * bath.spectrum(x - momega)
        scale = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
