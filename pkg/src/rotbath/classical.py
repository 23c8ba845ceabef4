"""Classical shear-flow analog of the bosonic instability.

A layer of fluid moving at speed V over a wave of phase velocity v = w/k
amplifies the wave when V > v: momentum conservation lets dissipative
coupling extract more kinetic energy from the moving layer than the wave
absorbs, and the difference feeds entropy production.  Only the energy and
momentum bookkeeping is represented here; there is no fluid dynamics, and
the omitted relativistic factor in the comoving frequency follows the
nonrelativistic treatment.

For a cylindrical geometry with linear dispersion the criterion V > v maps
onto the rotating-bath condition omega < m*Omega through V/v = m*Omega/omega.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class FlowRegime(str, Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class ShearConfig:
    """Shear-layer speed V, wave phase velocity v, wavenumber k (all > 0)."""

    V: float
    v: float
    k: float = 1.0

    def __post_init__(self):
        if not (self.V > 0.0 and self.v > 0.0 and self.k > 0.0):
            raise ValueError("V, v and k must all be positive")

    @property
    def omega(self) -> float:
        return self.v * self.k


def shear_classify(cfg: ShearConfig) -> FlowRegime:
    """Unstable iff V > v, marginal on the boundary."""
    if cfg.V > cfg.v:
        return FlowRegime.UNSTABLE
    if cfg.V == cfg.v:
        return FlowRegime.MARGINAL
    return FlowRegime.STABLE


def energy_split(cfg: ShearConfig) -> tuple[float, float]:
    """Fractions of the extracted wind energy: (into the wave, dissipated).

    Per emitted quantum the wind loses V*k while the wave gains omega = v*k,
    so the wave fraction is v/V and the remainder 1 - v/V is dissipated.
    Both fractions are meaningful for V >= v; below threshold the wave
    fraction exceeds 1, signalling that sustaining the wave would need an
    external energy supply (the stable regime).
    """
    wave_fraction = cfg.v / cfg.V
    return wave_fraction, 1.0 - wave_fraction


def comoving_frequency(omega: float, V: float, v: float) -> float:
    """Wave frequency in the moving layer's frame: omega * (1 - V/v).

    Negative exactly in the unstable regime; the relativistic correction
    factor is omitted.
    """
    if v == 0.0:
        raise ValueError("phase velocity must be nonzero")
    return omega * (1.0 - V / v)
