"""Coupling-spectrum models for thermal baths.

A coupling spectrum gamma0(x) encodes everything the weak-coupling limit
needs to know about a bath: its value at positive x is an absorption rate,
its value at negative x an emission rate, and thermal equilibrium at
inverse temperature beta ties the two sides together through the KMS
condition

    gamma0(-x) = exp(-beta * x) * gamma0(x).

Every model here is built from a nonnegative positive-frequency part and
extended to the negative axis by that relation, so the shipped families
satisfy KMS exactly (:func:`kms_check` measures the residual, which is the
oracle for imported spectra).  At beta = inf the negative side vanishes
identically.

The numeric route builds gamma0 from a sampled bath autocorrelation
function by Fourier quadrature; positivity of the result is a Bochner
condition and its violation beyond tolerance flags undersampled or
unphysical input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

#: below this, a spectrum value counts as zero in relative residuals
TINY = 1e-300
#: quadrature results more negative than this raise PositivityError
TOL_NEG = 1e-9
#: imaginary residue above this flags a quadrature result
TOL_IMAG = 1e-9
#: the correlation window must have decayed to this level at its ends
TAIL_TOL = 1e-8


class PositivityError(ValueError):
    """A spectrum value came out negative (Bochner positivity violated)."""


@dataclass(frozen=True)
class CouplingSpectrum:
    """A bath coupling spectrum, total on the real line.

    ``beta`` records the KMS temperature the model was built at (``None``
    for imported/custom spectra whose temperature is not known a priori).
    Instances are immutable and evaluate as plain callables.
    """

    family: str
    beta: float | None
    params: tuple
    _evaluate: Callable[[float], float]

    def __call__(self, x: float) -> float:
        return self._evaluate(float(x))


def _value_at_origin(positive_part: Callable[[float], float]) -> float:
    """Right-limit stand-in at x = 0: the value there if finite, else 0."""
    try:
        v = positive_part(0.0)
    except (ZeroDivisionError, OverflowError, ValueError):
        return 0.0
    return float(v) if math.isfinite(v) else 0.0


def kms_extend(
    positive_part: Callable[[float], float],
    beta: float,
    *,
    family: str = "custom",
    params: tuple = (),
) -> CouplingSpectrum:
    """Extend a nonnegative positive-frequency profile to all x by KMS.

    gamma(x) = positive_part(x) for x > 0, gamma(-x) = exp(-beta*x)*gamma(x),
    and gamma(0) is the value of the profile at 0 when finite (0 otherwise).
    For beta = inf the negative side is identically zero.

    Negative values returned by ``positive_part`` raise
    :class:`PositivityError` at evaluation time.
    """
    if not (beta > 0.0):
        raise ValueError(f"beta must be > 0 (math.inf allowed), got {beta!r}")
    at_zero = _value_at_origin(positive_part)
    zero_temperature = math.isinf(beta)

    def evaluate(x: float) -> float:
        if x == 0.0:
            return at_zero
        y = abs(x)
        v = positive_part(y)
        if v < 0.0:
            raise PositivityError(f"positive part is negative at x={y!r}: {v!r}")
        if x > 0.0:
            return v
        if zero_temperature:
            return 0.0
        return math.exp(-beta * y) * v

    return CouplingSpectrum(family, beta, params, evaluate)


def ohmic_spectrum(A: float, s: float, x_c: float, beta: float) -> CouplingSpectrum:
    """Ohmic-family spectrum gamma0(x) = A * x**s * exp(-x/x_c) for x > 0.

    s = 1 is the strictly Ohmic case; s < 1 sub-Ohmic, s > 1 super-Ohmic.
    The negative side follows from KMS at ``beta``.
    """
    if A <= 0.0 or s <= 0.0 or x_c <= 0.0:
        raise ValueError("Ohmic parameters A, s, x_c must all be positive")

    def positive(x: float) -> float:
        return A * x**s * math.exp(-x / x_c)

    return kms_extend(positive, beta, family="ohmic", params=(A, s, x_c))


def flat_spectrum(level: float, beta: float) -> CouplingSpectrum:
    """Frequency-independent absorption: gamma0(x) = level for x >= 0."""
    if level <= 0.0:
        raise ValueError("flat level must be positive")
    return kms_extend(lambda x: level, beta, family="flat", params=(level,))


def hawking_spectrum(
    formfactor_sq: Callable[[float], float] | float, beta_h: float
) -> CouplingSpectrum:
    """Spectrum of a horizon-type bath with form-factor ratio exp(-beta_h * x).

    The absorption channel at x > 0 carries the squared form factor; the
    emission channel at x < 0 is suppressed by exp(-beta_h*|x|), so the
    bath presents itself to exterior modes as thermal at 1/beta_h (the
    Hawking temperature).  Pass a constant for a frequency-flat form
    factor; no gray-body structure is assumed.

    This is the same object kms_extend builds from the same positive part;
    the two constructions are pointwise identical.
    """
    if callable(formfactor_sq):
        positive = formfactor_sq
        params: tuple = ()
    else:
        level = float(formfactor_sq)
        if level < 0.0:
            raise PositivityError("squared form factor must be nonnegative")
        positive = lambda x: level  # noqa: E731
        params = (level,)
    spec = kms_extend(positive, beta_h, family="hawking", params=params)
    return spec


def custom_spectrum(evaluate: Callable[[float], float], *, beta: float | None = None) -> CouplingSpectrum:
    """Wrap a user-supplied gamma0(x) defined on all of R, no KMS guarantee."""
    return CouplingSpectrum("custom", beta, (), lambda x: float(evaluate(x)))


# ---------------------------------------------------------------------------
# Spectra from sampled correlation functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationFunction:
    """Bath autocorrelation F(tau) sampled uniformly on [-T, T].

    ``samples`` holds complex values at tau_j = (j - (n-1)/2) * dt for an
    odd number of points n.  Hermiticity F(-tau) = conj(F(tau)) is required
    within a relative tolerance, as is enough decay at the window ends for
    the Fourier integral to have converged.
    """

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 3 or samples.size % 2 == 0:
            raise ValueError("need an odd number (>= 3) of samples on [-T, T]")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        scale = float(np.max(np.abs(samples)))
        if scale == 0.0:
            raise ValueError("correlation function is identically zero")
        herm = float(np.max(np.abs(samples[::-1].conj() - samples)))
        if herm > 1e-6 * scale:
            raise ValueError(
                f"samples violate F(-tau) = conj(F(tau)) (residual {herm:.3e}, "
                f"scale {scale:.3e})"
            )
        tail = float(max(abs(samples[0]), abs(samples[-1]))) / scale
        if tail > TAIL_TOL:
            raise ValueError(
                f"correlation has not decayed at the window ends "
                f"(relative tail {tail:.3e} > {TAIL_TOL:g}); widen the window"
            )

    @property
    def tau(self) -> np.ndarray:
        n = self.samples.size
        return (np.arange(n) - (n - 1) / 2) * self.dt


@dataclass(frozen=True)
class SpectrumSample:
    """One quadrature evaluation: the rate plus its numerical residues."""

    value: float
    imag_residual: float
    flagged: bool


def spectrum_from_correlation(F: CorrelationFunction, omega: float) -> SpectrumSample:
    """Fourier-transform a sampled correlation: G(omega) = int F(tau) e^{i omega tau} dtau.

    Trapezoidal quadrature on the uniform grid.  The real part is the rate;
    an imaginary residue above tolerance sets ``flagged``; a real part more
    negative than the positivity tolerance raises :class:`PositivityError`.
    """
    tau = F.tau
    integrand = F.samples * np.exp(1j * omega * tau)
    g = complex(np.trapezoid(integrand, dx=F.dt))
    value = g.real
    imag_residual = abs(g.imag)
    if value < -TOL_NEG:
        raise PositivityError(
            f"transform is negative at omega={omega!r}: {value:.3e} "
            f"(undersampled or non-physical correlation)"
        )
    return SpectrumSample(value, imag_residual, imag_residual > TOL_IMAG)


def spectrum_from_correlation_model(F: CorrelationFunction) -> CouplingSpectrum:
    """A CouplingSpectrum evaluating the Fourier quadrature at each frequency.

    Small negative excursions within the positivity tolerance are clamped
    to zero so the model is everywhere nonnegative.  The KMS temperature is
    whatever the correlation encodes; measure it with :func:`kms_check`.
    """
    def evaluate(x: float) -> float:
        return max(spectrum_from_correlation(F, x).value, 0.0)

    return CouplingSpectrum("correlation", None, (F.samples.size, F.dt), evaluate)


def load_correlation(path: str | Path) -> CorrelationFunction:
    """Read a correlation function from delimited text.

    Two columns (tau, Re F) or three (tau, Re F, Im F); comma or whitespace
    separated; '#' starts a comment.  The tau grid must be uniform and
    symmetric about zero.
    """
    path = Path(path)
    raw = [
        line.split("#", 1)[0].strip()
        for line in path.read_text().splitlines()
    ]
    rows = []
    for line in raw:
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").split() if p]
        rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    if width not in (2, 3) or any(len(r) != width for r in rows):
        raise ValueError(f"{path}: expected 2 or 3 uniform columns")
    data = np.asarray(rows, dtype=float)
    order = np.argsort(data[:, 0])
    data = data[order]
    tau = data[:, 0]
    dt = tau[1] - tau[0]
    if dt <= 0 or np.max(np.abs(np.diff(tau) - dt)) > 1e-9 * max(dt, 1.0):
        raise ValueError(f"{path}: tau grid must be uniformly spaced")
    if abs(tau[0] + tau[-1]) > 1e-9 * max(abs(tau[0]), 1.0):
        raise ValueError(f"{path}: tau grid must be symmetric about 0")
    values = data[:, 1] + (1j * data[:, 2] if width == 3 else 0.0)
    return CorrelationFunction(np.asarray(values, dtype=complex), float(dt))


# ---------------------------------------------------------------------------
# KMS residual
# ---------------------------------------------------------------------------

def kms_check(
    spectrum: Callable[[float], float], beta: float, grid: Iterable[float]
) -> float:
    """Max relative KMS residual |gamma(-x) - e^{-beta x} gamma(x)| / max(gamma(x), tiny).

    The grid must be positive frequencies and beta finite.  Models built by
    :func:`kms_extend` return 0 by construction; a corrupted or imported
    spectrum returns the size of its detailed-balance violation.
    """
    if math.isinf(beta):
        raise ValueError("kms_check requires finite beta")
    xs = [float(x) for x in grid]
    if not xs or any(x <= 0 for x in xs):
        raise ValueError("grid must be a nonempty list of positive frequencies")
    worst = 0.0
    for x in xs:
        down = spectrum(x)
        up = spectrum(-x)
        residual = abs(up - math.exp(-beta * x) * down) / max(abs(down), TINY)
        worst = max(worst, residual)
    return worst


def default_kms_grid(n: int = 100, lo: float = 1e-2, hi: float = 1e2) -> np.ndarray:
    """Logarithmic positive-frequency grid used by the residual reports."""
    return np.logspace(math.log10(lo), math.log10(hi), n)
