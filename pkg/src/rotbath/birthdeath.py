"""Full number-distribution dynamics of a single mode.

The diagonal populations P_n of one mode form a Markovian birth-death
process: the up-propensity from state n is gamma_up * (1 +/- n) (bosonic
stimulated emission or fermionic blocking) and the down-propensity is
gamma_down * (n + kappa * n**2), where kappa >= 0 is a quadratic
gain-saturation coefficient that goes beyond the linear coupling.

Three routes through the same process live here and check each other:

* exact integration of the truncated generator (the generator is a
  constant tridiagonal matrix, so each output step is an exact matrix
  exponential action, with the bosonic cutoff doubling whenever the tail
  mass exceeds tolerance);
* event-driven stochastic trajectories (seeded, reproducible, batched);
* the semiclassical mean-field flow obtained by replacing <n^2> with
  <n>^2, whose nonnegative fixed point n* is the gain-saturated
  population.

In this zero-dimensional population model the mean-field attractor is the
fixed point n*; no phase-space limit cycle is represented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse import csr_matrix, diags
from scipy.sparse.linalg import expm_multiply

from .core import Mode, RateSet, Statistics

DEFAULT_TAIL_TOL = 1e-10
HARD_CEILING = 2**20
RNG_ALGORITHM = "numpy-PCG64"


class RunawayTruncationError(RuntimeError):
    """The adaptive cutoff hit its hard ceiling (expected for unsaturated superradiant runs).

    Carries the snapshots produced before the failure in ``partial`` and
    the time reached in ``time``.
    """

    def __init__(self, message: str, partial=None, time: float = math.nan):
        super().__init__(message)
        self.partial = partial if partial is not None else []
        self.time = time


class NoFixedPointError(ValueError):
    """The saturation equation has no nonnegative root (linear runaway)."""


@dataclass(frozen=True)
class NonlinearParams:
    """Quadratic absorption coefficient kappa >= 0 (kappa = 0: linear theory)."""

    kappa: float = 0.0

    def __post_init__(self):
        if not (self.kappa >= 0.0):
            raise ValueError(f"kappa must be >= 0, got {self.kappa!r}")


LINEAR = NonlinearParams(0.0)


@dataclass(frozen=True)
class ModeDistribution:
    """Truncated probability vector over occupation numbers n = 0..N_max."""

    probs: np.ndarray
    time: float = 0.0
    mode: Mode | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probs must be a 1-D vector")
        if p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min():.3e}")
        p = np.where(p < 0.0, 0.0, p)
        total = p.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", p)
        if self.mode is not None and self.mode.statistics is Statistics.FERMI and p.size != 2:
            raise ValueError("fermionic distributions live on {0, 1}")

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def variance(self) -> float:
        n = np.arange(self.probs.size)
        m = float(np.dot(n, self.probs))
        return float(np.dot(n * n, self.probs)) - m * m


class BirthDeathGenerator:
    """The birth-death generator for one (rates, statistics, kappa) triple.

    Calling it on a probability vector returns dP/dt on the same window,
    with a reflecting top state so that sum(dP/dt) = 0 identically.
    """

    def __init__(self, rate_set: RateSet, statistics: Statistics, nl: NonlinearParams = LINEAR):
        self.rates = rate_set
        self.statistics = statistics
        self.nl = nl

    def up_rate(self, n):
        """Propensity n -> n+1: gamma_up * (1 +/- n)."""
        n = np.asarray(n, dtype=float)
        if self.statistics is Statistics.BOSE:
            return self.rates.gamma_up * (1.0 + n)
        return self.rates.gamma_up * (1.0 - n)

    def down_rate(self, n):
        """Propensity n -> n-1: gamma_down * (n + kappa * n**2)."""
        n = np.asarray(n, dtype=float)
        return self.rates.gamma_down * (n + self.nl.kappa * n * n)

    def _uv(self, size: int):
        n = np.arange(size, dtype=float)
        u = self.up_rate(n)
        u[-1] = 0.0  # reflecting top keeps probability on the window
        d = self.down_rate(n)
        return u, d

    def __call__(self, probs: np.ndarray | ModeDistribution) -> np.ndarray:
        p = probs.probs if isinstance(probs, ModeDistribution) else np.asarray(probs, dtype=float)
        u, d = self._uv(p.size)
        dp = -(u + d) * p
        dp[1:] += u[:-1] * p[:-1]
        dp[:-1] += d[1:] * p[1:]
        return dp

    def sparse(self, size: int) -> csr_matrix:
        u, d = self._uv(size)
        return diags([d[1:], -(u + d), u[:-1]], [1, 0, -1], format="csr")

    def first_moment_rate(self, probs: np.ndarray) -> float:
        """d<n>/dt evaluated exactly on the window: sum_n n (L P)_n."""
        p = np.asarray(probs, dtype=float)
        return float(np.dot(np.arange(p.size), self(p)))


def bd_generator(rate_set: RateSet, statistics: Statistics, nl: NonlinearParams = LINEAR) -> BirthDeathGenerator:
    return BirthDeathGenerator(rate_set, statistics, nl)


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------

def _next_pow2(n: int) -> int:
    return 1 << max(4, (int(n) - 1).bit_length())


def delta_state(n0: int, statistics: Statistics = Statistics.BOSE, size: int | None = None) -> np.ndarray:
    """Probability vector concentrated at occupation n0."""
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    if statistics is Statistics.FERMI:
        if n0 > 1:
            raise ValueError("fermionic occupation is bounded by 1")
        size = 2
    elif size is None:
        size = _next_pow2(n0 + 2)
    elif size <= n0:
        raise ValueError("size must exceed n0")
    p = np.zeros(size)
    p[n0] = 1.0
    return p


def vacuum_state(statistics: Statistics = Statistics.BOSE) -> np.ndarray:
    return delta_state(0, statistics)


def geometric_state(nbar: float, statistics: Statistics = Statistics.BOSE, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Maximum-entropy state of given mean: geometric (Bose) or two-point (Fermi)."""
    if nbar < 0.0:
        raise ValueError("nbar must be >= 0")
    if statistics is Statistics.FERMI:
        if nbar > 1.0:
            raise ValueError("fermionic mean occupation cannot exceed 1")
        return np.array([1.0 - nbar, nbar])
    if nbar == 0.0:
        return vacuum_state()
    q = nbar / (1.0 + nbar)
    # deep enough that the truncated tail is far below the working tolerance
    size = _next_pow2(int(math.log(tail_tol * 1e-3) / math.log(q)) + 2)
    p = (1.0 - q) * q ** np.arange(size)
    return p / p.sum()


# ---------------------------------------------------------------------------
# Exact evolution of the truncated distribution
# ---------------------------------------------------------------------------

def evolve_distribution(
    rate_set: RateSet,
    statistics: Statistics,
    nl: NonlinearParams,
    p0,
    t_grid,
    tail_tol: float = DEFAULT_TAIL_TOL,
    *,
    hard_ceiling: int = HARD_CEILING,
    mode: Mode | None = None,
) -> list[ModeDistribution]:
    """Integrate the birth-death process exactly on an adaptive window.

    The generator is constant in time, so each output step applies its
    matrix exponential (machine accuracy, probability conserved by
    construction).  For bosons the cutoff doubles, and the step is redone,
    whenever the top-state mass exceeds ``tail_tol``; nothing is ever
    renormalized.  Hitting ``hard_ceiling`` raises
    :class:`RunawayTruncationError` carrying the snapshots so far, which is
    the expected outcome of an unsaturated (kappa = 0) superradiant run.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be strictly increasing")

    p = (p0.probs if isinstance(p0, ModeDistribution) else np.asarray(p0, dtype=float)).copy()
    gen = bd_generator(rate_set, statistics, nl)
    bose = statistics is Statistics.BOSE

    def grow(vec: np.ndarray, snaps, t_now: float) -> np.ndarray:
        new_size = vec.size * 2
        if new_size - 1 > hard_ceiling:
            raise RunawayTruncationError(
                f"cutoff would exceed hard ceiling {hard_ceiling} at t={t_now:g}",
                partial=snaps,
                time=t_now,
            )
        out = np.zeros(new_size)
        out[: vec.size] = vec
        return out

    snapshots: list[ModeDistribution] = []
    # a too-shallow initial window is widened before the first step
    while bose and p[-1] > tail_tol:
        p = grow(p, snapshots, float(t_grid[0]))
    snapshots.append(ModeDistribution(p.copy(), time=float(t_grid[0]), mode=mode))

    matrix = gen.sparse(p.size)
    for t_a, t_b in zip(t_grid[:-1], t_grid[1:]):
        dt = float(t_b - t_a)
        while True:
            q = expm_multiply(matrix * dt, p)
            if not bose or q[-1] <= tail_tol:
                break
            p = grow(p, snapshots, float(t_a))
            matrix = gen.sparse(p.size)
        if q.min() < -1e-10:
            raise RuntimeError(f"exponential action produced probability {q.min():.3e}")
        np.clip(q, 0.0, None, out=q)
        p = q
        snapshots.append(ModeDistribution(p.copy(), time=float(t_b), mode=mode))
    return snapshots


def stationary_distribution(
    rate_set: RateSet,
    statistics: Statistics,
    nl: NonlinearParams = LINEAR,
    size: int = 64,
) -> np.ndarray:
    """Detailed-balance stationary vector on a window of the given size.

    w_{n+1}/w_n = up(n)/down(n+1); computed in log space so strongly
    inverted (superradiant) ratios do not overflow before normalization.
    """
    gen = bd_generator(rate_set, statistics, nl)
    if statistics is Statistics.FERMI:
        size = 2
    n = np.arange(size - 1, dtype=float)
    up = gen.up_rate(n)
    down = gen.down_rate(n + 1.0)
    if np.any(down <= 0.0):
        raise ValueError("stationary distribution needs gamma_down > 0")
    logw = np.concatenate(([0.0], np.cumsum(np.log(up) - np.log(down))))
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


# ---------------------------------------------------------------------------
# Stochastic trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GillespieResult:
    """Ensemble statistics of event-driven trajectories on a time grid."""

    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    n_traj: int
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    sample_paths: tuple = ()

    def stderr(self) -> np.ndarray:
        return np.sqrt(self.variance / self.n_traj)


def _advance_batch(states, t, t_next, rng, gen: BirthDeathGenerator):
    """Advance every trajectory of a batch to the bin edge t_next, in place."""
    idx = np.nonzero(t < t_next)[0]
    while idx.size:
        s = states[idx]
        ru = gen.up_rate(s)
        rd = gen.down_rate(s)
        rtot = ru + rd
        stuck = rtot <= 0.0
        if stuck.any():
            t[idx[stuck]] = t_next
            keep = ~stuck
            idx, ru, rtot = idx[keep], ru[keep], rtot[keep]
            if idx.size == 0:
                break
        dt = rng.standard_exponential(idx.size) / rtot
        u = rng.random(idx.size)
        t_new = t[idx] + dt
        crossed = t_new >= t_next
        # an event past the edge has not happened by t_next; the exponential
        # clock is memoryless, so discarding the partial wait is exact
        if crossed.any():
            t[idx[crossed]] = t_next
        live = ~crossed
        li = idx[live]
        states[li] += np.where(u[live] * rtot[live] < ru[live], 1, -1).astype(states.dtype)
        t[li] = t_new[live]
        idx = li


def _sample_path(rng, gen: BirthDeathGenerator, n0: int, horizon: float):
    times = [0.0]
    values = [n0]
    t, n = 0.0, n0
    while True:
        ru = float(gen.up_rate(n))
        rd = float(gen.down_rate(n))
        rtot = ru + rd
        if rtot <= 0.0:
            break
        t += rng.standard_exponential() / rtot
        if t >= horizon:
            break
        n += 1 if rng.random() * rtot < ru else -1
        times.append(t)
        values.append(n)
    return np.asarray(times), np.asarray(values, dtype=np.int64)


def gillespie(
    rate_set: RateSet,
    statistics: Statistics,
    nl: NonlinearParams,
    n0: int,
    horizon: float,
    n_traj: int,
    seed: int,
    *,
    n_bins: int = 50,
    batch_size: int = 4096,
    n_sample_paths: int = 0,
) -> GillespieResult:
    """Event-driven simulation of the birth-death process.

    Exact waiting times and jump choices; trajectories are advanced in
    vectorized batches whose seeds are spawned deterministically from
    ``seed``, so results are bit-identical for a given seed regardless of
    how batches are scheduled.  Returns ensemble mean and sample variance
    on ``n_bins + 1`` equally spaced times, plus optional full event paths
    (simulated from their own derived seeds, so requesting them does not
    perturb the ensemble).
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if seed is None:
        raise ValueError("gillespie requires an explicit seed")
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if statistics is Statistics.FERMI and n0 not in (0, 1):
        raise ValueError("fermionic n0 must be 0 or 1")
    if n0 < 0:
        raise ValueError("n0 must be >= 0")

    gen = bd_generator(rate_set, statistics, nl)
    times = np.linspace(0.0, horizon, n_bins + 1)
    n_batches = (n_traj + batch_size - 1) // batch_size
    root = np.random.SeedSequence(seed)
    children = root.spawn(n_batches + max(n_sample_paths, 0))

    sums = np.zeros(times.size)
    sumsq = np.zeros(times.size)
    for b in range(n_batches):
        rng = np.random.default_rng(children[b])
        size = min(batch_size, n_traj - b * batch_size)
        states = np.full(size, n0, dtype=np.int64)
        t = np.zeros(size)
        for j, edge in enumerate(times):
            if j > 0:
                _advance_batch(states, t, float(edge), rng, gen)
            sums[j] += states.sum()
            sumsq[j] += np.dot(states, states)

    mean = sums / n_traj
    if n_traj > 1:
        variance = (sumsq - n_traj * mean * mean) / (n_traj - 1)
        np.clip(variance, 0.0, None, out=variance)
    else:
        variance = np.zeros_like(mean)

    paths = tuple(
        _sample_path(np.random.default_rng(children[n_batches + k]), gen, n0, horizon)
        for k in range(n_sample_paths)
    )
    return GillespieResult(times, mean, variance, n_traj, seed, RNG_ALGORITHM, paths)


# ---------------------------------------------------------------------------
# Mean-field (semiclassical) limit
# ---------------------------------------------------------------------------

def saturation_fixed_point(rate_set: RateSet, nl: NonlinearParams) -> float:
    """Nonnegative root of gamma_up*(1+n) - gamma_down*(n + kappa n^2) = 0.

    This is the gain-saturated bosonic population of the mean-field flow.
    Without saturation (kappa*gamma_down = 0) the balance is linear and
    only exists while gamma_down exceeds gamma_up.
    """
    a = rate_set.gamma_down * nl.kappa
    b = rate_set.gamma_down - rate_set.gamma_up
    if a == 0.0:
        if b > 0.0:
            return rate_set.gamma_up / b
        raise NoFixedPointError(
            "no saturation: kappa*gamma_down = 0 with gamma_up >= gamma_down"
        )
    disc = b * b + 4.0 * a * rate_set.gamma_up
    return (-b + math.sqrt(disc)) / (2.0 * a)


def meanfield_rhs(rate_set: RateSet, nl: NonlinearParams, n: float) -> float:
    """dn/dt = gamma_up*(1+n) - gamma_down*(n + kappa n^2), <n^2> -> <n>^2."""
    return rate_set.gamma_up * (1.0 + n) - rate_set.gamma_down * (n + nl.kappa * n * n)


def meanfield_evolve(rate_set: RateSet, nl: NonlinearParams, n0: float, t_grid) -> np.ndarray:
    """Integrate the semiclassical mean-field flow on a fixed grid.

    With kappa > 0 every n0 >= 0 converges to the saturation fixed point;
    with kappa = 0 this reduces term by term to the bosonic mean kinetics.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if n0 < 0.0:
        raise ValueError("n0 must be >= 0")
    sol = solve_ivp(
        lambda _t, y: [meanfield_rhs(rate_set, nl, y[0])],
        (t_grid[0], t_grid[-1]),
        [float(n0)],
        method="DOP853",
        t_eval=t_grid,
        rtol=1e-12,
        atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"mean-field integration failed: {sol.message}")
    return sol.y[0]
