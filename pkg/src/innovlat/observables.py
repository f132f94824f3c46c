"""Extinction/survival statistics, space-time rasters, and the Bass comparator.

Survival here is the finite-size proxy for the infinite-lattice notion:
"no aware or adopter sites" (awareness mode) or "no adopter sites"
(adoption mode) reached on a finite lattice within a finite horizon.  Both
the lattice side and the horizon are experiment parameters; estimates are
Monte Carlo frequencies with Wilson 95% intervals.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np

from . import rng, _kernels
from .lattice import LatticeSpec
from .dynamics import Params, validate_configuration
from .harris import Trajectory, evolve_harris, generate_events
from .gillespie import final_state_gillespie

AWARENESS = "awareness"
ADOPTION = "adoption"

#: Sentinel returned by extinction_time when the condition never holds
#: within the horizon; compares greater than any finite time.
SURVIVED_PAST_HORIZON = math.inf

_Z95 = 1.959963984540054


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("need at least one trial")
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class SurvivalEstimate:
    successes: int
    replicates: int
    estimate: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, successes: int, replicates: int) -> "SurvivalEstimate":
        lo, hi = wilson_interval(successes, replicates)
        return cls(successes, replicates, successes / replicates, lo, hi)


def state_counts(traj: Trajectory, t: float) -> tuple[int, int, int]:
    """(n0, n1, n2) at time t, right-continuous."""
    state = traj.state_at(t)
    return (int((state == 0).sum()), int((state == 1).sum()),
            int((state == 2).sum()))


def _relevant_count(state: np.ndarray, mode: str) -> int:
    if mode == AWARENESS:
        return int((state != 0).sum())
    if mode == ADOPTION:
        return int((state == 2).sum())
    raise ValueError(f"unknown mode {mode!r}")


def extinction_time(traj: Trajectory, mode: str):
    """First time from which the mode's count stays zero through the horizon.

    Awareness: no sites in state 1 or 2; adoption: no sites in state 2.
    Returns SURVIVED_PAST_HORIZON if the count is positive at the horizon.
    """
    count = _relevant_count(traj.initial, mode)
    candidate = 0.0 if count == 0 else None
    for i in range(len(traj.times)):
        old, new = int(traj.olds[i]), int(traj.news[i])
        if mode == AWARENESS:
            count += (new != 0) - (old != 0)
        else:
            count += (new == 2) - (old == 2)
        if count == 0:
            if candidate is None:
                candidate = float(traj.times[i])
        else:
            candidate = None
    return SURVIVED_PAST_HORIZON if candidate is None else candidate


def _survives(spec, params, initial, horizon, mode, run_seed, sampler) -> bool:
    if sampler == "gillespie":
        early = mode == ADOPTION and params.gamma == 0
        final = final_state_gillespie(spec, params, initial, horizon, run_seed,
                                      stop_when_no_adopters=early)
    elif sampler == "harris":
        stream = generate_events(spec, params, horizon, run_seed)
        final = evolve_harris(initial, stream).final_state()
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    return _relevant_count(final, mode) > 0


def estimate_survival(spec: LatticeSpec, params: Params, initial,
                      horizon: float, mode: str, replicates: int, seed: int,
                      sampler: str = "gillespie",
                      threads: int = 1) -> SurvivalEstimate:
    """Fraction of replicates whose extinction condition never holds.

    Replicate r runs with the derived seed hash(seed, replicate-kind, r);
    the result is a deterministic function of the inputs, independent of
    the thread count (aggregation is by counts only).
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if mode not in (AWARENESS, ADOPTION):
        raise ValueError(f"unknown mode {mode!r}")
    initial = validate_configuration(spec, initial)
    outcomes = np.zeros(replicates, dtype=np.bool_)

    def one(r: int) -> None:
        run_seed = rng.derive_seed(seed, rng.KIND_REPLICATE, r)
        outcomes[r] = _survives(spec, params, initial, horizon, mode,
                                run_seed, sampler)

    if threads <= 1:
        for r in range(replicates):
            one(r)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(one, range(replicates)))
    return SurvivalEstimate.from_counts(int(outcomes.sum()), replicates)


def sample_states(traj: Trajectory, times) -> np.ndarray:
    """Right-continuous states at the given ascending times; shape (T, sites)."""
    times = np.asarray(times, dtype=np.float64)
    if len(times) and (times[0] < 0 or times[-1] > traj.horizon):
        raise ValueError("sample times outside the trajectory horizon")
    out = np.empty((len(times), len(traj.initial)), dtype=np.int8)
    _kernels.snapshot_states(traj.initial, traj.times, traj.sites, traj.news,
                             times, out)
    return out


def spacetime_raster(traj: Trajectory, spec: LatticeSpec,
                     time_step: float) -> np.ndarray:
    """Grid of states, one row per site, one column per sampled instant.

    Column j is the state at time j * time_step (right-continuous);
    d = 1 lattices only.
    """
    if spec.dimension != 1:
        raise ValueError("raster export requires d = 1; export frames instead")
    if time_step <= 0:
        raise ValueError("time_step must be > 0")
    n_cols = int(math.floor(traj.horizon / time_step)) + 1
    times = np.arange(n_cols) * time_step
    times = np.minimum(times, traj.horizon)
    return sample_states(traj, times).T.copy()


def raster_to_csv(grid: np.ndarray, time_step: float, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        cols = ",".join(f"t{j * time_step!r}" for j in range(grid.shape[1]))
        fh.write(f"site,{cols}\n")
        for i in range(grid.shape[0]):
            fh.write(str(i) + "," + ",".join(str(int(v)) for v in grid[i]) + "\n")


PGM_LEVELS = {0: 0, 1: 128, 2: 255}


def raster_to_pgm(grid: np.ndarray, path) -> None:
    """Plain (ASCII) PGM; states 0/1/2 map to gray 0/128/255."""
    h, w = grid.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P2\n{w} {h}\n255\n")
        for i in range(h):
            fh.write(" ".join(str(PGM_LEVELS[int(v)]) for v in grid[i]) + "\n")


@dataclass(frozen=True)
class BassParams:
    """Mean-field adoption ODE: dA/dt = (p + q A / n)(n - A)."""

    p: float
    q: float
    n: float

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("p and q must be >= 0")
        if self.n <= 0:
            raise ValueError("market size n must be > 0")

    def rate(self, a: float) -> float:
        return (self.p + self.q * a / self.n) * (self.n - a)


def _rk4_step(bp: BassParams, a: float, h: float) -> float:
    k1 = bp.rate(a)
    k2 = bp.rate(a + 0.5 * h * k1)
    k3 = bp.rate(a + 0.5 * h * k2)
    k4 = bp.rate(a + h * k3)
    return a + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def bass_trajectory(bp: BassParams, t_grid, a0: float = 0.0,
                    local_error: float = 1e-9) -> np.ndarray:
    """Adoption curve A(t) on the grid, by step-doubling adaptive RK4.

    Each accepted step's local error estimate (Richardson, |A_two_half -
    A_full| / 15) is kept below ``local_error``; grid points are hit
    exactly.  A is clamped to [0, n].
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if len(t_grid) == 0:
        return np.empty(0)
    if t_grid[0] < 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending and start at >= 0")
    if not 0 <= a0 <= bp.n:
        raise ValueError("initial adopters must lie in [0, n]")

    out = np.empty(len(t_grid))
    t, a = 0.0, float(a0)
    h = 0.1
    for i, target in enumerate(t_grid):
        while t < target:
            h = min(h, target - t)
            while True:
                full = _rk4_step(bp, a, h)
                half = _rk4_step(bp, _rk4_step(bp, a, 0.5 * h), 0.5 * h)
                err = abs(half - full) / 15.0
                if err <= local_error or h <= 1e-12:
                    break
                h *= max(0.2, 0.9 * (local_error / err) ** 0.2)
            t += h
            a = min(max(half + (half - full) / 15.0, 0.0), bp.n)
            if err > 0:
                h *= min(5.0, 0.9 * (local_error / err) ** 0.2)
            else:
                h *= 5.0
        out[i] = a
    return out
