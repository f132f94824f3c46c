"""Phase-diagram sweeps and bisection estimates of critical rates.

Criticality is defined in infinite volume only; everything here is the
finite-size proxy "survival probability to horizon T on the given lattice
crosses a threshold", with the lattice, horizon and threshold as explicit
knobs.  Midpoint estimates whose confidence interval straddles the
threshold are retried with doubled replicates (at most twice) and flagged
if still ambiguous, never silently resolved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .lattice import LatticeSpec
from .dynamics import Params
from .observables import ADOPTION, AWARENESS, SurvivalEstimate, estimate_survival

LAMBDA_AXIS = "lambda"
ALPHA_AXIS = "alpha"


@dataclass(frozen=True)
class SweepRow:
    lam: float
    alpha: float
    gamma: float
    mode: str
    est: SurvivalEstimate


def _float_bits(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def sweep_point_seed(seed: int, lam: float, alpha: float, gamma: float) -> int:
    """Seed of one grid point, derived from the parameter values themselves
    (stable under grid reshaping)."""
    return int(rng.derive_key(seed, rng.KIND_SWEEP, _float_bits(lam),
                              _float_bits(alpha), _float_bits(gamma)))


def sweep(lambdas, alphas, gammas, spec: LatticeSpec, initial, horizon: float,
          mode: str, replicates: int, seed: int, forget: float = 1.0,
          sampler: str = "gillespie", threads: int = 1) -> list[SweepRow]:
    """Survival estimate at every (lambda, alpha, gamma) grid point.

    Rows are ordered lexicographically in the parameter values.
    """
    lambdas, alphas, gammas = (sorted(set(map(float, v)))
                               for v in (lambdas, alphas, gammas))
    if not (lambdas and alphas and gammas):
        raise ValueError("grid must be non-empty on every axis")
    rows = []
    for lam in lambdas:
        for alpha in alphas:
            for gamma in gammas:
                params = Params(lam=lam, alpha=alpha, gamma=gamma, forget=forget)
                est = estimate_survival(
                    spec, params, initial, horizon, mode, replicates,
                    sweep_point_seed(seed, lam, alpha, gamma),
                    sampler=sampler, threads=threads)
                rows.append(SweepRow(lam, alpha, gamma, mode, est))
    return rows


def sweep_to_csv(rows: list[SweepRow], path, header_comment: str = "") -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("lambda,alpha,gamma,mode,successes,replicates,"
                 "estimate,ci_low,ci_high\n")
        for r in rows:
            e = r.est
            fh.write(f"{r.lam!r},{r.alpha!r},{r.gamma!r},{r.mode},"
                     f"{e.successes},{e.replicates},{e.estimate!r},"
                     f"{e.ci_low!r},{e.ci_high!r}\n")


def sweep_to_jsonl(rows: list[SweepRow], path, meta: dict) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for r in rows:
            rec = {"params": {"lambda": r.lam, "alpha": r.alpha,
                              "gamma": r.gamma},
                   "mode": r.mode, "successes": r.est.successes,
                   "replicates": r.est.replicates, "estimate": r.est.estimate,
                   "ci_low": r.est.ci_low, "ci_high": r.est.ci_high}
            rec.update(meta)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


@dataclass(frozen=True)
class CriticalEstimate:
    """Finite-size bracket for a critical rate (not the infinite-volume value)."""

    axis: str
    bracket_low: float
    bracket_high: float
    midpoint: float
    threshold: float
    horizon: float
    replicates: int
    seed: int
    flagged: bool
    evaluations: tuple = field(default=())

    def to_json_dict(self, extra: dict | None = None) -> dict:
        d = {"axis": self.axis, "bracket_low": self.bracket_low,
             "bracket_high": self.bracket_high, "midpoint": self.midpoint,
             "threshold": self.threshold, "horizon": self.horizon,
             "replicates": self.replicates, "seed": self.seed,
             "flagged": self.flagged,
             "evaluations": [{"value": v, "estimate": e, "replicates": n}
                             for (v, e, n) in self.evaluations]}
        if extra:
            d.update(extra)
        return d


def _with_axis(params: Params, axis: str, value: float) -> Params:
    if axis == LAMBDA_AXIS:
        return replace(params, lam=value)
    if axis == ALPHA_AXIS:
        return replace(params, alpha=value)
    raise ValueError(f"unknown axis {axis!r}")


def estimate_critical(axis: str, fixed_params: Params,
                      bracket: tuple[float, float], threshold: float,
                      tolerance: float, spec: LatticeSpec, initial,
                      horizon: float, replicates: int, seed: int,
                      mode: str | None = None, sampler: str = "gillespie",
                      threads: int = 1) -> CriticalEstimate:
    """Noisy bisection of the survival proxy along one rate axis.

    The default observable is awareness survival on the lambda axis and
    adoption survival on the alpha axis.  The bracket must straddle the
    threshold (validated up front).  Ambiguous midpoints (CI containing the
    threshold) get up to two replicate-doubling retries, then the result is
    flagged.
    """
    low, high = float(bracket[0]), float(bracket[1])
    if not low < high:
        raise ValueError("bracket_low must be < bracket_high")
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    if mode is None:
        mode = AWARENESS if axis == LAMBDA_AXIS else ADOPTION

    eval_counter = 0
    evaluations = []
    flagged = False

    def measure(value: float) -> SurvivalEstimate:
        nonlocal eval_counter, flagged
        reps = replicates
        for attempt in range(3):
            run_seed = rng.derive_seed(seed, rng.KIND_CRITICAL, eval_counter)
            eval_counter += 1
            est = estimate_survival(spec, fixed_params_with(value), initial,
                                    horizon, mode, reps, run_seed,
                                    sampler=sampler, threads=threads)
            evaluations.append((value, est.estimate, reps))
            if not (est.ci_low <= threshold <= est.ci_high):
                return est
            if attempt < 2:
                reps *= 2
        flagged = True
        return est

    def fixed_params_with(value: float) -> Params:
        return _with_axis(fixed_params, axis, value)

    est_low = measure(low)
    if not est_low.estimate < threshold:
        raise ValueError(
            f"bracket invalid: estimate {est_low.estimate} at {axis}={low} "
            f"is not below threshold {threshold}")
    est_high = measure(high)
    if not est_high.estimate >= threshold:
        raise ValueError(
            f"bracket invalid: estimate {est_high.estimate} at {axis}={high} "
            f"is not at or above threshold {threshold}")

    while high - low > tolerance:
        mid = 0.5 * (low + high)
        est = measure(mid)
        if est.estimate >= threshold:
            high = mid
        else:
            low = mid

    return CriticalEstimate(axis=axis, bracket_low=low, bracket_high=high,
                            midpoint=0.5 * (low + high), threshold=threshold,
                            horizon=horizon, replicates=replicates, seed=seed,
                            flagged=flagged, evaluations=tuple(evaluations))
