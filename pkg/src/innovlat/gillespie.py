"""Direct-method exact sampler, independent of the graphical construction.

Waiting times are Exponential(total rate) and the jump channel is chosen
proportionally to the per-site rates, so the embedded jump chain is sampled
exactly.  Used to cross-validate the Harris replay in distribution; it does
not (and need not) match it run for run.
"""

from __future__ import annotations

import numpy as np

from . import rng, _kernels
from .lattice import LatticeSpec
from .dynamics import Params, validate_configuration
from .harris import Trajectory


def _run_kernel(spec, params, initial, horizon, seed, record,
                stop_when_no_adopters=False, full_recompute=False):
    states = np.array(initial, dtype=np.int8, copy=True)
    key = np.uint64(rng.derive_key(seed, rng.KIND_GILLESPIE, 0))
    t = 0.0
    counter = np.uint64(0)
    chunks = []
    cap = 4096 if record else 1
    while True:
        rec_t = np.empty(cap, dtype=np.float64)
        rec_site = np.empty(cap, dtype=np.int64)
        rec_old = np.empty(cap, dtype=np.int8)
        rec_new = np.empty(cap, dtype=np.int8)
        status, t, counter, n = _kernels.gillespie_run(
            states, spec.nbr, spec.deg,
            params.lam, params.alpha, params.gamma, params.forget,
            t, horizon, key, counter,
            record, stop_when_no_adopters, full_recompute,
            rec_t, rec_site, rec_old, rec_new)
        if record and n:
            chunks.append((rec_t[:n].copy(), rec_site[:n].copy(),
                           rec_old[:n].copy(), rec_new[:n].copy()))
        if status == 0:
            break
        cap *= 2
    return states, t, chunks


def evolve_gillespie(spec: LatticeSpec, params: Params, initial,
                     horizon: float, seed: int,
                     full_recompute: bool = False) -> Trajectory:
    """Exact trajectory up to the horizon (or absorption, whichever is first).

    ``full_recompute`` switches on the debug path that rebuilds every site
    rate after each jump; output must be identical to the incremental path.
    """
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    initial = validate_configuration(spec, initial)
    states, _, chunks = _run_kernel(spec, params, initial, horizon, seed,
                                    record=True, full_recompute=full_recompute)
    if chunks:
        times = np.concatenate([c[0] for c in chunks])
        sites = np.concatenate([c[1] for c in chunks])
        olds = np.concatenate([c[2] for c in chunks])
        news = np.concatenate([c[3] for c in chunks])
    else:
        times = np.empty(0, dtype=np.float64)
        sites = np.empty(0, dtype=np.int64)
        olds = np.empty(0, dtype=np.int8)
        news = np.empty(0, dtype=np.int8)
    return Trajectory(initial.copy(), times, sites, olds, news, horizon)


def final_state_gillespie(spec: LatticeSpec, params: Params, initial,
                          horizon: float, seed: int,
                          stop_when_no_adopters: bool = False) -> np.ndarray:
    """State at the horizon without recording the path (survival fast path).

    ``stop_when_no_adopters`` may only be used with gamma = 0, where a
    configuration without adopters can never regain one.
    """
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if stop_when_no_adopters and params.gamma != 0:
        raise ValueError("early adopter stop is only exact when gamma = 0")
    initial = validate_configuration(spec, initial)
    states, _, _ = _run_kernel(spec, params, initial, horizon, seed,
                               record=False,
                               stop_when_no_adopters=stop_when_no_adopters)
    return states
