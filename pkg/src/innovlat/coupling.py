"""Couplings on shared randomness: contact projection and alpha-thinning.

Both constructions replay one event stream through two rule sets, so the
comparisons below hold deterministically per run, not just in law:

* contact projection: merging states 1 and 2 of the three-state process
  reproduces, event for event, the two-state contact process driven by the
  same lambda arrows and deaths (alpha arrows act invisibly under the
  merge);
* alpha monotonicity: running a low-alpha process on a thinned copy of the
  high-alpha arrow stream (each arrow kept with probability
  alpha_low/alpha_high, lambda/death streams shared verbatim) keeps the
  pointwise order low <= high under 0 < 1 < 2 at every event time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng, _kernels
from .lattice import LatticeSpec
from .dynamics import Params, validate_configuration
from .harris import (ALPHA_ARROW, EventStream, Trajectory, _replay,
                     generate_events)


@dataclass
class CoupledPair:
    """Two trajectories from one stream; low uses the thinned alpha arrows."""

    low: Trajectory
    high: Trajectory
    shared_seed: int
    alpha_low: float
    alpha_high: float


def project_to_contact(config) -> np.ndarray:
    """Merge states 1 and 2: xi(x) = 1 iff eta(x) != 0."""
    arr = np.asarray(config)
    return (arr != 0).astype(np.int8)


def coupled_contact(initial, stream: EventStream) -> tuple[Trajectory, Trajectory]:
    """Replay the stream as innovation process and as contact process.

    Requires a gamma-free stream (spontaneous adoptions have no contact
    counterpart).  The contact path starts from the projected initial
    configuration and ignores alpha arrows; the projection of the
    three-state path equals the contact path at every event time.
    """
    initial = validate_configuration(stream.spec, initial)
    if stream.has_gamma():
        raise ValueError("coupled_contact requires a stream with gamma = 0")
    innovation = _replay(initial, stream)
    contact = _replay(project_to_contact(initial), stream, contact=True)
    return innovation, contact


def check_projection(initial, stream: EventStream) -> int:
    """Count event times at which the projection identity fails (expect 0)."""
    initial = validate_configuration(stream.spec, initial)
    if stream.has_gamma():
        raise ValueError("projection check requires a stream with gamma = 0")
    eta = np.array(initial, dtype=np.int8, copy=True)
    xi = project_to_contact(initial)
    return int(_kernels.verify_projection(eta, xi, stream.times, stream.kinds,
                                          stream.srcs, stream.dsts))


def _thinning_keep(stream: EventStream, alpha_low: float, alpha_high: float,
                   seed: int) -> np.ndarray:
    """Keep mask over events: non-alpha events always; alpha arrows kept
    with probability alpha_low/alpha_high by a per-edge coin substream
    (coin i of an edge belongs to its i-th arrow in time order)."""
    keep = np.ones(len(stream), dtype=np.bool_)
    is_alpha = stream.kinds == ALPHA_ARROW
    if not is_alpha.any():
        return keep
    p = 0.0 if alpha_high == 0 else alpha_low / alpha_high
    idx = np.nonzero(is_alpha)[0]
    entities = stream.srcs[idx] * stream.spec.site_count + stream.dsts[idx]
    base = rng.derive_key(seed, rng.KIND_THIN)
    order = np.argsort(entities, kind="stable")  # stable: time order per edge
    ent_sorted = entities[order]
    uniq, starts = np.unique(ent_sorted, return_index=True)
    counts = np.diff(np.append(starts, len(ent_sorted)))
    coins = np.empty(len(idx), dtype=np.float64)
    keys = rng.child_keys(base, uniq)
    for k, (s0, c) in enumerate(zip(starts, counts)):
        coins[order[s0:s0 + c]] = rng.uniforms(keys[k], int(c))
    keep[idx] = coins < p
    return keep


def coupled_alpha_pair(spec: LatticeSpec, lam: float, alpha_low: float,
                       alpha_high: float, initial, horizon: float,
                       seed: int, forget: float = 1.0) -> CoupledPair:
    """Monotone coupling of two alpha values on one dominating stream.

    Pointwise ordering low <= high holds at every event time; gamma is
    fixed at 0 (the base model, where the order is preserved by every rule).
    """
    if not 0 <= alpha_low <= alpha_high:
        raise ValueError("need 0 <= alpha_low <= alpha_high")
    initial = validate_configuration(spec, initial)
    params_high = Params(lam=lam, alpha=alpha_high, gamma=0.0, forget=forget)
    stream = generate_events(spec, params_high, horizon, seed)
    keep = _thinning_keep(stream, alpha_low, alpha_high, seed)
    high = _replay(initial, stream)
    low_stream = EventStream(spec, horizon, seed, stream.times[keep],
                             stream.kinds[keep], stream.srcs[keep],
                             stream.dsts[keep])
    low = _replay(initial, low_stream)
    return CoupledPair(low=low, high=high, shared_seed=seed,
                       alpha_low=alpha_low, alpha_high=alpha_high)


def check_alpha_ordering(spec: LatticeSpec, lam: float, alpha_low: float,
                         alpha_high: float, initial, horizon: float,
                         seed: int, forget: float = 1.0) -> int:
    """Count event times violating low <= high in the coupled pair (expect 0)."""
    if not 0 <= alpha_low <= alpha_high:
        raise ValueError("need 0 <= alpha_low <= alpha_high")
    initial = validate_configuration(spec, initial)
    params_high = Params(lam=lam, alpha=alpha_high, gamma=0.0, forget=forget)
    stream = generate_events(spec, params_high, horizon, seed)
    keep = _thinning_keep(stream, alpha_low, alpha_high, seed)
    low = np.array(initial, dtype=np.int8, copy=True)
    high = np.array(initial, dtype=np.int8, copy=True)
    return int(_kernels.verify_alpha_ordering(low, high, stream.times,
                                              stream.kinds, stream.srcs,
                                              stream.dsts, keep))


def alpha_thinned_arrivals(spec: LatticeSpec, lam: float, alpha_low: float,
                           alpha_high: float, horizon: float, seed: int,
                           forget: float = 1.0):
    """Arrival times of the thinned alpha stream (for rate/statistics checks)."""
    params_high = Params(lam=lam, alpha=alpha_high, gamma=0.0, forget=forget)
    stream = generate_events(spec, params_high, horizon, seed)
    keep = _thinning_keep(stream, alpha_low, alpha_high, seed)
    sel = keep & (stream.kinds == ALPHA_ARROW)
    return stream.times[sel], stream.srcs[sel], stream.dsts[sel]
