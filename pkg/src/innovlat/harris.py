"""Graphical construction: seeded Poisson event streams and their replay.

For every ordered neighbor pair (x, y) the stream carries lambda arrows at
rate lam and alpha arrows at rate alpha; every site carries deaths at rate
``forget`` and gamma marks at rate gamma.  Each process is an independent
substream keyed by (seed, kind, entity), where the entity of an arrow
process is x * site_count + y and of a site process the site index.  The
merged stream is sorted by (time, kind, entity); exact timestamp
collisions (possible only through floating-point coincidence) are broken
by that lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from . import rng, _kernels
from .lattice import LatticeSpec
from .dynamics import Params, validate_configuration

LAMBDA_ARROW = _kernels.K_LAMBDA
ALPHA_ARROW = _kernels.K_ALPHA
DEATH = _kernels.K_DEATH
GAMMA_MARK = _kernels.K_GAMMA

KIND_NAMES = {LAMBDA_ARROW: "lambda", ALPHA_ARROW: "alpha",
              DEATH: "death", GAMMA_MARK: "gamma"}
KIND_CODES = {v: k for k, v in KIND_NAMES.items()}
_KIND_TO_STREAM = {LAMBDA_ARROW: rng.KIND_LAMBDA, ALPHA_ARROW: rng.KIND_ALPHA,
                   DEATH: rng.KIND_DEATH, GAMMA_MARK: rng.KIND_GAMMA}


class Event(NamedTuple):
    time: float
    kind: int
    src: int
    dst: int  # -1 for site events (death, gamma)


@dataclass
class EventStream:
    """Time-sorted realization of all Poisson arrivals up to the horizon."""

    spec: LatticeSpec
    horizon: float
    seed: int
    times: np.ndarray
    kinds: np.ndarray
    srcs: np.ndarray
    dsts: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self.times)):
            yield Event(float(self.times[i]), int(self.kinds[i]),
                        int(self.srcs[i]), int(self.dsts[i]))

    def has_gamma(self) -> bool:
        return bool((self.kinds == GAMMA_MARK).any())


@dataclass
class Trajectory:
    """Piecewise-constant path: initial configuration plus effective changes."""

    initial: np.ndarray
    times: np.ndarray
    sites: np.ndarray
    olds: np.ndarray
    news: np.ndarray
    horizon: float

    def __len__(self) -> int:
        return len(self.times)

    @property
    def changes(self):
        for i in range(len(self.times)):
            yield (float(self.times[i]), int(self.sites[i]),
                   int(self.olds[i]), int(self.news[i]))

    def state_at(self, t: float) -> np.ndarray:
        """Right-continuous state at time t."""
        if t < 0 or t > self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        out = self.initial.copy()
        k = np.searchsorted(self.times, t, side="right")
        for i in range(k):
            out[self.sites[i]] = self.news[i]
        return out

    def final_state(self) -> np.ndarray:
        out = self.initial.copy()
        # duplicate indices: numpy keeps the last value, i.e. the latest change
        out[self.sites] = self.news
        return out


def ordered_edges(spec: LatticeSpec) -> np.ndarray:
    """All ordered neighbor pairs (x, y), ascending in (x, y); shape (E, 2)."""
    xs = np.repeat(np.arange(spec.site_count, dtype=np.int64), spec.deg)
    ys = spec.nbr[spec.nbr >= 0]
    return np.stack([xs, ys], axis=1)


def _edge_entities(spec: LatticeSpec, edges: np.ndarray) -> np.ndarray:
    return edges[:, 0] * spec.site_count + edges[:, 1]


def generate_events(spec: LatticeSpec, params: Params, horizon: float,
                    seed: int) -> EventStream:
    """Seeded Poisson arrivals for the whole space-time box, merged and sorted."""
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    edges = ordered_edges(spec)
    entities = _edge_entities(spec, edges)
    sites = np.arange(spec.site_count, dtype=np.int64)

    parts = []  # (times, kind, src, dst, entity)

    def add_family(kind, rate, owners_src, owners_dst, entity_ids):
        keys = rng.child_keys(rng.derive_key(seed, _KIND_TO_STREAM[kind]),
                              entity_ids)
        t, owner = rng.arrival_counts_matrix(keys, rate, horizon)
        if len(t) == 0:
            return
        parts.append((t,
                      np.full(len(t), kind, dtype=np.uint8),
                      owners_src[owner],
                      owners_dst[owner],
                      entity_ids[owner]))

    minus_one = np.full(spec.site_count, -1, dtype=np.int64)
    if len(edges):
        add_family(LAMBDA_ARROW, params.lam, edges[:, 0], edges[:, 1], entities)
        add_family(ALPHA_ARROW, params.alpha, edges[:, 0], edges[:, 1], entities)
    add_family(DEATH, params.forget, sites, minus_one, sites)
    add_family(GAMMA_MARK, params.gamma, sites, minus_one, sites)

    if not parts:
        empty_f = np.empty(0, dtype=np.float64)
        empty_i = np.empty(0, dtype=np.int64)
        return EventStream(spec, horizon, seed, empty_f,
                           np.empty(0, dtype=np.uint8), empty_i, empty_i.copy())

    times = np.concatenate([p[0] for p in parts])
    kinds = np.concatenate([p[1] for p in parts])
    srcs = np.concatenate([p[2] for p in parts])
    dsts = np.concatenate([p[3] for p in parts])
    ents = np.concatenate([p[4] for p in parts])
    order = np.lexsort((ents, kinds, times))
    return EventStream(spec, horizon, seed, times[order], kinds[order],
                       srcs[order], dsts[order])


def apply_event(config: np.ndarray, e: Event) -> np.ndarray:
    """One-step rule application; returns a new configuration (may be equal)."""
    out = np.array(config, dtype=np.int8, copy=True)
    if e.kind == LAMBDA_ARROW:
        if out[e.src] != 0 and out[e.dst] == 0:
            out[e.dst] = 1
    elif e.kind == ALPHA_ARROW:
        if out[e.src] == 2 and out[e.dst] == 1:
            out[e.dst] = 2
    elif e.kind == DEATH:
        if out[e.src] != 0:
            out[e.src] = 0
    elif e.kind == GAMMA_MARK:
        if out[e.src] == 0:
            out[e.src] = 2
    else:
        raise ValueError(f"unknown event kind {e.kind}")
    return out


def _replay(initial, stream: EventStream, clamped=None, contact=False) -> Trajectory:
    states = np.array(initial, dtype=np.int8, copy=True)
    m = len(stream)
    rec_t = np.empty(m, dtype=np.float64)
    rec_site = np.empty(m, dtype=np.int64)
    rec_old = np.empty(m, dtype=np.int8)
    rec_new = np.empty(m, dtype=np.int8)
    if contact:
        n = _kernels.replay_contact(states, stream.times, stream.kinds,
                                    stream.srcs, stream.dsts,
                                    rec_t, rec_site, rec_old, rec_new)
    else:
        if clamped is None:
            clamped = np.zeros(len(states), dtype=np.bool_)
        n = _kernels.replay_innovation(states, stream.times, stream.kinds,
                                       stream.srcs, stream.dsts, clamped,
                                       rec_t, rec_site, rec_old, rec_new)
    return Trajectory(np.array(initial, dtype=np.int8, copy=True),
                      rec_t[:n].copy(), rec_site[:n].copy(),
                      rec_old[:n].copy(), rec_new[:n].copy(), stream.horizon)


def evolve_harris(initial, stream: EventStream, clamped=None) -> Trajectory:
    """Deterministic replay of the event stream from the initial configuration.

    ``clamped`` is an optional boolean mask of sites frozen at their initial
    state (used by the block constructions for worst-case boundaries).
    """
    initial = validate_configuration(stream.spec, initial)
    return _replay(initial, stream, clamped=clamped)


def dump_stream(stream: EventStream, path) -> None:
    """Line format: ``time kind from to`` (to = -1 for site events)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# horizon {stream.horizon!r} seed {stream.seed}\n")
        for e in stream:
            fh.write(f"{e.time!r} {KIND_NAMES[e.kind]} {e.src} {e.dst}\n")


def load_stream(spec: LatticeSpec, path) -> EventStream:
    times, kinds, srcs, dsts = [], [], [], []
    horizon = 0.0
    seed = 0
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                toks = line.split()
                horizon = float(toks[2])
                seed = int(toks[4])
                continue
            t, kind, src, dst = line.split()
            times.append(float(t))
            kinds.append(KIND_CODES[kind])
            srcs.append(int(src))
            dsts.append(int(dst))
    return EventStream(spec, horizon, seed,
                       np.array(times, dtype=np.float64),
                       np.array(kinds, dtype=np.uint8),
                       np.array(srcs, dtype=np.int64),
                       np.array(dsts, dtype=np.int64))
