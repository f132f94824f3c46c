"""Space-time block constructions and oriented reachability.

Extinction blocks: the process runs on the box [-2L, 2L]^d over [0, 2T]
under the maximal adverse boundary condition - every site starts as an
adopter and the boundary faces are clamped to the adopter state for all
time (their deaths are suppressed; they keep emitting arrows).  A block is
open iff no site of the central window [-L, L]^d is an adopter at any time
in [T, 2T].  Because the clamped all-adopter boundary dominates every other
boundary configuration under the monotone state order (see coupling), an
open outcome certifies openness for every boundary configuration.

Survival blocks (d = 1): on the box (-4L, 4L) over [0, T], a block is open
iff the entry slice has no aware sites and at least k = floor(sqrt(L))
adopters in the central interval I = [-L, L], and at time T the same holds
in both shifted intervals I +- 2L.

Independent per-block sampling estimates the marginal open probability
only; the correlated field over overlapping boxes is available for
survival blocks through ``survival_field_from_realization``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .lattice import FREE, LatticeSpec, build_lattice
from .dynamics import Params, validate_configuration
from .harris import evolve_harris, generate_events
from .observables import SurvivalEstimate, sample_states


@dataclass(frozen=True)
class ExtinctionBlockSpec:
    L: int
    T: float
    dimension: int = 1

    def __post_init__(self):
        if self.L < 1 or self.T <= 0 or self.dimension < 1:
            raise ValueError("need L >= 1, T > 0, dimension >= 1")

    def lattice(self) -> LatticeSpec:
        side = 4 * self.L + 1  # coordinates -2L..2L
        return build_lattice(self.dimension, [side] * self.dimension, FREE)

    def clamped_mask(self, spec: LatticeSpec) -> np.ndarray:
        """Spatial faces |x_i| = 2L of the box."""
        side = 4 * self.L + 1
        coords = np.indices(spec.side_lengths).reshape(self.dimension, -1)
        return ((coords == 0) | (coords == side - 1)).any(axis=0)

    def window_mask(self, spec: LatticeSpec) -> np.ndarray:
        """Central window [-L, L]^d."""
        coords = np.indices(spec.side_lengths).reshape(self.dimension, -1)
        return ((coords >= self.L) & (coords <= 3 * self.L)).all(axis=0)


@dataclass(frozen=True)
class SurvivalBlockSpec:
    L: int
    T: float

    def __post_init__(self):
        if self.L < 1 or self.T <= 0:
            raise ValueError("need L >= 1 and T > 0")

    @property
    def k(self) -> int:
        return math.isqrt(self.L)

    def lattice(self) -> LatticeSpec:
        side = 8 * self.L - 1  # open interval (-4L, 4L)
        return build_lattice(1, [side], FREE)

    def interval_mask(self, spec: LatticeSpec, shift: int) -> np.ndarray:
        """Sites of I + 2 * shift * L = [-L, L] + 2 shift L, as a mask."""
        center = 4 * self.L - 1 + 2 * shift * self.L
        idx = np.arange(spec.site_count)
        return (idx >= center - self.L) & (idx <= center + self.L)


def default_survival_config(bspec: SurvivalBlockSpec) -> np.ndarray:
    """Canonical block entry: k adopters packed at the center of I, no awares."""
    spec = bspec.lattice()
    conf = np.zeros(spec.site_count, dtype=np.int8)
    center = 4 * bspec.L - 1
    k = max(bspec.k, 1)
    start = center - (k - 1) // 2
    conf[start:start + k] = 2
    return conf


def classify_extinction_block(params: Params, bspec: ExtinctionBlockSpec,
                              seed: int) -> bool:
    """True (open) iff the central window holds no adopter during [T, 2T]."""
    if params.gamma != 0:
        raise ValueError("extinction blocks are defined for gamma = 0")
    spec = bspec.lattice()
    clamped = bspec.clamped_mask(spec)
    window = bspec.window_mask(spec)
    initial = np.full(spec.site_count, 2, dtype=np.int8)
    stream = generate_events(spec, params, 2 * bspec.T, seed)
    traj = evolve_harris(initial, stream, clamped=clamped)
    if (traj.state_at(bspec.T)[window] == 2).any():
        return False
    late = (traj.times > bspec.T) & (traj.news == 2)
    return not window[traj.sites[late]].any()


def classify_survival_block(params: Params, bspec: SurvivalBlockSpec,
                            origin_config, seed: int) -> bool:
    """Two-slice openness condition, evaluated on one simulated block path."""
    spec = bspec.lattice()
    initial = validate_configuration(spec, origin_config)
    center = bspec.interval_mask(spec, 0)
    if (initial[center] == 1).any() or (initial[center] == 2).sum() < bspec.k:
        return False
    stream = generate_events(spec, params, bspec.T, seed)
    final = evolve_harris(initial, stream).final_state()
    for shift in (-1, +1):
        mask = bspec.interval_mask(spec, shift)
        if (final[mask] == 1).any() or (final[mask] == 2).sum() < bspec.k:
            return False
    return True


@dataclass
class BlockField:
    """Open/closed classification on a window of the macroscopic lattice.

    Rows are time layers n = 0..height-1; columns are x = x_min..x_min +
    width - 1.  When parity_even_only is set only sites with x + n even
    exist (the survival construction's lattice).
    """

    x_min: int
    width: int
    height: int
    open: np.ndarray
    parity_even_only: bool

    def valid(self, x: int, n: int) -> bool:
        if not (0 <= n < self.height and self.x_min <= x < self.x_min + self.width):
            return False
        return not (self.parity_even_only and (x + n) % 2 != 0)

    def is_open(self, x: int, n: int) -> bool:
        return self.valid(x, n) and bool(self.open[n, x - self.x_min])

    def sites(self):
        for n in range(self.height):
            for x in range(self.x_min, self.x_min + self.width):
                if self.valid(x, n):
                    yield (x, n)


def sample_block_field(params: Params, bspec, window: tuple[int, int],
                       replicates_per_site: int, seed: int,
                       origin_config=None) -> tuple[BlockField, SurvivalEstimate]:
    """Classify each macroscopic site independently with derived seeds.

    The field records each site's first-replicate outcome; the returned
    estimate pools all sites and replicates into one marginal open-fraction
    (translation invariance makes the marginal identical across sites).
    """
    width, height = window
    if width < 1 or height < 1 or replicates_per_site < 1:
        raise ValueError("window and replicates must be positive")
    survival = isinstance(bspec, SurvivalBlockSpec)
    if survival and origin_config is None:
        origin_config = default_survival_config(bspec)
    x_min = -(width // 2)
    field = BlockField(x_min, width, height,
                       np.zeros((height, width), dtype=np.bool_),
                       parity_even_only=survival)
    successes = 0
    trials = 0
    for n in range(height):
        for x in range(x_min, x_min + width):
            if not field.valid(x, n):
                continue
            for j in range(replicates_per_site):
                s = int(rng.derive_key(seed, rng.KIND_BLOCK, x, n, j))
                if survival:
                    is_open = classify_survival_block(params, bspec,
                                                      origin_config, s)
                else:
                    is_open = classify_extinction_block(params, bspec, s)
                trials += 1
                successes += is_open
                if j == 0:
                    field.open[n, x - x_min] = is_open
    return field, SurvivalEstimate.from_counts(successes, trials)


def survival_field_from_realization(params: Params, bspec: SurvivalBlockSpec,
                                    window: tuple[int, int], seed: int,
                                    initial=None) -> BlockField:
    """Correlated block field read off one large space-time realization.

    Simulates a single free box covering every interval the window's blocks
    inspect, then evaluates the two-slice condition for each block on that
    shared path.  Slower, but reproduces the dependence between
    overlapping blocks.
    """
    width, height = window
    if width < 1 or height < 1:
        raise ValueError("window must be positive")
    x_min = -(width // 2)
    x_max = x_min + width - 1
    lo = 2 * x_min * bspec.L - 3 * bspec.L
    hi = 2 * x_max * bspec.L + 3 * bspec.L
    spec = build_lattice(1, [hi - lo + 1], FREE)
    offset = -lo

    if initial is None:
        initial = np.zeros(spec.site_count, dtype=np.int8)
        k = max(bspec.k, 1)
        start = offset - (k - 1) // 2
        initial[start:start + k] = 2
    initial = validate_configuration(spec, initial)

    horizon = (height + 1) * bspec.T
    stream = generate_events(spec, params, horizon, seed)
    traj = evolve_harris(initial, stream)
    slices = sample_states(traj, np.arange(height + 2) * bspec.T)

    def interval_ok(state, x):
        c0 = offset + 2 * x * bspec.L
        seg = state[max(c0 - bspec.L, 0):c0 + bspec.L + 1]
        return not (seg == 1).any() and (seg == 2).sum() >= bspec.k

    field = BlockField(x_min, width, height,
                       np.zeros((height, width), dtype=np.bool_),
                       parity_even_only=True)
    for n in range(height):
        for x in range(x_min, x_max + 1):
            if not field.valid(x, n):
                continue
            field.open[n, x - x_min] = (
                interval_ok(slices[n], x)
                and interval_ok(slices[n + 1], x - 1)
                and interval_ok(slices[n + 1], x + 1)
            )
    return field


def oriented_reachability(field: BlockField, origins=None) -> tuple[int, bool]:
    """Highest row reachable through open sites via (x, n) -> (x +- 1, n + 1).

    Origins default to the open sites of row 0.  Returns (max_row,
    top_reached); max_row is -1 when no origin is open.
    """
    if origins is None:
        origins = [(x, 0) for x in range(field.x_min, field.x_min + field.width)]
    frontier = {(x, n) for (x, n) in origins if field.is_open(x, n)}
    if not frontier:
        return -1, False
    seen = set(frontier)
    max_row = max(n for _, n in frontier)
    while frontier:
        nxt = set()
        for (x, n) in frontier:
            for dx in (-1, 1):
                cand = (x + dx, n + 1)
                if cand not in seen and field.is_open(*cand):
                    nxt.add(cand)
                    seen.add(cand)
        if nxt:
            max_row = max(max_row, max(n for _, n in nxt))
        frontier = nxt
    return max_row, max_row == field.height - 1


def field_to_csv(field: BlockField, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("x,n,open\n")
        for (x, n) in field.sites():
            fh.write(f"{x},{n},{int(field.is_open(x, n))}\n")
