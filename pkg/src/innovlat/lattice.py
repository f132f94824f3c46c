"""Finite d-dimensional lattice geometry.

Sites are indexed 0..site_count-1 in row-major order over the coordinate
box (axis 0 most significant).  Neighbor lists are precomputed, ascending
by site index, so event replay is bit-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TORUS = "torus"
FREE = "free"


@dataclass(frozen=True)
class LatticeSpec:
    """Validated lattice geometry with a precomputed neighbor table.

    ``nbr`` has shape (site_count, 2*dimension) with entries sorted ascending
    and padded with -1; ``deg[i]`` is the number of valid entries in row i.
    """

    dimension: int
    side_lengths: tuple[int, ...]
    boundary: str
    site_count: int
    nbr: np.ndarray = field(repr=False, compare=False)
    deg: np.ndarray = field(repr=False, compare=False)

    def coords(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.site_count:
            raise ValueError(f"site index {index} out of range")
        out = []
        for side in reversed(self.side_lengths):
            out.append(index % side)
            index //= side
        return tuple(reversed(out))

    def index(self, coords) -> int:
        if len(coords) != self.dimension:
            raise ValueError("coordinate arity does not match dimension")
        idx = 0
        for c, side in zip(coords, self.side_lengths):
            if not 0 <= c < side:
                raise ValueError(f"coordinate {coords} outside the box")
            idx = idx * side + c
        return idx


def build_lattice(dimension: int, sides, boundary: str = TORUS) -> LatticeSpec:
    """Construct a validated LatticeSpec.

    Torus sides of 2 are rejected: the two neighbors of a site would
    coincide.  A side of 1 is the degenerate case contributing no neighbors
    along that axis.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    sides = tuple(int(s) for s in sides)
    if len(sides) != dimension:
        raise ValueError("need exactly one side length per dimension")
    if any(s < 1 for s in sides):
        raise ValueError("side lengths must be >= 1")
    if boundary not in (TORUS, FREE):
        raise ValueError(f"unknown boundary {boundary!r}")
    if boundary == TORUS and any(s == 2 for s in sides):
        raise ValueError("torus sides of 2 are rejected (duplicate neighbors)")
    site_count = 1
    for s in sides:
        site_count *= s
    if site_count > np.iinfo(np.int64).max // max(site_count, 1):
        raise ValueError("site count too large for 64-bit edge indexing")

    idx = np.arange(site_count, dtype=np.int64).reshape(sides)
    cols = []
    for axis, side in enumerate(sides):
        if side == 1:
            continue
        plus = np.roll(idx, -1, axis=axis)
        minus = np.roll(idx, 1, axis=axis)
        if boundary == FREE:
            sl_last = [slice(None)] * dimension
            sl_last[axis] = side - 1
            plus[tuple(sl_last)] = -1
            sl_first = [slice(None)] * dimension
            sl_first[axis] = 0
            minus[tuple(sl_first)] = -1
        cols.append(plus.reshape(-1))
        cols.append(minus.reshape(-1))

    width = 2 * dimension
    nbr = np.full((site_count, width), -1, dtype=np.int64)
    if cols:
        raw = np.stack(cols, axis=1)
        # sort ascending with -1 padding pushed to the end
        key = np.where(raw < 0, np.iinfo(np.int64).max, raw)
        order = np.argsort(key, axis=1, kind="stable")
        sorted_raw = np.take_along_axis(raw, order, axis=1)
        sorted_raw = np.where(
            np.take_along_axis(key, order, axis=1) == np.iinfo(np.int64).max,
            -1,
            sorted_raw,
        )
        nbr[:, : sorted_raw.shape[1]] = sorted_raw
    deg = (nbr >= 0).sum(axis=1).astype(np.int64)
    nbr.setflags(write=False)
    deg.setflags(write=False)
    return LatticeSpec(dimension, sides, boundary, site_count, nbr, deg)


def neighbors(spec: LatticeSpec, x: int) -> list[int]:
    """Nearest neighbors of site x, ascending by index."""
    if not 0 <= x < spec.site_count:
        raise ValueError(f"site index {x} out of range")
    row = spec.nbr[x]
    return [int(s) for s in row[: spec.deg[x]]]
