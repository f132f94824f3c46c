import numpy as np
import pytest

from innovlat import build_lattice, neighbors
from innovlat.lattice import FREE, TORUS


def test_build_1d_torus():
    spec = build_lattice(1, [5], TORUS)
    assert spec.site_count == 5
    assert spec.dimension == 1


def test_build_2d_free():
    spec = build_lattice(2, [3, 4], FREE)
    assert spec.site_count == 12


def test_rejects_bad_specs():
    with pytest.raises(ValueError):
        build_lattice(0, [], TORUS)
    with pytest.raises(ValueError):
        build_lattice(1, [2], TORUS)
    with pytest.raises(ValueError):
        build_lattice(2, [3], TORUS)
    with pytest.raises(ValueError):
        build_lattice(1, [0], FREE)
    with pytest.raises(ValueError):
        build_lattice(1, [5], "weird")


def test_wraparound_neighbors():
    spec = build_lattice(1, [5], TORUS)
    assert neighbors(spec, 0) == [1, 4]
    assert neighbors(spec, 4) == [0, 3]


def test_free_boundary_truncation():
    spec = build_lattice(1, [5], FREE)
    assert neighbors(spec, 0) == [1]
    assert neighbors(spec, 4) == [3]
    assert neighbors(spec, 2) == [1, 3]


def test_2d_free_corner():
    spec = build_lattice(2, [3, 3], FREE)
    corner = spec.index((0, 0))
    got = {spec.coords(s) for s in neighbors(spec, corner)}
    assert got == {(1, 0), (0, 1)}


def test_torus_degree_2d_everywhere():
    for d, sides in [(1, [7]), (2, [3, 5]), (3, [3, 3, 4])]:
        spec = build_lattice(d, sides, TORUS)
        for x in range(spec.site_count):
            ns = neighbors(spec, x)
            assert len(ns) == 2 * d
            assert len(set(ns)) == len(ns)


def test_symmetry_both_boundaries():
    for boundary in (TORUS, FREE):
        for d, sides in [(1, [6]), (2, [4, 5] if boundary == FREE else [3, 5])]:
            spec = build_lattice(d, sides, boundary)
            for x in range(spec.site_count):
                for y in neighbors(spec, x):
                    assert x in neighbors(spec, y)


def test_l1_distance_one():
    spec = build_lattice(2, [4, 6], FREE)
    for x in range(spec.site_count):
        cx = spec.coords(x)
        for y in neighbors(spec, x):
            cy = spec.coords(y)
            assert sum(abs(a - b) for a, b in zip(cx, cy)) == 1


def test_torus_translation_invariance():
    spec = build_lattice(2, [4, 5], TORUS)
    sides = spec.side_lengths
    shift = (1, 3)
    for x in range(spec.site_count):
        cx = spec.coords(x)
        xs = spec.index(tuple((c + s) % m for c, s, m in zip(cx, shift, sides)))
        shifted = sorted(
            spec.index(tuple((spec.coords(y)[i] + shift[i]) % sides[i]
                             for i in range(2)))
            for y in neighbors(spec, x))
        assert shifted == neighbors(spec, xs)


def test_side_one_degenerate():
    spec = build_lattice(1, [1], TORUS)
    assert neighbors(spec, 0) == []
    spec2 = build_lattice(2, [1, 4], FREE)
    assert all(len(neighbors(spec2, x)) <= 2 for x in range(4))


def test_index_coords_roundtrip():
    spec = build_lattice(3, [3, 4, 5], FREE)
    for x in range(spec.site_count):
        assert spec.index(spec.coords(x)) == x


def test_invalid_site_rejected():
    spec = build_lattice(1, [5], TORUS)
    with pytest.raises(ValueError):
        neighbors(spec, 5)
    with pytest.raises(ValueError):
        neighbors(spec, -1)
