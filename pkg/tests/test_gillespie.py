import numpy as np
import pytest

from innovlat import Params, build_lattice, evolve_gillespie
from innovlat.dynamics import local_rates
from innovlat.gillespie import final_state_gillespie
from innovlat.lattice import FREE, TORUS


def test_absorbing_start_returns_immediately():
    spec = build_lattice(1, [5], TORUS)
    traj = evolve_gillespie(spec, Params(lam=1, alpha=1),
                            np.zeros(5, dtype=np.int8), 10.0, 3)
    assert len(traj) == 0


def test_single_site_death_time():
    spec = build_lattice(1, [1], FREE)
    times = []
    for s in range(100000):
        traj = evolve_gillespie(spec, Params(lam=0, alpha=0),
                                np.array([2], dtype=np.int8), 50.0, s)
        assert len(traj) == 1
        assert (traj.olds[0], traj.news[0]) == (2, 0)
        times.append(traj.times[0])
    mean = np.mean(times)
    sigma = 1.0 / np.sqrt(len(times))
    assert abs(mean - 1.0) < 3 * sigma


def test_every_jump_has_positive_rate_channel():
    spec = build_lattice(1, [8], TORUS)
    params = Params(lam=1.5, alpha=2.5, gamma=0.1)
    conf = np.zeros(8, dtype=np.int8)
    conf[0] = 2
    traj = evolve_gillespie(spec, params, conf, 4.0, 17)
    state = conf.copy()
    for (_, site, old, new) in traj.changes:
        rates = dict(local_rates(spec, state, site, params))
        assert new in rates and rates[new] > 0
        assert state[site] == old
        state[site] = new


def test_pure_death_monotone_decay():
    spec = build_lattice(1, [10], TORUS)
    conf = np.array([2, 1, 0, 2, 1, 0, 2, 1, 0, 2], dtype=np.int8)
    traj = evolve_gillespie(spec, Params(lam=0, alpha=0), conf, 100.0, 9)
    informed = int((conf != 0).sum())
    for (_, _, old, new) in traj.changes:
        assert old != 0 and new == 0
        informed -= 1
    assert informed == 0


def test_deterministic_in_seed():
    spec = build_lattice(1, [12], TORUS)
    params = Params(lam=2, alpha=1, gamma=0.1)
    conf = np.zeros(12, dtype=np.int8)
    conf[6] = 2
    a = evolve_gillespie(spec, params, conf, 5.0, 123)
    b = evolve_gillespie(spec, params, conf, 5.0, 123)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.sites, b.sites)
    c = evolve_gillespie(spec, params, conf, 5.0, 124)
    assert not np.array_equal(a.times, c.times)


def test_incremental_matches_full_recompute():
    spec = build_lattice(2, [4, 4], TORUS)
    params = Params(lam=1.7, alpha=2.2, gamma=0.05, forget=0.8)
    conf = np.zeros(16, dtype=np.int8)
    conf[5] = 2
    conf[10] = 1
    for seed in range(10):
        a = evolve_gillespie(spec, params, conf, 3.0, seed)
        b = evolve_gillespie(spec, params, conf, 3.0, seed,
                             full_recompute=True)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.sites, b.sites)
        assert np.array_equal(a.news, b.news)


def test_final_state_matches_trajectory():
    spec = build_lattice(1, [15], TORUS)
    params = Params(lam=2, alpha=3)
    conf = np.zeros(15, dtype=np.int8)
    conf[7] = 2
    for seed in range(20):
        traj = evolve_gillespie(spec, params, conf, 6.0, seed)
        final = final_state_gillespie(spec, params, conf, 6.0, seed)
        assert np.array_equal(final, traj.final_state())


def test_early_adopter_stop_agrees_on_survival():
    spec = build_lattice(1, [15], TORUS)
    params = Params(lam=2, alpha=0.3)
    conf = np.zeros(15, dtype=np.int8)
    conf[7] = 2
    for seed in range(30):
        full = final_state_gillespie(spec, params, conf, 8.0, seed)
        fast = final_state_gillespie(spec, params, conf, 8.0, seed,
                                     stop_when_no_adopters=True)
        assert ((full == 2).any()) == ((fast == 2).any())


def test_early_stop_requires_gamma_zero():
    spec = build_lattice(1, [5], TORUS)
    with pytest.raises(ValueError):
        final_state_gillespie(spec, Params(lam=1, alpha=1, gamma=0.1),
                              np.zeros(5, dtype=np.int8), 1.0, 0,
                              stop_when_no_adopters=True)


def test_nonpositive_horizon_rejected():
    spec = build_lattice(1, [5], TORUS)
    with pytest.raises(ValueError):
        evolve_gillespie(spec, Params(lam=1, alpha=1),
                         np.zeros(5, dtype=np.int8), 0.0, 1)


def test_record_buffer_resume_long_run():
    # horizon long enough to overflow the first 4096-change buffer
    spec = build_lattice(1, [30], TORUS)
    params = Params(lam=3, alpha=1, gamma=0.05)
    conf = np.zeros(30, dtype=np.int8)
    conf[15] = 2
    traj = evolve_gillespie(spec, params, conf, 200.0, 5)
    assert len(traj) > 4096
    assert (np.diff(traj.times) >= 0).all()
    assert (traj.olds != traj.news).all()
