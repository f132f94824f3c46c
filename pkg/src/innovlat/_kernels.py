"""Numba kernels for event replay and the direct-method sampler.

All kernels are deterministic: the only randomness is the SplitMix64
counter stream from rng.py, reproduced here so the jitted code draws
bit-identical uniforms to the vectorized numpy path.

Event kind codes (shared with harris.py): 0 = lambda arrow, 1 = alpha
arrow, 2 = death, 3 = gamma mark.
"""

from __future__ import annotations

import numba as nb
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0

K_LAMBDA = 0
K_ALPHA = 1
K_DEATH = 2
K_GAMMA = 3


@nb.njit(nb.uint64(nb.uint64), cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


@nb.njit(nb.float64(nb.uint64, nb.uint64), cache=True, inline="always")
def _u01(key, counter):
    return (_mix64(key + counter * GOLDEN) >> np.uint64(11)) * _INV53


@nb.njit(cache=True, nogil=True)
def replay_innovation(states, times, kinds, srcs, dsts, clamped,
                      rec_t, rec_site, rec_old, rec_new):
    """Fold events over the three-state rules; record effective changes.

    Clamped sites never change state (their deaths are suppressed); arrows
    emanating from them still act.  Returns the number of changes recorded.
    """
    n = 0
    for i in range(times.shape[0]):
        k = kinds[i]
        if k == K_LAMBDA:
            x = srcs[i]
            y = dsts[i]
            if states[y] == 0 and states[x] != 0 and not clamped[y]:
                rec_t[n] = times[i]
                rec_site[n] = y
                rec_old[n] = 0
                rec_new[n] = 1
                n += 1
                states[y] = 1
        elif k == K_ALPHA:
            x = srcs[i]
            y = dsts[i]
            if states[x] == 2 and states[y] == 1 and not clamped[y]:
                rec_t[n] = times[i]
                rec_site[n] = y
                rec_old[n] = 1
                rec_new[n] = 2
                n += 1
                states[y] = 2
        elif k == K_DEATH:
            x = srcs[i]
            if states[x] != 0 and not clamped[x]:
                rec_t[n] = times[i]
                rec_site[n] = x
                rec_old[n] = states[x]
                rec_new[n] = 0
                n += 1
                states[x] = 0
        else:  # gamma mark
            x = srcs[i]
            if states[x] == 0 and not clamped[x]:
                rec_t[n] = times[i]
                rec_site[n] = x
                rec_old[n] = 0
                rec_new[n] = 2
                n += 1
                states[x] = 2
    return n


@nb.njit(cache=True, nogil=True)
def replay_contact(states, times, kinds, srcs, dsts,
                   rec_t, rec_site, rec_old, rec_new):
    """Two-state contact rules: lambda arrows infect, deaths kill, alpha ignored."""
    n = 0
    for i in range(times.shape[0]):
        k = kinds[i]
        if k == K_LAMBDA:
            x = srcs[i]
            y = dsts[i]
            if states[x] == 1 and states[y] == 0:
                rec_t[n] = times[i]
                rec_site[n] = y
                rec_old[n] = 0
                rec_new[n] = 1
                n += 1
                states[y] = 1
        elif k == K_DEATH:
            x = srcs[i]
            if states[x] != 0:
                rec_t[n] = times[i]
                rec_site[n] = x
                rec_old[n] = states[x]
                rec_new[n] = 0
                n += 1
                states[x] = 0
    return n


@nb.njit(cache=True, nogil=True)
def verify_projection(eta, xi, times, kinds, srcs, dsts):
    """Lockstep replay; count events after which merging 1,2 of eta != xi."""
    violations = 0
    for i in range(times.shape[0]):
        k = kinds[i]
        if k == K_LAMBDA:
            x = srcs[i]
            y = dsts[i]
            if eta[x] != 0 and eta[y] == 0:
                eta[y] = 1
            if xi[x] == 1 and xi[y] == 0:
                xi[y] = 1
        elif k == K_ALPHA:
            x = srcs[i]
            y = dsts[i]
            if eta[x] == 2 and eta[y] == 1:
                eta[y] = 2
        elif k == K_DEATH:
            x = srcs[i]
            eta[x] = 0
            xi[x] = 0
        ok = True
        for s in range(eta.shape[0]):
            informed = 1 if eta[s] != 0 else 0
            if informed != xi[s]:
                ok = False
                break
        if not ok:
            violations += 1
    return violations


@nb.njit(cache=True, nogil=True)
def verify_alpha_ordering(low, high, times, kinds, srcs, dsts, keep):
    """Lockstep replay of a thinned pair; count events breaking low <= high."""
    violations = 0
    for i in range(times.shape[0]):
        k = kinds[i]
        x = srcs[i]
        if k == K_LAMBDA:
            y = dsts[i]
            if high[y] == 0 and high[x] != 0:
                high[y] = 1
            if low[y] == 0 and low[x] != 0:
                low[y] = 1
        elif k == K_ALPHA:
            y = dsts[i]
            if high[x] == 2 and high[y] == 1:
                high[y] = 2
            if keep[i] and low[x] == 2 and low[y] == 1:
                low[y] = 2
        elif k == K_DEATH:
            high[x] = 0
            low[x] = 0
        else:
            if high[x] == 0:
                high[x] = 2
            if low[x] == 0:
                low[x] = 2
        for s in range(low.shape[0]):
            if low[s] > high[s]:
                violations += 1
                break
    return violations


@nb.njit(cache=True, nogil=True)
def snapshot_states(initial, ch_times, ch_sites, ch_new, sample_times, out):
    """Right-continuous state snapshots at ascending sample times."""
    cur = initial.copy()
    j = 0
    n_changes = ch_times.shape[0]
    for k in range(sample_times.shape[0]):
        st = sample_times[k]
        while j < n_changes and ch_times[j] <= st:
            cur[ch_sites[j]] = ch_new[j]
            j += 1
        for s in range(cur.shape[0]):
            out[k, s] = cur[s]


@nb.njit(cache=True, inline="always")
def _site_rate(states, nbr, deg, lam, alpha, gamma, forget, x):
    s = states[x]
    if s == 2:
        return forget
    n2 = 0
    n1 = 0
    for j in range(deg[x]):
        v = states[nbr[x, j]]
        if v == 2:
            n2 += 1
        elif v == 1:
            n1 += 1
    if s == 1:
        return alpha * n2 + forget
    return lam * (n1 + n2) + gamma


@nb.njit(cache=True, nogil=True)
def gillespie_run(states, nbr, deg, lam, alpha, gamma, forget,
                  t0, horizon, key, counter0,
                  record, stop_when_no_adopters, full_recompute,
                  rec_t, rec_site, rec_old, rec_new):
    """Direct-method sampler from time t0 to the horizon.

    Uniforms come from the SplitMix64 stream (key, counter); two draws per
    jump.  Site rates live in a Fenwick tree for O(log S) channel selection;
    the tree and running total are rebuilt exactly every 4096 jumps to stop
    floating-point drift (or every jump under full_recompute, the debug
    validation path).  Resumable: returns status 1 when the record buffers
    are full, with states mutated in place.

    Returns (status, t, counter, n_changes).
    """
    S = states.shape[0]
    rates = np.empty(S, dtype=np.float64)
    tree = np.zeros(S + 1, dtype=np.float64)
    for x in range(S):
        rates[x] = _site_rate(states, nbr, deg, lam, alpha, gamma, forget, x)
    total = 0.0
    for x in range(S):
        total += rates[x]
        i = x + 1
        tree[i] += rates[x]
        j = i + (i & -i)
        if j <= S:
            tree[j] += tree[i]
    top = 1
    while top * 2 <= S:
        top *= 2

    n2 = 0
    for x in range(S):
        if states[x] == 2:
            n2 += 1

    t = t0
    counter = counter0
    n = 0
    since_rebuild = 0
    cap = rec_t.shape[0]

    while True:
        if stop_when_no_adopters and n2 == 0:
            return 0, t, counter, n
        if total <= 1e-12:
            total = 0.0
            for x in range(S):
                total += rates[x]
            if total <= 0.0:
                return 0, horizon, counter, n
        if record and n >= cap:
            return 1, t, counter, n

        u = _u01(key, counter)
        counter += np.uint64(1)
        dt = -np.log1p(-u) / total
        if t + dt > horizon:
            return 0, horizon, counter, n
        t = t + dt

        u = _u01(key, counter)
        counter += np.uint64(1)
        target = u * total
        idx = 0
        bm = top
        rem = target
        while bm > 0:
            nxt = idx + bm
            if nxt <= S and tree[nxt] <= rem:
                rem -= tree[nxt]
                idx = nxt
            bm >>= 1
        x = idx
        if x >= S:
            x = S - 1
        if rates[x] <= 0.0:
            # float-edge fallback: walk to the nearest positive-rate site
            found = False
            for step in range(1, S):
                if x + step < S and rates[x + step] > 0.0:
                    x = x + step
                    found = True
                    break
                if x - step >= 0 and rates[x - step] > 0.0:
                    x = x - step
                    found = True
                    break
            if not found:
                return 0, horizon, counter, n
            rem = 0.5 * rates[x]

        s = states[x]
        n1 = 0
        nn2 = 0
        for j in range(deg[x]):
            v = states[nbr[x, j]]
            if v == 2:
                nn2 += 1
            elif v == 1:
                n1 += 1
        if s == 0:
            r_spread = lam * (n1 + nn2)
            new = 1 if rem < r_spread else 2
        elif s == 1:
            r_pers = alpha * nn2
            new = 2 if rem < r_pers else 0
        else:
            new = 0

        if record:
            rec_t[n] = t
            rec_site[n] = x
            rec_old[n] = s
            rec_new[n] = new
        n += 1 if record else 0
        states[x] = new
        if s == 2:
            n2 -= 1
        if new == 2:
            n2 += 1

        # refresh rates of x and its neighborhood
        r_new = _site_rate(states, nbr, deg, lam, alpha, gamma, forget, x)
        d = r_new - rates[x]
        if d != 0.0:
            rates[x] = r_new
            total += d
            i = x + 1
            while i <= S:
                tree[i] += d
                i += i & -i
        for j in range(deg[x]):
            y = nbr[x, j]
            r_new = _site_rate(states, nbr, deg, lam, alpha, gamma, forget, y)
            d = r_new - rates[y]
            if d != 0.0:
                rates[y] = r_new
                total += d
                i = y + 1
                while i <= S:
                    tree[i] += d
                    i += i & -i

        if full_recompute:
            # debug path: recompute every site and correct by delta; exact
            # incremental bookkeeping makes every delta 0.0, so a correct
            # run is bit-identical to the incremental mode
            for y in range(S):
                r_new = _site_rate(states, nbr, deg, lam, alpha, gamma,
                                   forget, y)
                d = r_new - rates[y]
                if d != 0.0:
                    rates[y] = r_new
                    total += d
                    i = y + 1
                    while i <= S:
                        tree[i] += d
                        i += i & -i

        since_rebuild += 1
        if since_rebuild >= 4096:
            since_rebuild = 0
            total = 0.0
            for y in range(S + 1):
                tree[y] = 0.0
            for y in range(S):
                total += rates[y]
                i = y + 1
                tree[i] += rates[y]
                j2 = i + (i & -i)
                if j2 <= S:
                    tree[j2] += tree[i]
