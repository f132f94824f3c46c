"""Model parameters, per-site transition rates, and an exact transient oracle.

States: 0 = ignorant, 1 = aware, 2 = adopter.  A site in state 0 becomes
aware at rate lam * (n1 + n2) and adopts spontaneously at rate gamma; a
site in state 1 is persuaded at rate alpha * n2 and forgets at rate
``forget``; a site in state 2 forgets at rate ``forget``.  gamma defaults
to 0 (the base model) and forget defaults to 1; all published behavior of
the base model assumes forget = 1.

The oracle ``exact_transient`` computes the full distribution of the
process at time t on a tiny lattice by uniformization of the 3**N-state
generator.  Configurations are encoded base-3 with site 0 as the least
significant digit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import gammaln
from scipy.stats import poisson

from .lattice import LatticeSpec
from . import rng

STATE_SPACE_CAP = 3**12


@dataclass(frozen=True)
class Params:
    """Model rates. All non-negative and finite; forget strictly positive."""

    lam: float
    alpha: float
    gamma: float = 0.0
    forget: float = 1.0

    def __post_init__(self):
        for name in ("lam", "alpha", "gamma", "forget"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if self.forget <= 0:
            raise ValueError("forget rate must be > 0")


def validate_configuration(spec: LatticeSpec, states) -> np.ndarray:
    """Return the configuration as an int8 array, checking shape and values."""
    arr = np.asarray(states, dtype=np.int8)
    if arr.shape != (spec.site_count,):
        raise ValueError(f"configuration length {arr.shape} != {spec.site_count} sites")
    if arr.min(initial=0) < 0 or arr.max(initial=0) > 2:
        raise ValueError("states must be in {0, 1, 2}")
    return arr


def single_site_config(spec: LatticeSpec, state: int = 2) -> np.ndarray:
    """All ignorant except one site (the center of the box) in the given state."""
    conf = np.zeros(spec.site_count, dtype=np.int8)
    center = spec.index(tuple(s // 2 for s in spec.side_lengths))
    conf[center] = state
    return conf


def product_measure_config(spec: LatticeSpec, probs, seed: int) -> np.ndarray:
    """IID configuration with P(state=i) = probs[i]; deterministic in the seed."""
    p = np.asarray(probs, dtype=np.float64)
    if p.shape != (3,) or abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
        raise ValueError("probs must be three non-negative values summing to 1")
    u = rng.uniforms(rng.derive_key(seed, rng.KIND_INIT, 0), spec.site_count)
    conf = np.zeros(spec.site_count, dtype=np.int8)
    conf[u >= p[0]] = 1
    conf[u >= p[0] + p[1]] = 2
    return conf


def neighbor_counts(spec: LatticeSpec, config: np.ndarray, x: int) -> tuple[int, int]:
    """(n1, n2): number of neighbors of x in state 1 and state 2."""
    if not 0 <= x < spec.site_count:
        raise ValueError(f"site index {x} out of range")
    row = spec.nbr[x, : spec.deg[x]]
    vals = config[row]
    return int((vals == 1).sum()), int((vals == 2).sum())


def local_rates(spec: LatticeSpec, config, x: int, params: Params):
    """Nonzero-rate transitions of site x as (target_state, rate) pairs."""
    n1, n2 = neighbor_counts(spec, config, x)
    s = config[x]
    out = []
    if s == 0:
        r = params.lam * (n1 + n2)
        if r > 0:
            out.append((1, r))
        if params.gamma > 0:
            out.append((2, params.gamma))
    elif s == 1:
        r = params.alpha * n2
        if r > 0:
            out.append((2, r))
        out.append((0, params.forget))
    else:
        out.append((0, params.forget))
    return out


def total_rate(spec: LatticeSpec, config, params: Params) -> float:
    """Sum of all local transition rates; 0 iff the configuration is absorbing."""
    config = np.asarray(config)
    total = 0.0
    for x in range(spec.site_count):
        for _, r in local_rates(spec, config, x, params):
            total += r
    return total


def encode_config(config) -> int:
    """Base-3 state index, site 0 least significant."""
    idx = 0
    for s in reversed(np.asarray(config)):
        idx = idx * 3 + int(s)
    return idx


def decode_config(index: int, site_count: int) -> np.ndarray:
    out = np.empty(site_count, dtype=np.int8)
    for i in range(site_count):
        out[i] = index % 3
        index //= 3
    return out


@dataclass
class Distribution:
    """Probability vector over all 3**N configurations of a tiny lattice."""

    site_count: int
    weights: np.ndarray

    def prob(self, config) -> float:
        return float(self.weights[encode_config(config)])

    def tv_distance(self, other) -> float:
        w = other.weights if isinstance(other, Distribution) else np.asarray(other)
        return 0.5 * float(np.abs(self.weights - w).sum())


def build_generator(spec: LatticeSpec, params: Params) -> sparse.csr_matrix:
    """Sparse generator Q of the full configuration chain (rows sum to 0)."""
    n_states = 3**spec.site_count
    if n_states > STATE_SPACE_CAP:
        raise ValueError(
            f"state space 3^{spec.site_count} exceeds cap {STATE_SPACE_CAP}"
        )
    # digit matrix: digits[i, x] = state of site x in configuration i
    pow3 = 3 ** np.arange(spec.site_count, dtype=np.int64)
    all_idx = np.arange(n_states, dtype=np.int64)
    digits = (all_idx[:, None] // pow3[None, :]) % 3

    rows, cols, vals = [], [], []

    def add(mask, x, delta, rate):
        if np.isscalar(rate):
            if rate <= 0:
                return
            rate = np.full(mask.sum(), float(rate))
        else:
            rate = rate[mask]
            keep = rate > 0
            mask = np.nonzero(mask)[0][keep]
            rate = rate[keep]
        src = all_idx[mask]
        rows.append(src)
        cols.append(src + delta * pow3[x])
        vals.append(rate)

    for x in range(spec.site_count):
        nb = spec.nbr[x, : spec.deg[x]]
        n1 = (digits[:, nb] == 1).sum(axis=1).astype(np.float64)
        n2 = (digits[:, nb] == 2).sum(axis=1).astype(np.float64)
        sx = digits[:, x]
        add(sx == 0, x, +1, params.lam * (n1 + n2))
        add(sx == 0, x, +2, params.gamma)
        add(sx == 1, x, +1, params.alpha * n2)
        add(sx == 1, x, -1, params.forget)
        add(sx == 2, x, -2, params.forget)

    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
    else:
        r = c = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.float64)
    q = sparse.coo_matrix((v, (r, c)), shape=(n_states, n_states)).tocsr()
    diag = -np.asarray(q.sum(axis=1)).ravel()
    q = q + sparse.diags(diag)
    return q.tocsr()


def exact_transient(
    spec: LatticeSpec,
    params: Params,
    initial,
    t: float,
    tv_tol: float = 1e-10,
) -> Distribution:
    """Exact distribution of the process at time t, by uniformization.

    Truncation depth of the Poissonized sum is chosen so the neglected tail
    mass (an upper bound on the total-variation error) is below tv_tol.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    initial = validate_configuration(spec, initial)
    n_states = 3**spec.site_count
    p0 = np.zeros(n_states)
    p0[encode_config(initial)] = 1.0
    if t == 0:
        return Distribution(spec.site_count, p0)

    q = build_generator(spec, params)
    rate = float(-q.diagonal().min())
    if rate <= 0.0:
        return Distribution(spec.site_count, p0)
    mu = rate * t
    depth = int(poisson.isf(tv_tol, mu)) + 1
    while poisson.sf(depth, mu) > tv_tol:
        depth += max(1, depth // 10)

    # transition matrix of the uniformized chain
    p_mat = (sparse.identity(n_states, format="csr") + q / rate).tocsr()
    ks = np.arange(depth + 1)
    log_w = -mu + ks * math.log(mu) - gammaln(ks + 1)
    w = np.exp(log_w)

    acc = w[0] * p0
    v = p0
    for k in range(1, depth + 1):
        v = v @ p_mat
        acc = acc + w[k] * v
    return Distribution(spec.site_count, acc)
