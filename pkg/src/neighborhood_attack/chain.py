"""The Neighborhood Attack Markov chain.

Each step picks a node uniformly, flips a Bernoulli(p) coin and overwrites the
node's closed neighborhood with the coin value (+1 on heads, -1 on tails).

States are ``int8`` numpy arrays over {-1, +1}. Random numbers come from numpy's
PCG64 generator seeded with ``SeedSequence(seed, spawn_key=(replica,))``; the
hot loop runs in numba and consumes pre-drawn (node, coin) blocks, so a given
(seed, replica) always yields the same trajectory on the same build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numba
import numpy as np

from .errors import ConfigError
from .graph import Graph, NeighborhoodIndex

BLOCK_STEPS = 1 << 21


@dataclass(frozen=True)
class StepRecord:
    chosen_node: int
    coin: int
    delta_y: int


@dataclass(frozen=True)
class ChainConfig:
    p: float = 0.5
    seed: int = 0
    burn_in_steps: Optional[int] = None
    thinning: Optional[int] = None
    samples: int = 1000
    replicas: int = 1

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"p must lie in (0, 1), got {self.p}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.burn_in_steps is not None and self.burn_in_steps < 0:
            raise ConfigError("burn_in_steps must be nonnegative")
        if self.thinning is not None and self.thinning < 1:
            raise ConfigError("thinning must be >= 1")
        if self.samples < 0:
            raise ConfigError("samples must be nonnegative")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")

    def resolved(self, n: int) -> "ChainConfig":
        """Fill unset burn-in/thinning with the defaults for an n-node graph."""
        burn = self.burn_in_steps
        if burn is None:
            burn = default_burn_in(n)
        thin = self.thinning if self.thinning is not None else n
        return replace(self, burn_in_steps=burn, thinning=thin)


def default_burn_in(n: int) -> int:
    # heuristic: roughly ten sweeps of the coupon-collector time
    return math.ceil(10 * n * math.log(n + 1))


def check_state(g: Graph, state) -> np.ndarray:
    state = np.asarray(state)
    if state.shape != (g.n,):
        raise ConfigError(f"state must have length {g.n}, got shape {state.shape}")
    if not np.all(np.abs(state) == 1):
        raise ConfigError("state entries must be exactly +1 or -1")
    return state.astype(np.int8, copy=False)


def step(g: Graph, state, coin: int, node: int) -> tuple[np.ndarray, StepRecord]:
    """Overwrite the closed neighborhood of ``node`` with ``coin``."""
    state = check_state(g, state)
    if coin not in (-1, 1):
        raise ConfigError(f"coin must be +1 or -1, got {coin}")
    if not 0 <= node < g.n:
        raise ConfigError(f"node {node} out of range for n={g.n}")
    nbhd = g.closed[node]
    before = int(state[nbhd].sum(dtype=np.int64))
    new = state.copy()
    new[nbhd] = coin
    new.setflags(write=False)
    return new, StepRecord(int(node), int(coin), coin * (g.r + 1) - before)


# -- numba kernels ----------------------------------------------------------

@numba.njit(nogil=True, cache=True)
def _advance(state, closed, nodes, coins, start, stop):
    width = closed.shape[1]
    for t in range(start, stop):
        k = nodes[t]
        c = coins[t]
        for j in range(width):
            state[closed[k, j]] = c


@numba.njit(nogil=True, cache=True)
def _observe(state, closed, pair_i, pair_j):
    y = 0
    for v in range(state.shape[0]):
        y += state[v]
    eta = 0
    theta = 0
    for m in range(pair_i.shape[0]):
        a = state[pair_i[m]]
        if a == state[pair_j[m]]:
            if a > 0:
                eta += 1
            else:
                theta += 1
    s2 = 0
    for k in range(closed.shape[0]):
        s = 0
        for j in range(closed.shape[1]):
            s += state[closed[k, j]]
        s2 += s * s
    return y, eta, theta, s2


@numba.njit(nogil=True, cache=True)
def _observe_block(state, closed, pair_i, pair_j, nodes, coins, thinning,
                   out_y, out_eta, out_theta, out_s2, offset, count):
    for s in range(count):
        _advance(state, closed, nodes, coins, s * thinning, (s + 1) * thinning)
        y, eta, theta, s2 = _observe(state, closed, pair_i, pair_j)
        out_y[offset + s] = y
        out_eta[offset + s] = eta
        out_theta[offset + s] = theta
        out_s2[offset + s] = s2


@numba.njit(nogil=True, cache=True)
def _state_block(state, closed, nodes, coins, thinning, out, count):
    for s in range(count):
        _advance(state, closed, nodes, coins, s * thinning, (s + 1) * thinning)
        out[s, :] = state


# -- trajectory driver ------------------------------------------------------

def replica_rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))


def _draw(rng: np.random.Generator, n: int, p: float, steps: int):
    nodes = rng.integers(0, n, size=steps, dtype=np.int64)
    coins = np.where(rng.random(steps) < p, 1, -1).astype(np.int8)
    return nodes, coins


def _burn_in(g: Graph, cfg: ChainConfig, replica: int):
    rng = replica_rng(cfg.seed, replica)
    state = (rng.integers(0, 2, size=g.n) * 2 - 1).astype(np.int8)
    left = cfg.burn_in_steps
    while left > 0:
        chunk = min(left, BLOCK_STEPS)
        nodes, coins = _draw(rng, g.n, cfg.p, chunk)
        _advance(state, g.closed, nodes, coins, 0, chunk)
        left -= chunk
    return rng, state


def _sample_blocks(cfg: ChainConfig):
    per_block = max(1, BLOCK_STEPS // cfg.thinning)
    done = 0
    while done < cfg.samples:
        count = min(per_block, cfg.samples - done)
        yield done, count
        done += count


def run(g: Graph, cfg: ChainConfig, replica: int = 0) -> Iterator[np.ndarray]:
    """Stream ``cfg.samples`` states, one every ``cfg.thinning`` steps after burn-in.

    The initial state is i.i.d. uniform over {-1, +1}. Emitted arrays are
    read-only snapshots.
    """
    cfg = cfg.resolved(g.n)
    rng, state = _burn_in(g, cfg, replica)
    for _, count in _sample_blocks(cfg):
        nodes, coins = _draw(rng, g.n, cfg.p, count * cfg.thinning)
        out = np.empty((count, g.n), dtype=np.int8)
        _state_block(state, g.closed, nodes, coins, cfg.thinning, out, count)
        out.setflags(write=False)
        yield from out


def sample_observables(g: Graph, index: NeighborhoodIndex, cfg: ChainConfig,
                       replica: int = 0) -> dict[str, np.ndarray]:
    """Run one replica and record (Y, eta, theta, sum_k s_k^2) per retained state.

    ``s_k`` is the closed-neighborhood sum at node k, so ``sum_k s_k^2`` equals
    sum_i i^2 q_i. Follows the same random stream as :func:`run`.
    """
    cfg = cfg.resolved(g.n)
    rng, state = _burn_in(g, cfg, replica)
    out = {key: np.empty(cfg.samples, dtype=np.int64) for key in ("y", "eta", "theta", "s2")}
    for offset, count in _sample_blocks(cfg):
        nodes, coins = _draw(rng, g.n, cfg.p, count * cfg.thinning)
        _observe_block(state, g.closed, index.pair_i, index.pair_j, nodes, coins,
                       cfg.thinning, out["y"], out["eta"], out["theta"], out["s2"],
                       offset, count)
    return out
