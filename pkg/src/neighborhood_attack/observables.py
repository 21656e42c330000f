"""Per-state observables: node sum, q-profile, one-step law of the node-sum change,
and counts of equal-valued near-neighbor pairs.

Everything conditional on a state is computed in exact integer / ``Fraction``
arithmetic. Batch helpers operate on an ``(S, N)`` array of states.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import ConfigError, SymmetricPRequired
from .graph import Graph, NeighborhoodIndex

Prob = Union[Fraction, float, int]
HALF = Fraction(1, 2)


def _as_fraction(p: Prob) -> Fraction:
    p = Fraction(p)
    if not 0 < p < 1:
        raise ConfigError(f"p must lie in (0, 1), got {p}")
    return p


def _require_half(p: Prob) -> None:
    if Fraction(p) != HALF:
        raise SymmetricPRequired(p)


def profile_values(r: int) -> list[int]:
    """The r+2 possible closed-neighborhood sums -(r+1), -(r-1), ..., r+1."""
    return list(range(-(r + 1), r + 2, 2))


@dataclass(frozen=True)
class QProfile:
    """``counts[i]`` = number of nodes whose closed-neighborhood sum is i (nonzero entries only)."""

    counts: dict[int, int]
    r: int
    n: int

    def total(self) -> int:
        return sum(self.counts.values())

    def weighted_sum(self, power: int = 1) -> int:
        return sum(i ** power * q for i, q in self.counts.items())


@dataclass(frozen=True)
class PairCounts:
    alpha: int  # equal values
    beta: int  # opposite values
    eta: int  # both +1
    theta: int  # both -1


def node_sum(state) -> int:
    return int(np.asarray(state).sum(dtype=np.int64))


def closed_sums(g: Graph, states: np.ndarray) -> np.ndarray:
    """Closed-neighborhood sums; shape (N,) for one state or (S, N) for a batch."""
    states = np.asarray(states, dtype=np.int8)
    return states[..., g.closed].sum(axis=-1, dtype=np.int64)


def q_profile(g: Graph, state) -> QProfile:
    sums = closed_sums(g, state)
    return QProfile(dict(sorted(Counter(sums.tolist()).items())), g.r, g.n)


def delta_y_pmf(q: QProfile, p: Prob = HALF) -> dict[int, Fraction]:
    """Law of Y' - Y given the q-profile.

    A node with closed sum i is picked with probability q_i/N; heads moves Y by
    (r+1) - i, tails by -(r+1) - i. Coinciding values are merged.
    """
    p = _as_fraction(p)
    top = q.r + 1
    pmf: dict[int, Fraction] = {}
    for i, qi in q.counts.items():
        if qi == 0:
            continue
        for value, weight in ((top - i, p), (-top - i, 1 - p)):
            pmf[value] = pmf.get(value, Fraction(0)) + weight * Fraction(qi, q.n)
    return dict(sorted(pmf.items()))


def cond_mean_delta_y(q: QProfile, p: Prob = HALF) -> Fraction:
    """E[Y' - Y | state] = -sum_i i q_i / N, which equals -(r+1)Y/N."""
    _require_half(p)
    return Fraction(-q.weighted_sum(1), q.n)


def cond_second_moment_delta_y(q: QProfile, p: Prob = HALF) -> Fraction:
    """E[(Y' - Y)^2 | state] = (r+1)^2 + sum_i i^2 q_i / N."""
    _require_half(p)
    return (q.r + 1) ** 2 + Fraction(q.weighted_sum(2), q.n)


def pair_counts(index: NeighborhoodIndex, state) -> PairCounts:
    state = np.asarray(state)
    a = state[index.pair_i]
    b = state[index.pair_j]
    same = a == b
    eta = int(np.count_nonzero(same & (a > 0)))
    theta = int(np.count_nonzero(same & (a < 0)))
    alpha = eta + theta
    return PairCounts(alpha, len(a) - alpha, eta, theta)


def pair_counts_batch(index: NeighborhoodIndex, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(eta, theta) for each row of ``states``."""
    a = states[:, index.pair_i]
    b = states[:, index.pair_j]
    same = a == b
    eta = np.count_nonzero(same & (a > 0), axis=1)
    theta = np.count_nonzero(same & (a < 0), axis=1)
    return eta.astype(np.int64), theta.astype(np.int64)


def normalize_w(y: float, sigma_y: float) -> float:
    if not sigma_y > 0:
        raise ConfigError(f"sigma_y must be positive, got {sigma_y}")
    return y / sigma_y
