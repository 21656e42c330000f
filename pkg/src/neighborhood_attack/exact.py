"""Brute-force oracle over all 2^N spin configurations.

State ``x`` is an integer bitmask: bit k set means node k holds +1. Attacking
node k with +1 maps x to ``x | mask[k]``; with -1 to ``x & ~mask[k]``, where
``mask[k]`` covers the closed neighborhood of k. Componentwise min/max on
{-1, +1}^N are therefore ``x & y`` and ``x | y``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (ConfigError, ConvergenceFailure, MultipleClosedClasses, NumericFailure,
                     StateSpaceTooLarge, SymmetricPRequired)
from .graph import Graph, NeighborhoodIndex
from .observables import closed_sums, pair_counts_batch

DEFAULT_CAP = 16
MAX_CAP = 20
DENSE_SOLVE_LIMIT = 4096
POWER_ITER_CAP = 10 ** 6
FKG_TOL = 1e-12


def check_cap(n: int, cap: int = DEFAULT_CAP) -> None:
    if cap > MAX_CAP:
        raise StateSpaceTooLarge(f"exact cap {cap} exceeds the hard limit {MAX_CAP}")
    if n > cap:
        raise StateSpaceTooLarge(
            f"exact enumeration needs 2^{n} states; cap is N <= {cap} (override with --cap, max {MAX_CAP})"
        )
    if n > DEFAULT_CAP:
        warnings.warn(f"enumerating 2^{n} states; this is slow and memory hungry", stacklevel=3)


def state_spins(n: int, states: np.ndarray) -> np.ndarray:
    """(S, n) int8 array of +/-1 values for the given bitmasks."""
    bits = (states[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def state_index(state) -> int:
    return int(sum(1 << k for k, v in enumerate(np.asarray(state)) if v > 0))


@dataclass
class TransitionModel:
    n: int
    r: int
    p: float
    masks: np.ndarray  # (n,) closed-neighborhood bitmasks
    successors: np.ndarray  # (S, 2n): columns 0..n-1 heads at node k, n..2n-1 tails
    matrix: sp.csr_matrix
    y: np.ndarray  # node sum per state

    @property
    def n_states(self) -> int:
        return 1 << self.n


def build_transition(g: Graph, p: float = 0.5, cap: int = DEFAULT_CAP) -> TransitionModel:
    if not 0 < p < 1:
        raise ConfigError(f"p must lie in (0, 1), got {p}")
    check_cap(g.n, cap)
    n = g.n
    size = 1 << n
    states = np.arange(size, dtype=np.int64)
    masks = np.array([sum(1 << int(j) for j in row) for row in g.closed], dtype=np.int64)
    full = size - 1
    heads = states[:, None] | masks[None, :]
    tails = states[:, None] & (full ^ masks)[None, :]
    succ = np.concatenate([heads, tails], axis=1)

    weights = np.concatenate([np.full(n, p / n), np.full(n, (1 - p) / n)])
    rows = np.repeat(states, 2 * n)
    mat = sp.csr_matrix((np.tile(weights, size), (rows, succ.ravel())), shape=(size, size))
    mat.sum_duplicates()
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    if np.max(np.abs(row_sums - 1.0)) > 1e-14:
        raise NumericFailure("transition rows do not sum to 1")

    popcount = np.zeros(size, dtype=np.int64)
    for k in range(n):
        popcount += (states >> k) & 1
    return TransitionModel(n, g.r, p, masks, succ, mat, 2 * popcount - n)


def recurrent_class(t: TransitionModel) -> np.ndarray:
    """The unique closed communicating class, as sorted state indices."""
    ncomp, labels = connected_components(t.matrix, directed=True, connection="strong")
    coo = t.matrix.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_comps = np.unique(labels[coo.row[leaving]])
    closed = np.setdiff1d(np.arange(ncomp), open_comps)
    if len(closed) != 1:
        raise MultipleClosedClasses(f"found {len(closed)} closed classes, expected exactly one")
    return np.flatnonzero(labels == closed[0])


@dataclass
class StationaryDistribution:
    pi: np.ndarray  # over all 2^n states, zero off the recurrent class
    recurrent_class: np.ndarray
    residual: float  # ||pi P - pi||_inf
    method: str

    def flip_asymmetry(self) -> float:
        full = len(self.pi) - 1
        return float(np.max(np.abs(self.pi - self.pi[full ^ np.arange(len(self.pi))])))


def stationary(t: TransitionModel, cls: Optional[np.ndarray] = None) -> StationaryDistribution:
    """Solve pi P = pi on the recurrent class.

    Direct dense solve for classes up to 4096 states, power iteration otherwise.
    """
    if cls is None:
        cls = recurrent_class(t)
    sub = t.matrix[cls][:, cls]
    m = len(cls)
    if m <= DENSE_SOLVE_LIMIT:
        a = sub.T.toarray() - np.eye(m)
        a[-1, :] = 1.0
        b = np.zeros(m)
        b[-1] = 1.0
        local = np.linalg.solve(a, b)
        method = "dense-solve"
        # one polishing sweep of power iteration removes solver round-off
        local = np.clip(local, 0.0, None)
        local = sub.T @ local
        local /= local.sum()
    else:
        local = np.full(m, 1.0 / m)
        subt = sub.T.tocsr()
        for _ in range(POWER_ITER_CAP):
            nxt = subt @ local
            nxt /= nxt.sum()
            if np.max(np.abs(nxt - local)) < 1e-16:
                local = nxt
                break
            local = nxt
        else:
            raise ConvergenceFailure(f"power iteration did not converge in {POWER_ITER_CAP} steps")
        method = "power-iteration"

    pi = np.zeros(t.n_states)
    pi[cls] = local
    residual = float(np.max(np.abs(t.matrix.T @ pi - pi)))
    if residual >= 1e-12 or abs(pi.sum() - 1.0) >= 1e-13 or pi.min() < 0:
        raise NumericFailure(f"stationary solve failed its checks (residual {residual:.3g})")
    return StationaryDistribution(pi, cls, residual, method)


@dataclass(frozen=True)
class ExactReport:
    n_recurrent: int
    mean_y: float
    var_y: float
    mean_eta: float
    mean_theta: float
    cov_eta_theta: float
    var_m2_state: float  # Var E[(Y'-Y)^2 | state]
    var_m2_y: float  # Var E[(Y'-Y)^2 | Y]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def exact_functionals(g: Graph, index: NeighborhoodIndex, stat: StationaryDistribution) -> ExactReport:
    cls = stat.recurrent_class
    w = stat.pi[cls]
    spins = state_spins(g.n, cls)
    y = spins.sum(axis=1, dtype=np.int64).astype(float)
    eta, theta = pair_counts_batch(index, spins)
    s2 = (closed_sums(g, spins) ** 2).sum(axis=1)
    m2 = (g.r + 1) ** 2 + s2 / g.n

    def mean(v):
        return float(w @ v)

    def cov(a, b):
        return mean((a - mean(a)) * (b - mean(b)))

    # E[m2 | Y] per Y level, then its variance
    levels, inv = np.unique(y, return_inverse=True)
    mass = np.bincount(inv, weights=w, minlength=len(levels))
    cond = np.bincount(inv, weights=w * m2, minlength=len(levels))
    cond = np.divide(cond, mass, out=np.zeros_like(cond), where=mass > 0)
    m2_given_y = cond[inv]

    return ExactReport(
        n_recurrent=len(cls),
        mean_y=mean(y),
        var_y=cov(y, y),
        mean_eta=mean(eta.astype(float)),
        mean_theta=mean(theta.astype(float)),
        cov_eta_theta=cov(eta.astype(float), theta.astype(float)),
        var_m2_state=cov(m2, m2),
        var_m2_y=cov(m2_given_y, m2_given_y),
    )


@dataclass(frozen=True)
class LinearityCheck:
    max_deviation: float  # floating point, from the sparse kernel
    max_deviation_exact: Fraction  # integer outcome enumeration


def verify_linearity(g: Graph, t: TransitionModel) -> LinearityCheck:
    """Compare E[Y' - Y | x] with -(r+1)Y(x)/N for every state x."""
    if t.p != 0.5:
        raise SymmetricPRequired(t.p)
    y = t.y
    target = -(g.r + 1) * y / g.n
    drift = t.matrix @ y.astype(float) - y
    float_dev = float(np.max(np.abs(drift - target)))
    # 2N equally likely (node, coin) outcomes: sum of changes must be -2(r+1)Y
    total = (y[t.successors] - y[:, None]).sum(axis=1)
    exact_dev = int(np.max(np.abs(total + 2 * (g.r + 1) * y)))
    return LinearityCheck(float_dev, Fraction(exact_dev, 2 * g.n))


@dataclass
class FKGResult:
    violations: list[dict]
    n_violations: int
    pairs_checked: int
    exhaustive: bool
    support_size: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _pair_rows(pi, support, ii, jj, found, limit):
    x = support[ii]
    y = support[jj]
    meet = x & y
    join = x | y
    lhs = pi[meet] * pi[join]
    rhs = pi[x] * pi[y]
    bad = np.flatnonzero(lhs < rhs - FKG_TOL)
    for k in bad[: max(0, limit - len(found))]:
        found.append({
            "x": int(x[k]), "y": int(y[k]), "meet": int(meet[k]), "join": int(join[k]),
            "pi_x": float(pi[x[k]]), "pi_y": float(pi[y[k]]),
            "pi_meet": float(pi[meet[k]]), "pi_join": float(pi[join[k]]),
        })
    return len(bad)


def fkg_violations(stat: StationaryDistribution, limit: int = 100, budget: int = 10 ** 7,
                   seed: int = 0) -> FKGResult:
    """Search for pairs with pi(x^y) pi(xvy) < pi(x) pi(y).

    Only pairs with both states in the support can violate (otherwise the right
    side is 0), and x = y never does, so the search ranges over unordered pairs
    of distinct support states: exhaustively when there are at most ``budget``
    of them, else over ``budget`` pairs drawn uniformly without replacement.
    """
    pi = stat.pi
    support = np.flatnonzero(pi > 0)
    s = len(support)
    n_pairs = s * (s - 1) // 2
    found: list[dict] = []
    count = 0
    if n_pairs <= budget:
        block = max(1, 2 ** 20 // max(s, 1))
        for start in range(0, s, block):
            ii_rows = np.arange(start, min(start + block, s))
            ii, jj = np.meshgrid(ii_rows, np.arange(s), indexing="ij")
            keep = jj > ii
            count += _pair_rows(pi, support, ii[keep], jj[keep], found, limit)
        checked, exhaustive = n_pairs, True
    else:
        rng = np.random.default_rng(seed)
        picks = rng.choice(n_pairs, size=budget, replace=False)
        starts = np.cumsum(np.arange(s - 1, 0, -1)) - np.arange(s - 1, 0, -1)
        for lo in range(0, budget, 2 ** 20):
            chunk = picks[lo:lo + 2 ** 20]
            ii = np.searchsorted(starts, chunk, side="right") - 1
            jj = ii + 1 + (chunk - starts[ii])
            count += _pair_rows(pi, support, ii, jj, found, limit)
        checked, exhaustive = budget, False
    return FKGResult(found, count, checked, exhaustive, s)


def odd_circle_witness(n: int, stat: StationaryDistribution, node: int = 0) -> dict:
    """Probabilities of the two-state example for an odd circle of length n.

    ``w1`` has a single +1 at ``node``; ``w2`` has -1 on ``node`` and its two
    neighbors and alternates elsewhere. Reports pi for both, their meet and join.
    """
    if n % 2 == 0 or n < 5:
        raise ConfigError("witness defined for odd circles with n >= 5")
    w1 = [-1] * n
    w1[node] = 1
    w2 = [0] * n
    for step in range(n):
        w2[(node + 2 + step) % n] = 1 if step % 2 == 0 else -1
    for k in (node - 1, node, node + 1):
        w2[k % n] = -1
    x1, x2 = state_index(w1), state_index(w2)
    pi = stat.pi
    return {
        "w1": x1, "w2": x2, "meet": x1 & x2, "join": x1 | x2,
        "pi_w1": float(pi[x1]), "pi_w2": float(pi[x2]),
        "pi_meet": float(pi[x1 & x2]), "pi_join": float(pi[x1 | x2]),
        "violates": bool(pi[x1 & x2] * pi[x1 | x2] < pi[x1] * pi[x2] - FKG_TOL),
    }


def write_pi_csv(path, stat: StationaryDistribution) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["state", "probability"])
        for x in np.flatnonzero(stat.pi > 0):
            writer.writerow([int(x), repr(float(stat.pi[x]))])


@dataclass
class ExactSolution:
    """Everything the oracle computes for one graph at p = 1/2."""

    graph: Graph
    index: NeighborhoodIndex
    transition: TransitionModel
    stationary: StationaryDistribution
    report: ExactReport
    linearity: Optional[LinearityCheck]


def solve(g: Graph, index: NeighborhoodIndex, p: float = 0.5, cap: int = DEFAULT_CAP) -> ExactSolution:
    t = build_transition(g, p, cap)
    stat = stationary(t)
    report = exact_functionals(g, index, stat)
    lin = verify_linearity(g, t) if p == 0.5 else None
    return ExactSolution(g, index, t, stat, report, lin)
