"""Streaming, mergeable moment estimation over sampled states.

Each retained state contributes a row ``(Y, eta, theta, m2)`` where
``m2 = E[(Y' - Y)^2 | state]``. Means and co-deviation sums are updated with
Welford's rule (Chan et al. for blocks), so accumulators merge exactly.
Standard errors come from batch means.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InsufficientSamples

VARIABLES = ("y", "eta", "theta", "m2")
Y, ETA, THETA, M2 = range(4)
N_BATCHES = 32


@dataclass
class MomentAccumulator:
    dim: int = len(VARIABLES)
    count: int = 0
    mean: np.ndarray = field(default=None)
    comoment: np.ndarray = field(default=None)  # sum of outer products of deviations
    # lag-1 bookkeeping for the first variable (Y), within one contiguous stream
    lag_pairs: int = 0
    lag_prod: float = 0.0
    lag_lead: float = 0.0
    lag_follow: float = 0.0
    last: float = math.nan

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.comoment is None:
            self.comoment = np.zeros((self.dim, self.dim))

    def push(self, row) -> "MomentAccumulator":
        row = np.asarray(row, dtype=float)
        if not math.isnan(self.last):
            self.lag_pairs += 1
            self.lag_prod += self.last * row[0]
            self.lag_lead += self.last
            self.lag_follow += row[0]
        self.last = float(row[0])
        self.count += 1
        delta = row - self.mean
        self.mean = self.mean + delta / self.count
        self.comoment = self.comoment + np.outer(delta, row - self.mean)
        return self

    def push_many(self, rows) -> "MomentAccumulator":
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.dim:
            raise ValueError(f"expected rows of width {self.dim}")
        if len(rows) == 0:
            return self
        y = rows[:, 0]
        if not math.isnan(self.last):
            y = np.concatenate([[self.last], y])
        self.lag_pairs += len(y) - 1
        self.lag_prod += float(y[:-1] @ y[1:])
        self.lag_lead += float(y[:-1].sum())
        self.lag_follow += float(y[1:].sum())
        self.last = float(rows[-1, 0])

        block_mean = rows.mean(axis=0)
        dev = rows - block_mean
        self._combine(len(rows), block_mean, dev.T @ dev)
        return self

    def _combine(self, n_b, mean_b, com_b):
        n_a = self.count
        n = n_a + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / n)
        self.comoment = self.comoment + com_b + np.outer(delta, delta) * (n_a * n_b / n)
        self.count = n

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Combine two accumulators; no lag pair is formed across the seam."""
        out = MomentAccumulator(self.dim, self.count, self.mean.copy(), self.comoment.copy(),
                                self.lag_pairs + other.lag_pairs,
                                self.lag_prod + other.lag_prod,
                                self.lag_lead + other.lag_lead,
                                self.lag_follow + other.lag_follow,
                                other.last)
        if other.count:
            out._combine(other.count, other.mean, other.comoment)
        return out

    def cov(self) -> np.ndarray:
        if self.count < 2:
            raise InsufficientSamples(f"need at least 2 samples, have {self.count}")
        return self.comoment / (self.count - 1)

    def autocorr_y(self) -> float:
        if self.lag_pairs < 2 or self.comoment[0, 0] == 0:
            return math.nan
        m = self.mean[0]
        c1 = self.lag_prod - m * (self.lag_lead + self.lag_follow) + self.lag_pairs * m * m
        return (c1 / self.lag_pairs) / (self.comoment[0, 0] / self.count)


def accumulate(acc: MomentAccumulator, row) -> MomentAccumulator:
    return acc.push(row)


class BatchMeans:
    """A sequence of fixed-size :class:`MomentAccumulator` batches for one stream."""

    def __init__(self, batch_size: int):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.batch_size = batch_size
        self.batches: list[MomentAccumulator] = []

    @classmethod
    def for_stream(cls, length: int, n_batches: int = N_BATCHES) -> "BatchMeans":
        return cls(max(1, math.ceil(length / n_batches)))

    def push_many(self, rows) -> "BatchMeans":
        rows = np.asarray(rows, dtype=float)
        start = 0
        while start < len(rows):
            if not self.batches or self.batches[-1].count >= self.batch_size:
                if self.batches:
                    # keep lag pairs contiguous across batch boundaries
                    seam = self.batches[-1].last
                else:
                    seam = math.nan
                self.batches.append(MomentAccumulator(last=seam))
            room = self.batch_size - self.batches[-1].count
            self.batches[-1].push_many(rows[start:start + room])
            start += room
        return self

    def merge(self, other: "BatchMeans") -> "BatchMeans":
        out = BatchMeans(self.batch_size)
        out.batches = self.batches + other.batches
        return out

    def total(self) -> MomentAccumulator:
        acc = MomentAccumulator()
        for b in self.batches:
            acc = acc.merge(b)
        return acc


@dataclass(frozen=True)
class EstimateReport:
    count: int
    n_batches: int
    mean_y: float
    var_y_hat: float
    cov_eta_theta_hat: float
    var_cond_m2_hat: float
    se_mean_y: float
    se_var_y: float
    se_cov_eta_theta: float
    se_var_cond_m2: float
    autocorr_lag1_y: float

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in asdict(self).items()}


def _batch_se(values: list[float]) -> float:
    values = [v for v in values if math.isfinite(v)]
    if len(values) < 2:
        return math.nan
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def finalize(acc: BatchMeans | MomentAccumulator) -> EstimateReport:
    """Sample ((n-1)-denominator) moments with batch-means standard errors.

    A bare :class:`MomentAccumulator` has no batch structure; its standard
    errors are reported as NaN.
    """
    batches = acc.batches if isinstance(acc, BatchMeans) else []
    total = acc.total() if isinstance(acc, BatchMeans) else acc
    cov = total.cov()

    def per_batch(fn):
        return [fn(b) for b in batches if b.count >= 2]

    return EstimateReport(
        count=total.count,
        n_batches=len(batches),
        mean_y=float(total.mean[Y]),
        var_y_hat=float(cov[Y, Y]),
        cov_eta_theta_hat=float(cov[ETA, THETA]),
        var_cond_m2_hat=float(cov[M2, M2]),
        se_mean_y=_batch_se([float(b.mean[Y]) for b in batches if b.count >= 1]),
        se_var_y=_batch_se(per_batch(lambda b: float(b.cov()[Y, Y]))),
        se_cov_eta_theta=_batch_se(per_batch(lambda b: float(b.cov()[ETA, THETA]))),
        se_var_cond_m2=_batch_se(per_batch(lambda b: float(b.cov()[M2, M2]))),
        autocorr_lag1_y=float(total.autocorr_y()),
    )


def rows_from_observables(obs: dict[str, np.ndarray], r: int, n: int) -> np.ndarray:
    """Stack chain output into (Y, eta, theta, m2) rows; m2 = (r+1)^2 + s2/N."""
    m2 = (r + 1) ** 2 + obs["s2"] / n
    return np.column_stack([obs["y"], obs["eta"], obs["theta"], m2]).astype(float)
