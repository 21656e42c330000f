"""Standard normal primitives and distances from an empirical sample to N(0, 1)."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigError

SQRT_2PI = math.sqrt(2.0 * math.pi)


def std_normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


def std_normal_cdf(x):
    return ndtr(x)


def std_normal_quantile(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ConfigError("quantile needs u in (0, 1)")
    out = ndtri(u)
    return float(out) if out.ndim == 0 else out


def _as_sample(sample) -> np.ndarray:
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise ConfigError("empty sample")
    if not np.all(np.isfinite(x)):
        raise ConfigError("sample contains non-finite values")
    return x


def _phi_integral(x):
    """Antiderivative of Phi: x Phi(x) + phi(x), vanishing at -inf."""
    return x * ndtr(x) + std_normal_pdf(x)


def _upper_tail_integral(x):
    """Integral of 1 - Phi over [x, inf): phi(x) - x (1 - Phi(x))."""
    return std_normal_pdf(x) - x * ndtr(-x)


def wasserstein1_to_normal(sample) -> float:
    """Integral of |F_n - Phi| over the real line, segment by segment in closed form.

    On [x_(i), x_(i+1)) the empirical cdf is the constant c = i/n; the integrand
    changes sign at most once, at Phi^{-1}(c).
    """
    x = _as_sample(sample)
    n = x.size
    total = _phi_integral(x[0]) + _upper_tail_integral(x[-1])
    if n == 1:
        return float(total)
    a = x[:-1]
    b = x[1:]
    c = np.arange(1, n) / n
    cross = np.clip(ndtri(c), a, b)
    g_a, g_b, g_x = _phi_integral(a), _phi_integral(b), _phi_integral(cross)
    below = c * (cross - a) - (g_x - g_a)  # c > Phi on [a, cross]
    above = (g_b - g_x) - c * (b - cross)  # Phi > c on [cross, b]
    # clip round-off on zero-length pieces
    return float(total + np.sum(np.maximum(below, 0.0) + np.maximum(above, 0.0)))


def kolmogorov_to_normal(sample) -> float:
    x = _as_sample(sample)
    n = x.size
    cdf = ndtr(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - cdf)), np.max(np.abs((i - 1) / n - cdf))))
