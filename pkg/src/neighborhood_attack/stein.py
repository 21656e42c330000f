"""Normal-approximation bounds for the normalized node sum.

``W = Y / sigma_Y`` and the one-step successor ``W'`` satisfy
``E[W' | W] = (1 - lam) W`` with ``lam = (r+1)/N`` and ``|W' - W| <= A``,
``A = 2(r+1)/sigma_Y``. For such a pair the Wasserstein distance of W to
N(0, 1) is at most

    (12/lam) sqrt(Var E[(W'-W)^2 | W]) + 32 A^3/lam + 6 A^2/sqrt(lam).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

from .errors import ConfigError, SymmetricPRequired

FINAL_CONST = 2 ** 9.5 + 48
VARIANTS = ("r_star", "r_squared")


def lam(r: int, n: int) -> Fraction:
    if not (1 <= r < n):
        raise ConfigError(f"need N > r >= 1 (got r={r}, N={n})")
    return Fraction(r + 1, n)


def sigma2_bounds(r: int, n: int) -> tuple[Fraction, Fraction]:
    """Bracket ((r+1)N/2, (r+1)N) on Var(Y) at stationarity."""
    if r < 1 or n < 1:
        raise ConfigError(f"invalid dimensions r={r}, N={n}")
    return Fraction((r + 1) * n, 2), Fraction((r + 1) * n)


@dataclass(frozen=True)
class BoundTerms:
    variance: float
    cubic: float
    quadratic: float

    @property
    def total(self) -> float:
        return self.variance + self.cubic + self.quadratic


def rollin_bound(lam_: float, a: float, var_term: float) -> BoundTerms:
    """Three-term bound on the W scale (var_term = Var E[(W'-W)^2 | W])."""
    lam_ = float(lam_)
    if lam_ <= 0 or a < 0 or var_term < 0:
        raise ConfigError(f"rollin_bound needs lam > 0, A >= 0, var_term >= 0 "
                          f"(got {lam_}, {a}, {var_term})")
    return BoundTerms(
        12.0 / lam_ * math.sqrt(var_term),
        32.0 * a ** 3 / lam_,
        6.0 * a ** 2 / math.sqrt(lam_),
    )


def assembled_bound(r: int, n: int, sigma2: float, var_term: float) -> BoundTerms:
    """The same bound written on the Y scale.

    ``var_term`` is Var E[(Y'-Y)^2 | .]; ``sigma2`` is Var(Y).
    """
    if sigma2 <= 0 or var_term < 0:
        raise ConfigError(f"need sigma2 > 0 and var_term >= 0 (got {sigma2}, {var_term})")
    sigma = math.sqrt(sigma2)
    return BoundTerms(
        12.0 * n / ((r + 1) * sigma2) * math.sqrt(var_term),
        256.0 * (r + 1) ** 2 * n / sigma ** 3,
        24.0 * (r + 1) ** 1.5 * math.sqrt(n) / sigma2,
    )


def analytic_var_term(r: int, r_star: int, n: int) -> float:
    """Worst case for Var E[(Y'-Y)^2 | Y] given Cov(eta, theta) <= 0: 4 r*^2 (r+1) / N."""
    return 4.0 * r_star ** 2 * (r + 1) / n


def theorem_bound(r: int, r_star: int, n: float, variant: str = "r_star") -> float:
    """48 c/sqrt((r+1)N) + (2^(19/2) + 48) sqrt(r+1)/sqrt(N), with c = r* or r^2."""
    if not r <= r_star <= r * r:
        raise ConfigError(f"r* must satisfy r <= r* <= r^2 (got r={r}, r*={r_star})")
    if n < 1:
        raise ConfigError(f"N must be >= 1 (got {n})")
    if variant == "r_star":
        c = r_star
    elif variant == "r_squared":
        c = r * r
    else:
        raise ConfigError(f"variant must be one of {VARIANTS}")
    return 48.0 * c / (math.sqrt(r + 1) * math.sqrt(n)) + FINAL_CONST * math.sqrt(r + 1) / math.sqrt(n)


def _propagate(r, n, sigma2, var_term, se_sigma2, se_var):
    """First-order standard error of the assembled bound."""
    t = assembled_bound(r, n, sigma2, var_term)
    d_sigma2 = -(t.variance + 1.5 * t.cubic + t.quadratic) / sigma2
    d_var = t.variance / (2 * var_term) if var_term > 0 else 0.0
    return math.hypot(d_sigma2 * (se_sigma2 or 0.0), d_var * (se_var or 0.0))


@dataclass(frozen=True)
class SteinReport:
    r: int
    r_star: Optional[int]
    n: int
    lam: float
    a: float
    sigma2: float
    sigma2_source: str
    sigma2_lower: float
    sigma2_upper: float
    var_term: float
    var_term_source: str
    rollin_delta: float
    rollin_terms: dict
    rollin_delta_se: Optional[float]
    theorem_delta_rstar: Optional[float]
    theorem_delta_rsq: float

    def to_dict(self) -> dict:
        return asdict(self)


def stein_report(r: int, n: int, r_star: Optional[int] = None, p: float = 0.5, *,
                 sigma2_exact: Optional[float] = None,
                 sigma2_estimate: Optional[float] = None, sigma2_se: Optional[float] = None,
                 var_term_exact: Optional[float] = None,
                 var_term_estimate: Optional[float] = None, var_term_se: Optional[float] = None,
                 ) -> SteinReport:
    """Assemble every bound from the best available inputs.

    sigma^2 precedence: exact, then Monte Carlo estimate, then the lower end of
    the variance bracket (conservative, since it sits in denominators). The
    variance term likewise falls back to its analytic worst case, which needs a
    constant r*.
    """
    if p != 0.5:
        raise SymmetricPRequired(p)
    lo, hi = sigma2_bounds(r, n)
    if sigma2_exact is not None:
        sigma2, s_src, s_se = sigma2_exact, "exact", None
    elif sigma2_estimate is not None:
        sigma2, s_src, s_se = sigma2_estimate, "estimated", sigma2_se
    else:
        sigma2, s_src, s_se = float(lo), "variance-lower-bound", None

    if var_term_exact is not None:
        var_term, v_src, v_se = var_term_exact, "exact", None
    elif var_term_estimate is not None:
        var_term, v_src, v_se = var_term_estimate, "estimated", var_term_se
    elif r_star is not None:
        var_term, v_src, v_se = analytic_var_term(r, r_star, n), "analytic-bound", None
    else:
        raise ConfigError("no variance term available and r* is not constant")
    var_term = max(var_term, 0.0)

    lam_ = float(lam(r, n))
    a = 2 * (r + 1) / math.sqrt(sigma2)
    terms = rollin_bound(lam_, a, var_term / sigma2 ** 2)
    se = None
    if s_se is not None or v_se is not None:
        se = _propagate(r, n, sigma2, var_term, s_se, v_se)

    return SteinReport(
        r=r, r_star=r_star, n=n, lam=lam_, a=a,
        sigma2=float(sigma2), sigma2_source=s_src,
        sigma2_lower=float(lo), sigma2_upper=float(hi),
        var_term=float(var_term), var_term_source=v_src,
        rollin_delta=terms.total,
        rollin_terms={"variance": terms.variance, "cubic": terms.cubic, "quadratic": terms.quadratic},
        rollin_delta_se=se,
        theorem_delta_rstar=theorem_bound(r, r_star, n, "r_star") if r_star is not None else None,
        theorem_delta_rsq=theorem_bound(r, r * r, n, "r_squared"),
    )
