"""Acceptance criteria, one test (and one printed PASS/FAIL line) per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary section lists every line.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_states, report
from neighborhood_attack import exact
from neighborhood_attack.chain import ChainConfig, sample_observables
from neighborhood_attack.cli import run as cli_run
from neighborhood_attack.estimators import BatchMeans, finalize, rows_from_observables
from neighborhood_attack.graph import build_family, build_neighborhood_index, family_dims
from neighborhood_attack.normdist import (kolmogorov_to_normal, std_normal_cdf,
                                          std_normal_quantile, wasserstein1_to_normal)
from neighborhood_attack.observables import closed_sums, pair_counts_batch, profile_values
from neighborhood_attack.stein import analytic_var_term, assembled_bound, theorem_bound

LINEARITY_INSTANCES = (
    [("circle", {"n": n}) for n in range(4, 11)]
    + [("complete", {"n": n}) for n in range(3, 6)]
    + [("hypercube", {"dim": 3})]
)
EXTRA_INSTANCES = [
    ("circulant", {"n": 9, "offsets": [1, 3]}),
    ("circulant", {"n": 12, "offsets": [1, 6]}),
    ("hypercube", {"dim": 4}),
    ("complete_bipartite", {"side": 3}),
    ("complete_bipartite", {"side": 4}),
]
IDENTITY_INSTANCES = LINEARITY_INSTANCES + EXTRA_INSTANCES + [
    ("circle", {"n": 101}), ("hypercube", {"dim": 7}), ("complete", {"n": 30}),
    ("circulant", {"n": 64, "offsets": [1, 5, 9]}), ("complete_bipartite", {"side": 20}),
]


def label(kind, params):
    return kind + "(" + ",".join(f"{k}={v}" for k, v in params.items()) + ")"


@pytest.fixture(scope="module")
def solved():
    out = {}
    for kind, params in LINEARITY_INSTANCES + EXTRA_INSTANCES:
        g = build_family(kind, **params)
        out[label(kind, params)] = (g, exact.solve(g, build_neighborhood_index(g)))
    return out


def test_criterion_01_linearity(solved):
    worst, worst_exact = 0.0, Fraction(0)
    for kind, params in LINEARITY_INSTANCES:
        g, _ = solved[label(kind, params)]
        check = exact.verify_linearity(g, exact.build_transition(g))
        worst = max(worst, check.max_deviation)
        worst_exact = max(worst_exact, check.max_deviation_exact)
    ok = worst < 1e-12 and worst_exact == 0
    report(1, ok, f"max |E[dY|x] + (r+1)Y/N| float={worst:.3g}, rational={worst_exact} "
                  f"over {len(LINEARITY_INSTANCES)} instances, every state")
    assert ok


def test_criterion_02_q_profile_identities():
    rng = np.random.default_rng(2)
    bad = 0
    for kind, params in IDENTITY_INSTANCES:
        g = build_family(kind, **params)
        states = random_states(rng, g.n, 10_000)
        sums = closed_sums(g, states)
        y = states.sum(axis=1, dtype=np.int64)
        values = np.array(profile_values(g.r))
        q = (sums[:, :, None] == values).sum(axis=1)  # (states, r+2) q-profile
        bad += np.count_nonzero(q.sum(axis=1) != g.n)
        bad += np.count_nonzero(q @ values != (g.r + 1) * y)
    report(2, bad == 0, f"sum q_i = N and sum i q_i = (r+1)Y: {bad} integer mismatches "
                        f"on 10^4 random states x {len(IDENTITY_INSTANCES)} instances")
    assert bad == 0


def test_criterion_03_pair_identities():
    rng = np.random.default_rng(3)
    bad = 0
    for kind, params in IDENTITY_INSTANCES:
        g = build_family(kind, **params)
        idx = build_neighborhood_index(g)
        assert idx.r_star is not None
        states = random_states(rng, g.n, 10_000)
        a = states[:, idx.pair_i]
        b = states[:, idx.pair_j]
        alpha = np.count_nonzero(a == b, axis=1)
        beta = np.count_nonzero(a != b, axis=1)
        eta, theta = pair_counts_batch(idx, states)
        y = states.sum(axis=1, dtype=np.int64)
        bad += np.count_nonzero(2 * (alpha + beta) != idx.r_star * g.n)
        bad += np.count_nonzero(2 * (eta - theta) != idx.r_star * y)
    report(3, bad == 0, f"alpha+beta = r*N/2 and 2(eta-theta) = r*Y: {bad} mismatches")
    assert bad == 0


def test_criterion_04_variance_bracket(solved):
    outside = []
    for name, (g, sol) in solved.items():
        v = sol.report.var_y
        if not (g.r + 1) * g.n / 2 - 1e-10 <= v <= (g.r + 1) * g.n + 1e-10:
            outside.append(name)
    k4 = solved[label("complete", {"n": 4})][1].report.var_y
    ok = not outside and abs(k4 - 16) <= 1e-10
    report(4, ok, f"(r+1)N/2 <= Var Y <= (r+1)N on {len(solved)} instances "
                  f"(outside: {outside or 'none'}); K4 Var Y = {k4:.12f}")
    assert ok


@pytest.mark.slow
def test_criterion_05_monte_carlo_vs_exact():
    g = build_family("circle", n=8)
    idx = build_neighborhood_index(g)
    ex = exact.solve(g, idx).report
    cfg = ChainConfig(seed=20240607, samples=1_000_000).resolved(g.n)
    obs = sample_observables(g, idx, cfg)
    est = finalize(BatchMeans.for_stream(cfg.samples).push_many(rows_from_observables(obs, g.r, g.n)))
    pairs = {
        "var_y": (est.var_y_hat, est.se_var_y, ex.var_y),
        "cov_eta_theta": (est.cov_eta_theta_hat, est.se_cov_eta_theta, ex.cov_eta_theta),
        "var_cond_m2": (est.var_cond_m2_hat, est.se_var_cond_m2, ex.var_m2_state),
    }
    z = {k: (e - x) / se for k, (e, se, x) in pairs.items()}
    ok = est.count == 1_000_000 and all(abs(v) <= 3 for v in z.values())
    report(5, ok, "circle N=8, 10^6 samples, |z| vs exact: "
           + ", ".join(f"{k}={v:+.2f}" for k, v in z.items()))
    assert ok


def test_criterion_06_stationarity_quality(solved):
    residual = mass = flip = mean = 0.0
    for g, sol in solved.values():
        residual = max(residual, sol.stationary.residual)
        mass = max(mass, abs(sol.stationary.pi.sum() - 1))
        flip = max(flip, sol.stationary.flip_asymmetry())
        mean = max(mean, abs(sol.report.mean_y))
    ok = residual < 1e-12 and flip < 1e-12 and mean < 1e-12
    report(6, ok, f"max residual {residual:.2g}, |pi(x)-pi(~x)| {flip:.2g}, |E Y| {mean:.2g}, "
                  f"mass error {mass:.2g} over {len(solved)} instances")
    assert ok


def test_criterion_07a_theorem_bound_value():
    value = theorem_bound(2, 4, 10 ** 8)
    ok = abs(value - 0.14481) <= 1e-4
    report("7a", ok, f"theorem bound (r=2, r*=4, N=1e8) = {value:.6f}, target 0.14481 +- 1e-4")
    assert ok


def test_criterion_07b_assembled_matches_theorem():
    """Assembled bound with the worst-case variance term must equal the closed form.

    The variance term 4 r*^2 (r+1) N is Var(sum_i i^2 q_i); the assembled bound takes
    Var E[(Y'-Y)^2 | .] = Var(sum_i i^2 q_i) / N^2. Both readings are evaluated.
    """
    r, r_star, n = 2, 4, 10 ** 8
    target = theorem_bound(r, r_star, n)
    sigma2 = (r + 1) * n / 2
    scaled = assembled_bound(r, n, sigma2, 4 * r_star ** 2 * (r + 1) * n / n ** 2).total
    literal = assembled_bound(r, n, sigma2, 4 * r_star ** 2 * (r + 1) * n).total
    assert scaled == pytest.approx(assembled_bound(r, n, sigma2, analytic_var_term(r, r_star, n)).total)
    rel = abs(scaled - target) / target
    ok = rel <= 1e-10
    report("7b", ok, f"assembled bound {scaled:.6f} (literal var term: {literal:.4g}) vs "
                     f"theorem bound {target:.6f}, rel diff {rel:.3g}, tolerance 1e-10")
    assert ok


def test_criterion_07c_family_limits():
    hyper = [family_dims("hypercube", dim=d) for d in range(3, 15)]
    h_rstar = [theorem_bound(r, rs, n) for n, r, rs in hyper]
    h_rsq = [theorem_bound(r, rs, n, "r_squared") for n, r, rs in hyper]
    hyper_ok = all(b < a for a, b in zip(h_rstar, h_rstar[1:])) and \
        all(b < a for a, b in zip(h_rsq, h_rsq[1:]))
    grid = [2 ** k for k in range(1, 7)]
    bip = [family_dims("complete_bipartite", side=m) for m in grid]
    b_rsq = [theorem_bound(r, rs, n, "r_squared") for n, r, rs in bip]
    bip_ok = all(b > a for a, b in zip(b_rsq, b_rsq[1:]))
    ok = hyper_ok and bip_ok
    report("7c", ok, f"hypercube d=3..14 decreasing ({h_rsq[0]:.1f} -> {h_rsq[-1]:.1f}); "
                     f"complete bipartite M={grid} r^2 variant increasing "
                     f"({b_rsq[0]:.1f} -> {b_rsq[-1]:.1f})")
    assert ok


@pytest.mark.slow
def test_criterion_08_circle_normality():
    g = build_family("circle", n=4096)
    idx = build_neighborhood_index(g)
    cfg = ChainConfig(seed=8, samples=100_000).resolved(g.n)
    obs = sample_observables(g, idx, cfg)
    y = obs["y"].astype(float)
    w = y / y.std(ddof=1)
    ks = kolmogorov_to_normal(w)
    w1 = wasserstein1_to_normal(w)
    ok = len(y) >= 100_000 and ks <= 0.05 and w1 <= 0.1
    report(8, ok, f"circle N=4096, {len(y)} samples thinned by N: KS={ks:.4f} (<=0.05), "
                  f"W1={w1:.4f} (<=0.1), sigma from sample, Var Y/N={y.var(ddof=1) / g.n:.3f}")
    assert ok


def test_criterion_09_fkg_odd_circle(tmp_path_factory):
    out = tmp_path_factory.mktemp("fkg") / "circle7"
    cfg = out.parent / "circle7.json"
    cfg.write_text(json.dumps({"family": {"kind": "circle", "n": 7}, "fkg": True}))
    code = cli_run(["exact", "--config", str(cfg), "--out", str(out)])
    fkg = json.loads((out / "exact.json").read_text())["fkg"]
    persisted = (out / "manifest.json").exists() and "exact.json" in \
        json.loads((out / "manifest.json").read_text())["checksums"]
    found = fkg["n_violations"] > 0
    detail = (f"{fkg['n_violations']} violating pairs of {fkg['pairs_checked']} "
              f"(exhaustive={fkg['exhaustive']}), persisted to exact.json")
    if not found:
        detail += f"; DISCREPANCY recorded: {fkg.get('discrepancy')}"
    ok = code == 0 and persisted and found
    report(9, ok, detail)
    assert ok


def test_criterion_10_normdist_primitives():
    xs = np.linspace(-6, 6, 1201)
    roundtrip = float(np.max(np.abs(std_normal_quantile(std_normal_cdf(xs)) - xs)))
    phi0 = std_normal_cdf(0.0)
    phi196 = std_normal_cdf(1.959964)
    w1 = wasserstein1_to_normal([0.0])
    ok = (phi0 == 0.5 and abs(phi196 - 0.975) <= 1e-6 and roundtrip <= 1e-7
          and abs(w1 - math.sqrt(2 / math.pi)) <= 1e-6)
    report(10, ok, f"Phi(0)={phi0}, Phi(1.959964)={phi196:.7f}, round-trip {roundtrip:.2g}, "
                   f"W1({{0}})={w1:.7f}")
    assert ok
