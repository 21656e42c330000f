import itertools
from fractions import Fraction

import numpy as np
import pytest

from neighborhood_attack import exact
from neighborhood_attack.errors import StateSpaceTooLarge, SymmetricPRequired
from neighborhood_attack.graph import build_family, build_neighborhood_index
from neighborhood_attack.observables import cond_second_moment_delta_y, q_profile


def solve(kind, p=0.5, **params):
    g = build_family(kind, **params)
    return exact.solve(g, build_neighborhood_index(g), p)


def naive_stationary(g, p=0.5):
    """Oracle: dense kernel built state by state over tuples, eigenvector for eigenvalue 1."""
    states = list(itertools.product([-1, 1], repeat=g.n))
    where = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for s in states:
        for k in range(g.n):
            for coin, w in ((1, p), (-1, 1 - p)):
                t = list(s)
                for j in (k,) + g.adjacency[k]:
                    t[j] = coin
                P[where[s], where[tuple(t)]] += w / g.n
    vals, vecs = np.linalg.eig(P.T)
    pi = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    pi /= pi.sum()
    # reorder to bitmask indexing: bit k set <=> node k is +1
    out = np.zeros(len(states))
    for s, v in zip(states, pi):
        out[exact.state_index(s)] = v
    return out


# Var(Y) frozen from naive_stationary (dense eigen-solve), see test_matches_naive_oracle
FROZEN_VAR_Y = {
    ("circle", 4): 10.0,
    ("circle", 5): 12.0,
    ("circle", 6): 14.4,
    ("circle", 7): 16.8,
    ("circle", 8): 19.2,
    ("complete", 4): 16.0,
    ("hypercube", 3): 24.0,
    ("complete_bipartite", 3): 19.2,
}


@pytest.mark.parametrize("key,var_y", FROZEN_VAR_Y.items(), ids=lambda v: str(v))
def test_frozen_variances(key, var_y):
    kind, size = key
    param = {"hypercube": "dim", "complete_bipartite": "side"}.get(kind, "n")
    sol = solve(kind, **{param: size})
    assert sol.report.var_y == pytest.approx(var_y, abs=1e-10)


@pytest.mark.parametrize("kind,params", [
    ("circle", {"n": 5}), ("circle", {"n": 6}), ("complete", {"n": 3}),
    ("circulant", {"n": 7, "offsets": [1, 2]}),
])
@pytest.mark.parametrize("p", [0.5, 0.3])
def test_matches_naive_oracle(kind, params, p):
    g = build_family(kind, **params)
    sol = exact.solve(g, build_neighborhood_index(g), p)
    assert np.allclose(sol.stationary.pi, naive_stationary(g, p), atol=1e-10)


def test_transition_rows():
    t = exact.build_transition(build_family("circle", n=8))
    sums = np.asarray(t.matrix.sum(axis=1)).ravel()
    assert np.max(np.abs(sums - 1)) <= 1e-14
    # entries are multiples of 1/(2N)
    scaled = t.matrix.data * 2 * 8
    assert np.allclose(scaled, np.round(scaled), atol=1e-12)
    assert t.matrix.getnnz(axis=1).max() <= 2 * 8


@pytest.mark.parametrize("g", [build_family("complete", n=2), build_family("circle", n=3)],
                         ids=["K2", "C3"])
def test_two_successors(g):
    t = exact.build_transition(g)
    full = (1 << g.n) - 1
    for x in range(1 << g.n):
        row = t.matrix.getrow(x)
        assert dict(zip(row.indices.tolist(), row.data.tolist())) == pytest.approx({0: 0.5, full: 0.5})


def test_recurrent_class_complete():
    t = exact.build_transition(build_family("complete", n=4))
    assert exact.recurrent_class(t).tolist() == [0, 15]
    stat = exact.stationary(t)
    assert stat.pi[0] == pytest.approx(0.5, abs=1e-14) and stat.pi[15] == pytest.approx(0.5, abs=1e-14)


def test_recurrent_class_is_closure_of_one_step():
    """Every state reachable in one step lies in the class; alternating odd circles do not."""
    g = build_family("circle", n=5)
    t = exact.build_transition(g)
    cls = set(exact.recurrent_class(t).tolist())
    assert set(np.unique(t.successors).tolist()) <= cls
    # a state is recurrent iff some closed neighborhood is monochromatic
    spins = exact.state_spins(5, np.arange(32))
    sums = np.abs(spins[:, g.closed].sum(axis=2))
    assert cls == set(np.flatnonzero((sums == 3).any(axis=1)).tolist())
    alternating = exact.state_index([1, -1, 1, -1, -1])
    assert alternating not in cls


def test_cap():
    with pytest.raises(StateSpaceTooLarge):
        exact.build_transition(build_family("circle", n=18))
    with pytest.raises(StateSpaceTooLarge):
        exact.check_cap(10, cap=21)
    with pytest.warns(UserWarning):
        exact.check_cap(17, cap=17)


def test_power_iteration_branch(monkeypatch):
    g = build_family("circle", n=8)
    ref = exact.solve(g, build_neighborhood_index(g)).stationary.pi
    monkeypatch.setattr(exact, "DENSE_SOLVE_LIMIT", 10)
    sol = exact.solve(g, build_neighborhood_index(g))
    assert sol.stationary.method == "power-iteration"
    assert sol.stationary.residual < 1e-12
    assert np.allclose(sol.stationary.pi, ref, atol=1e-13)


def test_stationary_quality(small_graph):
    g, idx = small_graph
    sol = exact.solve(g, idx)
    stat = sol.stationary
    assert stat.residual < 1e-12
    assert abs(stat.pi.sum() - 1) < 1e-13
    assert stat.flip_asymmetry() < 1e-12
    assert abs(sol.report.mean_y) < 1e-12
    assert (g.r + 1) * g.n / 2 <= sol.report.var_y <= (g.r + 1) * g.n
    assert sol.report.var_m2_y <= sol.report.var_m2_state + 1e-12
    assert sol.linearity.max_deviation_exact == 0
    assert sol.linearity.max_deviation < 1e-12


def test_complete_functionals():
    rep = solve("complete", n=4).report
    assert rep.var_y == pytest.approx(16, abs=1e-10)
    assert rep.var_m2_state == pytest.approx(0, abs=1e-12)
    assert rep.var_m2_y == pytest.approx(0, abs=1e-12)


def test_functionals_against_direct_sum():
    g = build_family("circle", n=6)
    idx = build_neighborhood_index(g)
    sol = exact.solve(g, idx)
    pi = sol.stationary.pi
    m2 = np.zeros(64)
    for x in range(64):
        s = exact.state_spins(6, np.array([x]))[0]
        m2[x] = float(cond_second_moment_delta_y(q_profile(g, s)))
    mean = pi @ m2
    assert sol.report.var_m2_state == pytest.approx(pi @ (m2 - mean) ** 2, rel=1e-12)


def test_linearity_on_hypercube():
    g = build_family("hypercube", dim=3)
    check = exact.verify_linearity(g, exact.build_transition(g))
    assert check.max_deviation_exact == Fraction(0)
    assert check.max_deviation < 1e-12


def test_linearity_needs_half():
    g = build_family("circle", n=5)
    with pytest.raises(SymmetricPRequired):
        exact.verify_linearity(g, exact.build_transition(g, p=0.4))


def test_fkg_trivial_measures():
    # a product measure is log-supermodular: no violations
    n = 4
    probs = np.array([0.7, 0.4, 0.5, 0.2])
    spins = exact.state_spins(n, np.arange(16))
    pi = np.prod(np.where(spins > 0, probs, 1 - probs), axis=1)
    stat = exact.StationaryDistribution(pi, np.arange(16), 0.0, "given")
    res = exact.fkg_violations(stat)
    assert res.violations == [] and res.exhaustive and res.pairs_checked == 16 * 15 // 2


@pytest.mark.parametrize("n", [5, 7])
def test_fkg_odd_circle_violates(n):
    sol = solve("circle", n=n)
    res = exact.fkg_violations(sol.stationary, limit=5)
    assert res.n_violations > 0 and len(res.violations) == 5
    for v in res.violations:
        assert v["pi_meet"] * v["pi_join"] < v["pi_x"] * v["pi_y"]
        assert v["meet"] == v["x"] & v["y"] and v["join"] == v["x"] | v["y"]
    wit = exact.odd_circle_witness(n, sol.stationary)
    assert wit["pi_w1"] > 0 and wit["pi_w2"] > 0
    # the meet is all -1 (positive mass); it is the join that has mass zero
    assert wit["meet"] == 0 and wit["pi_meet"] > 0 and wit["pi_join"] == 0
    assert wit["violates"]


def test_fkg_sampling_branch():
    sol = solve("circle", n=9)
    full = exact.fkg_violations(sol.stationary, limit=10)
    sampled = exact.fkg_violations(sol.stationary, limit=10, budget=5000, seed=3)
    assert full.exhaustive and not sampled.exhaustive
    assert sampled.pairs_checked == 5000
    frac_full = full.n_violations / full.pairs_checked
    frac_sampled = sampled.n_violations / sampled.pairs_checked
    assert abs(frac_full - frac_sampled) < 5 * np.sqrt(frac_full / 5000)


def test_pi_csv(tmp_path):
    sol = solve("complete", n=3)
    exact.write_pi_csv(tmp_path / "pi.csv", sol.stationary)
    lines = (tmp_path / "pi.csv").read_text().splitlines()
    assert lines[0] == "state,probability"
    assert lines[1:] == ["0,0.5", "7,0.5"]
