"""Non-backtracking random walks, tree walks, and the weighted Laplacian."""

import math

import numpy as np
import pytest

from geodlab.errors import DegenerateError, NotTransientError
from geodlab.library import (
    order_two_chain,
    petersen,
    theta,
    two_vertex_segment,
)
from geodlab.seeding import derive_seed
from geodlab.walks import (
    NBRWKernel,
    green_ratio_check,
    is_reversible,
    laplacian_apply,
    laplacian_matrices,
    nbrw_exact,
    nbrw_sample,
    tree_harmonic_measure,
    tree_walk_kappa,
    vol_inner,
)


# ---------------------------------------------------------------------------
# seeding (splitmix64 reference implementation as oracle)


def _splitmix64_oracle(master, index):
    mask = (1 << 64) - 1
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def test_derive_seed_matches_splitmix64():
    for master, index in [(0, 0), (42, 3), (123456789, 17), (2 ** 63, 5)]:
        assert derive_seed(master, index) == _splitmix64_oracle(master, index)


def test_derive_seed_streams_distinct():
    seeds = {derive_seed(7, i) for i in range(100)}
    assert len(seeds) == 100


# ---------------------------------------------------------------------------
# NBRW kernel


def test_kernel_rows_stochastic():
    for g in (petersen(), theta(), order_two_chain()):
        k = NBRWKernel(g)
        P = np.asarray(k.P)
        assert (P >= 0).all()
        assert np.abs(P.sum(axis=1) - 1).max() < 1e-14


def test_kernel_uniform_for_trivial_orders():
    k = NBRWKernel(petersen())
    P = np.asarray(k.P)
    # every allowed successor has probability 1/2 on a cubic graph
    assert set(np.round(P[P > 0], 12)) == {0.5}


def test_nbrw_exact_petersen_converges():
    out = nbrw_exact(petersen(), "P0", 60)
    assert not out["bipartite"]
    assert np.abs(np.asarray(out["target"]) - 0.1).max() < 1e-12
    assert out["tv_to_target"] < 1e-3


def test_nbrw_exact_orderchain_vol_over_vol():
    out = nbrw_exact(order_two_chain(), "X", 200)
    want = np.array([1 / 6, 1 / 6, 1 / 3, 1 / 3])
    assert np.abs(np.asarray(out["target"]) - want).max() < 1e-12
    assert out["tv_to_target"] < 1e-12


def test_nbrw_exact_bipartite_flagged():
    out = nbrw_exact(theta(), "U", 30)
    assert out["bipartite"]


def test_nbrw_degenerate_graph():
    with pytest.raises(DegenerateError):
        nbrw_exact(two_vertex_segment(), "u", 5)


def test_nbrw_sample_single_path():
    out = nbrw_sample(theta(), "U", 4, 1, 0)
    assert out["tallies"].sum() == 1
    assert sorted(out["empirical"]) == [0.0, 1.0]


def test_nbrw_sample_deterministic():
    a = nbrw_sample(petersen(), "P0", 30, 2000, 9)
    b = nbrw_sample(petersen(), "P0", 30, 2000, 9)
    assert (a["tallies"] == b["tallies"]).all()
    c = nbrw_sample(petersen(), "P0", 30, 2000, 10)
    assert (a["tallies"] != c["tallies"]).any()


def test_nbrw_sample_tracks_exact():
    n, reps = 40, 20000
    emp = nbrw_sample(petersen(), "P0", n, reps, 4)["empirical"]
    exact = nbrw_exact(petersen(), "P0", n)["vertex_dist"]
    sigma = np.sqrt(np.asarray(exact) * (1 - np.asarray(exact)) / reps)
    assert (np.abs(np.asarray(emp) - exact) <= 4 * sigma + 1e-12).all()


# ---------------------------------------------------------------------------
# tree walks


def test_kappa_at_zero_conductance():
    for q in (2, 3, 5):
        assert abs(tree_walk_kappa(q, math.log(q)) - 1.0) < 1e-14


def test_harmonic_depth_one():
    out = tree_harmonic_measure(2, 1, 30000, 12)
    assert out["n_shadows"] == 3
    assert abs(out["target"] - 1 / 3) < 1e-15
    for est in out["estimates"]:
        assert abs(est - out["target"]) <= 3 * out["sigma"]
    assert abs(sum(out["estimates"]) - 1.0) < 1e-12


def test_harmonic_depth_two():
    out = tree_harmonic_measure(2, 2, 30000, 12)
    assert out["n_shadows"] == 6
    assert abs(out["target"] - 1 / 6) < 1e-15
    for est in out["estimates"]:
        assert abs(est - out["target"]) <= 3 * out["sigma"]


def test_harmonic_recurrent_rejected():
    with pytest.raises(NotTransientError):
        tree_harmonic_measure(2, 1, 100, 0, delta=0.5 * math.log(2))


def test_green_ratio():
    out = green_ratio_check(2, 1, 2, 20000, 7)
    assert abs(out["target"] - 2.0) < 1e-15
    assert abs(out["ratio"] - 2.0) <= 3 * out["sigma"]


def test_green_equal_distances():
    out = green_ratio_check(2, 2, 2, 2000, 1)
    assert out["ratio"] == 1.0 and out["target"] == 1.0


def test_green_seed_consistency():
    a = green_ratio_check(2, 1, 2, 10000, 1)
    b = green_ratio_check(2, 1, 2, 10000, 2)
    assert abs(a["ratio"] - b["ratio"]) <= 3 * (a["sigma"] + b["sigma"])


# ---------------------------------------------------------------------------
# Laplacian


def _reversible_conductance(g, seed):
    rng = np.random.default_rng(seed)
    c = {}
    for eid in g.edge_ids:
        e = g.edges[eid]
        if e.reverse not in c:
            c[eid] = c[e.reverse] = float(rng.normal())
    return g.with_conductance(c)


def test_laplacian_two_vertex():
    Delta, _, _, _ = laplacian_matrices(two_vertex_segment())
    eigs = sorted(np.linalg.eigvalsh(Delta).round(12))
    assert eigs == [0.0, 2.0]


def test_laplacian_kills_constants():
    g = petersen()
    Delta, _, _, _ = laplacian_matrices(g)
    assert np.abs(Delta @ np.ones(g.vertex_count())).max() < 1e-12


def test_laplacian_factorizes_reversible():
    g = _reversible_conductance(theta(), 5)
    assert is_reversible(g)
    Delta, D, Dstar, _ = laplacian_matrices(g)
    assert np.abs(Delta - Dstar @ D).max() < 1e-12


def test_laplacian_self_adjoint_and_positive():
    # constant conductance on a regular graph keeps deg_c constant, the
    # regime where the vol inner product makes Delta self-adjoint
    g = petersen().with_conductance(
        {e: 0.3 for e in petersen().edge_ids})
    Delta, _, _, _ = laplacian_matrices(g)
    rng = np.random.default_rng(0)
    for _ in range(5):
        f = rng.normal(size=g.vertex_count())
        h = rng.normal(size=g.vertex_count())
        assert abs(vol_inner(g, Delta @ f, h)
                   - vol_inner(g, f, Delta @ h)) < 1e-10
        assert vol_inner(g, Delta @ f, f) >= -1e-12


def test_laplacian_degc_weighted_symmetry():
    # general reversible c: Delta is the generator of a reversible chain,
    # symmetric once rows are weighted by deg_c
    g = _reversible_conductance(petersen(), 6)
    Delta, _, _, degc = laplacian_matrices(g)
    w = np.array([degc[v] for v in g.vertex_ids])
    M = np.diag(w) @ Delta
    assert np.abs(M - M.T).max() < 1e-12


def test_laplacian_apply_matches_matrix():
    g = _reversible_conductance(theta(), 8)
    Delta, _, _, _ = laplacian_matrices(g)
    f = np.array([0.3, -1.2])
    assert np.abs(laplacian_apply(g, f) - Delta @ f).max() < 1e-12


def test_is_reversible_detects_asymmetry():
    g = theta().with_conductance({"a+": 1.0})
    assert not is_reversible(g)
