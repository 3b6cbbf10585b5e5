import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import line_metric
from teichlab.electric import (CONE_EDGE, MetricSample, PathTrace, build_electric, lc_length,
                               quasigeodesic_fit)


def random_sample(rng, n):
    pts = rng.uniform(-5, 5, size=(n, 2))
    D = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    return MetricSample(list(range(n)), D)


def brute_electric(D, cones):
    """Floyd-Warshall on the explicit augmented graph."""
    n, m = len(D), len(cones)
    W = np.full((n + m, n + m), math.inf)
    W[:n, :n] = D
    for k, members in enumerate(cones):
        for i in members:
            W[n + k, i] = W[i, n + k] = CONE_EDGE
    np.fill_diagonal(W, 0)
    for k in range(n + m):
        W = np.minimum(W, W[:, [k]] + W[[k], :])
    return W


samples = st.integers(0, 10_000).map(np.random.default_rng)
cone_families = st.lists(st.sets(st.integers(0, 7), min_size=1, max_size=4), max_size=3)


def test_no_cones_is_the_base_metric():
    sp = build_electric(MetricSample("abcd", line_metric([0, 1, 5, 9])))
    assert sp.pairwise(range(4)) == pytest.approx(line_metric([0, 1, 5, 9]))


def test_shared_cone_collapses_to_one():
    sp = build_electric(MetricSample("xy", line_metric([0, 10])), {"A": [0, 1]})
    assert sp.d_el(0, 1) == 1.0
    assert sp.set_distance("A", "A") == 0.0


def test_overlapping_cones_give_at_most_two():
    sp = build_electric(MetricSample("xzy", line_metric([0, 50, 100])), {"A": [0, 1], "B": [1, 2]})
    assert sp.d_el(0, 2) <= 2.0
    assert sp.set_distance("A", "B") == pytest.approx(0.0)


def test_empty_cone_rejected():
    with pytest.raises(ValueError):
        build_electric(MetricSample("xy", line_metric([0, 1])), {"A": []})
    with pytest.raises(ValueError):
        build_electric(MetricSample("xy", line_metric([0, 1])), {"A": [5]})


def test_metric_sample_audit():
    assert random_sample(np.random.default_rng(0), 20).audit(500) <= 1e-9
    bad = MetricSample("abc", np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float))
    assert bad.audit(500) > 1


def test_callable_metric_sample():
    s = MetricSample(list(range(5)), lambda i, j: abs(i - j) * 2.0)
    assert s.d(3, 3) == 0.0 and s.matrix()[0, 4] == 8.0


@given(samples, cone_families)
def test_matches_brute_force(rng, cones):
    base = random_sample(rng, 8)
    sp = build_electric(base, {k: c for k, c in enumerate(cones)})
    W = brute_electric(base.matrix(), cones)
    assert sp.pairwise(range(8)) == pytest.approx(W[:8, :8], abs=1e-12)


@given(samples, cone_families)
def test_electric_invariants(rng, cones):
    base = random_sample(rng, 8)
    D = base.matrix()
    E = build_electric(base, {k: c for k, c in enumerate(cones)}).pairwise(range(8))
    assert np.all(E <= D + 1e-12)
    for c in cones:
        for i, j in itertools.combinations(c, 2):
            assert E[i, j] <= 1.0 + 1e-12
    for i, j, k in itertools.permutations(range(8), 3):
        assert E[i, k] <= E[i, j] + E[j, k] + 1e-12


@given(samples, cone_families, st.sets(st.integers(0, 7), min_size=1))
def test_adding_a_cone_never_increases_distance(rng, cones, extra):
    base = random_sample(rng, 8)
    before = build_electric(base, {k: c for k, c in enumerate(cones)}).pairwise(range(8))
    after = build_electric(base, {**{k: c for k, c in enumerate(cones)}, "new": extra}).pairwise(range(8))
    assert np.all(after <= before + 1e-12)


def test_edges_csv():
    sp = build_electric(MetricSample("ab", line_metric([0, 2])), {"A": [0]})
    lines = sp.edges_csv().splitlines()
    assert lines[0] == "node1,node2,weight"
    assert "a,b,2.0" in lines and "a,cone:A,0.5" in lines


def test_path_trace_validation():
    assert PathTrace((3, 4, 5)).params == (0.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        PathTrace((1, 2), (1.0, 1.0))
    with pytest.raises(ValueError):
        PathTrace((1, 2), (0.0,))


def line_space(points):
    return build_electric(MetricSample(list(range(len(points))), line_metric(points)))


def test_lc_short_path_is_one_block():
    sp = line_space([0, 0.2, 0.5, 0.9])
    assert lc_length(sp, PathTrace(range(4)), 1.0) == 1.0
    assert lc_length(sp, PathTrace([2]), 1.0) == 1.0


def test_lc_chain_with_long_skips():
    m, c = 6, 1.0
    sp = line_space([float(i) for i in range(m + 1)])
    assert lc_length(sp, PathTrace(range(m + 1)), c) == c * m


def test_lc_rejects_bad_scale():
    with pytest.raises(ValueError):
        lc_length(line_space([0, 1]), PathTrace([0, 1]), 0.0)


@given(st.lists(st.floats(0.01, 0.5), min_size=2, max_size=25), st.floats(0.5, 3.0), st.integers(0, 10_000))
def test_lc_monotone_under_refinement(gaps, c, seed):
    # holds for monotone samples whose coarse hops stay within c
    pts = np.concatenate([[0.0], np.cumsum(gaps)])
    rng = np.random.default_rng(seed)
    keep = [0]
    for i in range(1, len(pts) - 1):
        if pts[i + 1] - pts[keep[-1]] > c or rng.random() < 0.5:
            keep.append(i)
    keep.append(len(pts) - 1)
    sp = line_space(pts)
    assert lc_length(sp, PathTrace(range(len(pts))), c) <= lc_length(sp, PathTrace(keep), c)


def test_geodesic_path_fits_with_mu_below_scale():
    c = 1.0
    sp = line_space(np.arange(0, 10.01, c))
    fit = quasigeodesic_fit(sp, PathTrace(range(len(sp.base))), c)
    assert fit.k == 1.0 and fit.mu <= c + 1e-12
    assert fit.upper_automatic


def test_backtracking_forces_mu():
    D = 4.0
    pts = [0, 1, 2, 3, 4, 3, 2, 1, 0, 1, 2, 3, 4, 5, 6]
    sp = line_space(pts)
    fit = quasigeodesic_fit(sp, PathTrace(range(len(pts))), 1.0)
    assert fit.k == 1.0 and fit.mu >= D


def test_fit_does_not_grow_past_backtrack_scale():
    pts = [0, 1, 2, 3, 2, 1, 2, 3, 4, 5, 6, 7, 8]
    sp = line_space(pts)
    fits = [quasigeodesic_fit(sp, PathTrace(range(len(pts))), c) for c in (4.0, 6.0, 8.0, 12.0)]
    ratios = [f.mu / c for f, c in zip(fits, (4.0, 6.0, 8.0, 12.0))]
    assert all(f.k == 1.0 for f in fits)
    assert all(b <= a + 1e-12 for a, b in zip(ratios, ratios[1:]))
