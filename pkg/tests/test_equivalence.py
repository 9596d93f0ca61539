import numpy as np
import pytest

import oracles
from instances import planted_stars
from metrepair import (
    Kernel,
    MetricInputError,
    PointSpace,
    SizeLimitError,
    coincidence_support,
    disagreement_graph,
    transfer_inequality_check,
)
from metrepair.generators import circle_distances


def base(n=8):
    return Kernel(circle_distances(n)), PointSpace.circle(n)


def perturb(k, pairs, delta=0.3):
    v = k.values.copy()
    for a, b in pairs:
        v[a, b] += delta
        v[b, a] += delta
    return Kernel(v)


def test_graph_examples():
    k, s = base()
    assert disagreement_graph(k, k, s) == []
    assert disagreement_graph(k, perturb(k, [(2, 5)]), s) == [(2, 5)]
    assert disagreement_graph(k, perturb(k, [(2, 5)], 1e-14), s) == []
    assert disagreement_graph(k, perturb(k, [(5, 2), (0, 1)]), s) == [(0, 1), (2, 5)]


def test_graph_skips_zero_mass_points():
    k, _ = base(4)
    s = PointSpace([0.5, 0.5, 0.0, 0.0])
    assert disagreement_graph(k, perturb(k, [(0, 2), (0, 1)]), s) == [(0, 1)]


def test_graph_dimension_mismatch():
    k, s = base(4)
    with pytest.raises(MetricInputError):
        disagreement_graph(k, Kernel(np.zeros((3, 3))), s)


@pytest.mark.parametrize("method", ["greedy_cover", "exact_cover"])
def test_identical_kernels_keep_everything(method):
    k, s = base()
    res = coincidence_support(k, k, s, method=method)
    assert res.retained == tuple(range(8))
    assert res.retained_mass == 1.0
    assert res.removed == {}


def test_single_edge_removes_lighter_end():
    k = Kernel(circle_distances(4))
    s = PointSpace([0.1, 0.4, 0.2, 0.3])
    res = coincidence_support(k, perturb(k, [(0, 2)]), s, method="exact_cover")
    assert res.retained == (1, 2, 3)
    assert res.retained_mass == pytest.approx(0.9)


def test_star_removes_center():
    k, s = base()
    k2 = perturb(k, [(3, 0), (3, 1), (3, 5), (3, 7)])
    for method in ("exact_cover", "greedy_cover"):
        res = coincidence_support(k, k2, s, method=method)
        assert list(res.removed) == [3]
        assert res.removed[3] == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(30))
def test_exact_cover_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 11))
    k = Kernel(np.zeros((n, n)))
    s = PointSpace(rng.dirichlet(np.ones(n)))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.3]
    k2 = perturb(k, pairs)
    exact = coincidence_support(k, k2, s, method="exact_cover")
    greedy = coincidence_support(k, k2, s, method="greedy_cover")
    best = oracles.min_vertex_cover_mass(n, pairs, s.masses.tolist())
    assert exact.retained_mass == pytest.approx(1 - best, abs=1e-12)
    assert exact.retained_mass >= greedy.retained_mass - 1e-12
    for res in (exact, greedy):
        keep = set(res.retained)
        assert not [p for p in pairs if set(p) <= keep]
        assert keep | set(res.removed) == set(range(n))


def test_adding_edges_never_increases_exact_mass():
    rng = np.random.default_rng(4)
    n = 10
    k = Kernel(np.zeros((n, n)))
    s = PointSpace(rng.dirichlet(np.ones(n)))
    pairs, last = [], 1.0
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.25:
                pairs.append((a, b))
                mass = coincidence_support(k, perturb(k, pairs), s, method="exact_cover").retained_mass
                assert mass <= last + 1e-15
                last = mass


def test_exact_cover_size_limit():
    k = Kernel(np.zeros((21, 21)))
    with pytest.raises(SizeLimitError):
        coincidence_support(k, k, PointSpace.uniform(21), method="exact_cover")


@pytest.mark.parametrize("seed", range(10))
def test_planted_stars(seed):
    k1, k2, s, centers = planted_stars(seed)
    res = coincidence_support(k1, k2, s, method="exact_cover")
    assert sorted(res.removed) == centers
    assert res.retained_mass == pytest.approx(1 - s.mass_of(centers), abs=1e-12)
    ret = list(res.retained)
    assert disagreement_graph(Kernel(k1.values[np.ix_(ret, ret)]),
                              Kernel(k2.values[np.ix_(ret, ret)]),
                              PointSpace(s.masses[ret] / s.masses[ret].sum())) == []
    report = transfer_inequality_check(k1, k2, s, res.retained, r=0.1, trials=200, seed=seed)
    assert report.ok and report.verified == 200


def test_transfer_identical_semimetric():
    k, s = base()
    report = transfer_inequality_check(k, k, s, range(8), r=0.01, trials=100)
    assert report.ok and report.verified == 100


def test_transfer_reports_broken_step():
    k = Kernel([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    report = transfer_inequality_check(k, k, PointSpace.uniform(3), [0, 1, 2], r=1.5,
                                       trials=200, seed=1)
    assert not report.ok
    steps = {f["step"] for f in report.failures}
    assert steps == {"triangle_k2"}
    assert any(f["pair"] in ([0, 2], [2, 0]) and f["witness"] == 1 for f in report.failures)


def test_transfer_radius_positive():
    k, s = base()
    with pytest.raises(ValueError):
        transfer_inequality_check(k, k, s, range(8), r=0.0)
