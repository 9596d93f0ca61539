import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from metrepair import (
    InstanceSpec,
    Kernel,
    PointSpace,
    SizeLimitError,
    ball,
    ball_mass_profile,
    epsilon_entropy_exact,
    epsilon_entropy_greedy,
    generate,
    lemma1_crosscheck,
)
from metrepair.generators import circle_distances


def four_points():
    v = np.ones((4, 4))
    np.fill_diagonal(v, 0)
    return Kernel(v), PointSpace.uniform(4)


def random_space(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    v = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    m = rng.dirichlet(np.ones(n))
    return Kernel(v), PointSpace(m)


def test_ball_examples():
    k = Kernel(circle_distances(8))
    assert ball(k, 0, 0.25) == [0, 1, 2, 6, 7]
    assert ball(k, 3, 0.0) == [3]
    assert ball(k, 3, 0.5) == list(range(8))


def test_greedy_four_points():
    k, s = four_points()
    assert epsilon_entropy_greedy(k, s, 0.5).count == 2
    assert epsilon_entropy_greedy(k, s, 0.1).count == 4
    one = epsilon_entropy_greedy(Kernel([[0.0]]), PointSpace.uniform(1), 0.3)
    assert one.count == 1 and one.centers == (0,)


def test_greedy_lowest_index_ties():
    k, s = four_points()
    r = epsilon_entropy_greedy(k, s, 0.5)
    assert r.centers == (0, 1)
    assert r.covered_mass == 0.5
    assert r.method == "greedy"


def test_exact_four_points():
    k, s = four_points()
    assert epsilon_entropy_exact(k, s, 0.5).count == 2
    assert epsilon_entropy_exact(k, s, 0.1).count == 4


def test_exact_size_guard():
    k = Kernel(circle_distances(64))
    with pytest.raises(SizeLimitError):
        epsilon_entropy_exact(k, PointSpace.circle(64), 0.1)


def test_decoupled_deficit():
    k, s = four_points()
    assert epsilon_entropy_exact(k, s, 0.1, deficit=0.5).count == 2
    assert epsilon_entropy_greedy(k, s, 0.1, deficit=0.5).to_dict()["deficit"] == 0.5


@pytest.mark.parametrize("seed", range(25))
def test_exact_matches_bruteforce(seed):
    n = 4 + seed % 7
    k, s = random_space(seed, n)
    for eps in (0.15, 0.3, 0.5):
        exact = epsilon_entropy_exact(k, s, eps)
        greedy = epsilon_entropy_greedy(k, s, eps)
        ref = oracles.min_cover_count(k.values.tolist(), s.masses.tolist(), eps, eps)
        assert exact.count == ref
        assert greedy.count >= exact.count
        assert exact.covered_mass >= 1 - eps - 1e-12
        assert len(exact.centers) == exact.count


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 3.0, 1024.0]))
def test_exact_scale_and_permutation(seed, lam):
    k, s = random_space(seed, 8)
    base = epsilon_entropy_exact(k, s, 0.25).count
    assert epsilon_entropy_exact(Kernel(k.values * lam), s, 0.25 * lam, deficit=0.25).count == base
    p = np.random.default_rng(seed).permutation(8)
    kp = Kernel(k.values[np.ix_(p, p)])
    assert epsilon_entropy_exact(kp, PointSpace(s.masses[p]), 0.25).count == base


def test_exact_monotone_in_epsilon():
    k, s = random_space(11, 12)
    counts = [epsilon_entropy_exact(k, s, e).count for e in (0.05, 0.1, 0.2, 0.3, 0.5, 0.8)]
    assert counts == sorted(counts, reverse=True)


def test_profile_uniform_nothing_flagged():
    k = Kernel(circle_distances(8))
    prof = ball_mass_profile(k, PointSpace.circle(8), [0.0, 0.125, 0.25])
    assert prof.flagged == ()
    assert (np.diff(prof.table, axis=1) >= 0).all()
    assert (prof.table[:, 0] >= 1 / 8).all()
    np.testing.assert_allclose(prof.table[:, 2], 5 / 8)


def test_profile_zero_mass_outlier():
    inst = generate(InstanceSpec("circle", 8, outliers=1, outlier_distance=1.0))
    prof = ball_mass_profile(inst.kernel, inst.space, [0.5])
    assert prof.table[8, 0] == 0.0
    assert prof.null_points == (8,)
    assert prof.flagged == ()
    assert "8,0.5,0.0" in prof.to_csv()


def test_profile_radii_sorted():
    with pytest.raises(ValueError):
        ball_mass_profile(Kernel(np.zeros((2, 2))), PointSpace.uniform(2), [0.5, 0.1])


def test_crosscheck_finite_space_passes():
    inst = generate(InstanceSpec("embedding", 20), 4)
    report = lemma1_crosscheck(inst.kernel, inst.space, [0.5, 0.25, 0.1])
    assert report.passed
    assert all(e.covered_mass >= 1 - e.epsilon for e in report.entropy)


def test_crosscheck_outliers_excluded_consistently():
    inst = generate(InstanceSpec("circle", 16, outliers=3))
    report = lemma1_crosscheck(inst.kernel, inst.space, [0.5, 0.25])
    assert report.passed
    assert not set(report.support.points) & {16, 17, 18}
    assert set(report.profile.null_points) == {16, 17, 18}
    values = list(report.core_mass.values())
    assert max(values) - min(values) <= 1e-9


def test_crosscheck_flags_nonzero_diagonal():
    v = np.full((4, 4), 1.0)
    np.fill_diagonal(v, 0)
    v[2, 2] = 0.9
    report = lemma1_crosscheck(Kernel(v), PointSpace.uniform(4), [0.5])
    assert report.profile.flagged == (2,)
    assert not report.passed
    assert not report.consistent
    assert report.statements["entropy_finite"]
    assert not report.statements["balls_positive"]
