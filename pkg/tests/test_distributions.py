import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advicematch.assignment import solve_integral
from advicematch.distributions import (
    DiscreteDistribution,
    DistributionError,
    FiniteAtoms,
    GaussianMixture,
    QuantizerConfig,
    UniformBox,
    advice_from_json,
    empirical,
    eta,
    largest_remainder,
    quantize,
    sample,
    uniform_over,
    w1_line_exact,
    w1_multisets,
    wasserstein1,
)
from advicematch.metric import Discrete, Euclidean, Explicit, MetricError

from conftest import brute_force_medoids, point_sets, sorted_matching_1d, transport_lp

E1, E2 = Euclidean(1), Euclidean(2)


def _gauss(dim=1, mean=0.0):
    return GaussianMixture(np.full((1, dim), mean), np.ones((1, dim)), np.ones(1))


# --- discrete distributions --------------------------------------------------


def test_duplicate_atoms_merge():
    d = DiscreteDistribution(np.array([[1.0], [2.0], [1.0]]), [0.25, 0.5, 0.25])
    assert len(d) == 2
    np.testing.assert_allclose(d.masses, [0.5, 0.5])


def test_zero_masses_dropped():
    d = DiscreteDistribution(np.array([[1.0], [2.0]]), [1.0, 0.0])
    assert len(d) == 1


@pytest.mark.parametrize("masses", [[0.5, 0.4], [1.5, -0.5], [np.nan, 1.0]])
def test_invalid_masses(masses):
    with pytest.raises(DistributionError):
        DiscreteDistribution(np.array([[0.0], [1.0]]), masses)


def test_empirical_keeps_counts():
    e = empirical(np.array([[0.0], [0.0], [1.0]]))
    assert e.total == 3
    np.testing.assert_array_equal(e.counts, [2, 1])


# --- advice variants ----------------------------------------------------------


@pytest.mark.parametrize("obj", [
    {"finite_atoms": {"atoms": [[0.0], [1.0]], "masses": [0.25, 0.75]}},
    {"gaussian_mixture": {"components": [{"mean": [0.0], "std": [1.0], "weight": 1.0}]}},
    {"uniform_box": {"low": [-1.0], "high": [2.0]}},
])
def test_advice_json_round_trip(obj):
    adv = advice_from_json(obj, E1)
    again = advice_from_json(adv.to_json(E1), E1)
    a, b = sample(adv, 50, 3), sample(again, 50, 3)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("obj, err", [
    ({"gaussian_mixture": {"components": []}}, DistributionError),
    ({"nope": {}}, DistributionError),
    ({"uniform_box": {"low": [0.0], "high": [1.0]}}, MetricError),
])
def test_advice_json_errors(obj, err):
    with pytest.raises(err):
        advice_from_json(obj, Discrete())


def test_gaussian_advice_needs_euclidean():
    with pytest.raises(MetricError):
        advice_from_json({"gaussian_mixture": {"components": [{"mean": [0.0], "std": [1.0], "weight": 1.0}]}},
                         Discrete())


def test_sampling_is_seeded():
    adv = _gauss(2)
    np.testing.assert_array_equal(sample(adv, 10, 7), sample(adv, 10, 7))
    assert not np.array_equal(sample(adv, 10, 7), sample(adv, 10, 8))


def test_uniform_box_samples_inside():
    x = sample(UniformBox([0.0, 1.0], [1.0, 3.0]), 500, 0)
    assert x.shape == (500, 2)
    assert np.all((x >= [0, 1]) & (x <= [1, 3]))


# --- W1 --------------------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(point_sets(1, 7, dim=2), st.integers(0, 1000))
def test_w1_equal_size_multisets_is_assignment_over_n(x, seed):
    y = np.random.default_rng(seed).normal(size=x.shape)
    expect = solve_integral(E2.pairwise(x, y)).total_cost / len(x)
    assert w1_multisets(x, y, E2) == pytest.approx(expect, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(point_sets(1, 12, dim=1), point_sets(1, 12, dim=1))
def test_line_formula_agrees_with_transport(x, y):
    mu, nu = empirical(x), empirical(y)
    ref = transport_lp(mu.masses, nu.masses, E1.pairwise(mu.atoms, nu.atoms))
    assert w1_line_exact(mu, nu) == pytest.approx(ref, abs=1e-7)
    assert wasserstein1(mu, nu, E1, method="ssp") == pytest.approx(ref, abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(point_sets(2, 9, dim=1))
def test_w1_line_sorted_matching(x):
    y = x[::-1] + 1.0
    assert w1_multisets(x, y, E1) == pytest.approx(sorted_matching_1d(x, y) / len(x), abs=1e-9)


def test_w1_discrete_metric_is_total_variation():
    mu = DiscreteDistribution(np.array([0, 1, 2]), [0.5, 0.25, 0.25])
    nu = DiscreteDistribution(np.array([0, 3]), [0.25, 0.75])
    # TV = 1/2 * sum |mu - nu|
    assert wasserstein1(mu, nu, Discrete()) == pytest.approx(0.75)


def test_w1_explicit_metric():
    sp = Explicit([[0, 2, 3], [2, 0, 1], [3, 1, 0]])
    mu = DiscreteDistribution(np.array([0]), [1.0])
    nu = DiscreteDistribution(np.array([1, 2]), [0.5, 0.5])
    assert wasserstein1(mu, nu, sp) == pytest.approx(2.5)


def test_eta_zero_for_perfect_finite_advice(rng):
    r = rng.normal(size=(9, 2))
    assert eta(uniform_over(r), r, E2, 0, 0) == pytest.approx(0.0, abs=1e-12)


def test_eta_resolution_guard():
    with pytest.raises(DistributionError, match="resolution"):
        eta(_gauss(), np.zeros((5, 1)), E1, 3, 0)


def test_eta_shift_grows_with_distance(rng):
    r = rng.normal(size=(64, 1)) + 5.0
    e = eta(_gauss(), r, E1, 4096, 1)
    assert 4.5 < e < 5.5


# --- rounding and quantization ----------------------------------------------


@pytest.mark.parametrize("masses, n, expect", [
    ([0.5, 0.5], 3, [2, 1]),
    ([0.2, 0.3, 0.5], 10, [2, 3, 5]),
    ([1 / 3, 1 / 3, 1 / 3], 4, [2, 1, 1]),
    ([0.05, 0.95], 2, [0, 2]),
])
def test_largest_remainder_examples(masses, n, expect):
    assert largest_remainder(masses, n).tolist() == expect


@settings(max_examples=100)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12), st.integers(1, 40))
def test_largest_remainder_sums_and_stays_within_one(masses, n):
    w = np.array(masses) / np.sum(masses)
    k = largest_remainder(w, n)
    assert k.sum() == n
    assert np.all(np.abs(k - w * n) < 1 + 1e-9)


def test_delta_advice_gives_coincident_slots():
    q = quantize(uniform_over(np.array([[0.7]])), 3, space=E1)
    np.testing.assert_array_equal(q.slots().ravel(), [0.7, 0.7, 0.7])
    assert q.residual_w1 == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10_000))
def test_quantize_small_support_is_exact(n_atoms, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_atoms, 12))
    atoms = rng.normal(size=(n_atoms, 2))
    w = rng.random(n_atoms) + 0.05
    adv = FiniteAtoms(DiscreteDistribution(atoms, w / w.sum()))
    q = quantize(adv, n, space=E2)
    assert q.exact and q.residual_w1 == 0.0
    assert q.n == n
    assert len(q.centers) == n_atoms and np.all(q.multiplicities >= 1)
    assert {tuple(a) for a in q.centers} == {tuple(a) for a in atoms}


@pytest.mark.parametrize("seed", range(6))
def test_quantize_large_support_matches_exhaustive_medoids(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(6, 16)), int(rng.integers(1, 5))
    atoms = rng.normal(size=(m, 2))
    w = rng.random(m) + 0.05
    w /= w.sum()
    q = quantize(FiniteAtoms(DiscreteDistribution(atoms, w)), n, space=E2)
    dmat = E2.pairwise(atoms, atoms)
    assert q.residual_w1 == pytest.approx(brute_force_medoids(dmat, w, n), abs=1e-12)
    assert q.n == n


def test_quantize_swap_search_beyond_exhaustive_limit():
    rng = np.random.default_rng(3)
    atoms, w = rng.normal(size=(14, 1)), np.full(14, 1 / 14)
    cfg = QuantizerConfig(exhaustive_limit=1)
    q = quantize(FiniteAtoms(DiscreteDistribution(atoms, w)), 3, cfg, space=E1)
    assert not q.exact
    best = brute_force_medoids(E1.pairwise(atoms, atoms), w, 3)
    assert best - 1e-12 <= q.residual_w1 <= best * 1.1


def test_quantize_one_center_gaussian_is_near_median():
    q = quantize(_gauss(mean=2.0), 1, QuantizerConfig(proxy_size=8192), seed=1)
    assert q.centers[0, 0] == pytest.approx(2.0, abs=0.05)
    # E|X - median| = sqrt(2/pi) for a standard normal
    assert q.residual_w1 == pytest.approx(np.sqrt(2 / np.pi), abs=0.03)


def test_quantize_residual_decreases_with_n():
    adv = _gauss(2)
    res = [quantize(adv, n, seed=0).residual_w1 for n in (1, 4, 16)]
    assert res[0] > res[1] > res[2]


def test_quantize_is_seeded():
    adv = _gauss(2)
    a, b = quantize(adv, 5, seed=9), quantize(adv, 5, seed=9)
    np.testing.assert_array_equal(a.centers, b.centers)


def test_quantize_rejects_nonpositive_n():
    with pytest.raises(DistributionError):
        quantize(_gauss(), 0)
