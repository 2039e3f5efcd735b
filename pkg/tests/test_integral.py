import importlib.resources as ir

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advicematch.adversaries import exponential_instance
from advicematch.assignment import check_integral, solve_integral
from advicematch.baselines import CapacityError
from advicematch.distributions import GaussianMixture, UniformBox, uniform_over
from advicematch.instance import load_instance
from advicematch.integral import PROXY_BUDGET, AdviceIntegral, default_resolution, prepare, run
from advicematch.metric import Discrete, Euclidean, Explicit

E1, E2 = Euclidean(1), Euclidean(2)


def _gauss(dim=1, mean=0.0):
    return GaussianMixture(np.full((1, dim), mean), np.ones((1, dim)), np.ones(1))


def test_advice_on_servers_gives_identity_pairing(rng):
    S = rng.normal(size=(6, 2))
    st_ = prepare(S, uniform_over(S), E2)
    assert st_.offline_cost == pytest.approx(0.0)
    np.testing.assert_array_equal(S[st_.partner], st_.slots)


def test_delta_advice_pairs_coincident_slots():
    S = np.array([[-1.0], [0.5], [3.0]])
    st_ = prepare(S, uniform_over(np.array([[0.0]])), E1)
    assert st_.offline_cost == pytest.approx(1.0 + 0.5 + 3.0)


def test_single_server_always_returned():
    st_ = prepare([[4.0]], _gauss(), E1)
    assert st_.serve([-100.0]) == 0
    with pytest.raises(CapacityError):
        st_.serve([0.0])


def test_request_on_a_slot_routes_through_it(rng):
    S = rng.normal(size=(5, 1))
    D = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0]])
    st_ = prepare(S, uniform_over(D), E1)
    slot = int(np.flatnonzero(st_.slots[:, 0] == 1.0)[0])
    assert st_.serve([1.0]) == st_.partner[slot]
    assert st_.online_cost == 0.0


def test_coincident_slot_tie_break_prefers_nearest_partner():
    # two slots at 0 paired with servers at -5 and +1; a request at 0.9 should take the +1 one
    S = np.array([[-5.0], [1.0]])
    st_ = prepare(S, uniform_over(np.array([[0.0]])), E1)
    assert st_.serve([0.9]) == 1
    assert st_.serve([0.9]) == 0


def test_line_fixture_request_goes_to_partner_of_nearest_slot():
    path = ir.files("advicematch") / "fixtures" / "line_five_servers.json"
    inst, adv = load_instance(path)
    st_ = AdviceIntegral(inst.servers, adv, inst.space)
    assert st_.slots.shape == (5, 1)
    nearest = int(np.argmin(np.abs(st_.slots[:, 0] + 1.0)))
    assert st_.serve([-1.0]) == st_.partner[nearest]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10_000), st.sampled_from(["greedy", "permutation"]))
def test_output_is_a_permutation_and_bounded(n, seed, baseline):
    rng = np.random.default_rng(seed)
    S, R = rng.normal(size=(n, 2)), rng.normal(0.3, 1.2, size=(n, 2))
    m, rep = run(S, _gauss(2), R, E2, baseline, seed)
    check_integral(m, E2.pairwise(R, S))
    assert rep.actual_cost <= rep.decomposition_bound + 1e-9
    assert rep.actual_cost <= rep.eta_bound(rep.beta_emp + 1) + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20), st.integers(0, 10_000))
def test_perfect_advice_is_optimal(n, seed):
    rng = np.random.default_rng(seed)
    S, R = rng.normal(size=(n, 1)), rng.normal(size=(n, 1))
    _, rep = run(S, uniform_over(R), R, E1, "greedy", seed)
    assert rep.actual_cost == pytest.approx(rep.opt_cost, abs=1e-9)


def test_far_advice_still_decomposes(rng):
    S, R = rng.normal(size=(8, 1)), rng.normal(size=(8, 1))
    _, rep = run(S, _gauss(mean=50.0), R, E1)
    assert rep.eta_hat > 45
    assert rep.actual_cost <= rep.decomposition_bound + 1e-9


def test_report_terms(rng):
    S, R = rng.normal(size=(6, 2)), rng.normal(size=(6, 2))
    m, rep = run(S, UniformBox([-1, -1], [1, 1]), R, E2, seed=3)
    st_ = AdviceIntegral(S, UniformBox([-1, -1], [1, 1]), E2, seed=3)
    assert rep.offline_cost == pytest.approx(st_.offline_cost)
    assert rep.opt_cost == pytest.approx(solve_integral(E2.pairwise(R, S)).total_cost)
    assert rep.residual_w1 > 0 and rep.proxy_size > 0
    np.testing.assert_array_equal(rep.matching, m.pairing)


def test_gap_instance_trusting_pipeline():
    """Advice R1 on reality R0: the pipeline follows the advised optimum."""
    inst = exponential_instance(4, "R0")
    r1 = exponential_instance(4, "R1").requests
    _, rep = run(inst.servers, uniform_over(r1), inst.requests, E1)
    assert rep.opt_cost == pytest.approx(0.5)
    # the R1 optimum sends 1.5 -> 2, 2 -> 4, 4 -> 8 and 1 -> 1; on R0 the last
    # request at 8 is left with the server at 1
    assert rep.actual_cost == pytest.approx(0.5 + 2 + 4 + 7)


@pytest.mark.parametrize("space, S, R, advice", [
    (Discrete(), np.arange(4), np.array([0, 5, 1, 2]), np.array([0, 1])),
    (Explicit([[0, 1, 2], [1, 0, 1], [2, 1, 0]]), np.array([0, 1, 2]), np.array([2, 2, 0]), np.array([1])),
])
def test_label_metrics(space, S, R, advice):
    m, rep = run(S, uniform_over(advice), R, space)
    check_integral(m, space.pairwise(R, S))
    assert rep.actual_cost <= rep.decomposition_bound + 1e-9


def test_size_mismatch():
    with pytest.raises(ValueError, match="requests"):
        run([[0.0]], _gauss(), [[0.0], [1.0]], E1)


@pytest.mark.parametrize("n, expect", [(1, 1), (10, 100), (30, 30 * 30), (64, 2048), (100, 2000), (5000, 5000)])
def test_default_resolution(n, expect):
    res = default_resolution(n)
    assert res == expect
    assert res % n == 0 and (res <= PROXY_BUDGET or res == n)
