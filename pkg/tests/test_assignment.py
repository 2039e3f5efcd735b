import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advicematch.assignment import (
    AssignmentError,
    check_fractional,
    check_integral,
    check_transport,
    integral_flows,
    solve_fractional,
    solve_integral,
    solve_transport,
)
from advicematch.metric import Euclidean

from conftest import brute_force_assignment, cost_matrices, sorted_matching_1d, transport_lp


def test_two_by_two_swaps_when_cheaper():
    m = solve_integral([[5.0, 1.0], [1.0, 5.0]])
    assert m.pairing.tolist() == [1, 0]
    assert m.total_cost == 2.0


def test_single_point():
    assert solve_integral([[3.5]]).total_cost == 3.5
    assert solve_fractional([[3.5]]).total_cost == 3.5


@pytest.mark.parametrize("bad", [
    [[1.0, 2.0]],
    [[np.inf, 0.0], [0.0, 0.0]],
    [[-1.0, 0.0], [0.0, 0.0]],
    np.zeros((0, 0)),
])
def test_rejects_malformed_costs(bad):
    with pytest.raises(AssignmentError):
        solve_integral(bad)


@settings(max_examples=80, deadline=None)
@given(cost_matrices(max_n=6))
def test_integral_matches_brute_force(c):
    m = solve_integral(c)
    check_integral(m, c)
    assert m.total_cost == pytest.approx(brute_force_assignment(c), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(cost_matrices(max_n=6))
def test_fractional_lp_equals_integral(c):
    f = solve_fractional(c)
    check_fractional(f, c)
    assert f.total_cost == pytest.approx(solve_integral(c).total_cost, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10_000))
def test_line_matching_is_sorted_pairing(n, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=n), rng.normal(size=n)
    c = Euclidean(1).pairwise(x, y)
    assert solve_integral(c).total_cost == pytest.approx(sorted_matching_1d(x, y), abs=1e-9)


def _masses(rng, m, n, integer):
    if integer:
        a = rng.integers(1, 6, size=m).astype(float)
        b = np.zeros(n)
        # spread the same total over n sinks
        for _ in range(int(a.sum())):
            b[rng.integers(n)] += 1
        return a, b
    a, b = rng.random(m) + 0.1, rng.random(n) + 0.1
    return a / a.sum(), b / b.sum()


@pytest.mark.parametrize("method", ["ssp", "lp", "assignment"])
@pytest.mark.parametrize("seed", range(8))
def test_transport_matches_reference_lp(method, seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 7, size=2)
    integer = method == "assignment" or seed % 2 == 0
    a, b = _masses(rng, m, n, integer)
    c = rng.random((m, n)) * 10
    plan = solve_transport(a, b, c, method=method)
    check_transport(plan, a, b, tol=1e-8)
    assert plan.total_cost == pytest.approx(transport_lp(a, b, c), abs=1e-8)
    if integer:
        integral_flows(plan)


def test_auto_dispatch_large_integer_uses_exact_route():
    rng = np.random.default_rng(1)
    n = 250
    x, y = rng.random((n, 2)), rng.random((n * 5, 2))
    c = Euclidean(2).pairwise(x, y)
    plan = solve_transport(np.full(n, 5.0), np.ones(n * 5), c)
    flows = integral_flows(plan)
    assert flows.sum() == n * 5
    assert plan.total_cost == pytest.approx(solve_transport(np.full(n, 5.0), np.ones(n * 5), c, "lp").total_cost)


def test_transport_rejects_unbalanced():
    with pytest.raises(AssignmentError, match="balance|total"):
        solve_transport([1.0, 1.0], [1.0], np.ones((2, 1)))


def test_transport_rejects_negative_mass():
    with pytest.raises(AssignmentError):
        solve_transport([2.0, -1.0], [1.0], np.ones((2, 1)))


def test_matching_records_recompute():
    c = np.array([[0.0, 2.0], [2.0, 1.0]])
    m = solve_integral(c)
    assert m.recompute(c) == m.total_cost
    np.testing.assert_array_equal(m.as_weights(), np.eye(2))
    f = solve_fractional(c)
    assert f.edges(1e-9) == [(0, 0, pytest.approx(1.0)), (1, 1, pytest.approx(1.0))]
