import itertools

import numpy as np
import pytest
from scipy import optimize

from supertkit.errors import ValidationError
from supertkit.transport import solve_transport


def assignment_oracle(costs):
    """Exhaustive minimum over permutations for uniform n x n marginals."""
    n = costs.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(costs[i, perm[i]] for i in range(n)) / n)
    return best


def linprog_oracle(costs, supply, demand):
    m, n = costs.shape
    a_eq = np.zeros((m + n, m * n))
    for i in range(m):
        a_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    result = optimize.linprog(
        costs.ravel(), A_eq=a_eq, b_eq=np.concatenate([supply, demand]),
        bounds=(0, None), method="highs",
    )
    assert result.status == 0
    return result.fun


def check_plan(costs, supply, demand, flows, total, u, v, tol=1e-9):
    assert np.all(flows >= -tol)
    assert np.allclose(flows.sum(axis=1), supply, atol=1e-7)
    assert np.allclose(flows.sum(axis=0), demand, atol=1e-7)
    assert total == pytest.approx(float((flows * costs).sum()), abs=1e-7)
    # dual feasibility and complementary slackness certify optimality
    slack = costs - u[:, None] - v[None, :]
    assert float(slack.min()) >= -tol
    assert float(np.abs(slack[flows > tol]).max(initial=0.0)) <= 1e-7


class TestSolveTransport:
    def test_identity_costs_zero(self):
        costs = 1.0 - np.eye(3)
        w = np.full(3, 1 / 3)
        flows, total, u, v = solve_transport(costs, w, w)
        assert total == pytest.approx(0.0, abs=1e-12)
        check_plan(costs, w, w, flows, total, u, v)

    def test_diagonal_matching(self):
        costs = np.array([[0.0, 1.0], [1.0, 0.0]])
        w = np.array([0.5, 0.5])
        _, total, _, _ = solve_transport(costs, w, w)
        assert total == pytest.approx(0.0, abs=1e-12)

    def test_antidiagonal_matching(self):
        costs = np.array([[1.0, 0.0], [0.0, 1.0]])
        w = np.array([0.5, 0.5])
        _, total, _, _ = solve_transport(costs, w, w)
        assert total == pytest.approx(0.0, abs=1e-12)

    def test_one_by_one(self):
        flows, total, u, v = solve_transport(np.array([[0.37]]), np.ones(1), np.ones(1))
        assert total == pytest.approx(0.37)
        assert flows[0, 0] == pytest.approx(1.0)

    def test_rectangular_against_linprog(self, rng):
        for _ in range(60):
            m = int(rng.integers(1, 9))
            n = int(rng.integers(1, 9))
            costs = rng.random((m, n)) * 2.0
            supply = rng.random(m) + 0.05
            supply /= supply.sum()
            demand = rng.random(n) + 0.05
            demand /= demand.sum()
            flows, total, u, v = solve_transport(costs, supply, demand)
            check_plan(costs, supply, demand, flows, total, u, v)
            assert total == pytest.approx(linprog_oracle(costs, supply, demand), abs=1e-9)

    def test_uniform_square_against_permutations(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 7))
            costs = rng.random((n, n)) * 2.0
            w = np.full(n, 1.0 / n)
            _, total, _, _ = solve_transport(costs, w, w)
            assert total == pytest.approx(assignment_oracle(costs), abs=1e-9)

    def test_degenerate_supplies(self):
        # equal supply/demand blocks force degenerate pivots
        costs = np.array([[0.3, 0.7, 0.1], [0.9, 0.2, 0.8], [0.5, 0.5, 0.5]])
        w = np.full(3, 1 / 3)
        flows, total, u, v = solve_transport(costs, w, w)
        check_plan(costs, w, w, flows, total, u, v)
        assert total == pytest.approx(assignment_oracle(costs), abs=1e-12)

    def test_larger_instance_against_linprog(self, rng):
        costs = rng.random((40, 55)) * 2.0
        supply = rng.random(40) + 0.01
        supply /= supply.sum()
        demand = rng.random(55) + 0.01
        demand /= demand.sum()
        flows, total, u, v = solve_transport(costs, supply, demand)
        check_plan(costs, supply, demand, flows, total, u, v)
        assert total == pytest.approx(linprog_oracle(costs, supply, demand), abs=1e-8)

    def test_unbalanced_rejected(self):
        with pytest.raises(ValidationError):
            solve_transport(np.ones((2, 2)), np.array([0.5, 0.5]), np.array([0.3, 0.3]))

    def test_negative_mass_rejected(self):
        with pytest.raises(ValidationError):
            solve_transport(np.ones((2, 2)), np.array([-0.1, 1.1]), np.array([0.5, 0.5]))
