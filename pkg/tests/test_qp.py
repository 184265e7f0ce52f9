import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewalk.control import check_constraints, distribute_forces
from slopewalk.qp import QPError, active_set_qp, polygon_vertices

from cases import grid_problem, objective, two_leg_instance
from oracles import qp_enumerate, qp_grid_min


def random_qp(rng, n=3, m=6):
    M = rng.normal(size=(n, n))
    H = M @ M.T + 0.1 * np.eye(n)
    g = rng.normal(size=n) * 3
    G = rng.normal(size=(m, n))
    h = rng.uniform(0.1, 1.0, m)  # x = 0 is strictly feasible
    return H, g, G, h


@given(st.integers(0, 10_000))
def test_active_set_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    H, g, G, h = random_qp(rng)
    x, W = active_set_qp(H, g, G, h, np.zeros(3))
    ref, _ = qp_enumerate(H, g, G, h)
    assert np.all(G @ x <= h + 1e-9)
    assert 0.5 * x @ H @ x + g @ x == pytest.approx(ref, abs=1e-8, rel=1e-8)
    for i in W:
        assert G[i] @ x == pytest.approx(h[i], abs=1e-8)


def test_unconstrained_minimum_inside():
    H = np.eye(2) * 2
    g = np.array([-2.0, -4.0])
    G = np.eye(2)
    h = np.array([5.0, 5.0])
    x, W = active_set_qp(H, g, G, h, np.zeros(2))
    assert np.allclose(x, [1.0, 2.0]) and W == []


def test_bound_active():
    H = np.eye(2) * 2
    g = np.array([-2.0, -4.0])
    G = np.eye(2)
    h = np.array([5.0, 1.0])
    x, W = active_set_qp(H, g, G, h, np.zeros(2))
    assert np.allclose(x, [1.0, 1.0]) and W == [1]


def test_infeasible_start_rejected():
    with pytest.raises(QPError):
        active_set_qp(np.eye(1), np.zeros(1), np.eye(1), np.array([0.0]), np.array([1.0]))


def test_polygon_vertices_square():
    G = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    h = np.ones(4)
    V = polygon_vertices(G, h)
    assert sorted(map(tuple, np.round(V, 12))) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert len(polygon_vertices(G, np.array([-1.0, -1.0, 1.0, 1.0]))) == 0


def test_two_leg_instances_vs_grid():
    for seed in range(20):
        model, feet, jac, b = two_leg_instance(seed)
        A, bb, Gs, hs, boxes = grid_problem(model, feet, jac, b)
        sol = distribute_forces(b, feet, model, jac)
        x = np.concatenate([sol.lambdas[leg] for leg in feet])
        assert objective(A, bb, x) <= qp_grid_min(A, bb, Gs, hs, boxes) * 1.01 + 1e-9
        assert all(v == 0 for v in check_constraints(sol, jac, model).values())
