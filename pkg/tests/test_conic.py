import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symcert import conic
from symcert.conic import (
    ConicProblem,
    complex_from_embedding,
    compile_problem,
    dual_slack,
    real_embedding,
    solve,
    solve_lp,
)

from conftest import random_density, random_hermitian


def check_certificate(problem, sol, tol=1e-6):
    """Weak duality and complementary slackness from the returned pair."""
    assert sol.dual_value <= sol.primal_value + 1e-9
    Z = dual_slack(problem, sol.dual)
    X = sol.primal
    assert np.linalg.eigvalsh(X)[0] > -1e-9
    assert np.linalg.eigvalsh(Z)[0] > -1e-6
    assert abs(np.vdot(X, Z).real) < tol


def test_smallest_eigenvalue_trivial():
    p = ConicProblem(np.diag([1.0, 2.0]), [(np.eye(2), 1.0)])
    sol = solve(p)
    assert sol.status == conic.OPTIMAL
    assert sol.dual_value == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(sol.primal, np.diag([1, 0]), atol=1e-6)


def test_smallest_eigenvalue_random(rng):
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        C = random_hermitian(rng, n)
        sol = solve(ConicProblem(C, [(np.eye(n), 1.0)]))
        assert sol.status == conic.OPTIMAL
        worst = max(worst, abs(sol.dual_value - np.linalg.eigvalsh(C)[0]))
    assert worst < 1e-7


def test_infeasible_equality():
    # <diag(1,0), X> ranges over [0, 1] on unit-trace states
    p = ConicProblem(np.eye(2), [(np.eye(2), 1.0), (np.diag([1.0, 0.0]), 1.5)])
    sol = solve(p)
    assert sol.status == conic.PRIMAL_INFEASIBLE
    y = sol.dual
    # Farkas ray: sum y_j A_j <= 0 and sum y_j b_j > 0
    ray = -dual_slack(ConicProblem(np.zeros((2, 2)), p.equalities), y)
    assert np.linalg.eigvalsh(ray)[-1] < 1e-6
    assert y @ np.array([1.0, 1.5]) > 0


def test_infeasible_interval():
    p = ConicProblem(np.eye(2), [(np.eye(2), 1.0)], [(np.diag([1.0, -1.0]), 1.2, 1.4)])
    assert solve(p).status == conic.PRIMAL_INFEASIBLE


def test_inconsistent_duplicate_rows():
    A = np.diag([1.0, 0.0])
    p = ConicProblem(np.eye(2), [(np.eye(2), 1.0), (A, 0.3), (2 * A, 0.7)])
    sol = solve(p)
    assert sol.status == conic.PRIMAL_INFEASIBLE


def test_redundant_rows_are_harmless():
    A = np.diag([1.0, 0.0, 0.0])
    p = ConicProblem(np.diag([0.0, 1.0, 3.0]), [(np.eye(3), 1.0), (A, 0.25), (3 * A, 0.75)])
    sol = solve(p)
    assert sol.status == conic.OPTIMAL
    assert sol.dual_value == pytest.approx(0.75, abs=1e-7)


def test_interval_constraint_is_active_on_one_side():
    C = np.diag([0.0, 1.0])
    B = np.diag([1.0, 0.0])
    sol = solve(ConicProblem(C, [(np.eye(2), 1.0)], [(B, 0.2, 0.6)]))
    assert sol.status == conic.OPTIMAL
    assert sol.dual_value == pytest.approx(0.4, abs=1e-7)
    assert np.real(np.trace(B @ sol.primal)) == pytest.approx(0.6, abs=1e-6)


def test_complex_data_handled_exactly(rng):
    C = random_hermitian(rng, 4)
    B = random_hermitian(rng, 4)
    rho = random_density(rng, 4)
    b = np.trace(B @ rho).real
    p = ConicProblem(C, [(np.eye(4), 1.0), (B, b)])
    sol = solve(p)
    assert sol.status == conic.OPTIMAL
    assert np.trace(B @ sol.primal).real == pytest.approx(b, abs=1e-7)
    assert sol.dual_value <= np.trace(C @ rho).real + 1e-9
    check_certificate(p, sol)


def test_embedding_round_trip(rng):
    H = random_hermitian(rng, 5)
    E = real_embedding(H)
    assert np.allclose(E, E.T)
    assert np.allclose(complex_from_embedding(E), H)
    w = np.linalg.eigvalsh(E)
    assert np.allclose(w, np.repeat(np.linalg.eigvalsh(H), 2))


def test_compile_doubles_rhs_and_splits_intervals():
    p = ConicProblem(np.eye(2), [(np.eye(2), 1.0)], [(np.diag([1.0, 0.0]), 0.1, 0.2)])
    sf = compile_problem(p)
    assert sf.m == 3 and sf.p == 2 and sf.n == 4
    assert np.allclose(sf.b, [2.0, 0.2, 0.4])
    assert sf.scale == 0.5


def test_problem_validation():
    with pytest.raises(ValueError):
        ConicProblem(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        ConicProblem(np.eye(2), [(np.eye(3), 1.0)])
    with pytest.raises(ValueError):
        ConicProblem(np.eye(2), [], [(np.eye(2), 1.0, 0.0)])


def random_certification_instance(rng, n=None):
    n = n or int(rng.integers(2, 7))
    target = random_density(rng, n, 1)
    rho = random_density(rng, n)
    eqs = [(np.eye(n), 1.0)]
    for _ in range(int(rng.integers(0, n))):
        A = random_hermitian(rng, n)
        eqs.append((A, float(np.trace(A @ rho).real)))
    ivs = []
    for _ in range(int(rng.integers(0, 3))):
        B = random_hermitian(rng, n)
        v = float(np.trace(B @ rho).real)
        d = float(rng.uniform(0, 0.3))
        ivs.append((B, v - d, v + d))
    return ConicProblem(target, eqs, ivs), rho


def test_weak_duality_and_slackness_random(rng):
    for _ in range(40):
        p, rho = random_certification_instance(rng)
        sol = solve(p)
        assert sol.status == conic.OPTIMAL
        assert sol.gap <= 1e-7
        check_certificate(p, sol)
        assert sol.dual_value <= p.value(rho) + 1e-9


def test_scaling_covariance(rng):
    p, _ = random_certification_instance(rng, 5)
    base = solve(p)
    for c in (0.1, 3.0, 25.0):
        scaled = solve(ConicProblem(c * p.objective, p.equalities, p.intervals))
        assert scaled.primal_value == pytest.approx(c * base.primal_value, abs=1e-7 * max(1, c))
        assert scaled.dual_value == pytest.approx(c * base.dual_value, abs=1e-7 * max(1, c))


def test_adding_equality_never_lowers_bound(rng):
    for _ in range(20):
        p, rho = random_certification_instance(rng)
        before = solve(p).dual_value
        A = random_hermitian(rng, p.dimension)
        tighter = ConicProblem(p.objective, p.equalities + [(A, float(np.trace(A @ rho).real))], p.intervals)
        assert solve(tighter).dual_value >= before - 1e-7


def test_max_iterations_is_reported():
    p = ConicProblem(np.diag([1.0, 2.0, 3.0]), [(np.eye(3), 1.0)])
    sol = solve(p, max_iterations=1)
    assert sol.status == conic.MAX_ITERATIONS
    assert sol.iterations == 1


def test_lp_trivial():
    sol = solve_lp([1.0, 0.0], ([[1.0, 1.0]], [1.0]))
    assert sol.status == conic.OPTIMAL
    assert sol.dual_value == pytest.approx(0.0, abs=1e-8)
    assert sol.lp_primal == pytest.approx([0.0, 1.0], abs=1e-6)


def test_lp_interval_bounds():
    sol = solve_lp([-1.0, 0.0], ([[1.0, 1.0]], [1.0]), [([1.0, 0.0], 0.0, 0.3)])
    assert sol.dual_value == pytest.approx(-0.3, abs=1e-8)


def test_lp_unbounded():
    sol = solve_lp([-1.0, 0.0], ([[1.0, -1.0]], [0.0]))
    assert sol.status == conic.DUAL_INFEASIBLE


def test_lp_infeasible():
    sol = solve_lp([1.0, 1.0], ([[1.0, 1.0]], [-1.0]))
    assert sol.status == conic.PRIMAL_INFEASIBLE


def vertex_optimum(c, A, b):
    """Best basic feasible solution by brute force."""
    m, n = A.shape
    best = np.inf
    for cols in itertools.combinations(range(n), m):
        B = A[:, cols]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xb = np.linalg.solve(B, b)
        if np.all(xb >= -1e-12):
            best = min(best, float(c[list(cols)] @ xb))
    return best


@given(st.integers(2, 4), st.integers(1, 2), st.integers(0, 2**31))
def test_lp_matches_vertex_enumeration(n, m, seed):
    m = min(m, n - 1)
    rng = np.random.default_rng(seed)
    A = np.vstack([np.ones(n), rng.standard_normal((m - 1, n))]) if m > 1 else np.ones((1, n))
    x0 = rng.dirichlet(np.ones(n))
    b = A @ x0
    c = rng.standard_normal(n)
    sol = solve_lp(c, (A, b))
    assert sol.status == conic.OPTIMAL
    assert sol.dual_value == pytest.approx(vertex_optimum(c, A, b), abs=1e-7)
