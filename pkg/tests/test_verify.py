import json
import math

import numpy as np
import pytest

from drsubmax.constraints import BoxConstraint, CardinalityPolytope
from drsubmax.core import Box, DimensionError
from drsubmax.instances import gen_quadratic_instance
from drsubmax.objectives import (
    CutFunction,
    GibbsPolynomial,
    MeanFieldKLObjective,
    ModularFunction,
    QuadraticObjective,
    zoo,
)
from drsubmax.rng import make_rng
from drsubmax.solvers import SolverConfig, non_stationarity, nonconvex_fw, two_phase
from drsubmax.verify import (
    CHECKS,
    MAX_WITNESSES,
    CheckReport,
    brute_force_grid_max,
    brute_force_multilinear,
    check_antitone,
    check_cross_partials,
    check_directional_concavity,
    check_dr,
    check_gradient,
    check_key_claim,
    check_local_global,
    check_local_global_pairs,
    check_monotone,
    check_weak_dr,
    fd_gradient,
    fd_hessian,
    grid_slack,
    key_claim_margin,
    local_global_margin,
    run_checks,
    sample_feasible,
)


def neg_sq_norm(n=3):
    return QuadraticObjective(-2.0 * np.eye(n))


# ---------------------------------------------------------------- finite differences


def test_fd_gradient_examples():
    g = np.array([1.0, -2.0, 0.25])
    np.testing.assert_allclose(fd_gradient(zoo.linear(g, 1.0), [0.5, 0.5, 0.5]), g, atol=1e-10)
    f = zoo.indefinite_dr_quadratic(upper=2.0)  # (1, 1) interior
    np.testing.assert_allclose(fd_gradient(f, [1.0, 1.0]), [-3.0, -3.0], atol=1e-6)


def test_fd_hessian_recovers_quadratic():
    rng = make_rng(0)
    A = rng.normal(size=(4, 4))
    f = QuadraticObjective(A + A.T, rng.normal(size=4))
    np.testing.assert_allclose(fd_hessian(f, rng.uniform(0.2, 0.8, 4)), A + A.T, atol=1e-4)


# ---------------------------------------------------------------- weak DR / DR


def test_weak_dr_examples():
    assert check_weak_dr(zoo.indefinite_dr_quadratic()).passed
    assert check_weak_dr(zoo.two_bump_submodular()).passed
    report = check_weak_dr(zoo.swapped_quadratic())
    assert not report.passed
    w = report.violations[0]
    a, b, i, k = np.array(w["a"]), np.array(w["b"]), w["i"], w["k"]
    assert a[i] == b[i] and np.all(a <= b)
    f = zoo.swapped_quadratic()
    e = np.zeros(2)
    e[i] = k
    # the witness reproduces
    assert (f(a + e) - f(a)) - (f(b + e) - f(b)) == pytest.approx(w["margin"])


def test_dr_examples():
    assert check_dr(zoo.indefinite_dr_quadratic()).passed
    assert check_dr(zoo.small_softmax()).passed
    report = check_dr(zoo.two_bump_submodular())
    assert not report.passed and report.violations


def test_dr_implies_weak_dr_on_generated():
    for seed in range(3):
        f, _ = gen_quadratic_instance(3, monotone=False, seed=seed)
        assert check_dr(f, samples=300).passed and check_weak_dr(f, samples=300).passed


# ---------------------------------------------------------------- antitone


def test_antitone_examples():
    assert check_antitone(zoo.indefinite_dr_quadratic()).passed
    assert check_antitone(neg_sq_norm()).passed
    report = check_antitone(zoo.swapped_quadratic())
    assert not report.passed
    f = zoo.swapped_quadratic()
    diff = f.gradient([0.0, 0.0]) - f.gradient([0.0, 1.0])
    assert diff.min() == -1.0  # explicit witness a=(0,0), b=(0,1)


def test_weak_antitone_matches_weak_dr():
    assert check_antitone(zoo.two_bump_submodular(), weak=True).passed
    assert not check_antitone(zoo.two_bump_submodular()).passed
    assert not check_antitone(zoo.swapped_quadratic(), weak=True).passed


# ---------------------------------------------------------------- cross partials


def test_cross_partials_examples():
    assert check_cross_partials(zoo.small_softmax(), mode="all").passed
    assert check_cross_partials(zoo.two_bump_submodular()).passed
    assert not check_cross_partials(zoo.two_bump_submodular(), mode="all").passed
    assert not check_cross_partials(zoo.swapped_quadratic()).passed
    rng = make_rng(2)
    edges = [(i, j, float(rng.uniform(0.1, 1))) for i in range(4) for j in range(i + 1, 4)]
    kl = MeanFieldKLObjective(GibbsPolynomial.undirected_cut(4, edges))
    assert check_cross_partials(kl, mode="all").passed
    with pytest.raises(ValueError):
        check_cross_partials(neg_sq_norm(), mode="diag")


def test_cross_partials_one_dimensional_is_vacuous():
    report = check_cross_partials(QuadraticObjective([[5.0]]))
    assert report.passed and report.worst_margin == math.inf


# ---------------------------------------------------------------- directional concavity


def test_directional_concavity_examples():
    f = zoo.indefinite_dr_quadratic()
    assert check_directional_concavity(f).passed
    report = check_directional_concavity(zoo.linear([1.0, -2.0], 1.0))
    assert report.passed and abs(report.worst_margin) < 1e-12
    # along (1, -1) the intro instance has curvature +1, so concavity fails there
    x, v = np.array([0.5, 0.5]), np.array([0.4, -0.4])
    assert f(x + 0.5 * v) < 0.5 * f(x + v) + 0.5 * f(x)


def test_directional_concavity_flags_convex():
    assert not check_directional_concavity(QuadraticObjective(np.eye(2))).passed


# ---------------------------------------------------------------- monotone / gradient


def test_monotone_and_gradient_checks():
    f, _ = gen_quadratic_instance(3, monotone=True, seed=0)
    assert check_monotone(f).passed
    assert not check_monotone(neg_sq_norm()).passed
    assert check_gradient(zoo.small_softmax()).passed


def test_gradient_check_catches_wrong_gradient():
    from drsubmax.core import FunctionObjective

    bad = FunctionObjective(lambda x: float(x @ x), lambda x: x, Box.unit(2))
    report = check_gradient(bad, samples=10)
    assert not report.passed and report.n_violations == 10


# ---------------------------------------------------------------- reports


def test_report_bookkeeping():
    r = CheckReport("demo", 100, 1e-7)
    for k in range(50):
        r.record(-1.0 if k % 2 else 0.5, k=k)
    assert r.n_violations == 25 and len(r.violations) == MAX_WITNESSES
    assert r.worst_margin == -1.0 and not r.passed
    r.record(-1e-8)  # inside tolerance
    assert r.n_violations == 25
    d = json.loads(r.to_json())
    assert d["passed"] is False and d["violations"][0]["k"] == 1
    clean = CheckReport("ok", 1, 1e-7)
    clean.record(0.0)
    assert clean.passed and clean.violations == []


def test_checks_are_deterministic():
    a = check_weak_dr(zoo.swapped_quadratic(), seed=4).to_dict()
    b = check_weak_dr(zoo.swapped_quadratic(), seed=4).to_dict()
    assert a == b
    c = check_weak_dr(zoo.swapped_quadratic(), seed=5).to_dict()
    assert a != c


def test_run_checks_registry():
    reports = run_checks(zoo.indefinite_dr_quadratic(), ["dr", "weak_antitone"], samples=50)
    assert [r.name for r in reports] == ["dr", "weak_antitone"]
    assert {"weak_dr", "dr", "antitone", "cross_partials", "directional_concavity"} <= set(CHECKS)
    with pytest.raises(KeyError):
        run_checks(zoo.indefinite_dr_quadratic(), ["convexity"])


# ---------------------------------------------------------------- oracles


def test_brute_force_multilinear_examples():
    F = CutFunction(3, [(0, 1, 1.0), (1, 2, 2.0)])
    for mask in ([1, 0, 1], [0, 1, 0], [1, 1, 1]):
        assert brute_force_multilinear(F, mask) == F(np.array(mask, dtype=bool))
    w = np.array([0.5, -1.0, 2.0])
    x = np.array([0.1, 0.6, 0.3])
    assert brute_force_multilinear(ModularFunction(w), x) == pytest.approx(w @ x)
    cut2 = CutFunction(2, [(0, 1, 1.0)])
    values = [cut2(np.array(m, dtype=bool)) for m in ([0, 0], [0, 1], [1, 0], [1, 1])]
    assert brute_force_multilinear(cut2, [0.5, 0.5]) == pytest.approx(np.mean(values))
    with pytest.raises(DimensionError):
        brute_force_multilinear(ModularFunction(np.ones(21)), np.zeros(21))


def test_brute_force_grid_examples():
    u = np.array([1.0, 2.0])
    x, v = brute_force_grid_max(zoo.linear([1.0, 1.0], u), BoxConstraint(u), 0.1)
    np.testing.assert_allclose(x, u)
    assert v == pytest.approx(3.0)
    const = QuadraticObjective(np.zeros((2, 2)), None, 2.5)
    assert brute_force_grid_max(const, BoxConstraint([1.0, 1.0]), 0.25)[1] == 2.5
    with pytest.raises(DimensionError):
        brute_force_grid_max(neg_sq_norm(5), BoxConstraint(np.ones(5)), 0.5)


def test_grid_oracle_within_slack_of_true_max():
    f = zoo.indefinite_dr_quadratic([0.3, 1.2])
    P = BoxConstraint([1.0, 1.0])
    _, coarse = brute_force_grid_max(f, P, 0.01)
    _, fine = brute_force_grid_max(f, P, 0.0005)
    assert coarse <= fine + 1e-12
    assert fine - coarse <= grid_slack(f, 0.01)
    # gradient norms of the intro instance peak at a box vertex
    G = max(np.linalg.norm(f.gradient(np.array(v, float)))
            for v in ([0, 0], [0, 1], [1, 0], [1, 1]))
    assert grid_slack(f, 0.01) == pytest.approx(G * math.sqrt(2) * 0.01)


def test_grid_respects_constraint():
    P = CardinalityPolytope(1.0, 1.0, n=2)
    x, v = brute_force_grid_max(zoo.linear([1.0, 2.0], 1.0), P, 0.05)
    np.testing.assert_allclose(x, [0.0, 1.0])
    assert P.contains(x)


def test_sample_feasible_lands_inside():
    rng = make_rng(0)
    _, P = gen_quadratic_instance(4, monotone=True, seed=0, constraint="polytope")
    cap = P.upper / 2
    for _ in range(100):
        assert P.contains(sample_feasible(P, rng), 1e-12)
        assert np.all(sample_feasible(P, rng, cap) <= cap)


# ---------------------------------------------------------------- local-global


def test_stationary_point_is_half_approximation():
    f, P = gen_quadratic_instance(2, monotone=True, seed=1)
    traj = nonconvex_fw(f, P, SolverConfig(iterations=2000, eps=1e-9))
    _, opt = brute_force_grid_max(f, P, 0.01)
    report = check_local_global(f, P, traj.best_point, opt)
    assert report.passed
    assert f(traj.best_point) >= opt / 2 - 1e-6


def test_local_global_at_optimum():
    f = zoo.indefinite_dr_quadratic([1.0, 1.5])
    P = BoxConstraint([1.0, 1.0])
    x_star, opt = brute_force_grid_max(f, P, 0.01)
    report = check_local_global(f, P, x_star, opt, x_star=x_star)
    assert report.passed
    assert report.worst_margin == pytest.approx(
        opt / 2 + non_stationarity(f, P, x_star) / 2, abs=1e-12)


def test_two_phase_outputs_pass_quarter_relation():
    for seed in range(5):
        f, P = gen_quadratic_instance(3, monotone=False, seed=seed)
        traj = two_phase(f, P, SolverConfig(iterations=20))
        _, opt = brute_force_grid_max(f, P, 0.02)
        assert check_local_global(f, P, traj.meta["x"], opt, z=traj.meta["z"]).passed


def test_local_global_rejects_z_outside_q():
    f = zoo.indefinite_dr_quadratic()
    with pytest.raises(ValueError):
        check_local_global(f, BoxConstraint([1.0, 1.0]), [0.8, 0.0], 0.0, z=[0.5, 0.0])


def test_pair_relation_is_exact_for_quadratics():
    # margin = -½aᵀHa - ½bᵀHb with a = x∨y - x, b = x∧y - x
    rng = make_rng(3)
    f, _ = gen_quadratic_instance(3, monotone=False, seed=3)
    for _ in range(20):
        x, y = rng.uniform(0, 1, (2, 3))
        a, b = np.maximum(x, y) - x, np.minimum(x, y) - x
        expected = -0.5 * a @ f.H @ a - 0.5 * b @ f.H @ b
        assert local_global_margin(f, x, y) == pytest.approx(expected, abs=1e-12)


def test_pair_relation_strong_dr_mode():
    f = QuadraticObjective([[-1.0, -0.2], [-0.2, -2.0]], [0.5, 0.5])
    mu = f.flags.strong_dr
    assert mu == 1.0
    assert check_local_global_pairs(f, mu=mu).passed
    assert not check_local_global_pairs(f, mu=4.0).passed
    assert not check_local_global_pairs(zoo.swapped_quadratic()).passed


def test_key_claim_examples():
    f = zoo.indefinite_dr_quadratic([1.0, 1.5], 3.0)
    P = BoxConstraint([1.0, 1.0])
    x_star, _ = brute_force_grid_max(f, P, 0.01)
    assert check_key_claim(f, P, x_star).passed
    # x = z = 0 gives z* = x*, leaving f(x*) + 2 f(0)
    expected = f(x_star) + 2 * f(np.zeros(2))
    assert key_claim_margin(f, np.zeros(2), np.zeros(2), x_star) == pytest.approx(expected)


def test_key_claim_needs_nonnegativity():
    # log det goes negative on this kernel (f(1, 1) = log 0.5625), voiding the claim
    f = zoo.small_softmax()
    P = CardinalityPolytope(1.0, 1.0, n=2)
    x_star, _ = brute_force_grid_max(f, P, 0.01)
    assert f([1.0, 1.0]) < 0
    assert not check_key_claim(f, P, x_star, seed=1).passed
