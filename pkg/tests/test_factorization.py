import itertools
import json
import logging

import numpy as np
import pytest

from gauge_lab import (
    DivergenceError,
    FactorizationProblem,
    FactorizationSolution,
    GaugeMatrix,
    SolverConfig,
    SyntheticSpec,
    generate_interactions,
    gauge_orbit_probe,
    gradient_check,
    objective,
    solve,
)
from gauge_lab.factorization import MODES, _Parameterization, objective_gradient
from gauge_lab.fileio import read_embeddings, write_embeddings


def rank_one(seed=0, m=4, n=5):
    return generate_interactions(SyntheticSpec(m, n, 1, 0.0, seed))


class TestProblemValidation:
    def test_rank_too_large(self):
        with pytest.raises(ValueError):
            FactorizationProblem(np.ones((3, 2)), k=3)

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            FactorizationProblem(np.ones((3, 2)), k=1, lam=-1.0)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            FactorizationProblem(np.array([[1.0, np.nan]]), k=1)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            SolverConfig(mode="projected")

    @pytest.mark.parametrize("field", ["step_size", "tol_grad", "tol_obj"])
    def test_non_positive_tolerance(self, field):
        with pytest.raises(ValueError):
            SolverConfig(**{field: 0.0})


class TestObjective:
    def test_zero_factors(self):
        A = np.arange(6.0).reshape(2, 3)
        p = FactorizationProblem(A, k=1, lam=0.7)
        assert objective(p, np.zeros((2, 1)), np.zeros((3, 1))) == np.sum(A**2)

    def test_perfect_fit(self):
        rng = np.random.default_rng(0)
        U, V = rng.standard_normal((4, 2)), rng.standard_normal((5, 2))
        assert objective(FactorizationProblem(U @ V.T, k=2), U, V) == pytest.approx(0.0, abs=1e-24)

    def test_one_by_one(self):
        assert objective(FactorizationProblem([[2.0]], k=1, lam=1.0), [[1.0]], [[1.0]]) == 2.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            objective(FactorizationProblem(np.ones((2, 3)), k=1), np.ones((3, 1)), np.ones((3, 1)))


class TestGradient:
    def test_zero_factors(self):
        p = FactorizationProblem(np.arange(6.0).reshape(2, 3), k=2, lam=0.5)
        assert gradient_check(p, np.zeros((2, 2)), np.zeros((3, 2))) < 1e-8

    def test_random_small(self):
        rng = np.random.default_rng(1)
        p = FactorizationProblem(rng.standard_normal((3, 2)), k=2)
        assert gradient_check(p, rng.standard_normal((3, 2)), rng.standard_normal((2, 2))) < 1e-5

    @pytest.mark.parametrize("lam", [0.0, 1.0])
    def test_regularizer_isolated(self, lam):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((4, 3))
        Ah, Bh = rng.standard_normal((4, 2)), rng.standard_normal((3, 2))
        assert gradient_check(FactorizationProblem(A, k=2, lam=lam), Ah, Bh) < 1e-5

    def test_epsilon_range(self):
        p = FactorizationProblem(np.ones((2, 2)), k=1)
        with pytest.raises(ValueError):
            gradient_check(p, np.ones((2, 1)), np.ones((2, 1)), epsilon=1e-2)

    @pytest.mark.parametrize("mode", ["sphere_retraction", "sphere_loss_normalized"])
    def test_sphere_search_directions_are_tangent_derivatives(self, mode):
        # directional derivative of the constrained loss along the tangent
        # search direction must match the squared direction norm
        rng = np.random.default_rng(3)
        p = FactorizationProblem(rng.standard_normal((5, 6)), k=3, lam=0.3)
        param = _Parameterization(p, SolverConfig(mode=mode), rng)
        X = rng.standard_normal((5, 3))
        Y = rng.standard_normal((6, 3)) * rng.uniform(0.5, 2.0, (6, 1))
        if mode == "sphere_retraction":
            Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        gX, gY = param.gradient(X, Y)
        h = 1e-6

        def along(t):
            Xt, Yt = param.retract(X - t * gX, Y - t * gY, 0)
            return param.value(Xt, Yt)

        numeric = (along(h) - along(-h)) / (2 * h)
        analytic = -(np.sum(gX * gX) + np.sum(gY * gY))
        assert numeric == pytest.approx(analytic, rel=1e-6)

    def test_loss_normalized_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        p = FactorizationProblem(rng.standard_normal((3, 4)), k=2, lam=0.2)
        param = _Parameterization(p, SolverConfig(mode="sphere_loss_normalized"), rng)
        X = rng.standard_normal((3, 2))
        Y = rng.standard_normal((4, 2))
        _, gY = param.gradient(X, Y)
        numeric = np.empty_like(Y)
        h = 1e-6
        for idx in itertools.product(range(4), range(2)):
            Yp, Ym = Y.copy(), Y.copy()
            Yp[idx] += h
            Ym[idx] -= h
            numeric[idx] = (param.value(X, Yp) - param.value(X, Ym)) / (2 * h)
        np.testing.assert_allclose(gY, numeric, rtol=1e-5, atol=1e-7)

    def test_twenty_seeded_instances(self):
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            m, n, k = rng.integers(2, 7), rng.integers(2, 7), 0
            k = int(rng.integers(1, min(m, n) + 1))
            p = FactorizationProblem(rng.standard_normal((m, n)), k=k, lam=float(rng.uniform(0, 2)))
            assert gradient_check(p, rng.standard_normal((m, k)), rng.standard_normal((n, k))) < 1e-5


class TestSolve:
    def test_rank_one_unconstrained(self):
        sol = solve(FactorizationProblem(rank_one(), k=1), SolverConfig(seed=11))
        assert sol.objective_value < 1e-8
        assert sol.converged

    @pytest.mark.parametrize("mode", ["sphere_retraction", "sphere_loss_normalized"])
    def test_rank_one_sphere_with_room_for_scale(self, mode):
        # with k = 2 a unit item row can carry any value <a, b_j> as long as
        # ||a|| >= max |v_j|, so the noiseless fit is exact
        sol = solve(FactorizationProblem(rank_one(), k=2), SolverConfig(mode=mode, seed=11))
        assert sol.objective_value < 1e-8
        np.testing.assert_allclose(np.linalg.norm(sol.B_hat, axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("mode", ["sphere_retraction", "sphere_loss_normalized"])
    def test_rank_one_sphere_k1_bounded_by_sign_oracle(self, mode):
        # on S^0 every item row is +1 or -1; for fixed signs s the best user
        # vector is A s / n, leaving ||A||^2 - ||A s||^2 / n
        A = rank_one()
        n = A.shape[1]
        best = min(
            np.sum(A**2) - np.sum((A @ np.array(s)) ** 2) / n for s in itertools.product((-1.0, 1.0), repeat=n)
        )
        assert best > 1e-3
        sol = solve(FactorizationProblem(A, k=1), SolverConfig(mode=mode, seed=11))
        assert sol.objective_value >= best - 1e-9
        np.testing.assert_allclose(np.abs(sol.B_hat), 1.0, atol=1e-12)

    @pytest.mark.parametrize("mode", MODES)
    def test_zero_data(self, mode):
        sol = solve(FactorizationProblem(np.zeros((4, 5)), k=2), SolverConfig(mode=mode, seed=3, max_iters=5000))
        assert sol.objective_value < 1e-12
        assert np.linalg.norm(sol.A_hat @ sol.B_hat.T) < 1e-6
        if mode != "unconstrained":
            assert np.max(np.abs(sol.A_hat)) < 1e-6
            np.testing.assert_allclose(np.linalg.norm(sol.B_hat, axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("mode", MODES)
    def test_monotone_descent(self, mode):
        A = generate_interactions(SyntheticSpec(6, 7, 3, 0.1, 5))
        sol = solve(FactorizationProblem(A, k=2, lam=0.1), SolverConfig(mode=mode, seed=1, max_iters=3000))
        assert np.all(np.diff(sol.history) <= 0)

    def test_retraction_feasible_every_iteration(self):
        A = generate_interactions(SyntheticSpec(6, 7, 3, 0.1, 5))
        worst = []

        def record(it, A_hat, B_hat, value):
            worst.append(np.max(np.abs(np.linalg.norm(B_hat, axis=1) - 1.0)))

        solve(FactorizationProblem(A, k=3), SolverConfig(mode="sphere_retraction", seed=1, max_iters=2000), record)
        assert worst and max(worst) < 1e-9

    @pytest.mark.parametrize("mode", MODES)
    def test_deterministic(self, mode):
        A = generate_interactions(SyntheticSpec(5, 6, 2, 0.1, 9))
        p = FactorizationProblem(A, k=2)
        a = solve(p, SolverConfig(mode=mode, seed=4, max_iters=500))
        b = solve(p, SolverConfig(mode=mode, seed=4, max_iters=500))
        assert a.A_hat.tobytes() == b.A_hat.tobytes()
        assert a.B_hat.tobytes() == b.B_hat.tobytes()
        assert a.objective_value == b.objective_value and a.iterations == b.iterations

    @pytest.mark.parametrize("mode", MODES)
    def test_objective_value_consistent(self, mode):
        A = generate_interactions(SyntheticSpec(5, 6, 2, 0.1, 9))
        p = FactorizationProblem(A, k=2, lam=0.5)
        sol = solve(p, SolverConfig(mode=mode, seed=4, max_iters=500))
        assert sol.objective_value == pytest.approx(objective(p, sol.A_hat, sol.B_hat), rel=1e-10)

    def test_constrain_users(self):
        A = generate_interactions(SyntheticSpec(5, 6, 2, 0.1, 9))
        for mode in ("sphere_retraction", "sphere_loss_normalized"):
            sol = solve(FactorizationProblem(A, k=2), SolverConfig(mode=mode, seed=4, max_iters=500, constrain_users=True))
            np.testing.assert_allclose(np.linalg.norm(sol.A_hat, axis=1), 1.0, atol=1e-9)
            np.testing.assert_allclose(np.linalg.norm(sol.B_hat, axis=1), 1.0, atol=1e-9)

    def test_divergence(self):
        with pytest.raises(DivergenceError) as info:
            solve(FactorizationProblem(np.full((3, 3), 1e200), k=1))
        assert info.value.iteration == 0

    def test_sphere_modes_agree(self, standard_problem, standard_sphere_solution):
        other = solve(standard_problem, SolverConfig(mode="sphere_loss_normalized", seed=8))
        a, b = standard_sphere_solution.objective_value, other.objective_value
        assert abs(a - b) / max(a, b) < 0.05
        np.testing.assert_allclose(np.linalg.norm(other.B_hat, axis=1), 1.0, atol=1e-9)


def test_zero_row_reseeded(caplog):
    rng = np.random.default_rng(0)
    p = FactorizationProblem(np.ones((3, 4)), k=2)
    param = _Parameterization(p, SolverConfig(mode="sphere_retraction"), rng)
    Y = np.ones((4, 2))
    Y[2] = 0.0
    with caplog.at_level(logging.WARNING, logger="gauge_lab.factorization"):
        _, Yr = param.retract(np.ones((3, 2)), Y, 17)
    np.testing.assert_allclose(np.linalg.norm(Yr, axis=1), 1.0)
    assert "iteration 17" in caplog.text and "row 2" in caplog.text


class TestSerialization:
    def test_json_round_trip(self):
        sol = solve(FactorizationProblem(rank_one(), k=1, lam=0.25), SolverConfig(seed=2, max_iters=200))
        doc = json.loads(sol.to_json())
        assert {"mode", "seed", "k", "lambda", "objective", "iterations", "A_hat", "B_hat"} <= set(doc)
        back = FactorizationSolution.from_json(sol.to_json())
        np.testing.assert_array_equal(back.A_hat, sol.A_hat)
        np.testing.assert_array_equal(back.B_hat, sol.B_hat)
        assert back.objective_value == sol.objective_value and back.lam == 0.25

    def test_csv_export(self, tmp_path):
        sol = solve(FactorizationProblem(rank_one(), k=2), SolverConfig(seed=2, max_iters=200))
        path = tmp_path / "items.csv"
        write_embeddings(path, sol.B_hat)
        assert path.read_text().splitlines()[0] == "id,c0,c1"
        ids, X = read_embeddings(path)
        np.testing.assert_array_equal(X, sol.B_hat)
        assert ids == [str(i) for i in range(5)]


class TestOrbitProbe:
    def test_identity(self, standard_problem, standard_sphere_solution):
        probe = gauge_orbit_probe(standard_problem, standard_sphere_solution, GaugeMatrix.identity(4))
        assert probe.objective_delta == 0.0
        assert probe.max_row_norm_violation == 0.0
        assert probe.cosine_max_shift == 0.0

    def test_unconstrained_pathology(self):
        A = generate_interactions(SyntheticSpec(4, 5, 2, 0.0, 0))
        p = FactorizationProblem(A, k=2)
        sol = solve(p, SolverConfig(seed=13))
        probe = gauge_orbit_probe(p, sol, GaugeMatrix([10.0, 0.1]))
        assert probe.objective_delta < 1e-9 * (1 + sol.objective_value)
        assert probe.cosine_max_shift > 0.05

    def test_sphere_solution_leaves_manifold(self, standard_problem, standard_sphere_solution):
        probe = gauge_orbit_probe(standard_problem, standard_sphere_solution, GaugeMatrix([2.0, 0.5, 1.0, 1.0]))
        assert probe.max_row_norm_violation > 1e-3
        assert probe.objective_delta <= 1e-9 * (1 + standard_sphere_solution.objective_value)

    def test_pair_sampling(self, standard_problem, standard_unconstrained_solution):
        D = GaugeMatrix([5.0, 0.2, 1.0, 3.0])
        full = gauge_orbit_probe(standard_problem, standard_unconstrained_solution, D)
        sampled = gauge_orbit_probe(standard_problem, standard_unconstrained_solution, D, max_pairs=50, seed=1)
        assert 0 < sampled.cosine_max_shift <= full.cosine_max_shift

    def test_rank_mismatch(self, standard_problem, standard_sphere_solution):
        with pytest.raises(ValueError):
            gauge_orbit_probe(standard_problem, standard_sphere_solution, GaugeMatrix([1.0, 2.0]))
