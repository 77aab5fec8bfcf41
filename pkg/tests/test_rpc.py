"""Tests for parameter functions, cascades, and the stability map."""

import numpy as np
import pytest

from spinglass import (
    CapacityError,
    DiscreteDirectingMeasure,
    NumericError,
    ParameterFunction,
    l1_distance,
    pd_cascade,
    phi_lambda,
    right_cont_inverse,
    rng_from,
    rpc_overlaps,
    sample_from_directing,
    sample_pair_overlaps,
    sample_tilt_field,
    simulate_bs_coalescent,
    validate_overlap_matrix,
)
from spinglass.rpc import (
    CascadeGram,
    DenseGram,
    measure_from_json,
    measure_to_json,
    overlap_ultrametric_violations,
)

ONE_STEP = ParameterFunction.one_step(0.5, 0.5)
TWO_STEP = ParameterFunction((0.3, 0.6), (0.2, 0.5, 1.0))


def random_step_function(rng, max_levels=3):
    r = int(rng.integers(1, max_levels + 1))
    bp = np.sort(rng.uniform(0.05, 1.0, size=r))
    while np.any(np.diff(bp) <= 0):
        bp = np.sort(rng.uniform(0.05, 1.0, size=r))
    vals = np.sort(rng.uniform(0.05, 0.95, size=r))
    return ParameterFunction(tuple(bp), tuple(vals) + (1.0,))


class TestParameterFunction:
    def test_step_evaluation(self):
        assert ONE_STEP(0.0) == 0.5
        assert ONE_STEP(0.49) == 0.5
        assert ONE_STEP(0.5) == 1.0  # right continuous
        assert ONE_STEP(1.0) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            ParameterFunction((0.5,), (0.5, 0.9))  # final value != 1
        with pytest.raises(ValueError):
            ParameterFunction((0.5,), (0.9, 0.5))  # decreasing
        with pytest.raises(ValueError):
            ParameterFunction((0.6, 0.3), (0.1, 0.5, 1.0))  # unsorted breakpoints
        with pytest.raises(ValueError):
            ParameterFunction((1.5,), (0.5, 1.0))  # breakpoint out of range
        with pytest.raises(ValueError):
            ParameterFunction((0.5,), (0.5,))  # wrong lengths

    def test_breakpoint_at_zero_is_dropped(self):
        x = ParameterFunction((0.0, 0.5), (0.2, 0.4, 1.0))
        assert x.breakpoints == (0.5,)
        assert x.values == (0.4, 1.0)
        y = ParameterFunction((0.0,), (0.3, 1.0))
        assert y.is_identically_one

    def test_integral_and_mean_overlap(self):
        assert ONE_STEP.integral() == pytest.approx(0.5 * 0.5 + 1.0 * 0.5)
        assert ONE_STEP.mean_overlap() == pytest.approx(0.25)
        assert ParameterFunction.constant_one().mean_overlap() == 0.0

    def test_json_round_trip(self):
        x = TWO_STEP
        assert ParameterFunction.from_json(x.to_json()) == x


class TestRightContinuousInverse:
    def test_one_step_below_m(self):
        assert right_cont_inverse(ONE_STEP, 0.3) == 0.0

    def test_one_step_at_and_above_m(self):
        assert right_cont_inverse(ONE_STEP, 0.5) == 0.5
        assert right_cont_inverse(ONE_STEP, 0.99) == 0.5

    def test_identically_one_literal_inf(self):
        x = ParameterFunction.constant_one()
        for u in (0.0, 0.5, 0.999):
            assert right_cont_inverse(x, u) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            right_cont_inverse(ONE_STEP, 1.0)
        with pytest.raises(ValueError):
            right_cont_inverse(ONE_STEP, -0.1)

    def test_inverse_integral_identity(self):
        # integral of x^{-1} over [0,1) equals 1 - integral of x;
        # oracle: midpoint quadrature of the inverse on a fine grid
        rng = rng_from(11, "inv-int")
        for _ in range(10):
            x = random_step_function(rng)
            u = (np.arange(200000) + 0.5) / 200000
            quad = right_cont_inverse(x, u).mean()
            assert quad == pytest.approx(1.0 - x.integral(), abs=2e-4)


class TestTimeChange:
    def test_jump_at_one_gives_identity_matrix(self):
        x = ParameterFunction((1.0,), (0.0, 1.0))
        for i in range(5):
            q = rpc_overlaps(x, 6, rng_from(12, "id", i))
            assert np.array_equal(q, np.eye(6))

    def test_identically_one_gives_all_ones(self):
        q = rpc_overlaps(ParameterFunction.constant_one(), 5, rng_from(13, "ones"))
        assert np.array_equal(q, np.ones((5, 5)))

    def test_one_step_two_replica_law(self):
        hits = np.array(
            [
                rpc_overlaps(ONE_STEP, 2, rng_from(14, "law", i))[0, 1] == 0.5
                for i in range(5000)
            ]
        )
        p = hits.mean()
        se = np.sqrt(p * (1 - p) / hits.size)
        assert abs(p - 0.5) < 4 * se

    def test_output_is_valid_overlap_matrix(self):
        rng = rng_from(15, "valid")
        for i in range(10):
            x = random_step_function(rng)
            q = rpc_overlaps(x, 10, rng)
            validate_overlap_matrix(q)
            assert np.all(q >= 0)
            assert overlap_ultrametric_violations(q) == 0

    def test_entries_are_exact_breakpoint_copies(self):
        q = rpc_overlaps(TWO_STEP, 12, rng_from(16, "exact"))
        offdiag = q[~np.eye(12, dtype=bool)]
        allowed = {0.0, 0.3, 0.6}
        assert set(offdiag.tolist()) <= allowed

    def test_monotone_coupling(self):
        # pointwise x <= y implies inverse_x >= inverse_y, hence Q_x >= Q_y
        # entrywise on a shared coalescent run
        x = ParameterFunction.one_step(0.3, 0.6)
        y = ParameterFunction.one_step(0.7, 0.6)
        for i in range(10):
            run = simulate_bs_coalescent(8, rng_from(17, "coupling", i))
            qx = rpc_overlaps(x, 8, None, run=run)
            qy = rpc_overlaps(y, 8, None, run=run)
            assert np.all(qx >= qy)


class TestL1Distance:
    def test_zero_for_equal(self):
        assert l1_distance(TWO_STEP, TWO_STEP) == 0.0

    def test_one_step_vs_constant_one_rectangle(self):
        m, q_star = 0.5, 0.5
        x = ParameterFunction.one_step(m, q_star)
        assert l1_distance(x, ParameterFunction.constant_one()) == pytest.approx(
            (1 - m) * q_star
        )

    def test_symmetric(self):
        rng = rng_from(18, "l1")
        for _ in range(5):
            x, y = random_step_function(rng), random_step_function(rng)
            assert l1_distance(x, y) == pytest.approx(l1_distance(y, x))

    def test_moment_continuity_bound(self):
        # |E q(x) - E q(y)| = |int x - int y| <= int |x - y|
        rng = rng_from(19, "moment")
        for _ in range(20):
            x, y = random_step_function(rng), random_step_function(rng)
            assert abs(x.mean_overlap() - y.mean_overlap()) <= l1_distance(x, y) + 1e-15


class TestCascade:
    def test_one_step_diversity(self):
        # E[sum w^2] = 1 - m for the top-level Poisson-Dirichlet weights
        m = 0.5
        x = ParameterFunction.one_step(m, 0.5)
        vals = np.array(
            [
                np.sum(pd_cascade(x, 2000, rng_from(20, "div", i)).weights ** 2)
                for i in range(300)
            ]
        )
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - (1 - m)) < 4 * se

    def test_tree_gram_structure(self):
        mu = pd_cascade(TWO_STEP, 100, rng_from(21, "tree"))
        gram = mu.gram
        assert isinstance(gram, CascadeGram)
        assert mu.n_atoms == 100**2
        # same level-1 node, different leaves -> q_1; same leaf -> q_2
        assert gram.take(0, 1) == 0.3
        assert gram.take(0, 0) == 0.6
        assert gram.take(0, 100) == 0.0  # different level-1 nodes
        assert np.all(mu.norm_sq == 0.6)

    def test_truncation_tail_reported(self):
        mu = pd_cascade(ONE_STEP, 1000, rng_from(22, "tail"))
        assert 0 < mu.truncation_tail < 0.01

    def test_degenerate_and_caps(self):
        with pytest.raises(ValueError):
            pd_cascade(ParameterFunction.constant_one(), 1000, rng_from(1, "e"))
        with pytest.raises(ValueError):
            pd_cascade(ParameterFunction((0.5,), (0.0, 1.0)), 1000, rng_from(1, "e"))
        with pytest.raises(ValueError):
            pd_cascade(ONE_STEP, 50, rng_from(1, "e"))
        with pytest.raises(CapacityError):
            pd_cascade(TWO_STEP, 200, rng_from(1, "e"))  # 200^2 > atom cap

    def test_weights_normalized(self):
        mu = pd_cascade(ONE_STEP, 500, rng_from(23, "norm"))
        assert abs(mu.weights.sum() - 1.0) < 1e-12
        assert np.all(mu.weights > 0)


class TestSampleFromDirecting:
    def test_single_atom_all_ones(self):
        mu = DiscreteDirectingMeasure(np.array([1.0]), DenseGram([[1.0]]))
        q = sample_from_directing(mu, 4, rng_from(24, "single"))
        assert np.array_equal(q, np.ones((4, 4)))

    def test_delta_at_zero_vector_identity(self):
        mu = DiscreteDirectingMeasure(np.array([1.0]), DenseGram([[0.0]]))
        q = sample_from_directing(mu, 3, rng_from(25, "zero"))
        assert np.array_equal(q, np.eye(3))

    def test_same_atom_probability_equals_diversity(self):
        # P(q12 = q*) = sum w^2, per realization
        mu = pd_cascade(ONE_STEP, 2000, rng_from(26, "atoms"))
        qs = sample_pair_overlaps(mu, 40000, rng_from(27, "pairs"))
        p_hat = np.mean(qs == 0.5)
        target = float(np.sum(mu.weights**2))
        se = np.sqrt(target * (1 - target) / qs.size)
        assert abs(p_hat - target) < 4 * se

    def test_matrix_and_pair_sampler_consistent(self):
        mu = pd_cascade(ONE_STEP, 500, rng_from(28, "cons"))
        q = sample_from_directing(mu, 5, rng_from(29, "cons"))
        assert np.all(np.diag(q) == 1.0)
        assert set(np.unique(q[~np.eye(5, dtype=bool)])) <= {0.0, 0.5}


class TestPhiLambda:
    def test_lambda_zero_returns_mu(self):
        mu = pd_cascade(ONE_STEP, 200, rng_from(30, "phi0"))
        assert phi_lambda(mu, 0.0) is mu

    def test_single_atom_invariant(self):
        mu = DiscreteDirectingMeasure(np.array([1.0]), DenseGram([[1.0]]))
        out = phi_lambda(mu, 2.0, rng_from(31, "phi1"))
        assert np.array_equal(out.weights, [1.0])

    def test_gram_unchanged(self):
        mu = pd_cascade(ONE_STEP, 300, rng_from(32, "phi2"))
        out = phi_lambda(mu, 0.7, rng_from(33, "phi2"))
        assert out.gram is mu.gram
        assert abs(out.weights.sum() - 1.0) < 1e-12

    def test_tree_field_covariance_matches_dense_oracle(self):
        # empirical covariance of the tree-sampled field vs cov(G)
        # computed entrywise on the densified gram; small synthetic tree
        gram = CascadeGram(levels=(0.4, 0.8), branching=4, depth=2)
        mu = DiscreteDirectingMeasure(np.full(16, 1 / 16), gram)
        target = gram.to_dense() ** 2
        draws = np.stack(
            [sample_tilt_field(mu, rng_from(35, "field", i)) for i in range(6000)]
        )
        emp = draws.T @ draws / draws.shape[0]
        picks = [(0, 0), (0, 1), (0, 5), (0, 15), (3, 7)]
        for i, j in picks:
            se = np.std(draws[:, i] * draws[:, j], ddof=1) / np.sqrt(draws.shape[0])
            assert abs(emp[i, j] - target[i, j]) < 4 * se, (i, j)

    def test_dense_field_covariance(self):
        gram = DenseGram([[1.0, 0.5, 0.0], [0.5, 1.0, 0.25], [0.0, 0.25, 1.0]])
        mu = DiscreteDirectingMeasure(np.full(3, 1 / 3), gram)
        draws = np.stack(
            [sample_tilt_field(mu, rng_from(36, "dense", i)) for i in range(6000)]
        )
        emp = draws.T @ draws / draws.shape[0]
        target = gram.matrix**2
        for i in range(3):
            for j in range(3):
                se = np.std(draws[:, i] * draws[:, j], ddof=1) / np.sqrt(draws.shape[0])
                assert abs(emp[i, j] - target[i, j]) < 5 * se

    def test_unnormalized_mass_mgf(self):
        # E_kappa[sum w e^{lam kappa}] = sum w e^{lam^2 cov(G_aa)/2}
        # <= e^{lam^2/2} on the unit ball
        lam = 0.8
        mu = pd_cascade(ONE_STEP, 500, rng_from(37, "mgf"))
        masses = np.empty(3000)
        for i in range(3000):
            kappa = sample_tilt_field(mu, rng_from(38, "mgf", i))
            masses[i] = np.sum(mu.weights * np.exp(lam * kappa))
        target = float(np.sum(mu.weights * np.exp(lam**2 * mu.norm_sq**2 / 2)))
        se = masses.std(ddof=1) / np.sqrt(masses.size)
        assert abs(masses.mean() - target) < 4 * se
        assert target <= np.exp(lam**2 / 2) + 1e-12

    def test_non_psd_cov_rejected(self):
        gram = DenseGram([[1.0, 0.0], [0.0, 1.0]])
        mu = DiscreteDirectingMeasure(np.array([0.5, 0.5]), gram)
        with pytest.raises(NumericError):
            sample_tilt_field(mu, rng_from(39, "npsd"), cov=lambda q: -np.asarray(q) - 1.0)
        tree_mu = pd_cascade(ONE_STEP, 200, rng_from(40, "npsd"))
        with pytest.raises(NumericError):
            sample_tilt_field(tree_mu, rng_from(41, "npsd"), cov=lambda q: 1.0 - np.asarray(q))

    def test_one_step_stability_fixed_point(self):
        # overlap histogram before vs after the tilt, common random
        # numbers on the atom draws; pooled distance stays small
        lam = 0.5
        x = ONE_STEP
        n_outer, n_inner = 200, 50
        before = np.empty(n_outer)
        after = np.empty(n_outer)
        for b in range(n_outer):
            mu = pd_cascade(x, 2000, rng_from(42, "fix-mu", b))
            tilted = phi_lambda(mu, lam, rng_from(43, "fix-kappa", b))
            key_rng = lambda: rng_from(44, "fix-draw", b)
            before[b] = np.mean(sample_pair_overlaps(mu, n_inner, key_rng()) == 0.5)
            after[b] = np.mean(sample_pair_overlaps(tilted, n_inner, key_rng()) == 0.5)
        tv = abs(before.mean() - after.mean())
        assert tv < 0.02


class TestMeasureSerialization:
    def test_round_trip(self):
        mu = pd_cascade(ONE_STEP, 200, rng_from(45, "json"))
        back = measure_from_json(measure_to_json(mu))
        assert np.allclose(back.weights, mu.weights)
        assert np.allclose(back.gram.to_dense(), mu.gram.to_dense())

    def test_export_cap(self):
        mu = pd_cascade(ONE_STEP, 2000, rng_from(46, "cap"))
        with pytest.raises(CapacityError):
            measure_to_json(mu)
