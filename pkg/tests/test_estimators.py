import math
from fractions import Fraction

import numpy as np
import pytest

from rareunion import (
    CapabilityError,
    ArchimedeanModel,
    FinitePatternModel,
    LaplaceModel,
    NormalModel,
    Payoff,
    bonferroni_bounds,
    brute_force_tail_expectation,
    brute_force_union,
    estimate_alpha_1_is,
    estimate_alpha_2_is,
    estimate_alpha_n,
    estimate_beta_dagger_alpha,
    estimate_beta_n,
    estimate_cmc,
    exhaustive_estimator_mean,
    exhaustive_residual_second_moment,
    exhaustive_variance_components,
    oracle_union_normal_equicorr,
    run_estimator,
)


def rng_for(tag):
    import zlib

    return np.random.default_rng(zlib.crc32(tag.encode()))


def random_finite(seed, d):
    pmf = np.random.default_rng(seed).dirichlet(np.ones(1 << d))
    return FinitePatternModel(pmf / pmf.sum())


ALL_UNION_ESTIMATORS = (
    "cmc",
    "alpha1",
    "alpha2",
    "alpha1_is",
    "alpha2_is",
    "beta1_alpha",
    "beta2_alpha",
)


class TestExhaustiveUnbiasedness:
    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("name", ALL_UNION_ESTIMATORS)
    def test_union_estimators(self, d, name):
        model = random_finite(100 + d, d)
        truth = brute_force_union(model)
        assert exhaustive_estimator_mean(name, model) == pytest.approx(truth, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("n", [1, 2])
    def test_tail_estimator_with_payoffs(self, d, n):
        model = random_finite(200 + d, d)
        for payoff in (
            Payoff.constant_one(),
            Payoff.residual_alternating(n - 1) if n >= 1 else Payoff.constant_one(),
            Payoff.custom(lambda x, p: 1.0 + p.sum(axis=1) ** 2),
        ):
            truth = brute_force_tail_expectation(model, n, payoff)
            got = exhaustive_estimator_mean("beta_n", model, n=n, payoff=payoff)
            assert got == pytest.approx(truth, abs=1e-12)


class TestVarianceInequalities:
    @pytest.mark.parametrize("seed", range(6))
    def test_residual_second_moment_bound(self, seed):
        d = 2 + seed % 3
        model = random_finite(300 + seed, d)
        lhs = exhaustive_residual_second_moment(model, 1)
        pairs = [
            model.pair_survival(i, j) for i in range(d) for j in range(i + 1, d)
        ]
        assert lhs <= 2.0 * sum(pairs) + 1e-15

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("n", [1, 2])
    def test_partition_variance_reduction(self, seed, n):
        d = 2 + seed % 3
        model = random_finite(400 + seed, d)
        for payoff in (Payoff.constant_one(), Payoff.custom(lambda x, p: 1.0 + p.sum(axis=1))):
            comps = exhaustive_variance_components(model, n, payoff)
            assert (
                comps["conditional_sweep_var"]
                <= comps["max_cell_prob"] * comps["crude_sweep_var"] + 1e-15
            )


class TestMixtureIdentity:
    def test_first_order_weighting_collapses_exactly(self):
        # deterministic head plus weighted remainder equals head / count,
        # verified in exact rational arithmetic
        abar = Fraction(91, 1000)
        for count in range(1, 9):
            likelihood = abar / count
            residual = (1 - count) if count >= 2 else 0
            assert abar + residual * likelihood == abar / count


class TestDegeneration:
    def test_alpha_n_degenerates_to_bounds(self):
        m = NormalModel.equicorrelated(4, 0.75)
        bounds = bonferroni_bounds(m, 6.0)
        r1 = estimate_alpha_n(m, 6.0, 1, 2000, 5)
        assert r1.degenerate and r1.sample_std == 0.0 and r1.stderr == 0.0
        assert r1.estimate == bounds.upper
        r2 = estimate_alpha_n(m, 6.0, 2, 2000, 5)
        assert r2.degenerate
        assert r2.estimate == bounds.second

    def test_cmc_degenerates_to_zero(self):
        m = NormalModel.equicorrelated(4, 0.75)
        r = estimate_cmc(m, 8.0, 5000, 1)
        assert r.degenerate and r.estimate == 0.0

    def test_two_events_second_order_is_forced(self):
        m = NormalModel.equicorrelated(2, 0.5)
        bounds = bonferroni_bounds(m, 1.0)
        r = estimate_alpha_2_is(m, 1.0, 500, 9)
        assert r.degenerate
        assert r.estimate == bounds.upper - (bounds.upper - bounds.second)

    def test_single_event_first_order_is_exact(self):
        m = NormalModel.equicorrelated(1, 0.0)
        r = estimate_alpha_1_is(m, 2.0, 200, 3)
        assert r.degenerate
        assert r.estimate == m.marginal_survival(0, 2.0)

    def test_disjoint_events_second_order_returns_upper(self):
        # only single-bit patterns have mass, so every pair probability is 0
        pmf = np.array([0.4, 0.2, 0.3, 0.0, 0.1, 0.0, 0.0, 0.0])
        model = FinitePatternModel(pmf)
        r = estimate_alpha_2_is(model, 0.0, 100, 1)
        assert r.degenerate and r.replicates == 0
        assert r.estimate == bonferroni_bounds(model, 0.0).upper


class TestReplicateRange:
    def test_second_order_mixture_estimate_within_hard_bounds(self):
        m = NormalModel.equicorrelated(4, 0.75)
        bounds = bonferroni_bounds(m, 2.0)
        q = bounds.upper - bounds.second
        r = estimate_alpha_2_is(m, 2.0, 4000, 17)
        assert bounds.second - 1e-15 <= r.estimate <= bounds.upper - 2 * q / 4 + 1e-15


class TestReproducibility:
    @pytest.mark.parametrize("name", ALL_UNION_ESTIMATORS)
    def test_bit_identical_for_fixed_seed(self, name):
        m = NormalModel.equicorrelated(3, 0.5)
        a = run_estimator(name, m, 1.5, 3000, 77)
        b = run_estimator(name, m, 1.5, 3000, 77)
        assert a.estimate == b.estimate
        assert a.sample_std == b.sample_std
        c = run_estimator(name, m, 1.5, 3000, 78)
        assert c.estimate != a.estimate or c.sample_std != a.sample_std

    def test_chunk_boundaries_do_not_change_results(self):
        # replicate counts straddling the chunk size keep prefix-consistent streams
        m = NormalModel.equicorrelated(2, 0.5)
        big = estimate_cmc(m, 1.0, (1 << 16) + 500, 5)
        assert big.replicates == (1 << 16) + 500


class TestCapabilities:
    def test_laplace_has_no_pair_conditional(self):
        m = LaplaceModel(4)
        with pytest.raises(CapabilityError):
            estimate_alpha_2_is(m, 6.0, 100, 1)
        with pytest.raises(CapabilityError):
            estimate_beta_dagger_alpha(m, 6.0, 2, 100, 1)

    def test_archimedean_has_no_conditionals(self):
        m = ArchimedeanModel("clayton", 2.0, 3)
        with pytest.raises(CapabilityError):
            estimate_alpha_1_is(m, 0.9, 100, 1)
        # but the partially deterministic estimators work
        r = estimate_alpha_n(m, 0.9, 2, 5000, 1)
        assert r.replicates == 5000

    def test_invalid_inputs(self):
        m = NormalModel.equicorrelated(2, 0.5)
        with pytest.raises(ValueError):
            estimate_alpha_n(m, 1.0, 3, 100, 1)
        with pytest.raises(ValueError):
            estimate_cmc(m, 1.0, 0, 1)
        with pytest.raises(ValueError):
            run_estimator("nope", m, 1.0, 10, 1)


class TestAgainstOracle:
    def test_cmc_and_alpha1_consistent_at_moderate_threshold(self):
        m = NormalModel.equicorrelated(4, 0.75)
        alpha = oracle_union_normal_equicorr(4, 0.75, 2.0)
        for name in ("cmc", "alpha1", "alpha1_is", "beta1_alpha"):
            r = run_estimator(name, m, 2.0, 40_000, 11)
            assert abs(r.estimate - alpha) < 4 * r.stderr

    def test_beta_n_constant_payoff_estimates_union(self):
        m = NormalModel.equicorrelated(4, 0.75)
        alpha = oracle_union_normal_equicorr(4, 0.75, 2.0)
        r = estimate_beta_n(m, 2.0, 1, Payoff.constant_one(), 30_000, 13)
        assert abs(r.estimate - alpha) < 4 * r.stderr

    def test_beta_n_order_two_estimates_tail(self):
        # P(at least two exceedances) via the pair partition on a finite model
        model = random_finite(777, 3)
        truth = brute_force_tail_expectation(model, 2)
        r = estimate_beta_n(model, 0.0, 2, Payoff.constant_one(), 30_000, 23)
        assert abs(r.estimate - truth) < 4 * r.stderr


class TestBonferroni:
    def test_independent_two_event_closed_form(self):
        p = 0.25
        pmf = np.outer([1 - p, p], [1 - p, p]).ravel()
        model = FinitePatternModel(pmf)
        bounds = bonferroni_bounds(model, 0.0)
        assert bounds.upper == pytest.approx(2 * p, rel=1e-14)
        assert bounds.second == pytest.approx(2 * p - p * p, rel=1e-14)

    def test_result_fields(self):
        m = NormalModel.equicorrelated(3, 0.5)
        r = estimate_cmc(m, 1.0, 5000, 99)
        assert r.stderr == pytest.approx(r.sample_std / math.sqrt(r.replicates))
        assert r.seed == 99
        assert r.wall_ms >= 0.0
        assert set(r.to_json()) == {
            "estimate",
            "sample_std",
            "stderr",
            "replicates",
            "degenerate",
            "seed",
            "wall_ms",
        }
