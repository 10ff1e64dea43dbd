import math

import numpy as np
import pytest

from rareunion import (
    AR1Model,
    ArchimedeanModel,
    CapabilityError,
    FinitePatternModel,
    LaplaceModel,
    ModelSpecError,
    NormalModel,
    bonferroni_bounds,
    build_model,
    brute_force_union,
    oracle_union_laplace,
    oracle_union_normal_equicorr,
)
from rareunion.special import integrate, norm_sf

SQRT2 = math.sqrt(2.0)


def rng_for(tag):
    import zlib

    return np.random.default_rng(zlib.crc32(tag.encode()))


class TestBuildModel:
    def test_equicorrelated_shorthand(self):
        m = build_model({"type": "normal", "d": 4, "rho": 0.75})
        assert isinstance(m, NormalModel)
        assert m.d == 4
        assert m.sigma[0, 1] == pytest.approx(0.75)
        assert m.sigma[0, 0] == pytest.approx(1.0)
        assert m.equicorrelation == 0.75

    def test_laplace(self):
        m = build_model({"type": "laplace", "d": 4})
        assert isinstance(m, LaplaceModel)
        assert m.d == 4

    def test_not_positive_definite(self):
        with pytest.raises(ModelSpecError):
            build_model({"type": "normal", "sigma": [[1.0, 2.0], [2.0, 1.0]]})

    def test_theta_out_of_range(self):
        with pytest.raises(ModelSpecError):
            build_model({"type": "archimedean", "family": "gumbel", "theta": 0.5, "d": 3})

    def test_equicorrelation_out_of_range(self):
        with pytest.raises(ModelSpecError):
            NormalModel.equicorrelated(4, -0.5)
        with pytest.raises(ModelSpecError):
            NormalModel.equicorrelated(4, 1.0)

    def test_unknown_type(self):
        with pytest.raises(ModelSpecError):
            build_model({"type": "student"})

    def test_ar1_and_finite(self):
        assert isinstance(build_model({"type": "ar1", "phi": 0.5, "sigma_eps": 1.0, "d": 5}), AR1Model)
        assert isinstance(build_model({"type": "finite", "pmf": [0.25] * 4}), FinitePatternModel)


class TestNormalModel:
    def test_marginal_survival_deep_tail(self):
        m = NormalModel.equicorrelated(4, 0.75)
        assert m.marginal_survival(0, 4.0) == pytest.approx(3.16712418331e-05, rel=1e-9)
        # complement route would be hopeless out here
        assert m.marginal_survival(0, 8.0) == pytest.approx(6.22096057427e-16, rel=1e-9)

    def test_pair_survival_independence_factorizes(self):
        m = NormalModel.equicorrelated(3, 0.0)
        for g in (0.5, 2.0, 4.0):
            assert m.pair_survival(0, 1, g) == m.marginal_survival(0, g) ** 2

    def test_pair_survival_symmetry_exact(self):
        m = NormalModel(
            sigma=np.array([[2.0, 0.6, 0.2], [0.6, 1.0, 0.3], [0.2, 0.3, 1.5]]),
            mu=np.array([0.1, -0.2, 0.0]),
        )
        for g in (0.5, 1.5, 3.0):
            for i, j in [(0, 1), (0, 2), (1, 2)]:
                assert m.pair_survival(i, j, g) == m.pair_survival(j, i, g)

    def test_pair_survival_reference_values(self):
        # frozen from the 1-D conditional-tail quadrature at tight tolerance
        m = NormalModel.equicorrelated(4, 0.75)
        assert m.pair_survival(0, 1, 2.0) == pytest.approx(8.499947e-03, rel=1e-6)
        assert m.pair_survival(0, 1, 4.0) == pytest.approx(3.527127e-06, rel=1e-6)

    def test_sampling_moments(self):
        m = NormalModel.equicorrelated(3, 0.0)
        x = m.sample(rng_for("norm-moments"), 100_000)
        corr = np.corrcoef(x.T)
        assert abs(corr[0, 1]) < 0.02
        assert abs(corr[0, 2]) < 0.02

    def test_scalar_sample_shape(self):
        m = NormalModel.equicorrelated(3, 0.5)
        assert m.sample(rng_for("shape")).shape == (3,)
        assert m.sample(rng_for("shape"), 7).shape == (7, 3)

    def test_conditional_single_tail_mean(self):
        m = NormalModel.equicorrelated(1, 0.0)
        handle = m.conditional_given_exceedance(0, 4.0)
        x = handle.draw(rng_for("mills"), 100_000)
        target = math.exp(-8.0) / math.sqrt(2 * math.pi) / norm_sf(4.0)
        se = x[:, 0].std(ddof=1) / math.sqrt(x.shape[0])
        assert abs(x[:, 0].mean() - target) < 4 * se

    def test_conditional_vacuous_truncation(self):
        from scipy.stats import kstest

        m = NormalModel.equicorrelated(2, 0.5)
        handle = m.conditional_given_exceedance(0, -10.0)
        x = handle.draw(rng_for("vacuous"), 10_000)
        stat = kstest(x[:, 0], "norm").statistic
        assert stat < 1.358 / math.sqrt(10_000)  # 5% critical value

    def test_conditional_pair_hard_constraint(self):
        m = NormalModel.equicorrelated(4, 0.75)
        handle = m.conditional_given_pair_exceedance(1, 3, 4.0)
        x = handle.draw(rng_for("pair"), 500)
        assert (x[:, 1] > 4.0).all()
        assert (x[:, 3] > 4.0).all()

    def test_conditional_pair_independence_cross_corr(self):
        m = NormalModel.equicorrelated(2, 0.0)
        handle = m.conditional_given_pair_exceedance(0, 1, 1.0)
        x = handle.draw(rng_for("paircorr"), 20_000)
        corr = np.corrcoef(x[:, 0], x[:, 1])[0, 1]
        assert abs(corr) < 0.03


class TestLaplaceModel:
    def test_marginal_closed_form(self):
        m = LaplaceModel(4)
        for g in (0.5, 2.0, 6.0, 12.0):
            assert m.marginal_survival(0, g) == pytest.approx(
                0.5 * math.exp(-SQRT2 * g), rel=1e-14
            )
        assert m.marginal_survival(0, 0.0) == pytest.approx(0.5, abs=0)
        assert m.marginal_survival(0, -1.0) == pytest.approx(
            1.0 - 0.5 * math.exp(-SQRT2), rel=1e-14
        )

    def test_marginal_matches_factor_integral(self):
        m = LaplaceModel(2)
        for g in (1.0, 6.0):
            numeric = integrate(
                lambda r: math.exp(-r) * norm_sf(g / math.sqrt(r)), 0.0, 80.0, epsrel=1e-12
            )
            assert m.marginal_survival(0, g) == pytest.approx(numeric, rel=1e-8)

    def test_pair_survival_reference(self):
        m = LaplaceModel(4)
        assert m.pair_survival(0, 1, 6.0) == pytest.approx(6.166524e-07, rel=1e-6)

    def test_unit_variance(self):
        m = LaplaceModel(1)
        x = m.sample(rng_for("lapvar"), 200_000)
        assert x[:, 0].var(ddof=1) == pytest.approx(1.0, abs=0.02)

    def test_conditional_pair_unsupported(self):
        m = LaplaceModel(4)
        assert not m.capabilities.conditional_pair
        with pytest.raises(CapabilityError):
            m.conditional_given_pair_exceedance(0, 1, 6.0)

    def test_conditional_needs_positive_gamma(self):
        with pytest.raises(ValueError):
            LaplaceModel(4).conditional_given_exceedance(0, -1.0)


class TestArchimedeanModel:
    def test_uniform_threshold_marginal(self):
        m = ArchimedeanModel("clayton", 2.0, 3)
        assert m.marginal_survival(0, 0.9) == pytest.approx(0.1, rel=1e-14)

    def test_clayton_diagonal_example(self):
        m = ArchimedeanModel("clayton", 1.0, 2)
        assert m.diagonal(0.9) == pytest.approx(0.9 / 1.1, rel=1e-12)
        assert m.pair_survival(0, 1, 0.9) == pytest.approx(1 - 1.8 + 0.9 / 1.1, rel=1e-9)

    @pytest.mark.parametrize(
        "family,theta",
        [("clayton", 2.0), ("gumbel", 2.5), ("frank", 3.0), ("amh", 0.6)],
    )
    def test_sampled_pair_frequency_matches_diagonal(self, family, theta):
        m = ArchimedeanModel(family, theta, 3)
        u = m.sample(rng_for(f"arch-{family}"), 200_000)
        level = 0.85
        p = m.pair_survival(0, 1, level)
        emp = ((u[:, 0] > level) & (u[:, 1] > level)).mean()
        se = math.sqrt(p * (1 - p) / u.shape[0])
        assert abs(emp - p) < 4 * se

    def test_independence_members(self):
        for family, theta in [("clayton", 0.0), ("gumbel", 1.0), ("frank", 0.0), ("amh", 0.0)]:
            m = ArchimedeanModel(family, theta, 2)
            u = 0.7
            assert m.pair_survival(0, 1, u) == pytest.approx((1 - u) ** 2, rel=1e-10)

    def test_negative_theta_constructs_but_cannot_sample(self):
        m = ArchimedeanModel("clayton", -0.5, 2)
        assert m.pair_survival(0, 1, 0.9) >= 0.0
        with pytest.raises(CapabilityError):
            m.sample(rng_for("neg"), 10)

    def test_threshold_range_enforced(self):
        m = ArchimedeanModel("frank", 2.0, 2)
        with pytest.raises(ValueError):
            m.marginal_survival(0, 1.5)


class TestAR1Model:
    def test_stationary_moments(self):
        m = AR1Model(phi=0.5, sigma_eps=math.sqrt(0.75), d=6)
        assert m.sigma_marginal == pytest.approx(1.0, rel=1e-12)
        x = m.sample(rng_for("ar1"), 100_000)
        assert x.var(axis=0, ddof=1) == pytest.approx(np.ones(6), abs=0.03)
        lag1 = np.corrcoef(x[:, 0], x[:, 1])[0, 1]
        assert lag1 == pytest.approx(0.5, abs=0.02)

    def test_pair_survival_matches_explicit_covariance(self):
        phi, se, d = 0.6, 0.8, 4
        m = AR1Model(phi, se, d)
        var = se**2 / (1 - phi**2)
        cov = var * phi ** np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
        n = NormalModel(cov)
        for g in (0.5, 1.5):
            for i, j in [(0, 1), (0, 3), (1, 2)]:
                assert m.pair_survival(i, j, g) == pytest.approx(
                    n.pair_survival(i, j, g), rel=1e-9
                )

    def test_invalid_parameters(self):
        with pytest.raises(ModelSpecError):
            AR1Model(1.0, 1.0, 4)
        with pytest.raises(ModelSpecError):
            AR1Model(0.5, 0.0, 4)


class TestFinitePatternModel:
    def test_probabilities_and_conditionals(self):
        pmf = np.array([0.1, 0.2, 0.3, 0.4])
        m = FinitePatternModel(pmf)
        assert m.marginal_survival(0) == pytest.approx(0.7)
        assert m.marginal_survival(1) == pytest.approx(0.6)
        assert m.pair_survival(0, 1) == pytest.approx(0.4)
        handle = m.conditional_given_exceedance(0)
        x = handle.draw(rng_for("finite"), 50_000)
        assert (x[:, 0] > 0.5).all()
        emp = (x[:, 1] > 0.5).mean()
        assert emp == pytest.approx(0.4 / 0.7, abs=0.01)

    def test_json_round_trip(self):
        pmf = [0.05, 0.15, 0.25, 0.55]
        m = FinitePatternModel(pmf)
        again = FinitePatternModel.from_json(m.to_json())
        assert np.array_equal(again.pmf, m.pmf)
        assert again.d == 2

    def test_normalization_tolerance(self):
        with pytest.raises(ModelSpecError):
            FinitePatternModel([0.5, 0.5 + 1e-9])
        FinitePatternModel([0.5, 0.5 + 1e-14])  # inside tolerance

    def test_gamma_ignored(self):
        m = FinitePatternModel([0.25] * 4)
        assert m.marginal_survival(0, gamma=123.0) == pytest.approx(0.5)


MODEL_ZOO = [
    (NormalModel.equicorrelated(4, 0.75), 1.0),
    (NormalModel.equicorrelated(3, -0.2), 0.8),
    (LaplaceModel(4), 1.0),
    (ArchimedeanModel("clayton", 2.0, 3), 0.8),
    (ArchimedeanModel("gumbel", 2.0, 3), 0.8),
    (AR1Model(0.5, math.sqrt(0.75), 5), 1.0),
    (
        FinitePatternModel(np.random.default_rng(7).dirichlet(np.ones(16))),
        0.0,
    ),
]


@pytest.mark.parametrize("model,gamma", MODEL_ZOO, ids=lambda p: type(p).__name__ if hasattr(p, "d") else str(p))
def test_empirical_exceedance_frequency(model, gamma):
    n = 100_000
    x = model.sample(rng_for(f"emp-{type(model).__name__}"), n)
    patterns = model.exceedance_patterns(x, gamma)
    p = model.marginal_survival(0, gamma)
    se = math.sqrt(p * (1 - p) / n)
    assert abs(patterns[:, 0].mean() - p) < 4 * se


class TestOrderingInvariants:
    def test_boole_frechet_and_bonferroni_normal(self):
        m = NormalModel.equicorrelated(4, 0.75)
        for g in (1.0, 2.0, 3.0, 4.0):
            alpha = oracle_union_normal_equicorr(4, 0.75, g)
            margs = [m.marginal_survival(i, g) for i in range(4)]
            assert max(margs) <= alpha <= sum(margs)
            bounds = bonferroni_bounds(m, g)
            assert bounds.second <= alpha <= bounds.upper

    def test_boole_frechet_and_bonferroni_laplace(self):
        m = LaplaceModel(4)
        for g in (4.0, 6.0, 8.0):
            alpha = oracle_union_laplace(4, g)
            margs = [m.marginal_survival(i, g) for i in range(4)]
            assert max(margs) <= alpha <= sum(margs)
            bounds = bonferroni_bounds(m, g)
            assert bounds.second <= alpha <= bounds.upper

    def test_boole_frechet_finite(self):
        pmf = np.random.default_rng(11).dirichlet(np.ones(8))
        m = FinitePatternModel(pmf)
        alpha = brute_force_union(m)
        margs = [m.marginal_survival(i) for i in range(3)]
        assert max(margs) - 1e-15 <= alpha <= sum(margs) + 1e-15
        bounds = bonferroni_bounds(m, 0.0)
        assert bounds.second - 1e-15 <= alpha <= bounds.upper + 1e-15
