import math

import numpy as np
import pytest

from solit import (
    CandidateGrid,
    FilterSpec,
    InvalidParameterError,
    ThresholdTable,
    build_grid,
    build_thresholds,
    critical_value_z,
    deterministic_tables,
    lepskii_select,
    noise_level_select,
    optimal_select,
    oracle_constants,
    oracle_select,
    pairwise_variance_v,
    price_of_adaptation,
    solit_select,
)
from conftest import bias_norms


def toy_grid(v, alphas=None, theta1=1.5, theta2=2.5, sigma=1.0):
    v = np.asarray(v, dtype=float)
    if alphas is None:
        alphas = np.geomspace(1.0, 2.0 ** -(v.size - 1), v.size)
    return CandidateGrid(alphas=np.asarray(alphas, dtype=float), v=v, theta1=theta1, theta2=theta2, sigma=sigma)


def table(m_max, entries):
    t = np.zeros((m_max + 1, m_max + 1))
    for (i, j), val in entries.items():
        t[i, j] = t[j, i] = val
    return t


def solit_reference(bhat, kappa, m_max):
    for m1 in range(m_max + 1):
        if all(bhat[m1, m2] <= kappa[m1, m2] for m2 in range(m1 + 1, m_max + 1)):
            return m1
    return m_max


def oracle_reference(b, v, beta, m_max):
    for m in range(m_max + 1):
        ok = True
        for m1 in range(m, m_max + 1):
            for m2 in range(m1 + 1, m_max + 1):
                if b[m1, m2] ** 2 > beta**2 * v[m1, m2]:
                    ok = False
        if ok:
            return m
    return m_max


class TestBuildThresholds:
    def test_assembled_from_verified_components(self, small_heat):
        spec = FilterSpec("tikhonov")
        grid = build_grid(small_heat, spec, sigma=0.1, theta=2.0)
        tt = build_thresholds(small_heat, spec, grid, beta=1.0, gamma=1.0)
        assert tt.m_max == grid.m_max
        for m1 in range(grid.m_max):
            for m2 in range(m1 + 1, grid.m_max + 1):
                z = critical_value_z(small_heat, spec, grid.alphas[m1], grid.alphas[m2], tt.x[m1])
                vp = pairwise_variance_v(small_heat, spec, grid.alphas[m1], grid.alphas[m2], grid.sigma)
                assert tt.kappa[m1, m2] == pytest.approx(grid.sigma * z + math.sqrt(vp), rel=1e-12)

    def test_budgets_positive_and_floor(self, small_heat):
        spec = FilterSpec("tikhonov")
        grid = build_grid(small_heat, spec, sigma=0.1, theta=2.0)
        tt = build_thresholds(small_heat, spec, grid, beta=1.5, gamma=1.0)
        assert np.all(tt.x > 0)
        for m1 in range(grid.m_max):
            for m2 in range(m1 + 1, grid.m_max + 1):
                vp = pairwise_variance_v(small_heat, spec, grid.alphas[m1], grid.alphas[m2], grid.sigma)
                assert tt.kappa[m1, m2] >= 1.5 * math.sqrt(vp) - 1e-15

    def test_beta_additive_structure(self, small_heat):
        spec = FilterSpec("tikhonov")
        grid = build_grid(small_heat, spec, sigma=0.1, theta=2.0)
        t1 = build_thresholds(small_heat, spec, grid, beta=1.0, gamma=1.0)
        t2 = build_thresholds(small_heat, spec, grid, beta=2.0, gamma=1.0)
        iu = np.triu_indices(grid.m_max + 1, k=1)
        diff = t2.kappa[iu] - t1.kappa[iu]
        for (m1, m2), d in zip(zip(*iu), diff):
            vp = pairwise_variance_v(small_heat, spec, grid.alphas[m1], grid.alphas[m2], grid.sigma)
            assert d == pytest.approx(math.sqrt(vp), rel=1e-9)

    def test_gamma_monotone(self, small_heat):
        spec = FilterSpec("tikhonov")
        grid = build_grid(small_heat, spec, sigma=0.1, theta=2.0)
        t1 = build_thresholds(small_heat, spec, grid, beta=1.0, gamma=0.5)
        t2 = build_thresholds(small_heat, spec, grid, beta=1.0, gamma=2.0)
        iu = np.triu_indices(grid.m_max + 1, k=1)
        assert np.all(t2.kappa[iu] >= t1.kappa[iu] - 1e-12)

    def test_invalid_tuning(self, small_heat):
        grid = build_grid(small_heat, FilterSpec("tikhonov"), sigma=0.1, theta=2.0)
        with pytest.raises(InvalidParameterError):
            build_thresholds(small_heat, FilterSpec("tikhonov"), grid, beta=0.0)
        with pytest.raises(InvalidParameterError):
            build_thresholds(small_heat, FilterSpec("tikhonov"), grid, gamma=0.0)


class TestSolitSelect:
    def hand_thresholds(self, kappa, m_max):
        return ThresholdTable(kappa=kappa, x=np.ones(m_max), beta=1.0, gamma=1.0)

    def test_all_distances_zero(self):
        tt = self.hand_thresholds(table(2, {(0, 1): 0.4, (0, 2): 0.6, (1, 2): 0.2}), 2)
        assert solit_select(np.zeros((3, 3)), tt) == 0

    def test_hand_enumerated_case(self):
        bhat = table(2, {(0, 1): 0.5, (0, 2): 0.7, (1, 2): 0.1})
        kappa = table(2, {(0, 1): 0.4, (0, 2): 0.6, (1, 2): 0.2})
        assert solit_select(bhat, self.hand_thresholds(kappa, 2)) == 1

    def test_vacuous_maximum_returns_last(self):
        bhat = table(2, {(0, 1): 9.0, (0, 2): 9.0, (1, 2): 9.0})
        kappa = table(2, {(0, 1): 0.1, (0, 2): 0.1, (1, 2): 0.1})
        assert solit_select(bhat, self.hand_thresholds(kappa, 2)) == 2

    def test_matches_reference_on_random_tables(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            m_max = int(rng.integers(1, 7))
            bhat = table(m_max, {})
            kappa = np.zeros((m_max + 1, m_max + 1))
            iu = np.triu_indices(m_max + 1, k=1)
            bhat[iu] = rng.uniform(0, 1, iu[0].size)
            bhat += bhat.T
            kappa[iu] = rng.uniform(0, 1, iu[0].size)
            tt = self.hand_thresholds(kappa, m_max)
            assert solit_select(bhat, tt) == solit_reference(bhat, kappa, m_max)

    def test_raising_thresholds_never_raises_index(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            m_max = int(rng.integers(1, 7))
            iu = np.triu_indices(m_max + 1, k=1)
            bhat = np.zeros((m_max + 1, m_max + 1))
            bhat[iu] = rng.uniform(0, 1, iu[0].size)
            bhat += bhat.T
            kappa = np.zeros((m_max + 1, m_max + 1))
            kappa[iu] = rng.uniform(0, 1, iu[0].size)
            bigger = kappa.copy()
            bigger[iu] += rng.uniform(0, 1, iu[0].size)
            m_small = solit_select(bhat, self.hand_thresholds(kappa, m_max))
            m_big = solit_select(bhat, self.hand_thresholds(bigger, m_max))
            assert m_big <= m_small


class TestOracleSelect:
    def test_zero_truth(self):
        assert oracle_select(np.zeros((4, 4)), np.ones((4, 4)), beta=1.0) == 0

    def test_huge_beta(self):
        rng = np.random.default_rng(0)
        b = np.abs(rng.standard_normal((5, 5)))
        assert oracle_select(b, np.ones((5, 5)), beta=1e9) == 0

    def test_matches_exhaustive_reference(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            m_max = int(rng.integers(1, 7))
            iu = np.triu_indices(m_max + 1, k=1)
            b = np.zeros((m_max + 1, m_max + 1))
            v = np.zeros((m_max + 1, m_max + 1))
            b[iu] = rng.uniform(0, 1, iu[0].size)
            v[iu] = rng.uniform(0.01, 1, iu[0].size)
            b += b.T
            v += v.T
            beta = float(rng.uniform(0.2, 2.0))
            assert oracle_select(b, v, beta) == oracle_reference(b, v, beta, m_max)


class TestLepskiiSelect:
    def test_zero_distances(self):
        grid = toy_grid([0.25, 0.5, 1.0])
        assert lepskii_select(np.zeros((3, 3)), grid) == 0

    def test_hand_case(self):
        # bhat_01 = 5 > 4 * kappa * mu_1 = 4, so index 0 fails and 1 is vacuous
        grid = toy_grid([0.25, 1.0])
        bhat = table(1, {(0, 1): 5.0})
        assert lepskii_select(bhat, grid, sigma=1.0, kappa_tune=1.0) == 1

    def test_threshold_uses_finer_index_mu(self):
        # mu = (0.1, 1, 10): the correct thresholds at m1=0 are 4*mu_{m2} =
        # (4, 40), accepting these distances; a rule mistakenly using mu_{m1}
        # would compare against 0.4 and reject index 0
        grid = toy_grid([0.01, 1.0, 100.0], alphas=[1.0, 0.5, 0.25])
        bhat = table(2, {(0, 1): 2.0, (0, 2): 20.0, (1, 2): 1.0})
        assert lepskii_select(bhat, grid, sigma=1.0, kappa_tune=1.0) == 0

    def test_kappa_tune_floor(self):
        grid = toy_grid([0.25, 1.0])
        with pytest.raises(InvalidParameterError):
            lepskii_select(np.zeros((2, 2)), grid, kappa_tune=0.5)


class TestSimpleSelectors:
    def test_optimal_monotone_decreasing(self):
        assert optimal_select([5.0, 3.0, 1.0]) == 2

    def test_optimal_interior(self):
        assert optimal_select([3.0, 1.0, 2.0]) == 1

    def test_optimal_tie_breaks_small(self):
        assert optimal_select([1.0, 1.0]) == 0

    def test_noise_level_exact_match(self):
        grid = toy_grid([0.25, 0.5, 1.0], alphas=[0.9, 0.1, 0.01])
        assert noise_level_select(grid, sigma=0.1) == 1

    def test_noise_level_clamps(self):
        grid = toy_grid([0.25, 0.5, 1.0], alphas=[0.9, 0.1, 0.01])
        assert noise_level_select(grid, sigma=1e-9) == 2
        assert noise_level_select(grid, sigma=50.0) == 0


class TestOracleConstants:
    def test_c1_at_origin(self):
        grid = toy_grid([0.25, 0.5], theta1=2.0)
        c1, _ = oracle_constants(grid, 0, u_mstar=0.0, beta=1.0, gamma=1.0)
        assert c1 == pytest.approx(2.0 * math.sqrt(3.0), rel=1e-12)

    def test_c2_plug_in(self):
        # beta sqrt(v) + sqrt(2 u (2(1+gamma) log(ratio) + log(1+m_max)))
        grid = toy_grid([0.04, 0.08, 0.16, 0.32], theta1=1.5)
        _, c2 = oracle_constants(grid, 0, u_mstar=0.01, beta=1.0, gamma=1.0)
        assert c2 == pytest.approx(0.2 + math.sqrt(0.02 * math.log(4.0)), rel=1e-12)

    def test_price_of_adaptation(self):
        assert price_of_adaptation(1.0, 0.0) == 1.0
        assert price_of_adaptation(0.0, 2.0) == 4.0
        assert price_of_adaptation(1.0, 1.0) == 4.0


class TestDeterministicConsistency:
    @pytest.mark.parametrize("kind", ["tikhonov", "showalter", "cutoff"])
    @pytest.mark.parametrize("name", ["antiderivative", "gradiometry", "heat"])
    def test_oracle_below_bias_floor_index(self, kind, name, small_benchmarks):
        # m* <= m** where m** is the first index whose bias crosses the
        # (sqrt(theta1)-1) beta sqrt(v_m) floor
        problem = small_benchmarks[name]
        spec = FilterSpec(kind)
        for sigma in (1e-2, 1e-4):
            grid = build_grid(problem, spec, sigma, theta=2.0)
            b, v = deterministic_tables(problem, spec, grid)
            m_star = oracle_select(b, v, beta=1.0)
            bias = bias_norms(problem, spec, grid.alphas)
            floor = (math.sqrt(grid.theta1) - 1.0) ** 2 * grid.v
            hits = np.nonzero(bias**2 <= floor)[0]
            m_dstar = int(hits[0]) if hits.size else grid.m_max
            assert m_star <= m_dstar, (name, kind, sigma)

    @pytest.mark.parametrize("name", ["antiderivative", "gradiometry", "heat"])
    def test_noise_free_solit_at_most_oracle(self, name, small_benchmarks):
        problem = small_benchmarks[name]
        spec = FilterSpec("tikhonov")
        grid = build_grid(problem, spec, sigma=1e-3, theta=2.0)
        b, v = deterministic_tables(problem, spec, grid)
        tt = build_thresholds(problem, spec, grid, beta=1.0, gamma=1.0)
        m_hat = solit_select(b, tt)  # noise-free distances equal the biases
        m_star = oracle_select(b, v, beta=1.0)
        assert m_hat <= m_star
