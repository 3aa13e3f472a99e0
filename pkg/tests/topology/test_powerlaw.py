"""Tests for discrete power-law fitting."""

import numpy as np
import pytest
from scipy.special import zeta

from defiblocks.errors import PowerLawFitError
from defiblocks.topology.powerlaw import (
    PowerLawFit,
    bootstrap_gof,
    ccdf_rows,
    discrete_alpha_mle,
    discrete_ks,
    fit_power_law,
    sample_power_law,
)

pytestmark = pytest.mark.unit


@pytest.fixture(scope="module")
def power_law_sample() -> np.ndarray:
    return sample_power_law(2.5, 5, 10_000, np.random.default_rng(20210607))


class TestSampler:
    def test_support_and_mass_at_k_min(self) -> None:
        x = sample_power_law(2.5, 1, 20_000, np.random.default_rng(1))
        assert x.min() >= 1
        assert np.mean(x == 1) == pytest.approx(1.0 / zeta(2.5, 1), abs=0.02)

    def test_far_tail_above_table(self) -> None:
        x = sample_power_law(1.5, 1, 5_000, np.random.default_rng(2), table_size=10)
        assert (x[x > 10] >= 11).all()
        assert (x >= 1).all()

    def test_seeded(self) -> None:
        a = sample_power_law(2.0, 3, 100, np.random.default_rng(5))
        b = sample_power_law(2.0, 3, 100, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)


class TestFit:
    def test_recovers_alpha_with_known_k_min(self, power_law_sample: np.ndarray) -> None:
        fit = fit_power_law(power_law_sample, k_min=5)
        assert fit.alpha == pytest.approx(2.5, abs=0.05)
        assert fit.n_tail == fit.n_total == 10_000

    def test_recovers_alpha_with_k_min_search(self, power_law_sample: np.ndarray) -> None:
        fit = fit_power_law(power_law_sample)
        assert fit.alpha == pytest.approx(2.5, abs=0.15)
        assert fit.k_min >= 5
        assert fit.ks_distance < 0.05

    def test_mle_helper_matches_fit(self, power_law_sample: np.ndarray) -> None:
        fit = fit_power_law(power_law_sample, k_min=5)
        assert discrete_alpha_mle(power_law_sample, 5) == pytest.approx(fit.alpha)

    def test_zeros_ignored(self, power_law_sample: np.ndarray) -> None:
        padded = np.concatenate([np.zeros(500, dtype=np.int64), power_law_sample])
        assert fit_power_law(padded, k_min=5) == fit_power_law(power_law_sample, k_min=5)

    def test_too_few_observations(self) -> None:
        with pytest.raises(PowerLawFitError, match="at least 50"):
            fit_power_law([1, 2, 3])

    def test_ones_do_not_count_towards_minimum(self) -> None:
        with pytest.raises(PowerLawFitError, match="observations >= 2, got 49"):
            fit_power_law([1] * 500 + [2] * 49)

    def test_constant_data_has_no_tail(self) -> None:
        with pytest.raises(PowerLawFitError, match="no tail"):
            fit_power_law([4] * 100)

    def test_stderr(self) -> None:
        fit = PowerLawFit(k_min=2, alpha=3.0, ks_distance=0.01, n_tail=400, n_total=1000)
        assert fit.alpha_stderr == pytest.approx(0.1)
        assert fit.to_row()["alpha_stderr"] == pytest.approx(0.1)


def _brute_force_ks(tail: np.ndarray, k_min: int, alpha: float) -> float:
    ks = np.arange(k_min, tail.max() + 1)
    empirical = np.searchsorted(np.sort(tail), ks, side="right") / len(tail)
    fitted = 1.0 - zeta(alpha, ks + 1) / zeta(alpha, k_min)
    return float(np.max(np.abs(empirical - fitted)))


class TestKsDistance:
    def test_gap_between_observed_values(self) -> None:
        tail = np.array([1] * 50 + [100] * 50)
        expected = 0.5 - zeta(2.0, 100) / zeta(2.0, 1)
        assert discrete_ks(tail, 1, 2.0) == pytest.approx(expected)
        assert discrete_ks(tail, 1, 2.0) == pytest.approx(0.4939, abs=1e-4)

    def test_k_min_below_smallest_value(self) -> None:
        tail = np.array([5, 6, 9])
        assert discrete_ks(tail, 2, 2.5) == pytest.approx(_brute_force_ks(tail, 2, 2.5))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_every_integer_supremum(self, seed: int) -> None:
        tail = sample_power_law(1.8, 3, 300, np.random.default_rng(seed))
        tail = tail[tail < 5_000]
        assert discrete_ks(tail, 3, 1.8) == pytest.approx(_brute_force_ks(tail, 3, 1.8))


class TestCcdf:
    def test_rows(self) -> None:
        fit = PowerLawFit(k_min=2, alpha=2.0, ks_distance=0.0, n_tail=3, n_total=4)
        rows = ccdf_rows([1, 2, 2, 3, 0], fit)
        assert [r["degree"] for r in rows] == [1, 2, 3]
        assert [r["ccdf_empirical"] for r in rows] == [1.0, 0.75, 0.25]
        assert rows[0]["ccdf_fitted"] == ""
        assert rows[1]["ccdf_fitted"] == pytest.approx(0.75)

    def test_empty(self) -> None:
        assert ccdf_rows([], None) == []


class TestBootstrap:
    def test_requires_enough_replicates(self, power_law_sample: np.ndarray) -> None:
        fit = fit_power_law(power_law_sample, k_min=5)
        with pytest.raises(PowerLawFitError, match="at least 100"):
            bootstrap_gof(power_law_sample, fit, n=10)

    @pytest.mark.slow
    def test_seeded_and_worker_independent(self) -> None:
        data = sample_power_law(2.5, 1, 400, np.random.default_rng(11))
        fit = fit_power_law(data)
        serial = bootstrap_gof(data, fit, n=100, seed=3)
        parallel = bootstrap_gof(data, fit, n=100, seed=3, workers=2)
        assert serial == parallel
        assert 0.0 <= serial.p_value <= 1.0
        assert serial.n_bootstrap == 100
        assert serial.seed == 3

    @pytest.mark.slow
    def test_model_sample_is_plausible(self, power_law_sample: np.ndarray) -> None:
        fit = fit_power_law(power_law_sample)
        assert abs(fit.alpha - 2.5) <= 0.1
        gof = bootstrap_gof(power_law_sample, fit, n=1_000, seed=20210607, workers=4)
        assert gof.n_failed == 0
        assert gof.p_value >= 0.1
        assert gof.plausible


@pytest.mark.slow
def test_alpha_error_shrinks_with_sample_size() -> None:
    errors = []
    for n in (1_000, 10_000, 100_000):
        draws = [
            fit_power_law(sample_power_law(2.5, 5, n, np.random.default_rng([n, s])), k_min=5).alpha
            for s in range(20)
        ]
        errors.append(float(np.mean(np.abs(np.array(draws) - 2.5))))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.01
