"""Index computations against analytic and brute-force oracles.

Tolerances:
  crossing level vs analytic/dense-grid oracle:  0.01
  exact integration vs 1e6-panel quadrature:     1e-5
  closed-form endpoint values:                   1e-9
  affine transform invariance (efi):             exact (1e-12)
  monotone transform stability (cpf):            0.01
"""

import numpy as np
import pytest
from scipy import stats

from oracles import dense_scan_cpf, quadrature_efi
from wxindex.climatology import ClimateDistribution
from wxindex.distributions import EmpiricalDistribution, PercentileGrid, to_percentile_grid
from wxindex.errors import LocationMismatch, ZeroScale
from wxindex.indices import (
    CrossingBranch,
    IndexKind,
    IndexValue,
    anf,
    compute_index_field,
    cpf,
    efi,
    index_value,
    sot,
)


def climate_from(values):
    return ClimateDistribution.from_grid(
        to_percentile_grid(EmpiricalDistribution(values)))


def climate_grid(thresholds):
    return ClimateDistribution.from_grid(PercentileGrid(np.asarray(thresholds, float)))


def random_pair(rng, n_members=50, n_climate=400):
    forecast = EmpiricalDistribution(
        rng.normal(rng.uniform(-1, 1), rng.uniform(0.3, 2.0), n_members))
    climate = climate_from(rng.normal(rng.uniform(-1, 1), rng.uniform(0.3, 2.0), n_climate))
    return forecast, climate


class TestCpf:
    def test_forecast_equals_climate_is_degenerate(self):
        # forecast sampled at the climate's own percentile values
        thresholds = np.sort(np.random.default_rng(2).normal(size=101))
        climate = climate_grid(thresholds)
        forecast = EmpiricalDistribution(thresholds[1:])
        res = cpf(forecast, climate)
        assert res.branch is CrossingBranch.DEGENERATE_EQUAL
        assert res.cpf == 0.0
        assert res.y_star is None

    def test_all_members_above_climate_max(self):
        climate = climate_grid(np.linspace(0, 100, 101))
        forecast = EmpiricalDistribution(np.linspace(101, 110, 50))
        res = cpf(forecast, climate)
        assert res.cpf == 1.0
        assert res.branch is CrossingBranch.F_ALWAYS_BELOW

    def test_all_members_below_climate_min(self):
        climate = climate_grid(np.linspace(0, 100, 101))
        forecast = EmpiricalDistribution(np.linspace(-20, -10, 50))
        res = cpf(forecast, climate)
        assert res.cpf == 0.0
        assert res.branch is CrossingBranch.F_ALWAYS_ABOVE

    def test_normal_crossing_matches_analytic(self):
        # F ~ N(1, 0.5) against G ~ N(0, 1) crosses at exactly 2
        rng = np.random.default_rng(42)
        forecast = EmpiricalDistribution(rng.normal(1.0, 0.5, 10_000))
        climate = climate_from(rng.normal(0.0, 1.0, 10_000))
        res = cpf(forecast, climate)
        assert res.branch is CrossingBranch.INTERIOR_CROSSING
        assert res.y_star == pytest.approx(2.0, abs=0.15)
        assert res.cpf == pytest.approx(stats.norm.cdf(2.0), abs=0.01)

    def test_point_mass_at_zero_crossing_above_zero(self):
        # forecast drier at zero but concentrated positive mass overtakes
        forecast = EmpiricalDistribution(
            np.concatenate([np.zeros(30), np.linspace(5.0, 6.0, 20)]))
        climate = climate_from(
            np.concatenate([np.zeros(200), np.linspace(1.0, 10.0, 300)]))
        res = cpf(forecast, climate, lower_bound=0.0)
        assert res.branch is CrossingBranch.INTERIOR_CROSSING
        assert res.y_star > 0.0
        want = dense_scan_cpf(forecast, climate.grid, 1e-9, 12.0, lower_bound=0.0)
        assert res.cpf == pytest.approx(want, abs=0.01)

    def test_wrong_direction_crossing_reports_always_below(self):
        # wider forecast: crossing exists only from above to below
        rng = np.random.default_rng(6)
        forecast = EmpiricalDistribution(rng.normal(0.0, 2.0, 2000))
        climate = climate_from(rng.normal(0.0, 1.0, 2000))
        res = cpf(forecast, climate)
        assert res.branch is CrossingBranch.F_ALWAYS_BELOW
        assert res.cpf == 1.0
        assert any(direction == "+-" for _, direction in res.sign_changes)

    def test_interior_crossing_level_consistent_with_grid(self):
        rng = np.random.default_rng(13)
        forecast = EmpiricalDistribution(rng.normal(0.8, 0.5, 500))
        climate = climate_from(rng.normal(0.0, 1.0, 2000))
        res = cpf(forecast, climate)
        assert res.branch is CrossingBranch.INTERIOR_CROSSING
        assert res.cpf == climate.cdf_at(res.y_star)

    def test_convergence_with_sample_size(self):
        want = stats.norm.cdf(2.0)
        errs = []
        for n in (500, 5000, 50_000):
            rng = np.random.default_rng(100 + n)
            forecast = EmpiricalDistribution(rng.normal(1.0, 0.5, n))
            climate = climate_from(rng.normal(0.0, 1.0, n))
            errs.append(abs(cpf(forecast, climate).cpf - want))
        assert errs[2] < errs[0]
        assert errs[2] < 0.005


class TestEfi:
    def test_forecast_equals_climate_is_zero(self):
        thresholds = np.sort(np.random.default_rng(4).normal(size=101))
        climate = climate_grid(thresholds)
        forecast = EmpiricalDistribution(thresholds)
        assert efi(forecast, climate).value == pytest.approx(0.0, abs=1e-9)

    def test_all_members_above_maximum(self):
        climate = climate_grid(np.linspace(0, 100, 101))
        forecast = EmpiricalDistribution(np.linspace(101, 110, 50))
        assert efi(forecast, climate).value == pytest.approx(1.0, abs=1e-9)

    def test_all_members_below_minimum(self):
        climate = climate_grid(np.linspace(0, 100, 101))
        forecast = EmpiricalDistribution(np.linspace(-20, -10, 50))
        assert efi(forecast, climate).value == pytest.approx(-1.0, abs=1e-9)

    def test_matches_quadrature_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(20):
            forecast, climate = random_pair(rng)
            exact = efi(forecast, climate).value
            approx = quadrature_efi(forecast, climate.grid)
            assert exact == pytest.approx(approx, abs=1e-5)

    def test_flat_climate_grid(self):
        # fully dry climate: share of members at or below the constant decides
        climate = climate_grid(np.zeros(101))
        wet = EmpiricalDistribution(np.linspace(1.0, 5.0, 10))
        assert efi(wet, climate).value == pytest.approx(1.0, abs=1e-9)


class TestSot:
    def test_zero_when_forecast_90_hits_climate_99(self):
        climate = climate_grid(_sot_grid())
        forecast = _forecast_with_q90(50.0)
        assert sot(forecast, climate).value == pytest.approx(0.0)

    def test_direct_substitution(self):
        # G(0.99)=50, G(0.90)=30, F(0.90)=60 -> -(50-60)/(50-30) = 0.5
        climate = climate_grid(_sot_grid())
        forecast = _forecast_with_q90(60.0)
        assert climate.quantile(0.99) == 50.0
        assert climate.quantile(0.90) == 30.0
        assert sot(forecast, climate).value == pytest.approx(0.5)

    def test_missing_on_degenerate_tail(self):
        climate = climate_grid(np.zeros(101))
        forecast = EmpiricalDistribution([0.0, 1.0])
        val = sot(forecast, climate)
        assert val.missing and val.value is None

    def test_sign_iff_members_beyond_99th(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            forecast, climate = random_pair(rng, n_members=20)
            val = sot(forecast, climate).value
            gap = forecast.quantile(0.9) - climate.quantile(0.99)
            assert (val > 0) == (gap > 0)


class TestAnf:
    def test_zero_anomaly(self):
        climate = climate_grid(np.linspace(0, 4, 101))
        forecast = EmpiricalDistribution([2.0, 2.0])  # matches climate mean
        assert anf(forecast, climate).value == pytest.approx(0.0)

    def test_direct_substitution(self):
        # mean_F=5, mean_G=2, stddev_G=2, k=1 -> 1.0
        climate = _climate_with_moments(mean=2.0, stddev=2.0)
        forecast = EmpiricalDistribution([4.0, 5.0, 6.0])
        assert anf(forecast, climate, k=1.0).value == pytest.approx(1.0, abs=1e-12)

    def test_temperature_like_unit_shift(self):
        climate = _climate_with_moments(mean=10.0, stddev=3.0)
        forecast = EmpiricalDistribution([13.0, 13.0])  # +1 climate stddev
        assert anf(forecast, climate, k=0.0).value == pytest.approx(1.0, abs=1e-12)

    def test_zero_scale_rejected(self):
        climate = climate_grid(np.full(101, 7.0))
        with pytest.raises(ZeroScale):
            anf(EmpiricalDistribution([1.0]), climate, k=0.0)

    def test_negative_k_rejected(self):
        climate = climate_grid(np.linspace(0, 4, 101))
        with pytest.raises(ValueError):
            anf(EmpiricalDistribution([1.0]), climate, k=-1.0)


def _sot_grid():
    # thresholds with quantile(0.90)=30 and quantile(0.99)=50 exactly
    return np.concatenate([np.linspace(0.0, 30.0, 91),
                           np.linspace(30.0, 50.0, 10)[1:], [55.0]])


def _forecast_with_q90(value):
    # 11 members at positions i/10: quantile(0.9) is the 10th member
    return EmpiricalDistribution(value / 9.0 * np.arange(11))


def _climate_with_moments(mean, stddev):
    z = np.linspace(-1.0, 1.0, 101)
    z = z / np.std(z)
    return climate_grid(mean + stddev * z)


class TestIndexField:
    def test_single_location_wrapper(self):
        rng = np.random.default_rng(3)
        forecast, climate = random_pair(rng)
        field = compute_index_field({"A": forecast}, {"A": climate}, IndexKind.EFI)
        assert field.entries["A"] == efi(forecast, climate)

    def test_empty_maps(self):
        field = compute_index_field({}, {}, IndexKind.CPF)
        assert field.entries == {}

    def test_matches_scalar_calls_on_grid(self):
        rng = np.random.default_rng(19)
        forecasts, climates = {}, {}
        for i in range(100):
            f, c = random_pair(rng, n_members=20, n_climate=150)
            forecasts[f"P{i:02d}"] = f
            climates[f"P{i:02d}"] = c
        for kind in IndexKind:
            field = compute_index_field(forecasts, climates, kind, k=1.0)
            for loc in forecasts:
                assert field.entries[loc] == index_value(
                    kind, forecasts[loc], climates[loc], k=1.0)

    def test_location_mismatch(self):
        rng = np.random.default_rng(3)
        forecast, climate = random_pair(rng)
        with pytest.raises(LocationMismatch):
            compute_index_field({"A": forecast}, {"B": climate}, IndexKind.CPF)

    def test_missing_propagates(self):
        forecast = EmpiricalDistribution([0.0, 1.0])
        climate = climate_grid(np.zeros(101))
        field = compute_index_field({"A": forecast}, {"A": climate}, IndexKind.SOT)
        assert field.entries["A"].missing

    def test_value_bounds_validated(self):
        with pytest.raises(ValueError):
            IndexValue(IndexKind.CPF, 1.5)
        with pytest.raises(ValueError):
            IndexValue(IndexKind.EFI, -2.0)
        with pytest.raises(ValueError):
            IndexValue(IndexKind.SOT, None, missing=False)


class TestProperties:
    def test_bounds_on_random_pairs(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            forecast, climate = random_pair(rng, n_members=20, n_climate=120)
            assert 0.0 <= cpf(forecast, climate).cpf <= 1.0
            assert -1.0 <= efi(forecast, climate).value <= 1.0

    def test_upward_shift_never_decreases_any_index(self):
        rng = np.random.default_rng(55)
        for _ in range(200):
            forecast, climate = random_pair(rng, n_members=20, n_climate=150)
            delta = rng.uniform(0.01, 2.0)
            shifted = EmpiricalDistribution(forecast.values + delta)
            assert cpf(shifted, climate).cpf >= cpf(forecast, climate).cpf
            assert efi(shifted, climate).value >= efi(forecast, climate).value
            assert sot(shifted, climate).value >= sot(forecast, climate).value
            assert anf(shifted, climate).value >= anf(forecast, climate).value

    def test_cpf_invariant_under_monotone_transforms(self):
        rng = np.random.default_rng(66)
        transforms = (np.exp, lambda x: x ** 3 + 2 * x, lambda x: 3.0 * x - 1.0)
        for _ in range(40):
            forecast, climate = random_pair(rng)
            base = cpf(forecast, climate).cpf
            for tf in transforms:
                f2 = EmpiricalDistribution(tf(forecast.values))
                c2 = climate_grid(tf(climate.grid.thresholds))
                assert cpf(f2, c2).cpf == pytest.approx(base, abs=0.01)

    def test_efi_exact_under_affine_and_stable_under_monotone(self):
        rng = np.random.default_rng(88)
        for _ in range(40):
            forecast, climate = random_pair(rng)
            base = efi(forecast, climate).value
            f_aff = EmpiricalDistribution(2.5 * forecast.values + 3.0)
            c_aff = climate_grid(2.5 * climate.grid.thresholds + 3.0)
            assert efi(f_aff, c_aff).value == pytest.approx(base, abs=1e-12)
            f_exp = EmpiricalDistribution(np.exp(forecast.values))
            c_exp = climate_grid(np.exp(climate.grid.thresholds))
            assert efi(f_exp, c_exp).value == pytest.approx(base, abs=0.01)

    def test_efi_stable_under_within_cell_perturbations(self):
        # moving members without crossing any climate threshold can move
        # interpolated jump levels within one grid cell; the total effect
        # is bounded by 2/n
        rng = np.random.default_rng(99)
        for _ in range(25):
            forecast, climate = random_pair(rng)
            thresholds = climate.grid.thresholds
            idx = np.searchsorted(thresholds, forecast.values)
            lo = np.where(idx > 0, thresholds[np.maximum(idx - 1, 0)], forecast.values - 1.0)
            hi = np.where(idx < thresholds.size, thresholds[np.minimum(idx, 100)],
                          forecast.values + 1.0)
            jitter = lo + (forecast.values - lo) * 0.25 + (hi - lo) * rng.uniform(
                0.0, 0.5, forecast.size)
            perturbed = EmpiricalDistribution(np.clip(jitter, lo, hi))
            same_ranks = np.array_equal(
                np.searchsorted(thresholds, perturbed.values, side="left"),
                np.searchsorted(thresholds, forecast.values, side="left"))
            if not same_ranks:
                continue
            diff = abs(efi(perturbed, climate).value - efi(forecast, climate).value)
            assert diff <= 2.0 / forecast.size

    def test_degenerate_consistency(self):
        thresholds = np.sort(np.random.default_rng(12).normal(size=101))
        climate = climate_grid(thresholds)
        assert efi(EmpiricalDistribution(thresholds), climate).value == pytest.approx(
            0.0, abs=1e-9)
        branch = cpf(EmpiricalDistribution(thresholds[1:]), climate).branch
        assert branch is CrossingBranch.DEGENERATE_EQUAL
