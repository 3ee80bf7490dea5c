"""Synthetic scenario generation and the analytic crossing oracle."""

import datetime as dt

import numpy as np
import pytest
from scipy import stats

from wxindex.climatology import build_climate
from wxindex.errors import BadConfig, NoQualifyingCrossing
from wxindex.synthgen import (
    ScenarioConfig,
    analytic_cpf_oracle,
    analytic_crossing_point,
    generate,
)

SMALL = dict(locations=20, days=30, obs_history_years=1, reforecast_years=2)


class TestConfig:
    def test_defaults_valid(self):
        cfg = ScenarioConfig()
        assert cfg.ensemble_size == 50
        assert cfg.reforecast_members == 10
        assert cfg.reforecast_runs_per_week == 2
        assert cfg.reforecast_years == 20
        assert len(cfg.predictable_fraction) == len(cfg.lead_times)

    def test_predictable_fraction_decays_with_lead(self):
        cfg = ScenarioConfig(lead_times=(1, 3, 6))
        a = cfg.predictable_fraction
        assert a[0] > a[1] > a[2]

    @pytest.mark.parametrize("kwargs", [
        dict(ensemble_size=1),
        dict(lead_times=()),
        dict(autocorrelation=1.5),
        dict(variable="snow"),
        dict(dry_probability=1.0),
        dict(dispersion=(1.0,)),  # wrong length for 3 leads
        dict(predictable_fraction=(1.2, 0.5, 0.3)),
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(BadConfig):
            ScenarioConfig(**kwargs)

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"locations": 3, "days": 5, "lead_times": [2], "seed": 7,'
                        ' "start_date": "2021-07-01"}')
        cfg = ScenarioConfig.from_json(path)
        assert cfg.locations == 3
        assert cfg.start_date == dt.date(2021, 7, 1)
        assert cfg.lead_times == (2,)

    def test_json_unknown_key(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"bogus": 1}')
        with pytest.raises(BadConfig):
            ScenarioConfig.from_json(path)


class TestGenerate:
    def test_rank_histogram_uniform_when_calibrated(self):
        cfg = ScenarioConfig(locations=100, days=100, lead_times=(1,), seed=5,
                             obs_history_years=1, reforecast_years=1)
        ds = generate(cfg)
        members = ds.members[1]
        ranks = 1 + np.sum(members < ds.truth[:, :, None], axis=2).ravel()
        counts = np.bincount(ranks, minlength=cfg.ensemble_size + 2)[1:]
        assert ranks.size == 10_000
        assert stats.chisquare(counts).pvalue > 0.01

    def test_spread_grows_with_lead(self):
        ds = generate(ScenarioConfig(lead_times=(1, 6), seed=5, **SMALL))
        assert ds.members[6].std(axis=2).mean() > ds.members[1].std(axis=2).mean()

    def test_fixed_seed_reproduces_everything(self):
        cfg = ScenarioConfig(lead_times=(1, 6), seed=12, **SMALL)
        a, b = generate(cfg), generate(cfg)
        assert np.array_equal(a.truth, b.truth)
        for lead in (1, 6):
            assert np.array_equal(a.members[lead], b.members[lead])
        assert a.reforecasts.records == b.reforecasts.records
        assert a.observations.records == b.observations.records

    def test_bias_and_dispersion_break_calibration(self):
        base = generate(ScenarioConfig(lead_times=(1,), seed=3, **SMALL))
        biased = generate(ScenarioConfig(lead_times=(1,), seed=3, bias=0.5, **SMALL))
        wide = generate(ScenarioConfig(lead_times=(1,), seed=3, dispersion=2.0, **SMALL))
        assert biased.members[1].mean() > base.members[1].mean() + 0.3
        assert wide.members[1].std(axis=2).mean() > 1.5 * base.members[1].std(axis=2).mean()

    def test_gamma_mode_point_mass(self):
        cfg = ScenarioConfig(lead_times=(1,), variable="gamma-precip",
                             dry_probability=0.35, seed=9, locations=30, days=40,
                             obs_history_years=1, reforecast_years=2)
        ds = generate(cfg)
        assert np.mean(ds.members[1] == 0.0) == pytest.approx(0.35, abs=0.02)
        assert np.mean(ds.truth == 0.0) == pytest.approx(0.35, abs=0.03)
        assert ds.members[1].min() == 0.0

    def test_gamma_climate_quantiles_zero_below_dry_probability(self):
        cfg = ScenarioConfig(lead_times=(1,), variable="gamma-precip",
                             dry_probability=0.40, seed=2, locations=2, days=3,
                             obs_history_years=1, reforecast_years=3)
        ds = generate(cfg)
        clim = build_climate(ds.reforecasts, ds.locations[0], ds.dates[0], 14)
        assert clim.grid.thresholds[30] == 0.0
        assert clim.grid.quantile(0.35) == 0.0
        assert clim.grid.thresholds[60] > 0.0

    def test_observation_archive_covers_history(self):
        cfg = ScenarioConfig(lead_times=(1,), seed=4, locations=2, days=5,
                             obs_history_years=1, reforecast_years=1)
        ds = generate(cfg)
        dates = [d for _, d, _ in ds.observations.records]
        assert min(dates) == cfg.start_date - dt.timedelta(days=365)
        assert max(dates) == ds.dates[-1]
        # in-range observations equal the truth series
        assert ds.observed_value(ds.locations[0], ds.dates[0]) == ds.truth[0, 0]

    def test_reforecast_layout(self):
        cfg = ScenarioConfig(lead_times=(1,), seed=4, locations=2, days=5,
                             obs_history_years=1, reforecast_years=2)
        ds = generate(cfg)
        assert ds.reforecasts.members_per_run == 10
        assert all(len(v) == 10 for _, _, v in ds.reforecasts.records)
        per_loc = len(ds.reforecasts.records) / len(ds.locations)
        assert per_loc == pytest.approx(2 * 52 * 2, rel=0.1)  # twice weekly, 2 years


class TestAnalyticOracle:
    def test_canonical_normal_crossing(self):
        y = analytic_crossing_point("normal", (1.0, 0.5), (0.0, 1.0))
        assert y == pytest.approx(2.0, abs=1e-9)
        cpf = analytic_cpf_oracle("normal", (1.0, 0.5), (0.0, 1.0))
        assert cpf == pytest.approx(stats.norm.cdf(2.0), abs=1e-9)

    def test_identical_distributions_degenerate(self):
        assert analytic_cpf_oracle("normal", (0.0, 1.0), (0.0, 1.0)) == 0.0

    def test_stochastically_dominant_gamma_is_always_below(self):
        # Gamma(3, 2) lies above Gamma(2, 2): CDF below everywhere
        got = analytic_cpf_oracle("gamma", (3.0, 2.0), (2.0, 2.0))
        assert got == 1.0

    def test_gamma_matches_dense_grid_scan(self):
        # independent dense-grid classification of the same analytic CDFs
        dist_f = stats.gamma(3.0, scale=2.0)
        dist_g = stats.gamma(2.0, scale=2.0)
        xs = np.linspace(1e-9, 60.0, 2_000_001)
        diff = dist_f.cdf(xs) - dist_g.cdf(xs)
        negatives = np.nonzero(diff < -1e-12)[0]
        brute = 1.0 if negatives[-1] >= xs.size - 2 or not (
            diff[negatives[-1]:] > 1e-12).any() else dist_g.cdf(xs[negatives[-1] + 1])
        assert analytic_cpf_oracle("gamma", (3.0, 2.0), (2.0, 2.0)) == pytest.approx(
            brute, abs=1e-6)

    def test_wrong_direction_rejected(self):
        # wider forecast: only a downward crossing exists
        with pytest.raises(NoQualifyingCrossing):
            analytic_crossing_point("normal", (0.0, 2.0), (0.0, 1.0))

    def test_interior_gamma_crossing(self):
        got = analytic_cpf_oracle("gamma", (8.0, 0.8), (2.0, 2.0))
        dist_f = stats.gamma(8.0, scale=0.8)
        dist_g = stats.gamma(2.0, scale=2.0)
        xs = np.linspace(1e-9, 80.0, 2_000_001)
        diff = dist_f.cdf(xs) - dist_g.cdf(xs)
        j = np.nonzero(diff < -1e-12)[0][-1]
        assert got == pytest.approx(dist_g.cdf(xs[j + 1]), abs=1e-6)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            analytic_cpf_oracle("weibull", (1.0, 1.0), (2.0, 1.0))
