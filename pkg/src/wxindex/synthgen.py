"""Synthetic truth, forecasts, and archives with known distributions.

The generator builds, per location, a daily standard-normal signal with
first-order autoregressive memory. For each lead time a noisy analysis of
that signal is drawn with correlation a (the predictable fraction for the
lead), and truth and ensemble members are exchangeable draws from the
same conditional law N(a * analysis, 1 - a^2). Predictable fractions
shrink with lead time, so spread grows and skill decays with lead, while
the marginal (climate) distribution stays standard normal. Dispersion and
bias knobs break this calibration on demand.

The precipitation-like mode pushes every value through one monotone map
that clumps the lower tail onto an exact zero (with the configured dry
probability) and stretches the rest onto a gamma distribution, so climate
quantiles below the dry probability are exactly zero and indices exercise
their bounded-variable paths.

Reforecasts (climate-only members, run on a twice-weekly cycle over the
archive years) and a long observation history are included so that model
and observed climatologies can be built with the usual +/-2-week window.

Everything is seeded: one fixed seed reproduces the full dataset bit for
bit, location by location.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .climatology import ReforecastArchive
from .distributions import EmpiricalDistribution
from .errors import BadConfig, NoQualifyingCrossing

_VARIABLES = ("gaussian", "gamma-precip")


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of one synthetic experiment."""

    locations: int = 20
    start_date: dt.date = dt.date(2021, 6, 1)
    days: int = 30
    ensemble_size: int = 50
    reforecast_members: int = 10
    reforecast_runs_per_week: int = 2
    reforecast_years: int = 20
    obs_history_years: int = 20
    lead_times: tuple = (1, 3, 6)
    predictable_fraction: tuple | None = None  # default: exp(-0.1 * lead)
    dispersion: tuple | float = 1.0            # per-lead spread multiplier
    bias: tuple | float = 0.0                  # per-lead additive member bias
    variable: str = "gaussian"
    dry_probability: float = 0.35              # gamma-precip only
    gamma_shape: float = 2.0
    gamma_scale: float = 5.0
    autocorrelation: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if self.locations < 1 or self.days < 1:
            raise BadConfig("need at least one location and one day")
        if self.ensemble_size < 2:
            raise BadConfig("ensemble_size must be >= 2")
        if self.reforecast_members < 1 or self.reforecast_runs_per_week < 1:
            raise BadConfig("reforecast members and runs per week must be positive")
        if self.reforecast_years < 1 or self.obs_history_years < 0:
            raise BadConfig("archive years must be positive")
        if not self.lead_times or any(l < 0 for l in self.lead_times):
            raise BadConfig("lead times must be non-negative")
        if not 0.0 < self.autocorrelation < 1.0:
            raise BadConfig("autocorrelation must be in (0, 1)")
        if self.variable not in _VARIABLES:
            raise BadConfig(f"variable must be one of {_VARIABLES}")
        if not 0.0 <= self.dry_probability < 1.0:
            raise BadConfig("dry_probability must be in [0, 1)")
        if self.gamma_shape <= 0 or self.gamma_scale <= 0:
            raise BadConfig("gamma parameters must be positive")
        object.__setattr__(self, "lead_times", tuple(int(l) for l in self.lead_times))
        object.__setattr__(self, "predictable_fraction",
                           self._per_lead(self.predictable_fraction, None))
        object.__setattr__(self, "dispersion", self._per_lead(self.dispersion, 1.0))
        object.__setattr__(self, "bias", self._per_lead(self.bias, 0.0))
        for a in self.predictable_fraction:
            if not 0.0 < a < 1.0:
                raise BadConfig("predictable fractions must be in (0, 1)")
        for d in self.dispersion:
            if d <= 0:
                raise BadConfig("dispersion multipliers must be positive")

    def _per_lead(self, value, default):
        n = len(self.lead_times)
        if value is None:
            return tuple(float(np.exp(-0.1 * l)) for l in self.lead_times)
        if np.isscalar(value):
            return (float(value),) * n
        value = tuple(float(v) for v in value)
        if len(value) != n:
            raise BadConfig("per-lead parameter length must match lead_times")
        return value

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if "start_date" in raw:
            raw["start_date"] = dt.date.fromisoformat(raw["start_date"])
        for key in ("lead_times", "predictable_fraction", "dispersion", "bias"):
            if key in raw and isinstance(raw[key], list):
                raw[key] = tuple(raw[key])
        try:
            return cls(**raw)
        except TypeError as exc:
            raise BadConfig(str(exc)) from None


@dataclass
class SyntheticDataset:
    """Arrays and archives of one generated scenario."""

    config: ScenarioConfig
    locations: tuple
    dates: tuple
    truth: np.ndarray                 # (n_locations, n_days)
    members: dict = field(default_factory=dict)  # lead -> (n_loc, n_days, M)
    reforecasts: ReforecastArchive = None
    observations: ReforecastArchive = None

    def forecast_distribution(self, location, date, lead) -> EmpiricalDistribution:
        i = self.locations.index(location)
        j = self.dates.index(date)
        return EmpiricalDistribution(self.members[lead][i, j, :])

    def forecast_map(self, date, lead) -> dict:
        """location -> EmpiricalDistribution for one validity date and lead."""
        j = self.dates.index(date)
        return {
            loc: EmpiricalDistribution(self.members[lead][i, j, :])
            for i, loc in enumerate(self.locations)
        }

    def observed_value(self, location, date) -> float:
        i = self.locations.index(location)
        return float(self.truth[i, self.dates.index(date)])


def _value_transform(config):
    """Monotone map from the standard-normal scale to the variable scale."""
    if config.variable == "gaussian":
        return lambda z: z
    p0 = config.dry_probability
    gamma = stats.gamma(config.gamma_shape, scale=config.gamma_scale)

    def transform(z):
        u = stats.norm.cdf(z)
        out = np.zeros_like(np.asarray(z, dtype=float))
        wet = u > p0
        out[wet] = gamma.ppf((u[wet] - p0) / (1.0 - p0))
        return out

    return transform


def _reforecast_dates(config):
    """Run dates over the archive years: fixed weekday pattern, twice weekly."""
    runs = []
    first = config.start_date - dt.timedelta(days=365 * config.reforecast_years)
    offsets = np.linspace(0, 7, config.reforecast_runs_per_week, endpoint=False)
    weekly = sorted({int(round(o)) for o in offsets})
    d = first
    while d < config.start_date:
        if d.toordinal() % 7 in weekly:
            runs.append(d)
        d += dt.timedelta(days=1)
    return runs


def generate(config: ScenarioConfig) -> SyntheticDataset:
    """Generate the full dataset of one scenario. Deterministic per seed."""
    transform = _value_transform(config)
    locations = tuple(f"L{i:03d}" for i in range(config.locations))
    dates = tuple(config.start_date + dt.timedelta(days=j) for j in range(config.days))
    history_days = 365 * config.obs_history_years
    run_dates = _reforecast_dates(config)

    truth = np.empty((config.locations, config.days))
    members = {
        lead: np.empty((config.locations, config.days, config.ensemble_size))
        for lead in config.lead_times
    }
    obs_records = []
    refc_records = []
    phi = config.autocorrelation
    for i in range(config.locations):
        rng = np.random.default_rng([config.seed, i])
        # one AR(1) path across history and forecast range
        shocks = rng.standard_normal(history_days + config.days)
        z = np.empty_like(shocks)
        z[0] = shocks[0]
        for t in range(1, z.size):
            z[t] = phi * z[t - 1] + np.sqrt(1.0 - phi * phi) * shocks[t]
        z_range = z[history_days:]
        for lead, a, disp, bias in zip(config.lead_times, config.predictable_fraction,
                                       config.dispersion, config.bias):
            noise = np.sqrt(1.0 - a * a)
            analysis = a * z_range + noise * rng.standard_normal(config.days)
            eps = rng.standard_normal((config.days, config.ensemble_size))
            members[lead][i] = transform(
                a * analysis[:, None] + bias + disp * noise * eps)
        refc_values = transform(
            rng.standard_normal((len(run_dates), config.reforecast_members)))
        truth[i] = transform(z_range)
        obs_values = transform(z)
        first_obs = config.start_date - dt.timedelta(days=history_days)
        obs_records.extend(
            (locations[i], first_obs + dt.timedelta(days=t), (float(obs_values[t]),))
            for t in range(obs_values.size)
        )
        refc_records.extend(
            (locations[i], run_dates[r], tuple(refc_values[r]))
            for r in range(len(run_dates))
        )
    return SyntheticDataset(
        config=config,
        locations=locations,
        dates=dates,
        truth=truth,
        members=members,
        reforecasts=ReforecastArchive(
            refc_records,
            members_per_run=config.reforecast_members,
            years_covered=config.reforecast_years,
        ),
        observations=ReforecastArchive(obs_records, members_per_run=1,
                                       years_covered=config.obs_history_years),
    )


def _analytic_pair(family, params_f, params_g):
    if family == "normal":
        dist_f = stats.norm(*params_f)
        dist_g = stats.norm(*params_g)
        lo = min(dist_f.ppf(1e-9), dist_g.ppf(1e-9))
        hi = max(dist_f.ppf(1.0 - 1e-9), dist_g.ppf(1.0 - 1e-9))
    elif family == "gamma":
        dist_f = stats.gamma(params_f[0], scale=params_f[1])
        dist_g = stats.gamma(params_g[0], scale=params_g[1])
        lo = 1e-12
        hi = max(dist_f.ppf(1.0 - 1e-9), dist_g.ppf(1.0 - 1e-9))
    else:
        raise ValueError(f"unknown family {family!r}")
    return dist_f, dist_g, lo, hi


def analytic_crossing_point(family, params_f, params_g, grid_size=20001):
    """Crossing location of two analytic CDFs, solved by bisection.

    The qualifying crossing has the forecast CDF below the climate CDF on
    its left and above on its right. Raises NoQualifyingCrossing when the
    dense-grid sign pattern shows no such transition while both signs
    occur (crossing only in the opposite direction), or when further sign
    changes follow the first crossing.
    """
    dist_f, dist_g, lo, hi = _analytic_pair(family, params_f, params_g)
    xs = np.linspace(lo, hi, grid_size)
    diff = dist_f.cdf(xs) - dist_g.cdf(xs)
    tol = 1e-12
    pos = diff > tol
    neg = diff < -tol
    if not pos.any() or not neg.any():
        raise NoQualifyingCrossing("CDFs do not cross in the interior")
    first_neg = int(np.argmax(neg))
    after = pos & (np.arange(grid_size) > first_neg)
    if not after.any():
        raise NoQualifyingCrossing("CDF difference never turns positive after being negative")
    j = int(np.argmax(after))
    if neg[j:].any():
        raise NoQualifyingCrossing("multiple crossings: sign changes again after the crossing")
    k = j - int(np.argmax(neg[:j][::-1])) - 1  # last negative point before j
    root = optimize.brentq(lambda x: dist_f.cdf(x) - dist_g.cdf(x), xs[k], xs[j],
                           xtol=1e-13, rtol=1e-14)
    return float(root)


def analytic_cpf_oracle(family, params_f, params_g) -> float:
    """Climate probability level at the analytic CDF crossing.

    Mirrors the conventions of the empirical index for pairs without an
    interior crossing: identical distributions give 0, a forecast CDF
    below the climate CDF everywhere gives 1, above everywhere gives 0.
    """
    dist_f, dist_g, lo, hi = _analytic_pair(family, params_f, params_g)
    xs = np.linspace(lo, hi, 20001)
    diff = dist_f.cdf(xs) - dist_g.cdf(xs)
    tol = 1e-12
    if np.max(np.abs(diff)) <= tol:
        return 0.0
    if not (diff > tol).any():
        return 1.0
    if not (diff < -tol).any():
        return 0.0
    y_star = analytic_crossing_point(family, params_f, params_g)
    return float(dist_g.cdf(y_star))
