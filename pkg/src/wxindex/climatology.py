"""Local climate distributions from reforecast or observation archives.

A climate distribution is local in both space and time: it belongs to one
location and one day of the year. It pools every archive value whose
validity day-of-year lies within ``+/- window_days`` of the target day,
ignoring the year and wrapping across the December/January boundary.
February 29 is folded onto February 28, so days-of-year run 1..365.
All pooled member values are weighted equally.

The same operation builds observed climatologies from an observation
archive (one value per record), which verification uses to turn
observations into binary events.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .distributions import EmpiricalDistribution, PercentileGrid, to_percentile_grid
from .errors import InsufficientClimate, LevelOutOfRange, UnknownLocation

DAYS_PER_YEAR = 365


def day_of_year(d: dt.date) -> int:
    """Day of year in 1..365, with Feb 29 mapped onto Feb 28."""
    doy = d.timetuple().tm_yday
    if d.year % 4 == 0 and (d.year % 100 != 0 or d.year % 400 == 0):
        if (d.month, d.day) == (2, 29):
            return 59
        if d.month > 2:
            return doy - 1
    return doy


def doy_distance(a: int, b: int) -> int:
    """Circular distance between two days of year on a 365-day wheel."""
    d = abs(a - b) % DAYS_PER_YEAR
    return min(d, DAYS_PER_YEAR - d)


class ReforecastArchive:
    """Archive of (location, validity date, member values) records.

    Also used for observation archives, where each record carries a
    single value. Records are immutable after construction; a flat
    per-location view (day-of-year, value) is built lazily for fast
    window pooling.
    """

    def __init__(self, records, members_per_run=None, years_covered=None):
        self.records = tuple(
            (loc, d, tuple(float(v) for v in values)) for loc, d, values in records
        )
        for loc, d, values in self.records:
            if len(values) < 1:
                raise ValueError(f"record for {loc} on {d} has no member values")
        self.members_per_run = members_per_run
        self.years_covered = years_covered
        self._flat_cache = {}

    @property
    def locations(self):
        return sorted({loc for loc, _, _ in self.records})

    def _flat(self, location):
        """Per-location arrays of (doy, value), one row per member value."""
        if location not in self._flat_cache:
            doys, vals = [], []
            for loc, d, values in self.records:
                if loc != location:
                    continue
                doy = day_of_year(d)
                doys.extend([doy] * len(values))
                vals.extend(values)
            if not vals:
                raise UnknownLocation(f"no archive records for location {location!r}")
            self._flat_cache[location] = (
                np.asarray(doys, dtype=int),
                np.asarray(vals, dtype=float),
            )
        return self._flat_cache[location]


@dataclass(frozen=True)
class ClimateDistribution:
    """Percentile-grid climate with its moments for one location/day.

    ``mean`` and ``stddev`` are computed over the grid thresholds (the
    climate object keeps no raw samples), population convention.
    """

    grid: PercentileGrid
    mean: float
    stddev: float
    location: str
    day_of_year: int
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 2:
            raise InsufficientClimate("climate needs at least 2 pooled values")
        if self.stddev < 0:
            raise ValueError("stddev must be non-negative")

    @classmethod
    def from_grid(cls, grid, location="", day_of_year=1, sample_count=101):
        mean, stddev = grid.mean_stddev()
        return cls(grid, mean, stddev, location, day_of_year, sample_count)

    @classmethod
    def from_samples(cls, samples, location="", day_of_year=1):
        dist = EmpiricalDistribution(samples)
        out = cls.from_grid(to_percentile_grid(dist), location, day_of_year)
        return cls(out.grid, out.mean, out.stddev, location, day_of_year, dist.size)

    def quantile(self, level):
        return self.grid.quantile(level)

    def cdf_at(self, x):
        return self.grid.cdf_at(x)


def build_climate(archive, location, validity_date, window_days=14):
    """Pool archive values around the validity day-of-year into a climate.

    Parameters
    ----------
    archive : ReforecastArchive
        Reforecast or observation archive.
    location : str
        Location identifier; must exist in the archive.
    validity_date : datetime.date
        Date whose day-of-year anchors the window.
    window_days : int
        Half-width of the pooling window in days (0 keeps only records
        on the exact day-of-year).

    Returns
    -------
    ClimateDistribution
    """
    if window_days < 0:
        raise ValueError("window_days must be >= 0")
    doys, values = archive._flat(location)
    target = day_of_year(validity_date)
    dist = np.abs(doys - target) % DAYS_PER_YEAR
    dist = np.minimum(dist, DAYS_PER_YEAR - dist)
    pooled = values[dist <= window_days]
    if pooled.size < 2:
        raise InsufficientClimate(
            f"only {pooled.size} archive value(s) within +/-{window_days} days "
            f"of day {target} at {location!r}"
        )
    grid = to_percentile_grid(EmpiricalDistribution(pooled))
    mean, stddev = grid.mean_stddev()
    return ClimateDistribution(
        grid=grid,
        mean=mean,
        stddev=stddev,
        location=location,
        day_of_year=target,
        sample_count=int(pooled.size),
    )


def return_period(q: float) -> float:
    """Return period in years of the event at climate quantile level ``q``.

    A day-of-year climatology makes 1/(1-q) an annual recurrence
    interval: q=0.95 maps to 20 years, q=0.99 to 100 years.
    """
    if not 0.0 <= q < 1.0:
        raise LevelOutOfRange(f"quantile level must be in [0, 1), got {q!r}")
    return 1.0 / (1.0 - q)
