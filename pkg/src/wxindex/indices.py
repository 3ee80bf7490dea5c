"""Ensemble summary indices comparing a forecast with its local climate.

Four indices are computed from a forecast distribution (ensemble members)
and a climate distribution (101-point percentile grid):

cpf
    Crossing-point forecast: the climate probability level at the point
    where the forecast CDF overtakes the climate CDF from below. Reported
    as a level in [0, 1], not as a physical value; translate levels back
    into physical units with ``ClimateDistribution.quantile`` and into
    return periods with ``climatology.return_period``.
efi
    Extreme forecast index: tail-weighted integral of the gap between
    climate probability levels and the share of members below each
    climate percentile; range [-1, 1].
sot
    Shift of tails (upper tail): gap between the forecast 90% quantile
    and the climate 99% quantile, normalised by the climate 99%-90%
    spread. Positive once at least 10% of members exceed the climate
    99th percentile.
anf
    Anomaly forecast: ensemble-mean anomaly from the climate mean,
    standardised by the climate standard deviation plus a stabiliser k
    (k=1 for precipitation-like variables, 0 for temperature-like ones).

The crossing scan compares member counts against percentile-threshold
counts, so the crossing location depends only on the ranks of the merged
values; the reported level is then read off the grid by inverse
interpolation, which resolves finer than the 1% grid spacing.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .climatology import ClimateDistribution
from .distributions import EmpiricalDistribution
from .errors import LocationMismatch, ZeroScale


class IndexKind(str, Enum):
    CPF = "cpf"
    EFI = "efi"
    SOT = "sot"
    ANF = "anf"


class CrossingBranch(str, Enum):
    INTERIOR_CROSSING = "interior_crossing"
    F_ALWAYS_ABOVE = "f_always_above"
    F_ALWAYS_BELOW = "f_always_below"
    DEGENERATE_EQUAL = "degenerate_equal"


_BOUNDS = {IndexKind.CPF: (0.0, 1.0), IndexKind.EFI: (-1.0, 1.0)}


@dataclass(frozen=True)
class IndexValue:
    """A single index value, or a missing marker."""

    kind: IndexKind
    value: float | None
    missing: bool = False

    def __post_init__(self):
        if self.missing:
            if self.value is not None:
                raise ValueError("missing index value must carry no number")
            return
        if self.value is None or not np.isfinite(self.value):
            raise ValueError(f"{self.kind.value} value must be finite")
        bounds = _BOUNDS.get(self.kind)
        if bounds and not bounds[0] <= self.value <= bounds[1]:
            raise ValueError(f"{self.kind.value} value {self.value} outside {bounds}")


@dataclass(frozen=True)
class CrossingResult:
    """Outcome of the forecast/climate CDF crossing scan.

    ``sign_changes`` lists every sign change of forecast-minus-climate
    along the scan as (location, direction) with direction "-+" or "+-",
    for diagnostics; the reported crossing is the first "-+" one.
    """

    y_star: float | None
    cpf: float
    branch: CrossingBranch
    sign_changes: tuple = ()

    def as_index_value(self) -> IndexValue:
        return IndexValue(IndexKind.CPF, self.cpf)


@dataclass(frozen=True)
class IndexField:
    """Per-location values of one index for one validity date and lead."""

    kind: IndexKind
    validity_date: dt.date | None
    lead_time_days: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lead_time_days < 0:
            raise ValueError("lead_time_days must be >= 0")
        for loc, val in self.entries.items():
            if val.kind is not self.kind:
                raise ValueError(f"entry {loc!r} has kind {val.kind}, field is {self.kind}")

    def values_array(self):
        """Non-missing values and their locations, in sorted location order."""
        locs = sorted(loc for loc, v in self.entries.items() if not v.missing)
        return locs, np.asarray([self.entries[loc].value for loc in locs], dtype=float)


def _sign_changes(points, diffs):
    nz = diffs != 0.0
    if not nz.any():
        return ()
    signs = np.sign(diffs[nz])
    xs = points[nz]
    flips = np.nonzero(signs[1:] != signs[:-1])[0]
    return tuple(
        (float(xs[i + 1]), "-+" if signs[i + 1] > 0 else "+-") for i in flips
    )


def cpf(forecast: EmpiricalDistribution, climate: ClimateDistribution,
        lower_bound: float | None = None) -> CrossingResult:
    """Scan the merged support for the forecast/climate CDF crossing.

    The difference D(x) = F(x) - G(x) is evaluated on the sorted union of
    the forecast members and the climate percentile thresholds, with F
    the counting CDF of the members and G the inverse-interpolated level
    on the percentile grid. For variables bounded below (e.g.
    precipitation) pass ``lower_bound`` to restrict the scan to
    x > lower_bound, skipping the shared point mass at the bound.

    The crossing point y* is where D turns non-negative for good: the
    supremum of the region with D < 0, i.e. the most extreme value whose
    forecast exceedance risk still exceeds the climate risk. Between scan
    points F is flat while G rises, so D can dip below zero just before a
    point even when non-negative at the points themselves; the scan
    therefore also checks the left limit of D at each point, which makes
    y* exact and the reported level monotone under upward member shifts.
    When noisy empirical CDFs cross several times this resolves to the
    last upward crossing. The result is the climate level at y*.

    With no crossing: D >= 0 everywhere gives 0 (forecast CDF always
    above the climate CDF), D identically zero is the degenerate branch
    with value 0, and a D < 0 region reaching the top of the merged
    support gives 1 (forecast below the climate beyond its last sign
    change, covering both an everywhere-below forecast and a crossing
    that exists only in the opposite direction; the sign-change list
    records the latter).
    """
    grid = climate.grid
    points = np.union1d(forecast.values, grid.thresholds)
    if lower_bound is not None:
        points = points[points > lower_bound]
    if points.size == 0:
        return CrossingResult(None, 0.0, CrossingBranch.DEGENERATE_EQUAL)
    g = grid.cdf_at(points)
    d = np.searchsorted(forecast.values, points, side="right") / forecast.size - g
    d_pre = np.searchsorted(forecast.values, points, side="left") / forecast.size - g
    changes = _sign_changes(points, d)
    if not d.any():
        # CDFs agree exactly at every member and threshold: no excess risk
        return CrossingResult(None, 0.0, CrossingBranch.DEGENERATE_EQUAL, changes)
    below = (d < 0) | (d_pre < 0)
    if not below.any():
        return CrossingResult(None, 0.0, CrossingBranch.F_ALWAYS_ABOVE, changes)
    j = points.size - 1 - int(np.argmax(below[::-1]))
    if d[j] < 0:
        j += 1  # the dip is still open at the point itself; it closes at the next one
    if j >= points.size - 1:
        return CrossingResult(None, 1.0, CrossingBranch.F_ALWAYS_BELOW, changes)
    y_star = float(points[j])
    return CrossingResult(y_star, float(g[j]), CrossingBranch.INTERIOR_CROSSING, changes)


def _first_level_reaching(grid, x):
    """Smallest level p with grid.quantile(p) >= x, vectorised.

    These are the jump locations of p -> cdf_at(forecast, quantile(grid, p)).
    Values above the grid maximum map to 1, values at or below the
    minimum to 0.
    """
    t, lv = grid.thresholds, grid.levels
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    i = np.searchsorted(t, xq, side="left")
    out = np.empty(xq.shape, dtype=float)
    out[i == 0] = 0.0
    out[i == t.size] = 1.0
    inner = (i > 0) & (i < t.size)
    if np.any(inner):
        ii = i[inner]
        x_in = xq[inner]
        out[inner] = lv[ii - 1] + (lv[ii] - lv[ii - 1]) * (x_in - t[ii - 1]) / (t[ii] - t[ii - 1])
    return out


def efi(forecast: EmpiricalDistribution, climate: ClimateDistribution) -> IndexValue:
    """Tail-weighted integral of p minus the member share below level p.

    Let step(p) be the share of members at or below the climate quantile
    at level p. step is piecewise constant between the levels where the
    interpolated climate quantile crosses a member value, so the weighted
    integral of (p - step(p)) / sqrt(p (1 - p)) is evaluated exactly on
    each constant piece with the antiderivatives

        A(p) = arcsin(sqrt(p)) - sqrt(p (1 - p))   for the p term,
        B(p) = 2 arcsin(sqrt(p))                   for the constant term.

    The weight is integrably singular at 0 and 1, which naive quadrature
    handles poorly; the closed form is exact. The result is scaled by
    2/pi and clamped to [-1, 1] against round-off.
    """
    grid = climate.grid
    jumps = _first_level_reaching(grid, forecast.values)
    pts = np.unique(np.concatenate((jumps, (0.0, 1.0))))
    mids = 0.5 * (pts[:-1] + pts[1:])
    step_vals = forecast.cdf_at(grid.quantile(mids))
    anti_a = np.arcsin(np.sqrt(pts)) - np.sqrt(pts * (1.0 - pts))
    anti_b = 2.0 * np.arcsin(np.sqrt(pts))
    total = np.sum(np.diff(anti_a) - step_vals * np.diff(anti_b))
    value = float(np.clip(total * 2.0 / np.pi, -1.0, 1.0))
    return IndexValue(IndexKind.EFI, value)


def sot(forecast: EmpiricalDistribution, climate: ClimateDistribution) -> IndexValue:
    """Upper-tail shift: -(G(0.99) - F(0.90)) / (G(0.99) - G(0.90)).

    Returns a missing value when the climate 99% and 90% quantiles
    coincide (zero denominator, e.g. a fully dry climate tail).
    """
    g99 = climate.quantile(0.99)
    g90 = climate.quantile(0.90)
    denom = g99 - g90
    if denom == 0.0:
        return IndexValue(IndexKind.SOT, None, missing=True)
    f90 = forecast.quantile(0.90)
    return IndexValue(IndexKind.SOT, float(-(g99 - f90) / denom))


def anf(forecast: EmpiricalDistribution, climate: ClimateDistribution,
        k: float = 1.0) -> IndexValue:
    """Standardised ensemble-mean anomaly (mean_F - mean_G) / (stddev_G + k)."""
    if k < 0:
        raise ValueError("stabiliser k must be >= 0")
    scale = climate.stddev + k
    if scale <= 0.0:
        raise ZeroScale("climate stddev plus k must be positive")
    mean_f, _ = forecast.mean_stddev()
    return IndexValue(IndexKind.ANF, float((mean_f - climate.mean) / scale))


def index_value(kind: IndexKind, forecast, climate, k=1.0, lower_bound=None) -> IndexValue:
    """Compute one index value; dispatch on kind."""
    kind = IndexKind(kind)
    if kind is IndexKind.CPF:
        return cpf(forecast, climate, lower_bound=lower_bound).as_index_value()
    if kind is IndexKind.EFI:
        return efi(forecast, climate)
    if kind is IndexKind.SOT:
        return sot(forecast, climate)
    return anf(forecast, climate, k=k)


def compute_index_field(forecasts: dict, climates: dict, kind: IndexKind,
                        k: float = 1.0, lower_bound: float | None = None,
                        validity_date: dt.date | None = None,
                        lead_time_days: int = 0) -> IndexField:
    """Apply one index at every location of matching forecast/climate maps.

    Missing values (e.g. SOT on a degenerate climate tail) propagate into
    the field entries.
    """
    if set(forecasts) != set(climates):
        raise LocationMismatch("forecast and climate maps cover different locations")
    entries = {
        loc: index_value(kind, forecasts[loc], climates[loc], k=k, lower_bound=lower_bound)
        for loc in sorted(forecasts)
    }
    return IndexField(IndexKind(kind), validity_date, lead_time_days, entries)
