"""Verification of index forecasts against observed binary events.

Events are threshold exceedances: an observation counts as an event when
it is strictly greater than a quantile of the local observed climatology
(the event quantile, typically 0.95). Forecasts turn binary by a strict
">" test against a decision threshold. Both comparisons are strict so
contingency tables are reproducible.

The module covers contingency tables, ROC curves and AUC, the
Richardson-style cost-loss economic value, reliability of the
crossing-point index, Kendall rank correlation between index fields,
conditional (stratified) verification, block bootstrap confidence
intervals, and simple histograms of index values.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .climatology import ClimateDistribution, day_of_year
from .errors import (
    BadBins,
    DegenerateSample,
    EmptySample,
    MissingClimate,
    QuantileOrder,
    ReferencePerfect,
    TooFewBlocks,
    TooFewPoints,
)
from .indices import IndexField, IndexKind

#: Decision-threshold presets used on operational charts; ANF has no
#: preset and needs explicit thresholds.
ACTIONABLE_THRESHOLDS = {
    IndexKind.CPF: (0.85, 0.95, 0.98, 0.99, 0.999),
    IndexKind.EFI: (0.3, 0.5, 0.6, 0.7, 0.8, 0.9),
    IndexKind.SOT: (0.0, 1.0, 2.0, 5.0, 8.0),
}

RELIABILITY_BIN_CENTERS = (0.75, 0.80, 0.85, 0.90, 0.95, 0.99)
RELIABILITY_MIN_VALUE = 0.725
# Bin edges at midpoints between centers; the top bin closes at 1.0.
RELIABILITY_BIN_EDGES = (0.725, 0.775, 0.825, 0.875, 0.925, 0.97, 1.0)


class VerificationRecord(NamedTuple):
    location: str
    date: dt.date
    index_value: float | None
    observed: float


@dataclass
class VerificationSample:
    """Paired (index value, observation) records plus the event definition.

    ``obs_climate`` maps ``(location, day_of_year)`` to the observed
    climate distribution used to binarise observations. Records with a
    missing index value are kept in the sample but excluded from tables;
    ``missing_count`` reports how many.
    """

    records: tuple
    event_quantile: float
    obs_climate: dict

    def __post_init__(self):
        if not 0.0 < self.event_quantile < 1.0:
            raise ValueError("event_quantile must be in (0, 1)")
        self.records = tuple(VerificationRecord(*r) for r in self.records)

    @property
    def missing_count(self) -> int:
        return sum(1 for r in self.records if r.index_value is None)

    def climate_for(self, location, date) -> ClimateDistribution:
        key = (location, day_of_year(date))
        try:
            return self.obs_climate[key]
        except KeyError:
            raise MissingClimate(f"no observed climate for {key}") from None


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 counts for one decision threshold."""

    hits: int
    misses: int
    false_alarms: int
    correct_rejections: int

    @property
    def size(self) -> int:
        return self.hits + self.misses + self.false_alarms + self.correct_rejections

    @property
    def hit_rate(self) -> float:
        events = self.hits + self.misses
        if events == 0:
            raise DegenerateSample("hit rate undefined without events")
        return self.hits / events

    @property
    def false_alarm_rate(self) -> float:
        non_events = self.false_alarms + self.correct_rejections
        if non_events == 0:
            raise DegenerateSample("false alarm rate undefined without non-events")
        return self.false_alarms / non_events

    @property
    def base_rate(self) -> float:
        return (self.hits + self.misses) / self.size


@dataclass(frozen=True)
class RocCurve:
    """ROC points ordered from (0,0) to (1,1), with trapezoid AUC.

    ``points`` contains one (false_alarm_rate, hit_rate) pair per decision
    threshold plus the two appended endpoints; ``thresholds`` matches the
    interior points in order.
    """

    points: tuple
    thresholds: tuple
    auc: float


@dataclass(frozen=True)
class PevCurve:
    """Envelope of cost-loss economic value over decision thresholds."""

    cost_loss_ratios: tuple
    values: tuple


@dataclass(frozen=True)
class ReliabilityDiagram:
    """Reliability of the crossing-point index above 0.725.

    ``observed_frequency`` holds, per bin, the share of cases whose
    observation did not exceed the observed-climate quantile at the
    case's own index value, to be compared with the bin center on the
    diagonal; ``case_share`` is each bin's share of all kept cases (the
    top panel of the usual two-panel plot). Empty bins report a count of
    0 and a missing (None) frequency.
    """

    bin_centers: tuple
    bin_counts: tuple
    observed_frequency: tuple
    case_share: tuple


def _pair_arrays(pairs):
    values, events = [], []
    for value, event in pairs:
        values.append(value)
        events.append(bool(event))
    return np.asarray(values, dtype=float), np.asarray(events, dtype=bool)


def binarize(sample: VerificationSample):
    """Pair each usable record's index value with its binary event.

    The event is observed > quantile(observed climate, event quantile),
    strict, so an observation exactly at the threshold is a non-event.
    Records with a missing index value are skipped.
    """
    pairs = []
    for rec in sample.records:
        if rec.index_value is None:
            continue
        clim = sample.climate_for(rec.location, rec.date)
        threshold = clim.quantile(sample.event_quantile)
        pairs.append((rec.index_value, rec.observed > threshold))
    return pairs


def contingency(pairs, decision_threshold: float) -> ContingencyTable:
    """Count hits/misses/false alarms/correct rejections at one threshold.

    Forecast-yes means index value strictly greater than the threshold.
    """
    values, events = _pair_arrays(pairs)
    if values.size == 0:
        raise EmptySample("no pairs to tabulate")
    yes = values > decision_threshold
    return ContingencyTable(
        hits=int(np.sum(yes & events)),
        misses=int(np.sum(~yes & events)),
        false_alarms=int(np.sum(yes & ~events)),
        correct_rejections=int(np.sum(~yes & ~events)),
    )


def threshold_grid(kind: IndexKind, values=None, count: int = 500):
    """Equally spaced decision thresholds spanning the index range.

    CPF spans [0, 1] and EFI [-1, 1]; SOT and ANF are unbounded, so their
    grid spans the min/max of the supplied sample values.
    """
    kind = IndexKind(kind)
    if kind is IndexKind.CPF:
        return np.linspace(0.0, 1.0, count)
    if kind is IndexKind.EFI:
        return np.linspace(-1.0, 1.0, count)
    if values is None:
        raise ValueError(f"{kind.value} threshold grid needs sample values for its range")
    arr = np.asarray(values, dtype=float)
    return np.linspace(float(arr.min()), float(arr.max()), count)


def actionable_thresholds(kind: IndexKind):
    """Fixed chart threshold sets; ANF has none and raises ValueError."""
    kind = IndexKind(kind)
    if kind not in ACTIONABLE_THRESHOLDS:
        raise ValueError("no actionable threshold preset for anf; pass explicit thresholds")
    return ACTIONABLE_THRESHOLDS[kind]


def roc_curve(pairs, thresholds) -> RocCurve:
    """ROC points for the given decision thresholds, with trapezoid AUC.

    One (false alarm rate, hit rate) point per threshold, sorted by false
    alarm rate, with (0,0) and (1,1) appended.
    """
    values, events = _pair_arrays(pairs)
    if values.size == 0:
        raise EmptySample("no pairs for ROC")
    thr = np.asarray(list(thresholds), dtype=float)
    if thr.size == 0:
        raise ValueError("need at least one decision threshold")
    n_event = int(events.sum())
    n_non = int(values.size - n_event)
    if n_event == 0 or n_non == 0:
        raise DegenerateSample("ROC needs both events and non-events")
    order = np.argsort(values, kind="stable")
    v_sorted = values[order]
    cum_events = np.concatenate(([0], np.cumsum(events[order])))
    at_most = np.searchsorted(v_sorted, thr, side="right")
    hits = n_event - cum_events[at_most]
    false_alarms = (values.size - at_most) - hits
    hit_rate = hits / n_event
    far = false_alarms / n_non
    order2 = np.lexsort((hit_rate, far))
    far_all = np.concatenate(([0.0], far[order2], [1.0]))
    hit_all = np.concatenate(([0.0], hit_rate[order2], [1.0]))
    auc = float(np.trapezoid(hit_all, far_all))
    points = tuple(zip(far_all.tolist(), hit_all.tolist()))
    return RocCurve(points=points, thresholds=tuple(thr[order2].tolist()), auc=auc)


def auc_skill_score(auc_test: float, auc_ref: float) -> float:
    """Relative AUC improvement of a test forecast over a reference."""
    if auc_ref >= 1.0:
        raise ReferencePerfect("reference AUC of 1 leaves no room for skill")
    return (auc_test - auc_ref) / (1.0 - auc_ref)


def economic_value(table: ContingencyTable, alpha: float) -> float:
    """Cost-loss economic value of one contingency table at ratio alpha.

    Standard Richardson cost-loss formulation: relative saving of acting
    on the forecast versus acting on climatology alone, 1 for a perfect
    forecast. Requires 0 < alpha < 1 and a sample with both events and
    non-events.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("cost-loss ratio must be in (0, 1)")
    s = table.base_rate
    if s == 0.0 or s == 1.0:
        raise DegenerateSample("economic value undefined when base rate is 0 or 1")
    h = table.hit_rate
    f = table.false_alarm_rate
    numer = min(alpha, s) - f * alpha * (1.0 - s) + h * s * (1.0 - alpha) - s
    denom = min(alpha, s) - s * alpha
    return numer / denom


def pev_curve(tables, alphas) -> PevCurve:
    """Envelope of economic value over tables, per cost-loss ratio.

    All tables must come from the same verification sample (same total
    and event counts).
    """
    tables = list(tables)
    if not tables:
        raise EmptySample("no contingency tables")
    sizes = {t.size for t in tables}
    events = {t.hits + t.misses for t in tables}
    if len(sizes) != 1 or len(events) != 1:
        raise ValueError("tables must all come from the same sample")
    alphas = [float(a) for a in alphas]
    values = tuple(max(economic_value(t, a) for t in tables) for a in alphas)
    return PevCurve(cost_loss_ratios=tuple(alphas), values=values)


def reliability_diagram(cases) -> ReliabilityDiagram:
    """Reliability of crossing-point values above 0.725.

    Parameters
    ----------
    cases : iterable of (index value, observed value, ClimateDistribution)
        One triple per case; the climate is the observed climatology at
        the case's location/day. Values must lie in [0, 1].

    Cases are assigned to the bin with the nearest center. Within a bin,
    the observed frequency is the share of cases whose observation is at
    or below the observed-climate quantile at the case's own index value
    (not the bin center), which keeps the within-bin estimate unbiased;
    the bin center is only the diagonal reference.
    """
    edges = np.asarray(RELIABILITY_BIN_EDGES)
    n_bins = len(RELIABILITY_BIN_CENTERS)
    counts = np.zeros(n_bins, dtype=int)
    below = np.zeros(n_bins, dtype=float)
    total = 0
    for value, observed, clim in cases:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"crossing-point value {value} outside [0, 1]")
        if value <= RELIABILITY_MIN_VALUE:
            continue
        idx = min(int(np.searchsorted(edges, value, side="right")) - 1, n_bins - 1)
        counts[idx] += 1
        total += 1
        if observed <= clim.quantile(value):
            below[idx] += 1.0
    freq = tuple(
        (below[i] / counts[i]) if counts[i] else None for i in range(n_bins)
    )
    share = tuple((counts[i] / total) if total else 0.0 for i in range(n_bins))
    return ReliabilityDiagram(
        bin_centers=RELIABILITY_BIN_CENTERS,
        bin_counts=tuple(int(c) for c in counts),
        observed_frequency=freq,
        case_share=share,
    )


def kendall_tau_arrays(x, y) -> float:
    """Kendall tau-a over paired arrays: (concordant - discordant) / C(n,2).

    Tied pairs in either array contribute zero to the numerator and are
    not corrected for in the denominator (tau-a); index fields of
    continuous variables rarely tie.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2 or y.size != n:
        raise TooFewPoints("kendall tau needs at least 2 shared points")
    iu = np.triu_indices(n, k=1)
    sx = np.sign(x[:, None] - x[None, :])[iu]
    sy = np.sign(y[:, None] - y[None, :])[iu]
    return float(np.sum(sx * sy) / (n * (n - 1) / 2))


def kendall_tau(field_a: IndexField, field_b: IndexField) -> float:
    """Kendall tau-a between two index fields over shared non-missing locations."""
    locs_a, vals_a = field_a.values_array()
    locs_b, vals_b = field_b.values_array()
    shared = sorted(set(locs_a) & set(locs_b))
    if len(shared) < 2:
        raise TooFewPoints("fields share fewer than 2 non-missing locations")
    a = {loc: v for loc, v in zip(locs_a, vals_a)}
    b = {loc: v for loc, v in zip(locs_b, vals_b)}
    return kendall_tau_arrays([a[loc] for loc in shared], [b[loc] for loc in shared])


def kendall_tau_by_date(fields_a, fields_b, pooled: bool = False):
    """Per-date tau between two field sequences, and their average.

    Fields are matched by validity date. With ``pooled=True`` a single
    tau is computed over all (date, location) pairs instead.

    Returns
    -------
    (list of (date, tau), float)
    """
    by_date_a = {f.validity_date: f for f in fields_a}
    by_date_b = {f.validity_date: f for f in fields_b}
    dates = sorted(set(by_date_a) & set(by_date_b))
    if not dates:
        raise TooFewPoints("no shared validity dates")
    if pooled:
        xs, ys = [], []
        for d in dates:
            locs_a, vals_a = by_date_a[d].values_array()
            a = dict(zip(locs_a, vals_a))
            locs_b, vals_b = by_date_b[d].values_array()
            b = dict(zip(locs_b, vals_b))
            for loc in sorted(set(a) & set(b)):
                xs.append(a[loc])
                ys.append(b[loc])
        tau = kendall_tau_arrays(xs, ys)
        return [(d, tau) for d in dates], tau
    per_date = [(d, kendall_tau(by_date_a[d], by_date_b[d])) for d in dates]
    mean_tau = float(np.mean([t for _, t in per_date]))
    return per_date, mean_tau


def conditional_filter(sample: VerificationSample,
                       condition_quantile: float) -> VerificationSample:
    """Restrict the sample to cases above a weaker climate quantile.

    Keeps records whose observation strictly exceeds the observed-climate
    quantile at ``condition_quantile``; the event definition (the sample's
    event quantile) is unchanged. The condition must be weaker than the
    event, so every event case survives.
    """
    if condition_quantile >= sample.event_quantile:
        raise QuantileOrder("condition quantile must lie below the event quantile")
    kept = []
    for rec in sample.records:
        clim = sample.climate_for(rec.location, rec.date)
        if rec.observed > clim.quantile(condition_quantile):
            kept.append(rec)
    return replace(sample, records=tuple(kept))


def block_bootstrap_ci(sample: VerificationSample,
                       statistic: Callable[[VerificationSample], float],
                       block_days: int = 5, replicates: int = 1000,
                       levels=(0.05, 0.95), seed: int = 0):
    """Block-bootstrap confidence interval of a sample statistic.

    The sample's date range is partitioned into consecutive blocks of
    ``block_days`` days; each replicate redraws the original number of
    blocks with replacement and recomputes the statistic on the
    concatenated records. Replicate i draws from a generator seeded with
    the pair (seed, i), so replicates are independent of each other and
    the interval is deterministic under a fixed seed (and safe to fan
    out). Replicates where the statistic comes back NaN (e.g. a resample
    with no events) are dropped.

    Returns
    -------
    (low, high) : float pair at the requested percentile levels.
    """
    if block_days < 1:
        raise ValueError("block_days must be >= 1")
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    if not sample.records:
        raise EmptySample("no records to bootstrap")
    dates = [r.date for r in sample.records]
    start, end = min(dates), max(dates)
    n_blocks = (end - start).days // block_days + 1
    if n_blocks < 2:
        raise TooFewBlocks(f"date range spans only {n_blocks} block(s) of {block_days} days")
    groups = [[] for _ in range(n_blocks)]
    for rec in sample.records:
        groups[(rec.date - start).days // block_days].append(rec)
    stats = np.empty(replicates, dtype=float)
    for i in range(replicates):
        rng = np.random.default_rng([seed, i])
        draw = rng.integers(0, n_blocks, size=n_blocks)
        records = tuple(rec for b in draw for rec in groups[b])
        stats[i] = statistic(replace(sample, records=records))
    stats = stats[~np.isnan(stats)]
    if stats.size == 0:
        return (float("nan"), float("nan"))
    lo, hi = np.quantile(stats, list(levels))
    return float(lo), float(hi)


def index_histogram(values, bin_edges):
    """Counts of non-missing values per half-open bin; last bin closed.

    Values outside the edges are not counted.
    """
    edges = np.asarray(list(bin_edges), dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise BadBins("bin edges must be strictly increasing")
    data = np.asarray([v for v in values if v is not None], dtype=float)
    counts, _ = np.histogram(data, bins=edges)
    return counts


def build_verification_sample(fields, observations, obs_climate,
                              event_quantile: float = 0.95) -> VerificationSample:
    """Assemble a sample from index fields and an observation lookup.

    Parameters
    ----------
    fields : iterable of IndexField
        One field per validity date (a single kind and lead time).
    observations : dict
        Maps (location, date) to the observed value.
    obs_climate : dict
        Maps (location, day_of_year) to the observed ClimateDistribution.
    """
    records = []
    for fld in sorted(fields, key=lambda f: f.validity_date):
        for loc in sorted(fld.entries):
            val = fld.entries[loc]
            obs = observations[(loc, fld.validity_date)]
            records.append(VerificationRecord(
                loc, fld.validity_date,
                None if val.missing else val.value, float(obs)))
    return VerificationSample(tuple(records), event_quantile, dict(obs_climate))
