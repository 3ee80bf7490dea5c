"""Glue between datasets, index fields, and verification samples.

These helpers run the standard experiment: build model climates from the
reforecast archive and observed climates from the observation archive
(cached per location and day-of-year), compute an index field per
validity date, and pair fields with observations into a verification
sample. Used by the command line and by dataset-level experiments.
"""

from __future__ import annotations

import numpy as np

from .climatology import build_climate, day_of_year
from .errors import DegenerateSample
from .indices import compute_index_field
from .verification import (
    VerificationSample,
    actionable_thresholds,
    auc_skill_score,
    build_verification_sample,
    roc_curve,
    threshold_grid,
)


class ClimateCache:
    """Per-(location, day-of-year) climate builds over one archive."""

    def __init__(self, archive, window_days=14):
        self.archive = archive
        self.window_days = window_days
        self._cache = {}

    def get(self, location, date):
        key = (location, day_of_year(date))
        if key not in self._cache:
            self._cache[key] = build_climate(
                self.archive, location, date, self.window_days)
        return self._cache[key]

    def mapping_for(self, locations, date):
        return {loc: self.get(loc, date) for loc in locations}


def compute_fields(forecast_maps, climates: ClimateCache, kind, k=1.0,
                   lower_bound=None, lead_time_days=0):
    """One IndexField per (date -> forecast map) entry, sorted by date."""
    fields = []
    for date in sorted(forecast_maps):
        fmap = forecast_maps[date]
        cmap = climates.mapping_for(sorted(fmap), date)
        fields.append(compute_index_field(
            fmap, cmap, kind, k=k, lower_bound=lower_bound,
            validity_date=date, lead_time_days=lead_time_days))
    return fields


def sample_from_fields(fields, observations, obs_climates: ClimateCache,
                       event_quantile=0.95) -> VerificationSample:
    """Pair index fields with observations into a verification sample."""
    keys = {(loc, f.validity_date) for f in fields for loc in f.entries}
    obs_map = {}
    clim_map = {}
    for loc, date in keys:
        obs_map[(loc, date)] = observations[(loc, date)]
        clim_map[(loc, day_of_year(date))] = obs_climates.get(loc, date)
    return build_verification_sample(fields, obs_map, clim_map, event_quantile)


def event_lookup(sample: VerificationSample) -> dict:
    """(location, date) -> binary event, precomputed once for bootstrapping."""
    events = {}
    for rec in sample.records:
        key = (rec.location, rec.date)
        if key not in events:
            threshold = sample.climate_for(rec.location, rec.date).quantile(
                sample.event_quantile)
            events[key] = rec.observed > threshold
    return events


def make_auc_statistic(thresholds, events: dict, values: dict | None = None):
    """Statistic sample -> AUC, resample-safe for the block bootstrap.

    ``events`` maps (location, date) to the precomputed binary event.
    With ``values`` given, the index value is also looked up per record
    key instead of read from the record (used to evaluate a second index
    on the same resampled records). Returns NaN on degenerate resamples.
    """

    def statistic(sample):
        pairs = []
        for rec in sample.records:
            key = (rec.location, rec.date)
            value = values[key] if values is not None else rec.index_value
            if value is None:
                continue
            pairs.append((value, events[key]))
        try:
            return roc_curve(pairs, statistic.thresholds).auc
        except DegenerateSample:
            return float("nan")

    statistic.thresholds = np.asarray(list(thresholds), dtype=float)
    return statistic


def make_skill_statistic(thresholds_test, thresholds_ref, events: dict,
                         values_test: dict, values_ref: dict):
    """Statistic sample -> AUC skill score of a test index over a reference.

    Both indices are evaluated on the same resampled records via
    per-(location, date) value lookups.
    """
    stat_test = make_auc_statistic(thresholds_test, events, values_test)
    stat_ref = make_auc_statistic(thresholds_ref, events, values_ref)

    def statistic(sample):
        auc_test = stat_test(sample)
        auc_ref = stat_ref(sample)
        if np.isnan(auc_test) or np.isnan(auc_ref) or auc_ref >= 1.0:
            return float("nan")
        return auc_skill_score(auc_test, auc_ref)

    return statistic


def field_values(fields) -> dict:
    """(location, date) -> value (None when missing) over a field list."""
    out = {}
    for f in fields:
        for loc, val in f.entries.items():
            out[(loc, f.validity_date)] = None if val.missing else val.value
    return out


def resolve_thresholds(spec: str, kind, sample_values=None):
    """Threshold list from a CLI spec: 'grid500', 'actionable', or comma floats."""
    if spec == "grid500":
        return threshold_grid(kind, values=sample_values, count=500)
    if spec == "actionable":
        return np.asarray(actionable_thresholds(kind), dtype=float)
    return np.asarray([float(tok) for tok in spec.split(",") if tok], dtype=float)
