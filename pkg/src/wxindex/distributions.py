"""Empirical distributions, percentile grids, and moments.

Conventions used throughout the package:

* The empirical CDF is the right-continuous step function
  ``count(values <= x) / n``; ties count inclusively, so the sample
  maximum maps to probability 1.
* Quantiles interpolate linearly between order statistics placed at
  plotting positions ``i / (n - 1)``; level 0 returns the sample minimum
  and level 1 the sample maximum.
* Standard deviations are population values (divide by n), so results
  are bit-reproducible without sample-size conventions.
* Percentile grids carry exactly 101 thresholds at 1% level spacing;
  their moments are computed over the 101 thresholds, which is an
  approximation to the moments of the pooled raw sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySample, LevelOutOfRange, NonFinite, TooFewSamples

#: Levels of the standard percentile grid: 0.00, 0.01, ..., 1.00.
#: Built by division so that levels[i] == i/100 exactly in floating point.
PERCENTILE_LEVELS = np.arange(101) / 100.0
PERCENTILE_LEVELS.setflags(write=False)


def _check_levels(level):
    lv = np.asarray(level, dtype=float)
    if np.any(lv < 0.0) or np.any(lv > 1.0) or not np.all(np.isfinite(lv)):
        raise LevelOutOfRange(f"probability level must be in [0, 1], got {level!r}")
    return lv


class EmpiricalDistribution:
    """One-dimensional sample-backed distribution.

    Parameters
    ----------
    samples : array_like
        Sample values in physical units. Must be non-empty and finite;
        a sorted copy is stored.
    """

    __slots__ = ("values", "size")

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=float).reshape(-1)
        if arr.size == 0:
            raise EmptySample("need at least one sample value")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("sample values must be finite")
        values = np.sort(arr)
        values.setflags(write=False)
        self.values = values
        self.size = int(arr.size)

    def __repr__(self):
        return f"EmpiricalDistribution(size={self.size})"

    def cdf_at(self, x):
        """Fraction of sample values <= x (right-continuous step CDF)."""
        xq = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(xq)):
            raise NonFinite("CDF evaluation point must be finite")
        out = np.searchsorted(self.values, xq, side="right") / self.size
        return float(out) if xq.ndim == 0 else out

    def quantile(self, level):
        """Quantile by linear interpolation between order statistics."""
        lv = _check_levels(level)
        if self.size == 1:
            out = np.full(lv.shape, self.values[0])
        else:
            # arange/(n-1) rather than linspace: positions then coincide
            # bitwise with the percentile levels, keeping node lookups exact
            pos = np.arange(self.size) / (self.size - 1)
            out = np.interp(lv, pos, self.values)
        return float(out) if lv.ndim == 0 else out

    def mean_stddev(self):
        """Sample mean and population (divide-by-n) standard deviation."""
        return float(np.mean(self.values)), float(np.std(self.values))


@dataclass(frozen=True)
class PercentileGrid:
    """101-point quantile representation of a distribution.

    ``thresholds[i]`` is the value at probability level ``levels[i]``;
    levels run from 0.00 to 1.00 in 1% steps.
    """

    thresholds: np.ndarray
    levels: np.ndarray = field(default_factory=lambda: PERCENTILE_LEVELS)

    def __post_init__(self):
        thr = np.asarray(self.thresholds, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if thr.shape != (101,) or lv.shape != (101,):
            raise ValueError("percentile grid needs exactly 101 levels and thresholds")
        if np.any(np.diff(thr) < 0):
            raise ValueError("thresholds must be non-decreasing")
        if np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be strictly increasing")
        if not np.all(np.isfinite(thr)):
            raise NonFinite("thresholds must be finite")
        thr = thr.copy()
        thr.setflags(write=False)
        object.__setattr__(self, "thresholds", thr)
        object.__setattr__(self, "levels", lv)

    def quantile(self, level):
        """Linear interpolation between the bracketing percentile thresholds."""
        lv = _check_levels(level)
        out = np.interp(lv, self.levels, self.thresholds)
        return float(out) if lv.ndim == 0 else out

    def cdf_at(self, x):
        """Probability level of ``x`` by inverse interpolation on the grid.

        Right-continuous on flat threshold runs: at a value shared by
        several percentiles (a point mass) the highest level is returned.
        """
        xq = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(xq)):
            raise NonFinite("CDF evaluation point must be finite")
        t, lv = self.thresholds, self.levels
        j = np.atleast_1d(np.searchsorted(t, xq, side="right"))
        out = np.empty(j.shape, dtype=float)
        out[j == 0] = 0.0
        out[j == t.size] = 1.0
        inner = (j > 0) & (j < t.size)
        if np.any(inner):
            ji = j[inner]
            x_in = np.atleast_1d(xq)[inner]
            t0, t1 = t[ji - 1], t[ji]
            out[inner] = lv[ji - 1] + (lv[ji] - lv[ji - 1]) * (x_in - t0) / (t1 - t0)
        return float(out[0]) if xq.ndim == 0 else out.reshape(xq.shape)

    def mean_stddev(self):
        """Mean and population standard deviation over the 101 thresholds."""
        return float(np.mean(self.thresholds)), float(np.std(self.thresholds))


def to_percentile_grid(dist: EmpiricalDistribution) -> PercentileGrid:
    """Reduce a sample-backed distribution to the standard 101-point grid."""
    if dist.size < 2:
        raise TooFewSamples("percentile grid needs at least 2 samples")
    return PercentileGrid(thresholds=dist.quantile(PERCENTILE_LEVELS))
