"""Dataset file formats: ensemble/observation CSV tables and the manifest.

All interchange is CSV, UTF-8, ISO-8601 dates, floats as shortest
round-trip decimal text. Ensemble, reforecast, and observation tables
share one layout::

    location,validity_date,lead_days,member_index,value

sorted by (location, validity_date, lead_days, member_index).
Observations use member_index 0. Rewriting parsed rows reproduces the
file byte for byte.

A dataset manifest (JSON) names the variable kind, units, locations,
date range, ensemble size, lead times, and the three table files with
their expected row counts.
"""

from __future__ import annotations

import datetime as dt
import json
import os
from dataclasses import asdict, dataclass

from .climatology import ReforecastArchive
from .distributions import EmpiricalDistribution
from .errors import ManifestMismatch, ParseError

ENSEMBLE_COLUMNS = ("location", "validity_date", "lead_days", "member_index", "value")
FORMAT_VERSION = 1


class EnsembleRow(tuple):
    """Row of an ensemble table: (location, date, lead_days, member_index, value)."""

    __slots__ = ()

    def __new__(cls, location, validity_date, lead_days, member_index, value):
        return super().__new__(cls, (location, validity_date, int(lead_days),
                                     int(member_index), float(value)))

    location = property(lambda self: self[0])
    validity_date = property(lambda self: self[1])
    lead_days = property(lambda self: self[2])
    member_index = property(lambda self: self[3])
    value = property(lambda self: self[4])


def write_ensemble_table(path, rows):
    """Write rows (sorted) to a CSV ensemble table."""
    ordered = sorted(rows, key=lambda r: (r[0], r[1], r[2], r[3]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(ENSEMBLE_COLUMNS) + "\n")
        for loc, d, lead, member, value in ordered:
            fh.write(f"{loc},{d.isoformat()},{lead},{member},{value!r}\n")


def read_ensemble_table(path):
    """Parse a CSV ensemble table into a list of EnsembleRow."""
    rows = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if tuple(line.split(",")) != ENSEMBLE_COLUMNS:
                    raise ParseError(f"unexpected header {line!r}", line=lineno)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ParseError(f"expected 5 fields, got {len(parts)}", line=lineno)
            try:
                rows.append(EnsembleRow(
                    parts[0], dt.date.fromisoformat(parts[1]),
                    int(parts[2]), int(parts[3]), float(parts[4])))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    return rows


def rows_to_archive(rows, members_per_run=None, years_covered=None) -> ReforecastArchive:
    """Group table rows into (location, date, members) archive records."""
    grouped = {}
    for row in rows:
        grouped.setdefault((row.location, row.validity_date), []).append(
            (row.member_index, row.value))
    records = []
    for (loc, d), members in sorted(grouped.items()):
        members.sort()
        records.append((loc, d, tuple(v for _, v in members)))
    return ReforecastArchive(records, members_per_run=members_per_run,
                             years_covered=years_covered)


def archive_to_rows(archive, lead_days=0, first_member=1):
    """Flatten archive records back into table rows.

    Observations conventionally use ``first_member=0``.
    """
    rows = []
    for loc, d, values in archive.records:
        for m, v in enumerate(values, start=first_member):
            rows.append(EnsembleRow(loc, d, lead_days, m, v))
    return rows


def forecast_rows_to_distributions(rows, lead):
    """(location, date) -> EmpiricalDistribution for one lead time."""
    grouped = {}
    for row in rows:
        if row.lead_days != lead:
            continue
        grouped.setdefault((row.location, row.validity_date), []).append(
            (row.member_index, row.value))
    out = {}
    for key, members in grouped.items():
        members.sort()
        out[key] = EmpiricalDistribution([v for _, v in members])
    return out


@dataclass
class DatasetManifest:
    """Description of one dataset's files and shape."""

    variable: str
    units: str
    locations: list
    start_date: dt.date
    end_date: dt.date
    ensemble_size: int
    lead_times: list
    files: dict        # name -> relative path, names: forecasts/reforecasts/observations
    row_counts: dict   # name -> expected data-row count
    format_version: int = FORMAT_VERSION
    base_dir: str = "."

    def path(self, name):
        return os.path.join(self.base_dir, self.files[name])


def write_manifest(path, manifest: DatasetManifest):
    payload = asdict(manifest)
    payload.pop("base_dir")
    payload["start_date"] = manifest.start_date.isoformat()
    payload["end_date"] = manifest.end_date.isoformat()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path, check=True) -> DatasetManifest:
    """Load a manifest and verify its files exist with matching row counts."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    raw["start_date"] = dt.date.fromisoformat(raw["start_date"])
    raw["end_date"] = dt.date.fromisoformat(raw["end_date"])
    manifest = DatasetManifest(base_dir=os.path.dirname(os.path.abspath(path)), **raw)
    if manifest.format_version != FORMAT_VERSION:
        raise ManifestMismatch(f"unsupported format version {manifest.format_version}")
    if check:
        for name in manifest.files:
            table = manifest.path(name)
            if not os.path.exists(table):
                raise ManifestMismatch(f"{name} table missing: {table}")
            count = _data_row_count(table)
            expected = manifest.row_counts.get(name)
            if expected is not None and count != expected:
                raise ManifestMismatch(
                    f"{name} table has {count} rows, manifest says {expected}")
    return manifest


def _data_row_count(path):
    count = 0
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if i == 1 or not line.strip() or line.startswith("#"):
                continue
            count += 1
    return count


def write_result_csv(path, columns, rows, invocation, comments=()):
    """Write a result CSV: invocation comment, extra comments, header, rows.

    Cells are written as-is for strings, ISO format for dates, shortest
    round-trip text for floats, empty for None.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# command: {invocation}\n")
        for comment in comments:
            fh.write(f"# {comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(c) for c in row) + "\n")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dt.date):
        return value.isoformat()
    return str(value)
