"""Command line: synthetic datasets, climatologies, index fields, reports.

Every subcommand reads a dataset manifest (except ``synth``, which writes
one), emits CSV results carrying the exact invocation as a comment line,
and optionally renders a matplotlib figure next to the CSV. Reruns with
identical inputs, flags, and seeds reproduce outputs byte for byte. On
failure, partially written outputs are removed and a single
machine-parsable error line goes to stderr.
"""

from __future__ import annotations

import os

import click
import numpy as np

from . import pipeline
from .climatology import build_climate
from .errors import WxIndexError
from .indices import IndexKind
from .io_tables import (
    DatasetManifest,
    EnsembleRow,
    archive_to_rows,
    forecast_rows_to_distributions,
    load_manifest,
    read_ensemble_table,
    rows_to_archive,
    write_ensemble_table,
    write_manifest,
    write_result_csv,
)
from .synthgen import ScenarioConfig, generate
from .verification import (
    binarize,
    block_bootstrap_ci,
    conditional_filter,
    index_histogram,
    kendall_tau_by_date,
    pev_curve,
    reliability_diagram,
    contingency,
    roc_curve,
    auc_skill_score,
)

_KINDS = click.Choice([k.value for k in IndexKind])


class _Outputs:
    """Tracks files written by one invocation so failures leave no partials."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.paths = []

    def path(self, name):
        os.makedirs(self.out_dir, exist_ok=True)
        p = os.path.join(self.out_dir, name)
        self.paths.append(p)
        return p

    def cleanup(self):
        for p in self.paths:
            if os.path.exists(p):
                os.remove(p)


def _invocation(ctx):
    flags = {}
    for param in ctx.command.params:
        long_opts = [o for o in param.opts if o.startswith("--")]
        if long_opts:
            flags[param.name] = long_opts[0]
    parts = [ctx.command_path]
    for key in sorted(ctx.params):
        value = ctx.params[key]
        if value is None or value is False:
            continue
        flag = flags.get(key, "--" + key.replace("_", "-"))
        if value is True:
            parts.append(flag)
        elif isinstance(value, tuple):
            parts.extend(f"{flag} {v}" for v in value)
        else:
            parts.append(f"{flag} {value}")
    return " ".join(parts)


def _guard(ctx, outputs, func):
    try:
        func()
    except (WxIndexError, OSError, ValueError, KeyError) as exc:
        outputs.cleanup()
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        ctx.exit(1)


def _load_tables(manifest_path):
    manifest = load_manifest(manifest_path)
    forecast_rows = read_ensemble_table(manifest.path("forecasts"))
    reforecasts = rows_to_archive(read_ensemble_table(manifest.path("reforecasts")))
    obs_rows = read_ensemble_table(manifest.path("observations"))
    obs_archive = rows_to_archive(obs_rows)
    observations = {(r.location, r.validity_date): r.value for r in obs_rows}
    return manifest, forecast_rows, reforecasts, obs_archive, observations


def _effective_lower_bound(spec, manifest):
    if spec == "auto":
        return 0.0 if manifest.variable == "gamma-precip" else None
    if spec == "none":
        return None
    return float(spec)


def _fields(manifest, forecast_rows, reforecasts, kind, lead, window_days, k, lower_bound):
    dists = forecast_rows_to_distributions(forecast_rows, lead)
    if not dists:
        raise ValueError(f"no forecast rows at lead {lead}")
    maps = {}
    for (loc, date), dist in dists.items():
        maps.setdefault(date, {})[loc] = dist
    cache = pipeline.ClimateCache(reforecasts, window_days)
    return pipeline.compute_fields(maps, cache, kind, k=k,
                                   lower_bound=lower_bound, lead_time_days=lead)


def _sample(manifest, forecast_rows, reforecasts, obs_archive, observations,
            kind, lead, window_days, k, lower_bound, event_quantile):
    fields = _fields(manifest, forecast_rows, reforecasts, kind, lead,
                     window_days, k, lower_bound)
    obs_cache = pipeline.ClimateCache(obs_archive, window_days)
    sample = pipeline.sample_from_fields(fields, observations, obs_cache, event_quantile)
    return fields, sample


@click.group(name="wxindex")
def main():
    """Ensemble high-impact-weather indices and their verification."""


@main.command()
@click.option("--config", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True)
@click.pass_context
def synth(ctx, config, out):
    """Generate a synthetic dataset and write tables plus a manifest."""
    outputs = _Outputs(out)

    def run():
        scenario = ScenarioConfig.from_json(config)
        ds = generate(scenario)
        forecast_rows = [
            EnsembleRow(loc, date, lead, m + 1, ds.members[lead][i, j, m])
            for lead in scenario.lead_times
            for i, loc in enumerate(ds.locations)
            for j, date in enumerate(ds.dates)
            for m in range(scenario.ensemble_size)
        ]
        write_ensemble_table(outputs.path("forecasts.csv"), forecast_rows)
        write_ensemble_table(outputs.path("reforecasts.csv"),
                             archive_to_rows(ds.reforecasts, first_member=1))
        obs_rows = archive_to_rows(ds.observations, first_member=0)
        write_ensemble_table(outputs.path("observations.csv"), obs_rows)
        manifest = DatasetManifest(
            variable=scenario.variable,
            units="mm/day" if scenario.variable == "gamma-precip" else "sigma",
            locations=list(ds.locations),
            start_date=ds.dates[0],
            end_date=ds.dates[-1],
            ensemble_size=scenario.ensemble_size,
            lead_times=list(scenario.lead_times),
            files={"forecasts": "forecasts.csv", "reforecasts": "reforecasts.csv",
                   "observations": "observations.csv"},
            row_counts={"forecasts": len(forecast_rows),
                        "reforecasts": sum(len(v) for _, _, v in ds.reforecasts.records),
                        "observations": len(obs_rows)},
        )
        write_manifest(outputs.path("manifest.json"), manifest)
        click.echo(f"wrote dataset to {out}")

    _guard(ctx, outputs, run)


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--window-days", default=14, show_default=True)
@click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True)
@click.pass_context
def climatology(ctx, manifest_path, window_days, out):
    """Build model-climate percentile grids for every location and date."""
    outputs = _Outputs(out)

    def run():
        manifest, forecast_rows, reforecasts, _, _ = _load_tables(manifest_path)
        dates = sorted({r.validity_date for r in forecast_rows})
        grid_rows, moment_rows = [], []
        for loc in manifest.locations:
            for date in dates:
                clim = build_climate(reforecasts, loc, date, window_days)
                grid_rows.extend(
                    (loc, date, repr(float(lv)), thr)
                    for lv, thr in zip(clim.grid.levels, clim.grid.thresholds))
                moment_rows.append(
                    (loc, date, clim.mean, clim.stddev, clim.sample_count))
        inv = _invocation(ctx)
        write_result_csv(outputs.path("climate_percentiles.csv"),
                         ("location", "validity_date", "level", "threshold"),
                         grid_rows, inv)
        write_result_csv(outputs.path("climate_moments.csv"),
                         ("location", "validity_date", "mean", "stddev", "sample_count"),
                         moment_rows, inv)
        click.echo(f"wrote climatology for {len(manifest.locations)} locations")

    _guard(ctx, outputs, run)


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--kind", required=True, type=_KINDS)
@click.option("--lead", required=True, type=int)
@click.option("--k", default=1.0, show_default=True)
@click.option("--lower-bound", default="auto", show_default=True,
              help="Scan floor for cpf: 'auto' (0 for precipitation-like data), "
                   "'none', or a number.")
@click.option("--window-days", default=14, show_default=True)
@click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True)
@click.pass_context
def index(ctx, manifest_path, kind, lead, k, lower_bound, window_days, out):
    """Compute one index field per validity date and write it as CSV."""
    outputs = _Outputs(out)

    def run():
        manifest, forecast_rows, reforecasts, _, _ = _load_tables(manifest_path)
        fields = _fields(manifest, forecast_rows, reforecasts, IndexKind(kind), lead,
                         window_days, k, _effective_lower_bound(lower_bound, manifest))
        rows = []
        for fld in fields:
            for loc in sorted(fld.entries):
                val = fld.entries[loc]
                rows.append((kind, loc, fld.validity_date, lead,
                             None if val.missing else val.value))
        write_result_csv(outputs.path(f"index_{kind}_lead{lead}.csv"),
                         ("kind", "location", "validity_date", "lead_days", "value"),
                         rows, _invocation(ctx))
        click.echo(f"wrote {len(rows)} index values")

    _guard(ctx, outputs, run)


@main.group()
def verify():
    """Verification reports against observed events."""


_verify_common = [
    click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True)),
    click.option("--kind", default="cpf", type=_KINDS, show_default=True),
    click.option("--lead", required=True, type=int),
    click.option("--event-quantile", default=0.95, show_default=True),
    click.option("--window-days", default=14, show_default=True),
    click.option("--k", default=1.0, show_default=True),
    click.option("--lower-bound", default="auto", show_default=True),
    click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True),
    click.option("--plot", is_flag=True, help="Render an SVG figure next to the CSV."),
]


def _with_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@verify.command()
@_with_options(_verify_common)
@click.option("--thresholds", default="grid500", show_default=True,
              help="'grid500', 'actionable', or a comma-separated list.")
@click.option("--condition-quantile", default=None, type=float,
              help="Keep only cases above this observed-climate quantile.")
@click.pass_context
def roc(ctx, manifest_path, kind, lead, event_quantile, window_days, k,
        lower_bound, out, plot, thresholds, condition_quantile):
    """ROC points and AUC for one index at one lead time."""
    outputs = _Outputs(out)

    def run():
        manifest, *tables = _load_tables(manifest_path)
        _, sample = _sample(manifest, *tables, IndexKind(kind), lead, window_days,
                            k, _effective_lower_bound(lower_bound, manifest),
                            event_quantile)
        if condition_quantile is not None:
            sample = conditional_filter(sample, condition_quantile)
        pairs = binarize(sample)
        values = [v for v, _ in pairs]
        thr = pipeline.resolve_thresholds(thresholds, IndexKind(kind), values)
        curve = roc_curve(pairs, thr)
        rows = [(t, p[0], p[1]) for t, p in zip(curve.thresholds, curve.points[1:-1])]
        name = f"roc_{kind}_lead{lead}"
        write_result_csv(outputs.path(name + ".csv"),
                         ("threshold", "false_alarm_rate", "hit_rate"), rows,
                         _invocation(ctx),
                         comments=[f"auc = {curve.auc!r}", f"pairs = {len(pairs)}",
                                   f"missing = {sample.missing_count}"])
        if plot:
            from . import plots
            plots.save_roc_plot(outputs.path(name + ".svg"),
                                [(kind, curve)], title=f"{kind} lead {lead}d")
        click.echo(f"auc = {curve.auc:.4f}")

    _guard(ctx, outputs, run)


@verify.command()
@_with_options(_verify_common)
@click.option("--thresholds", default="grid500", show_default=True)
@click.option("--alphas", default="log", show_default=True,
              help="'log' for a log-spaced grid, or a comma-separated list; "
                   "the sample base rate is always included.")
@click.pass_context
def pev(ctx, manifest_path, kind, lead, event_quantile, window_days, k,
        lower_bound, out, plot, thresholds, alphas):
    """Potential economic value envelope over decision thresholds."""
    outputs = _Outputs(out)

    def run():
        manifest, *tables = _load_tables(manifest_path)
        _, sample = _sample(manifest, *tables, IndexKind(kind), lead, window_days,
                            k, _effective_lower_bound(lower_bound, manifest),
                            event_quantile)
        pairs = binarize(sample)
        values = [v for v, _ in pairs]
        thr = pipeline.resolve_thresholds(thresholds, IndexKind(kind), values)
        contingency_tables = [contingency(pairs, t) for t in thr]
        base_rate = contingency_tables[0].base_rate
        if alphas == "log":
            grid = np.logspace(-3.0, 0.0, 51)[:-1]
        else:
            grid = np.asarray([float(tok) for tok in alphas.split(",") if tok])
        grid = np.unique(np.append(grid, base_rate))
        curve = pev_curve(contingency_tables, grid)
        name = f"pev_{kind}_lead{lead}"
        write_result_csv(outputs.path(name + ".csv"),
                         ("cost_loss_ratio", "value"),
                         list(zip(curve.cost_loss_ratios, curve.values)),
                         _invocation(ctx), comments=[f"base_rate = {base_rate!r}"])
        if plot:
            from . import plots
            plots.save_pev_plot(outputs.path(name + ".svg"), [(kind, curve)],
                                base_rate=base_rate,
                                title=f"{kind} economic value, lead {lead}d")
        click.echo(f"max value = {max(curve.values):.4f} at base rate {base_rate:.4f}")

    _guard(ctx, outputs, run)


@verify.command()
@_with_options(_verify_common)
@click.pass_context
def reliability(ctx, manifest_path, kind, lead, event_quantile, window_days, k,
                lower_bound, out, plot):
    """Reliability diagram of the crossing-point index above 0.725."""
    outputs = _Outputs(out)

    def run():
        if IndexKind(kind) is not IndexKind.CPF:
            raise ValueError("reliability is defined for the cpf index")
        manifest, *tables = _load_tables(manifest_path)
        fields, sample = _sample(manifest, *tables, IndexKind.CPF, lead, window_days,
                                 k, _effective_lower_bound(lower_bound, manifest),
                                 event_quantile)
        cases = [
            (rec.index_value, rec.observed, sample.climate_for(rec.location, rec.date))
            for rec in sample.records if rec.index_value is not None
        ]
        diagram = reliability_diagram(cases)
        rows = list(zip(diagram.bin_centers, diagram.bin_counts,
                        diagram.case_share, diagram.observed_frequency))
        name = f"reliability_lead{lead}"
        write_result_csv(outputs.path(name + ".csv"),
                         ("bin_center", "count", "case_share", "observed_frequency"),
                         rows, _invocation(ctx))
        if plot:
            from . import plots
            plots.save_reliability_plot(outputs.path(name + ".svg"), diagram,
                                        title=f"cpf reliability, lead {lead}d")
        click.echo(f"kept cases: {sum(diagram.bin_counts)}")

    _guard(ctx, outputs, run)


@verify.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--a", "kind_a", default="cpf", type=_KINDS, show_default=True)
@click.option("--b", "kind_b", default="efi", type=_KINDS, show_default=True)
@click.option("--lead", required=True, type=int)
@click.option("--window-days", default=14, show_default=True)
@click.option("--k", default=1.0, show_default=True)
@click.option("--lower-bound", default="auto", show_default=True)
@click.option("--pooled", is_flag=True, help="Pool all dates into one correlation.")
@click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True)
@click.option("--plot", is_flag=True)
@click.pass_context
def corr(ctx, manifest_path, kind_a, kind_b, lead, window_days, k, lower_bound,
         pooled, out, plot):
    """Per-date and averaged Kendall correlation between two index fields."""
    outputs = _Outputs(out)

    def run():
        manifest, forecast_rows, reforecasts, _, _ = _load_tables(manifest_path)
        lb = _effective_lower_bound(lower_bound, manifest)
        fields_a = _fields(manifest, forecast_rows, reforecasts, IndexKind(kind_a),
                           lead, window_days, k, lb)
        fields_b = _fields(manifest, forecast_rows, reforecasts, IndexKind(kind_b),
                           lead, window_days, k, lb)
        per_date, mean_tau = kendall_tau_by_date(fields_a, fields_b, pooled=pooled)
        rows = [("date", d, t) for d, t in per_date] + [("mean", None, mean_tau)]
        name = f"corr_{kind_a}_{kind_b}_lead{lead}"
        write_result_csv(outputs.path(name + ".csv"), ("scope", "date", "tau"),
                         rows, _invocation(ctx))
        if plot:
            from . import plots
            plots.save_tau_plot(outputs.path(name + ".svg"),
                                [d for d, _ in per_date], [t for _, t in per_date],
                                mean_tau, title=f"{kind_a} vs {kind_b}, lead {lead}d")
        click.echo(f"mean tau = {mean_tau:.4f}")

    _guard(ctx, outputs, run)


@verify.command(name="auc-by-lead")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--event-quantile", default=0.95, show_default=True)
@click.option("--window-days", default=14, show_default=True)
@click.option("--k", default=1.0, show_default=True)
@click.option("--lower-bound", default="auto", show_default=True)
@click.option("--bootstrap", default=1000, show_default=True)
@click.option("--block-days", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True)
@click.option("--plot", is_flag=True)
@click.pass_context
def auc_by_lead(ctx, manifest_path, event_quantile, window_days, k, lower_bound,
                bootstrap, block_days, seed, out, plot):
    """Potential vs actual AUC per lead, plus bootstrapped cpf-vs-efi skill."""
    outputs = _Outputs(out)

    def run():
        manifest, *tables = _load_tables(manifest_path)
        lb = _effective_lower_bound(lower_bound, manifest)
        auc_rows, skill_rows = [], []
        potential_by_kind = {kind.value: [] for kind in IndexKind}
        actual_by_kind = {kind.value: [] for kind in IndexKind if kind is not IndexKind.ANF}
        skill_series = {"potential": [], "actual": [], "lo": [], "hi": []}
        for lead in manifest.lead_times:
            per_kind = {}
            for kind in IndexKind:
                fields, sample = _sample(manifest, *tables, kind, lead, window_days,
                                         k, lb, event_quantile)
                pairs = binarize(sample)
                values = [v for v, _ in pairs]
                grid = pipeline.resolve_thresholds("grid500", kind, values)
                potential = roc_curve(pairs, grid).auc
                actual = None
                if kind is not IndexKind.ANF:
                    actual = roc_curve(
                        pairs, pipeline.resolve_thresholds("actionable", kind)).auc
                per_kind[kind] = (fields, sample, pairs, grid, potential, actual)
                auc_rows.append((lead, kind.value, potential, actual))
                potential_by_kind[kind.value].append(potential)
                if actual is not None:
                    actual_by_kind[kind.value].append(actual)
            cpf_f, cpf_sample, _, cpf_grid, cpf_pot, cpf_act = per_kind[IndexKind.CPF]
            efi_f, _, _, efi_grid, efi_pot, efi_act = per_kind[IndexKind.EFI]
            events = pipeline.event_lookup(cpf_sample)
            vals_cpf = pipeline.field_values(cpf_f)
            vals_efi = pipeline.field_values(efi_f)
            stat_actual = pipeline.make_skill_statistic(
                pipeline.resolve_thresholds("actionable", IndexKind.CPF),
                pipeline.resolve_thresholds("actionable", IndexKind.EFI),
                events, vals_cpf, vals_efi)
            lo, hi = block_bootstrap_ci(cpf_sample, stat_actual, block_days=block_days,
                                        replicates=bootstrap, seed=seed)
            skill_pot = auc_skill_score(cpf_pot, efi_pot)
            skill_act = auc_skill_score(cpf_act, efi_act)
            skill_rows.append((lead, skill_pot, skill_act, lo, hi))
            skill_series["potential"].append(skill_pot)
            skill_series["actual"].append(skill_act)
            skill_series["lo"].append(lo)
            skill_series["hi"].append(hi)
        inv = _invocation(ctx)
        write_result_csv(outputs.path("auc_by_lead.csv"),
                         ("lead_days", "kind", "potential_auc", "actual_auc"),
                         auc_rows, inv)
        write_result_csv(outputs.path("skill_by_lead.csv"),
                         ("lead_days", "potential_skill", "actual_skill",
                          "actual_ci_low", "actual_ci_high"),
                         skill_rows, inv)
        if plot:
            from . import plots
            leads = list(manifest.lead_times)
            plots.save_auc_lead_plot(outputs.path("auc_by_lead.svg"), leads,
                                     potential_by_kind, actual_by_kind)
            plots.save_skill_lead_plot(outputs.path("skill_by_lead.svg"), leads,
                                       skill_series["potential"], skill_series["actual"],
                                       skill_series["lo"], skill_series["hi"])
        click.echo(f"wrote AUC table for {len(manifest.lead_times)} lead times")

    _guard(ctx, outputs, run)


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--kind", required=True, type=_KINDS)
@click.option("--lead", "leads", type=int, multiple=True,
              help="Lead times to include; default: all manifest leads.")
@click.option("--bins", default="auto", show_default=True,
              help="'auto' or comma-separated bin edges.")
@click.option("--window-days", default=14, show_default=True)
@click.option("--k", default=1.0, show_default=True)
@click.option("--lower-bound", default="auto", show_default=True)
@click.option("--out", envvar="WXINDEX_OUT", default=".", show_default=True)
@click.option("--plot", is_flag=True)
@click.pass_context
def hist(ctx, manifest_path, kind, leads, bins, window_days, k, lower_bound, out, plot):
    """Histogram of index values across dates and locations, per lead."""
    outputs = _Outputs(out)

    def run():
        manifest, forecast_rows, reforecasts, _, _ = _load_tables(manifest_path)
        lb = _effective_lower_bound(lower_bound, manifest)
        chosen = list(leads) if leads else list(manifest.lead_times)
        values_by_lead = {}
        for lead in chosen:
            fields = _fields(manifest, forecast_rows, reforecasts, IndexKind(kind),
                             lead, window_days, k, lb)
            values_by_lead[lead] = [
                v.value for fld in fields for v in fld.entries.values() if not v.missing
            ]
        if bins == "auto":
            if IndexKind(kind) is IndexKind.CPF:
                edges = np.linspace(0.0, 1.0, 21)
            elif IndexKind(kind) is IndexKind.EFI:
                edges = np.linspace(-1.0, 1.0, 21)
            else:
                pooled = np.concatenate([values_by_lead[l] for l in chosen])
                edges = np.linspace(pooled.min(), pooled.max(), 21)
        else:
            edges = np.asarray([float(tok) for tok in bins.split(",") if tok])
        rows, plot_series = [], []
        for lead in chosen:
            counts = index_histogram(values_by_lead[lead], edges)
            rows.extend((lead, edges[i], edges[i + 1], int(c))
                        for i, c in enumerate(counts))
            plot_series.append((f"lead {lead}d", counts))
        name = f"hist_{kind}"
        write_result_csv(outputs.path(name + ".csv"),
                         ("lead_days", "bin_left", "bin_right", "count"),
                         rows, _invocation(ctx))
        if plot:
            from . import plots
            plots.save_histogram_plot(outputs.path(name + ".svg"), edges, plot_series,
                                      title=f"{kind} distribution by lead")
        click.echo(f"wrote histogram over {len(chosen)} lead time(s)")

    _guard(ctx, outputs, run)


if __name__ == "__main__":
    main()
