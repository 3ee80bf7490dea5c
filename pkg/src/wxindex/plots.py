"""Figure rendering for verification reports.

Each function writes one figure file next to the delimited output. The
save call strips the date metadata so rerunning an identical pipeline
reproduces the file byte for byte (SVG output recommended).
"""

import matplotlib

matplotlib.use("Agg")
# deterministic SVG element ids and no embedded date: identical pipelines
# must reproduce figure files byte for byte
matplotlib.rcParams["svg.hashsalt"] = "wxindex"

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"metadata": {"Date": None}, "bbox_inches": "tight"}


def _save(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_roc_plot(path, curves, title="ROC"):
    """curves: list of (label, RocCurve)."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for label, curve in curves:
        far = [p[0] for p in curve.points]
        hit = [p[1] for p in curve.points]
        ax.plot(far, hit, marker=".", label=f"{label} (AUC={curve.auc:.3f})")
    ax.plot([0, 1], [0, 1], color="grey", lw=0.8, ls="--")
    ax.set_xlabel("false alarm rate")
    ax.set_ylabel("hit rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, path)


def save_pev_plot(path, curves, base_rate=None, title="Potential economic value"):
    """curves: list of (label, PevCurve); log-scaled cost-loss axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, curve in curves:
        ax.plot(curve.cost_loss_ratios, curve.values, label=label)
    if base_rate is not None:
        ax.axvline(base_rate, color="grey", lw=0.8, ls=":", label="base rate")
    ax.set_xscale("log")
    ax.set_ylim(bottom=0)
    ax.set_xlabel("cost-loss ratio")
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_reliability_plot(path, diagram, title="Reliability"):
    """Two panels: case share per bin on top, reliability curve below."""
    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(5, 6), height_ratios=[1, 3], sharex=True)
    centers = np.asarray(diagram.bin_centers)
    top.bar(centers, [100 * s for s in diagram.case_share], width=0.03,
            color="tab:blue", edgecolor="black")
    top.set_ylabel("% of cases")
    top.set_title(title)
    populated = [i for i, c in enumerate(diagram.bin_counts) if c > 0]
    xs = centers[populated]
    ys = [diagram.observed_frequency[i] for i in populated]
    bottom.plot(xs, ys, marker="o", color="tab:red")
    lo = min(0.7, centers.min() - 0.05)
    bottom.plot([lo, 1], [lo, 1], ls="--", color="grey")
    bottom.set_xlim(lo, 1.0)
    bottom.set_ylim(lo, 1.0)
    bottom.set_xlabel("forecast index value")
    bottom.set_ylabel("observed non-exceedance frequency")
    _save(fig, path)


def save_histogram_plot(path, edges, counts_by_label, title="Index distribution"):
    """counts_by_label: list of (label, counts); step outline per series."""
    fig, ax = plt.subplots(figsize=(6, 4))
    edges = np.asarray(edges, dtype=float)
    for label, counts in counts_by_label:
        ax.stairs(counts, edges, label=label, fill=False, lw=1.5)
    ax.set_xlabel("index value")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_auc_lead_plot(path, leads, potential_by_kind, actual_by_kind,
                       title="AUC by lead time"):
    fig, ax = plt.subplots(figsize=(6, 4))
    for kind, values in potential_by_kind.items():
        line, = ax.plot(leads, values, marker="o", label=f"{kind} potential")
        if kind in actual_by_kind:
            ax.plot(leads, actual_by_kind[kind], marker="o", ls="--",
                    color=line.get_color(), label=f"{kind} actual")
    ax.set_xlabel("lead time (days)")
    ax.set_ylabel("AUC")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_skill_lead_plot(path, leads, potential, actual, ci_low, ci_high,
                         title="AUC skill score vs reference"):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(leads, potential, marker="o", label="potential")
    ax.plot(leads, actual, marker="o", ls="--", label="actual")
    ax.fill_between(leads, ci_low, ci_high, alpha=0.25, label="5-95% CI (actual)")
    ax.axhline(0.0, color="grey", lw=0.8)
    ax.set_xlabel("lead time (days)")
    ax.set_ylabel("skill score")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_tau_plot(path, dates, taus, mean_tau, title="Rank correlation"):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(dates, taus, marker=".", lw=0.8)
    ax.axhline(mean_tau, color="tab:red", ls="--", label=f"mean = {mean_tau:.3f}")
    ax.set_ylim(-1, 1)
    ax.set_xlabel("validity date")
    ax.set_ylabel("Kendall tau")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.autofmt_xdate()
    _save(fig, path)
