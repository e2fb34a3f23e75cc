"""Matplotlib rendering of suite results, written next to the report CSV.

Two kinds of output: a summary figure with per-detector F1 bars and a
delay-versus-false-positives scatter, and one timeline per experiment
showing where the true drifts sit and where each detector fired on the
first seed. Everything renders through the Agg backend, so no display
is needed.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import SuiteResult

__all__ = ["render_figures"]


def _save_atomic(fig, path: str) -> None:
    tmp = f"{path}.tmp~"
    try:
        fig.savefig(tmp, dpi=120, format="png")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    finally:
        plt.close(fig)


def _summary_figure(result: SuiteResult, path: str) -> None:
    experiments = sorted({exp for exp, _, _ in result.rows})
    detectors = sorted({det for _, det, _ in result.rows})
    by_key = {(exp, det): rep for exp, det, rep in result.rows}

    fig, (ax_f1, ax_delay) = plt.subplots(1, 2, figsize=(11, 4.5))
    width = 0.8 / max(len(detectors), 1)
    for j, det in enumerate(detectors):
        xs = [i + j * width for i in range(len(experiments))]
        ys = [by_key[(exp, det)].f1 if (exp, det) in by_key else 0.0 for exp in experiments]
        ax_f1.bar(xs, ys, width=width, label=det)
    ax_f1.set_xticks([i + 0.4 - width / 2 for i in range(len(experiments))])
    ax_f1.set_xticklabels(experiments, rotation=20, ha="right")
    ax_f1.set_ylabel("F1")
    ax_f1.set_ylim(0, 1.05)
    ax_f1.set_title("Detection F1 by experiment")
    ax_f1.legend(fontsize="small")

    for det in detectors:
        xs, ys = [], []
        for exp in experiments:
            rep = by_key.get((exp, det))
            if rep is not None and rep.delays:
                xs.append(rep.fp_per_run)
                ys.append(rep.mean_delay)
        if xs:
            ax_delay.scatter(xs, ys, label=det)
    ax_delay.set_xlabel("false positives per run")
    ax_delay.set_ylabel("mean delay (steps)")
    ax_delay.set_title("Delay vs false positives")
    ax_delay.legend(fontsize="small")

    fig.tight_layout()
    _save_atomic(fig, path)


def _timeline_figure(
    result: SuiteResult, experiment: str, detectors: list[str], path: str
) -> None:
    fig, ax = plt.subplots(figsize=(11, 0.8 + 0.5 * len(detectors)))
    total = result.total_lengths.get(experiment, 0)
    for g in result.truths.get(experiment, []):
        ax.axvline(g, color="0.75", linestyle="--", linewidth=1)
    for row, det in enumerate(detectors):
        detections = result.first_run_detections.get((experiment, det), [])
        ax.scatter(detections, [row] * len(detections), marker="x", s=40)
    ax.set_yticks(range(len(detectors)))
    ax.set_yticklabels(detectors)
    ax.set_xlim(0, max(total, 1))
    ax.set_ylim(-0.5, len(detectors) - 0.5)
    ax.invert_yaxis()
    ax.set_xlabel("stream position")
    ax.set_title(f"{experiment}: true drifts (dashed) and first-seed detections")
    fig.tight_layout()
    _save_atomic(fig, path)


def render_figures(result: SuiteResult, report_path: str | os.PathLike[str]) -> list[str]:
    """Render the summary and per-experiment timelines beside the report.

    Returns the written paths. File names derive from the report stem:
    <stem>_summary.png and <stem>_<experiment>_timeline.png.
    """
    report_path = os.fspath(report_path)
    stem, _ = os.path.splitext(report_path)
    written = []
    summary = f"{stem}_summary.png"
    _summary_figure(result, summary)
    written.append(summary)
    detectors = sorted({det for _, det, _ in result.rows})
    for experiment in sorted({exp for exp, _, _ in result.rows}):
        safe = experiment.replace(os.sep, "_").replace(" ", "_")
        path = f"{stem}_{safe}_timeline.png"
        _timeline_figure(result, experiment, detectors, path)
        written.append(path)
    return written
