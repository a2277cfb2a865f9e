"""Delimited report files and their companion figures.

CSV layouts follow the evaluation module's flattening: one metrics file
with (model, alphabet, fold, metric, value) rows and one downbeat file with
(model, alphabet, downbeat, position, accuracy, count) rows.  Undefined
values (no finite perplexity, empty cells) are left blank, never zeroed.
Figures are rendered headlessly to files next to the delimited output.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import WINDOW
from .evaluation import EvalReport


def _cell(value) -> str:
    return "" if value is None else str(value)


def _fold_label(report: EvalReport) -> str:
    return "mean" if report.fold is None else str(report.fold)


def write_metrics_csv(path, reports) -> None:
    """One row per (report, metric); aggregate reports get fold 'mean'."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "alphabet", "fold", "metric", "value"])
        for report in reports:
            for metric in EvalReport.METRIC_FIELDS:
                writer.writerow([report.model, report.alphabet,
                                 _fold_label(report), metric,
                                 _cell(getattr(report, metric))])


def write_downbeat_csv(path, report: EvalReport) -> None:
    """Downbeat matrix rows; positions are 1-based beats past the window."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["model", "alphabet", "downbeat", "position",
                         "accuracy", "count"])
        for downbeat in sorted(report.downbeat):
            cell = report.downbeat[downbeat]
            for position in range(WINDOW):
                writer.writerow([report.model, report.alphabet, downbeat,
                                 position + 1,
                                 _cell(cell["accuracy"][position]),
                                 cell["count"][position]])


def write_curves_csv(path, curve) -> None:
    """Per-epoch training and validation losses, one row per epoch."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["phase", "epoch", "train_loss", "val_loss"])
        for entry in curve:
            writer.writerow([entry["phase"], entry["epoch"],
                             entry["train_loss"], entry["val_loss"]])


def plot_downbeat(path, report: EvalReport) -> None:
    """Accuracy against prediction position, one line per downbeat."""
    figure, axes = plt.subplots(figsize=(7, 4.5))
    positions = range(1, WINDOW + 1)
    for downbeat in sorted(report.downbeat):
        accuracies = [None if a is None else a
                      for a in report.downbeat[downbeat]["accuracy"]]
        axes.plot(positions, accuracies, marker="o",
                  label=f"downbeat at {downbeat}")
    axes.set_xlabel("prediction position (beats past window)")
    axes.set_ylabel("accuracy (%)")
    axes.set_title(f"{report.model} on {report.alphabet}")
    axes.set_xticks(list(positions))
    axes.grid(True, alpha=0.3)
    axes.legend()
    figure.tight_layout()
    figure.savefig(path)
    plt.close(figure)


def plot_curves(path, curve) -> None:
    """Loss curves by phase; training solid, validation dashed."""
    figure, axes = plt.subplots(figsize=(7, 4.5))
    phases = []
    for entry in curve:
        if entry["phase"] not in phases:
            phases.append(entry["phase"])
    for phase in phases:
        entries = [e for e in curve if e["phase"] == phase]
        epochs = [e["epoch"] for e in entries]
        axes.plot(epochs, [e["train_loss"] for e in entries],
                  label=f"{phase} train")
        axes.plot(epochs, [e["val_loss"] for e in entries], linestyle="--",
                  label=f"{phase} validation")
    axes.set_xlabel("epoch")
    axes.set_ylabel("loss")
    axes.grid(True, alpha=0.3)
    axes.legend()
    figure.tight_layout()
    figure.savefig(path)
    plt.close(figure)
