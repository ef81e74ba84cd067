"""SVG chart rendering for the benchmark artifacts.

Charts are re-renderable from the CSV files alone, so `plot` can run on an
existing output directory. SVG output omits the creation date to keep the
files byte-stable across identical invocations.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_curve_svg", "render_predictions_svg", "render_all"]


def _read_columns(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    data = {}
    for j, name in enumerate(header):
        data[name] = np.array([float(r[j]) for r in rows])
    return data


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_curve_svg(curve_csv, out_svg, title: str) -> None:
    """Raw and smoothed per-iteration MSE for both models, in dB."""
    data = _read_columns(curve_csv)
    it = data["iteration"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for model, color in (("rbf", "tab:blue"), ("strbf", "tab:red")):
        raw = data[f"{model}_mse"]
        smooth = data[f"{model}_mse_smoothed"]
        ax.plot(it, 10 * np.log10(np.maximum(raw, 1e-300)), color=color, alpha=0.2, lw=0.6)
        ax.plot(it, 10 * np.log10(np.maximum(smooth, 1e-300)), color=color, lw=1.6,
                label=model.upper())
    ax.set_xlabel("iteration")
    ax.set_ylabel("MSE (dB)")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, out_svg)


def render_predictions_svg(predictions_csv, out_svg) -> None:
    """Actual vs predicted validation samples."""
    data = _read_columns(predictions_csv)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(data["t"], data["actual"], color="black", lw=1.4, label="actual")
    ax.plot(data["t"], data["rbf_pred"], color="tab:blue", lw=1.0, label="RBF")
    ax.plot(data["t"], data["strbf_pred"], color="tab:red", lw=1.0, label="STRBF")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("value")
    ax.set_title("Validation: actual vs predicted")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, out_svg)


def render_all(out_dir) -> list[Path]:
    """Render every chart whose source CSV exists in ``out_dir``."""
    out_dir = Path(out_dir)
    written = []
    jobs = [
        ("train_curve.csv", "train_curve.svg", lambda c, s: render_curve_svg(c, s, "Training MSE")),
        ("test_curve.csv", "test_curve.svg", lambda c, s: render_curve_svg(c, s, "Testing MSE")),
        ("predictions.csv", "predictions.svg", lambda c, s: render_predictions_svg(c, s)),
    ]
    for csv_name, svg_name, fn in jobs:
        csv_path = out_dir / csv_name
        if csv_path.exists():
            svg_path = out_dir / svg_name
            fn(csv_path, svg_path)
            written.append(svg_path)
    return written
