import csv
import os
from typing import List, Sequence, Tuple

import matplotlib
from matplotlib.figure import Figure
import numpy as np
from sklearn.metrics import auc

from dementia_detection.generic_tools.exceptions import RocError
from dementia_detection.train_eval.metrics import RocCurve

SVG_HASH_SALT = "dementia-detection"
# the svg backend draws 72 units per inch
SVG_DPI = 72
CANVAS_WIDTH, CANVAS_HEIGHT = 640, 480


class RocSeries:
    label: str
    fpr: np.ndarray
    tpr: np.ndarray

    def __init__(self, label: str, fpr: np.ndarray, tpr: np.ndarray):
        self.label = label
        self.fpr = fpr
        self.tpr = tpr

    @property
    def area(self) -> float:
        return float(auc(self.fpr, self.tpr))


def write_roc_csv(curve: RocCurve, path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["fpr", "tpr"])
        for x, y in curve.points():
            writer.writerow([repr(x), repr(y)])


def label_from_file_name(path: str) -> str:
    # roc_<kind>_<run>.csv
    stem = os.path.splitext(os.path.basename(path))[0]
    parts = stem.split("_")
    if len(parts) >= 3 and parts[0] == "roc":
        kind = "_".join(parts[1:-1])
        return "+".join(p.capitalize() for p in kind.split("+")) + " (run {})".format(parts[-1])
    return stem


def read_roc_csv(path: str) -> RocSeries:
    points = []
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if len(rows) < 3 or [c.strip() for c in rows[0]] != ["fpr", "tpr"]:
        raise RocError("{}: expected a 'fpr,tpr' header and at least two points".format(path))
    for line_number, row in enumerate(rows[1:], start=2):
        try:
            x, y = float(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise RocError("{}: malformed point at line {}".format(path, line_number))
        if not (0. <= x <= 1. and 0. <= y <= 1.):
            raise RocError("{}: point outside the unit square at line {}".format(path, line_number))
        points.append((x, y))
    fpr, tpr = np.array(points).T
    if np.any(np.diff(fpr) < 0) or np.any(np.diff(tpr) < 0):
        raise RocError("{}: curve is not monotone".format(path))
    return RocSeries(label_from_file_name(path), fpr, tpr)


def plot_roc_curves(series: Sequence[RocSeries], path: str, title: str = "ROC"):
    """SVG of the curves with the chance diagonal, deterministic for identical inputs."""
    if len(series) == 0:
        raise RocError("no ROC curve to plot")
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig = Figure(figsize=(CANVAS_WIDTH / SVG_DPI, CANVAS_HEIGHT / SVG_DPI), dpi=SVG_DPI)
        ax = fig.add_subplot(1, 1, 1)
        ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=1, label="Chance")
        for s in series:
            ax.plot(s.fpr, s.tpr, linewidth=1.5, label="{} (AUC={:.4f})".format(s.label, s.area))
        ax.set_xlim(0., 1.)
        ax.set_ylim(0., 1.)
        ax.set_xlabel("False positive rate")
        ax.set_ylabel("True positive rate")
        ax.set_title(title)
        ax.legend(loc="lower right")
        fig.savefig(path, format="svg", metadata={"Date": None})


def plot_roc_files(paths: Sequence[str], output_path: str, title: str = "ROC") -> List[Tuple[str, float]]:
    series = [read_roc_csv(p) for p in paths]
    plot_roc_curves(series, output_path, title=title)
    return [(s.label, s.area) for s in series]
