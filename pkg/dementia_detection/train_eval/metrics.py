import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn.metrics import auc, confusion_matrix
from sklearn.metrics import roc_curve as sk_roc_curve

from dementia_detection.generic_tools.exceptions import RocError

logger = logging.getLogger(__name__)

METRIC_NAMES = ["accuracy", "precision", "recall", "f1", "auroc"]


class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    area: float

    def __init__(self, fpr: np.ndarray, tpr: np.ndarray, thresholds: np.ndarray, area: float):
        self.fpr = fpr
        self.tpr = tpr
        self.thresholds = thresholds
        self.area = area

    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_curve(probs: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """
    One point per distinct score, swept from the highest; equal scores move the curve in a single
    diagonal step, so the trapezoid area gives half credit to tied positive/negative pairs.
    """
    labels = np.asarray(labels).astype(int)
    probs = np.asarray(probs, dtype=np.float64)
    if len(np.unique(labels)) < 2:
        raise RocError("roc curve needs both classes, labels hold only {}".format(np.unique(labels).tolist()))
    fpr, tpr, thresholds = sk_roc_curve(labels, probs, drop_intermediate=False)
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, area=float(auc(fpr, tpr)))


def pairwise_concordance(probs: Sequence[float], labels: Sequence[int]) -> float:
    """Fraction of (positive, negative) pairs where the positive scores higher, ties counting one half."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    pos = probs[labels == 1]
    neg = probs[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return float(wins / (len(pos) * len(neg)))


class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auroc: Optional[float]
    tp: int
    fp: int
    tn: int
    fn: int
    n: int

    def __init__(self, tp: int, fp: int, tn: int, fn: int, auroc: Optional[float] = None):
        self.tp, self.fp, self.tn, self.fn = tp, fp, tn, fn
        self.n = tp + fp + tn + fn
        self.precision_undefined = tp + fp == 0
        self.recall_undefined = tp + fn == 0
        self.auroc_undefined = auroc is None
        self.accuracy = (tp + tn) / self.n if self.n > 0 else 0.
        self.precision = 0. if self.precision_undefined else tp / (tp + fp)
        self.recall = 0. if self.recall_undefined else tp / (tp + fn)
        self.f1 = 0. if self.precision + self.recall == 0 \
            else 2 * self.precision * self.recall / (self.precision + self.recall)
        self.auroc = auroc

    def value(self, metric: str) -> float:
        v = getattr(self, metric)
        return float("nan") if v is None else float(v)

    def to_dict(self) -> Dict[str, float]:
        d = {m: self.value(m) for m in METRIC_NAMES}
        d.update({"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn, "n": self.n})
        return d


def compute_metrics(probs: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> MetricsReport:
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    if len(labels) == 0:
        raise ValueError("cannot evaluate an empty split")
    predicted = (probs >= threshold).astype(int)
    (tn, fp), (fn, tp) = confusion_matrix(labels, predicted, labels=[0, 1])
    try:
        area = roc_curve(probs, labels).area
    except RocError:
        logger.warning("single class split of %d sentences, auroc undefined", len(labels))
        area = None
    return MetricsReport(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn), auroc=area)


class AggregateReport:
    values: Dict[str, List[float]]
    mean: Dict[str, float]
    std: Dict[str, float]
    n_runs: int

    def __init__(self, reports: Sequence[MetricsReport]):
        self.n_runs = len(reports)
        self.values = {m: [r.value(m) for r in reports] for m in METRIC_NAMES}
        self.mean = {}
        self.std = {}
        for m, values in self.values.items():
            defined = np.array([v for v in values if not np.isnan(v)])
            if len(defined) == 0:
                self.mean[m], self.std[m] = float("nan"), float("nan")
                continue
            self.mean[m] = float(np.mean(defined))
            self.std[m] = float(np.std(defined, ddof=1)) if len(defined) > 1 else 0.

    def formatted(self, metric: str) -> str:
        if np.isnan(self.mean[metric]):
            return "n/a"
        return "{:.4f}±{:.4f}".format(self.mean[metric], self.std[metric])
