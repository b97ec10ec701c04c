"""Per-class and support-weighted metrics, plus the k-fold harness.

Class 1 is the numeric-sarcastic positive class. Every 0/0 ratio is defined
as 0, and the "avg" columns are support-weighted averages of the two
per-class values. Reports keep full precision; rendering rounds half-up to
two decimals.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Protocol, Sequence

from .corpus import FoldAssignment, LabeledTweet
from .errors import DataError

__all__ = [
    "ConfusionMatrix",
    "ClassMetrics",
    "MetricsReport",
    "Pipeline",
    "CrossValResult",
    "confusion",
    "prf_per_class",
    "weighted_average",
    "metrics_report",
    "render_table",
    "crossvalidate",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise DataError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def support_pos(self) -> int:
        return self.tp + self.fn

    @property
    def support_neg(self) -> int:
        return self.tn + self.fp


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


def confusion(preds: Sequence[int], golds: Sequence[int]) -> ConfusionMatrix:
    if len(preds) != len(golds):
        raise DataError(f"confusion: {len(preds)} predictions vs {len(golds)} golds")
    tp = fp = fn = tn = 0
    for p, g in zip(preds, golds):
        if p not in (0, 1) or g not in (0, 1):
            raise DataError(f"confusion: labels must be 0/1, got pred={p} gold={g}")
        if p == 1 and g == 1:
            tp += 1
        elif p == 1 and g == 0:
            fp += 1
        elif p == 0 and g == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _f1(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s else 0.0


def prf_per_class(cm: ConfusionMatrix) -> tuple[ClassMetrics, ClassMetrics]:
    """(class-1 metrics, class-0 metrics); class 0 swaps tn into the tp role."""
    p1 = _ratio(cm.tp, cm.tp + cm.fp)
    r1 = _ratio(cm.tp, cm.tp + cm.fn)
    p0 = _ratio(cm.tn, cm.tn + cm.fn)
    r0 = _ratio(cm.tn, cm.tn + cm.fp)
    return ClassMetrics(p1, r1, _f1(p1, r1)), ClassMetrics(p0, r0, _f1(p0, r0))


def weighted_average(metric1: float, metric0: float, support1: int, support0: int) -> float:
    total = support1 + support0
    if total <= 0:
        raise DataError("weighted_average: zero total support")
    return (metric1 * support1 + metric0 * support0) / total


@dataclass(frozen=True)
class MetricsReport:
    pos: ClassMetrics
    neg: ClassMetrics
    precision_avg: float
    recall_avg: float
    f1_avg: float
    support_pos: int
    support_neg: int

    def to_dict(self) -> dict:
        return {
            "precision_1": self.pos.precision,
            "recall_1": self.pos.recall,
            "f1_1": self.pos.f1,
            "precision_0": self.neg.precision,
            "recall_0": self.neg.recall,
            "f1_0": self.neg.f1,
            "precision_avg": self.precision_avg,
            "recall_avg": self.recall_avg,
            "f1_avg": self.f1_avg,
            "support_1": self.support_pos,
            "support_0": self.support_neg,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            pos=ClassMetrics(d["precision_1"], d["recall_1"], d["f1_1"]),
            neg=ClassMetrics(d["precision_0"], d["recall_0"], d["f1_0"]),
            precision_avg=d["precision_avg"],
            recall_avg=d["recall_avg"],
            f1_avg=d["f1_avg"],
            support_pos=d["support_1"],
            support_neg=d["support_0"],
        )


def metrics_report(cm: ConfusionMatrix) -> MetricsReport:
    pos, neg = prf_per_class(cm)
    s1, s0 = cm.support_pos, cm.support_neg
    if s1 + s0 == 0:
        raise DataError("metrics_report: empty evaluation")
    return MetricsReport(
        pos=pos,
        neg=neg,
        precision_avg=weighted_average(pos.precision, neg.precision, s1, s0),
        recall_avg=weighted_average(pos.recall, neg.recall, s1, s0),
        f1_avg=weighted_average(pos.f1, neg.f1, s1, s0),
        support_pos=s1,
        support_neg=s0,
    )


def round2(value: float) -> float:
    """Half-up rounding to two decimals, as in the reported tables."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def render_table(report: MetricsReport, title: str = "") -> str:
    header = f"{'':14s} {'P':>6s} {'R':>6s} {'F1':>6s} {'support':>8s}"
    rows = [
        ("class 1", report.pos, report.support_pos),
        ("class 0", report.neg, report.support_neg),
    ]
    lines = []
    if title:
        lines.append(title)
    lines.append(header)
    for name, m, support in rows:
        lines.append(
            f"{name:14s} {round2(m.precision):6.2f} {round2(m.recall):6.2f} "
            f"{round2(m.f1):6.2f} {support:8d}"
        )
    lines.append(
        f"{'weighted avg':14s} {round2(report.precision_avg):6.2f} "
        f"{round2(report.recall_avg):6.2f} {round2(report.f1_avg):6.2f} "
        f"{report.support_pos + report.support_neg:8d}"
    )
    return "\n".join(lines)


class Pipeline(Protocol):
    """Anything trainable from labeled tweets that then predicts labels."""

    def fit(self, train: Sequence[LabeledTweet]) -> None: ...

    def predict(self, tweets: Sequence[LabeledTweet]) -> list[int]: ...


@dataclass
class CrossValResult:
    per_fold: list[MetricsReport]
    mean: MetricsReport

    def to_dict(self) -> dict:
        return {
            "folds": [r.to_dict() for r in self.per_fold],
            "mean": self.mean.to_dict(),
        }


def _mean_report(reports: Sequence[MetricsReport]) -> MetricsReport:
    n = len(reports)

    def avg(get: Callable[[MetricsReport], float]) -> float:
        return sum(get(r) for r in reports) / n

    return MetricsReport(
        pos=ClassMetrics(
            avg(lambda r: r.pos.precision),
            avg(lambda r: r.pos.recall),
            avg(lambda r: r.pos.f1),
        ),
        neg=ClassMetrics(
            avg(lambda r: r.neg.precision),
            avg(lambda r: r.neg.recall),
            avg(lambda r: r.neg.f1),
        ),
        precision_avg=avg(lambda r: r.precision_avg),
        recall_avg=avg(lambda r: r.recall_avg),
        f1_avg=avg(lambda r: r.f1_avg),
        support_pos=sum(r.support_pos for r in reports),
        support_neg=sum(r.support_neg for r in reports),
    )


def crossvalidate(
    pipeline_factory: Callable[[], Pipeline],
    dataset: Sequence[LabeledTweet],
    folds: FoldAssignment,
) -> CrossValResult:
    """Train a fresh pipeline per fold on the other k-1 folds; unweighted mean.

    Everything a pipeline learns (vocabularies, scalers, repositories) comes
    from its training folds only, because that is all it ever sees.
    """
    by_id = {t.id: t for t in dataset}
    missing = set(folds.assignments) - set(by_id)
    if missing:
        raise DataError(f"crossvalidate: folds reference unknown ids, e.g. {sorted(missing)[:3]}")
    uncovered = set(by_id) - set(folds.assignments)
    if uncovered:
        raise DataError(
            f"crossvalidate: dataset ids missing from folds, e.g. {sorted(uncovered)[:3]}"
        )
    reports: list[MetricsReport] = []
    for fold in range(folds.k):
        train = [t for t in dataset if folds.assignments[t.id] != fold]
        test = [t for t in dataset if folds.assignments[t.id] == fold]
        pipeline = pipeline_factory()
        pipeline.fit(train)
        preds = pipeline.predict(test)
        golds = [t.label for t in test]
        reports.append(metrics_report(confusion(preds, golds)))
    return CrossValResult(per_fold=reports, mean=_mean_report(reports))
