"""
Confusion counts and the seven classification metrics (phishing = positive class).
"""
from decimal import ROUND_HALF_UP, Decimal

from pydantic import BaseModel, ConfigDict, Field

from errors import EmptyInput, LengthMismatch
from parsing.models import Label


class ConfusionCounts(BaseModel):
    model_config = ConfigDict(frozen=True)

    tp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(tp=self.tp + other.tp, tn=self.tn + other.tn,
                               fp=self.fp + other.fp, fn=self.fn + other.fn)


class MetricReport(BaseModel):
    """Each metric is a fraction in [0, 1], or None when its denominator is zero."""
    model_config = ConfigDict(frozen=True)

    recall: float | None
    precision: float | None
    accuracy: float | None
    f1: float | None
    tnr: float | None
    fpr: float | None
    fnr: float | None


def _label(value) -> Label:
    return Label.coerce(value)


def confusion(predictions, labels) -> ConfusionCounts:
    predictions, labels = list(predictions), list(labels)
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(labels)} labels")
    if not predictions:
        raise EmptyInput("no predictions to evaluate")
    tp = tn = fp = fn = 0
    for pred, truth in zip(predictions, labels):
        positive = _label(pred) is Label.PHISHING
        actual = _label(truth) is Label.PHISHING
        if positive and actual:
            tp += 1
        elif positive:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics(c: ConfusionCounts) -> MetricReport:
    recall = _ratio(c.tp, c.tp + c.fn)
    precision = _ratio(c.tp, c.tp + c.fp)
    if recall is None or precision is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricReport(
        recall=recall,
        precision=precision,
        accuracy=_ratio(c.tp + c.tn, c.total),
        f1=f1,
        tnr=_ratio(c.tn, c.tn + c.fp),
        fpr=_ratio(c.fp, c.tn + c.fp),
        fnr=_ratio(c.fn, c.tp + c.fn),
    )


def round_half_up(value: float, places: int = 2) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def percent(value: float | None, places: int = 2) -> str:
    if value is None:
        return "n/a"
    return f"{round_half_up(value * 100.0, places):.{places}f}"
