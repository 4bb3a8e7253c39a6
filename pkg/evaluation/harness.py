"""
Run evaluation — pooled and per-group metrics plus paired McNemar comparisons.

Every comparison produced by one evaluate_run call is one BH family: two
systems against a third over six corpora gives the 18-test layout, four
ablation variants over six corpora the 24-test layout.
"""
import logging
from collections import OrderedDict
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from artifacts import read_jsonl
from errors import LengthMismatch, MissingInput, PreconditionFailed
from evaluation.mcnemar import McNemarResult, compare_family
from evaluation.metrics import ConfusionCounts, MetricReport, confusion, metrics
from parsing.models import Label

logger = logging.getLogger(__name__)

POOLED = "all"
DEFAULT_SYSTEM = "phishguard"


class PairedOutcomes(BaseModel):
    model_config = ConfigDict(frozen=True)

    n10: int = Field(0, ge=0)  # A correct, B wrong
    n01: int = Field(0, ge=0)  # A wrong, B correct
    n11: int = Field(0, ge=0)
    n00: int = Field(0, ge=0)


def paired_outcomes(preds_a, preds_b, labels) -> PairedOutcomes:
    preds_a, preds_b, labels = list(preds_a), list(preds_b), list(labels)
    if not len(preds_a) == len(preds_b) == len(labels):
        raise LengthMismatch(f"paired lengths differ: {len(preds_a)}, {len(preds_b)}, {len(labels)}")
    cells = {(True, False): 0, (False, True): 0, (True, True): 0, (False, False): 0}
    for a, b, truth in zip(preds_a, preds_b, labels):
        truth = Label.coerce(truth)
        cells[(Label.coerce(a) is truth, Label.coerce(b) is truth)] += 1
    return PairedOutcomes(n10=cells[(True, False)], n01=cells[(False, True)],
                          n11=cells[(True, True)], n00=cells[(False, False)])


# ── Reports ───────────────────────────────────────────────────────────────────

class GroupKind(str, Enum):
    PHISHING = "phishing"
    LEGITIMATE = "legitimate"
    MIXED = "mixed"


class GroupReport(BaseModel):
    group: str
    kind: GroupKind
    counts: ConfusionCounts
    metrics: MetricReport


class SystemReport(BaseModel):
    system: str
    pooled_counts: ConfusionCounts
    pooled: MetricReport
    groups: list[GroupReport]


class Comparison(BaseModel):
    system_a: str
    system_b: str
    group: str
    outcomes: PairedOutcomes
    result: McNemarResult


class EvaluationReport(BaseModel):
    systems: list[SystemReport]
    comparisons: list[Comparison] = Field(default_factory=list)

    def system(self, name: str) -> SystemReport:
        for report in self.systems:
            if report.system == name:
                return report
        raise KeyError(name)


def _group_kind(labels: list[Label]) -> GroupKind:
    kinds = set(labels)
    if kinds == {Label.PHISHING}:
        return GroupKind.PHISHING
    if kinds == {Label.LEGITIMATE}:
        return GroupKind.LEGITIMATE
    return GroupKind.MIXED


def _group_indices(groups: list[str]) -> "OrderedDict[str, list[int]]":
    index = OrderedDict()
    for i, key in enumerate(groups):
        index.setdefault(key, []).append(i)
    return index


def evaluate_run(outputs: dict, labels, groups=None, pairs=None) -> EvaluationReport:
    """
    outputs maps system name → predicted labels aligned with `labels`.
    pairs lists (system_a, system_b) comparisons; by default the first system is
    compared with every other one.
    """
    labels = [Label.coerce(l) for l in labels]
    if not outputs:
        raise MissingInput("no system outputs to evaluate")
    if any(l is Label.UNLABELED for l in labels):
        raise MissingInput("every evaluated email needs a phishing/legitimate label")
    groups = list(groups) if groups is not None else [POOLED] * len(labels)
    if len(groups) != len(labels):
        raise LengthMismatch(f"{len(groups)} group keys for {len(labels)} labels")

    predictions = {name: [Label.coerce(p) for p in preds] for name, preds in outputs.items()}
    index = _group_indices(groups)

    systems = []
    for name, preds in predictions.items():
        pooled_counts = confusion(preds, labels)
        group_reports = []
        for key, members in index.items():
            truth = [labels[i] for i in members]
            counts = confusion([preds[i] for i in members], truth)
            group_reports.append(GroupReport(group=key, kind=_group_kind(truth), counts=counts, metrics=metrics(counts)))
        systems.append(SystemReport(system=name, pooled_counts=pooled_counts,
                                    pooled=metrics(pooled_counts), groups=group_reports))

    names = list(predictions)
    if pairs is None:
        pairs = [(names[0], other) for other in names[1:]]
    for a, b in pairs:
        if a not in predictions or b not in predictions:
            raise PreconditionFailed(f"comparison {a} vs {b} names an unknown system")

    # Group-major order keeps each corpus's comparisons together in the table.
    cells = []
    for key, members in index.items():
        truth = [labels[i] for i in members]
        for a, b in pairs:
            outcome = paired_outcomes([predictions[a][i] for i in members],
                                      [predictions[b][i] for i in members], truth)
            cells.append((a, b, key, outcome))
    results = compare_family([(o.n10, o.n01) for _, _, _, o in cells])
    comparisons = [
        Comparison(system_a=a, system_b=b, group=key, outcomes=o, result=r)
        for (a, b, key, o), r in zip(cells, results)
    ]
    if comparisons:
        logger.info("Evaluated %d systems over %d groups; %d McNemar comparisons",
                    len(systems), len(index), len(comparisons))
    return EvaluationReport(systems=systems, comparisons=comparisons)


# ── Prediction files ──────────────────────────────────────────────────────────

class PredictionSet(BaseModel):
    outputs: dict[str, list[Label]]
    labels: list[Label]
    groups: list[str]
    email_ids: list[str]


def _row_id(row: dict) -> str:
    email_id = row.get("email_id", row.get("source_id"))
    if email_id is None:
        raise MissingInput("prediction row without email_id")
    return str(email_id)


def load_predictions(paths, labels_path=None) -> PredictionSet:
    """
    Read prediction JSONL rows {email_id, system, label, score} (classify's
    results.jsonl also works: source_id, no system). Ground truth comes from a
    `truth` field or from a labels JSONL {email_id, label, corpus}.
    """
    truth, corpus = {}, {}
    if labels_path is not None:
        for row in read_jsonl(labels_path):
            email_id = _row_id(row)
            truth[email_id] = Label.coerce(row.get("label", ""))
            if row.get("corpus"):
                corpus[email_id] = str(row["corpus"])

    outputs: dict[str, dict[str, Label]] = OrderedDict()
    order: list[str] = []
    for path in paths:
        for row in read_jsonl(Path(path)):
            email_id = _row_id(row)
            system = str(row.get("system") or DEFAULT_SYSTEM)
            if "label" not in row:
                raise MissingInput(f"prediction for {email_id} has no label", email_id=email_id)
            outputs.setdefault(system, {})[email_id] = Label.coerce(row["label"])
            if email_id not in truth and row.get("truth") not in (None, ""):
                truth[email_id] = Label.coerce(row["truth"])
            if email_id not in corpus and row.get("corpus"):
                corpus[email_id] = str(row["corpus"])
            if email_id not in order:
                order.append(email_id)

    if not order:
        raise MissingInput("no predictions found")
    missing = [e for e in order if truth.get(e, Label.UNLABELED) is Label.UNLABELED]
    if missing:
        raise MissingInput(f"{len(missing)} predictions have no ground-truth label (first: {missing[0]})")
    for system, by_id in outputs.items():
        absent = [e for e in order if e not in by_id]
        if absent:
            raise MissingInput(f"system {system} has no prediction for {absent[0]}", system=system)

    return PredictionSet(
        outputs={system: [by_id[e] for e in order] for system, by_id in outputs.items()},
        labels=[truth[e] for e in order],
        groups=[corpus.get(e, POOLED) for e in order],
        email_ids=order,
    )
