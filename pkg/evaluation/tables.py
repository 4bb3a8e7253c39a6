"""
Text renderings of an EvaluationReport: overall metrics, per-corpus rates and
the McNemar comparison block.
"""
import pandas as pd

from evaluation.harness import EvaluationReport, GroupKind
from evaluation.metrics import percent, round_half_up

METRIC_COLUMNS = [
    ("Recall", "recall"), ("Precision", "precision"), ("Accuracy", "accuracy"), ("F1", "f1"),
    ("TNR", "tnr"), ("FPR", "fpr"), ("FNR", "fnr"),
]


def format_p(p: float | None) -> str:
    if p is None:
        return "n/a"
    if p < 0.001:
        return "<.001"
    return f"{round_half_up(p, 3):.3f}"


def _render(rows: list[dict]) -> str:
    if not rows:
        return "(none)"
    return pd.DataFrame(rows).to_string(index=False)


def metrics_table(report: EvaluationReport) -> str:
    rows = []
    for system in report.systems:
        row = {"System": system.system}
        for title, field in METRIC_COLUMNS:
            row[title] = percent(getattr(system.pooled, field))
        rows.append(row)
    return _render(rows)


def group_table(report: EvaluationReport) -> str:
    """Phishing corpora show TPR/FNR, legitimate corpora TNR/FPR, mixed ones all four."""
    rows = []
    for system in report.systems:
        for group in system.groups:
            m = group.metrics
            row = {"System": system.system, "Corpus": group.group, "Kind": group.kind.value,
                   "TPR": "", "FNR": "", "TNR": "", "FPR": ""}
            if group.kind is not GroupKind.LEGITIMATE:
                row["TPR"], row["FNR"] = percent(m.recall), percent(m.fnr)
            if group.kind is not GroupKind.PHISHING:
                row["TNR"], row["FPR"] = percent(m.tnr), percent(m.fpr)
            rows.append(row)
    return _render(rows)


def comparison_table(report: EvaluationReport) -> str:
    rows = [{
        "Corpus": c.group,
        "Comparison": f"{c.system_a} vs {c.system_b}",
        "n10": c.outcomes.n10,
        "n01": c.outcomes.n01,
        "Test": c.result.method.value,
        "p (adj.)": format_p(c.result.adj_p),
    } for c in report.comparisons]
    return _render(rows)


def render_report(report: EvaluationReport) -> str:
    sections = [
        "Overall metrics (%)", metrics_table(report), "",
        "Per-corpus rates (%)", group_table(report),
    ]
    if report.comparisons:
        sections += ["", "McNemar comparisons (one-sided, BH-adjusted)", comparison_table(report)]
    return "\n".join(sections) + "\n"
