import json

import numpy as np
import pytest

from errors import EmptyInput, LengthMismatch, MissingInput, OutOfRange, PreconditionFailed
from evaluation import (
    ConfusionCounts, GroupKind, McNemarMethod, bh_adjust, compare_family, confusion, evaluate_run, format_p,
    load_predictions, mcnemar, mcnemar_exact, mcnemar_midp, metrics, paired_outcomes, percent,
    render_report, round_half_up,
)
from parsing.models import Label

P, L = Label.PHISHING, Label.LEGITIMATE

# Discordant counts (n10, n01) for three baseline comparisons on each of six corpora,
# with the BH-adjusted p-values expected over the whole 18-test family.
FAMILY = [
    ("nigerian", [(1, 0), (0, 0), (4, 0)], ["0.529", "1.000", "0.070"]),
    ("nazario", [(6, 0), (4, 0), (12, 2)], ["0.023", "0.070", "0.011"]),
    ("enron", [(263, 4), (305, 3), (62, 37)], ["<.001", "<.001", "0.011"]),
    ("spamassassin", [(115, 7), (161, 2), (46, 18)], ["<.001", "<.001", "<.001"]),
    ("ceas", [(50, 3), (52, 4), (18, 9)], ["<.001", "<.001", "0.056"]),
    ("trec", [(28, 0), (23, 0), (18, 8)], ["<.001", "<.001", "0.036"]),
]


def _matches(formatted: str, expected: str) -> bool:
    if expected == "<.001":
        return formatted == "<.001"
    return formatted != "<.001" and float(formatted) == pytest.approx(float(expected), abs=0.005)


# ── Metrics ───────────────────────────────────────────────────────────────────

def test_metric_values():
    m = metrics(ConfusionCounts(tp=977, tn=2918, fp=82, fn=2))
    assert [percent(v) for v in (m.recall, m.precision, m.accuracy, m.f1, m.tnr, m.fpr, m.fnr)] == [
        "99.80", "92.26", "97.89", "95.88", "97.27", "2.73", "0.20"]


def test_undefined_metrics_are_none():
    m = metrics(ConfusionCounts(tp=0, tn=5, fp=0, fn=0))
    assert m.recall is None
    assert m.precision is None
    assert m.f1 is None
    assert m.accuracy == 1.0
    assert percent(m.recall) == "n/a"


def test_confusion_counts():
    c = confusion([P, P, L, L, "phishing"], [P, L, P, L, "legitimate"])
    assert c == ConfusionCounts(tp=1, fp=2, fn=1, tn=1)
    assert (c + c).total == 10
    with pytest.raises(LengthMismatch):
        confusion([P], [P, L])
    with pytest.raises(EmptyInput):
        confusion([], [])


def test_round_half_up():
    assert round_half_up(0.125) == 0.13
    assert round_half_up(2.675) == 2.68


# ── McNemar ───────────────────────────────────────────────────────────────────

def test_mcnemar_values():
    assert mcnemar_exact(6, 0) == 0.015625
    assert mcnemar_exact(1, 0) == 0.5
    assert mcnemar_exact(0, 0) == 1.0
    assert mcnemar_exact(0, 3) == 1.0
    assert mcnemar_midp(20, 20) == pytest.approx(0.5)
    assert mcnemar_midp(305, 3) < 1e-15
    with pytest.raises(PreconditionFailed):
        mcnemar_exact(-1, 2)


def test_mcnemar_switches_method_above_25_pairs():
    assert mcnemar(20, 5).method is McNemarMethod.EXACT
    assert mcnemar(20, 6).method is McNemarMethod.MID_P


def test_bh_adjust():
    assert bh_adjust([0.01, 0.02, 0.03]) == pytest.approx([0.03, 0.03, 0.03])
    assert bh_adjust([0.2]) == pytest.approx([0.2])
    assert bh_adjust([0.5, 1.0]) == pytest.approx([1.0, 1.0])
    assert bh_adjust([]) == []
    with pytest.raises(OutOfRange):
        bh_adjust([0.1, 1.5])
    with pytest.raises(OutOfRange):
        bh_adjust([float("nan")])


@pytest.mark.parametrize("seed", range(20))
def test_bh_adjust_is_monotone_and_never_below_raw(seed):
    rng = np.random.default_rng(seed)
    raw_p = rng.random(int(rng.integers(1, 19))).tolist()
    adjusted = bh_adjust(raw_p)
    assert all(a >= r for a, r in zip(adjusted, raw_p))
    ranked = [adjusted[i] for i in np.argsort(raw_p, kind="stable")]
    assert ranked == sorted(ranked)
    assert all(a <= 1.0 for a in adjusted)


def test_midp_never_exceeds_exact():
    for n10 in range(41):
        for n01 in range(41):
            assert mcnemar_midp(n10, n01) <= mcnemar_exact(n10, n01), (n10, n01)


def test_eighteen_test_family():
    pairs = [pair for _, group, _ in FAMILY for pair in group]
    expected = [value for _, _, values in FAMILY for value in values]
    results = compare_family(pairs)
    formatted = [format_p(r.adj_p) for r in results]
    for got, want, pair in zip(formatted, expected, pairs):
        assert _matches(got, want), (pair, got, want)
    assert all(r.adj_p >= r.raw_p for r in results)


# ── Harness ───────────────────────────────────────────────────────────────────

def _family_run():
    """Predictions whose per-corpus discordant counts reproduce FAMILY exactly."""
    systems = ("phishguard", "base1", "base2", "base3")
    outputs = {name: [] for name in systems}
    labels, groups = [], []
    for corpus, counts, _ in FAMILY:
        for j, (n10, n01) in enumerate(counts):
            baseline = systems[j + 1]
            for a_correct, rows in ((True, n10), (False, n01)):
                a, b = (P, L) if a_correct else (L, P)
                for _ in range(rows):
                    labels.append(P)
                    groups.append(corpus)
                    for name in systems:
                        outputs[name].append(b if name == baseline else a)
        # a few concordant rows per corpus
        for _ in range(3):
            labels.append(P)
            groups.append(corpus)
            for name in systems:
                outputs[name].append(P)
    return outputs, labels, groups


def test_evaluate_run_reproduces_family_layout():
    outputs, labels, groups = _family_run()
    report = evaluate_run(outputs, labels, groups)
    assert len(report.comparisons) == 18
    assert [(c.group, c.system_b) for c in report.comparisons[:3]] == [
        ("nigerian", "base1"), ("nigerian", "base2"), ("nigerian", "base3")]
    expected = [value for _, _, values in FAMILY for value in values]
    for comparison, want in zip(report.comparisons, expected):
        assert _matches(format_p(comparison.result.adj_p), want)
    enron = report.comparisons[6]
    assert (enron.outcomes.n10, enron.outcomes.n01) == (263, 4)
    assert report.system("phishguard").groups[0].kind is GroupKind.PHISHING


def test_evaluate_run_groups_and_pairs():
    outputs = {"a": [P, L, P, L], "b": [P, P, L, L]}
    labels = [P, L, P, L]
    report = evaluate_run(outputs, labels, groups=["x", "x", "y", "y"], pairs=[("b", "a")])
    a = report.system("a")
    assert a.pooled.accuracy == 1.0
    assert [g.group for g in a.groups] == ["x", "y"]
    assert all(g.kind is GroupKind.MIXED for g in a.groups)
    assert [(c.system_a, c.system_b) for c in report.comparisons] == [("b", "a"), ("b", "a")]
    assert report.comparisons[0].outcomes.n01 == 1

    with pytest.raises(MissingInput):
        evaluate_run({}, labels)
    with pytest.raises(MissingInput):
        evaluate_run(outputs, [P, L, P, Label.UNLABELED])
    with pytest.raises(PreconditionFailed):
        evaluate_run(outputs, labels, pairs=[("a", "missing")])


def test_paired_outcomes():
    o = paired_outcomes([P, P, L, L], [L, P, P, L], [P, P, P, L])
    assert (o.n10, o.n01, o.n11, o.n00) == (1, 1, 2, 0)
    with pytest.raises(LengthMismatch):
        paired_outcomes([P], [P, P], [P])


def test_render_report_sections():
    outputs, labels, groups = _family_run()
    text = render_report(evaluate_run(outputs, labels, groups))
    assert "Overall metrics (%)" in text
    assert "Per-corpus rates (%)" in text
    assert "McNemar comparisons (one-sided, BH-adjusted)" in text
    assert "<.001" in text
    assert "exact_binomial" in text and "mid_p" in text

    single = render_report(evaluate_run({"only": [P, L]}, [P, L]))
    assert "McNemar" not in single


def test_format_p():
    assert format_p(None) == "n/a"
    assert format_p(0.0004) == "<.001"
    assert format_p(0.0105) == "0.011"
    assert format_p(1.0) == "1.000"


# ── Prediction files ──────────────────────────────────────────────────────────

def _write(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def test_load_predictions_with_truth_field(tmp_path):
    path = _write(tmp_path / "preds.jsonl", [
        {"email_id": "e1", "system": "a", "label": "phishing", "truth": "phishing", "corpus": "c1"},
        {"email_id": "e2", "system": "a", "label": "legitimate", "truth": "legitimate", "corpus": "c2"},
        {"email_id": "e1", "system": "b", "label": "legitimate"},
        {"email_id": "e2", "system": "b", "label": "legitimate"},
    ])
    loaded = load_predictions([path])
    assert loaded.email_ids == ["e1", "e2"]
    assert loaded.labels == [P, L]
    assert loaded.groups == ["c1", "c2"]
    assert loaded.outputs == {"a": [P, L], "b": [L, L]}


def test_load_predictions_with_labels_file(tmp_path):
    preds = _write(tmp_path / "results.jsonl", [
        {"source_id": "m1", "label": "phishing", "score": 0.9},
        {"source_id": "m2", "label": "phishing", "score": 0.7},
    ])
    labels = _write(tmp_path / "labels.jsonl", [
        {"email_id": "m1", "label": "phishing", "corpus": "nazario"},
        {"email_id": "m2", "label": "ham", "corpus": "enron"},
    ])
    loaded = load_predictions([preds], labels)
    assert list(loaded.outputs) == ["phishguard"]
    assert loaded.labels == [P, L]
    assert loaded.groups == ["nazario", "enron"]


def test_load_predictions_errors(tmp_path):
    unlabeled = _write(tmp_path / "u.jsonl", [{"email_id": "x", "label": "phishing"}])
    with pytest.raises(MissingInput):
        load_predictions([unlabeled])

    gap = _write(tmp_path / "gap.jsonl", [
        {"email_id": "e1", "system": "a", "label": "phishing", "truth": "phishing"},
        {"email_id": "e2", "system": "a", "label": "phishing", "truth": "phishing"},
        {"email_id": "e1", "system": "b", "label": "phishing"},
    ])
    with pytest.raises(MissingInput):
        load_predictions([gap])

    empty = _write(tmp_path / "empty.jsonl", [])
    with pytest.raises(MissingInput):
        load_predictions([empty])
