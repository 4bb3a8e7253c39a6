import json

import pytest

from artifacts import read_jsonl
from extensions import db
from fusion.checkpoint import file_digest
from models import DetectionRow, RunRecord
from tests.helpers import NEUTRAL_LINES, make_message, unanimous_corpus, url_oracle_corpus


@pytest.fixture
def inbox(tmp_path, validation_bytes):
    folder = tmp_path / "inbox"
    folder.mkdir()
    (folder / "alert.eml").write_bytes(validation_bytes)
    (folder / "notes.eml").write_bytes(make_message(subject="Notes", body=NEUTRAL_LINES[0]))
    return folder


def _labeled_dir(root, emails):
    for raw in emails:
        folder = root / raw.corpus_label.value
        folder.mkdir(parents=True, exist_ok=True)
        (folder / f"{raw.source_id.replace(':', '_')}.eml").write_bytes(raw.data)
    return root


@pytest.fixture
def oracle_dir(tmp_path):
    return _labeled_dir(tmp_path / "oracle", url_oracle_corpus(24, seed=2))


def _errors(run_dir):
    return read_jsonl(run_dir / "errors.jsonl")


# ── classify ──────────────────────────────────────────────────────────────────

def test_classify_is_deterministic(runner, inbox, tmp_path):
    outputs = []
    for name in ("a", "b"):
        result = runner.invoke(args=["classify", str(inbox), "--output-dir", str(tmp_path / name)])
        assert result.exit_code == 1, result.output
        assert "2 emails classified, 1 phishing" in result.output
        outputs.append((tmp_path / name / "results.jsonl").read_bytes())
    assert outputs[0] == outputs[1]

    rows = [json.loads(line) for line in outputs[0].decode("utf-8").splitlines()]
    assert [r["source_id"] for r in rows] == ["inbox:alert.eml", "inbox:notes.eml"]
    assert rows[0]["label"] == "phishing"
    assert set(rows[0]["weights"]) == {"text", "url", "metadata"}
    assert [r["role"] for r in rows[0]["reports"]] == ["text", "url", "metadata"]


def test_classify_records_ledger(app, runner, inbox, tmp_path):
    runner.invoke(args=["classify", str(inbox), "--fusion", "static", "--output-dir", str(tmp_path / "out")])
    with app.app_context():
        runs = db.session.scalars(db.select(RunRecord)).all()
        assert len(runs) == 1
        assert runs[0].command == "classify"
        assert runs[0].exit_status == 0
        assert [d.source_id for d in runs[0].detections] == ["inbox:alert.eml", "inbox:notes.eml"]
        assert db.session.scalars(db.select(DetectionRow)).all()[0].config_hash == runs[0].config_hash


def test_classify_with_explanations(runner, inbox, tmp_path):
    out = tmp_path / "explained"
    runner.invoke(args=["classify", str(inbox), "--explain", "plain", "--output-dir", str(out)])
    rows = read_jsonl(out / "results.jsonl")
    assert rows[0]["explanation"].startswith("This email looks like a phishing attempt.")
    assert rows[0]["explain_mode"] == "plain"


def test_classify_unreadable_input(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(args=["classify", str(tmp_path / "missing.eml"), "--output-dir", str(out)])
    assert result.exit_code == 2
    assert _errors(out)[0]["error"] == "io_failure"


def test_classify_explain_with_ablation_is_refused(app, runner, inbox, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(args=["classify", str(inbox), "--explain", "plain", "--ablate", "url",
                                 "--output-dir", str(out)])
    assert result.exit_code == 2
    assert _errors(out)[0]["error"] == "precondition_failed"
    with app.app_context():
        run = db.session.scalars(db.select(RunRecord)).one()
        assert run.error_code == "precondition_failed"


def test_classify_ablation_zeroes_weight(runner, inbox, tmp_path):
    out = tmp_path / "ablated"
    runner.invoke(args=["classify", str(inbox), "--ablate", "metadata", "--fusion", "static",
                        "--output-dir", str(out)])
    rows = read_jsonl(out / "results.jsonl")
    assert all(r["weights"]["metadata"] == 0.0 for r in rows)
    assert all(len(r["reports"]) == 2 for r in rows)


# ── train ─────────────────────────────────────────────────────────────────────

def _train(runner, corpus, out, *extra):
    return runner.invoke(args=["train", "--corpus", f"{corpus}:eml_dir", "--passes", "1", "--batch-size", "8",
                               "--output-dir", str(out), *extra])


def test_train_is_deterministic(runner, oracle_dir, tmp_path):
    digests = []
    for name in ("a", "b"):
        result = _train(runner, oracle_dir, tmp_path / name)
        assert result.exit_code == 0, result.output
        digests.append(file_digest(tmp_path / name / "checkpoints" / "policy.json"))
    assert digests[0] == digests[1]
    log = read_jsonl(tmp_path / "a" / "training.jsonl")
    assert [row["batch"] for row in log] == [1, 2, 3]
    assert all(row["policy"] == "policy" for row in log)


def test_train_refuses_static_fusion(runner, oracle_dir, tmp_path):
    result = _train(runner, oracle_dir, tmp_path / "s", "--fusion", "static")
    assert result.exit_code == 2
    assert _errors(tmp_path / "s")[0]["error"] == "precondition_failed"


def test_train_resume_continues_batches(runner, oracle_dir, tmp_path):
    _train(runner, oracle_dir, tmp_path / "first")
    result = _train(runner, oracle_dir, tmp_path / "second", "--resume",
                    str(tmp_path / "first" / "checkpoints" / "policy.json"))
    assert result.exit_code == 0, result.output
    assert read_jsonl(tmp_path / "second" / "training.jsonl")[0]["batch"] == 4


def test_trained_checkpoint_classifies(runner, oracle_dir, inbox, tmp_path):
    _train(runner, oracle_dir, tmp_path / "t")
    result = runner.invoke(args=["classify", str(inbox), "--checkpoint",
                                 str(tmp_path / "t" / "checkpoints" / "policy.json"),
                                 "--output-dir", str(tmp_path / "c")])
    assert result.exit_code in (0, 1), result.output
    assert len(read_jsonl(tmp_path / "c" / "results.jsonl")) == 2


# ── eval ──────────────────────────────────────────────────────────────────────

def _jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def test_eval_prediction_files(runner, tmp_path):
    preds = _jsonl(tmp_path / "preds.jsonl", [
        {"email_id": f"e{i}", "system": system, "label": label}
        for i in range(4)
        for system, label in (("phishguard", "phishing" if i < 2 else "legitimate"), ("baseline", "phishing"))
    ])
    labels = _jsonl(tmp_path / "labels.jsonl", [
        {"email_id": f"e{i}", "label": "phishing" if i < 2 else "legitimate", "corpus": "c1"} for i in range(4)
    ])
    out = tmp_path / "eval"
    result = runner.invoke(args=["eval", "--predictions", str(preds), "--labels", str(labels),
                                 "--compare", "phishguard:baseline", "--output-dir", str(out)])
    assert result.exit_code == 0, result.output
    assert "McNemar comparisons" in result.output
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["systems"][0]["pooled"]["accuracy"] == 1.0
    assert metrics["comparisons"][0]["outcomes"]["n10"] == 2
    assert (out / "report.txt").read_text() in result.output


def test_eval_without_labels(runner, tmp_path):
    preds = _jsonl(tmp_path / "preds.jsonl", [{"email_id": "e1", "label": "phishing"}])
    out = tmp_path / "eval"
    result = runner.invoke(args=["eval", "--predictions", str(preds), "--output-dir", str(out)])
    assert result.exit_code == 2
    assert _errors(out)[0]["error"] == "missing_input"


def test_eval_live_run(runner, oracle_dir, tmp_path):
    out = tmp_path / "live"
    result = runner.invoke(args=["eval", "--corpus", f"{oracle_dir}:eml_dir", "--fusion", "static",
                                 "--output-dir", str(out)])
    assert result.exit_code == 0, result.output
    assert len(read_jsonl(out / "results.jsonl")) == 24
    assert "Overall metrics (%)" in (out / "report.txt").read_text()


# ── adversarial and quality ───────────────────────────────────────────────────

def test_adversarial_command(runner, tmp_path):
    corpus = _labeled_dir(tmp_path / "unanimous", unanimous_corpus(16))
    out = tmp_path / "adv"
    result = runner.invoke(args=["adversarial", "--corpus", f"{corpus}:eml_dir", "--fusion", "static",
                                 "--rounds", "2", "--output-dir", str(out)])
    assert result.exit_code == 0, result.output
    rounds = read_jsonl(out / "rounds.jsonl")
    assert [r["round"] for r in rounds] == [1, 2]
    assert (out / "round_2" / "variants.jsonl").exists()
    assert len(read_jsonl(out / "pool.jsonl")) >= 16


def test_quality_command(runner, inbox, tmp_path):
    classified = tmp_path / "classified"
    runner.invoke(args=["classify", str(inbox), "--explain", "plain", "--output-dir", str(classified)])
    out = tmp_path / "quality"
    result = runner.invoke(args=["quality", str(classified / "results.jsonl"), "--topics", "2",
                                 "--output-dir", str(out)])
    assert result.exit_code == 0, result.output
    rows = read_jsonl(out / "quality.jsonl")
    assert [r["id"] for r in rows[:2]] == ["inbox:alert.eml", "inbox:notes.eml"]
    assert rows[-1]["summary"] is True
    assert "fres=" in result.output


def test_quality_needs_explanations(runner, tmp_path):
    path = _jsonl(tmp_path / "bare.jsonl", [{"id": "x", "text": "only text"}])
    out = tmp_path / "q"
    result = runner.invoke(args=["quality", str(path), "--output-dir", str(out)])
    assert result.exit_code == 2
    assert _errors(out)[0]["error"] == "missing_input"
