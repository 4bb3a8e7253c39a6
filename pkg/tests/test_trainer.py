import numpy as np
import pytest

from config import FusionMode, PpoConfig
from errors import EmptyCorpus, PreconditionFailed
from fusion import Detector, PolicyParams, collect_samples, infer, load_checkpoint, train
from fusion.checkpoint import file_digest
from fusion.trainer import mean_weights
from parsing import parse_eml
from parsing.models import Label
from tests.helpers import make_message, raw, unanimous_corpus, url_oracle_corpus


def test_policy_learns_url_agent_on_mock_corpus(mock_backend, resources):
    cfg = PpoConfig()
    result, samples = train(url_oracle_corpus(200), mock_backend, cfg, resources=resources, jobs=2)
    w = mean_weights(result.params, samples)
    assert int(np.argmax(w)) == 1
    assert w[1] > 0.6
    assert len(result.log) == result.batch_counter


def test_training_is_deterministic(tmp_path, mock_backend, resources):
    corpus = url_oracle_corpus(40, seed=3)
    cfg = PpoConfig(passes=2, batch_size=16, seed=11)
    digests = []
    for name in ("a", "b"):
        result, _ = train(corpus, mock_backend, cfg, resources=resources, jobs=3,
                          checkpoint_dir=tmp_path / name)
        digests.append(file_digest(result.checkpoints[-1]))
    assert digests[0] == digests[1]


def test_resume_continues_batch_counter(tmp_path, mock_backend, resources):
    corpus = url_oracle_corpus(40, seed=5)
    cfg = PpoConfig(passes=1, batch_size=16, checkpoint_every=2, seed=1)
    first, _ = train(corpus, mock_backend, cfg, resources=resources, checkpoint_dir=tmp_path)
    assert first.batch_counter == 3
    assert (tmp_path / "policy-00002.json").exists()

    checkpoint = load_checkpoint(tmp_path / "policy.json")
    assert checkpoint.batch_counter == 3
    steps_before = checkpoint.optimizer.t
    second, _ = train(corpus, mock_backend, cfg, resources=resources, resume=checkpoint,
                      checkpoint_dir=tmp_path, checkpoint_name="resumed")
    assert second.batch_counter == 6
    assert second.log[0]["batch"] == 4
    assert load_checkpoint(tmp_path / "resumed.json").optimizer.t > steps_before


def test_collect_samples_needs_labels(mock_backend, resources):
    with pytest.raises(EmptyCorpus):
        collect_samples([], mock_backend, resources)
    with pytest.raises(PreconditionFailed):
        collect_samples([raw("u", make_message())], mock_backend, resources)


def test_static_detector_on_unanimous_corpus(mock_backend, resources):
    corpus = unanimous_corpus(20)
    detector = Detector(None, FusionMode.parse("static"))
    results = detector.detect_many([parse_eml(r) for r in corpus], mock_backend, resources, jobs=4)
    assert [r.label for r in results] == [r.corpus_label for r in corpus]
    assert [r.source_id for r in results] == [r.source_id for r in corpus]
    assert all(len(r.reports) == 3 for r in results)


def test_infer_single_email(mock_backend, resources, validation_bytes):
    result = infer(PolicyParams.initialize(seed=0), parse_eml(raw("validation", validation_bytes)), mock_backend,
                   resources=resources)
    assert result.label is Label.PHISHING
    assert sum(result.weights) == pytest.approx(1.0)
