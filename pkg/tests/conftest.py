from pathlib import Path

import pytest

from config import ChatBackendConfig
from data import load_resources
from llm.mock import MockChatBackend

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def resources():
    return load_resources()


@pytest.fixture
def mock_backend(resources):
    return MockChatBackend(resources, ChatBackendConfig(backoff_initial=0.0))


@pytest.fixture
def validation_bytes():
    return (FIXTURES / "password_validation.eml").read_bytes()


@pytest.fixture
def app(tmp_path, monkeypatch):
    monkeypatch.setenv("PHISHGUARD_OUTPUT_ROOT", str(tmp_path / "runs"))
    monkeypatch.delenv("PHISHGUARD_EMBED_URL", raising=False)
    monkeypatch.delenv("PHISHGUARD_LM_URL", raising=False)
    from app import create_app
    return create_app({"TESTING": True, "SQLALCHEMY_DATABASE_URI": "sqlite://"})


@pytest.fixture
def runner(app):
    return app.test_cli_runner()
