import pytest

from fogduty.settings import clear_cache, load_config


@pytest.fixture(autouse=True)
def _fresh_config_cache(monkeypatch):
    monkeypatch.delenv("FOGDUTY_CONFIG", raising=False)
    clear_cache()
    yield
    clear_cache()


@pytest.fixture
def reference():
    return load_config()


@pytest.fixture
def regular(reference):
    return reference.regular


@pytest.fixture
def emergency(reference):
    return reference.emergency


@pytest.fixture
def groups(reference):
    return reference.schedule.groups
