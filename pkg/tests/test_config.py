import pytest
from pydantic import ValidationError

from config import Settings


def test_defaults():
    settings = Settings()
    assert settings.DEFAULT_MACHINE == "big"
    assert settings.NU_UNFOLD_CAP == 2


def test_environment_prefix(monkeypatch):
    monkeypatch.setenv("DLPAW_FUEL", "500")
    monkeypatch.setenv("DLPAW_EQ_REWRITE_MODE", "marked")
    settings = Settings()
    assert settings.FUEL == 500
    assert settings.EQ_REWRITE_MODE == "marked"


def test_negative_fuel_is_rejected(monkeypatch):
    monkeypatch.setenv("DLPAW_FUEL", "-1")
    with pytest.raises(ValidationError):
        Settings()
