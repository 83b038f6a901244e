from pathlib import Path

import pytest

from app.core.parser import parse
from app.models.syntax import Closure, CoVar, Cut, Sort
from app.services.typecheck import TypingContext

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def corpus_dir() -> Path:
    return ROOT / "corpus"


@pytest.fixture
def answer_ctx():
    """Γ with the answer co-variable α bound at a formula given as text"""
    def build(formula: str) -> TypingContext:
        return TypingContext().extend(Sort.COVAR, "alpha", parse(formula, "formula"))
    return build


def closure(text: str) -> Closure:
    return parse(text, "closure")


def on_alpha(proof) -> Closure:
    return Closure(Cut(proof, CoVar("alpha")), ())
