import pytest

from app.core.classify import (
    classify_nef, is_codelimited_context, is_delimited_command, is_storable, is_strong_value,
    is_term_value, is_weak_value, mentions_tp,
)
from app.core.parser import parse
from app.models.syntax import CoVar, Sort, numeral
from app.services.macros import expand


@pytest.mark.parametrize("text", [
    "refl",
    "(refl, [0, refl])",
    "inj1 a",
    "lam x. refl",
    "fun a. a",
    "fix(2; refl; (c, x). c)",
    "cofix(0; (b, x). (refl, b S(x)))",
    "let a = refl in (a, a)",
    "prf [0, refl]",
    "pi1((refl, refl))",
])
def test_nef_proofs(text):
    assert classify_nef(parse(text, "proof"))


@pytest.mark.parametrize("text", [
    "mu 'k. <refl | 'k>",
    "catch alpha refl",
    "exfalso a",
    "(lam x. refl) 0",
    "(refl, mu 'k. <refl | 'k>)",
])
def test_non_nef_proofs(text):
    assert not classify_nef(parse(text, "proof"))


def test_nef_is_stable_under_expansion():
    proof = parse("let a = [0, refl] in prf a", "proof")
    assert classify_nef(proof) == classify_nef(expand(proof))


def test_values():
    assert is_term_value(numeral(3))
    assert is_term_value(parse("lam x. S(x)", "term"))
    assert not is_term_value(parse("(lam x. x) 0", "term"))
    assert is_strong_value(parse("(refl, [1, refl])", "proof"))
    assert is_weak_value(parse("a", "proof", scope={"a": Sort.PROOF}))
    assert not is_weak_value(parse("[wit [0, refl], refl]", "proof"))


def test_storable_fixpoints_need_value_index():
    assert is_storable(parse("fix(3; refl; (c, x). c)", "proof"))
    assert not is_storable(parse("fix(wit [0, refl]; refl; (c, x). c)", "proof"))


def test_delimited_commands():
    assert is_delimited_command(parse("<refl | tp>", "command"))
    assert is_delimited_command(parse("<[0, refl] | dest~ (x, a) -> <a | tp>>", "command"))
    assert not is_delimited_command(parse("<refl | alpha>", "command"))
    assert mentions_tp(CoVar("tp"))


def test_codelimited_context():
    assert is_codelimited_context(parse("coshift(<ctp | alpha>)", "context"))
