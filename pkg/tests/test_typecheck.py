import pytest
from hypothesis import given, settings, strategies as st

from app.core.exceptions import TypeCheckError
from app.core.parser import parse
from app.models.formulas import Exists
from app.models.syntax import TP, Arrow, Binding, Nat, Sort, Wit
from app.services.conversion import render_deps
from app.services.macros import admissibility_suite, expand
from app.services.typecheck import (
    TypeChecker, TypingContext, check_closure, check_definition, check_store, infer_proof,
    infer_term, typecheck,
)

from tests.conftest import closure


def formula(text: str, **scope):
    return parse(text, "formula", scope={name: Sort(sort) for name, sort in scope.items()})


class TestTypingContext:
    def test_lookup_respects_sort(self):
        ctx = TypingContext().extend(Sort.TERM, "x", Nat())
        assert ctx.lookup(Sort.TERM, "x") == Nat()
        assert ctx.lookup(Sort.PROOF, "x") is None

    def test_names_are_distinct(self):
        ctx = TypingContext().extend(Sort.PROOF, "a", formula("0 = 0"))
        with pytest.raises(TypeCheckError) as e:
            ctx.extend(Sort.PROOF, "a", formula("1 = 1"))
        assert e.value.rule == "context"

    def test_delimiter_is_rebound(self):
        ctx = TypingContext().extend(Sort.COVAR, TP, formula("0 = 0"))
        ctx = ctx.extend(Sort.COVAR, TP, formula("1 = 1"))
        assert len(ctx) == 1
        assert ctx.lookup(Sort.COVAR, TP) == formula("1 = 1")

    def test_render(self):
        ctx = TypingContext().extend(Sort.TERM, "x", Nat())
        assert ctx.render() == ["x : nat"]


class TestTerms:
    def test_numeral(self):
        assert infer_term(TypingContext(), parse("S(S(0))", "term")) == Nat()

    def test_function(self):
        assert infer_term(TypingContext(), parse("lam x. S(x)", "term")) == Arrow(Nat(), Nat())

    def test_rec(self):
        assert infer_term(TypingContext(), parse("rec(2; 0; (m, r). S(r))", "term")) == Nat()

    def test_unbound(self):
        with pytest.raises(TypeCheckError) as e:
            infer_term(TypingContext(), parse("x", "term"))
        assert e.value.rule == "ax-t"

    def test_application_of_a_number(self):
        with pytest.raises(TypeCheckError) as e:
            infer_term(TypingContext(), parse("0 0", "term"))
        assert e.value.rule == "@"

    def test_wit_needs_nef(self):
        with pytest.raises(TypeCheckError) as e:
            infer_term(TypingContext(), Wit(expand(parse("catch alpha [0, refl]", "proof"))))
        assert e.value.rule == "wit"


@pytest.mark.parametrize("proof,target", [
    ("refl", "2 = 2"),
    ("refl", "(lam x. S(x)) 1 = 2"),
    ("refl", "rec(2; 0; (m, r). S(S(r))) = 4"),
    ("[3, refl]", "exists x : nat. x = 3"),
    ("lam x. refl", "forall x : nat. x = x"),
    ("fun a. a", "0 = 0 -> 0 = 0"),
    ("inj1 refl", "0 = 0 \\/ 1 = 2"),
    ("(refl, [0, refl])", "1 = 1 /\\ exists y : nat. y = 0"),
    ("catch alpha refl", "0 = 0"),
    ("prf [0, refl]", "0 = 0"),
    ("cofix(0; (b, x). (refl, b S(x)))", "nu [0] (x, f). x = x /\\ f S(x) = 0"),
])
def test_well_typed(proof, target):
    typecheck(parse(proof, "proof"), formula(target))


@pytest.mark.parametrize("proof,target,rule", [
    ("refl", "0 = 1", "refl"),
    ("[3, refl]", "exists x : nat. x = 4", "refl"),
    ("(refl, refl)", "0 = 0 \\/ 0 = 0", "and-r"),
    ("inj1 refl", "0 = 0 /\\ 0 = 0", "or-r"),
    ("lam x. refl", "0 = 0", "forall-r"),
])
def test_ill_typed(proof, target, rule):
    with pytest.raises(TypeCheckError) as e:
        typecheck(parse(proof, "proof"), formula(target))
    assert e.value.rule == rule


def test_error_rendering_names_both_sides():
    with pytest.raises(TypeCheckError) as e:
        typecheck(parse("refl", "proof"), formula("0 = 1"))
    text = e.value.render()
    assert text.startswith("[refl]")
    assert "expected" in text and "found" in text


def test_refl_is_not_inferable():
    with pytest.raises(TypeCheckError) as e:
        infer_proof(TypingContext(), (), parse("refl", "proof"))
    assert e.value.rule == "refl"


def test_dependent_pair_inference():
    inferred = infer_proof(TypingContext(), (), parse("[2, refl]", "proof"))
    assert isinstance(inferred, Exists)
    assert inferred.type == Nat()


@pytest.mark.parametrize("case", admissibility_suite(), ids=lambda c: c.rule)
def test_admissible(case):
    ctx = TypingContext()
    for hyp in case.hyps:
        ctx = ctx.extend(hyp.sort, hyp.name, hyp.formula)
    report = check_definition(case.rule, case.proof, case.formula, ctx)
    assert report.status == "ok", report.error


class TestDefinitionReport:
    def test_ok(self):
        report = check_definition("r", parse("refl", "proof"), formula("1 = 1"))
        assert report.status == "ok"
        assert report.declared_type == "1 = 1"

    def test_error_is_reported(self):
        report = check_definition("r", parse("refl", "proof"), formula("0 = 1"))
        assert report.status == "error"
        assert report.rule == "refl"

    def test_macro_error_is_reported(self):
        report = check_definition("p", parse("prf (catch alpha [0, refl])", "proof"), formula("0 = 0"))
        assert report.status == "error"
        assert report.rule is None


class TestStores:
    def test_store_extends_context(self):
        store = (Binding("a", Sort.PROOF, parse("[0, refl]", "proof")),)
        ctx, sigma = check_store(TypingContext(), (), store)
        assert ctx.lookup(Sort.PROOF, "a") is not None
        assert len(sigma) == 1

    def test_closure(self, answer_ctx):
        check_closure(answer_ctx("exists x : nat. x = x"), closure("<a | alpha> [a := [0, refl]]"))

    def test_stored_refl_takes_its_formula_from_use(self, answer_ctx):
        check_closure(answer_ctx("2 = 2"), closure("<a | alpha> [a := refl]"))

    def test_stored_refl_is_still_checked(self, answer_ctx):
        with pytest.raises(TypeCheckError) as e:
            check_closure(answer_ctx("0 = 2"), closure("<a | alpha> [a := refl]"))
        assert e.value.rule == "store"

    def test_ill_typed_closure(self, answer_ctx):
        with pytest.raises(TypeCheckError):
            check_closure(answer_ctx("0 = 1"), closure("<refl | alpha>"))

    def test_covariable_binding(self, answer_ctx):
        check_closure(answer_ctx("0 = 0"), closure("<refl | beta> [beta := alpha]"))


def test_unfolding_cap_bounds_conversion():
    stream = formula("nu [0] (x, f). x = x /\\ f S(x) = 0")
    unfolded = formula("0 = 0 /\\ nu [1] (x, f). x = x /\\ f S(x) = 0")
    ctx = TypingContext().extend(Sort.PROOF, "s", stream).extend(Sort.COVAR, "alpha", unfolded)
    cl = closure("<s | alpha>")
    TypeChecker().check_closure(ctx, cl)
    with pytest.raises(TypeCheckError) as e:
        TypeChecker(unfold_cap=0).check_closure(ctx, cl)
    assert e.value.rule in ("cut", "ax-r", "ax-l")


HYPOTHESES = TypingContext().extend(Sort.PROOF, "h", formula("0 = 0"))
STORED = ["h", "(h, h)", "(h, (h, h))", "[1, h]"]


@settings(max_examples=30, deadline=None)
@given(values=st.lists(st.sampled_from(STORED), max_size=4), cut=st.integers(min_value=0, max_value=4))
def test_store_checks_piecewise(values, cut):
    scope = {"h": Sort.PROOF}
    store = tuple(Binding(f"a{i}", Sort.PROOF, parse(v, "proof", scope=scope)) for i, v in enumerate(values))
    whole_ctx, whole_sigma = check_store(HYPOTHESES, (), store)
    ctx, sigma = check_store(HYPOTHESES, (), store[:cut])
    ctx, sigma = check_store(ctx, sigma, store[cut:])
    assert ctx.render() == whole_ctx.render()
    assert render_deps(sigma) == render_deps(whole_sigma)
