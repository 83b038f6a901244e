import pytest

from app.core.parser import parse
from app.models.formulas import And, Bot, Eq, Nu
from app.models.syntax import DPair, PVar, Refl, Sort, TVar, Wit, numeral
from app.services.conversion import (
    Dep, Normalizer, OpenDep, TermDep, apply_deps, conv, normalize_formula, normalize_term,
    pattern_substitute, positive, render_deps, unfold_nu,
)
from app.services.macros import expand
from app.services.suite import CONVERSIONS

STREAM = "nu [0] (x, f). x = x /\\ f S(x) = 0"


def formula(text: str, **scope):
    return parse(text, "formula", scope={name: Sort(sort) for name, sort in scope.items()})


@pytest.mark.parametrize("left,right,expected", CONVERSIONS)
def test_conversion_table(left, right, expected):
    assert conv(formula(left), formula(right)) is expected


class TestNormalization:
    def test_numeral_disequality_is_bottom(self):
        assert normalize_formula(formula("S(1) = S(2)")) == Bot()

    def test_successors_are_peeled(self):
        assert normalize_formula(formula("S(x) = S(y)", x="term", y="term")) == Eq(TVar("x"), TVar("y"))

    def test_wit_through_let(self):
        term = expand(parse("wit (let a = [2, refl] in a)", "term"))
        assert normalize_term(term) == numeral(2)

    def test_wit_of_open_proof_is_kept(self):
        term = parse("wit e", "term", scope={"e": Sort.PROOF})
        assert normalize_term(term) == Wit(PVar("e"))

    def test_out_of_fuel_returns_input(self):
        term = parse("rec(50; 0; (m, r). S(r))", "term")
        assert Normalizer(term_fuel=3).term(term) == term


class TestNu:
    def test_unfold(self):
        nu = formula(STREAM)
        unfolded = unfold_nu(nu)
        assert isinstance(unfolded, And)
        assert unfolded.left == Eq(numeral(0), numeral(0))
        assert unfolded.right == Nu(numeral(1), nu.tvar, nu.fvar, nu.body)

    def test_unfolding_is_bounded(self):
        nu = formula(STREAM)
        twice = normalize_formula(unfold_nu(unfold_nu(nu).right))
        assert not conv(nu, And(Eq(numeral(0), numeral(0)), twice), unfold_cap=1)

    def test_positive(self):
        nu = formula(STREAM)
        assert positive(nu.fvar, nu.body)

    @pytest.mark.parametrize("text", [
        "f x = 0 -> x = x",
        "f x = 1",
    ])
    def test_not_positive(self, text):
        assert not positive("f", formula(text, f="term", x="term"))


class TestDependencies:
    def test_term_dependency(self):
        assert apply_deps((TermDep("x", numeral(2)),), formula("x = x", x="term")) == Eq(numeral(2), numeral(2))

    def test_nef_dependency(self):
        sigma = (Dep(PVar("a"), DPair(numeral(3), Refl())),)
        result = apply_deps(sigma, formula("wit a = 3", a="proof"))
        assert conv(result, formula("3 = 3"))

    def test_non_nef_dependency_is_skipped(self):
        target = formula("wit a = 3", a="proof")
        sigma = (Dep(PVar("a"), parse("catch alpha [3, refl]", "proof")),)
        assert apply_deps(sigma, target) == target

    def test_dependent_pair_pattern(self):
        result = pattern_substitute(formula("x = 0", x="term"), DPair(TVar("x"), PVar("a")), PVar("e"))
        assert result == Eq(Wit(PVar("e")), numeral(0))

    def test_render(self):
        sigma = (TermDep("x", numeral(2)), OpenDep(Refl()))
        assert render_deps(sigma) == ["{x|2}", "{.|refl}"]
