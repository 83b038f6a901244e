from hypothesis import given, strategies as st

from app.core.names import (
    all_names, alpha_eq, count_occurrences, free_names, fresh, occurs_free, rename,
    replace_occurrences, replace_selected, subst_proof, subst_term,
)
from app.core.parser import parse
from app.models.formulas import Eq
from app.models.syntax import DPair, LamT, Let, PVar, Refl, Sort, SplitS, Succ, TVar, Zero, numeral


NAMES = st.from_regex(r"[abx][0-9]{0,2}", fullmatch=True)


class TestFresh:
    def test_unused_hint_is_kept(self):
        assert fresh("a", {"b"}) == "a"

    def test_used_hint_gets_a_new_name(self):
        name = fresh("a", {"a", "a1"})
        assert name not in {"a", "a1"}
        assert name.startswith("a")

    @given(hint=NAMES, avoid=st.sets(NAMES, max_size=12))
    def test_result_avoids(self, hint, avoid):
        assert fresh(hint, avoid) not in avoid

    @given(hint=NAMES, avoid=st.sets(NAMES, max_size=12))
    def test_deterministic(self, hint, avoid):
        assert fresh(hint, avoid) == fresh(hint, sorted(avoid))


class TestFreeNames:
    def test_binders_are_not_free(self):
        proof = parse("lam x. [x, refl]", "proof")
        assert not occurs_free(proof, Sort.TERM, "x")

    def test_free_proof_variable(self):
        proof = parse("fun a. (a, b)", "proof")
        names = free_names(proof)
        assert "b" in names.of(Sort.PROOF)
        assert "a" not in names.of(Sort.PROOF)

    def test_covariables_are_tracked(self):
        proof = parse("mu 'k. <refl | alpha>", "proof")
        assert occurs_free(proof, Sort.COVAR, "alpha")
        assert not occurs_free(proof, Sort.COVAR, "k")

    def test_all_names_includes_bound(self):
        assert {"x"} <= all_names(parse("lam x. refl", "proof"))


class TestSugarBinders:
    def test_bound_subterm_is_a_field(self):
        let = Let("a", PVar("b"), PVar("a"))
        assert let.bound == PVar("b")
        assert let.bound_name(Let.BINDERS[0]) == "a"

    def test_bound_subterm_is_not_in_scope(self):
        # the binder scopes over the body only
        proof = SplitS(PVar("a1"), "a1", "a2", PVar("a2"))
        names = free_names(proof)
        assert names.of(Sort.PROOF) == {"a1"}

    def test_substitution_reaches_the_bound_subterm(self):
        let = Let("a", PVar("b"), PVar("a"))
        assert subst_proof(let, "b", Refl()) == Let("a", Refl(), PVar("a"))


class TestSubstitution:
    def test_term_substitution(self):
        formula = parse("forall y : nat. x = y", "formula")
        result = subst_term(formula, "x", numeral(2))
        assert alpha_eq(result, parse("forall y : nat. 2 = y", "formula"))

    def test_substitution_avoids_capture(self):
        formula = parse("forall y : nat. x = y", "formula")
        result = subst_term(formula, "x", TVar("y"))
        # the bound y is renamed, the free y stays free
        assert occurs_free(result, Sort.TERM, "y")
        assert not alpha_eq(result, parse("forall y : nat. y = y", "formula"))

    def test_proof_substitution(self):
        proof = parse("(a, refl)", "proof", scope={"a": Sort.PROOF})
        assert subst_proof(proof, "a", Refl()) == parse("(refl, refl)", "proof")

    def test_rename(self):
        proof = LamT("x", PVar("a"))
        assert rename(proof, Sort.PROOF, "a", "b") == LamT("x", PVar("b"))


class TestAlphaEquivalence:
    def test_bound_names_do_not_matter(self):
        assert alpha_eq(parse("lam x. [x, refl]", "proof"), parse("lam y. [y, refl]", "proof"))

    def test_free_names_matter(self):
        assert not alpha_eq(TVar("x"), TVar("y"))


class TestOccurrences:
    def test_count(self):
        formula = Eq(Succ(Zero()), Zero())
        assert count_occurrences(formula, Zero()) == 2

    def test_replace_all(self):
        formula = Eq(Zero(), Zero())
        assert replace_occurrences(formula, Zero(), TVar("n")) == Eq(TVar("n"), TVar("n"))

    def test_replace_selected(self):
        formula = Eq(Zero(), Zero())
        assert replace_selected(formula, Zero(), TVar("n"), [1]) == Eq(Zero(), TVar("n"))

    def test_replace_skips_bound_pattern(self):
        formula = parse("forall x : nat. x = y", "formula")
        assert replace_occurrences(formula, TVar("x"), Zero()) == formula


@given(x=NAMES, y=NAMES)
def test_bound_names_are_irrelevant(x, y):
    assert alpha_eq(LamT(x, DPair(TVar(x), Refl())), LamT(y, DPair(TVar(y), Refl())))
