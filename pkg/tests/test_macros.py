import pytest

from app.core.exceptions import MacroError
from app.core.parser import parse
from app.models.syntax import TP, CoVar, Cut, DestC, EqC, Mu, MuT, PStack, PVar, Shift, Sort, SplitC, TStack
from app.services.macros import admissibility_suite, contains_sugar, expand


def expanded(text: str, **scope):
    return expand(parse(text, "proof", scope={name: Sort(sort) for name, sort in scope.items()}))


class TestExpand:
    def test_core_proofs_are_unchanged(self):
        proof = parse("(refl, [0, refl])", "proof")
        assert expand(proof) == proof

    @pytest.mark.parametrize("text", [
        "let a = refl in a",
        "pi1((refl, refl))",
        "catch alpha refl",
        "prf [0, refl]",
        "(lam x. refl) 0",
    ])
    def test_no_sugar_remains(self, text):
        proof = parse(text, "proof")
        assert contains_sugar(proof)
        assert not contains_sugar(expand(proof))

    def test_let_on_nef_is_delimited(self):
        proof = expanded("let a = [0, refl] in a")
        assert isinstance(proof, Shift)
        assert isinstance(proof.cmd.ctx, MuT)
        assert proof.cmd.ctx.cmd.ctx == CoVar(TP)

    def test_let_on_non_nef_binds_a_covariable(self):
        proof = expanded("let a = catch alpha refl in a")
        assert isinstance(proof, Mu)
        assert proof.covar != TP

    def test_prf_destructs_into_the_delimiter(self):
        proof = expanded("prf [0, refl]")
        assert isinstance(proof, Shift)
        assert isinstance(proof.cmd.ctx, DestC)

    def test_prf_needs_nef(self):
        with pytest.raises(MacroError):
            expanded("prf (catch alpha [0, refl])")

    def test_subst_uses_eq_destructor(self):
        proof = expanded("subst h k", h="proof", k="proof")
        assert isinstance(proof, Mu)
        assert isinstance(proof.cmd.ctx, EqC)

    def test_applications(self):
        term_app = expanded("f 3", f="proof")
        proof_app = expanded("g a", g="proof", a="proof")
        assert isinstance(term_app.cmd.ctx, TStack)
        assert isinstance(proof_app.cmd.ctx, PStack)

    def test_stores_and_commands(self):
        cl = parse("<a | alpha> [a := prf [0, refl]]", "closure")
        result = expand(cl)
        assert isinstance(result.cmd, Cut)
        assert not contains_sugar(result)

    def test_nested_projections_keep_distinct_binders(self):
        proof = expanded("pi1(pi1(fix(0; a; (c, x). pi2(c))))", a="proof")
        split = proof.cmd.ctx
        assert isinstance(split, SplitC)
        assert split.var1 != split.var2
        assert split.cmd.proof == PVar(split.var1)


def test_admissibility_cases_cover_every_rule():
    rules = {case.rule for case in admissibility_suite()}
    assert {"let", "split", "case", "dest", "prf", "subst", "exfalso", "catch", "throw"} <= rules
