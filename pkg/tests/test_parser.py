import pytest

from app.core.exceptions import ParseError
from app.core.names import alpha_eq
from app.core.parser import CheckItem, Definition, RunItem, parse, parse_file
from app.core.pretty import pretty
from app.models.formulas import And, Bot, Eq, Exists, Forall, Nu, Or, Pi
from app.models.syntax import (
    AppT, Cofix, CoVar, DPair, Ind, LamP, LamT, PVar, Refl, Sort, Succ, TApp, TCut, TLam, TVar,
    numeral, numeral_value,
)
from app.services.corpus import ac_n, corpus_files, dc, dc_type, load


class TestTerms:
    def test_numerals(self):
        assert numeral_value(parse("3", "term")) == 3
        assert parse("S(0)", "term") == numeral(1)

    def test_lambda_with_term_body_is_a_term(self):
        assert isinstance(parse("lam x. S(x)", "term"), TLam)

    def test_application(self):
        term = parse("f 2", "term", scope={"f": Sort.TERM})
        assert term == TApp(TVar("f"), numeral(2))


class TestProofs:
    def test_lambda_with_proof_body_is_a_proof(self):
        assert isinstance(parse("lam x. refl", "proof"), LamT)
        assert isinstance(parse("fun a. a", "proof"), LamP)

    def test_dependent_pair(self):
        assert parse("[2, refl]", "proof") == DPair(numeral(2), Refl())

    def test_application_sort_follows_argument(self):
        proof = parse("H n", "proof", scope={"H": Sort.PROOF, "n": Sort.TERM})
        assert proof == AppT(PVar("H"), TVar("n"))

    def test_fixpoints(self):
        ind = parse("fix(n; a; (c, x). pi2(c))", "proof", scope={"n": Sort.TERM, "a": Sort.PROOF})
        assert isinstance(ind, Ind)
        assert (ind.pvar, ind.tvar) == ("c", "x")
        stream = parse("cofix(0; (b, n). (H n, b S(n)))", "proof", scope={"H": Sort.PROOF})
        assert isinstance(stream, Cofix)
        assert stream.pvar == "b"

    def test_definitions_are_inlined(self):
        proof = parse("w", "proof", defs={"w": Refl()})
        assert proof == Refl()

    def test_term_command(self):
        cmd = parse("<S(0) | mu~ x. <refl | alpha>>", "command")
        assert isinstance(cmd, TCut)

    def test_covariables(self):
        assert parse("alpha", "context") == CoVar("alpha")
        assert parse("'k", "context") == CoVar("k")


class TestFormulas:
    def test_quantifiers(self):
        formula = parse("forall x : nat. exists y : nat. x = y", "formula")
        assert isinstance(formula, Forall)
        assert isinstance(formula.body, Exists)
        assert formula.body.body == Eq(TVar("x"), TVar("y"))

    def test_implication_is_a_nondependent_pi(self):
        formula = parse("0 = 0 -> 1 = 1", "formula")
        assert isinstance(formula, Pi)

    def test_nu(self):
        formula = parse("nu [0] (x, f). x = x /\\ f S(x) = 0", "formula")
        assert isinstance(formula, Nu)
        assert formula.index == numeral(0)

    def test_binder_closes_a_conjunction(self):
        formula = parse("0 = 0 /\\ forall n : nat. n = n -> bot", "formula")
        assert isinstance(formula, And)
        assert isinstance(formula.right, Forall)
        assert isinstance(formula.right.body, Pi)
        assert formula.right.body.cod == Bot()

    def test_binder_closes_a_disjunction(self):
        formula = parse("bot \\/ 0 = 0 /\\ exists y : nat. y = 0", "formula")
        assert isinstance(formula, Or)
        assert isinstance(formula.right, And)
        assert isinstance(formula.right.right, Exists)

    def test_closed_conjunction_before_implication(self):
        formula = parse("0 = 0 /\\ 1 = 1 -> bot", "formula")
        assert isinstance(formula, Pi)
        assert isinstance(formula.dom, And)

    def test_dependent_choice_statement_reads_back(self):
        statement = dc_type()
        assert isinstance(statement.cod.body.body, And)
        assert alpha_eq(parse(pretty(statement), "formula"), statement)


@pytest.mark.parametrize("name", ["ac_n.dlpaw", "basics.dlpaw", "dc.dlpaw"])
def test_corpus_file_loads(corpus_dir, name):
    assert corpus_dir / name in corpus_files(str(corpus_dir))
    assert load(corpus_dir / name).items


class TestErrors:
    def test_syntax_error_is_reported(self):
        with pytest.raises(ParseError) as info:
            parse("(refl,", "proof")
        assert info.value.diagnostics
        assert info.value.diagnostics[0].severity == "error"

    def test_projection_aliases_are_rejected(self):
        with pytest.raises(ParseError):
            parse("fst a", "proof", scope={"a": Sort.PROOF})

    def test_term_where_proof_expected(self):
        with pytest.raises(ParseError):
            parse("S(0)", "proof")


class TestRoundTrip:
    @pytest.mark.parametrize("text", [
        "fun c. split c as (a1, a2) in (a2, a1)",
        "lam n. fix(n; [0, refl]; (c, x). dest c as (y, e) in [S(y), refl])",
        "catch 'k (inj2 (fun a. throw 'k (inj1 a)))",
        "cofix(0; (b, x). (refl, b S(x)))",
    ])
    def test_pretty_then_parse(self, text):
        proof = parse(text, "proof")
        assert alpha_eq(parse(pretty(proof), "proof"), proof)

    def test_choice_programs(self):
        for program in (ac_n(), dc()):
            assert alpha_eq(parse(pretty(program), "proof"), program)


class TestFiles:
    SOURCE = """
    def w : exists x : nat. x = 2 := [2, refl]
    check prf w : wit w = 2
    run <prf w | alpha>
    """

    def test_items(self):
        source = parse_file(self.SOURCE)
        kinds = [type(item) for item in source.items]
        assert kinds == [Definition, CheckItem, RunItem]
        assert not source.errors

    def test_inlined_references(self):
        source = parse_file(self.SOURCE)
        run = source.items[2]
        assert run.closure.cmd.proof.proof == DPair(numeral(2), Refl())

    def test_references_as_variables(self):
        source = parse_file(self.SOURCE, inline=False)
        assert source.items[2].closure.cmd.proof.proof == PVar("w")
        assert "w" in source.definitions
