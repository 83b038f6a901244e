import pytest

from app.core.exceptions import MachineError
from app.core.parser import parse
from app.core.pretty import pretty
from app.models.syntax import CoVar, Cut, DPair, Inj, Refl, Shift, Sort, numeral
from app.services.machine import (
    FINISHED, VALUE_ON_FREE_COVAR, BigStepMachine, Outcome, answer, reduce_term, run, run_nef,
    run_report, step,
)
from app.services.macros import expand


def prepared(text: str):
    return expand(parse(text, "closure"))


def result(text: str, fuel=None):
    outcome = run(prepared(text), fuel)
    return outcome, answer(outcome.closure)


class TestEliminations:
    def test_split(self):
        outcome, value = result("<(refl, refl) | split~ (a1, a2) -> <a2 | alpha>>")
        assert outcome.kind is Outcome.NORMAL
        assert outcome.reason == VALUE_ON_FREE_COVAR
        assert value == Refl()

    def test_case(self):
        outcome, value = result("<inj2 refl | case~ {inj1 a -> <inj1 a | alpha> | inj2 b -> <[0, b] | alpha>}>")
        assert value == DPair(numeral(0), Refl())

    def test_dest_substitutes_the_witness(self):
        _, value = result("<[2, refl] | dest~ (x, a) -> <[S(x), a] | alpha>>")
        assert value == DPair(numeral(3), Refl())

    def test_nested_projection_reads_first_component(self):
        _, value = result("<pi1(pi1(((inj1 refl, inj2 refl), refl))) | alpha>")
        assert value == Inj(1, Refl())

    def test_term_abstraction(self):
        _, value = result("<lam x. [x, refl] | 2 . alpha>")
        assert value == DPair(numeral(2), Refl())

    def test_refl_against_eq(self):
        _, value = result("<refl | eq~ -> <[1, refl] | alpha>>")
        assert value == DPair(numeral(1), Refl())

    def test_mismatch_is_stuck(self):
        outcome, _ = result("<refl | split~ (a, b) -> <a | alpha>>")
        assert outcome.kind is Outcome.STUCK
        assert outcome.reason


class TestControl:
    def test_mu_binds_the_context(self):
        _, value = result("<mu 'k. <refl | 'k> | alpha>")
        assert value == Refl()

    def test_shift_release(self):
        outcome = step(prepared("<shift(<refl | tp>) | alpha>"))
        assert outcome.rule == "shift-release"

    def test_prf(self):
        _, value = result("<prf [0, refl] | alpha>")
        assert value == Refl()

    def test_backtracking(self):
        _, value = result(
            "<catch 'k (inj2 (fun a. throw 'k (inj1 a))) | case~ {inj1 a -> <a | alpha> | inj2 g -> <g refl | alpha>}>"
        )
        assert value == Refl()

    def test_term_command(self):
        _, value = result("<S(0) | mu~ x. <[x, refl] | alpha>>")
        assert value == DPair(numeral(1), Refl())


class TestLaziness:
    STREAM = "cofix(0; (b, x). (refl, b S(x)))"

    def test_unforced_stream_is_not_unfolded(self):
        machine = BigStepMachine()
        outcome = machine.run(prepared(f"<{self.STREAM} | alpha>"))
        assert outcome.kind is Outcome.NORMAL
        assert machine.stats["cofix-unfold"] == 0

    def test_forcing_unfolds_once_per_cell(self):
        machine = BigStepMachine()
        text = f"<{self.STREAM} | split~ (p, q) -> <q | split~ (p2, q2) -> <p2 | alpha>>>"
        outcome = machine.run(prepared(text))
        assert answer(outcome.closure) == Refl()
        assert machine.stats["cofix-unfold"] == 2

    def test_unbound_variable_under_forcing_context_is_finished(self):
        outcome = run(parse("<a | split~ (p, q) -> <p | alpha>>", "closure"))
        assert outcome.kind is Outcome.NORMAL
        assert outcome.reason == FINISHED


class TestSubEvaluation:
    def test_run_nef(self):
        proof = expand(parse("(lam x. [S(x), refl]) 1", "proof"))
        value, _ = run_nef(proof)
        assert value == DPair(numeral(2), Refl())

    def test_run_nef_stuck(self):
        with pytest.raises(MachineError):
            run_nef(expand(parse("refl refl", "proof")))

    def test_run_nef_needs_a_value(self):
        with pytest.raises(MachineError):
            run_nef(Shift(Cut(Refl(), CoVar("beta"))))

    def test_reduce_rec(self):
        assert reduce_term(parse("rec(3; 0; (m, r). S(S(r)))", "term")) == numeral(6)

    def test_reduce_wit(self):
        assert reduce_term(parse("wit [3, refl]", "term")) == numeral(3)

    def test_reduce_keeps_free_variables(self):
        term = parse("(lam y. S(y)) x", "term", scope={"x": Sort.TERM})
        assert reduce_term(term) == parse("S(x)", "term", scope={"x": Sort.TERM})


class TestDriver:
    def test_fuel_exhaustion(self):
        outcome = run(prepared("<(refl, refl) | split~ (a1, a2) -> <a2 | alpha>>"), fuel=1)
        assert outcome.kind is Outcome.FUEL_EXHAUSTED
        assert outcome.steps == 1

    def test_trace_hook(self):
        seen = []
        machine = BigStepMachine(trace=lambda i, rule, cl: seen.append(rule))
        machine.run(prepared("<mu 'k. <refl | 'k> | alpha>"))
        assert seen == ["mu", "lookup-covar"]

    def test_nested_evaluation_is_not_traced(self):
        seen = []
        machine = BigStepMachine(trace=lambda i, rule, cl: seen.append((i, pretty(cl.cmd))))
        outcome = machine.run(prepared("<[wit [3, refl], refl] | alpha>"))
        assert outcome.kind is Outcome.NORMAL
        assert machine.stats["wit"] == 1
        assert [i for i, _ in seen] == list(range(1, len(seen) + 1))
        assert not any("alpha0" in text for _, text in seen)

    def test_report(self):
        report = run_report(run(prepared("<prf [0, refl] | alpha>")))
        assert report.outcome == "normal"
        assert report.answer == "refl"
        assert report.machine == "big"
