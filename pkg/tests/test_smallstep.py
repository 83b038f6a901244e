import pytest

from app.core.parser import parse
from app.models.syntax import Cut, DPair, Refl, Shift, numeral
from app.services.machine import Outcome, answer
from app.services.macros import expand
from app.services.smallstep import Focus, FocusedCommand, SmallStepMachine, agree, focus, srun


def prepared(text: str):
    return expand(parse(text, "closure"))


CLOSURES = [
    "<(refl, refl) | split~ (a1, a2) -> <a2 | alpha>>",
    "<inj2 refl | case~ {inj1 a -> <inj1 a | alpha> | inj2 b -> <[0, b] | alpha>}>",
    "<[2, refl] | dest~ (x, a) -> <[S(x), a] | alpha>>",
    "<lam x. [x, refl] | 2 . alpha>",
    "<mu 'k. <refl | 'k> | alpha>",
    "<prf [0, refl] | alpha>",
    "<S(0) | mu~ x. <[x, refl] | alpha>>",
    "<let a = [1, refl] in prf a | alpha>",
    "<fix(2; [0, refl]; (c, x). dest c as (y, e) in [S(y), refl]) | dest~ (m, e) -> <[m, e] | alpha>>",
    "<cofix(0; (b, x). (refl, b S(x))) | split~ (p, q) -> <q | split~ (p2, q2) -> <p2 | alpha>>>",
]


class TestFocus:
    def test_injection_starts_at_command(self):
        fc = focus(parse("<refl | alpha>", "command"))
        assert fc.focus is Focus.COMMAND

    def test_value_focus_requires_a_value(self):
        cmd = Cut(Shift(parse("<refl | tp>", "command")), parse("alpha", "context"))
        with pytest.raises(ValueError):
            FocusedCommand(cmd, Focus.VALUE)

    def test_term_focus_requires_a_term_command(self):
        with pytest.raises(ValueError):
            FocusedCommand(parse("<refl | alpha>", "command"), Focus.TERM)


class TestRuns:
    def test_split(self):
        outcome = srun(prepared(CLOSURES[0]))
        assert outcome.kind is Outcome.NORMAL
        assert answer(outcome.closure) == Refl()

    def test_witness_of_fixpoint(self):
        outcome = srun(prepared(CLOSURES[8]))
        assert answer(outcome.closure) == DPair(numeral(2), Refl())

    def test_trace_reports_foci(self):
        foci = []
        SmallStepMachine(trace=lambda i, rule, fc, store: foci.append(fc.focus)).run(prepared(CLOSURES[0]))
        assert Focus.FORCING in foci

    def test_stream_unfoldings_are_counted(self):
        machine = SmallStepMachine()
        machine.run(prepared(CLOSURES[9]))
        assert machine.stats["cofix-unfold"] == 2

    def test_fuel(self):
        outcome = srun(prepared(CLOSURES[0]), fuel=2)
        assert outcome.kind is Outcome.FUEL_EXHAUSTED


@pytest.mark.parametrize("text", CLOSURES)
def test_machines_agree(text):
    report = agree(prepared(text))
    assert report.agree, report.detail
    assert report.big.outcome == "normal"
