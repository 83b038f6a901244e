"""
Focused small-step machine

Commands carry a focus index saying which part of the command is under examination. The
descent goes c → p → e → V → f for proof commands and c → t → π → V_t for term commands;
binders re-enter at c. Shifts and co-shifts at the head are reduced inside, each level
with its own focus.
"""
import enum
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Tuple

from config import settings
from app.core.classify import is_nef, is_term_value, is_weak_value, mentions_tp
from app.core.names import alpha_eq, all_names, fresh, occurs_free, rename, subst_covar, subst_term
from app.core.pretty import pretty
from app.models.syntax import (
    CTP, TP,
    Binding, CaseC, Closure, Cofix, CoShift, CoVar, Cut, DPair, DestC, EqC, Ind, Inj, LamP,
    LamT, Mu, MuT, MuTx, Node, PStack, PVar, Pair, Rec, Refl, Shift, Sort, SplitC, Store,
    Succ, TApp, TCut, TLam, TStack, TVar, Wit, Zero, FORCING_CLASSES,
)
from app.schemas.reports import AgreementReport
from app.services.machine import BigStepMachine, Outcome, StepOutcome, answer, run_report
from app.services.store import append, domain, lookup, lookup_split

logger = logging.getLogger(__name__)


class Focus(str, enum.Enum):
    COMMAND = "c"
    PROOF = "p"
    CONTEXT = "e"
    VALUE = "V"
    FORCING = "f"
    TERM = "t"
    COTERM = "pi"


PROOF_FOCI = (Focus.PROOF, Focus.CONTEXT, Focus.VALUE, Focus.FORCING)
TERM_FOCI = (Focus.TERM, Focus.COTERM)


@dataclass(frozen=True)
class FocusedCommand:
    """
    A command with its focus

    ``inner`` holds the foci of the commands nested in a head shift or co-shift, outermost
    first; it is empty until the machine starts reducing inside one.
    """
    cmd: Node
    focus: Focus = Focus.COMMAND
    inner: Tuple[Focus, ...] = ()

    def __post_init__(self):
        if self.focus in PROOF_FOCI and not isinstance(self.cmd, Cut):
            raise ValueError(f"focus {self.focus.value} requires a proof command")
        if self.focus in TERM_FOCI and not isinstance(self.cmd, TCut):
            raise ValueError(f"focus {self.focus.value} requires a term command")
        if self.focus in (Focus.VALUE, Focus.FORCING) and not is_weak_value(self.cmd.proof):
            raise ValueError(f"focus {self.focus.value} requires a value")

    def nested(self) -> "FocusedCommand":
        """Focus of the command inside the head shift or co-shift"""
        if isinstance(self.cmd.proof, Shift) and self.focus is Focus.PROOF:
            body = self.cmd.proof.cmd
        else:
            body = self.cmd.ctx.cmd
        if not self.inner:
            return FocusedCommand(body)
        return FocusedCommand(body, self.inner[0], self.inner[1:])


@dataclass(frozen=True)
class SmallOutcome:
    """Result of one small step or of a whole small-step run"""
    kind: Outcome
    command: FocusedCommand
    store: Store
    rule: Optional[str] = None
    reason: Optional[str] = None
    steps: int = 0

    @property
    def closure(self) -> Closure:
        return Closure(self.command.cmd, self.store)

    @property
    def terminal(self) -> bool:
        return self.kind is not Outcome.NEXT


def focus(cmd: Node) -> FocusedCommand:
    """Inject a command at focus c"""
    return FocusedCommand(cmd)


def _go(cmd: Node, where: Focus, store: Store, rule: str, inner: Tuple[Focus, ...] = ()) -> SmallOutcome:
    return SmallOutcome(Outcome.NEXT, FocusedCommand(cmd, where, inner), store, rule=rule)


def _is_tvalue(t: Node) -> bool:
    """Term values, extended with successors of free variables for open commands"""
    return is_term_value(t) or (isinstance(t, Succ) and _is_tvalue(t.arg))


def _avoid(store: Store, *nodes: object):
    names = domain(store) | all_names(store)
    for node in nodes:
        names |= all_names(node)
    return names


class SmallStepMachine:
    """Reduction of focused commands"""

    def __init__(self, fuel: Optional[int] = None, trace=None):
        self.fuel = settings.FUEL if fuel is None else fuel
        self.trace = trace
        self.stats: Counter = Counter()

    def run(self, cl: Closure, fuel: Optional[int] = None) -> SmallOutcome:
        fuel = self.fuel if fuel is None else fuel
        fc, store = focus(cl.cmd), cl.store
        steps = 0
        while True:
            if steps >= fuel:
                logger.info(f"Small-step fuel exhausted after {steps} steps")
                return SmallOutcome(Outcome.FUEL_EXHAUSTED, fc, store, steps=steps)
            outcome = self.step(fc, store)
            if outcome.terminal:
                return SmallOutcome(outcome.kind, outcome.command, outcome.store, reason=outcome.reason, steps=steps)
            steps += 1
            fc, store = outcome.command, outcome.store
            if self.trace is not None:
                self.trace(steps, outcome.rule, fc, store)

    def step(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        handler = {
            Focus.COMMAND: self._command,
            Focus.PROOF: self._proof,
            Focus.CONTEXT: self._context,
            Focus.VALUE: self._value,
            Focus.FORCING: self._forcing,
            Focus.TERM: self._term,
            Focus.COTERM: self._coterm,
        }[fc.focus]
        outcome = handler(fc, store)
        if outcome.kind is Outcome.NEXT:
            logger.debug(f"{outcome.rule} -> {outcome.command.focus.value}: {pretty(outcome.command.cmd)}")
        return outcome

    def _stuck(self, fc: FocusedCommand, store: Store, reason: str) -> SmallOutcome:
        return SmallOutcome(Outcome.STUCK, fc, store, reason=f"at focus {fc.focus.value}: {reason}")

    # Commands

    def _command(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        if isinstance(fc.cmd, Cut):
            return _go(fc.cmd, Focus.PROOF, store, "focus-proof")
        if isinstance(fc.cmd, TCut):
            return _go(fc.cmd, Focus.TERM, store, "focus-term")
        return self._stuck(fc, store, f"not a command: {type(fc.cmd).__name__}")

    # Proofs

    def _proof(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        p, e = fc.cmd.proof, fc.cmd.ctx
        if isinstance(p, Shift):
            return self._shift(fc, store)
        if isinstance(p, Mu):
            if mentions_tp(e):
                return _go(subst_covar(p.cmd, p.covar, e), Focus.COMMAND, store, "mu-delimited")
            new_store, body = append(store, [Binding(p.covar, Sort.COVAR, e)], p.cmd)
            return _go(body, Focus.COMMAND, new_store, "mu")
        avoid = _avoid(store, p, e)
        if isinstance(p, Pair) and not is_weak_value(p):
            a1 = fresh("a1", avoid)
            a2 = fresh("a2", avoid | {a1})
            inner = MuT(a2, Cut(Pair(PVar(a1), PVar(a2)), e))
            return _go(Cut(p.left, MuT(a1, Cut(p.right, inner))), Focus.PROOF, store, "cbv-pair")
        if isinstance(p, Inj) and not is_weak_value(p):
            a = fresh("a", avoid)
            return _go(Cut(p.body, MuT(a, Cut(Inj(p.index, PVar(a)), e))), Focus.PROOF, store, "cbv-inj")
        if isinstance(p, DPair) and not is_weak_value(p):
            x, a = fresh("x", avoid), fresh("a", avoid)
            resume = Cut(PVar(CTP), MuT(a, Cut(DPair(TVar(x), PVar(a)), e)))
            coshift = CoShift(TCut(p.witness, MuTx(x, resume)))
            return _go(Cut(p.body, coshift), Focus.PROOF, store, "coshift-dpair")
        if isinstance(p, (Ind, Cofix)):
            y, a = fresh("y", avoid), fresh("a", avoid)
            if isinstance(p, Ind):
                stored = Ind(TVar(y), p.base, p.pvar, p.tvar, p.step)
            else:
                stored = Cofix(TVar(y), p.pvar, p.tvar, p.body)
            delayed = MuTx(y, Cut(PVar(a), CoVar(TP)), (Binding(a, Sort.PROOF, stored),))
            rule = "lazy-ind" if isinstance(p, Ind) else "lazy-cofix"
            return _go(Cut(Shift(TCut(p.index, delayed)), e), Focus.PROOF, store, rule)
        if is_weak_value(p):
            return _go(fc.cmd, Focus.CONTEXT, store, "value")
        return self._stuck(fc, store, f"no rule for {type(p).__name__}")

    def _shift(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        shift, e = fc.cmd.proof, fc.cmd.ctx
        inner = shift.cmd
        if isinstance(inner, Cut) and inner.ctx == CoVar(TP) and not occurs_free(inner.proof, Sort.COVAR, TP):
            new_store, cmd = append(store, shift.store, Cut(inner.proof, e))
            return _go(cmd, Focus.PROOF, new_store, "shift-release")
        combined, body = append(store, shift.store, inner)
        nested = fc.nested()
        outcome = self.step(FocusedCommand(body, nested.focus, nested.inner), combined)
        if outcome.kind is not Outcome.NEXT:
            if outcome.kind is Outcome.NORMAL:
                return SmallOutcome(Outcome.NORMAL, fc, store, reason=outcome.reason)
            return self._stuck(fc, store, f"inside shift: {outcome.reason}")
        new_store = outcome.store
        if new_store[:len(store)] == store:
            outer, local = store, new_store[len(store):]
        else:
            outer, local = new_store, ()
        inner_fc = outcome.command
        cmd = Cut(Shift(inner_fc.cmd, local), e)
        return _go(cmd, Focus.PROOF, outer, f"shift/{outcome.rule}", (inner_fc.focus,) + inner_fc.inner)

    # Contexts

    def _context(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        v, e = fc.cmd.proof, fc.cmd.ctx
        if isinstance(e, CoVar):
            found = lookup(store, e.name, Sort.COVAR)
            if found is None:
                return SmallOutcome(Outcome.NORMAL, fc, store, reason="value-on-covar-free")
            return _go(Cut(v, found), Focus.CONTEXT, store, "lookup-covar")
        if isinstance(e, MuT):
            new_store, body = append(store, (Binding(e.var, Sort.PROOF, v),) + tuple(e.store), e.cmd)
            return _go(body, Focus.COMMAND, new_store, "mu-tilde")
        if isinstance(e, CoShift):
            return self._coshift(fc, store)
        if isinstance(e, FORCING_CLASSES):
            return _go(fc.cmd, Focus.VALUE, store, "forcing")
        return self._stuck(fc, store, f"no rule for context {type(e).__name__}")

    def _coshift(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        v, coshift = fc.cmd.proof, fc.cmd.ctx
        inner = coshift.cmd
        if isinstance(inner, Cut) and inner.proof == PVar(CTP) and not occurs_free(inner.ctx, Sort.PROOF, CTP):
            return _go(Cut(v, inner.ctx), Focus.CONTEXT, store, "coshift-release")
        nested = fc.nested()
        outcome = self.step(nested, store)
        if outcome.kind is not Outcome.NEXT:
            return self._stuck(fc, store, f"inside co-shift: {outcome.reason}")
        inner_fc = outcome.command
        cmd = Cut(v, CoShift(inner_fc.cmd))
        return _go(cmd, Focus.CONTEXT, outcome.store, f"coshift/{outcome.rule}", (inner_fc.focus,) + inner_fc.inner)

    # Values

    def _value(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        v, f = fc.cmd.proof, fc.cmd.ctx
        if not isinstance(v, PVar):
            return _go(fc.cmd, Focus.FORCING, store, "strong-value")
        found = lookup_split(store, v.name, Sort.PROOF)
        if found is None:
            return SmallOutcome(Outcome.NORMAL, fc, store, reason="finished")
        before, binding, after = found
        value = binding.value
        if is_weak_value(value):
            return _go(Cut(value, f), Focus.VALUE, store, "lookup-value")
        resume = MuT(v.name, Cut(v, f), after)
        avoid = _avoid(store, value, f)
        if isinstance(value, Cofix):
            self.stats["cofix-unfold"] += 1
            b1 = fresh(value.pvar, avoid)
            body = rename(subst_term(value.body, value.tvar, value.index), Sort.PROOF, value.pvar, b1)
            y = fresh("y", all_names(value))
            stream = LamT(y, Cofix(TVar(y), value.pvar, value.tvar, value.body))
            return _go(Cut(body, resume), Focus.PROOF, before + (Binding(b1, Sort.PROOF, stream),), "lookup-cofix")
        if isinstance(value, Ind) and isinstance(value.index, Zero):
            return _go(Cut(value.base, resume), Focus.PROOF, before, "lookup-ind-zero")
        if isinstance(value, Ind) and isinstance(value.index, Succ):
            b1 = fresh(value.pvar, avoid)
            pred = value.index.arg
            body = rename(subst_term(value.step, value.tvar, pred), Sort.PROOF, value.pvar, b1)
            previous = Ind(pred, value.base, value.pvar, value.tvar, value.step)
            return _go(Cut(body, resume), Focus.PROOF, before + (Binding(b1, Sort.PROOF, previous),), "lookup-ind-succ")
        return self._stuck(fc, store, f"stored {type(value).__name__} for '{v.name}' cannot be forced")

    # Forcing contexts

    def _forcing(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        v, f = fc.cmd.proof, fc.cmd.ctx
        if isinstance(v, LamT) and isinstance(f, TStack):
            var, body = v.var, v.body
            if occurs_free(f.term, Sort.TERM, var):
                new = fresh(var, all_names((v, f)))
                body, var = rename(body, Sort.TERM, var, new), new
            delayed = Shift(TCut(f.term, MuTx(var, Cut(body, CoVar(TP)))))
            return _go(Cut(delayed, f.ctx), Focus.PROOF, store, "beta-term")
        if isinstance(v, LamP) and isinstance(f, PStack):
            var, body = v.var, v.body
            if occurs_free(f.ctx, Sort.PROOF, var) or occurs_free(f.proof, Sort.PROOF, var):
                new = fresh(var, all_names((v, f)))
                body, var = rename(body, Sort.PROOF, var, new), new
            if is_nef(f.proof):
                return _go(Cut(Shift(Cut(f.proof, MuT(var, Cut(body, CoVar(TP))))), f.ctx), Focus.PROOF, store, "beta-nef")
            return _go(Cut(f.proof, MuT(var, Cut(body, f.ctx))), Focus.PROOF, store, "beta")
        if isinstance(v, Inj) and isinstance(f, CaseC):
            var, cmd = (f.var1, f.cmd1) if v.index == 1 else (f.var2, f.cmd2)
            new_store, body = append(store, [Binding(var, Sort.PROOF, v.body)], cmd)
            return _go(body, Focus.COMMAND, new_store, "case")
        if isinstance(v, Pair) and isinstance(f, SplitC):
            bindings = [Binding(f.var1, Sort.PROOF, v.left), Binding(f.var2, Sort.PROOF, v.right)]
            new_store, body = append(store, bindings, f.cmd)
            return _go(body, Focus.COMMAND, new_store, "split")
        if isinstance(v, DPair) and isinstance(f, DestC):
            cmd = subst_term(f.cmd, f.tvar, v.witness)
            new_store, body = append(store, [Binding(f.pvar, Sort.PROOF, v.body)], cmd)
            return _go(body, Focus.COMMAND, new_store, "dest")
        if isinstance(v, Refl) and isinstance(f, EqC):
            return _go(f.cmd, Focus.COMMAND, store, "refl")
        return self._stuck(fc, store, f"{type(v).__name__} cannot meet {type(f).__name__}")

    # Terms

    def _term(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        t, pi = fc.cmd.term, fc.cmd.coterm
        avoid = _avoid(store, t, pi)
        if isinstance(t, TApp):
            return _go(TCut(t.fun, TStack(t.arg, pi)), Focus.TERM, store, "term-app")
        if isinstance(t, Succ) and not _is_tvalue(t):
            x = fresh("x", avoid)
            return _go(TCut(t.arg, MuTx(x, TCut(Succ(TVar(x)), pi))), Focus.TERM, store, "term-succ")
        if isinstance(t, Wit):
            x, a = fresh("x", avoid), fresh("a", avoid)
            return _go(Cut(t.proof, DestC(x, a, TCut(TVar(x), pi))), Focus.PROOF, store, "term-wit")
        if isinstance(t, Rec):
            if isinstance(t.index, Zero):
                return _go(TCut(t.base, pi), Focus.TERM, store, "rec-zero")
            if isinstance(t.index, Succ) and _is_tvalue(t.index):
                step = subst_term(t.step, t.nvar, t.index.arg)
                step = subst_term(step, t.rvar, Rec(t.index.arg, t.base, t.nvar, t.rvar, t.step))
                return _go(TCut(step, pi), Focus.TERM, store, "rec-succ")
            if not _is_tvalue(t.index):
                z = fresh("z", avoid)
                waiting = MuTx(z, TCut(Rec(TVar(z), t.base, t.nvar, t.rvar, t.step), pi))
                return _go(TCut(t.index, waiting), Focus.TERM, store, "rec-index")
            return self._stuck(fc, store, f"rec on {pretty(t.index)}")
        if _is_tvalue(t):
            return _go(fc.cmd, Focus.COTERM, store, "term-value")
        return self._stuck(fc, store, f"no rule for term {type(t).__name__}")

    def _coterm(self, fc: FocusedCommand, store: Store) -> SmallOutcome:
        t, pi = fc.cmd.term, fc.cmd.coterm
        if isinstance(t, TLam) and isinstance(pi, TStack):
            var, body = t.var, t.body
            if occurs_free(pi.ctx, Sort.TERM, var):
                new = fresh(var, all_names((t, pi)))
                body, var = rename(body, Sort.TERM, var, new), new
            return _go(TCut(pi.term, MuTx(var, TCut(body, pi.ctx))), Focus.TERM, store, "term-beta")
        if isinstance(pi, MuTx):
            region = subst_term(Closure(pi.cmd, pi.store), pi.var, t)
            new_store, body = append(store, region.store, region.cmd)
            return _go(body, Focus.COMMAND, new_store, "mu-tilde-term")
        return self._stuck(fc, store, f"term {pretty(t)} cannot meet {type(pi).__name__}")


# Functional interface

def sstep(fc: FocusedCommand, store: Store) -> SmallOutcome:
    return SmallStepMachine().step(fc, store)


def srun(cl: Closure, fuel: Optional[int] = None, trace=None) -> SmallOutcome:
    return SmallStepMachine(trace=trace).run(cl, fuel)


def as_step_outcome(outcome: SmallOutcome) -> StepOutcome:
    return StepOutcome(outcome.kind, outcome.closure, rule=outcome.rule, reason=outcome.reason, steps=outcome.steps)


def agree(cl: Closure, fuel: Optional[int] = None) -> AgreementReport:
    """
    Run both machines on a closure and compare their final answers

    Answers are compared up to α-equivalence after reading stored proofs back into them,
    so the different administrative names the two machines allocate do not matter.
    """
    big = BigStepMachine().run(cl, fuel)
    small = as_step_outcome(SmallStepMachine().run(cl, fuel))
    big_report, small_report = run_report(big, "big"), run_report(small, "small")
    if big.kind is not small.kind:
        detail = f"outcomes differ: big {big.kind.value}, small {small.kind.value}"
        return AgreementReport(big=big_report, small=small_report, agree=False, detail=detail)
    if big.kind is Outcome.NORMAL:
        left, right = answer(big.closure), answer(small.closure)
        if left is None or right is None:
            same = left is None and right is None
        else:
            same = alpha_eq(left, right)
        if not same:
            detail = f"answers differ: {big_report.answer} vs {small_report.answer}"
            return AgreementReport(big=big_report, small=small_report, agree=False, detail=detail)
    logger.info(f"Machines agree ({big.kind.value}; {big.steps} big steps, {small.steps} small steps)")
    return AgreementReport(big=big_report, small=small_report, agree=True)
