"""
Big-step abstract machine

One call to ``step`` applies exactly one reduction rule to a closure. Terms in positions
that require values are normalised in place by ``reduce_term``; ``wit p`` is computed by
running the NEF proof p against a dependent-pair destructor.
"""
import enum
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from config import settings
from app.core.classify import is_nef, is_term_value, is_weak_value, mentions_tp
from app.core.exceptions import MachineError
from app.core.names import (
    all_names, free_names, fresh, occurs_free, rename, subst_covar, subst_proof, subst_term, substitute,
)
from app.core.pretty import pretty, store_records
from app.models.syntax import (
    CTP, TP,
    Binding, CaseC, Closure, Cofix, CoShift, CoVar, Cut, DPair, DestC, EqC, Ind, Inj, LamP,
    LamT, Mu, MuT, MuTx, Node, PStack, PVar, Pair, Rec, Refl, Shift, Sort, SplitC, Store,
    Succ, TApp, TCut, TLam, TStack, TVar, Wit, Zero, FORCING_CLASSES,
)
from app.schemas.reports import RunReport
from app.services.store import append, domain, lookup, lookup_split

logger = logging.getLogger(__name__)


class Outcome(str, enum.Enum):
    NEXT = "next"
    NORMAL = "normal"
    STUCK = "stuck"
    FUEL_EXHAUSTED = "fuel_exhausted"


# Normal-form reasons
VALUE_ON_FREE_COVAR = "value-on-covar-free"
FINISHED = "finished"


@dataclass(frozen=True)
class StepOutcome:
    """Result of one step or of a whole run"""
    kind: Outcome
    closure: Closure
    rule: Optional[str] = None
    reason: Optional[str] = None
    steps: int = 0

    @property
    def terminal(self) -> bool:
        return self.kind is not Outcome.NEXT


TraceHook = Callable[[int, str, Closure], None]


def _next(cmd: Node, store: Store, rule: str) -> StepOutcome:
    return StepOutcome(Outcome.NEXT, Closure(cmd, store), rule=rule)


def _normal(cl: Closure, reason: str) -> StepOutcome:
    return StepOutcome(Outcome.NORMAL, cl, reason=reason)


def _stuck(cl: Closure, reason: str) -> StepOutcome:
    return StepOutcome(Outcome.STUCK, cl, reason=reason)


def _fresh_for(store: Store, hint: str, *nodes: object) -> str:
    avoid = domain(store) | all_names(store)
    for node in nodes:
        avoid |= all_names(node)
    return fresh(hint, avoid)


class BigStepMachine:
    """
    Reduction of closures

    Args:
        fuel: Step budget of each sub-evaluation (wit, run_nef); defaults to settings.FUEL
        trace: Optional hook called with (index, rule, closure) after each top-level step
    """

    def __init__(self, fuel: Optional[int] = None, trace: Optional[TraceHook] = None):
        self.fuel = settings.FUEL if fuel is None else fuel
        self.trace = trace
        self.stats: Counter = Counter()

    # Drivers

    def run(self, cl: Closure, fuel: Optional[int] = None) -> StepOutcome:
        """
        Iterate step until a normal form, a stuck closure or fuel exhaustion

        Returns:
            The terminal outcome with the number of steps taken
        """
        fuel = self.fuel if fuel is None else fuel
        steps = 0
        while True:
            if steps >= fuel:
                logger.info(f"Fuel exhausted after {steps} steps")
                return StepOutcome(Outcome.FUEL_EXHAUSTED, cl, steps=steps)
            outcome = self.step(cl)
            if outcome.terminal:
                logger.debug(f"Run ended {outcome.kind.value} after {steps} steps: {outcome.reason}")
                return StepOutcome(outcome.kind, outcome.closure, reason=outcome.reason, steps=steps)
            steps += 1
            cl = outcome.closure
            if self.trace is not None:
                self.trace(steps, outcome.rule, cl)

    def _subrun(self, cl: Closure, fuel: Optional[int] = None) -> StepOutcome:
        # nested evaluations share stats but are not reported to the trace hook
        trace, self.trace = self.trace, None
        try:
            return self.run(cl, fuel)
        finally:
            self.trace = trace

    def run_nef(self, proof: Node, store: Store = (), fuel: Optional[int] = None) -> Tuple[Node, Store]:
        """
        Evaluate ⟨p‖α0⟩τ for a fresh α0 until ⟨V‖α0⟩τ'

        Returns:
            (V, τ')

        Raises:
            MachineError: On a stuck run, fuel exhaustion or an escaping answer
        """
        alpha0 = _fresh_for(store, "alpha0", proof)
        outcome = self._subrun(Closure(Cut(proof, CoVar(alpha0)), store), fuel)
        cmd = outcome.closure.cmd
        if outcome.kind is Outcome.NORMAL and isinstance(cmd, Cut) and cmd.ctx == CoVar(alpha0):
            if not is_weak_value(cmd.proof):
                raise MachineError(f"NEF evaluation of {pretty(proof)} stopped at {pretty(cmd.proof)}, not a value")
            return cmd.proof, outcome.closure.store
        raise MachineError(f"NEF evaluation of {pretty(proof)} did not return: {outcome.kind.value} {outcome.reason or ''}".strip())

    def reduce_term(self, term: Node, store: Store = ()) -> Tuple[Node, Store]:
        """
        Normalise a term in place (call-by-value β and rec, wit through run_nef)

        Returns:
            (term value, store extended by the evaluation of embedded proofs)
        """
        budget = [self.fuel]
        value, store = self._term(term, store, budget)
        return value, store

    def _term(self, t: Node, store: Store, budget) -> Tuple[Node, Store]:
        budget[0] -= 1
        if budget[0] < 0:
            raise MachineError("term reduction ran out of fuel")
        if isinstance(t, (TVar, Zero, TLam)):
            return t, store
        if isinstance(t, Succ):
            arg, store = self._term(t.arg, store, budget)
            return Succ(arg), store
        if isinstance(t, TApp):
            fun, store = self._term(t.fun, store, budget)
            arg, store = self._term(t.arg, store, budget)
            if isinstance(fun, TLam):
                self.stats["beta"] += 1
                return self._term(subst_term(fun.body, fun.var, arg), store, budget)
            return TApp(fun, arg), store
        if isinstance(t, Rec):
            index, store = self._term(t.index, store, budget)
            if isinstance(index, Zero):
                self.stats["rec"] += 1
                return self._term(t.base, store, budget)
            if isinstance(index, Succ):
                self.stats["rec"] += 1
                step = subst_term(t.step, t.nvar, index.arg)
                step = subst_term(step, t.rvar, Rec(index.arg, t.base, t.nvar, t.rvar, t.step))
                return self._term(step, store, budget)
            return Rec(index, t.base, t.nvar, t.rvar, t.step), store
        if isinstance(t, Wit):
            return self._witness(t.proof, store)
        raise MachineError(f"not a term: {type(t).__name__}")

    def _witness(self, proof: Node, store: Store) -> Tuple[Node, Store]:
        self.stats["wit"] += 1
        avoid = all_names(proof) | domain(store)
        x, a, out = fresh("x", avoid), fresh("a", avoid), fresh("alpha0", avoid)
        query = Cut(proof, DestC(x, a, Cut(DPair(TVar(x), PVar(a)), CoVar(out))))
        outcome = self._subrun(Closure(query, store))
        cmd = outcome.closure.cmd
        if outcome.kind is Outcome.NORMAL and isinstance(cmd, Cut) and isinstance(cmd.proof, DPair):
            return cmd.proof.witness, outcome.closure.store
        raise MachineError(f"wit of {pretty(proof)} did not produce a witness: {outcome.kind.value}")

    # One step

    def step(self, cl: Closure) -> StepOutcome:
        """Apply the unique rule matching the closure"""
        cmd, store = cl.cmd, cl.store
        try:
            if isinstance(cmd, TCut):
                return self._term_command(cl)
            if not isinstance(cmd, Cut):
                return _stuck(cl, f"not a command: {type(cmd).__name__}")
            outcome = self._cut(cl, cmd.proof, cmd.ctx, store)
        except MachineError as e:
            return _stuck(cl, str(e))
        if outcome.kind is Outcome.NEXT:
            self.stats[outcome.rule] += 1
            logger.debug(f"{outcome.rule}: {pretty(outcome.closure.cmd)}")
        return outcome

    def _in_place(self, cl: Closure, term: Node, rebuild: Callable[[Node], Node]) -> StepOutcome:
        value, store = self.reduce_term(term, cl.store)
        if value == term:
            return _stuck(cl, f"term {pretty(term)} does not reduce to a value")
        return _next(rebuild(value), store, "term")

    def _cut(self, cl: Closure, p: Node, e: Node, store: Store) -> StepOutcome:
        # Delimited continuations
        if isinstance(p, Shift):
            return self._shift(cl, p, e, store)
        if isinstance(p, Mu):
            if mentions_tp(e):
                return _next(subst_covar(p.cmd, p.covar, e), store, "mu-delimited")
            new_store, body = append(store, [Binding(p.covar, Sort.COVAR, e)], p.cmd)
            return _next(body, new_store, "mu")

        # Laziness
        if isinstance(p, (Cofix, Ind)):
            if not is_term_value(p.index):
                return self._in_place(cl, p.index, lambda v: Cut(_with_index(p, v), e))
            a = _fresh_for(store, "a", p, e)
            kind = "lazy-cofix" if isinstance(p, Cofix) else "lazy-ind"
            return _next(Cut(PVar(a), e), store + (Binding(a, Sort.PROOF, p),), kind)

        # Call-by-value
        if isinstance(p, DPair) and not is_term_value(p.witness):
            return self._in_place(cl, p.witness, lambda v: Cut(DPair(v, p.body), e))
        if isinstance(p, (Inj, Pair, DPair)) and not is_weak_value(p):
            return self._call_by_value(p, e, store)

        if not is_weak_value(p):
            return _stuck(cl, f"no rule for {type(p).__name__} against {type(e).__name__}")

        # Values against binders and co-variables
        if isinstance(e, MuT):
            new_store, body = append(store, (Binding(e.var, Sort.PROOF, p),) + tuple(e.store), e.cmd)
            return _next(body, new_store, "mu-tilde")
        if isinstance(e, CoVar):
            found = lookup(store, e.name, Sort.COVAR)
            if found is None:
                return _normal(cl, VALUE_ON_FREE_COVAR)
            return _next(Cut(p, found), store, "lookup-covar")
        if isinstance(e, CoShift):
            return _next(subst_proof(e.cmd, CTP, p), store, "coshift")

        if isinstance(e, FORCING_CLASSES):
            if isinstance(p, PVar):
                return self._lookup(cl, p.name, e, store)
            return self._eliminate(cl, p, e, store)
        return _stuck(cl, f"no rule for {type(p).__name__} against {type(e).__name__}")

    def _shift(self, cl: Closure, p: Shift, e: Node, store: Store) -> StepOutcome:
        if p.store:
            new_store, inner = append(store, p.store, p.cmd)
            return _next(Cut(Shift(inner), e), new_store, "shift-store")
        inner = p.cmd
        if isinstance(inner, Cut) and inner.ctx == CoVar(TP) and not occurs_free(inner.proof, Sort.COVAR, TP):
            return _next(Cut(inner.proof, e), store, "shift-release")
        outcome = self.step(Closure(inner, store))
        if outcome.kind is Outcome.NEXT:
            return _next(Cut(Shift(outcome.closure.cmd), e), outcome.closure.store, f"shift/{outcome.rule}")
        if outcome.kind is Outcome.NORMAL:
            return StepOutcome(Outcome.NORMAL, Closure(Cut(Shift(outcome.closure.cmd), e), outcome.closure.store), reason=outcome.reason)
        return _stuck(cl, f"inside shift: {outcome.reason}")

    def _call_by_value(self, p: Node, e: Node, store: Store) -> StepOutcome:
        avoid = all_names((p, e)) | domain(store)
        if isinstance(p, Inj):
            a = fresh("a", avoid)
            return _next(Cut(p.body, MuT(a, Cut(Inj(p.index, PVar(a)), e))), store, "cbv-inj")
        if isinstance(p, Pair):
            a1 = fresh("a1", avoid)
            a2 = fresh("a2", avoid | {a1})
            inner = MuT(a2, Cut(Pair(PVar(a1), PVar(a2)), e))
            return _next(Cut(p.left, MuT(a1, Cut(p.right, inner))), store, "cbv-pair")
        a = fresh("a", avoid)
        return _next(Cut(p.body, MuT(a, Cut(DPair(p.witness, PVar(a)), e))), store, "cbv-dpair")

    def _lookup(self, cl: Closure, name: str, f: Node, store: Store) -> StepOutcome:
        found = lookup_split(store, name, Sort.PROOF)
        if found is None:
            return _normal(cl, FINISHED)
        before, binding, after = found
        value = binding.value
        if is_weak_value(value):
            return _next(Cut(value, f), store, "lookup-value")
        resume = MuT(name, Cut(PVar(name), f), after)
        if isinstance(value, Cofix):
            self.stats["cofix-unfold"] += 1
            b1 = _fresh_for(store, value.pvar, value, f)
            body = rename(subst_term(value.body, value.tvar, value.index), Sort.PROOF, value.pvar, b1)
            y = fresh("y", all_names(value))
            stream = LamT(y, Cofix(TVar(y), value.pvar, value.tvar, value.body))
            return _next(Cut(body, resume), before + (Binding(b1, Sort.PROOF, stream),), "lookup-cofix")
        if isinstance(value, Ind):
            if isinstance(value.index, Zero):
                return _next(Cut(value.base, resume), before, "lookup-ind-zero")
            if isinstance(value.index, Succ):
                b1 = _fresh_for(store, value.pvar, value, f)
                pred = value.index.arg
                body = rename(subst_term(value.step, value.tvar, pred), Sort.PROOF, value.pvar, b1)
                previous = Ind(pred, value.base, value.pvar, value.tvar, value.step)
                return _next(Cut(body, resume), before + (Binding(b1, Sort.PROOF, previous),), "lookup-ind-succ")
        return _stuck(cl, f"stored {type(value).__name__} for '{name}' cannot be forced")

    def _eliminate(self, cl: Closure, v: Node, f: Node, store: Store) -> StepOutcome:
        if isinstance(v, LamT) and isinstance(f, TStack):
            if not is_term_value(f.term):
                return self._in_place(cl, f.term, lambda t: Cut(v, TStack(t, f.ctx)))
            return _next(Cut(subst_term(v.body, v.var, f.term), f.ctx), store, "beta-term")
        if isinstance(v, LamP) and isinstance(f, PStack):
            var, body = v.var, v.body
            if occurs_free(f.ctx, Sort.PROOF, var) or occurs_free(f.proof, Sort.PROOF, var):
                new = fresh(var, all_names((v, f)))
                body, var = rename(body, Sort.PROOF, var, new), new
            if is_nef(f.proof):
                return _next(Cut(Shift(Cut(f.proof, MuT(var, Cut(body, CoVar(TP))))), f.ctx), store, "beta-nef")
            return _next(Cut(f.proof, MuT(var, Cut(body, f.ctx))), store, "beta")
        if isinstance(v, Inj) and isinstance(f, CaseC):
            var, cmd = (f.var1, f.cmd1) if v.index == 1 else (f.var2, f.cmd2)
            new_store, body = append(store, [Binding(var, Sort.PROOF, v.body)], cmd)
            return _next(body, new_store, "case")
        if isinstance(v, Pair) and isinstance(f, SplitC):
            bindings = [Binding(f.var1, Sort.PROOF, v.left), Binding(f.var2, Sort.PROOF, v.right)]
            new_store, body = append(store, bindings, f.cmd)
            return _next(body, new_store, "split")
        if isinstance(v, DPair) and isinstance(f, DestC):
            cmd = subst_term(f.cmd, f.tvar, v.witness)
            new_store, body = append(store, [Binding(f.pvar, Sort.PROOF, v.body)], cmd)
            return _next(body, new_store, "dest")
        if isinstance(v, Refl) and isinstance(f, EqC):
            return _next(f.cmd, store, "refl")
        return _stuck(cl, f"{type(v).__name__} cannot meet {type(f).__name__}")

    def _term_command(self, cl: Closure) -> StepOutcome:
        cmd, store = cl.cmd, cl.store
        pi = cmd.coterm
        if not is_term_value(cmd.term):
            return self._in_place(cl, cmd.term, lambda v: TCut(v, pi))
        if isinstance(pi, MuTx):
            region = subst_term(Closure(pi.cmd, pi.store), pi.var, cmd.term)
            new_store, body = append(store, region.store, region.cmd)
            return _next(body, new_store, "mu-tilde-term")
        if isinstance(pi, TStack) and isinstance(cmd.term, TLam):
            return _next(TCut(TApp(cmd.term, pi.term), pi.ctx), store, "term-apply")
        return _stuck(cl, f"term {pretty(cmd.term)} cannot meet {type(pi).__name__}")


def _with_index(p: Node, index: Node) -> Node:
    if isinstance(p, Cofix):
        return Cofix(index, p.pvar, p.tvar, p.body)
    return Ind(index, p.base, p.pvar, p.tvar, p.step)


# Functional interface

def step(cl: Closure) -> StepOutcome:
    return BigStepMachine().step(cl)


def run(cl: Closure, fuel: Optional[int] = None, trace: Optional[TraceHook] = None) -> StepOutcome:
    return BigStepMachine(trace=trace).run(cl, fuel)


def run_nef(proof: Node, store: Store = (), fuel: Optional[int] = None) -> Tuple[Node, Store]:
    return BigStepMachine(fuel=fuel).run_nef(proof, store)


def reduce_term(term: Node, store: Store = (), fuel: Optional[int] = None) -> Node:
    """β/rec normal form of a closed term; wit is evaluated against the store"""
    return BigStepMachine(fuel=fuel).reduce_term(term, store)[0]


# Answers and reports

READBACK_DEPTH = 16


def unwrap(cmd: Node, store: Store) -> Tuple[Node, Store]:
    """Descend through shifts at the head of a command, merging their stores"""
    while isinstance(cmd, Cut) and isinstance(cmd.proof, Shift):
        store = store + tuple(cmd.proof.store)
        cmd = cmd.proof.cmd
    return cmd, store


def readback(node: Node, store: Store, depth: int = READBACK_DEPTH) -> Node:
    """Replace store-bound proof variables by their stored proofs, up to depth levels"""
    for _ in range(depth):
        mapping = {}
        for name in free_names(node).proofs:
            value = lookup(store, name, Sort.PROOF)
            if value is not None:
                mapping[(Sort.PROOF, name)] = value
        if not mapping:
            break
        node = substitute(node, mapping)
    return node


def answer(cl: Closure) -> Optional[Node]:
    """The observable value of a normal closure ⟨V‖α⟩τ, read back through the store"""
    cmd, store = unwrap(cl.cmd, cl.store)
    if isinstance(cmd, Cut) and isinstance(cmd.ctx, CoVar) and is_weak_value(cmd.proof):
        return readback(cmd.proof, store)
    return None


def run_report(outcome: StepOutcome, machine: str = "big") -> RunReport:
    value = answer(outcome.closure) if outcome.kind is Outcome.NORMAL else None
    return RunReport(
        machine=machine,
        outcome=outcome.kind.value,
        reason=outcome.reason,
        steps=outcome.steps,
        command=pretty(outcome.closure.cmd),
        store=store_records(outcome.closure.store),
        answer=pretty(value) if value is not None else None,
    )
