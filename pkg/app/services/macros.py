"""
Natural-deduction sugar

``expand`` rewrites let/split/case/dest, prf, subst, exfalso, catch, throw, projections
and application into core proofs. Binders scrutinising a NEF proof expand through a
delimited continuation so that the body may depend on the scrutinee.
"""
import logging
from dataclasses import dataclass, fields, replace
from typing import Dict, List, Tuple

from app.core.classify import is_nef
from app.core.exceptions import MacroError
from app.core.names import all_names, fresh
from app.core.parser import parse
from app.core.pretty import pretty
from app.models.syntax import (
    TP,
    AppP, AppT, Binding, CaseC, CaseS, Catch, CoVar, Cut, DestC, DestS, EqC, Exfalso,
    Let, Mu, MuT, Node, PStack, PVar, Prf, Proj, Shift, Sort, SplitC, SplitS, SubstS,
    TStack, Throw, Abort, SUGAR_CLASSES,
)

logger = logging.getLogger(__name__)


def contains_sugar(node: object) -> bool:
    if isinstance(node, tuple):
        return any(contains_sugar(item) for item in node)
    if not isinstance(node, Node):
        return False
    if isinstance(node, SUGAR_CLASSES):
        return True
    return any(contains_sugar(getattr(node, f.name)) for f in fields(node))


def expand(node: object) -> object:
    """
    Eliminate every sugar node

    Args:
        node: Extended proof, context, command or store

    Returns:
        The core node; expanding a core node returns it unchanged

    Raises:
        MacroError: prf applied to a non-NEF proof
    """
    if isinstance(node, tuple):
        return tuple(expand(item) for item in node)
    if not isinstance(node, Node):
        return node
    if isinstance(node, Binding):
        return replace(node, value=expand(node.value))
    changes = {}
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, (Node, tuple)):
            changes[f.name] = expand(value)
    node = replace(node, **changes) if changes else node
    if isinstance(node, SUGAR_CLASSES):
        return _expand_sugar(node)
    return node


def _answer(hint_nodes: Tuple[Node, ...], bound: Node):
    """α_p: t̂p when the scrutinee is NEF, a fresh co-variable otherwise"""
    if is_nef(bound):
        return None, CoVar(TP)
    name = fresh("k", all_names(hint_nodes))
    return name, CoVar(name)


def _close(covar, cmd: Node) -> Node:
    return Shift(cmd) if covar is None else Mu(covar, cmd)


def _expand_sugar(n: Node) -> Node:
    # Sub-nodes are already core here
    if isinstance(n, Let):
        covar, k = _answer((n,), n.bound)
        return _close(covar, Cut(n.bound, MuT(n.var, Cut(n.body, k))))
    if isinstance(n, SplitS):
        covar, k = _answer((n,), n.bound)
        return _close(covar, Cut(n.bound, SplitC(n.var1, n.var2, Cut(n.body, k))))
    if isinstance(n, CaseS):
        covar, k = _answer((n,), n.bound)
        return _close(covar, Cut(n.bound, CaseC(n.var1, Cut(n.body1, k), n.var2, Cut(n.body2, k))))
    if isinstance(n, DestS):
        covar, k = _answer((n,), n.bound)
        return _close(covar, Cut(n.bound, DestC(n.tvar, n.pvar, Cut(n.body, k))))
    if isinstance(n, Prf):
        if not is_nef(n.proof):
            raise MacroError(f"prf needs a NEF proof, got {pretty(n.proof)}")
        avoid = all_names(n.proof)
        x, a = fresh("x", avoid), fresh("a", avoid)
        return Shift(Cut(n.proof, DestC(x, a, Cut(PVar(a), CoVar(TP)))))
    if isinstance(n, Proj):
        avoid = all_names(n.proof)
        a1 = fresh("a1", avoid)
        a2 = fresh("a2", avoid | {a1})
        return _expand_sugar(SplitS(n.proof, a1, a2, PVar(a1 if n.index == 1 else a2)))
    if isinstance(n, SubstS):
        k = fresh("k", all_names(n))
        return Mu(k, Cut(n.eq, EqC(Cut(n.body, CoVar(k)))))
    if isinstance(n, Exfalso):
        k = fresh("k", all_names(n))
        return Mu(k, Cut(n.proof, Abort()))
    if isinstance(n, Catch):
        return Mu(n.covar, Cut(n.body, CoVar(n.covar)))
    if isinstance(n, Throw):
        k = fresh("k", all_names(n))
        return Mu(k, Cut(n.body, CoVar(n.covar)))
    if isinstance(n, AppT):
        k = fresh("k", all_names(n))
        return Mu(k, Cut(n.fun, TStack(n.arg, CoVar(k))))
    if isinstance(n, AppP):
        k = fresh("k", all_names(n))
        return Mu(k, Cut(n.fun, PStack(n.arg, CoVar(k))))
    raise MacroError(f"no expansion for {type(n).__name__}")


# Admissibility of the natural-deduction rules

@dataclass(frozen=True)
class Hypothesis:
    name: str
    sort: Sort
    formula: Node  # a finite type for term variables


@dataclass(frozen=True)
class AdmissibilityCase:
    """A natural-deduction rule instance whose expansion must check at `formula`"""
    rule: str
    proof: Node
    formula: Node
    hyps: Tuple[Hypothesis, ...] = ()


# (rule, sugar proof, conclusion, hypotheses as (name, sort, formula or type))
_CASES = [
    ("let", "let a = [0, refl] in prf a", "wit [0, refl] = 0", []),
    ("let", "let a = catch alpha refl in a", "0 = 0", []),
    ("split", "split c as (a1, a2) in a2", "1 = 1", [("c", "proof", "0 = 0 /\\ 1 = 1")]),
    ("split", "split c as (a1, a2) in (a2, a1)", "1 = 1 /\\ 0 = 0", [("c", "proof", "0 = 0 /\\ 1 = 1")]),
    ("case", "case d of {inj1 a1 -> inj2 a1 | inj2 a2 -> inj1 a2}", "1 = 1 \\/ 0 = 0", [("d", "proof", "0 = 0 \\/ 1 = 1")]),
    ("case", "case inj1 h of {inj1 a1 -> a1 | inj2 a2 -> h}", "0 = 0", [("h", "proof", "0 = 0")]),
    ("dest", "dest e as (x, a) in a", "wit e = 0", [("e", "proof", "exists x : nat. x = 0")]),
    ("dest", "dest e as (x, a) in [x, a]", "exists y : nat. y = 0", [("e", "proof", "exists x : nat. x = 0")]),
    ("prf", "prf e", "wit e = 0", [("e", "proof", "exists x : nat. x = 0")]),
    ("prf", "prf [0, refl]", "0 = 0", []),
    ("subst", "subst h k", "S(y) = 0", [("x", "term", "nat"), ("y", "term", "nat"), ("h", "proof", "x = y"), ("k", "proof", "S(x) = 0")]),
    ("exfalso", "exfalso h", "0 = 1", [("h", "proof", "bot")]),
    ("catch", "catch alpha refl", "0 = 0", []),
    ("throw", "throw alpha refl", "top", [("alpha", "covar", "0 = 0")]),
    ("proj1", "pi1(c)", "0 = 0", [("c", "proof", "0 = 0 /\\ 1 = 1")]),
    ("proj2", "pi2(c)", "1 = 1", [("c", "proof", "0 = 0 /\\ 1 = 1")]),
    ("forall-elim", "f 3", "3 = 3", [("f", "proof", "forall x : nat. x = x")]),
    ("imp-elim", "g a", "1 = 1", [("g", "proof", "0 = 0 -> 1 = 1"), ("a", "proof", "0 = 0")]),
    ("pi-elim", "g [0, refl]", "wit [0, refl] = 0", [("g", "proof", "Pi (a : exists x : nat. x = 0). wit a = 0")]),
]


def admissibility_suite() -> List[AdmissibilityCase]:
    """
    Concrete instances of the natural-deduction typing rules

    Each entry pairs a sugar proof with the conclusion the rule advertises, including the
    dependent conclusions B[p/•] for NEF scrutinees.
    """
    cases = []
    for rule, proof, formula, hyps in _CASES:
        scope: Dict[str, Sort] = {}
        parsed: List[Hypothesis] = []
        for name, kind, text in hyps:
            sort = Sort(kind)
            parsed.append(Hypothesis(name, sort, parse(text, "type" if sort is Sort.TERM else "formula", scope=scope)))
            scope[name] = sort
        cases.append(AdmissibilityCase(
            rule,
            parse(proof, "proof", scope=scope),
            parse(formula, "formula", scope=scope),
            tuple(parsed),
        ))
    logger.debug(f"Built {len(cases)} admissibility cases")
    return cases
