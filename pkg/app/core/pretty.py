"""Pretty-printer producing the concrete syntax accepted by app.core.parser"""
import logging
from typing import Dict, List

from app.core.names import occurs_free
from app.models.formulas import (
    And, Bot, Eq, Exists, FHole, Forall, Nu, Or, Pi, THole, Top,
)
from app.models.syntax import (
    STAR, TP,
    Abort, AppP, AppT, Arrow, Binding, CaseC, CaseS, Catch, Closure, Cofix, CoShift, CoVar,
    Cut, DPair, DestC, DestS, EqC, Exfalso, Ind, Inj, LamP, LamT, Let, Mu, MuT, MuTx, Nat,
    Node, PStack, PVar, Pair, Prf, Proj, Rec, Refl, Shift, Sort, SplitC, SplitS, SubstS,
    Succ, TApp, TCut, TLam, TStack, TVar, Throw, Wit, Zero, numeral_value,
)

logger = logging.getLogger(__name__)

# Co-variables printed without the quote prefix
BARE_COVARS = frozenset({"alpha", "beta", TP, STAR})

BINDER, APP, ATOM = 0, 1, 2


def covar_name(name: str) -> str:
    return name if name in BARE_COVARS else f"'{name}"


def pretty(node: object) -> str:
    """
    Render any syntax node, store or formula

    Args:
        node: Proof, term, context, command, closure, formula, type or store

    Returns:
        Text that parses back to an α-equivalent node
    """
    if isinstance(node, tuple):
        return pretty_store(node)
    return _Printer().show(node)


def pretty_store(store) -> str:
    return " ".join(_Printer().binding(b) for b in store)


def store_records(store) -> List[Dict[str, str]]:
    """JSON-friendly view of a store: ordered {name, kind, body}"""
    printer = _Printer()
    return [
        {
            "name": b.name if b.sort is not Sort.COVAR else covar_name(b.name),
            "kind": "context" if b.sort is Sort.COVAR else "proof",
            "body": printer.show(b.value),
        }
        for b in store
    ]


class _Printer:
    """Precedence-aware printer"""

    def show(self, node: object) -> str:
        if isinstance(node, Closure):
            return self.closure(node.cmd, node.store)
        if isinstance(node, (Cut, TCut)):
            return self.command(node)
        if isinstance(node, (Top, Bot, Eq, And, Or, Pi, Forall, Exists, Nu, FHole)):
            return self.formula(node)
        if isinstance(node, (Nat, Arrow, THole)):
            return self.type(node)
        if isinstance(node, (CoVar, Abort, MuT, CaseC, SplitC, DestC, TStack, PStack, EqC, CoShift, MuTx)):
            return self.context(node)
        return self.expr(node, BINDER)

    # Expressions (terms and proofs share one grammar)

    def expr(self, node: Node, level: int) -> str:
        text, own = self._expr(node)
        return f"({text})" if own < level else text

    def _expr(self, n: Node):
        if isinstance(n, (TVar, PVar)):
            return n.name, ATOM
        if isinstance(n, Zero):
            return "0", ATOM
        if isinstance(n, Succ):
            value = numeral_value(n)
            if value is not None:
                return str(value), ATOM
            return f"S({self.expr(n.arg, BINDER)})", ATOM
        if isinstance(n, Rec):
            return (
                f"rec({self.expr(n.index, BINDER)}; {self.expr(n.base, BINDER)}; "
                f"({n.nvar}, {n.rvar}). {self.expr(n.step, BINDER)})"
            ), ATOM
        if isinstance(n, (TLam, LamT)):
            return f"lam {n.var}. {self.expr(n.body, BINDER)}", BINDER
        if isinstance(n, (TApp, AppT, AppP)):
            return f"{self.expr(n.fun, APP)} {self.expr(n.arg, ATOM)}", APP
        if isinstance(n, Wit):
            return f"wit {self.expr(n.proof, ATOM)}", APP
        if isinstance(n, Inj):
            return f"inj{n.index} {self.expr(n.body, ATOM)}", APP
        if isinstance(n, Pair):
            return f"({self.expr(n.left, BINDER)}, {self.expr(n.right, BINDER)})", ATOM
        if isinstance(n, DPair):
            return f"[{self.expr(n.witness, BINDER)}, {self.expr(n.body, BINDER)}]", ATOM
        if isinstance(n, LamP):
            return f"fun {n.var}. {self.expr(n.body, BINDER)}", BINDER
        if isinstance(n, Refl):
            return "refl", ATOM
        if isinstance(n, Ind):
            return (
                f"fix({self.expr(n.index, BINDER)}; {self.expr(n.base, BINDER)}; "
                f"({n.pvar}, {n.tvar}). {self.expr(n.step, BINDER)})"
            ), ATOM
        if isinstance(n, Cofix):
            return f"cofix({self.expr(n.index, BINDER)}; ({n.pvar}, {n.tvar}). {self.expr(n.body, BINDER)})", ATOM
        if isinstance(n, Mu):
            return f"mu {covar_name(n.covar)}. {self.command(n.cmd)}", BINDER
        if isinstance(n, Shift):
            return f"shift({self.closure(n.cmd, n.store)})", ATOM
        if isinstance(n, Let):
            return f"let {n.var} = {self.expr(n.bound, BINDER)} in {self.expr(n.body, BINDER)}", BINDER
        if isinstance(n, SplitS):
            return (
                f"split {self.expr(n.bound, BINDER)} as ({n.var1}, {n.var2}) in {self.expr(n.body, BINDER)}"
            ), BINDER
        if isinstance(n, DestS):
            return (
                f"dest {self.expr(n.bound, BINDER)} as ({n.tvar}, {n.pvar}) in {self.expr(n.body, BINDER)}"
            ), BINDER
        if isinstance(n, CaseS):
            return (
                f"case {self.expr(n.bound, BINDER)} of {{inj1 {n.var1} -> {self.expr(n.body1, BINDER)} "
                f"| inj2 {n.var2} -> {self.expr(n.body2, BINDER)}}}"
            ), BINDER
        if isinstance(n, Prf):
            return f"prf {self.expr(n.proof, ATOM)}", APP
        if isinstance(n, Exfalso):
            return f"exfalso {self.expr(n.proof, ATOM)}", APP
        if isinstance(n, SubstS):
            return f"subst {self.expr(n.eq, ATOM)} {self.expr(n.body, ATOM)}", APP
        if isinstance(n, Catch):
            return f"catch {covar_name(n.covar)} {self.expr(n.body, ATOM)}", APP
        if isinstance(n, Throw):
            return f"throw {covar_name(n.covar)} {self.expr(n.body, ATOM)}", APP
        if isinstance(n, Proj):
            return f"pi{n.index}({self.expr(n.proof, BINDER)})", ATOM
        raise TypeError(f"cannot print {type(n).__name__} as an expression")

    # Contexts, commands, stores

    def context(self, e: Node) -> str:
        if isinstance(e, CoVar):
            return covar_name(e.name)
        if isinstance(e, Abort):
            return "abort"
        if isinstance(e, (MuT, MuTx)):
            return f"mu~ {e.var}. {self.closure(e.cmd, e.store)}"
        if isinstance(e, CaseC):
            return f"case~ {{inj1 {e.var1} -> {self.command(e.cmd1)} | inj2 {e.var2} -> {self.command(e.cmd2)}}}"
        if isinstance(e, SplitC):
            return f"split~ ({e.var1}, {e.var2}) -> {self.command(e.cmd)}"
        if isinstance(e, DestC):
            return f"dest~ ({e.tvar}, {e.pvar}) -> {self.command(e.cmd)}"
        if isinstance(e, TStack):
            return f"{self.expr(e.term, APP)} . {self.context(e.ctx)}"
        if isinstance(e, PStack):
            return f"{self.expr(e.proof, APP)} . {self.context(e.ctx)}"
        if isinstance(e, EqC):
            return f"eq~ -> {self.command(e.cmd)}"
        if isinstance(e, CoShift):
            return f"coshift({self.command(e.cmd)})"
        raise TypeError(f"cannot print {type(e).__name__} as a context")

    def command(self, c: Node) -> str:
        if isinstance(c, Cut):
            return f"<{self.expr(c.proof, BINDER)} | {self.context(c.ctx)}>"
        if isinstance(c, TCut):
            return f"<{self.expr(c.term, BINDER)} | {self.context(c.coterm)}>"
        raise TypeError(f"cannot print {type(c).__name__} as a command")

    def closure(self, cmd: Node, store) -> str:
        parts = [self.command(cmd)] + [self.binding(b) for b in store]
        return " ".join(parts)

    def binding(self, b: Binding) -> str:
        if b.sort is Sort.COVAR:
            return f"[{covar_name(b.name)} := {self.context(b.value)}]"
        return f"[{b.name} := {self.expr(b.value, BINDER)}]"

    # Formulas and types

    def formula(self, f: Node, level: int = 0) -> str:
        # levels: 0 binder/implication, 1 disjunction, 2 conjunction, 3 atom
        text, own = self._formula(f)
        return f"({text})" if own < level else text

    def _formula(self, f: Node):
        if isinstance(f, Top):
            return "top", 3
        if isinstance(f, Bot):
            return "bot", 3
        if isinstance(f, FHole):
            return f"?{f.ident}", 3
        if isinstance(f, Eq):
            return f"{self.expr(f.left, APP)} = {self.expr(f.right, APP)}", 3
        if isinstance(f, And):
            return f"{self.formula(f.left, 2)} /\\ {self.formula(f.right, 3)}", 2
        if isinstance(f, Or):
            return f"{self.formula(f.left, 1)} \\/ {self.formula(f.right, 2)}", 1
        if isinstance(f, Pi):
            if not occurs_free(f.cod, Sort.PROOF, f.var):
                return f"{self.formula(f.dom, 1)} -> {self.formula(f.cod, 0)}", 0
            return f"Pi ({f.var} : {self.formula(f.dom, 0)}). {self.formula(f.cod, 0)}", 0
        if isinstance(f, Forall):
            return f"forall {f.var} : {self.type(f.type)}. {self.formula(f.body, 0)}", 0
        if isinstance(f, Exists):
            return f"exists {f.var} : {self.type(f.type)}. {self.formula(f.body, 0)}", 0
        if isinstance(f, Nu):
            return f"nu [{self.expr(f.index, BINDER)}] ({f.tvar}, {f.fvar}). {self.formula(f.body, 0)}", 0
        raise TypeError(f"cannot print {type(f).__name__} as a formula")

    def type(self, t: Node, atom: bool = False) -> str:
        if isinstance(t, Nat):
            return "nat"
        if isinstance(t, THole):
            return f"?T{t.ident}"
        if isinstance(t, Arrow):
            text = f"{self.type(t.dom, True)} -> {self.type(t.cod)}"
            return f"({text})" if atom else text
        raise TypeError(f"cannot print {type(t).__name__} as a type")
