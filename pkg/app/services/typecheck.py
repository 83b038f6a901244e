"""
Type checker

Bidirectional reading of the sequent rules: proofs and contexts are either checked against
an expected formula or have their formula inferred, with formula meta-variables (holes)
standing for what is not yet known. Commands use the cut rule σ(A) = σ(B); bodies of
delimited continuations are checked in dependent mode, where the dependency list σ
records which proof each pattern stands for.
"""
import logging
from dataclasses import dataclass, fields, replace
from itertools import combinations, count
from typing import Dict, Iterator, List, Optional, Set, Tuple

from config import settings
from app.core.classify import is_nef
from app.core.exceptions import DlpawError, TypeCheckError
from app.core.names import (
    all_names, alpha_eq, count_occurrences, fresh, occurs_free, rename, replace_occurrences,
    replace_selected, subst_proof, subst_term,
)
from app.core.pretty import pretty
from app.models.formulas import (
    And, Bot, Eq, Exists, FHole, Forall, Nu, Or, Pi, THole, fun_atom,
)
from app.models.syntax import (
    CTP, TP,
    Abort, Arrow, Binding, CaseC, Closure, Cofix, CoShift, CoVar, Cut, DPair, DestC, EqC, Ind, Inj,
    LamP, LamT, Mu, MuT, MuTx, Nat, Node, PStack, PVar, Pair, Rec, Refl, Shift, Sort, SplitC,
    Store, Succ, TApp, TCut, TLam, TStack, TVar, Wit, Zero,
)
from app.schemas.reports import DefinitionReport
from app.services.conversion import (
    Dep, Deps, Normalizer, OpenDep, TermDep, apply_deps, conv, positive, render_deps, unfold_nu,
)
from app.services.macros import expand

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Entry:
    name: str
    sort: Sort
    type: Node


class TypingContext:
    """Γ: ordered entries x:T, a:A, α:A^⊥⊥ (t̂p is the co-variable 'tp', čtp the proof 'ctp')"""

    def __init__(self, entries: Tuple[Entry, ...] = ()):
        self.entries = tuple(entries)

    def names(self) -> Set[str]:
        return {e.name for e in self.entries}

    def lookup(self, sort: Sort, name: str) -> Optional[Node]:
        for entry in reversed(self.entries):
            if entry.name == name and entry.sort is sort:
                return entry.type
        return None

    def extend(self, sort: Sort, name: str, type_: Node) -> "TypingContext":
        """
        Add an entry

        Raises:
            TypeCheckError: The name is already bound; the delimiters t̂p and čtp are
                re-bound by every nested (co-)shift and replace their previous entry
        """
        if name in (TP, CTP):
            kept = tuple(e for e in self.entries if e.name != name)
            return TypingContext(kept + (Entry(name, sort, type_),))
        if name in self.names():
            raise TypeCheckError("context", f"'{name}' is already bound")
        return TypingContext(self.entries + (Entry(name, sort, type_),))

    def render(self) -> List[str]:
        return [f"{e.name} : {pretty(e.type)}" for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _proof_like(node: Node) -> bool:
    return not isinstance(node, (TVar, Zero, Succ, Rec, TLam, TApp, Wit))


class TypeChecker:
    """
    One checking run; holes are shared across the run and solved by assignment

    Args:
        unfold_cap: ν-unfoldings per side in conversion
        motive_limit: Candidate motives tried for a fixpoint whose motive is not given
        eq_mode: "all" rewrites every occurrence in the =l rule, "marked" searches subsets
        order: "deps-first" applies σ before normalising, "conv-first" normalises first
    """

    def __init__(
        self,
        unfold_cap: Optional[int] = None,
        motive_limit: Optional[int] = None,
        eq_mode: Optional[str] = None,
        order: Optional[str] = None,
    ):
        self.unfold_cap = settings.NU_UNFOLD_CAP if unfold_cap is None else unfold_cap
        self.motive_limit = settings.MOTIVE_SEARCH_LIMIT if motive_limit is None else motive_limit
        self.eq_mode = eq_mode or settings.EQ_REWRITE_MODE
        self.order = order or settings.CUT_ORDER
        self.normalizer = Normalizer()
        self.solutions: Dict[Tuple[str, int], Node] = {}
        self._ids = count()
        self._links: List[Tuple[FHole, FHole, str, Node]] = []

    # Holes

    def hole(self) -> FHole:
        return FHole(next(self._ids))

    def type_hole(self) -> THole:
        return THole(next(self._ids))

    @staticmethod
    def _key(h: Node) -> Tuple[str, int]:
        return (type(h).__name__, h.ident)

    def resolve(self, node: object) -> object:
        """Substitute solved holes"""
        if isinstance(node, tuple):
            return tuple(self.resolve(n) for n in node)
        if not isinstance(node, Node):
            return node
        if isinstance(node, (FHole, THole)):
            solved = self.solutions.get(self._key(node))
            return node if solved is None else self.resolve(solved)
        changes = {}
        for f in fields(node):
            value = getattr(node, f.name)
            if isinstance(value, (Node, tuple)):
                new = self.resolve(value)
                if new is not value:
                    changes[f.name] = new
        return replace(node, **changes) if changes else node

    def _holes(self, node: object) -> bool:
        if isinstance(node, tuple):
            return any(self._holes(n) for n in node)
        if isinstance(node, (FHole, THole)):
            return self._key(node) not in self.solutions or self._holes(self.solutions[self._key(node)])
        if not isinstance(node, Node):
            return False
        return any(self._holes(getattr(node, f.name)) for f in fields(node))

    def _assign(self, h: Node, value: Node) -> bool:
        value = self.resolve(value)
        if value == h:
            return True
        if _mentions(value, h):
            return False
        self.solutions[self._key(h)] = value
        return True

    def _snapshot(self) -> Dict:
        return dict(self.solutions)

    def _restore(self, snapshot: Dict) -> None:
        self.solutions = snapshot

    # Matching and conversion

    def _match(self, a: Node, b: Node) -> bool:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, (FHole, THole)):
            return self._assign(a, b)
        if isinstance(b, (FHole, THole)):
            return self._assign(b, a)
        if alpha_eq(a, b):
            return True
        if type(a) is not type(b):
            return False
        if isinstance(a, (And, Or, Arrow)):
            left = (a.left, b.left) if not isinstance(a, Arrow) else (a.dom, b.dom)
            right = (a.right, b.right) if not isinstance(a, Arrow) else (a.cod, b.cod)
            return self._match(*left) and self._match(*right)
        if isinstance(a, Pi):
            name = fresh(a.var, all_names((a, b)))
            return self._match(a.dom, b.dom) and self._match(
                rename(a.cod, Sort.PROOF, a.var, name), rename(b.cod, Sort.PROOF, b.var, name)
            )
        if isinstance(a, (Forall, Exists)):
            name = self._binder_name(a, b)
            return self._match(a.type, b.type) and self._match(
                rename(a.body, Sort.TERM, a.var, name), rename(b.body, Sort.TERM, b.var, name)
            )
        if isinstance(a, Nu):
            avoid = all_names((a, b))
            x, f = fresh(a.tvar, avoid), fresh(a.fvar, avoid | {fresh(a.tvar, avoid)})
            left = rename(rename(a.body, Sort.TERM, a.tvar, x), Sort.TERM, a.fvar, f)
            right = rename(rename(b.body, Sort.TERM, b.tvar, x), Sort.TERM, b.fvar, f)
            return alpha_eq(a.index, b.index) and self._match(left, right)
        return False

    def _binder_name(self, a: Node, b: Node) -> str:
        """Common name for two quantifier bodies; a hole body keeps its own binder"""
        for side, other in ((a, b), (b, a)):
            if isinstance(self.resolve(side.body), FHole) and (
                side.var == other.var or not occurs_free(other.body, Sort.TERM, side.var)
            ):
                return side.var
        return fresh(a.var, all_names((a, b)))

    def _same(self, sigma: Deps, found: Node, expected: Node, rule: str) -> None:
        """σ(found) = σ(expected), up to hole assignment and conversion"""
        found, expected = self.resolve(found), self.resolve(expected)
        if self.order == "conv-first" and not (self._holes(found) or self._holes(expected)):
            found, expected = self.normalizer.formula(found), self.normalizer.formula(expected)
        left = self.resolve(apply_deps(sigma, found))
        right = self.resolve(apply_deps(sigma, expected))
        snapshot = self._snapshot()
        if self._match(left, right):
            return
        self._restore(snapshot)
        if self._holes(left) or self._holes(right):
            if self._match(self.normalizer.formula(left), self.normalizer.formula(right)):
                return
            self._restore(snapshot)
        elif conv(left, right, self.unfold_cap, self.normalizer):
            return
        raise TypeCheckError(rule, "formulas are not equivalent", expected=pretty(right), found=pretty(left), deps=render_deps(sigma))

    def _expose(self, formula: Node, cls: type, rule: str) -> Node:
        """Bring a formula to the given head constructor, unfolding ν and solving holes"""
        formula = self.resolve(formula)
        if isinstance(formula, FHole):
            shape = {
                And: lambda: And(self.hole(), self.hole()),
                Or: lambda: Or(self.hole(), self.hole()),
                Exists: lambda: Exists("x", self.type_hole(), self.hole()),
                Forall: lambda: Forall("x", self.type_hole(), self.hole()),
                Pi: lambda: Pi("_", self.hole(), self.hole()),
                Bot: lambda: Bot(),
            }.get(cls)
            if shape is None:
                raise TypeCheckError(rule, f"cannot determine the {cls.__name__} formula")
            value = shape()
            self._assign(formula, value)
            return value
        for _ in range(self.unfold_cap + 2):
            if isinstance(formula, cls):
                return formula
            if isinstance(formula, Nu):
                formula = unfold_nu(formula)
                continue
            normal = self.normalizer.formula(formula)
            if normal == formula:
                break
            formula = normal
        if isinstance(formula, cls):
            return formula
        raise TypeCheckError(rule, f"expected a formula of shape {cls.__name__}", found=pretty(formula))

    def _same_type(self, found: Node, expected: Node, rule: str) -> None:
        if not self._match(found, expected):
            raise TypeCheckError(rule, "finite types differ", expected=pretty(self.resolve(expected)), found=pretty(self.resolve(found)))

    def _same_term(self, sigma: Deps, left: Node, right: Node, rule: str) -> None:
        left = self.normalizer.term(apply_deps(sigma, left))
        right = self.normalizer.term(apply_deps(sigma, right))
        if not alpha_eq(left, right):
            raise TypeCheckError(rule, "terms are not convertible", expected=pretty(right), found=pretty(left), deps=render_deps(sigma))

    # Binders

    def _open(self, ctx: TypingContext, sort: Sort, name: str, type_: Node, *bodies: object):
        """Extend Γ with a binder, renaming it in its bodies if the name is taken"""
        if name in ctx.names() and name not in (TP, CTP):
            new = fresh(name, ctx.names() | all_names(bodies))
            bodies = tuple(rename(b, sort, name, new) for b in bodies)
            name = new
        return (ctx.extend(sort, name, type_), name) + tuple(bodies)

    # Terms

    def infer_term(self, ctx: TypingContext, t: Node, sigma: Deps = ()) -> Node:
        """Finite type of a term"""
        if isinstance(t, TVar):
            found = ctx.lookup(Sort.TERM, t.name)
            if found is None:
                raise TypeCheckError("ax-t", f"unbound term variable '{t.name}'")
            return found
        if isinstance(t, Zero):
            return Nat()
        if isinstance(t, Succ):
            self.check_term(ctx, t.arg, Nat(), sigma)
            return Nat()
        if isinstance(t, TLam):
            dom = self.type_hole()
            inner, _, body = self._open(ctx, Sort.TERM, t.var, dom, t.body)
            cod = self.infer_term(inner, body, sigma)
            return self.resolve(Arrow(dom, cod))
        if isinstance(t, TApp):
            fun = self.resolve(self.infer_term(ctx, t.fun, sigma))
            if isinstance(fun, THole):
                arrow = Arrow(self.type_hole(), self.type_hole())
                self._assign(fun, arrow)
                fun = arrow
            if not isinstance(fun, Arrow):
                raise TypeCheckError("@", "application of a term that is not a function", found=pretty(fun))
            self.check_term(ctx, t.arg, fun.dom, sigma)
            return self.resolve(fun.cod)
        if isinstance(t, Rec):
            self.check_term(ctx, t.index, Nat(), sigma)
            result = self.infer_term(ctx, t.base, sigma)
            inner, _, step = self._open(ctx, Sort.TERM, t.nvar, Nat(), t.step)
            inner, _, step = self._open(inner, Sort.TERM, t.rvar, result, step)
            self.check_term(inner, step, result, sigma)
            return self.resolve(result)
        if isinstance(t, Wit):
            if not is_nef(t.proof):
                raise TypeCheckError("wit", "wit applies only to NEF proofs", found=pretty(t.proof))
            formula = self._expose(self.infer_proof(ctx, sigma, t.proof), Exists, "wit")
            return formula.type
        raise TypeCheckError("term", f"not a term: {type(t).__name__}")

    def check_term(self, ctx: TypingContext, t: Node, type_: Node, sigma: Deps = ()) -> None:
        self._same_type(self.infer_term(ctx, t, sigma), type_, "term")

    # Proofs

    def infer_proof(self, ctx: TypingContext, sigma: Deps, p: Node) -> Node:
        """Formula of a proof, or TypeCheckError"""
        if isinstance(p, PVar):
            found = ctx.lookup(Sort.PROOF, p.name)
            if found is None:
                raise TypeCheckError("ax-r", f"unbound proof variable '{p.name}'")
            return found
        if isinstance(p, Mu):
            answer = self.hole()
            inner, _, cmd = self._open(ctx, Sort.COVAR, p.covar, answer, p.cmd)
            self._command(inner, sigma, cmd, dep=False)
            return self._solved(answer, "mu", p)
        if isinstance(p, Shift):
            answer = self.hole()
            self._shift(ctx, sigma, p, answer)
            return self._solved(answer, "mu-tp", p)
        if isinstance(p, Pair):
            return And(self.infer_proof(ctx, sigma, p.left), self.infer_proof(ctx, sigma, p.right))
        if isinstance(p, Inj):
            body = self.infer_proof(ctx, sigma, p.body)
            return Or(body, self.hole()) if p.index == 1 else Or(self.hole(), body)
        if isinstance(p, DPair):
            return self._infer_dpair(ctx, sigma, p)
        if isinstance(p, LamT):
            dom = self.type_hole()
            inner, name, body = self._open(ctx, Sort.TERM, p.var, dom, p.body)
            return self.resolve(Forall(name, dom, self.infer_proof(inner, sigma, body)))
        if isinstance(p, LamP):
            dom = self.hole()
            inner, name, body = self._open(ctx, Sort.PROOF, p.var, dom, p.body)
            cod = self.infer_proof(inner, sigma, body)
            return Pi(name, self._solved(dom, "imp-r", p), cod)
        if isinstance(p, Ind):
            return self._infer_ind(ctx, sigma, p)
        if isinstance(p, Cofix):
            return self._cofix(ctx, sigma, p, None)
        if isinstance(p, Refl):
            raise TypeCheckError("refl", "cannot infer the equation proved by refl; give the formula")
        raise TypeCheckError("proof", f"cannot infer the formula of {type(p).__name__}; expand sugar first")

    def _solved(self, h: FHole, rule: str, p: Node) -> Node:
        value = self.resolve(h)
        if isinstance(value, FHole):
            raise TypeCheckError(rule, f"cannot infer the formula of {pretty(p)}")
        return value

    def _infer_dpair(self, ctx: TypingContext, sigma: Deps, p: DPair) -> Node:
        witness_type = self.infer_term(ctx, p.witness, sigma)
        body = Eq(p.witness, p.witness) if isinstance(p.body, Refl) else self.infer_proof(ctx, sigma, p.body)
        body = self.resolve(body)
        x = fresh("x", all_names((body, p.witness)) | ctx.names())
        if isinstance(body, FHole):
            # body = inner[witness/x], settled once inner is known
            inner = self.hole()
            self._links.append((body, inner, x, p.witness))
            return Exists(x, self.resolve(witness_type), inner)
        return Exists(x, self.resolve(witness_type), replace_occurrences(body, p.witness, TVar(x)))

    def check_proof(self, ctx: TypingContext, sigma: Deps, p: Node, formula: Node) -> None:
        """Check a proof against a formula; raises TypeCheckError naming the failed premise"""
        formula = self.resolve(formula)
        if isinstance(p, Mu):
            inner, _, cmd = self._open(ctx, Sort.COVAR, p.covar, formula, p.cmd)
            self._command(inner, sigma, cmd, dep=False)
            return
        if isinstance(p, Shift):
            self._shift(ctx, sigma, p, formula)
            return
        if isinstance(formula, FHole) and not isinstance(p, (LamT, LamP)):
            self._same(sigma, self.infer_proof(ctx, sigma, p), formula, "cut")
            return
        if isinstance(p, Pair):
            target = self._expose(formula, And, "and-r")
            self.check_proof(ctx, sigma, p.left, target.left)
            self.check_proof(ctx, sigma, p.right, target.right)
            return
        if isinstance(p, Inj):
            target = self._expose(formula, Or, "or-r")
            self.check_proof(ctx, sigma, p.body, target.left if p.index == 1 else target.right)
            return
        if isinstance(p, DPair):
            target = self._expose(formula, Exists, "exists-r")
            self.check_term(ctx, p.witness, target.type, sigma)
            self.check_proof(ctx, sigma, p.body, subst_term(target.body, target.var, p.witness))
            return
        if isinstance(p, LamT):
            target = self._expose(formula, Forall, "forall-r")
            body_formula = rename(target.body, Sort.TERM, target.var, p.var)
            inner, _, body, body_formula = self._open(ctx, Sort.TERM, p.var, target.type, p.body, body_formula)
            self.check_proof(inner, sigma, body, body_formula)
            return
        if isinstance(p, LamP):
            target = self._expose(formula, Pi, "imp-r")
            body_formula = rename(target.cod, Sort.PROOF, target.var, p.var)
            inner, _, body, body_formula = self._open(ctx, Sort.PROOF, p.var, target.dom, p.body, body_formula)
            self.check_proof(inner, sigma, body, body_formula)
            return
        if isinstance(p, Refl):
            target = self._expose(formula, Eq, "refl")
            self.check_term(ctx, target.left, Nat(), sigma)
            self._same_term(sigma, target.left, target.right, "refl")
            return
        if isinstance(p, Ind):
            self._check_ind(ctx, sigma, p, formula)
            return
        if isinstance(p, Cofix):
            self._cofix(ctx, sigma, p, formula)
            return
        self._same(sigma, self.infer_proof(ctx, sigma, p), formula, "ax-r" if isinstance(p, PVar) else "cut")

    def _shift(self, ctx: TypingContext, sigma: Deps, p: Shift, formula: Node) -> None:
        inner = ctx.extend(Sort.COVAR, TP, formula)
        self._region(inner, sigma, p.cmd, p.store, dep=True)

    # Fixpoints

    def _motives(self, formula: Node, pattern: Node, var: str) -> Iterator[Node]:
        """Candidate motives M with M[pattern/var] = formula; abstracting all occurrences first"""
        n = count_occurrences(formula, pattern)
        subsets: List[Tuple[int, ...]] = []
        if n:
            subsets.append(tuple(range(n)))
        for size in [1] + list(range(n - 1, 1, -1)):
            for subset in combinations(range(n), size):
                if subset not in subsets:
                    subsets.append(subset)
        subsets = subsets[:max(self.motive_limit - 1, 0)] + [()]
        for subset in subsets:
            yield replace_selected(formula, pattern, TVar(var), subset)

    def _fixpoint_premises(self, ctx: TypingContext, sigma: Deps, p: Ind, var: str, motive: Node) -> None:
        self.check_proof(ctx, sigma, p.base, subst_term(motive, var, Zero()))
        inner, x, step = self._open(ctx, Sort.TERM, p.tvar, Nat(), p.step)
        inner, _, step = self._open(inner, Sort.PROOF, p.pvar, subst_term(motive, var, TVar(x)), step)
        self.check_proof(inner, sigma, step, subst_term(motive, var, Succ(TVar(x))))

    def _check_ind(self, ctx: TypingContext, sigma: Deps, p: Ind, formula: Node) -> None:
        self.check_term(ctx, p.index, Nat(), sigma)
        var = fresh("n", all_names((formula, p)) | ctx.names())
        error: Optional[TypeCheckError] = None
        for motive in self._motives(formula, p.index, var):
            snapshot = self._snapshot()
            try:
                self._fixpoint_premises(ctx, sigma, p, var, motive)
                return
            except TypeCheckError as e:
                self._restore(snapshot)
                error = error or e
        raise TypeCheckError("fix", f"no motive found for {pretty(p)}", expected=pretty(formula), found=error.render() if error else None)

    def _infer_ind(self, ctx: TypingContext, sigma: Deps, p: Ind) -> Node:
        self.check_term(ctx, p.index, Nat(), sigma)
        base = self.resolve(self.infer_proof(ctx, sigma, p.base))
        var = fresh("n", all_names((base, p)) | ctx.names())
        error: Optional[TypeCheckError] = None
        for motive in self._motives(base, Zero(), var):
            snapshot = self._snapshot()
            try:
                self._fixpoint_premises(ctx, sigma, p, var, motive)
                return subst_term(motive, var, p.index)
            except TypeCheckError as e:
                self._restore(snapshot)
                error = error or e
        raise TypeCheckError("fix", f"no motive found for {pretty(p)}", found=error.render() if error else None)

    def _cofix(self, ctx: TypingContext, sigma: Deps, p: Cofix, formula: Optional[Node]) -> Node:
        index_type = self.resolve(self.infer_term(ctx, p.index, sigma))
        f = fresh("f", ctx.names() | all_names((p, formula)))
        body_formula = None
        if formula is not None:
            target = self._expose(formula, Nu, "cofix")
            self._same_term(sigma, p.index, target.index, "cofix")
            body_formula = rename(rename(target.body, Sort.TERM, target.fvar, f), Sort.TERM, target.tvar, p.tvar)
        inner = ctx.extend(Sort.TERM, f, Arrow(index_type, Nat()))
        y = fresh("y", all_names((p, body_formula)))
        inner, x, body, body_formula = self._open(inner, Sort.TERM, p.tvar, index_type, p.body, body_formula)
        inner, _, body = self._open(inner, Sort.PROOF, p.pvar, Forall(y, index_type, fun_atom(f, TVar(y))), body)
        if body_formula is None:
            body_formula = self.resolve(self.infer_proof(inner, sigma, body))
        else:
            self.check_proof(inner, sigma, body, body_formula)
        if not positive(f, self.resolve(body_formula)):
            raise TypeCheckError("cofix", f"'{f}' is not positive", found=pretty(self.resolve(body_formula)))
        return Nu(p.index, x, f, self.resolve(body_formula))

    # Contexts

    def infer_context(self, ctx: TypingContext, sigma: Deps, e: Node, dep: bool = False) -> Node:
        """A such that e : A^⊥⊥"""
        if isinstance(e, CoVar):
            found = ctx.lookup(Sort.COVAR, e.name)
            if found is None:
                raise TypeCheckError("ax-l", f"unbound co-variable '{e.name}'")
            return found
        if isinstance(e, Abort):
            return Bot()
        if isinstance(e, EqC):
            raise TypeCheckError("eq-l", "cannot infer the equation destructed by eq~")
        if isinstance(e, PStack):
            dom = self.infer_proof(ctx, sigma, e.proof)
            return Pi("_", dom, self.infer_context(ctx, sigma, e.ctx, dep))
        if isinstance(e, TStack):
            type_ = self.infer_term(ctx, e.term, sigma)
            rest = self.resolve(self.infer_context(ctx, sigma, e.ctx, dep))
            x = fresh("x", all_names((rest, e.term)) | ctx.names())
            return Forall(x, self.resolve(type_), replace_occurrences(rest, e.term, TVar(x)))
        formula = self.hole()
        self.check_context(ctx, sigma, e, formula, dep)
        return self._solved(formula, "mu-tilde", e)

    def check_context(self, ctx: TypingContext, sigma: Deps, e: Node, formula: Node, dep: bool = False) -> None:
        """e : A^⊥⊥; in dependent mode σ ends with the open marker {·|p}"""
        formula = self.resolve(formula)
        if isinstance(e, CoVar):
            self._same(sigma, formula, self.infer_context(ctx, sigma, e, dep), "ax-l" if e.name != TP else "tp")
            return
        if isinstance(e, Abort):
            self._expose(formula, Bot, "bot")
            return
        if isinstance(e, MuT):
            inner, name, cmd, store = self._open(ctx, Sort.PROOF, e.var, formula, e.cmd, e.store)
            self._region(inner, self._close_marker(sigma, PVar(name), dep), cmd, store, dep)
            return
        if isinstance(e, SplitC):
            target = self._expose(formula, And, "and-l")
            inner, a1, cmd = self._open(ctx, Sort.PROOF, e.var1, target.left, e.cmd)
            inner, a2, cmd = self._open(inner, Sort.PROOF, e.var2, target.right, cmd)
            self._command(inner, self._close_marker(sigma, Pair(PVar(a1), PVar(a2)), dep), cmd, dep)
            return
        if isinstance(e, CaseC):
            target = self._expose(formula, Or, "or-l")
            for index, var, cmd, branch in ((1, e.var1, e.cmd1, target.left), (2, e.var2, e.cmd2, target.right)):
                inner, name, cmd = self._open(ctx, Sort.PROOF, var, branch, cmd)
                self._command(inner, self._close_marker(sigma, Inj(index, PVar(name)), dep), cmd, dep)
            return
        if isinstance(e, DestC):
            target = self._expose(formula, Exists, "exists-l")
            body = rename(target.body, Sort.TERM, target.var, e.tvar)
            inner, x, cmd, body = self._open(ctx, Sort.TERM, e.tvar, target.type, e.cmd, body)
            inner, a, cmd = self._open(inner, Sort.PROOF, e.pvar, body, cmd)
            self._command(inner, self._close_marker(sigma, DPair(TVar(x), PVar(a)), dep), cmd, dep)
            return
        if isinstance(e, EqC):
            self._eq_left(ctx, sigma, e, formula, dep)
            return
        if isinstance(e, TStack):
            target = self._expose(formula, Forall, "forall-l")
            self.check_term(ctx, e.term, target.type, sigma)
            self.check_context(ctx, sigma, e.ctx, subst_term(target.body, target.var, e.term), dep)
            return
        if isinstance(e, PStack):
            target = self._expose(formula, Pi, "imp-l")
            self.check_proof(ctx, sigma, e.proof, target.dom)
            if not is_nef(e.proof) and occurs_free(target.cod, Sort.PROOF, target.var):
                raise TypeCheckError(
                    "imp-l", f"argument is not NEF but '{target.var}' occurs in the conclusion",
                    expected="a NEF argument", found=pretty(e.proof),
                )
            self.check_context(ctx, sigma, e.ctx, subst_proof(target.cod, target.var, e.proof), dep)
            return
        if isinstance(e, CoShift):
            inner = ctx.extend(Sort.PROOF, CTP, formula)
            self._command(inner, sigma, e.cmd, dep=True)
            return
        raise TypeCheckError("context", f"not a context: {type(e).__name__}")

    @staticmethod
    def _close_marker(sigma: Deps, pattern: Node, dep: bool) -> Deps:
        """Replace the open marker {·|p} by {pattern|p}"""
        if not dep or not sigma or not isinstance(sigma[-1], OpenDep):
            return sigma
        return sigma[:-1] + (Dep(pattern, sigma[-1].proof),)

    def _eq_left(self, ctx: TypingContext, sigma: Deps, e: EqC, formula: Node, dep: bool) -> None:
        target = self._expose(formula, Eq, "eq-l")
        if not isinstance(e.cmd, Cut):
            raise TypeCheckError("eq-l", "eq~ must bind a proof command")
        proof, rest = e.cmd.proof, e.cmd.ctx
        found = self.resolve(self.infer_proof(ctx, sigma, proof))
        n = count_occurrences(found, target.left)
        candidates = [replace_occurrences(found, target.left, target.right)]
        if self.eq_mode == "marked":
            candidates += [replace_selected(found, target.left, target.right, [i]) for i in range(n)]
            candidates = candidates[:max(self.motive_limit, 1)]
        error: Optional[TypeCheckError] = None
        for rewritten in candidates:
            snapshot = self._snapshot()
            try:
                self.check_context(ctx, sigma, rest, rewritten, dep)
                return
            except TypeCheckError as err:
                self._restore(snapshot)
                error = error or err
        raise error

    # Commands

    def _synthesizes(self, p: Node) -> bool:
        if isinstance(p, Refl):
            return False
        if isinstance(p, (Pair,)):
            return self._synthesizes(p.left) and self._synthesizes(p.right)
        if isinstance(p, Inj):
            return self._synthesizes(p.body)
        if isinstance(p, (LamT, LamP)):
            return self._synthesizes(p.body)
        if isinstance(p, DPair):
            return isinstance(p.body, Refl) or self._synthesizes(p.body)
        if isinstance(p, Ind):
            return self._synthesizes(p.base)
        return True

    def _context_synthesizes(self, e: Node) -> bool:
        if isinstance(e, EqC):
            return False
        if isinstance(e, PStack):
            return self._synthesizes(e.proof) and self._context_synthesizes(e.ctx)
        if isinstance(e, TStack):
            return self._context_synthesizes(e.ctx)
        return True

    def check_command(self, ctx: TypingContext, sigma: Deps, c: Node) -> None:
        """Regular-mode cut"""
        self._command(ctx, sigma, c, dep=False)

    def check_command_dep(self, ctx: TypingContext, sigma: Deps, c: Node) -> None:
        """Dependent-mode command c_t̂p (or c_čtp)"""
        self._command(ctx, sigma, c, dep=True)

    def _command(self, ctx: TypingContext, sigma: Deps, c: Node, dep: bool) -> None:
        if isinstance(c, TCut):
            self._term_command(ctx, sigma, c, dep)
            return
        if not isinstance(c, Cut):
            raise TypeCheckError("cut", f"not a command: {type(c).__name__}")
        p, e = c.proof, c.ctx
        context_sigma = sigma
        if dep and not isinstance(e, CoVar):
            if not is_nef(p):
                raise TypeCheckError("cut-d", "a dependent cut needs a NEF proof", found=pretty(p))
            context_sigma = sigma + (OpenDep(p),)
        orders = []
        if self._synthesizes(p):
            orders.append("proof")
        if self._context_synthesizes(e) or not orders:
            orders.append("context")
        error: Optional[TypeCheckError] = None
        for order in orders:
            snapshot = self._snapshot()
            try:
                if order == "proof":
                    formula = self.infer_proof(ctx, sigma, p)
                    self.check_context(ctx, context_sigma, e, formula, dep)
                else:
                    formula = self.infer_context(ctx, context_sigma, e, dep)
                    self.check_proof(ctx, sigma, p, formula)
                return
            except TypeCheckError as err:
                self._restore(snapshot)
                error = error or err
        raise error

    def _term_command(self, ctx: TypingContext, sigma: Deps, c: TCut, dep: bool) -> None:
        type_ = self.infer_term(ctx, c.term, sigma)
        coterm_sigma = sigma + (OpenDep(c.term),) if dep else sigma
        self.check_coterm(ctx, coterm_sigma, c.coterm, type_, dep)

    def check_coterm(self, ctx: TypingContext, sigma: Deps, pi: Node, type_: Node, dep: bool = False) -> None:
        """π : T^⊥⊥ for the term co-terms u·π and μ̃x.c"""
        type_ = self.resolve(type_)
        if isinstance(pi, TStack):
            if isinstance(type_, THole):
                arrow = Arrow(self.type_hole(), self.type_hole())
                self._assign(type_, arrow)
                type_ = arrow
            if not isinstance(type_, Arrow):
                raise TypeCheckError("imp-l-t", "stack against a non-function type", found=pretty(type_))
            self.check_term(ctx, pi.term, type_.dom, sigma)
            self.check_coterm(ctx, sigma, pi.ctx, type_.cod, dep)
            return
        if isinstance(pi, MuTx):
            inner, name, cmd, store = self._open(ctx, Sort.TERM, pi.var, type_, pi.cmd, pi.store)
            if dep and sigma and isinstance(sigma[-1], OpenDep):
                sigma = sigma[:-1] + (TermDep(name, sigma[-1].proof),)
            self._region(inner, sigma, cmd, store, dep)
            return
        raise TypeCheckError("coterm", f"not a term co-term: {type(pi).__name__}")

    # Stores and closures

    def check_store(self, ctx: TypingContext, sigma: Deps, store: Store) -> Tuple[TypingContext, Deps]:
        """
        Type a store left to right

        Returns:
            Γ extended with one entry per binding, σ extended with {a|p} per proof binding
        """
        ctx, sigma, pending = self._store(ctx, sigma, store)
        self._settle(pending)
        return ctx, sigma

    def _store(self, ctx: TypingContext, sigma: Deps, store: Store):
        # Proofs whose formula cannot be inferred (a stored refl) are bound to a hole; the
        # binding is checked against the hole's solution once the region has been checked.
        pending: List[Tuple[TypingContext, Deps, Binding, FHole]] = []
        for binding in store:
            try:
                if binding.sort is Sort.PROOF:
                    snapshot = self._snapshot()
                    try:
                        formula = self.resolve(self.infer_proof(ctx, sigma, binding.value))
                    except TypeCheckError as e:
                        if e.rule not in _UNDETERMINED or not e.message.startswith("cannot infer"):
                            raise
                        self._restore(snapshot)
                        formula = self.hole()
                        pending.append((ctx, sigma, binding, formula))
                    ctx = ctx.extend(Sort.PROOF, binding.name, formula)
                    sigma = sigma + (Dep(PVar(binding.name), binding.value),)
                elif binding.sort is Sort.COVAR:
                    formula = self.resolve(self.infer_context(ctx, sigma, binding.value))
                    ctx = ctx.extend(Sort.COVAR, binding.name, formula)
                else:
                    raise TypeCheckError("store", f"term binding '{binding.name}' in a store")
            except TypeCheckError as e:
                raise _store_error(binding, e)
        return ctx, sigma, pending

    def _settle(self, pending) -> None:
        for body, inner, x, witness in self._links:
            if isinstance(self.resolve(body), FHole) and not self._holes(inner):
                self._assign(body, subst_term(self.resolve(inner), x, witness))
        for ctx, sigma, binding, h in pending:
            formula = self.resolve(h)
            if isinstance(formula, FHole):
                continue
            try:
                self.check_proof(ctx, sigma, binding.value, formula)
            except TypeCheckError as e:
                raise _store_error(binding, e)

    def _region(self, ctx: TypingContext, sigma: Deps, cmd: Node, store: Store, dep: bool) -> None:
        ctx, sigma, pending = self._store(ctx, sigma, store)
        self._command(ctx, sigma, cmd, dep)
        self._settle(pending)

    def check_closure(self, ctx: TypingContext, cl: Closure) -> None:
        self._region(ctx, (), cl.cmd, cl.store, dep=False)


# Rules that report a formula they cannot infer rather than a mismatch
_UNDETERMINED = ("refl", "mu", "mu-tp", "imp-r", "eq-l")


def _store_error(binding: Binding, e: TypeCheckError) -> TypeCheckError:
    if e.rule == "store":
        return e
    return TypeCheckError(
        "store", f"binding [{binding.name} := {pretty(binding.value)}]: {e.message}",
        expected=e.expected, found=e.found, deps=e.deps,
    )


def _mentions(node: object, hole: Node) -> bool:
    if node == hole:
        return True
    if isinstance(node, tuple):
        return any(_mentions(n, hole) for n in node)
    if not isinstance(node, Node):
        return False
    return any(_mentions(getattr(node, f.name), hole) for f in fields(node))


# Functional interface

def infer_term(ctx: TypingContext, t: Node) -> Node:
    return TypeChecker().infer_term(ctx, t)


def infer_proof(ctx: TypingContext, sigma: Deps, p: Node) -> Node:
    checker = TypeChecker()
    return checker.resolve(checker.infer_proof(ctx, sigma, p))


def check_proof(ctx: TypingContext, sigma: Deps, p: Node, formula: Node) -> None:
    TypeChecker().check_proof(ctx, sigma, p, formula)


def check_context(ctx: TypingContext, sigma: Deps, e: Node, formula: Node) -> None:
    TypeChecker().check_context(ctx, sigma, e, formula)


def check_command(ctx: TypingContext, sigma: Deps, c: Node) -> None:
    TypeChecker().check_command(ctx, sigma, c)


def check_command_dep(ctx: TypingContext, sigma: Deps, c: Node) -> None:
    TypeChecker().check_command_dep(ctx, sigma, c)


def check_store(ctx: TypingContext, sigma: Deps, store: Store) -> Tuple[TypingContext, Deps]:
    return TypeChecker().check_store(ctx, sigma, store)


def check_closure(ctx: TypingContext, cl: Closure) -> None:
    TypeChecker().check_closure(ctx, cl)


def typecheck(proof: Node, formula: Node, ctx: Optional[TypingContext] = None) -> None:
    """Expand sugar and check a closed proof against a formula"""
    TypeChecker().check_proof(ctx or TypingContext(), (), expand(proof), formula)


def check_definition(name: str, proof: Node, formula: Node, ctx: Optional[TypingContext] = None) -> DefinitionReport:
    """Check one definition or check obligation; errors are reported, not raised"""
    try:
        typecheck(proof, formula, ctx)
    except TypeCheckError as e:
        logger.info(f"Definition {name} rejected by rule {e.rule}")
        return DefinitionReport(name=name, status="error", declared_type=pretty(formula), error=e.render(), rule=e.rule)
    except DlpawError as e:
        return DefinitionReport(name=name, status="error", declared_type=pretty(formula), error=str(e))
    logger.info(f"Definition {name} checked")
    return DefinitionReport(name=name, status="ok", declared_type=pretty(formula), inferred_type=pretty(formula))
