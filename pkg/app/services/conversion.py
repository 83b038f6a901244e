"""
Definitional equivalence of formulas and dependency lists

``conv`` decides a sound under-approximation of ≡: embedded terms are normalised by β
and rec, NEF proofs inside ``wit`` are reduced symbolically, equalities between
numerals are simplified, and ν-formulas are unfolded a bounded number of times.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from config import settings
from app.core.classify import is_nef
from app.core.names import (
    all_names, alpha_eq, fresh, occurs_free, rename, replace_occurrences, subst_proof, subst_term, substitute,
)
from app.core.pretty import pretty
from app.models.formulas import (
    And, Bot, Eq, Exists, Forall, Nu, Or, Pi, is_fun_atom,
)
from app.models.syntax import (
    STAR, TP,
    CaseC, Cofix, CoVar, Cut, DPair, DestC, EqC, Ind, Inj, Mu, MuT, Node, PVar,
    Pair, Prf, Proj, Rec, Refl, Shift, Sort, SplitC, Succ, TApp, TLam, TVar, Wit, Zero,
)
from app.services.macros import expand

logger = logging.getLogger(__name__)


# Dependency lists

@dataclass(frozen=True)
class Dep:
    """{p|q}: occurrences of the pattern p stand for the proof q"""
    pattern: Node
    proof: Node

    def render(self) -> str:
        return f"{{{pretty(self.pattern)}|{pretty(self.proof)}}}"


@dataclass(frozen=True)
class TermDep:
    """{x|t}"""
    var: str
    term: Node

    def render(self) -> str:
        return f"{{{self.var}|{pretty(self.term)}}}"


@dataclass(frozen=True)
class OpenDep:
    """{·|p}, the open marker of dependent mode"""
    proof: Node

    def render(self) -> str:
        return f"{{.|{pretty(self.proof)}}}"


DepItem = Union[Dep, TermDep, OpenDep]
Deps = Tuple[DepItem, ...]


def render_deps(sigma: Deps) -> list:
    return [d.render() for d in sigma]


def pattern_substitute(formula: Node, pattern: Node, proof: Node) -> Node:
    """
    A[q/p]

    Occurrences of the pattern are replaced by q; the components of a pair or dependent
    pair pattern are replaced by the matching NEF projections of q.
    """
    formula = replace_occurrences(formula, pattern, proof)
    if isinstance(pattern, PVar):
        return subst_proof(formula, pattern.name, proof)
    if isinstance(pattern, Pair) and isinstance(pattern.left, PVar) and isinstance(pattern.right, PVar):
        return substitute(formula, {
            (Sort.PROOF, pattern.left.name): expand(Proj(1, proof)),
            (Sort.PROOF, pattern.right.name): expand(Proj(2, proof)),
        })
    if isinstance(pattern, DPair) and isinstance(pattern.witness, TVar) and isinstance(pattern.body, PVar):
        return substitute(formula, {
            (Sort.TERM, pattern.witness.name): Wit(proof),
            (Sort.PROOF, pattern.body.name): expand(Prf(proof)),
        })
    return formula


def apply_deps(sigma: Deps, formula: Node) -> Node:
    """σ(A), folding the list from the right; dependencies on non-NEF proofs are skipped"""
    for item in reversed(sigma):
        if isinstance(item, TermDep):
            formula = subst_term(formula, item.var, item.term)
        elif isinstance(item, Dep) and is_nef(item.proof):
            formula = pattern_substitute(formula, item.pattern, item.proof)
    return formula


# Normalisation

class _OutOfFuel(Exception):
    pass


class Normalizer:
    """Symbolic reduction of terms, NEF proofs and formulas"""

    def __init__(self, term_fuel: Optional[int] = None, nef_fuel: Optional[int] = None):
        self.term_fuel = settings.CONV_TERM_FUEL if term_fuel is None else term_fuel
        self.nef_fuel = settings.CONV_NEF_FUEL if nef_fuel is None else nef_fuel

    def term(self, t: Node) -> Node:
        try:
            return self._term(t, [self.term_fuel], [self.nef_fuel])
        except _OutOfFuel:
            logger.debug(f"Term normalisation out of fuel on {pretty(t)}")
            return t

    def proof(self, p: Node) -> Node:
        try:
            return self._proof(p, [self.term_fuel], [self.nef_fuel])
        except _OutOfFuel:
            logger.debug(f"NEF normalisation out of fuel on {pretty(p)}")
            return p

    def formula(self, a: Node) -> Node:
        try:
            return self._formula(a, [self.term_fuel], [self.nef_fuel])
        except _OutOfFuel:
            return a

    @staticmethod
    def _spend(budget) -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise _OutOfFuel()

    def _term(self, t: Node, tb, pb) -> Node:
        self._spend(tb)
        if isinstance(t, (TVar, Zero)):
            return t
        if isinstance(t, Succ):
            return Succ(self._term(t.arg, tb, pb))
        if isinstance(t, TLam):
            return TLam(t.var, self._term(t.body, tb, pb))
        if isinstance(t, TApp):
            fun = self._term(t.fun, tb, pb)
            arg = self._term(t.arg, tb, pb)
            if isinstance(fun, TLam):
                return self._term(subst_term(fun.body, fun.var, arg), tb, pb)
            return TApp(fun, arg)
        if isinstance(t, Rec):
            index = self._term(t.index, tb, pb)
            if isinstance(index, Zero):
                return self._term(t.base, tb, pb)
            if isinstance(index, Succ):
                step = subst_term(t.step, t.nvar, index.arg)
                step = subst_term(step, t.rvar, Rec(index.arg, t.base, t.nvar, t.rvar, t.step))
                return self._term(step, tb, pb)
            return Rec(index, self._term(t.base, tb, pb), t.nvar, t.rvar, self._term(t.step, tb, pb))
        if isinstance(t, Wit):
            proof = self._proof(t.proof, tb, pb)
            if isinstance(proof, DPair):
                return self._term(proof.witness, tb, pb)
            return Wit(proof)
        return t

    def _proof(self, p: Node, tb, pb) -> Node:
        self._spend(pb)
        if isinstance(p, Inj):
            return Inj(p.index, self._proof(p.body, tb, pb))
        if isinstance(p, Pair):
            return Pair(self._proof(p.left, tb, pb), self._proof(p.right, tb, pb))
        if isinstance(p, DPair):
            return DPair(self._term(p.witness, tb, pb), self._proof(p.body, tb, pb))
        if isinstance(p, Ind):
            index = self._term(p.index, tb, pb)
            if isinstance(index, Zero):
                return self._proof(p.base, tb, pb)
            if isinstance(index, Succ):
                step = subst_term(p.step, p.tvar, index.arg)
                step = subst_proof(step, p.pvar, Ind(index.arg, p.base, p.pvar, p.tvar, p.step))
                return self._proof(step, tb, pb)
            return Ind(index, p.base, p.pvar, p.tvar, p.step)
        if isinstance(p, Cofix):
            return Cofix(self._term(p.index, tb, pb), p.pvar, p.tvar, p.body)
        if isinstance(p, Mu) and p.covar == STAR:
            return self._delimited(p, p.cmd, STAR, tb, pb)
        if isinstance(p, Shift) and not p.store:
            return self._delimited(p, p.cmd, TP, tb, pb)
        return p

    def _delimited(self, original: Node, cmd: Node, delimiter: str, tb, pb) -> Node:
        while True:
            self._spend(pb)
            if not isinstance(cmd, Cut):
                return original
            proof, ctx = self._proof(cmd.proof, tb, pb), cmd.ctx
            if ctx == CoVar(delimiter):
                return proof
            if isinstance(ctx, MuT) and not ctx.store:
                cmd = subst_proof(ctx.cmd, ctx.var, proof)
            elif isinstance(ctx, SplitC) and isinstance(proof, Pair):
                cmd = substitute(ctx.cmd, {(Sort.PROOF, ctx.var1): proof.left, (Sort.PROOF, ctx.var2): proof.right})
            elif isinstance(ctx, CaseC) and isinstance(proof, Inj):
                var, body = (ctx.var1, ctx.cmd1) if proof.index == 1 else (ctx.var2, ctx.cmd2)
                cmd = subst_proof(body, var, proof.body)
            elif isinstance(ctx, DestC) and isinstance(proof, DPair):
                cmd = substitute(ctx.cmd, {(Sort.TERM, ctx.tvar): proof.witness, (Sort.PROOF, ctx.pvar): proof.body})
            elif isinstance(ctx, EqC) and isinstance(proof, Refl):
                cmd = ctx.cmd
            else:
                return original

    def _formula(self, a: Node, tb, pb) -> Node:
        if isinstance(a, Eq):
            return _simplify_eq(self._term(a.left, tb, pb), self._term(a.right, tb, pb))
        if isinstance(a, (And, Or)):
            return type(a)(self._formula(a.left, tb, pb), self._formula(a.right, tb, pb))
        if isinstance(a, Pi):
            return Pi(a.var, self._formula(a.dom, tb, pb), self._formula(a.cod, tb, pb))
        if isinstance(a, (Forall, Exists)):
            return type(a)(a.var, a.type, self._formula(a.body, tb, pb))
        if isinstance(a, Nu):
            return Nu(self._term(a.index, tb, pb), a.tvar, a.fvar, self._formula(a.body, tb, pb))
        return a


def _simplify_eq(left: Node, right: Node) -> Node:
    """0 = S(t) ▷ ⊥, S(t) = 0 ▷ ⊥, S(t) = S(u) ▷ t = u"""
    while isinstance(left, Succ) and isinstance(right, Succ):
        left, right = left.arg, right.arg
    if (isinstance(left, Zero) and isinstance(right, Succ)) or (isinstance(left, Succ) and isinstance(right, Zero)):
        return Bot()
    return Eq(left, right)


def normalize_term(t: Node) -> Node:
    return Normalizer().term(t)


def normalize_proof(p: Node) -> Node:
    return Normalizer().proof(p)


def normalize_formula(a: Node) -> Node:
    return Normalizer().formula(a)


# ν-formulas

def unfold_nu(nu: Nu) -> Node:
    """ν^t_{x,f}A ▷ A[t/x][ν^y_{x,f}A / f(y)=0]"""
    body = subst_term(nu.body, nu.tvar, nu.index)
    return _replace_atoms(body, nu)


def _replace_atoms(a: Node, nu: Nu) -> Node:
    if is_fun_atom(a, nu.fvar):
        return Nu(a.left.arg, nu.tvar, nu.fvar, nu.body)
    if isinstance(a, (And, Or)):
        return type(a)(_replace_atoms(a.left, nu), _replace_atoms(a.right, nu))
    if isinstance(a, Pi):
        return Pi(a.var, _replace_atoms(a.dom, nu), _replace_atoms(a.cod, nu))
    if isinstance(a, (Forall, Exists)):
        if a.var == nu.fvar:
            return a
        return type(a)(a.var, a.type, _replace_atoms(a.body, nu))
    if isinstance(a, Nu) and nu.fvar not in (a.tvar, a.fvar):
        return Nu(a.index, a.tvar, a.fvar, _replace_atoms(a.body, nu))
    return a


def positive(fvar: str, formula: Node) -> bool:
    """Whether f occurs in A only as atoms f(y)=0 in positive positions"""
    return _positive(fvar, formula, True)


def _positive(f: str, a: Node, polarity: bool) -> bool:
    if is_fun_atom(a, f):
        return polarity
    if isinstance(a, Eq):
        if occurs_free(a, Sort.TERM, f):
            logger.warning(f"'{f}' occurs outside an atom {f}(y) = 0 in {pretty(a)}")
            return False
        return True
    if isinstance(a, Pi):
        return _positive(f, a.dom, not polarity) and _positive(f, a.cod, polarity)
    if isinstance(a, (And, Or)):
        return _positive(f, a.left, polarity) and _positive(f, a.right, polarity)
    if isinstance(a, (Forall, Exists)):
        return a.var == f or _positive(f, a.body, polarity)
    if isinstance(a, Nu):
        if occurs_free(a.index, Sort.TERM, f):
            return False
        return f in (a.tvar, a.fvar) or _positive(f, a.body, polarity)
    return True


# Conversion

def conv(left: Node, right: Node, unfold_cap: Optional[int] = None, normalizer: Optional[Normalizer] = None) -> bool:
    """
    Sound check of A ≡ B

    Returns:
        True when both sides meet after normalisation and at most ``unfold_cap`` ν-unfoldings
        per side; False means "not shown equivalent"
    """
    cap = settings.NU_UNFOLD_CAP if unfold_cap is None else unfold_cap
    norm = normalizer or Normalizer()
    return _conv(norm.formula(left), norm.formula(right), cap, cap, norm)


def _conv(a: Node, b: Node, ua: int, ub: int, norm: Normalizer) -> bool:
    if alpha_eq(a, b):
        return True
    if type(a) is type(b) and not isinstance(a, Nu):
        if isinstance(a, (And, Or)):
            return _conv(a.left, b.left, ua, ub, norm) and _conv(a.right, b.right, ua, ub, norm)
        if isinstance(a, Pi):
            if not _conv(a.dom, b.dom, ua, ub, norm):
                return False
            left, right = _common_body(a, b, Sort.PROOF, "cod")
            return _conv(left, right, ua, ub, norm)
        if isinstance(a, (Forall, Exists)):
            if not alpha_eq(a.type, b.type):
                return False
            left, right = _common_body(a, b, Sort.TERM, "body")
            return _conv(left, right, ua, ub, norm)
        return False
    if isinstance(a, Nu) and ua > 0:
        return _conv(norm.formula(unfold_nu(a)), b, ua - 1, ub, norm)
    if isinstance(b, Nu) and ub > 0:
        return _conv(a, norm.formula(unfold_nu(b)), ua, ub - 1, norm)
    return False


def _common_body(a: Node, b: Node, sort: Sort, field: str) -> Tuple[Node, Node]:
    name = fresh(a.var, all_names((a, b)))
    return rename(getattr(a, field), sort, a.var, name), rename(getattr(b, field), sort, b.var, name)
