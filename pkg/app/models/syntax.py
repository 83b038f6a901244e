"""Abstract syntax of the calculus: terms, proofs, contexts, commands, stores and sugar."""
from dataclasses import dataclass
from typing import ClassVar, Optional, Tuple, Union
import enum


class Sort(str, enum.Enum):
    TERM = "term"
    PROOF = "proof"
    COVAR = "covar"


# Distinguished names
TP = "tp"
CTP = "ctp"
STAR = "star"
RESERVED = frozenset({TP, CTP, STAR})


@dataclass(frozen=True)
class Binder:
    """Binding structure of one constructor: which field names what, and where it is visible"""
    field: Optional[str]
    sort: Sort
    scope: Tuple[str, ...]
    fixed: Optional[str] = None


class Node:
    """Base class for every syntax node (terms, proofs, formulas, types)"""
    BINDERS: ClassVar[Tuple[Binder, ...]] = ()

    def bound_name(self, binder: Binder) -> str:
        return binder.fixed if binder.field is None else getattr(self, binder.field)


# Types

@dataclass(frozen=True)
class Nat(Node):
    pass


@dataclass(frozen=True)
class Arrow(Node):
    dom: Node
    cod: Node


# Terms

@dataclass(frozen=True)
class TVar(Node):
    name: str


@dataclass(frozen=True)
class Zero(Node):
    pass


@dataclass(frozen=True)
class Succ(Node):
    arg: Node


@dataclass(frozen=True)
class Rec(Node):
    """rec(t; t0; (x,y). tS)"""
    index: Node
    base: Node
    nvar: str
    rvar: str
    step: Node
    BINDERS = (Binder("nvar", Sort.TERM, ("step",)), Binder("rvar", Sort.TERM, ("step",)))


@dataclass(frozen=True)
class TLam(Node):
    var: str
    body: Node
    BINDERS = (Binder("var", Sort.TERM, ("body",)),)


@dataclass(frozen=True)
class TApp(Node):
    fun: Node
    arg: Node


@dataclass(frozen=True)
class Wit(Node):
    proof: Node


# Proofs

@dataclass(frozen=True)
class PVar(Node):
    name: str


@dataclass(frozen=True)
class Inj(Node):
    index: int
    body: Node


@dataclass(frozen=True)
class Pair(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class DPair(Node):
    """Dependent pair (t, p)"""
    witness: Node
    body: Node


@dataclass(frozen=True)
class LamT(Node):
    """Term abstraction λx.p inhabiting ∀x^T.A"""
    var: str
    body: Node
    BINDERS = (Binder("var", Sort.TERM, ("body",)),)


@dataclass(frozen=True)
class LamP(Node):
    """Proof abstraction λa.p inhabiting Π(a:A).B"""
    var: str
    body: Node
    BINDERS = (Binder("var", Sort.PROOF, ("body",)),)


@dataclass(frozen=True)
class Refl(Node):
    pass


@dataclass(frozen=True)
class Ind(Node):
    """ind(t; p0; (a,x). pS)"""
    index: Node
    base: Node
    pvar: str
    tvar: str
    step: Node
    BINDERS = (Binder("pvar", Sort.PROOF, ("step",)), Binder("tvar", Sort.TERM, ("step",)))


@dataclass(frozen=True)
class Cofix(Node):
    """cofix(t; (b,x). p)"""
    index: Node
    pvar: str
    tvar: str
    body: Node
    BINDERS = (Binder("pvar", Sort.PROOF, ("body",)), Binder("tvar", Sort.TERM, ("body",)))


@dataclass(frozen=True)
class Mu(Node):
    covar: str
    cmd: Node
    BINDERS = (Binder("covar", Sort.COVAR, ("cmd",)),)


@dataclass(frozen=True)
class Shift(Node):
    """μt̂p.c, optionally carrying the bindings created while stepping inside it"""
    cmd: Node
    store: Tuple["Binding", ...] = ()
    BINDERS = (Binder(None, Sort.COVAR, ("cmd", "store"), fixed=TP),)


# Contexts and co-terms

@dataclass(frozen=True)
class CoVar(Node):
    name: str


@dataclass(frozen=True)
class Abort(Node):
    """The empty context []"""
    pass


@dataclass(frozen=True)
class MuT(Node):
    """μ̃a.cτ"""
    var: str
    cmd: Node
    store: Tuple["Binding", ...] = ()
    BINDERS = (Binder("var", Sort.PROOF, ("cmd", "store")),)


@dataclass(frozen=True)
class CaseC(Node):
    """μ̃[a1.c1 | a2.c2]"""
    var1: str
    cmd1: Node
    var2: str
    cmd2: Node
    BINDERS = (Binder("var1", Sort.PROOF, ("cmd1",)), Binder("var2", Sort.PROOF, ("cmd2",)))


@dataclass(frozen=True)
class SplitC(Node):
    """μ̃(a1,a2).c"""
    var1: str
    var2: str
    cmd: Node
    BINDERS = (Binder("var1", Sort.PROOF, ("cmd",)), Binder("var2", Sort.PROOF, ("cmd",)))


@dataclass(frozen=True)
class DestC(Node):
    """μ̃(x,a).c"""
    tvar: str
    pvar: str
    cmd: Node
    BINDERS = (Binder("tvar", Sort.TERM, ("cmd",)), Binder("pvar", Sort.PROOF, ("cmd",)))


@dataclass(frozen=True)
class TStack(Node):
    """t·e, also the term co-term u·π"""
    term: Node
    ctx: Node


@dataclass(frozen=True)
class PStack(Node):
    """q·e"""
    proof: Node
    ctx: Node


@dataclass(frozen=True)
class EqC(Node):
    """μ̃=.c"""
    cmd: Node


@dataclass(frozen=True)
class CoShift(Node):
    """μ̃čtp.c"""
    cmd: Node
    BINDERS = (Binder(None, Sort.PROOF, ("cmd",), fixed=CTP),)


@dataclass(frozen=True)
class MuTx(Node):
    """μ̃x.c, the term co-term binder"""
    var: str
    cmd: Node
    store: Tuple["Binding", ...] = ()
    BINDERS = (Binder("var", Sort.TERM, ("cmd", "store")),)


# Commands, stores, closures

@dataclass(frozen=True)
class Cut(Node):
    """⟨p‖e⟩"""
    proof: Node
    ctx: Node


@dataclass(frozen=True)
class TCut(Node):
    """⟨t‖π⟩"""
    term: Node
    coterm: Node


@dataclass(frozen=True)
class Binding(Node):
    """[a := p] or [α := e]"""
    name: str
    sort: Sort
    value: Node


Store = Tuple[Binding, ...]


@dataclass(frozen=True)
class Closure(Node):
    cmd: Node
    store: Store = ()


# Natural-deduction sugar (expanded by app.services.macros)

@dataclass(frozen=True)
class Let(Node):
    var: str
    bound: Node
    body: Node
    BINDERS = (Binder("var", Sort.PROOF, ("body",)),)


@dataclass(frozen=True)
class SplitS(Node):
    bound: Node
    var1: str
    var2: str
    body: Node
    BINDERS = (Binder("var1", Sort.PROOF, ("body",)), Binder("var2", Sort.PROOF, ("body",)))


@dataclass(frozen=True)
class CaseS(Node):
    bound: Node
    var1: str
    body1: Node
    var2: str
    body2: Node
    BINDERS = (Binder("var1", Sort.PROOF, ("body1",)), Binder("var2", Sort.PROOF, ("body2",)))


@dataclass(frozen=True)
class DestS(Node):
    bound: Node
    tvar: str
    pvar: str
    body: Node
    BINDERS = (Binder("tvar", Sort.TERM, ("body",)), Binder("pvar", Sort.PROOF, ("body",)))


@dataclass(frozen=True)
class Prf(Node):
    proof: Node


@dataclass(frozen=True)
class SubstS(Node):
    eq: Node
    body: Node


@dataclass(frozen=True)
class Exfalso(Node):
    proof: Node


@dataclass(frozen=True)
class Catch(Node):
    covar: str
    body: Node
    BINDERS = (Binder("covar", Sort.COVAR, ("body",)),)


@dataclass(frozen=True)
class Throw(Node):
    covar: str
    body: Node


@dataclass(frozen=True)
class Proj(Node):
    index: int
    proof: Node


@dataclass(frozen=True)
class AppT(Node):
    """Proof applied to a term, p t"""
    fun: Node
    arg: Node


@dataclass(frozen=True)
class AppP(Node):
    """Proof applied to a proof, p q"""
    fun: Node
    arg: Node


VAR_SORTS = {TVar: Sort.TERM, PVar: Sort.PROOF, CoVar: Sort.COVAR}
VAR_CLASSES = {sort: cls for cls, sort in VAR_SORTS.items()}

TERM_CLASSES = (TVar, Zero, Succ, Rec, TLam, TApp, Wit)
CORE_PROOF_CLASSES = (PVar, Inj, Pair, DPair, LamT, LamP, Refl, Ind, Cofix, Mu, Shift)
SUGAR_CLASSES = (Let, SplitS, CaseS, DestS, Prf, SubstS, Exfalso, Catch, Throw, Proj, AppT, AppP)
PROOF_CLASSES = CORE_PROOF_CLASSES + SUGAR_CLASSES
FORCING_CLASSES = (Abort, CaseC, SplitC, DestC, TStack, PStack, EqC)
CONTEXT_CLASSES = FORCING_CLASSES + (CoVar, MuT, CoShift, MuTx)
COMMAND_CLASSES = (Cut, TCut)

Term = Node
Proof = Node
Context = Node
Command = Node
AST = Union[Node, Tuple[Binding, ...]]


def make_var(sort: Sort, name: str) -> Node:
    return VAR_CLASSES[sort](name)


def var_sort(node: Node) -> Optional[Sort]:
    return VAR_SORTS.get(type(node))


def numeral(n: int) -> Node:
    """S^n(0)"""
    term: Node = Zero()
    for _ in range(n):
        term = Succ(term)
    return term


def numeral_value(term: Node) -> Optional[int]:
    """Inverse of numeral; None when the term is not S^n(0)"""
    n = 0
    while isinstance(term, Succ):
        term = term.arg
        n += 1
    return n if isinstance(term, Zero) else None


def tp() -> CoVar:
    return CoVar(TP)


def star() -> CoVar:
    return CoVar(STAR)
