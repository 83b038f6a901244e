"""Formulas and finite types"""
from dataclasses import dataclass

from app.models.syntax import Binder, Node, Sort, TVar, TApp, Zero, Nat, Arrow

__all__ = [
    "Top", "Bot", "Eq", "And", "Or", "Pi", "Forall", "Exists", "Nu", "FHole", "THole",
    "Nat", "Arrow", "FORMULA_CLASSES", "TYPE_CLASSES", "implies", "fun_atom", "is_fun_atom",
]


@dataclass(frozen=True)
class Top(Node):
    pass


@dataclass(frozen=True)
class Bot(Node):
    pass


@dataclass(frozen=True)
class Eq(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class And(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Or(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Pi(Node):
    """Π(a:A).B; A → B when a does not occur in B"""
    var: str
    dom: Node
    cod: Node
    BINDERS = (Binder("var", Sort.PROOF, ("cod",)),)


@dataclass(frozen=True)
class Forall(Node):
    var: str
    type: Node
    body: Node
    BINDERS = (Binder("var", Sort.TERM, ("body",)),)


@dataclass(frozen=True)
class Exists(Node):
    var: str
    type: Node
    body: Node
    BINDERS = (Binder("var", Sort.TERM, ("body",)),)


@dataclass(frozen=True)
class Nu(Node):
    """ν^t_{x,f} A; f occurs in A only as atoms f(y) = 0"""
    index: Node
    tvar: str
    fvar: str
    body: Node
    BINDERS = (Binder("tvar", Sort.TERM, ("body",)), Binder("fvar", Sort.TERM, ("body",)))


@dataclass(frozen=True)
class FHole(Node):
    """Formula meta-variable, solved during one type-checking run"""
    ident: int


@dataclass(frozen=True)
class THole(Node):
    """Finite-type meta-variable"""
    ident: int


FORMULA_CLASSES = (Top, Bot, Eq, And, Or, Pi, Forall, Exists, Nu, FHole)
TYPE_CLASSES = (Nat, Arrow, THole)


def implies(dom: Node, cod: Node, var: str = "_") -> Pi:
    return Pi(var, dom, cod)


def fun_atom(fvar: str, arg: Node) -> Eq:
    """The atom f(y) = 0"""
    return Eq(TApp(TVar(fvar), arg), Zero())


def is_fun_atom(formula: Node, fvar: str) -> bool:
    return (
        isinstance(formula, Eq)
        and isinstance(formula.left, TApp)
        and formula.left.fun == TVar(fvar)
        and isinstance(formula.right, Zero)
    )
