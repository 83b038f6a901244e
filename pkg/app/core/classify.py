"""Syntactic classes: values, storables, the NEF fragment and (co-)delimited commands."""
import logging

from app.core.names import occurs_free
from app.models.syntax import (
    CTP, STAR, TP,
    AppP, AppT, CaseC, CaseS, Catch, Cofix, CoShift, CoVar, Cut, DPair, DestC, DestS,
    Exfalso, Ind, Inj, LamP, LamT, Let, Mu, MuT, MuTx, Node, PStack, PVar, Pair, Prf,
    Proj, Refl, Shift, Sort, SplitC, SplitS, SubstS, TCut, TLam, TStack, TVar, Throw,
    FORCING_CLASSES, numeral_value,
)

logger = logging.getLogger(__name__)


# Values

def is_term_value(term: Node) -> bool:
    """V_t ::= x | S^n(0) | λx.t"""
    return isinstance(term, (TVar, TLam)) or numeral_value(term) is not None


def is_strong_value(proof: Node) -> bool:
    """v ::= inj_i(V) | (V,V) | (V_t,V) | λx.p | λa.p | refl"""
    if isinstance(proof, (LamT, LamP, Refl)):
        return True
    if isinstance(proof, Inj):
        return is_weak_value(proof.body)
    if isinstance(proof, Pair):
        return is_weak_value(proof.left) and is_weak_value(proof.right)
    if isinstance(proof, DPair):
        return is_term_value(proof.witness) and is_weak_value(proof.body)
    return False


def is_weak_value(proof: Node) -> bool:
    """V ::= a | v"""
    return isinstance(proof, PVar) or is_strong_value(proof)


def is_storable(proof: Node) -> bool:
    """Weak values and fixpoints whose index is already a term value"""
    if isinstance(proof, (Ind, Cofix)):
        return is_term_value(proof.index)
    return is_weak_value(proof)


def is_forcing(ctx: Node) -> bool:
    return isinstance(ctx, FORCING_CLASSES)


def mentions_tp(ctx: Node) -> bool:
    """Whether a context is of the delimited shape e_t̂p (t̂p occurs free in it)"""
    return occurs_free(ctx, Sort.COVAR, TP)


# NEF fragment

_SUGAR_BINDERS = (Let, SplitS, CaseS, DestS)


def classify_nef(node: Node) -> bool:
    """
    Membership in the negative-elimination-free fragment

    Accepts proofs, contexts and commands. Sugar is classified by the natural-deduction
    criterion: binders and projections are NEF when all their sub-proofs are, while
    applications, subst, exfalso, catch and throw never are.
    """
    result = is_nef(node)
    depth = _shift_depth(node)
    if result and depth > 1:
        logger.warning(f"NEF proof nests delimited continuations {depth} deep")
    return result


def is_nef(node: Node) -> bool:
    """classify_nef without diagnostics, for the checker and the machines"""
    if isinstance(node, (Cut, TCut)):
        return _nef_command(node)
    if isinstance(node, (CoVar, MuT, CaseC, SplitC, DestC)) or isinstance(node, FORCING_CLASSES):
        return _nef_context(node)
    return _nef_proof(node)


def _nef_proof(p: Node) -> bool:
    if isinstance(p, (PVar, LamT, LamP, Refl)):
        return True
    if isinstance(p, Inj):
        return _nef_proof(p.body)
    if isinstance(p, Pair):
        return _nef_proof(p.left) and _nef_proof(p.right)
    if isinstance(p, DPair):
        return _nef_proof(p.body)
    if isinstance(p, Ind):
        return _nef_proof(p.base) and _nef_proof(p.step)
    if isinstance(p, Cofix):
        return _nef_proof(p.body)
    if isinstance(p, Mu):
        return p.covar == STAR and _nef_command(p.cmd)
    if isinstance(p, Shift):
        return is_delimited_command(p.cmd)
    if isinstance(p, Let):
        return _nef_proof(p.bound) and _nef_proof(p.body)
    if isinstance(p, CaseS):
        return _nef_proof(p.bound) and _nef_proof(p.body1) and _nef_proof(p.body2)
    if isinstance(p, (SplitS, DestS)):
        return _nef_proof(p.bound) and _nef_proof(p.body)
    if isinstance(p, (Prf, Proj)):
        return _nef_proof(p.proof)
    if isinstance(p, (SubstS, Exfalso, Catch, Throw, AppT, AppP)):
        return False
    return False


def _nef_command(c: Node) -> bool:
    return isinstance(c, Cut) and _nef_proof(c.proof) and _nef_context(c.ctx)


def _nef_context(e: Node) -> bool:
    if isinstance(e, CoVar):
        return e.name == STAR
    if isinstance(e, (MuT, SplitC, DestC)):
        return _nef_command(e.cmd)
    if isinstance(e, CaseC):
        return _nef_command(e.cmd1) and _nef_command(e.cmd2)
    return False


def _shift_depth(node: object) -> int:
    if isinstance(node, tuple):
        return max((_shift_depth(item) for item in node), default=0)
    if not isinstance(node, Node):
        return 0
    inner = max((_shift_depth(getattr(node, f)) for f in vars(node)), default=0)
    return inner + 1 if isinstance(node, Shift) else inner


# Delimited commands

def is_delimited_command(c: Node, delimiter: str = TP) -> bool:
    """
    c_t̂p ::= ⟨p_N‖e_t̂p⟩ | ⟨p‖t̂p⟩ | ⟨t‖π_t̂p⟩, with exactly one t̂p along the spine

    With delimiter=ctp the co-delimited grammar is used instead, whose terminal
    command is ⟨čtp‖e⟩.
    """
    if isinstance(c, TCut):
        return _delimited_coterm(c.coterm, delimiter)
    if not isinstance(c, Cut):
        return False
    if delimiter == TP and c.ctx == CoVar(TP):
        return not occurs_free(c.proof, Sort.COVAR, TP)
    if delimiter == CTP and c.proof == PVar(CTP):
        return not occurs_free(c.ctx, Sort.PROOF, CTP)
    return _nef_proof(c.proof) and _delimited_context(c.ctx, delimiter)


def _delimited_context(e: Node, delimiter: str) -> bool:
    if isinstance(e, (MuT, SplitC, DestC)):
        return is_delimited_command(e.cmd, delimiter)
    if isinstance(e, CaseC):
        return is_delimited_command(e.cmd1, delimiter) and is_delimited_command(e.cmd2, delimiter)
    return False


def _delimited_coterm(pi: Node, delimiter: str) -> bool:
    if isinstance(pi, TStack):
        return _delimited_coterm(pi.ctx, delimiter)
    if isinstance(pi, MuTx):
        return is_delimited_command(pi.cmd, delimiter)
    return False


def is_codelimited_context(e: Node) -> bool:
    """μ̃čtp.c_čtp"""
    return isinstance(e, CoShift) and is_delimited_command(e.cmd, CTP)


def head_name(node: Node) -> str:
    """Constructor name used in stuck descriptions and traces"""
    return type(node).__name__


def is_stack(ctx: Node) -> bool:
    return isinstance(ctx, (TStack, PStack))
