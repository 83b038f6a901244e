"""Name handling: free names, fresh names, α-equivalence and capture-avoiding substitution.

All functions work generically over every node class through the ``BINDERS`` metadata
declared in ``app.models.syntax``. Constructors carrying a ``store`` field bind the store
names sequentially: each binding scopes over the later bindings and over ``cmd``.
"""
from dataclasses import fields, replace
from itertools import count
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Set, Tuple
import re

from app.models.syntax import Binding, Node, Sort, make_var, var_sort

Key = Tuple[Sort, str]
Mapping = Dict[Key, Node]


class FreeNames(NamedTuple):
    terms: FrozenSet[str]
    proofs: FrozenSet[str]
    covars: FrozenSet[str]

    def of(self, sort: Sort) -> FrozenSet[str]:
        return {Sort.TERM: self.terms, Sort.PROOF: self.proofs, Sort.COVAR: self.covars}[sort]

    def all(self) -> FrozenSet[str]:
        return self.terms | self.proofs | self.covars


def _binder_fields(node: Node) -> Set[str]:
    return {b.field for b in node.BINDERS if b.field is not None}


def _has_store(node: Node) -> bool:
    return hasattr(node, "store") and hasattr(node, "cmd")


def _child_fields(node: Node) -> Iterator[str]:
    """Fields holding sub-nodes; for store-bearing nodes 'cmd' stands for the cmd+store region"""
    skip = _binder_fields(node)
    for f in fields(node):
        if f.name in skip or f.name == "store":
            continue
        if isinstance(getattr(node, f.name), Node):
            yield f.name


# Free names

def _fv(node: object) -> Set[Key]:
    if isinstance(node, tuple):
        return _fv_region(None, node)
    if not isinstance(node, Node):
        return set()
    sort = var_sort(node)
    if sort is not None:
        return {(sort, node.name)}
    if isinstance(node, Binding):
        return _fv(node.value)
    acc: Set[Key] = set()
    for name in _child_fields(node):
        if name == "cmd" and _has_store(node):
            region = _fv_region(node.cmd, node.store)
        else:
            region = _fv(getattr(node, name))
        for b in node.BINDERS:
            if name in b.scope:
                region.discard((b.sort, node.bound_name(b)))
        acc |= region
    return acc


def _fv_region(cmd: Optional[Node], store: Tuple[Binding, ...]) -> Set[Key]:
    acc = _fv(cmd) if cmd is not None else set()
    for b in reversed(store):
        acc.discard((b.sort, b.name))
        acc |= _fv(b.value)
    return acc


def free_names(node: object) -> FreeNames:
    """Free term variables, proof variables and co-variables of any syntax node"""
    keys = _fv(node)
    return FreeNames(
        frozenset(n for s, n in keys if s is Sort.TERM),
        frozenset(n for s, n in keys if s is Sort.PROOF),
        frozenset(n for s, n in keys if s is Sort.COVAR),
    )


def occurs_free(node: object, sort: Sort, name: str) -> bool:
    return (sort, name) in _fv(node)


def all_names(node: object) -> Set[str]:
    """Every identifier occurring in the node, bound or free, of any sort"""
    out: Set[str] = set()
    _collect_names(node, out)
    return out


def _collect_names(node: object, out: Set[str]) -> None:
    if isinstance(node, tuple):
        for item in node:
            _collect_names(item, out)
        return
    if not isinstance(node, Node):
        return
    if var_sort(node) is not None:
        out.add(node.name)
        return
    if isinstance(node, Binding):
        out.add(node.name)
    for b in node.BINDERS:
        out.add(node.bound_name(b))
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, (Node, tuple)):
            _collect_names(value, out)


# Fresh names

_SUFFIX = re.compile(r"^(.*?)(\d+)$")


def fresh(hint: str, avoid: Iterable[str]) -> str:
    """
    Deterministic fresh name derived from a hint

    Args:
        hint: Preferred name; returned unchanged when it is not in avoid
        avoid: Names the result must differ from

    Returns:
        hint, or hint's stem followed by the first free numeric suffix
    """
    avoid = avoid if isinstance(avoid, (set, frozenset)) else set(avoid)
    if hint not in avoid:
        return hint
    match = _SUFFIX.match(hint)
    stem, start = (match.group(1), int(match.group(2)) + 1) if match and match.group(1) else (hint, 1)
    for i in count(start):
        candidate = f"{stem}{i}"
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


# Substitution

def _captured_keys(mapping: Mapping) -> Set[Key]:
    keys: Set[Key] = set()
    for value in mapping.values():
        keys |= _fv(value)
    return keys


def substitute(node: object, mapping: Mapping) -> object:
    """
    Simultaneous capture-avoiding substitution

    Args:
        node: Any syntax node or store
        mapping: (sort, name) -> replacement

    Returns:
        The substituted node; bound names are renamed where capture could occur
    """
    if not mapping:
        return node
    free = _fv(node)
    mapping = {k: v for k, v in mapping.items() if k in free}
    if not mapping:
        return node
    return _subst(node, mapping, _captured_keys(mapping), _Avoid(node, mapping))


class _Avoid:
    """Lazily computed set of names fresh binders must avoid"""

    def __init__(self, node: object, mapping: Mapping):
        self._node = node
        self._mapping = mapping
        self._names: Optional[Set[str]] = None

    def fresh(self, hint: str) -> str:
        if self._names is None:
            names = all_names(self._node)
            for (_, name), value in self._mapping.items():
                names.add(name)
                names |= all_names(value)
            self._names = names
        new = fresh(hint, self._names)
        self._names.add(new)
        return new


def _subst(node: object, mapping: Mapping, danger: Set[Key], avoid: _Avoid) -> object:
    if not mapping:
        return node
    if isinstance(node, tuple):
        return _subst_region(None, node, mapping, danger, avoid)[1]
    if not isinstance(node, Node):
        return node
    sort = var_sort(node)
    if sort is not None:
        return mapping.get((sort, node.name), node)
    if isinstance(node, Binding):
        return replace(node, value=_subst(node.value, mapping, danger, avoid))

    renames: Dict[int, str] = {}
    for i, b in enumerate(node.BINDERS):
        if b.field is not None and (b.sort, node.bound_name(b)) in danger:
            renames[i] = avoid.fresh(node.bound_name(b))

    changes: Dict[str, object] = {}
    for i, new in renames.items():
        changes[node.BINDERS[i].field] = new
    for name in _child_fields(node):
        local = dict(mapping)
        for i, b in enumerate(node.BINDERS):
            if name in b.scope:
                key = (b.sort, node.bound_name(b))
                local.pop(key, None)
                if i in renames:
                    local[key] = make_var(b.sort, renames[i])
        if name == "cmd" and _has_store(node):
            cmd, store = _subst_region(node.cmd, node.store, local, danger, avoid)
            changes["cmd"] = cmd
            changes["store"] = store
        else:
            changes[name] = _subst(getattr(node, name), local, danger, avoid)
    return replace(node, **changes)


def _subst_region(cmd, store: Tuple[Binding, ...], mapping: Mapping, danger: Set[Key], avoid: _Avoid):
    out: List[Binding] = []
    current = dict(mapping)
    for b in store:
        value = _subst(b.value, current, danger, avoid)
        key = (b.sort, b.name)
        current.pop(key, None)
        name = b.name
        if current and key in danger:
            name = avoid.fresh(name)
            current[key] = make_var(b.sort, name)
        out.append(Binding(name, b.sort, value))
    new_cmd = _subst(cmd, current, danger, avoid) if cmd is not None else None
    return new_cmd, tuple(out)


def subst_term(node: object, x: str, term: Node) -> object:
    """node[t/x] for a term variable x"""
    return substitute(node, {(Sort.TERM, x): term})


def subst_proof(node: object, a: str, proof: Node) -> object:
    return substitute(node, {(Sort.PROOF, a): proof})


def subst_covar(node: object, alpha: str, ctx: Node) -> object:
    return substitute(node, {(Sort.COVAR, alpha): ctx})


def rename(node: object, sort: Sort, old: str, new: str) -> object:
    return substitute(node, {(sort, old): make_var(sort, new)})


# α-equivalence

def alpha_eq(left: object, right: object) -> bool:
    """Equality up to consistent renaming of bound names"""
    return _aeq(left, right, {}, {}, count())


def _aeq(x: object, y: object, env1: Dict[Key, int], env2: Dict[Key, int], levels) -> bool:
    if isinstance(x, tuple) or isinstance(y, tuple):
        if not (isinstance(x, tuple) and isinstance(y, tuple)):
            return False
        return _aeq_region(None, x, None, y, env1, env2, levels)
    if not isinstance(x, Node) or not isinstance(y, Node):
        return x == y
    if type(x) is not type(y):
        return False
    sort = var_sort(x)
    if sort is not None:
        k1, k2 = env1.get((sort, x.name)), env2.get((sort, y.name))
        if k1 is None and k2 is None:
            return x.name == y.name
        return k1 == k2
    if isinstance(x, Binding):
        return x.sort == y.sort and _aeq(x.value, y.value, env1, env2, levels)

    skip = _binder_fields(x)
    for f in fields(x):
        if f.name in skip or f.name == "store":
            continue
        a, b = getattr(x, f.name), getattr(y, f.name)
        if not isinstance(a, Node):
            if a != b:
                return False
            continue
        e1, e2 = dict(env1), dict(env2)
        for binder in x.BINDERS:
            if f.name in binder.scope:
                level = next(levels)
                e1[(binder.sort, x.bound_name(binder))] = level
                e2[(binder.sort, y.bound_name(binder))] = level
        if f.name == "cmd" and _has_store(x):
            if not _aeq_region(x.cmd, x.store, y.cmd, y.store, e1, e2, levels):
                return False
        elif not _aeq(a, b, e1, e2, levels):
            return False
    return True


def _aeq_region(cmd1, store1, cmd2, store2, env1, env2, levels) -> bool:
    if len(store1) != len(store2):
        return False
    e1, e2 = dict(env1), dict(env2)
    for b1, b2 in zip(store1, store2):
        if b1.sort != b2.sort or not _aeq(b1.value, b2.value, e1, e2, levels):
            return False
        level = next(levels)
        e1[(b1.sort, b1.name)] = level
        e2[(b2.sort, b2.name)] = level
    if cmd1 is None or cmd2 is None:
        return cmd1 is None and cmd2 is None
    return _aeq(cmd1, cmd2, e1, e2, levels)


# Subterm replacement (pattern substitution A[q/p])

def replace_occurrences(node: object, pattern: Node, replacement: Node) -> object:
    """
    Replace every subterm α-equal to pattern by replacement

    Occurrences under binders that capture a free name of the pattern are left alone;
    binders that would capture a free name of the replacement are renamed.
    """
    return _replace(node, pattern, replacement, _fv(pattern), _fv(replacement))


def count_occurrences(node: object, pattern: Node) -> int:
    counter = [0]
    _replace(node, pattern, pattern, _fv(pattern), set(), frozenset(), counter)
    return counter[0]


def replace_selected(node: object, pattern: Node, replacement: Node, selected: Iterable[int]) -> object:
    """replace_occurrences restricted to the occurrences numbered in selected (left to right, from 0)"""
    return _replace(node, pattern, replacement, _fv(pattern), _fv(replacement), frozenset(selected), [0])


def _rename_binder(node: Node, binder_index: int, avoid: Set[str]) -> Node:
    b = node.BINDERS[binder_index]
    old = node.bound_name(b)
    new = fresh(old, avoid)
    mapping = {(b.sort, old): make_var(b.sort, new)}
    guard = _Avoid(node, mapping)
    changes: Dict[str, object] = {b.field: new}
    for name in b.scope:
        if name == "store":
            continue
        if name == "cmd" and _has_store(node):
            changes["cmd"], changes["store"] = _subst_region(node.cmd, node.store, mapping, set(), guard)
        else:
            changes[name] = _subst(getattr(node, name), mapping, set(), guard)
    return replace(node, **changes)


def _replace(node, pattern, replacement, pattern_fv, repl_fv, selected=None, counter=None):
    if isinstance(node, tuple) or not isinstance(node, Node):
        return node
    if type(node) is type(pattern) and alpha_eq(node, pattern):
        if selected is None:
            return replacement
        index = counter[0]
        counter[0] += 1
        return replacement if index in selected else node
    if var_sort(node) is not None:
        return node
    if pattern_fv and not (pattern_fv & _fv(node)):
        return node

    for i, b in enumerate(node.BINDERS):
        if b.field is not None and (b.sort, node.bound_name(b)) in repl_fv:
            avoid = all_names(node) | all_names(replacement) | all_names(pattern)
            node = _rename_binder(node, i, avoid)

    changes = {}
    for name in _child_fields(node):
        blocked = any(
            name in b.scope and (b.sort, node.bound_name(b)) in pattern_fv for b in node.BINDERS
        )
        if not blocked:
            changes[name] = _replace(getattr(node, name), pattern, replacement, pattern_fv, repl_fv, selected, counter)
    return replace(node, **changes) if changes else node
