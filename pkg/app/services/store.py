"""
Store algebra

Stores are ordered tuples of ``Binding``. Order is semantic: the machines split stores
positionally around a looked-up name, and later bindings may refer to earlier ones.
"""
import logging
from typing import Iterable, List, Optional, Set, Tuple

from app.core.exceptions import StoreError
from app.core.names import all_names, alpha_eq, fresh, rename
from app.models.syntax import Binding, Node, Sort, Store

logger = logging.getLogger(__name__)

Split = Tuple[Store, Binding, Store]


def domain(store: Store) -> Set[str]:
    return {b.name for b in store}


def lookup_split(store: Store, name: str, sort: Optional[Sort] = None) -> Optional[Split]:
    """
    Decompose τ as τ0 [name := …] τ1

    Args:
        store: The store to search
        name: Bound name to look for
        sort: Restrict the match to bindings of this sort

    Returns:
        (τ0, binding, τ1), or None when the name is not bound
    """
    for i, binding in enumerate(store):
        if binding.name == name and (sort is None or binding.sort == sort):
            return store[:i], binding, store[i + 1:]
    return None


def lookup(store: Store, name: str, sort: Optional[Sort] = None) -> Optional[Node]:
    found = lookup_split(store, name, sort)
    return found[1].value if found else None


def independent(left: Store, right: Store) -> bool:
    return not (domain(left) & domain(right))


def _first_conflict(left: Store, right: Store) -> Optional[str]:
    index = {b.name: b for b in right}
    for b in left:
        other = index.get(b.name)
        if other is not None and (other.sort != b.sort or not alpha_eq(other.value, b.value)):
            return b.name
    return None


def compatible(left: Store, right: Store) -> bool:
    """Shared names are bound to α-equal objects"""
    return _first_conflict(left, right) is None


def extends(smaller: Store, larger: Store) -> bool:
    """τ ◁ τ'"""
    return compatible(smaller, larger) and domain(smaller) <= domain(larger)


def union(left: Store, right: Store) -> Store:
    """
    Compatible union τ ⋈ τ'

    The first binding of the left store that is shared with the right one splits both
    stores; the independent prefixes are concatenated, the shared binding follows, and the
    tails are merged recursively. Without a shared binding the stores are concatenated.

    Raises:
        StoreError: On a conflicting binding, or when shared bindings are interleaved so
            that no clause applies
    """
    conflict = _first_conflict(left, right)
    if conflict is not None:
        raise StoreError(conflict, f"stores disagree on '{conflict}'")

    out: List[Binding] = []
    while True:
        shared = domain(right)
        pivot = next((i for i, b in enumerate(left) if b.name in shared), None)
        if pivot is None:
            out.extend(left)
            out.extend(right)
            return tuple(out)
        binding = left[pivot]
        _, _, right_tail = lookup_split(right, binding.name)
        right_head = right[: len(right) - len(right_tail) - 1]
        left_head, left_tail = left[:pivot], left[pivot + 1:]
        crossing = domain(right_head) & domain(left_tail)
        if crossing:
            name = sorted(crossing)[0]
            raise StoreError(name, f"shared bindings '{binding.name}' and '{name}' are interleaved differently")
        out.extend(left_head)
        out.extend(right_head)
        out.append(binding)
        left, right = left_tail, right_tail


def fresh_name(store: Store, hint: str, *nodes: object) -> str:
    """A name derived from hint, unused in the store and in the given nodes"""
    avoid = domain(store)
    for node in nodes:
        avoid |= all_names(node)
    return fresh(hint, avoid)


def append(store: Store, tail: Iterable[Binding], cmd: Node) -> Tuple[Store, Node]:
    """
    τ τ' with freshening

    Bindings of the tail whose name is already bound are renamed, consistently in the
    later tail bindings and in the command scoped by them.
    """
    out = list(store)
    pending = list(tail)
    while pending:
        binding = pending.pop(0)
        if binding.name in domain(tuple(out)):
            new = fresh(binding.name, domain(tuple(out)) | all_names((cmd, tuple(pending))) | all_names(binding.value))
            logger.debug(f"Renaming stored '{binding.name}' to '{new}'")
            pending = [
                Binding(b.name, b.sort, rename(b.value, binding.sort, binding.name, new)) for b in pending
            ]
            cmd = rename(cmd, binding.sort, binding.name, new)
            binding = Binding(new, binding.sort, binding.value)
        out.append(binding)
    return tuple(out), cmd
