import pytest
from hypothesis import given, strategies as st

from app.core.exceptions import StoreError
from app.models.syntax import Binding, CoVar, Cut, DPair, LamT, PVar, Refl, Sort, numeral
from app.services.store import (
    append, compatible, domain, extends, independent, lookup, lookup_split, union,
)


def b(name, value=None):
    return Binding(name, Sort.PROOF, value if value is not None else Refl())


VALUES = [Refl(), DPair(numeral(0), Refl()), LamT("x", Refl())]

stores = st.lists(
    st.tuples(st.sampled_from(["a", "b", "c", "d", "e"]), st.sampled_from(VALUES)),
    max_size=5,
    unique_by=lambda item: item[0],
).map(lambda items: tuple(b(n, v) for n, v in items))


class TestLookup:
    def test_split_around_binding(self):
        store = (b("a"), b("b"), b("c"))
        before, binding, after = lookup_split(store, "b")
        assert before == (b("a"),)
        assert binding.name == "b"
        assert after == (b("c"),)

    def test_missing_name(self):
        assert lookup_split((b("a"),), "z") is None
        assert lookup((b("a"),), "z") is None

    def test_sort_filter(self):
        store = (Binding("k", Sort.COVAR, CoVar("alpha")),)
        assert lookup(store, "k", Sort.PROOF) is None
        assert lookup(store, "k", Sort.COVAR) == CoVar("alpha")


class TestUnion:
    def test_independent_stores_concatenate(self):
        left, right = (b("a"),), (b("b"),)
        assert union(left, right) == left + right

    def test_shared_binding_appears_once(self):
        left = (b("a"), b("s"))
        right = (b("s"), b("c"))
        merged = union(left, right)
        assert [x.name for x in merged] == ["a", "s", "c"]

    def test_conflict_raises(self):
        with pytest.raises(StoreError) as info:
            union((b("a", Refl()),), (b("a", LamT("x", Refl())),))
        assert info.value.name == "a"

    def test_compatibility(self):
        assert compatible((b("a"),), (b("a"), b("b")))
        assert not compatible((b("a", Refl()),), (b("a", DPair(numeral(1), Refl())),))

    def test_extension(self):
        assert extends((b("a"),), (b("a"), b("b")))
        assert not extends((b("a"), b("b")), (b("a"),))


class TestAppend:
    def test_fresh_names_for_clashes(self):
        cmd = Cut(PVar("a"), CoVar("alpha"))
        store, body = append((b("a"),), (b("a", LamT("x", Refl())),), cmd)
        assert len(domain(store)) == 2
        renamed = store[1].name
        assert renamed != "a"
        assert body == Cut(PVar(renamed), CoVar("alpha"))

    def test_no_clash_keeps_names(self):
        cmd = Cut(PVar("a"), CoVar("alpha"))
        store, body = append((b("a"),), (b("b"),), cmd)
        assert store == (b("a"), b("b"))
        assert body == cmd


@given(stores, stores)
def test_independent_union_is_concatenation(left, right):
    if independent(left, right):
        assert union(left, right) == left + right


@given(stores, stores)
def test_union_extends_both_sides(left, right):
    if not compatible(left, right):
        return
    try:
        merged = union(left, right)
    except StoreError:
        return
    assert extends(left, merged)
    assert extends(right, merged)


@given(stores)
def test_union_is_idempotent(store):
    assert union(store, store) == store


@given(stores, stores)
def test_append_keeps_names_distinct(left, right):
    joined, _ = append(left, right, Cut(PVar("a"), CoVar("alpha")))
    assert len(domain(joined)) == len(joined)
