import cmath
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aal.errors import CapExceeded, GroupMismatch, ParseError
from aal.group import (
    Character,
    CharSet,
    GroupSpec,
    GSet,
    char_value,
    coset_decomposition,
    enumerate_elements,
    is_coset,
    neg,
    add,
    parse_group,
    parse_set,
    subgroup_generated,
)

from strategies import elements, group_and_set, groups


def brute_is_coset(a: GSet) -> bool:
    els = a.elements()
    return bool(els) and all(x + y - z in a for x, y, z in itertools.product(els, repeat=3))


# -- group specs -----------------------------------------------------------------


def test_canonical_orders():
    assert GroupSpec((1, 4, 1, 3)).orders == (4, 3)
    assert GroupSpec((1, 1)).orders == (1,)
    assert GroupSpec((1,)).size == 1


@pytest.mark.parametrize(
    "text,orders",
    [("Z8", (8,)), ("z2^3", (2, 2, 2)), ("Z2xZ3xZ5", (2, 3, 5)), ("Z4 x Z2^2", (4, 2, 2))],
)
def test_parse_group(text, orders):
    g = parse_group(text)
    assert g.orders == orders
    assert parse_group(str(g)) == g


@pytest.mark.parametrize("bad", ["", "Z", "Y8", "Z2xx3", "Z0", "Z2^"])
def test_parse_group_rejects(bad):
    with pytest.raises(ParseError):
        parse_group(bad)


def test_enumerate_examples():
    assert [e.coords for e in enumerate_elements(GroupSpec((2, 2)))] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [e.coords for e in enumerate_elements(GroupSpec((1,)))] == [(0,)]
    assert [e.coords for e in enumerate_elements(GroupSpec((6,)))] == [(i,) for i in range(6)]


def test_enumerate_cap():
    with pytest.raises(CapExceeded):
        enumerate_elements(GroupSpec((2**13, 2**12)))
    with pytest.raises(CapExceeded):
        enumerate_elements(GroupSpec((10, 10)), cap=99)


@given(groups(max_size=200))
def test_index_bijection(g):
    els = enumerate_elements(g)
    assert len(els) == g.size
    assert [e.index for e in els] == list(range(g.size))
    assert els == sorted(els, key=lambda e: e.coords)


def test_arithmetic_examples():
    z5 = GroupSpec((5,))
    assert add(z5(3), z5(4)) == z5(2)
    g = GroupSpec((2, 3))
    assert g(1, 2) + g(1, 2) == g(0, 1)
    assert neg(z5(0)) == z5(0)
    with pytest.raises(GroupMismatch):
        z5(1) + GroupSpec((6,))(1)


@given(st.data())
def test_group_axioms(data):
    g = data.draw(groups())
    x, y, z = (data.draw(elements(g)) for _ in range(3))
    assert x + y == y + x
    assert (x + y) + z == x + (y + z)
    assert neg(neg(x)) == x
    assert (x + neg(x)).is_zero
    assert x * 3 == x + x + x


# -- characters ------------------------------------------------------------------


def test_char_examples():
    z4, z8 = GroupSpec((4,)), GroupSpec((8,))
    assert char_value(Character(z4, (0,)), z4(3)) == 1
    assert char_value(Character(z4, (1,)), z4(2)) == -1
    assert abs(char_value(Character(z8, (1,)), z8(1)) - cmath.exp(1j * cmath.pi / 4)) < 1e-15
    assert Character(z8, (3,)).phase(z8(5)) == Fraction(7, 8)


@settings(max_examples=30)
@given(groups(max_size=64))
def test_multiplicativity_and_orthogonality(g):
    els = enumerate_elements(g)
    plus = ((g.coords[:, None, :] + g.coords[None, :, :]) % np.array(g.orders)) @ np.array(g.strides)
    for t in range(g.size):
        gam = Character(g, g.element(t).coords)
        vals = np.array([gam(x) for x in els])
        assert np.allclose(np.abs(vals), 1, atol=1e-12)
        expected = g.size if t == 0 else 0
        assert abs(vals.sum() - expected) < 1e-9
        assert np.max(np.abs(vals[plus] - vals[:, None] * vals[None, :])) < 1e-12


# -- sets -------------------------------------------------------------------------


def test_parse_set_forms():
    z8 = GroupSpec((8,))
    assert parse_set(z8, "{0,2,-2}").indices().tolist() == [0, 2, 6]
    g = GroupSpec((2, 3))
    a = parse_set(g, "{(0,1),(1,2)}")
    assert [e.coords for e in a] == [(0, 1), (1, 2)]
    assert parse_set(g, a.to_literal()) == a
    assert not parse_set(g, "{}")
    with pytest.raises(ParseError):
        parse_set(z8, "0,1")


@given(group_and_set(nonempty=False))
def test_gset_size_and_literal_roundtrip(ga):
    g, a = ga
    assert len(a) == int(a.mask.sum())
    assert parse_set(g, a.to_literal()) == a
    assert GSet.from_elements(g, a.elements()) == a
    assert (a | a.complement()) == GSet.full(g)
    assert not (a & a.complement())


def test_gset_immutable():
    a = GSet.from_indices(GroupSpec((5,)), [1])
    with pytest.raises(ValueError):
        a.mask[0] = True


def test_subgroup_examples():
    z8 = GroupSpec((8,))
    assert subgroup_generated(parse_set(z8, "{2}")) == parse_set(z8, "{0,2,4,6}")
    assert subgroup_generated(GSet.empty(z8)) == parse_set(z8, "{0}")
    g = GroupSpec((2, 2))
    assert subgroup_generated(parse_set(g, "{(1,0),(0,1)}")) == GSet.full(g)


@given(group_and_set(max_size=48, nonempty=False))
def test_subgroup_is_smallest(ga):
    g, gens = ga
    h = subgroup_generated(gens)
    assert gens <= h and g.zero in h
    assert is_coset(h) and coset_decomposition(h)[1] == h


def test_is_coset_examples():
    z8 = GroupSpec((8,))
    t, h = coset_decomposition(parse_set(z8, "{0,2,4,6}"))
    assert t == z8(0) and h == parse_set(z8, "{0,2,4,6}")
    t, h = coset_decomposition(parse_set(z8, "{1,3,5,7}"))
    assert t == z8(1) and h == parse_set(z8, "{0,2,4,6}")
    assert not is_coset(parse_set(z8, "{0,1,3}"))
    assert not is_coset(GSet.empty(z8))


@given(group_and_set(max_size=16, nonempty=False))
def test_is_coset_matches_definition(ga):
    _, a = ga
    assert is_coset(a) == brute_is_coset(a)


def test_charset():
    g = GroupSpec((4, 2))
    cs = CharSet.of(g, [(1, 0), (0, 1)])
    assert [c.t for c in cs.characters()] == [(0, 1), (1, 0)]
