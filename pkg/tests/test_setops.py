from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aal.errors import BadThreshold, EmptySet, GroupMismatch
from aal.group import GroupSpec, GSet, is_coset, parse_set, subgroup_generated
from aal.setops import (
    DensityMap,
    convolve,
    convolve_int,
    convolve_naive,
    difference_set,
    doubling,
    energy,
    energy_bruteforce,
    growth_profile,
    iterated_sumset,
    negate,
    sumset,
    symmetry_set,
    translate,
)

from strategies import elements, group_and_set, group_and_sets, groups, subsets

Z5 = GroupSpec((5,))
Z100 = GroupSpec((100,))


def brute_sumset(a: GSet, b: GSet) -> GSet:
    return GSet.from_elements(a.group, [x + y for x in a for y in b])


# -- set arithmetic ----------------------------------------------------------------


def test_sumset_examples():
    a = parse_set(Z5, "{0,1}")
    assert sumset(a, a) == parse_set(Z5, "{0,1,2}")
    assert difference_set(a, a) == parse_set(Z5, "{4,0,1}")
    assert sumset(a, parse_set(Z5, "{0}")) == a
    assert not sumset(GSet.empty(Z5), a)
    with pytest.raises(GroupMismatch):
        sumset(a, GSet.full(GroupSpec((6,))))


@given(group_and_sets(2, max_size=64))
def test_sumset_matches_bruteforce_and_bounds(gab):
    g, a, b = gab
    s = sumset(a, b)
    assert s == brute_sumset(a, b)
    assert max(len(a), len(b)) <= len(s) <= len(a) * len(b)
    assert difference_set(a, b) == sumset(a, negate(b))


def test_sumset_fft_path_large_sets():
    rng = np.random.default_rng(3)
    g = GroupSpec((40, 30))
    a = GSet(g, rng.random(g.size) < 0.2)
    b = GSet(g, rng.random(g.size) < 0.15)
    assert len(b) > 96
    ref = np.zeros(g.size, dtype=bool)
    for x in a:
        ref |= translate(b, x).mask
    assert sumset(a, b) == GSet(g, ref)


@given(st.data())
def test_translate_preserves_size(data):
    g, a = data.draw(group_and_set())
    x = data.draw(elements(g))
    t = translate(a, x)
    assert len(t) == len(a)
    assert translate(t, -x) == a


def test_iterated_examples():
    x = parse_set(Z100, "{99,0,1}")
    assert len(iterated_sumset(x, 3)) == 7
    z1000 = GroupSpec((1000,))
    y = parse_set(z1000, "{0,1,5}")
    assert iterated_sumset(y, 2) == parse_set(z1000, "{0,1,2,5,6,10}")
    h = subgroup_generated(parse_set(GroupSpec((12,)), "{4}"))
    for n in range(1, 6):
        assert iterated_sumset(h, n) == h


@settings(max_examples=60)
@given(group_and_set(max_size=40), st.integers(1, 5))
def test_iterated_matches_repeated_sum(ga, n):
    _, x = ga
    ref = x
    for _ in range(n - 1):
        ref = sumset(ref, x)
    assert iterated_sumset(x, n) == ref


@settings(max_examples=60)
@given(group_and_set(max_size=64))
def test_growth_profile_invariants(ga):
    g, x = ga
    prof = growth_profile(x, 6)
    sizes = prof.sizes
    assert sizes[0] == len(x)
    assert all(s <= t for s, t in zip(sizes, sizes[1:]))
    for n in range(1, 7):
        assert prof.size(n) <= min(g.size, len(x) ** n)
    for m in range(1, 4):
        for n in range(1, 4):
            assert prof.size(m + n) <= prof.size(m) * prof.size(n)


# -- energy --------------------------------------------------------------------------


def test_energy_examples():
    z8 = GroupSpec((8,))
    # a coset of size 4 has energy 4^3 = 64
    assert energy(parse_set(z8, "{0,2,4,6}")) == 64
    assert energy(parse_set(Z100, "{0,1,2}")) == 19
    assert energy_bruteforce(parse_set(Z100, "{0,1,2}")) == 19
    assert energy(GSet.empty(Z100)) == 0


def test_energy_exhaustive_z8():
    z8 = GroupSpec((8,))
    for bits in range(256):
        a = GSet(z8, [(bits >> i) & 1 for i in range(8)])
        e = energy(a)
        assert e == energy_bruteforce(a)
        assert e <= len(a) ** 3
        assert (e == len(a) ** 3 and len(a) > 0) == is_coset(a)


def test_energy_random_large_groups():
    rng = np.random.default_rng(0)
    presentations = [(4096,), (64, 64), (2,) * 12, (16, 16, 16), (3, 1365), (97,), (10, 10, 10)]
    for i in range(500):
        g = GroupSpec(presentations[i % len(presentations)])
        size = int(rng.integers(1, 40))
        a = GSet.from_indices(g, rng.choice(g.size, size=size, replace=False))
        assert energy(a) == energy_bruteforce(a)


@given(group_and_set(max_size=64))
def test_energy_bounds(ga):
    _, a = ga
    e = energy(a)
    assert len(a) ** 2 <= e <= len(a) ** 3


def test_doubling_examples():
    h = subgroup_generated(parse_set(GroupSpec((12,)), "{3}"))
    assert doubling(h) == 1
    assert doubling(parse_set(Z100, "{0,1,2}")) == Fraction(5, 3)
    assert doubling(parse_set(GroupSpec((1000,)), "{0,1,5}")) == 2
    with pytest.raises(EmptySet):
        doubling(GSet.empty(Z5))


# -- convolution ----------------------------------------------------------------------


def test_convolution_examples():
    d0 = DensityMap.delta(Z5)
    assert np.array_equal(convolve(d0, d0).values, d0.values)
    a = DensityMap.indicator(parse_set(Z5, "{0,1}"))
    assert convolve(a, a).values.tolist() == [1, 2, 1, 0, 0]
    h = subgroup_generated(parse_set(GroupSpec((12,)), "{3}"))
    ih = DensityMap.indicator(h)
    assert np.array_equal(convolve(ih, ih).values, 4 * ih.values)


@settings(max_examples=80)
@given(st.data())
def test_convolution_matches_naive(data):
    g = data.draw(groups(max_size=64))
    vals = st.lists(st.integers(0, 50), min_size=g.size, max_size=g.size)
    f = DensityMap(g, np.array(data.draw(vals)))
    h = DensityMap(g, np.array(data.draw(vals)))
    out = convolve(f, h)
    assert np.array_equal(out.values, convolve_naive(f, h).values)
    assert out.total() == f.total() * h.total()


def test_fft_path_exact_on_dense_counts():
    rng = np.random.default_rng(1)
    g = GroupSpec((64, 48))
    f = rng.integers(0, 1000, g.size)
    h = rng.integers(0, 1000, g.size)
    fast = convolve_int(f, h, g)
    fg, hg = f.reshape(g.shape), h.reshape(g.shape)
    ref = np.zeros(g.shape, dtype=np.int64)
    for i, j in zip(*np.nonzero(fg[:5])):
        ref += fg[i, j] * np.roll(hg, (i, j), axis=(0, 1))
    # compare only the contribution of the first five rows: restrict f instead
    f5 = np.zeros_like(fg)
    f5[:5] = fg[:5]
    assert np.array_equal(convolve_int(f5.reshape(-1), h, g), ref.reshape(-1))
    assert fast.sum() == f.sum() * h.sum()


def test_float_convolution_and_uniform():
    a = parse_set(GroupSpec((7, 3)), "{(0,0),(1,2),(5,1)}")
    mu = DensityMap.uniform(a)
    assert abs(mu.values.sum() - 1) < 1e-12
    c = convolve(mu, mu.reflect())
    assert abs(c.values.sum() - 1) < 1e-12
    assert abs(c[(0, 0)] - 1 / 3) < 1e-12


# -- symmetry sets ----------------------------------------------------------------------


def test_symmetry_examples():
    assert symmetry_set(parse_set(Z100, "{0,1,2}"), Fraction(2, 3)) == parse_set(Z100, "{99,0,1}")
    h = subgroup_generated(parse_set(GroupSpec((12,)), "{3}"))
    for eta in (Fraction(1, 5), Fraction(1, 2), 1):
        assert symmetry_set(h, eta) == h
    with pytest.raises(EmptySet):
        symmetry_set(GSet.empty(Z5), Fraction(1, 2))
    with pytest.raises(BadThreshold):
        symmetry_set(parse_set(Z5, "{0}"), 0)
    with pytest.raises(BadThreshold):
        symmetry_set(parse_set(Z5, "{0}"), Fraction(3, 2))


@given(group_and_set(max_size=64), st.fractions(0, 1).filter(lambda q: q > 0), st.fractions(0, 1).filter(lambda q: q > 0))
def test_symmetry_invariants(ga, e1, e2):
    g, a = ga
    lo, hi = sorted((e1, e2))
    s_lo, s_hi = symmetry_set(a, lo), symmetry_set(a, hi)
    assert s_hi <= s_lo
    assert negate(s_lo) == s_lo
    assert g.zero in s_hi
    # definitional check
    for x in s_lo.complement():
        assert len(a & translate(a, x)) < lo * len(a)
