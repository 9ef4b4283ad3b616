"""Shared hypothesis strategies: small groups and subsets of them."""

import math

import numpy as np
from hypothesis import strategies as st

from aal.group import GroupSpec, GSet


@st.composite
def groups(draw, max_size: int = 64, max_rank: int = 3) -> GroupSpec:
    orders = []
    size = 1
    for _ in range(draw(st.integers(1, max_rank))):
        cap = max_size // size
        if cap < 2:
            break
        n = draw(st.integers(2, min(cap, 16)))
        orders.append(n)
        size *= n
    return GroupSpec(tuple(orders) or (2,))


@st.composite
def subsets(draw, g: GroupSpec, nonempty: bool = True) -> GSet:
    bits = draw(st.lists(st.booleans(), min_size=g.size, max_size=g.size))
    mask = np.array(bits, dtype=bool)
    if nonempty and not mask.any():
        mask[draw(st.integers(0, g.size - 1))] = True
    return GSet(g, mask)


@st.composite
def group_and_set(draw, max_size: int = 64, nonempty: bool = True):
    g = draw(groups(max_size))
    return g, draw(subsets(g, nonempty))


@st.composite
def group_and_sets(draw, n: int, max_size: int = 64):
    g = draw(groups(max_size))
    return (g, *(draw(subsets(g)) for _ in range(n)))


def elements(g: GroupSpec):
    return st.integers(0, g.size - 1).map(g.element)


def ratio(a, b) -> float:
    return a / b if b else math.inf
