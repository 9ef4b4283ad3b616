"""Generators for the standard families of sets with large additive energy.

Each generator verifies its defining condition exactly before returning.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .errors import BadDelta, CannotFindIndependent, NonInjectiveAP, TooFewFactors
from .group import GroupElement, GroupSpec, GSet, is_coset, subgroup_generated
from .setops import sumset, translate


def gen_random_subset(h: GSet, delta: float, seed: int = 0) -> GSet:
    """Keep each element of the coset ``h`` independently with probability delta."""
    if not 0 < delta <= 1:
        raise BadDelta(f"delta must lie in (0, 1], got {delta}")
    if not is_coset(h):
        raise ValueError("random subsets are drawn from a nonempty coset")
    rng = np.random.default_rng(seed)
    draw = rng.random(h.group.size) < delta
    return GSet(h.group, h.mask & draw)


def independent(xs: Sequence[GroupElement], H: GSet) -> bool:
    """n_1 x_1 + ... + n_k x_k in H  implies  n_i x_i in H for every i.

    Coefficients are only taken modulo the group exponent, which makes the
    quantifier over Z^k a finite check.
    """
    G = H.group
    e = G.exponent
    if not xs:
        return True
    orders = np.array(G.orders)
    strides = np.array(G.strides)
    X = np.array([x.coords for x in xs], dtype=np.int64)
    ns = np.array(list(itertools.product(range(e), repeat=len(xs))), dtype=np.int64)
    sums = ((ns @ X) % orders) @ strides
    hit = H.mask[sums]
    if not hit.any():
        return True
    # each n_i x_i must be in H on every hit row
    parts = ((ns[hit][:, :, None] * X[None, :, :]) % orders) @ strides
    return bool(H.mask[parts].all())


def gen_independent_cosets(g: GroupSpec, h_gens: GSet, k: int, seed: int = 0, retries: int = 200) -> GSet:
    """Union of k independent cosets x_i + H, H generated by ``h_gens``.

    Raises CannotFindIndependent (carrying the largest k found greedily) when
    no suitable x_1..x_k turns up within ``retries`` random draws.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    H = subgroup_generated(h_gens)
    if H.group != g:
        raise ValueError("generators live in a different group")
    outside = H.complement().indices()
    rng = np.random.default_rng(seed)
    if outside.size >= k:
        for _ in range(retries):
            pick = rng.choice(outside, size=k, replace=False)
            xs = [g.element(int(i)) for i in pick]
            if independent(xs, H):
                out = GSet.empty(g)
                for x in xs:
                    out = out | translate(H, x)
                return out
    k_max = _greedy_independent(H, outside)
    raise CannotFindIndependent(
        f"could not find {k} independent cosets of a subgroup of order {len(H)} in {g} (greedy found {k_max})", k_max
    )


def _greedy_independent(H: GSet, outside: np.ndarray) -> int:
    chosen: list[GroupElement] = []
    G = H.group
    for i in outside:
        cand = chosen + [G.element(int(i))]
        if independent(cand, H):
            chosen = cand
    return len(chosen)


def gen_internally_independent(factors: Sequence[GroupSpec], k: int) -> tuple[GroupSpec, GSet, list[GSet]]:
    """A = H_1 u ... u H_k with H_i the i-th factor embedded in the product group.

    Returns (G, A, [H_1, ..., H_k]); |H_1 + ... + H_k| = |H_1| ... |H_k| is verified.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(factors) < k:
        raise TooFewFactors(f"need at least {k} factors, got {len(factors)}")
    orders: list[int] = []
    spans = []
    for f in factors:
        spans.append((len(orders), len(orders) + len([n for n in f.orders if n > 1])))
        orders.extend(n for n in f.orders if n > 1)
    G = GroupSpec(tuple(orders) or (1,))
    subgroups = []
    for lo, hi in spans[:k]:
        mask = np.all(np.delete(G.coords, np.s_[lo:hi], axis=1) == 0, axis=1)
        subgroups.append(GSet(G, mask))
    total = subgroups[0]
    for Hi in subgroups[1:]:
        total = sumset(total, Hi)
    if len(total) != math.prod(len(Hi) for Hi in subgroups):
        raise AssertionError("coordinate subgroups failed the product-size condition")
    A = subgroups[0]
    for Hi in subgroups[1:]:
        A = A | Hi
    return G, A, subgroups


def gen_ap(g: GroupSpec, start, step, length: int) -> GSet:
    """{start + j*step : 0 <= j < length}; errors unless all terms are distinct."""
    if length < 1:
        raise ValueError("length must be >= 1")
    a0 = g(start) if not isinstance(start, GroupElement) else start
    d = g(step) if not isinstance(step, GroupElement) else step
    idx = [(a0 + j * d).index for j in range(length)]
    if len(set(idx)) != length:
        raise NonInjectiveAP(f"AP of length {length} with step {d} wraps in {g}")
    return GSet.from_indices(g, idx)


def gen_near_coset(h: GSet, eps: float, eta: float, seed: int = 0) -> GSet:
    """Remove floor(eta|H|) elements of the coset H, then add floor(eps|A|) outside elements.

    The result satisfies |A cap H| >= (1-eps)|A| and |A cap H| >= (1-eta)|H|.
    """
    if not (0 <= eps < 1 and 0 <= eta < 1):
        raise ValueError("eps and eta must lie in [0, 1)")
    if not is_coset(h):
        raise ValueError("h must be a coset")
    rng = np.random.default_rng(seed)
    inside = h.indices()
    drop = rng.choice(inside, size=math.floor(eta * len(inside)), replace=False)
    mask = h.mask.copy()
    mask[drop] = False
    n_in = int(mask.sum())
    outside = h.complement().indices()
    add = rng.choice(outside, size=min(outside.size, math.floor(eps * n_in)), replace=False)
    mask[add] = True
    out = GSet(h.group, mask)
    inter = len(out & h)
    assert inter >= (1 - eps) * len(out) - 1e-9 and inter >= (1 - eta) * len(h) - 1e-9
    return out
