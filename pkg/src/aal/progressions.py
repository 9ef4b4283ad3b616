"""Convex (coset) progressions, polynomial growth, and Bohr sets as progressions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    CapExceeded,
    EmptySet,
    EqualityCertificateFails,
    GroupMismatch,
    HypothesisFails,
    ParseError,
    TruncationSuspected,
    UnboundedBody,
)
from .group import ENUM_CAP, CharSet, GroupElement, GroupSpec, GSet, centered_phase, parse_set, phase_numerators
from .setops import GrowthProfile, growth_profile, sumset, translate
from .spectral import bohr_radius_numerator, bohr_set, kernel


def _rank(rows: Sequence[Sequence[Fraction]], dim: int) -> int:
    mat = [list(map(Fraction, r)) for r in rows]
    rank = 0
    for col in range(dim):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for i in range(len(mat)):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col] / mat[rank][col]
                mat[i] = [u - f * v for u, v in zip(mat[i], mat[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class ConvexBody:
    """Q = {x in R^d : |<a_i, x>| <= c_i for every slab}, searched inside [-R, R]^d."""

    dim: int
    slabs: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    radius: int

    def __post_init__(self):
        slabs = tuple((tuple(Fraction(v) for v in a), Fraction(c)) for a, c in self.slabs)
        for a, c in slabs:
            if len(a) != self.dim:
                raise ValueError(f"slab normal {a} has length {len(a)}, expected {self.dim}")
            if c <= 0:
                raise ValueError(f"slab half-width must be positive, got {c}")
        if self.radius < 1:
            raise ValueError("enumeration radius must be >= 1")
        object.__setattr__(self, "slabs", slabs)
        if _rank([a for a, _ in slabs], self.dim) < self.dim:
            raise UnboundedBody(f"slab normals span less than R^{self.dim}")

    @classmethod
    def box(cls, half_widths: Sequence, radius: int | None = None) -> "ConvexBody":
        d = len(half_widths)
        slabs = tuple((tuple(Fraction(int(i == j)) for j in range(d)), Fraction(w)) for i, w in enumerate(half_widths))
        if radius is None:
            radius = math.floor(max((Fraction(w) for w in half_widths), default=Fraction(0))) + 1
        return cls(d, slabs, radius)

    def integer_slabs(self) -> tuple[np.ndarray, np.ndarray]:
        """Slabs rescaled to integer data: |A x| <= C componentwise."""
        rows, bounds = [], []
        for a, c in self.slabs:
            den = math.lcm(*(v.denominator for v in a), c.denominator)
            rows.append([int(v * den) for v in a])
            bounds.append(int(c * den))
        return np.array(rows, dtype=np.int64).reshape(-1, self.dim), np.array(bounds, dtype=np.int64)


@dataclass(frozen=True)
class ConvexProgression:
    body: ConvexBody
    phi_images: tuple[GroupElement, ...]

    def __post_init__(self):
        if len(self.phi_images) != self.body.dim:
            raise ValueError(f"{len(self.phi_images)} generator images for a {self.body.dim}-dimensional body")
        groups = {e.group for e in self.phi_images}
        if len(groups) > 1:
            raise GroupMismatch("generator images live in different groups")

    def phi(self, point: Sequence[int], group: GroupSpec) -> GroupElement:
        out = group.zero
        for c, g in zip(point, self.phi_images):
            out = out + int(c) * g
        return out


@dataclass(frozen=True)
class ConvexCosetProgression:
    coset_subgroup: GSet
    coset_translate: GroupElement
    progression: ConvexProgression

    def __post_init__(self):
        H = self.coset_subgroup
        if H.group != self.coset_translate.group:
            raise GroupMismatch("subgroup and translate live in different groups")
        if any(e.group != H.group for e in self.progression.phi_images):
            raise GroupMismatch("progression generators live in a different group")
        if not (H and H.group.zero in H and sumset(H, H) == H):
            raise ValueError("coset_subgroup is not a subgroup")

    @property
    def group(self) -> GroupSpec:
        return self.coset_subgroup.group

    @property
    def dim(self) -> int:
        return self.progression.body.dim

    def members(self, cap: int = ENUM_CAP) -> GSet:
        p = enumerate_progression(self.progression, self.group, cap)
        return translate(sumset(self.coset_subgroup, p), self.coset_translate)

    def to_json(self) -> dict:
        body = self.progression.body
        return {
            "dim": body.dim,
            "slabs": [{"a": [str(v) for v in a], "c": str(c)} for a, c in body.slabs],
            "radius": body.radius,
            "phi": [list(g.coords) for g in self.progression.phi_images],
            "H": self.coset_subgroup.to_literal(),
            "translate": list(self.coset_translate.coords),
        }


def progression_from_json(group: GroupSpec, obj: dict | str) -> ConvexCosetProgression:
    """Parse {"dim":1,"slabs":[{"a":[1],"c":"2"}],"radius":8,"phi":[[3]],"H":"{0}","translate":[0]}."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        dim = int(obj["dim"])
        slabs = tuple((tuple(Fraction(str(v)) for v in s["a"]), Fraction(str(s["c"]))) for s in obj["slabs"])
        body = ConvexBody(dim, slabs, int(obj["radius"]))
        phi = tuple(group(tuple(c)) for c in obj.get("phi", []))
        H = parse_set(group, obj.get("H", "{" + str(group.zero) + "}"))
        t = group(tuple(obj.get("translate", group.zero.coords)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad progression literal: {exc}") from exc
    return ConvexCosetProgression(H, t, ConvexProgression(body, phi))


def enumerate_progression(p: ConvexProgression, group: GroupSpec | None = None, cap: int = ENUM_CAP) -> GSet:
    """phi(Q cap Z^d) as a set, with a sentinel against truncation by the search box."""
    body = p.body
    if group is None:
        if not p.phi_images:
            raise ValueError("group required for a 0-dimensional progression")
        group = p.phi_images[0].group
    if body.dim == 0:
        return GSet.from_indices(group, [0])
    R, d = body.radius, body.dim
    side = 2 * R + 1
    if side**d > cap:
        raise CapExceeded(f"enumeration box (2R+1)^d = {side}^{d} exceeds cap {cap}")
    A, C = body.integer_slabs()
    phi = np.array([g.coords for g in p.phi_images], dtype=np.int64).reshape(d, group.rank)
    orders = np.array(group.orders)
    strides = np.array(group.strides)
    mask = np.zeros(group.size, dtype=bool)
    if d == 1:
        tail = np.zeros((1, 0), dtype=np.int64)
    else:
        tail = np.indices((side,) * (d - 1), dtype=np.int64).reshape(d - 1, -1).T - R
    for first in range(-R, R + 1):
        pts = np.hstack([np.full((tail.shape[0], 1), first, dtype=np.int64), tail])
        keep = np.all(np.abs(pts @ A.T) <= C, axis=1)
        pts = pts[keep]
        if not pts.size:
            continue
        if np.any(np.abs(pts).max(axis=1) == R):
            raise TruncationSuspected(f"body meets the enumeration shell at radius {R}")
        mask[((pts @ phi) % orders) @ strides] = True
    return GSet(group, mask)


def growth_order(x: GSet, n_max: int) -> tuple[float, GrowthProfile]:
    """Smallest d with |nX| <= n^d |X| for 2 <= n <= n_max, plus the profile it came from."""
    if not x:
        raise EmptySet("growth order of the empty set")
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    prof = growth_profile(x, n_max)
    d = max(math.log(prof.size(n) / len(x)) / math.log(n) for n in range(2, n_max + 1))
    return max(d, 0.0), prof


def doubling_of_progression(m: ConvexCosetProgression, cap: int = ENUM_CAP) -> Fraction:
    s = m.members(cap)
    return Fraction(len(sumset(s, s)), len(s))


# -- Ruzsa embedding ------------------------------------------------------------


def ruzsa_embed(gamma_set: CharSet, x: GroupElement) -> tuple[Fraction, ...]:
    """gamma -> arg(gamma(x)) / 2pi in (-1/2, 1/2], exactly, for gamma in index order."""
    return tuple(centered_phase(gamma.phase(x)) for gamma in gamma_set.characters())


@dataclass(frozen=True)
class RuzsaImage:
    gamma_set: CharSet
    vectors: dict

    @classmethod
    def of(cls, gamma_set: CharSet, s: GSet) -> "RuzsaImage":
        return cls(gamma_set, {x: ruzsa_embed(gamma_set, x) for x in s})


def _lattice_basis(gens: list[list[int]], m: int) -> list[list[int]]:
    """Triangular basis of the full-rank lattice in Z^m spanned by ``gens``.

    Column-by-column Euclidean elimination; row j of the result has zeros in
    columns < j and a positive pivot in column j. Off-pivot entries are then
    reduced modulo later pivots to keep the basis short.
    """
    rows = [list(g) for g in gens if any(g)]
    basis = []
    for col in range(m):
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r = [u - q * v for u, v in zip(r, piv)]
                (nxt if r[col] != 0 else rest).append(r)
            active = nxt
        if not active:
            raise ValueError("lattice is not full rank")
        piv = active[0]
        if piv[col] < 0:
            piv = [-v for v in piv]
        basis.append(piv)
        rows = [r for r in rest if any(r)]
    for j in range(m - 1, -1, -1):
        for i in range(j):
            q = round(Fraction(basis[i][j], basis[j][j]))
            if q:
                basis[i] = [u - q * v for u, v in zip(basis[i], basis[j])]
    return basis


def _inverse(mat: list[list[int]]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [u - f * v for u, v in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


@dataclass(frozen=True)
class EqualityCertificate:
    passed: bool
    bohr_size: int
    progression_size: int
    dimension: int
    d_claim: int
    characters_used: int
    kernel_size: int
    first_mismatch: GroupElement | None = None

    @property
    def within_claim(self) -> bool:
        return self.dimension <= self.d_claim


def check_bohr_hypothesis(gamma_set: CharSet, delta: float, d: int) -> tuple[bool, int, int]:
    """Evaluate |Bohr(G,(3d+1)delta)| < 2^d |Bohr(G,delta)| with delta < 1/(4(3d+1))."""
    small = len(bohr_set(gamma_set, delta))
    if not delta < 1 / (4 * (3 * d + 1)):
        return False, small, -1
    big = len(bohr_set(gamma_set, (3 * d + 1) * delta))
    return big < 2**d * small, small, big


def _reduce_characters(gamma_set: CharSet, delta: float, target: GSet) -> CharSet:
    """Drop characters (the trivial one always) whose removal leaves the Bohr set unchanged."""
    keep = gamma_set.mask.copy()
    keep[0] = False
    for i in gamma_set.indices():
        if not keep[i]:
            continue
        keep[i] = False
        if bohr_set(CharSet(gamma_set.group, keep), delta) != target:
            keep[i] = True
    return CharSet(gamma_set.group, keep)


def bohr_to_progression(
    gamma_set: CharSet, delta: float, d_claim: int, cap: int = ENUM_CAP, require_hypothesis: bool = True
) -> tuple[ConvexCosetProgression, EqualityCertificate]:
    """Write Bohr(Gamma, delta) as H + phi(Q cap Z^m) and certify equality elementwise.

    H is the common kernel of Gamma. Characters that do not change the Bohr set
    are dropped first; the remaining m characters define the body through the
    Ruzsa embedding, whose image of G (plus Z^m) is a lattice. The body lives in
    coordinates of a basis of that lattice and phi sends each basis vector to
    an element with matching phases.

    With ``require_hypothesis=False`` the construction runs on any delta small
    enough that the Bohr radius stays below a quarter turn; the equality
    certificate is still enforced.
    """
    ok, small, big = check_bohr_hypothesis(gamma_set, delta, d_claim)
    if not ok and require_hypothesis:
        raise HypothesisFails(
            f"need delta < 1/(4(3d+1)) and |Bohr((3d+1)delta)| < 2^d |Bohr(delta)|; "
            f"got d={d_claim}, delta={delta}, sizes {big} vs {small}"
        )
    G = gamma_set.group
    if not delta < math.sqrt(2):
        raise HypothesisFails(f"delta = {delta} too large for the Ruzsa embedding to be injective on the body")
    target = bohr_set(gamma_set, delta)
    H = kernel(gamma_set)
    reduced = _reduce_characters(gamma_set, delta, target)
    ts = reduced.dual_coords()
    E = G.exponent
    M = bohr_radius_numerator(E, delta)
    if M == 0:
        # no nonzero phase fits: the Bohr set is the kernel itself
        ts = ts[:0]
    m = len(ts)
    if m == 0:
        body = ConvexBody(0, (), 1)
        prog = ConvexCosetProgression(H, G.zero, ConvexProgression(body, ()))
    else:
        scale = [E // n for n in G.orders]
        gens = [[int(ts[j][i]) * scale[i] % E for j in range(m)] for i in range(G.rank)]
        gens += [[E * int(i == j) for j in range(m)] for i in range(m)]
        basis = _lattice_basis(gens, m)
        # phases of every element under the reduced characters, keyed for preimage lookup
        phases = np.atleast_2d(phase_numerators(G, ts)).T
        lookup: dict[tuple[int, ...], int] = {}
        for idx in range(G.size - 1, -1, -1):
            lookup[tuple(int(v) for v in phases[idx])] = idx
        phi = tuple(G.element(lookup[tuple(v % E for v in b)]) for b in basis)
        # columns of B are basis vectors; slab i constrains the i-th character's phase
        slabs = tuple((tuple(Fraction(basis[j][i], E) for j in range(m)), Fraction(M, E)) for i in range(m))
        inv = _inverse([[basis[j][i] for j in range(m)] for i in range(m)])
        reach = max(sum(abs(v) for v in row) for row in inv) * M
        body = ConvexBody(m, slabs, math.floor(reach) + 1)
        prog = ConvexCosetProgression(H, G.zero, ConvexProgression(body, phi))
    members = prog.members(cap)
    bad = (members.without(target)) | (target.without(members))
    cert = EqualityCertificate(
        passed=not bad,
        bohr_size=len(target),
        progression_size=len(members),
        dimension=m,
        d_claim=d_claim,
        characters_used=m,
        kernel_size=len(H),
        first_mismatch=bad.min_element() if bad else None,
    )
    if bad:
        raise EqualityCertificateFails(f"progression differs from Bohr set at {cert.first_mismatch}")
    return prog, cert
