"""Finite abelian groups presented as products of cyclic groups.

Elements are indexed lexicographically in mixed radix (last coordinate
fastest), which coincides with C-order flattening of a numpy array of shape
``orders``.  Every set type in the package is a boolean mask over this index.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceeded, GroupMismatch, ParseError

ENUM_CAP = 2**24


@dataclass(frozen=True)
class GroupSpec:
    """The group Z/n_1 x ... x Z/n_k."""

    orders: tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(n) for n in self.orders)
        if not orders or any(n < 1 for n in orders):
            raise ValueError(f"cyclic orders must be >= 1, got {self.orders!r}")
        canon = tuple(n for n in orders if n != 1) or (1,)
        object.__setattr__(self, "orders", canon)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        return parse_group(text)

    def __str__(self) -> str:
        return "x".join(f"Z{n}" for n in self.orders)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.orders

    @cached_property
    def size(self) -> int:
        return math.prod(self.orders)

    @cached_property
    def exponent(self) -> int:
        """Least common multiple of the cyclic orders."""
        return reduce(math.lcm, self.orders, 1)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = []
        s = 1
        for n in reversed(self.orders):
            out.append(s)
            s *= n
        return tuple(reversed(out))

    def check_cap(self, cap: int = ENUM_CAP) -> None:
        if self.size > cap:
            raise CapExceeded(f"|G| = {self.size} exceeds enumeration cap {cap}")

    @cached_property
    def coords(self) -> np.ndarray:
        """(|G|, k) int64 array of element coordinates in index order."""
        self.check_cap()
        grids = np.indices(self.orders, dtype=np.int64)
        arr = grids.reshape(self.rank, -1).T.copy()
        arr.setflags(write=False)
        return arr

    @cached_property
    def neg_index(self) -> np.ndarray:
        """Permutation sending index(x) to index(-x)."""
        c = (-self.coords) % np.array(self.orders)
        out = c @ np.array(self.strides)
        out.setflags(write=False)
        return out

    def reduce(self, coords: Sequence[int] | int) -> tuple[int, ...]:
        if isinstance(coords, (int, np.integer)):
            coords = (int(coords),)
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.rank:
            raise GroupMismatch(f"{coords!r} has {len(coords)} coordinates; {self} has rank {self.rank}")
        return tuple(c % n for c, n in zip(coords, self.orders))

    def index(self, coords: Sequence[int] | int) -> int:
        return sum(c * s for c, s in zip(self.reduce(coords), self.strides))

    def element(self, index: int) -> "GroupElement":
        if not 0 <= index < self.size:
            raise IndexError(index)
        coords = []
        for n in reversed(self.orders):
            coords.append(index % n)
            index //= n
        return GroupElement(self, tuple(reversed(coords)))

    def __call__(self, *coords: int) -> "GroupElement":
        """Shorthand: ``G(1, 2)`` is the element with coordinates (1, 2)."""
        if len(coords) == 1 and not isinstance(coords[0], (int, np.integer)):
            coords = tuple(coords[0])
        return GroupElement(self, self.reduce(coords))

    @property
    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)


@dataclass(frozen=True)
class GroupElement:
    group: GroupSpec
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", self.group.reduce(self.coords))

    def _check(self, other: "GroupElement") -> None:
        if not isinstance(other, GroupElement) or other.group != self.group:
            raise GroupMismatch(f"cannot combine elements of {self.group} and {getattr(other, 'group', other)}")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, tuple(-a for a in self.coords))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def __mul__(self, n: int) -> "GroupElement":
        return GroupElement(self.group, tuple(n * a for a in self.coords))

    __rmul__ = __mul__

    @property
    def index(self) -> int:
        return self.group.index(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __repr__(self) -> str:
        return f"GroupElement({self.group}, {self})"

    def __str__(self) -> str:
        if self.group.rank == 1:
            return str(self.coords[0])
        return "(" + ",".join(map(str, self.coords)) + ")"


def enumerate_elements(g: GroupSpec, cap: int = ENUM_CAP) -> list[GroupElement]:
    g.check_cap(cap)
    return [g.element(i) for i in range(g.size)]


def add(x: GroupElement, y: GroupElement) -> GroupElement:
    return x + y


def neg(x: GroupElement) -> GroupElement:
    return -x


# -- characters -------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """gamma_t(x) = exp(2 pi i sum_i t_i x_i / n_i)."""

    group: GroupSpec
    t: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", self.group.reduce(self.t))

    @property
    def index(self) -> int:
        return self.group.index(self.t)

    def is_trivial(self) -> bool:
        return not any(self.t)

    def phase(self, x: GroupElement) -> Fraction:
        """Exact phase in [0, 1)."""
        if x.group != self.group:
            raise GroupMismatch(f"character on {self.group} applied to element of {x.group}")
        return sum((Fraction(t * c, n) for t, c, n in zip(self.t, x.coords, self.group.orders)), Fraction(0)) % 1

    def __call__(self, x: GroupElement) -> complex:
        return phase_to_unit(self.phase(x))

    def conj(self) -> "Character":
        return Character(self.group, tuple(-t for t in self.t))


def phase_to_unit(phase: Fraction) -> complex:
    # exact on the eight-fold symmetric points so that e.g. gamma(x) = -1 is exact
    phase = phase % 1
    exact = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}
    if phase in exact:
        return exact[phase]
    return cmath.exp(2j * math.pi * float(phase))


def char_value(gamma: Character, x: GroupElement) -> complex:
    return gamma(x)


def centered_phase(phase: Fraction) -> Fraction:
    """Map a phase to the interval (-1/2, 1/2]."""
    phase = phase % 1
    return phase - 1 if phase > Fraction(1, 2) else phase


def phase_numerators(g: GroupSpec, t: Sequence[int] | np.ndarray, idx: np.ndarray | None = None) -> np.ndarray:
    """Integer phases sum_i t_i x_i (E / n_i) mod E, with E the group exponent.

    ``t`` may be a single dual coordinate vector or an (m, k) array; ``idx``
    restricts evaluation to those element indices.
    """
    t = np.atleast_2d(np.asarray(t, dtype=np.int64))
    scale = np.array([g.exponent // n for n in g.orders], dtype=np.int64)
    coords = g.coords if idx is None else g.coords[idx]
    out = ((t * scale) @ coords.T) % g.exponent
    return out[0] if out.shape[0] == 1 else out


def safe_modulus(radius: int, folds: int) -> int:
    """Smallest N such that n-fold sums of a subset of [-radius, radius] never wrap in Z/N."""
    return 2 * radius * folds + 1


# -- sets -------------------------------------------------------------------


class GSet:
    """An immutable subset of a finite abelian group, stored as a mask over element indices."""

    __slots__ = ("group", "_mask", "_size")

    def __init__(self, group: GroupSpec, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.shape[0] != group.size:
            raise GroupMismatch(f"mask of length {mask.shape[0]} for group of order {group.size}")
        if mask.flags.writeable:
            mask = mask.copy()
            mask.setflags(write=False)
        self.group = group
        self._mask = mask
        self._size = int(mask.sum())

    @classmethod
    def empty(cls, group: GroupSpec) -> "GSet":
        return cls(group, np.zeros(group.size, dtype=bool))

    @classmethod
    def full(cls, group: GroupSpec) -> "GSet":
        return cls(group, np.ones(group.size, dtype=bool))

    @classmethod
    def from_indices(cls, group: GroupSpec, indices: Iterable[int]) -> "GSet":
        mask = np.zeros(group.size, dtype=bool)
        mask[np.fromiter(indices, dtype=np.int64)] = True
        return cls(group, mask)

    @classmethod
    def from_elements(cls, group: GroupSpec, elements: Iterable) -> "GSet":
        idx = []
        for e in elements:
            if isinstance(e, GroupElement):
                if e.group != group:
                    raise GroupMismatch(f"element of {e.group} in set over {group}")
                idx.append(e.index)
            else:
                idx.append(group.index(e))
        return cls.from_indices(group, idx)

    @classmethod
    def parse(cls, group: GroupSpec, text: str) -> "GSet":
        return parse_set(group, text)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def grid(self) -> np.ndarray:
        return self._mask.reshape(self.group.shape)

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self._mask)

    def elements(self) -> list[GroupElement]:
        return [self.group.element(int(i)) for i in self.indices()]

    def __len__(self) -> int:
        return self._size

    @property
    def size(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements())

    def __contains__(self, x) -> bool:
        if isinstance(x, GroupElement):
            if x.group != self.group:
                return False
            return bool(self._mask[x.index])
        return bool(self._mask[self.group.index(x)])

    def _check(self, other: "GSet") -> None:
        if not isinstance(other, GSet) or other.group != self.group:
            raise GroupMismatch(f"sets over {self.group} and {getattr(other, 'group', other)}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, GSet):
            return NotImplemented
        return self.group == other.group and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self) -> int:
        return hash((self.group, self._mask.tobytes()))

    def __or__(self, other: "GSet") -> "GSet":
        self._check(other)
        return GSet(self.group, self._mask | other._mask)

    def __and__(self, other: "GSet") -> "GSet":
        self._check(other)
        return GSet(self.group, self._mask & other._mask)

    def without(self, other: "GSet") -> "GSet":
        self._check(other)
        return GSet(self.group, self._mask & ~other._mask)

    def complement(self) -> "GSet":
        return GSet(self.group, ~self._mask)

    def issubset(self, other: "GSet") -> bool:
        self._check(other)
        return not np.any(self._mask & ~other._mask)

    def __le__(self, other: "GSet") -> bool:
        return self.issubset(other)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self._mask, self._mask[self.group.neg_index]))

    def min_element(self) -> GroupElement:
        return self.group.element(int(self.indices()[0]))

    def to_literal(self) -> str:
        return "{" + ",".join(str(e) for e in self.elements()) + "}"

    def __repr__(self) -> str:
        body = self.to_literal() if self._size <= 32 else f"<{self._size} elements>"
        return f"GSet({self.group}, {body})"


class CharSet(GSet):
    """A set of characters, indexed by dual coordinates t (same index scheme as elements)."""

    __slots__ = ()

    def characters(self) -> list[Character]:
        return [Character(self.group, self.group.element(int(i)).coords) for i in self.indices()]

    def dual_coords(self) -> np.ndarray:
        return self.group.coords[self.indices()]

    @classmethod
    def of(cls, group: GroupSpec, ts: Iterable) -> "CharSet":
        return cls.from_elements(group, ts)

    def __repr__(self) -> str:
        return "Char" + super().__repr__()


def subgroup_generated(gens: GSet) -> GSet:
    """Smallest subgroup containing ``gens``, by BFS closure under adding generators."""
    g = gens.group
    gen_coords = g.coords[gens.indices()]
    orders = np.array(g.orders)
    strides = np.array(g.strides)
    seen = np.zeros(g.size, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    while frontier.size and gen_coords.size:
        fc = g.coords[frontier]
        nxt = ((fc[:, None, :] + gen_coords[None, :, :]) % orders) @ strides
        nxt = np.unique(nxt.reshape(-1))
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    return GSet(g, seen)


def coset_decomposition(a: GSet) -> tuple[GroupElement, GSet] | None:
    """Return (t, H) with a = t + H and H a subgroup, or None if a is not a coset."""
    if not a:
        return None
    from .setops import sumset, translate

    t = a.min_element()
    h = translate(a, -t)
    if sumset(h, h) != h:
        return None
    return t, h


def is_coset(a: GSet) -> bool:
    return coset_decomposition(a) is not None


# -- literals ---------------------------------------------------------------

_FACTOR = re.compile(r"^z(\d+)(?:\^(\d+))?$")


def parse_group(text: str) -> GroupSpec:
    """Parse "Z8", "Z2^3", "Z2xZ3xZ5" (case-insensitive)."""
    cleaned = text.strip().lower().replace(" ", "")
    if not cleaned:
        raise ParseError("empty group spec")
    orders: list[int] = []
    for part in cleaned.split("x"):
        m = _FACTOR.match(part)
        if not m:
            raise ParseError(f"bad group factor {part!r} in {text!r}")
        n = int(m.group(1))
        reps = int(m.group(2)) if m.group(2) else 1
        if n < 1:
            raise ParseError(f"cyclic order must be >= 1 in {text!r}")
        orders.extend([n] * reps)
    return GroupSpec(tuple(orders))


def parse_set(group: GroupSpec, text: str) -> GSet:
    """Parse "{(0,1),(1,2)}" or, for cyclic groups, "{0,2,4}". Negative entries are reduced."""
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError(f"set literal must be wrapped in braces: {text!r}")
    body = body[1:-1].strip()
    if not body:
        return GSet.empty(group)
    elems: list[tuple[int, ...]] = []
    if "(" in body:
        for tup in re.findall(r"\(([^()]*)\)", body):
            try:
                elems.append(tuple(int(c) for c in tup.split(",")))
            except ValueError as exc:
                raise ParseError(f"bad tuple ({tup}) in {text!r}") from exc
        leftover = re.sub(r"\([^()]*\)", "", body).replace(",", "").strip()
        if leftover:
            raise ParseError(f"unexpected text {leftover!r} in {text!r}")
    else:
        try:
            elems = [(int(tok),) for tok in body.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad element in {text!r}") from exc
    for e in elems:
        if len(e) != group.rank:
            raise ParseError(f"element {e} has {len(e)} coordinates, group {group} has rank {group.rank}")
    return GSet.from_elements(group, elems)
