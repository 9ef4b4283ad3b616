"""Sumsets, additive energy, convolution and symmetry sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import BadThreshold, EmptySet, GroupMismatch
from .group import GroupElement, GroupSpec, GSet

# shift-and-add is used instead of FFT when the sparser operand is this small
_DIRECT_SUPPORT = 24
_FFT_RESIDUAL = 0.25


def as_fraction(value) -> Fraction:
    """Coerce a threshold to an exact rational; floats go through their shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    return Fraction(str(value))


@dataclass(frozen=True)
class DensityMap:
    """A function G -> R.  ``exact`` maps hold int64 values; others hold float64."""

    group: GroupSpec
    values: np.ndarray
    exact: bool = True

    def __post_init__(self):
        vals = np.asarray(self.values).reshape(-1)
        if vals.shape[0] != self.group.size:
            raise GroupMismatch(f"{vals.shape[0]} values for group of order {self.group.size}")
        vals = vals.astype(np.int64 if self.exact else np.float64, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def indicator(cls, a: GSet) -> "DensityMap":
        return cls(a.group, a.mask.astype(np.int64), exact=True)

    @classmethod
    def uniform(cls, a: GSet) -> "DensityMap":
        """mu_A = 1_A / |A|."""
        if not a:
            raise EmptySet("mu_A of the empty set")
        return cls(a.group, a.mask / len(a), exact=False)

    @classmethod
    def delta(cls, g: GroupSpec, x: GroupElement | None = None) -> "DensityMap":
        vals = np.zeros(g.size, dtype=np.int64)
        vals[0 if x is None else x.index] = 1
        return cls(g, vals)

    @property
    def grid(self) -> np.ndarray:
        return self.values.reshape(self.group.shape)

    def total(self):
        return int(self.values.sum()) if self.exact else float(self.values.sum())

    def support(self) -> GSet:
        return GSet(self.group, self.values != 0)

    def reflect(self) -> "DensityMap":
        """x -> f(-x)."""
        return DensityMap(self.group, self.values[self.group.neg_index], self.exact)

    def translate(self, x: GroupElement) -> "DensityMap":
        """tau_x f(y) = f(y + x)."""
        return DensityMap(self.group, shift_grid(self.grid, x.coords, sign=-1), self.exact)

    def as_float(self) -> "DensityMap":
        return self if not self.exact else DensityMap(self.group, self.values.astype(np.float64), exact=False)

    def lp_norm(self, p: float) -> float:
        return lp_norm(self.values, p)

    def __getitem__(self, x):
        if isinstance(x, GroupElement):
            return self.values[x.index]
        return self.values[self.group.index(x)]


def lp_norm(values: np.ndarray, p: float) -> float:
    v = np.abs(np.asarray(values, dtype=np.float64))
    if math.isinf(p):
        return float(v.max(initial=0.0))
    return float(np.sum(v**p) ** (1.0 / p))


def shift_grid(grid: np.ndarray, coords, sign: int = 1) -> np.ndarray:
    """Return h with h(y) = grid(y - sign*coords), i.e. translation by sign*coords."""
    return np.roll(grid, shift=tuple(sign * int(c) for c in coords), axis=tuple(range(grid.ndim)))


# -- convolution engine -----------------------------------------------------


def _conv_shift_add(f: np.ndarray, g: np.ndarray, group: GroupSpec) -> np.ndarray:
    """Exact cyclic convolution by summing shifted copies of g over supp(f)."""
    gg = g.reshape(group.shape)
    out = np.zeros(group.shape, dtype=np.result_type(f, g))
    for i in np.flatnonzero(f):
        out += f[i] * shift_grid(gg, group.coords[i])
    return out.reshape(-1)


def _conv_fft(f: np.ndarray, g: np.ndarray, group: GroupSpec) -> np.ndarray:
    ff = np.fft.fftn(f.reshape(group.shape).astype(np.float64))
    gf = np.fft.fftn(g.reshape(group.shape).astype(np.float64))
    return np.fft.ifftn(ff * gf).real.reshape(-1)


def convolve_int(f: np.ndarray, g: np.ndarray, group: GroupSpec) -> np.ndarray:
    """Exact integer cyclic convolution on ``group``.

    Uses FFT with rounding when that is verifiably exact (every residual below
    0.25), otherwise falls back to shift-and-add over the sparser support.
    """
    f = np.asarray(f, dtype=np.int64).reshape(-1)
    g = np.asarray(g, dtype=np.int64).reshape(-1)
    nf, ng = np.count_nonzero(f), np.count_nonzero(g)
    if nf > ng:
        f, g, nf, ng = g, f, ng, nf
    if nf <= _DIRECT_SUPPORT:
        return _conv_shift_add(f, g, group)
    approx = _conv_fft(f, g, group)
    rounded = np.rint(approx)
    bound = float(np.abs(f).sum()) * float(np.abs(g).sum())
    if bound < 2.0**52 and np.max(np.abs(approx - rounded), initial=0.0) < _FFT_RESIDUAL:
        return rounded.astype(np.int64)
    return _conv_shift_add(f, g, group)


def convolve(f: DensityMap, g: DensityMap) -> DensityMap:
    """(f * g)(x) = sum_{y+z=x} f(y) g(z)."""
    if f.group != g.group:
        raise GroupMismatch(f"convolving maps on {f.group} and {g.group}")
    if f.exact and g.exact:
        return DensityMap(f.group, convolve_int(f.values, g.values, f.group), exact=True)
    return DensityMap(f.group, _conv_fft(f.values, g.values, f.group), exact=False)


def convolve_naive(f: DensityMap, g: DensityMap) -> DensityMap:
    """O(|G|^2) definitional convolution; reference implementation for small groups."""
    if f.group != g.group:
        raise GroupMismatch(f"convolving maps on {f.group} and {g.group}")
    G = f.group
    orders = np.array(G.orders)
    strides = np.array(G.strides)
    out = np.zeros(G.size, dtype=np.int64 if (f.exact and g.exact) else np.float64)
    c = G.coords
    for y in range(G.size):
        if f.values[y] == 0:
            continue
        xs = ((c[y] + c) % orders) @ strides
        np.add.at(out, xs, f.values[y] * g.values)
    return DensityMap(G, out, exact=f.exact and g.exact)


# -- set arithmetic -----------------------------------------------------------


def _check(a: GSet, b: GSet) -> None:
    if a.group != b.group:
        raise GroupMismatch(f"sets over {a.group} and {b.group}")


def sumset(a: GSet, b: GSet) -> GSet:
    _check(a, b)
    G = a.group
    if not a or not b:
        return GSet.empty(G)
    if len(a) > len(b):
        a, b = b, a
    if len(a) <= _DIRECT_SUPPORT * 4 or G.size <= 256:
        bg = b.grid
        out = np.zeros(G.shape, dtype=bool)
        for i in a.indices():
            out |= shift_grid(bg, G.coords[i])
        return GSet(G, out)
    return GSet(G, convolve_int(a.mask, b.mask, G) > 0)


def negate(a: GSet) -> GSet:
    return GSet(a.group, a.mask[a.group.neg_index])


def difference_set(a: GSet, b: GSet) -> GSet:
    return sumset(a, negate(b))


def translate(a: GSet, x: GroupElement) -> GSet:
    if x.group != a.group:
        raise GroupMismatch(f"translating a set over {a.group} by an element of {x.group}")
    return GSet(a.group, shift_grid(a.grid, x.coords))


def iterated_sumset(x: GSet, n: int) -> GSet:
    """nX = X + ... + X (n-fold), by binary doubling-and-add."""
    if n < 1:
        raise ValueError("n must be >= 1")
    result = None
    power = x
    while True:
        if n & 1:
            result = power if result is None else sumset(result, power)
        n >>= 1
        if not n:
            return result
        power = sumset(power, power)


@dataclass(frozen=True)
class GrowthProfile:
    base_size: int
    sizes: tuple[int, ...]  # sizes[n-1] = |nX|

    def size(self, n: int) -> int:
        return self.sizes[n - 1]

    @property
    def n_max(self) -> int:
        return len(self.sizes)


def growth_profile(x: GSet, n_max: int) -> GrowthProfile:
    sizes = []
    cur = x
    for n in range(1, n_max + 1):
        if n > 1:
            cur = sumset(cur, x)
        sizes.append(len(cur))
    return GrowthProfile(len(x), tuple(sizes))


# -- energy and friends -------------------------------------------------------


def difference_counts(a: GSet) -> np.ndarray:
    """r(s) = 1_A * 1_{-A}(s) = |A cap (s + A)|, as int64 over element indices."""
    return convolve_int(a.mask, a.mask[a.group.neg_index], a.group)


def energy(a: GSet) -> int:
    """Additive energy: number of (x, y, z) in A^3 with x + y - z in A."""
    if not a:
        return 0
    r = difference_counts(a)
    if len(a) ** 3 < 2**62:
        return int(np.dot(r, r))
    return sum(int(v) * int(v) for v in r)


def energy_bruteforce(a: GSet) -> int:
    """Definitional triple count; kept as a reference for small sets."""
    G = a.group
    orders = np.array(G.orders)
    strides = np.array(G.strides)
    c = G.coords[a.indices()]
    total = 0
    for x in c:
        s = (x + c[:, None, :] - c[None, :, :]) % orders
        total += int(a.mask[s @ strides].sum())
    return total


def doubling(a: GSet) -> Fraction:
    if not a:
        raise EmptySet("doubling of the empty set")
    return Fraction(len(sumset(a, a)), len(a))


def symmetry_set(a: GSet, eta) -> GSet:
    """Sym_eta(A) = {x : 1_A * 1_{-A}(x) >= eta |A|}, compared exactly."""
    if not a:
        raise EmptySet("symmetry set of the empty set")
    eta = as_fraction(eta)
    if not 0 < eta <= 1:
        raise BadThreshold(f"eta must lie in (0, 1], got {eta}")
    # r is integral, so r >= eta|A| iff r >= ceil(eta|A|); no overflow for huge denominators
    need = math.ceil(eta * len(a))
    return GSet(a.group, difference_counts(a) >= need)
