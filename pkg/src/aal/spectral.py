"""Fourier analysis on finite abelian groups: transforms, large spectra and Bohr sets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO

import numpy as np

from .errors import BadDelta, BadEps, EmptySet
from .group import ENUM_CAP, CharSet, GroupElement, GroupSpec, GSet, phase_numerators
from .setops import DensityMap, difference_counts, difference_set, iterated_sumset

LSPEC_TOL = 1e-9
BOHR_TOL = 1e-12
NAIVE_DFT_MAX = 4096


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients f^(gamma_t), indexed by dual coordinates t."""

    group: GroupSpec
    coefficients: np.ndarray

    def __getitem__(self, t) -> complex:
        return complex(self.coefficients[self.group.index(t)])

    def power(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2


def fourier(f: DensityMap, method: str = "fft") -> Spectrum:
    """f^(gamma) = sum_x f(x) conj(gamma(x)).

    ``method="naive"`` evaluates the character sums directly (|G| <= 4096) and
    serves as the reference for the FFT path.
    """
    G = f.group
    G.check_cap(ENUM_CAP)
    if method == "fft":
        coeffs = np.fft.fftn(f.grid.astype(np.complex128)).reshape(-1)
    elif method == "naive":
        coeffs = _naive_dft(f)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Spectrum(G, coeffs)


def _naive_dft(f: DensityMap) -> np.ndarray:
    G = f.group
    if G.size > NAIVE_DFT_MAX:
        raise ValueError(f"naive DFT limited to |G| <= {NAIVE_DFT_MAX}")
    E = G.exponent
    unit = np.exp(-2j * np.pi * np.arange(E) / E)
    vals = f.values.astype(np.complex128)
    out = np.empty(G.size, dtype=np.complex128)
    chunk = max(1, 2**20 // G.size)
    for start in range(0, G.size, chunk):
        ts = G.coords[start:start + chunk]
        ph = np.atleast_2d(phase_numerators(G, ts))
        out[start:start + chunk] = unit[ph] @ vals
    return out


def inverse_fourier(s: Spectrum) -> DensityMap:
    """f(x) = |G|^-1 sum_gamma f^(gamma) gamma(x); imaginary parts are discarded."""
    vals = np.fft.ifftn(s.coefficients.reshape(s.group.shape)).reshape(-1)
    return DensityMap(s.group, vals.real, exact=False)


def spectrum_to_csv(s: Spectrum, stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([f"t{i}" for i in range(s.group.rank)] + ["re", "im", "abs2"])
    for i, c in enumerate(s.coefficients):
        t = s.group.coords[i]
        w.writerow([*map(int, t), repr(float(c.real)), repr(float(c.imag)), repr(float(abs(c) ** 2))])


# -- large spectrum ----------------------------------------------------------


def large_spectrum(a: GSet, eps: float) -> CharSet:
    """LSpec(A, eps) via the closed form 2(1 - |1_A^(gamma)|^2 / |A|^2) <= eps^2."""
    if not a:
        raise EmptySet("large spectrum of the empty set")
    if not 0 < eps <= 1:
        raise BadEps(f"eps must lie in (0, 1], got {eps}")
    power = fourier(DensityMap.indicator(a)).power()
    dist2 = 2.0 * (1.0 - power / float(len(a)) ** 2)
    return CharSet(a.group, dist2 <= eps * eps + LSPEC_TOL)


def l2_distance_sq(a: GSet, t) -> float:
    """||1 - gamma_t||^2 in L^2(mu_A * mu_{-A}), summed from the definition."""
    G = a.group
    nu = difference_counts(a).astype(np.float64) / float(len(a)) ** 2
    ph = phase_numerators(G, G.reduce(t))
    gamma = np.exp(2j * np.pi * ph / G.exponent)
    return float(np.sum(nu * np.abs(1 - gamma) ** 2))


# -- Bohr sets ----------------------------------------------------------------


@dataclass(frozen=True)
class BohrSpec:
    gamma_set: CharSet
    delta: float

    def __post_init__(self):
        if not 0 < self.delta <= 2:
            raise BadDelta(f"delta must lie in (0, 2], got {self.delta}")

    def members(self) -> GSet:
        return bohr_set(self.gamma_set, self.delta)


def unit_distance_table(exponent: int) -> np.ndarray:
    """|e(k/E) - 1| = 2 sin(pi k / E) for k = 0..E-1."""
    k = np.arange(exponent)
    return 2.0 * np.sin(np.pi * k / exponent)


def bohr_radius_numerator(exponent: int, delta: float) -> int:
    """Largest m in [0, E/2] with 2 sin(pi m / E) <= delta (+ tolerance).

    A centred phase j/E satisfies |e(j/E) - 1| <= delta iff |j| <= m.
    """
    table = unit_distance_table(exponent)[: exponent // 2 + 1]
    ok = np.flatnonzero(table <= delta + BOHR_TOL)
    return int(ok.max())


def bohr_set(gamma_set: CharSet, delta: float) -> GSet:
    """Bohr(Gamma, delta) = {x : |gamma(x) - 1| <= delta for all gamma in Gamma}."""
    BohrSpec(gamma_set, delta)
    G = gamma_set.group
    E = G.exponent
    ok = unit_distance_table(E) <= delta + BOHR_TOL
    alive = np.arange(G.size)
    for t in gamma_set.dual_coords():
        if not alive.size:
            break
        ph = phase_numerators(G, t, alive)
        alive = alive[ok[ph]]
    return GSet.from_indices(G, alive)


def kernel(gamma_set: CharSet) -> GSet:
    """{x : gamma(x) = 1 for all gamma in Gamma}, from exact phases."""
    G = gamma_set.group
    alive = np.arange(G.size)
    for t in gamma_set.dual_coords():
        alive = alive[phase_numerators(G, t, alive) == 0]
    return GSet.from_indices(G, alive)


def min_nonzero_distance(g: GroupSpec) -> float:
    """Smallest nonzero value of |gamma(x) - 1| over the group."""
    return float(2.0 * math.sin(math.pi / g.exponent)) if g.exponent > 1 else 2.0


# -- theorem checks ------------------------------------------------------------


@dataclass(frozen=True)
class CertifiedCheck:
    passed: bool
    l: int
    eps: float
    doubling_ratio: Fraction  # K = |lX| / |(l-1)X|
    delta: float
    lspec_size: int
    bohr_size: int
    difference_set_size: int
    violation: GroupElement | None = None


def check_prop_containment(x: GSet, l: int, eps: float) -> CertifiedCheck:
    """Verify X - X is contained in Bohr(LSpec(lX, eps), 2 eps sqrt(2K)) exhaustively."""
    if not x:
        raise EmptySet("containment check on the empty set")
    if l < 1:
        raise ValueError("l must be a positive integer")
    lx = iterated_sumset(x, l)
    prev = len(iterated_sumset(x, l - 1)) if l > 1 else 1
    K = Fraction(len(lx), prev)
    delta = 2 * eps * math.sqrt(2 * float(K))
    spec = large_spectrum(lx, eps)
    # |gamma(x) - 1| <= 2 always, so a radius beyond 2 imposes nothing
    bohr = bohr_set(spec, min(delta, 2.0))
    diff = difference_set(x, x)
    bad = diff.without(bohr)
    return CertifiedCheck(
        passed=not bad,
        l=l,
        eps=eps,
        doubling_ratio=K,
        delta=delta,
        lspec_size=len(spec),
        bohr_size=len(bohr),
        difference_set_size=len(diff),
        violation=bad.min_element() if bad else None,
    )


@dataclass(frozen=True)
class BohrMeasurement:
    ratio: float
    bohr_size: int
    set_size: int
    lspec_size: int
    growth_order: float
    growth_sizes: tuple[int, ...]


def measure_bohr_size(x: GSet, eps: float, n_max: int = 8) -> BohrMeasurement:
    """|Bohr(LSpec(X, eps), 1/2pi)| / |X|, reported next to the growth order of X."""
    from .progressions import growth_order

    spec = large_spectrum(x, eps)
    bohr = bohr_set(spec, 1 / (2 * math.pi))
    d, prof = growth_order(x, n_max)
    return BohrMeasurement(
        ratio=len(bohr) / len(x),
        bohr_size=len(bohr),
        set_size=len(x),
        lspec_size=len(spec),
        growth_order=d,
        growth_sizes=prof.sizes,
    )
