"""Structure finders: almost-periodicity sampling, growth checks, iteration and pipelines.

Every randomized procedure here only proposes; what it returns is re-verified
by exact computation before it leaves the function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    EmptyIntersection,
    EmptySet,
    EnergyTooSmall,
    NoCandidate,
    NoGoodTuples,
    NotSymmetric,
    PartialReport,
    StepLimit,
    CertificateError,
)
from .group import GroupElement, GSet
from .setops import (
    DensityMap,
    as_fraction,
    convolve_int,
    difference_counts,
    difference_set,
    doubling,
    energy,
    growth_profile,
    iterated_sumset,
    negate,
    shift_grid,
    sumset,
    translate,
)

FLOAT_SLACK = 1e-9
CONST_TUPLE_MAX = 2048


# -- Croot-Sisask ---------------------------------------------------------------


@dataclass(frozen=True)
class AlmostPeriodSet:
    x_set: GSet
    f_id: str
    p: float
    eps_requested: float
    eps_certified: float
    a_set: GSet
    sample_count: int
    seed: int
    trials: int
    good_tuples: int
    proposed: int
    discarded: int
    best_error: float


def _is_even_int(p) -> bool:
    return float(p).is_integer() and int(p) % 2 == 0


class _Translates:
    """Exact evaluation of ||tau_x g - g||_p / ||f||_p for g = f * mu_A."""

    def __init__(self, f: DensityMap, a: GSet, p: float):
        self.group = f.group
        self.p = p
        self.size_a = len(a)
        self.exact = f.exact and _is_even_int(p)
        if f.exact:
            self.g_int = convolve_int(f.values, a.mask, f.group).reshape(f.group.shape)
            self.g = self.g_int / self.size_a
        else:
            self.g_int = None
            self.g = np.fft.ifftn(np.fft.fftn(f.grid) * np.fft.fftn(a.grid)).real / self.size_a
        if self.exact:
            pi = int(p)
            self.f_pow = sum(int(v) ** pi for v in f.values if v)
        self.f_norm = f.lp_norm(p)

    def ratio(self, x_coords) -> float:
        diff = shift_grid(self.g, x_coords, sign=-1) - self.g
        if self.f_norm == 0:
            return 0.0
        return float(np.sum(np.abs(diff) ** self.p) ** (1 / self.p)) / self.f_norm

    def certify(self, x_coords, eps: float) -> tuple[bool, float]:
        """Exact comparison when f is integer-valued and p an even integer, else float with slack."""
        if self.exact:
            pi = int(self.p)
            diff = shift_grid(self.g_int, x_coords, sign=-1) - self.g_int
            nz = diff[diff != 0]
            num = sum(int(v) ** pi for v in nz)
            e = as_fraction(eps)
            ok = num * e.denominator**pi <= e.numerator**pi * self.size_a**pi * self.f_pow
            val = 0.0 if num == 0 else (num / (self.size_a**pi * self.f_pow)) ** (1 / pi)
            return ok, (min(val, eps) if ok else val)
        val = self.ratio(x_coords)
        return val + FLOAT_SLACK <= eps, val + FLOAT_SLACK


def certify_almost_periods(f: DensityMap, a: GSet, candidates: GSet, eps: float, p: float = 2) -> tuple[GSet, float]:
    """Keep the x in ``candidates`` with ||tau_x(f*mu_A) - f*mu_A||_p <= eps ||f||_p."""
    tr = _Translates(f, a, p)
    keep = np.zeros(a.group.size, dtype=bool)
    worst = 0.0
    for i in candidates.indices():
        ok, val = tr.certify(a.group.coords[i], eps)
        if ok:
            keep[i] = True
            worst = max(worst, val)
    return GSet(a.group, keep), worst


def croot_sisask(
    f: DensityMap,
    a: GSet,
    eps: float,
    p: float = 2,
    k: int = 8,
    trials: int = 200,
    seed: int = 0,
    f_id: str = "f",
    max_anchors: int = 32,
) -> AlmostPeriodSet:
    """Sample almost-periods of f * mu_A and return only the certified ones.

    A k-tuple z from A^k is good when (1/k) sum_i tau_{-z_i} f is within
    (eps/2) ||f||_p of f * mu_A. For each sampled good tuple z, every x with
    z + (x,...,x) still in A^k is proposed when that shifted tuple is good too;
    such x are translations moving f * mu_A by at most eps ||f||_p. The
    proposals are symmetrized, then each one is recertified exactly.
    """
    if not a:
        raise EmptySet("Croot-Sisask sampling from the empty set")
    if eps <= 0 or k < 1 or p < 1:
        raise ValueError("need eps > 0, k >= 1, p >= 1")
    G = a.group
    tr = _Translates(f, a, p)
    f_norm = tr.f_norm
    a_idx = a.indices()
    half = eps / 2
    best = math.inf
    proposed = np.zeros(G.size, dtype=bool)
    proposed[0] = True
    good = 0
    anchors = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        z = rng.choice(a_idx, size=k, replace=True)
        counts = np.bincount(z, minlength=G.size)
        if f.exact:
            approx = convolve_int(f.values, counts, G).reshape(G.shape) / k
        else:
            approx = np.fft.ifftn(np.fft.fftn(f.grid) * np.fft.fftn(counts.reshape(G.shape))).real / k
        err = _rel_err(approx, tr.g, p, f_norm)
        best = min(best, err)
        if err > half:
            continue
        good += 1
        if anchors >= max_anchors:
            continue
        anchors += 1
        shifts = np.ones(G.shape, dtype=bool)
        for zi in np.unique(z):
            shifts &= shift_grid(a.grid, G.coords[zi], sign=-1)
        for xi in np.flatnonzero(shifts.reshape(-1) & ~proposed):
            moved = shift_grid(approx, G.coords[xi])
            if _rel_err(moved, tr.g, p, f_norm) <= half:
                proposed[xi] = True
    # constant tuples (a,...,a) belong to A^k too; differences of good ones are diagonal shifts
    const_good = []
    if len(a_idx) <= CONST_TUPLE_MAX:
        fg = f.grid.astype(np.float64)
        for ai in a_idx:
            if _rel_err(shift_grid(fg, G.coords[ai]), tr.g, p, f_norm) <= half:
                const_good.append(ai)
    if const_good:
        cg = GSet.from_indices(G, const_good)
        proposed |= difference_set(cg, cg).mask
    if good == 0 and not const_good:
        raise NoGoodTuples(f"none of {trials} sampled {k}-tuples approximated f*mu_A within {half:g}", best)
    proposed_set = GSet(G, proposed)
    proposed_set = proposed_set | negate(proposed_set)
    keep = np.zeros(G.size, dtype=bool)
    worst = 0.0
    for i in proposed_set.indices():
        ok, val = tr.certify(G.coords[i], eps)
        if ok:
            keep[i] = True
            worst = max(worst, val)
    x_set = GSet(G, keep)
    # exact certification is symmetric in x; intersecting guards the float path
    x_set = x_set & negate(x_set)
    return AlmostPeriodSet(
        x_set=x_set,
        f_id=f_id,
        p=p,
        eps_requested=eps,
        eps_certified=worst,
        a_set=a,
        sample_count=k,
        seed=seed,
        trials=trials,
        good_tuples=good,
        proposed=len(proposed_set),
        discarded=len(proposed_set) - len(x_set),
        best_error=best,
    )


def _rel_err(u: np.ndarray, v: np.ndarray, p: float, norm: float) -> float:
    if norm == 0:
        return 0.0
    return float(np.sum(np.abs(u - v) ** p) ** (1 / p)) / norm


# -- growth theorems --------------------------------------------------------------


@dataclass(frozen=True)
class PlunneckeReport:
    doubling: Fraction
    base_size: int
    sizes: tuple[int, ...]
    slack: tuple[float, ...]  # |nA| / (K^n |A|), n = 1..n_max
    violations: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def plunnecke_check(a: GSet, n_max: int) -> PlunneckeReport:
    """Check |nA| <= K^n |A| exactly for 1 <= n <= n_max."""
    if not a:
        raise EmptySet("Plunnecke check on the empty set")
    K = doubling(a)
    prof = growth_profile(a, n_max)
    slack, bad = [], []
    for n in range(1, n_max + 1):
        bound = K**n * len(a)
        size = prof.size(n)
        slack.append(float(Fraction(size) / bound))
        if size > bound:
            bad.append(n)
    return PlunneckeReport(K, len(a), prof.sizes, tuple(slack), tuple(bad))


@dataclass(frozen=True)
class ChangReport:
    k: int
    base_size: int
    dilate_size: int  # |(3k+1)X|
    hypothesis_holds: bool
    sizes: tuple[int, ...]  # |nX| for n = 1..n_max
    slack: tuple[float, ...]  # |nX| / (n^k |X|) for n = 1..n_max; empty when hypothesis fails
    violations: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def chang_growth_test(x: GSet, k: int, n_max: int) -> ChangReport:
    """If X is symmetric with |(3k+1)X| < 2^k |X|, verify |nX| <= n^k |X| for n <= n_max."""
    if not x:
        raise EmptySet("Chang test on the empty set")
    if not x.is_symmetric():
        raise NotSymmetric("Chang's covering lemma needs a symmetric set")
    prof = growth_profile(x, max(n_max, 3 * k + 1))
    dil = prof.size(3 * k + 1)
    holds = dil < 2**k * len(x)
    slack, bad = [], []
    if holds:
        for n in range(1, n_max + 1):
            bound = n**k * len(x)
            slack.append(prof.size(n) / bound)
            if prof.size(n) > bound:
                bad.append(n)
    return ChangReport(k, len(x), dil, holds, prof.sizes[:n_max], tuple(slack), tuple(bad))


# -- Katz-Koester iteration ----------------------------------------------------------


@dataclass(frozen=True)
class KKStep:
    size: int  # |A''|
    sum_size: int  # |A + A''|
    M: float
    L: Fraction
    branch: int
    sym_size: int  # |S|
    x: GroupElement | None


@dataclass(frozen=True)
class IterationTrace:
    a_set: GSet
    eta: float
    K: Fraction
    R: float
    steps: tuple[KKStep, ...]
    a_prime: GSet
    final_sym_set: GSet
    final_eta_threshold: float
    terminated: bool = True


def katz_koester_iterate(a: GSet, eta: float, max_steps: int = 64) -> IterationTrace:
    """Downward induction on |A + A''| / |A| producing a large piece of Sym_{K^-eta}(A'' + A).

    S = {x : 1_{A''} * 1_{-A''}(x) >= |A''| / 2L}. If every x in S has
    1_B * 1_{-B}(x) >= R|B| for B = A + A'' with R = K^-eta, stop (case 1).
    Otherwise pass to A''' = A'' cap (x + A'') for the smallest violating x;
    then |A + A'''| < R |A + A''|, so M <- R M and L <- 2 L^2 (case 2).
    """
    if not a:
        raise EmptySet("Katz-Koester iteration on the empty set")
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    K = doubling(a)
    R = float(K) ** (-eta)
    cur = a
    M = float(K)
    L = K
    steps: list[KKStep] = []
    for _ in range(max_steps):
        r = difference_counts(cur)
        # r is integral: r >= |A''| / 2L  iff  r >= ceil(|A''| / 2L), with no int64 overflow as L grows
        S = GSet(a.group, r >= math.ceil(Fraction(len(cur)) / (2 * L)))
        B = sumset(a, cur)
        c = difference_counts(B)
        violators = S.mask & (c < R * len(B) * (1 - 1e-12))
        if not violators.any():
            steps.append(KKStep(len(cur), len(B), M, L, 1, len(S), None))
            return IterationTrace(a, eta, K, R, tuple(steps), cur, S, R)
        x = a.group.element(int(np.flatnonzero(violators)[0]))
        steps.append(KKStep(len(cur), len(B), M, L, 2, len(S), x))
        nxt = cur & translate(cur, x)
        if not nxt:
            raise EmptyIntersection(f"A'' cap (x + A'') is empty for x = {x}, although x lies in S")
        cur = nxt
        M = M * R
        L = 2 * L * L
    trace = IterationTrace(a, eta, K, R, tuple(steps), cur, GSet.empty(a.group), R, terminated=False)
    raise StepLimit(f"no case-1 termination within {max_steps} steps", trace)


# -- Lopez-Ross ------------------------------------------------------------------


def lopez_ross_inner(a: GSet) -> int:
    """<1_{A+A}, 1_A * 1_A>, which must equal |A|^2."""
    if not a:
        raise EmptySet("Lopez-Ross identity on the empty set")
    conv = convolve_int(a.mask, a.mask, a.group)
    inner = int(conv[sumset(a, a).mask].sum())
    if inner != len(a) ** 2:
        raise CertificateError(f"<1_(A+A), 1_A*1_A> = {inner} != |A|^2 = {len(a) ** 2}")
    return inner


# -- BSG extraction -------------------------------------------------------------------


@dataclass(frozen=True)
class BSGCertificate:
    size: int
    base_size: int
    doubling: Fraction
    delta: Fraction
    energy_ratio: Fraction  # E(A) / |A|^3
    size_exponent: float | None  # log(|A|/|A'|) / log(1/delta)
    doubling_exponent: float | None  # log(doubling) / log(1/delta)
    shifts: tuple[GroupElement, ...]
    candidates: int


def bsg_extract(a: GSet, delta, trials: int = 64, seed: int = 0) -> tuple[GSet, BSGCertificate]:
    """Pick a large subset with small doubling among the sets A cap (x + A) [cap (y + A)].

    Shifts are drawn with probability proportional to 1_A * 1_{-A}(x); each
    candidate A' is scored by |A'|^2 / |A' + A'|.
    """
    if not a:
        raise EmptySet("BSG extraction from the empty set")
    delta = as_fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    n = len(a)
    E = energy(a)
    if E * delta.denominator < delta.numerator * n**3:
        raise EnergyTooSmall(f"E(A) = {E} < delta |A|^3 = {float(delta) * n**3:g}")
    r = difference_counts(a).astype(np.float64)
    rng = np.random.default_rng(seed)
    draws = rng.choice(a.group.size, size=trials, p=r / r.sum()) if trials > 0 else np.array([], dtype=int)
    distinct = list(dict.fromkeys(int(v) for v in draws))
    G = a.group
    shifted = {i: a & translate(a, G.element(i)) for i in distinct}
    cands: list[tuple[GSet, tuple[int, ...]]] = [(shifted[i], (i,)) for i in distinct]
    pool = distinct[:16]
    for u in range(len(pool)):
        for v in range(u + 1, len(pool)):
            cands.append((shifted[pool[u]] & shifted[pool[v]], (pool[u], pool[v])))
    best = None
    for cand, shifts in cands:
        if len(cand) <= 1 and n > 1:
            continue
        dbl = len(sumset(cand, cand))
        score = Fraction(len(cand) ** 2, dbl)
        key = (score, len(cand))
        if best is None or key > best[0]:
            best = (key, cand, shifts, dbl)
    if best is None:
        raise NoCandidate(f"all {len(cands)} candidate intersections were trivial")
    _, cand, shifts, dbl = best
    dbl_ratio = Fraction(dbl, len(cand))
    log_inv = math.log(1 / float(delta)) if delta < 1 else None
    cert = BSGCertificate(
        size=len(cand),
        base_size=n,
        doubling=dbl_ratio,
        delta=delta,
        energy_ratio=Fraction(E, n**3),
        size_exponent=math.log(n / len(cand)) / log_inv if log_inv else None,
        doubling_exponent=math.log(dbl_ratio) / log_inv if log_inv else None,
        shifts=tuple(G.element(i) for i in shifts),
        candidates=len(cands),
    )
    return cand, cert


# -- end-to-end pipelines ---------------------------------------------------------------


@dataclass
class PipelineReport:
    variant: str
    a_set: GSet
    K: Fraction
    params: dict
    x_set: GSet
    y_set: GSet
    y_translate: GroupElement
    intersection: int  # |A cap Y|
    growth_order: float
    growth_sizes: tuple[int, ...]
    almost_periods: AlmostPeriodSet
    chang: ChangReport | None
    checks: dict = field(default_factory=dict)  # theorem checks: name -> bool
    extras: dict = field(default_factory=dict)

    @property
    def frac_of_a(self) -> float:
        return self.intersection / len(self.a_set)

    @property
    def frac_of_y(self) -> float:
        return self.intersection / len(self.y_set)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def best_translate(a: GSet, d: GSet) -> tuple[GroupElement, int]:
    """Translate t maximizing |A cap (t + D)|; smallest index among maximizers."""
    counts = convolve_int(a.mask, negate(d).mask, a.group)
    t = int(np.argmax(counts))
    return a.group.element(t), int(counts[t])


def _default_k(K: Fraction) -> int:
    return max(1, math.ceil(math.log2(float(K)))) if K > 1 else 1


def pipeline(
    a: GSet,
    variant: str = "basic",
    *,
    k: int | None = None,
    samples: int | None = None,
    trials: int = 64,
    seed: int = 0,
    eta: float | None = None,
    n_max: int = 8,
    r_max: int = 12,
) -> PipelineReport:
    """Run one of the structure arguments (basic, schoen, lp) on a concrete set.

    Stages: Croot-Sisask on the variant's function and set, then the translate
    Y of X - X richest in A, then growth of X (profile, order, Chang test at the
    smallest r with |(3r+1)X| < 2^r |X|). Variant-specific certificates are
    recorded in ``checks``.
    """
    if not a:
        raise EmptySet("pipeline on the empty set")
    if variant not in ("basic", "schoen", "lp"):
        raise ValueError(f"unknown variant {variant!r}")
    partial: dict = {"variant": variant}
    stage = "doubling"
    try:
        K = doubling(a)
        partial["K"] = K
        k = k or _default_k(K)
        extras: dict = {}
        checks: dict = {}
        stage = "setup"
        if variant == "basic":
            f, base, p = DensityMap.indicator(a), a, 2
            eps = 1 / (2 * k * math.sqrt(float(K)))
            f_id = "1_A"
        elif variant == "schoen":
            stage = "katz-koester"
            if eta is None:
                eta = 1 / math.sqrt(math.log(float(K))) if K > math.e else 1.0
                eta = min(eta, 1.0)
            trace = katz_koester_iterate(a, eta)
            extras["kk_steps"] = len(trace.steps)
            extras["kk_sym_size"] = len(trace.final_sym_set)
            extras["kk_a_prime_size"] = len(trace.a_prime)
            partial["trace"] = trace
            stage = "setup"
            f = DensityMap.indicator(sumset(a, trace.a_prime))
            base, p = trace.final_sym_set, 2
            eps = float(K) ** (-eta) / (2 * k)
            f_id = "1_(A+A')"
        else:
            f = DensityMap.indicator(sumset(a, a))
            # <tau_x 1_{A+A}, 1_A*1_A> = |A| <tau_x(1_{A+A} * mu_{-A}), 1_A>
            base = negate(a)
            p = math.ceil(math.log2(float(K))) + 1 if K > 1 else 2
            eps = 0.25
            f_id = "1_(A+A)"
        if samples is None:
            samples_used = int(min(4096, max(8, math.ceil(8 / eps**2))))
        else:
            samples_used = samples
        params = {"k": k, "samples": samples_used, "trials": trials, "seed": seed, "p": p, "eps": eps,
                  "eta": eta, "n_max": n_max, "r_max": r_max, "l": k * k * float(K)}
        partial["params"] = params

        stage = "croot-sisask"
        aps = croot_sisask(f, base, eps, p=p, k=samples_used, trials=trials, seed=seed, f_id=f_id)
        X = aps.x_set
        partial["x_set"] = X
        kX = iterated_sumset(X, k)

        stage = "certificates"
        if variant == "basic":
            aa = sumset(a, a)
            checks["kX_in_2A-2A"] = kX.issubset(difference_set(aa, aa))
        elif variant == "lp":
            conv = convolve_int(a.mask, a.mask, a.group)
            aa = sumset(a, a).mask.astype(np.int64)
            corr = convolve_int(aa, conv[a.group.neg_index], a.group)
            vals = corr[kX.indices()]
            extras["min_inner_over_kX"] = int(vals.min())
            checks["inner_ge_half_A2_on_kX"] = bool(np.all(2 * vals >= len(a) ** 2))

        stage = "translate"
        D = difference_set(X, X)
        t, inter = best_translate(a, D)
        Y = translate(D, t)

        stage = "growth"
        prof = growth_profile(X, n_max)
        d = max((math.log(prof.size(n) / len(X)) / math.log(n) for n in range(2, n_max + 1)), default=0.0)
        chang = None
        for r in range(1, r_max + 1):
            if len(iterated_sumset(X, 3 * r + 1)) < 2**r * len(X):
                chang = chang_growth_test(X, r, n_max)
                checks["chang_conclusion"] = chang.passed
                break
        extras["kX_size"] = len(kX)
    except PartialReport:
        raise
    except Exception as exc:
        raise PartialReport(stage, partial, exc) from exc
    return PipelineReport(
        variant=variant,
        a_set=a,
        K=K,
        params=params,
        x_set=X,
        y_set=Y,
        y_translate=t,
        intersection=inter,
        growth_order=max(d, 0.0),
        growth_sizes=prof.sizes,
        almost_periods=aps,
        chang=chang,
        checks=checks,
        extras=extras,
    )
