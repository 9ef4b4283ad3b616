"""Acceptance criteria 1-12, one test each; every test records a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest
(the lines are printed in the terminal summary).
"""

from __future__ import annotations

import math
import statistics
import time
from fractions import Fraction

import numpy as np
import pytest

from aal.experiments import ExperimentConfig, all_group_presentations, replay, run_experiment, run_sweep
from aal.generators import gen_ap, gen_random_subset
from aal.group import CharSet, GroupSpec, GSet, is_coset, parse_set, subgroup_generated
from aal.progressions import bohr_to_progression, check_bohr_hypothesis
from aal.setops import (
    DensityMap,
    convolve_naive,
    difference_set,
    energy,
    energy_bruteforce,
    iterated_sumset,
    negate,
    sumset,
    translate,
)
from aal.spectral import bohr_set, check_prop_containment, fourier
from aal.structure import croot_sisask, lopez_ross_inner, pipeline
from aal.errors import NoGoodTuples

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def all_masks(size: int) -> np.ndarray:
    return ((np.arange(1, 2**size, dtype=np.int64)[:, None] >> np.arange(size)) & 1).astype(bool)


# 1 -------------------------------------------------------------------------------


def crit_coset_law():
    t0 = time.perf_counter()
    sets = mismatches = 0
    for g in all_group_presentations(12):
        for row in all_masks(g.size):
            a = GSet(g, row)
            sets += 1
            if (energy(a) == len(a) ** 3) != is_coset(a):
                mismatches += 1
    dt = time.perf_counter() - t0
    return mismatches == 0 and dt < 60, f"{sets} sets over 21 presentations, {mismatches} mismatches, {dt:.1f}s"


def test_criterion_01_coset_law():
    record(1, *crit_coset_law())


# 2 -------------------------------------------------------------------------------


def crit_ap_energy():
    g = GroupSpec((1000,))
    bad = [n for n in range(1, 31) if energy(gen_ap(g, 0, 1, n)) != energy_bruteforce(gen_ap(g, 0, 1, n))]
    r100 = energy(gen_ap(g, 0, 1, 100)) / 100**3
    return not bad and 0.66 <= r100 <= 0.675, f"exact for n<=30 (mismatches {bad}); E/n^3 at n=100 = {r100:.5f}"


def test_criterion_02_ap_energy():
    record(2, *crit_ap_energy())


# 3 -------------------------------------------------------------------------------


def crit_random_energy():
    h = GSet.full(GroupSpec((2,) * 9))
    delta = 1 / 8
    ratios = [energy(a) / len(a) ** 3 for a in (gen_random_subset(h, delta, s) for s in range(20))]
    med = statistics.median(ratios)
    return delta / 2 <= med <= 2 * delta, f"median E/|A|^3 over 20 seeds = {med:.4f} (band [{delta / 2}, {2 * delta}])"


def test_criterion_03_random_energy():
    record(3, *crit_random_energy())


# 4 -------------------------------------------------------------------------------


def crit_plunnecke():
    records = violations = 0
    for n in (9, 10):
        res = run_sweep(ExperimentConfig(f"Z{n}", {"class": "all_subsets"}, {"name": "plunnecke", "n_max": 4}))
        records += len(res.records)
        violations += res.failures
    return violations == 0 and records == 511 + 1023, f"{records} sets in Z9 and Z10, {violations} violations"


def test_criterion_04_plunnecke():
    record(4, *crit_plunnecke())


# 5 -------------------------------------------------------------------------------


def crit_chang():
    res = run_sweep(ExperimentConfig("Z13", {"class": "symmetric_subsets"}, {"name": "chang", "k": 2, "n_max": 10}))
    hyp = sum(r.measured["hypothesis"] for r in res.records)
    return res.failures == 0, f"{len(res.records)} symmetric sets, {hyp} satisfy the hypothesis, {res.failures} violations"


def test_criterion_05_chang():
    record(5, *crit_chang())


# 6 -------------------------------------------------------------------------------


def crit_spectral():
    rng = np.random.default_rng(2024)
    shapes = [(4096,), (64, 64), (2,) * 12, (16, 16, 16), (211,), (3, 5, 7), (1000,), (9, 9, 9)]
    worst = 0.0
    for i in range(200):
        g = GroupSpec(shapes[i % len(shapes)])
        a = GSet(g, rng.random(g.size) < rng.uniform(0.005, 0.6))
        if not a:
            a = GSet.from_indices(g, [0])
        lhs = energy(a) * g.size
        rhs = float(np.sum(fourier(DensityMap.indicator(a)).power() ** 2))
        worst = max(worst, abs(lhs - rhs) / lhs)
    return worst <= 1e-6, f"200 instances, worst relative error {worst:.2e}"


def test_criterion_06_spectral_oracle():
    record(6, *crit_spectral())


# 7 -------------------------------------------------------------------------------


def crit_lopez_ross():
    z8 = GroupSpec((8,))
    bad = sum(lopez_ross_inner(GSet(z8, m)) != int(m.sum()) ** 2 for m in all_masks(8))
    rng = np.random.default_rng(7)
    for i in range(500):
        g = GroupSpec([(97,), (12, 10), (2,) * 8, (5, 5, 5), (300,)][i % 5])
        a = GSet(g, rng.random(g.size) < rng.uniform(0.01, 0.7))
        if a:
            bad += lopez_ross_inner(a) != len(a) ** 2
    return bad == 0, f"255 subsets of Z8 + 500 random sets, {bad} mismatches"


def test_criterion_07_lopez_ross():
    record(7, *crit_lopez_ross())


# 8 -------------------------------------------------------------------------------


def _independent_ratio(f: DensityMap, a: GSet, x, p: float) -> float:
    """||tau_x(f*mu_A) - f*mu_A||_p / ||f||_p via naive convolution and explicit index shifts."""
    g = convolve_naive(f.as_float(), DensityMap.uniform(a)).values
    G = a.group
    moved = g[[(G.element(y) + x).index for y in range(G.size)]]
    return float(np.sum(np.abs(moved - g) ** p) ** (1 / p) / np.sum(np.abs(f.values.astype(float)) ** p) ** (1 / p))


def crit_croot_sisask():
    rng = np.random.default_rng(8)
    checked = failures = runs = 0
    for i in range(40):
        g = GroupSpec([(60,), (6, 8), (2,) * 6, (3, 3, 5)][i % 4])
        a = GSet(g, rng.random(g.size) < 0.3) | GSet.from_indices(g, [0])
        f_set = a if i % 2 else sumset(a, a)
        p = [2, 4, 3][i % 3]
        eps = [0.8, 1.2, 1.6][i % 3]
        f = DensityMap.indicator(f_set)
        try:
            res = croot_sisask(f, a, eps, p=p, k=4, trials=40, seed=i)
        except NoGoodTuples:
            continue
        runs += 1
        for x in res.x_set:
            checked += 1
            if _independent_ratio(f, a, x, p) > res.eps_certified + 1e-9:
                failures += 1
    subgroup_ok = True
    for shape, gens in [((12,), "{3}"), ((4, 6), "{(2,0),(0,3)}"), ((2,) * 5, "{(1,0,0,0,0),(0,1,1,0,0)}")]:
        g = GroupSpec(shape)
        h = subgroup_generated(parse_set(g, gens))
        res = croot_sisask(DensityMap.indicator(h), h, 0.5, k=8, trials=50, seed=0)
        subgroup_ok &= h <= res.x_set and res.eps_certified == 0
    ok = failures == 0 and checked > 0 and subgroup_ok
    return ok, f"{runs} runs, {checked} almost-periods recertified, {failures} failures; subgroup X contains H with eps 0: {subgroup_ok}"


def test_criterion_08_croot_sisask():
    record(8, *crit_croot_sisask())


# 9 -------------------------------------------------------------------------------


def crit_containment():
    rng = np.random.default_rng(9)
    fails = 0
    for i in range(100):
        n = int(rng.integers(5, 212))
        g = GroupSpec((n,))
        size = int(rng.integers(1, min(n, 25) + 1))
        x = GSet.from_indices(g, rng.choice(n, size, replace=False))
        eps = (0.3, 0.5)[i % 2]
        fails += not check_prop_containment(x, 2, eps).passed
    return fails == 0, f"100 instances on Z/N with N <= 211, l = 2, eps in {{0.3, 0.5}}: {fails} failures"


def test_criterion_09_containment():
    record(9, *crit_containment())


# 10 ------------------------------------------------------------------------------


BOHR_FAMILIES = [
    ("Z1009", [1]), ("Z2003", [1]), ("Z2003", [2]), ("Z2003", [1, 2]), ("Z2048", [1]), ("Z2048", [2]),
    ("Z3001", [1, 5]), ("Z1500", [1, 3]), ("Z4001", [3]), ("Z5003", [7]),
    ("Z2xZ2003", [(1, 0), (0, 1)]), ("Z2xZ2003", [(0, 1)]), ("Z3xZ1000", [(1, 1)]), ("Z3xZ1000", [(0, 1)]),
    ("Z4xZ1001", [(2, 1)]), ("Z5xZ999", [(0, 1), (0, 2)]), ("Z2xZ2048", [(1, 2)]), ("Z7xZ701", [(1, 1)]),
    ("Z10xZ400", [(1, 1)]), ("Z2xZ3001", [(1, 3)]), ("Z6xZ700", [(0, 1)]), ("Z3xZ1000", [(1, 1), (0, 1)]),
]


def crit_bohr_progression():
    from aal.group import parse_group

    tested = fails = 0
    kinds = set()
    for spec, ts in BOHR_FAMILIES:
        g = parse_group(spec)
        gam = CharSet.of(g, ts)
        for d in range(1, 8):
            for frac in (0.95, 0.7, 0.45):
                delta = frac / (4 * (3 * d + 1))
                ok, small, _ = check_bohr_hypothesis(gam, delta, d)
                if not ok or small < 2:
                    continue
                prog, cert = bohr_to_progression(gam, delta, d)
                tested += 1
                kinds.add(g.rank)
                if not (cert.passed and prog.members() == bohr_set(gam, delta)):
                    fails += 1
    ok = tested >= 20 and fails == 0 and kinds == {1, 2}
    return ok, f"{tested} hypothesis-passing instances (cyclic and 2-factor), {fails} equality failures"


def test_criterion_10_bohr_progression():
    record(10, *crit_bohr_progression())


# 11 ------------------------------------------------------------------------------


def crit_pipeline():
    notes = []
    ok = True
    for shape, gens in [((12,), "{3}"), ((2, 8), "{(1,0),(0,2)}")]:
        g = GroupSpec(shape)
        h = subgroup_generated(parse_set(g, gens))
        for variant in ("basic", "schoen", "lp"):
            r = pipeline(h, variant, seed=0)
            good = r.intersection == len(h) == len(r.y_set) and r.growth_order == 0
            ok &= good
            if not good:
                notes.append(f"{variant} on {g} failed")
    a = gen_ap(GroupSpec((10**4,)), 0, 1, 50)
    r = pipeline(a, "lp", seed=2)
    ap_ok = r.frac_of_y >= 0.1 and r.growth_order <= 2
    ok &= ap_ok
    notes.append(f"AP(50) lp: |A cap Y|/|Y| = {r.frac_of_y:.3f}, growth order {r.growth_order:.3f}")
    emitted = 0
    for variant, a2 in [("basic", gen_random_subset(GSet.full(GroupSpec((2,) * 8)), 0.25, 0)),
                        ("basic", a), ("basic", subgroup_generated(parse_set(GroupSpec((12,)), "{3}")))]:
        r = pipeline(a2, variant, seed=0)
        if "kX_in_2A-2A" in r.checks:
            emitted += 1
            aa = sumset(a2, a2)
            truth = iterated_sumset(r.x_set, r.params["k"]) <= difference_set(aa, aa)
            ok &= r.checks["kX_in_2A-2A"] == truth is True
    notes.append(f"kX in 2A-2A verified on {emitted} emitted reports")
    return ok, "; ".join(notes)


def test_criterion_11_pipeline():
    record(11, *crit_pipeline())


# 12 ------------------------------------------------------------------------------


def crit_determinism(tmp_dir):
    import os

    configs = [
        ExperimentConfig("Z2^7", {"class": "random_subset", "delta": 0.3, "count": 6},
                         {"name": "croot_sisask", "eps": 1.0, "k": 3, "trials": 20}, seed=11, name="cs"),
        ExperimentConfig("Z97", {"class": "random", "count": 8, "density": 0.2},
                         {"name": "pipeline", "variant": "lp", "trials": 16}, seed=3, name="pipe"),
        ExperimentConfig("Z2^6", {"class": "random", "count": 6, "density": 0.4},
                         {"name": "bohr_progression", "delta": 0.3, "d": 1}, seed=5, name="bohr"),
    ]
    identical = True
    old = os.environ.get("AAL_THREADS")
    try:
        for c in configs:
            os.environ["AAL_THREADS"] = "1"
            res, _ = run_experiment(c, tmp_dir)
            first = (tmp_dir / f"{c.name}.csv").read_text()
            os.environ["AAL_THREADS"] = "3"
            again = replay((tmp_dir / f"{c.name}.json").read_text()).to_csv()
            identical &= first == again == res.to_csv()
    finally:
        if old is None:
            os.environ.pop("AAL_THREADS", None)
        else:
            os.environ["AAL_THREADS"] = old
    return identical, f"{len(configs)} seeded experiments replayed from their JSON: CSV byte-identical = {identical}"


def test_criterion_12_determinism(tmp_path):
    record(12, *crit_determinism(tmp_path))


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    checks = [crit_coset_law, crit_ap_energy, crit_random_energy, crit_plunnecke, crit_chang, crit_spectral,
              crit_lopez_ross, crit_croot_sisask, crit_containment, crit_bohr_progression, crit_pipeline]
    for i, fn in enumerate(checks, 1):
        ok, detail = fn()
        print(f"{'PASS' if ok else 'FAIL'} criterion {i}: {detail}")
    with tempfile.TemporaryDirectory() as d:
        ok, detail = crit_determinism(Path(d))
        print(f"{'PASS' if ok else 'FAIL'} criterion 12: {detail}")
