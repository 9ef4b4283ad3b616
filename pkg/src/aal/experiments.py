"""Experiment configs, sweeps over instance domains, and CSV/JSON reports.

A config names a group, a domain of instances (exhaustive, random or one of
the generators) and an operation applied to each instance.  Every operation
returns measured quantities plus a pass flag; the sweep's exit code is
nonzero iff some check failed.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import generators as gen
from .errors import AALError, ConfigError, ParseError
from .group import CharSet, GroupElement, GroupSpec, GSet, is_coset, parse_group, parse_set, subgroup_generated
from .progressions import bohr_to_progression, check_bohr_hypothesis
from .setops import DensityMap, energy, iterated_sumset
from .spectral import check_prop_containment, fourier
from .structure import (
    certify_almost_periods,
    chang_growth_test,
    croot_sisask,
    lopez_ross_inner,
    pipeline,
    plunnecke_check,
)

log = logging.getLogger(__name__)


# -- serialization -------------------------------------------------------------


def to_jsonable(obj: Any) -> Any:
    """Convert library values to plain JSON types (sets become literals, fractions strings)."""
    if isinstance(obj, GSet):
        return obj.to_literal()
    if isinstance(obj, GroupElement):
        return list(obj.coords) if obj.group.rank > 1 else obj.coords[0]
    if isinstance(obj, GroupSpec):
        return str(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _cell(v: Any) -> str:
    v = to_jsonable(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


# -- config ----------------------------------------------------------------------


DOMAIN_CLASSES = (
    "all_subsets",
    "symmetric_subsets",
    "random",
    "sets",
    "random_subset",
    "independent_cosets",
    "internally_independent",
    "ap",
    "near_coset",
)


@dataclass(frozen=True)
class ExperimentConfig:
    group: str
    domain: dict
    operation: dict
    seed: int = 0
    name: str = "experiment"
    out_dir: str | None = None

    def __post_init__(self):
        try:
            parse_group(self.group)
        except ParseError as e:
            raise ConfigError(f"field 'group': {e}") from None
        if not isinstance(self.domain, dict) or self.domain.get("class") not in DOMAIN_CLASSES:
            raise ConfigError(f"field 'domain.class': expected one of {', '.join(DOMAIN_CLASSES)}")
        if not isinstance(self.operation, dict) or self.operation.get("name") not in OPERATIONS:
            raise ConfigError(f"field 'operation.name': expected one of {', '.join(sorted(OPERATIONS))}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("field 'seed': expected an integer")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        extra = sorted(set(obj) - names)
        if extra:
            raise ConfigError(f"field '{extra[0]}': unknown config field")
        for req in ("group", "domain", "operation"):
            if req not in obj:
                raise ConfigError(f"field '{req}': missing")
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
        if isinstance(obj, dict) and "config" in obj and "records" in obj:
            obj = obj["config"]  # a full report replays its own config
        return cls.from_dict(obj)

    @property
    def group_spec(self) -> GroupSpec:
        return parse_group(self.group)


# -- domains -----------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    instance_id: int
    descriptor: str
    a_set: GSet
    seed: int


def _param(spec: dict, key: str, default=None, where: str = "domain"):
    if key in spec:
        return spec[key]
    if default is None:
        raise ConfigError(f"field '{where}.{key}': missing")
    return default


def _parse_field(g: GroupSpec, text: str, where: str) -> GSet:
    try:
        return parse_set(g, text)
    except (ParseError, ValueError) as e:
        raise ConfigError(f"field '{where}': {e}") from None


def _mask_filter(spec: dict) -> Callable[[GSet], bool]:
    lo = spec.get("min_size", 1)
    hi = spec.get("max_size", math.inf)
    ratio = spec.get("min_energy_ratio")

    def keep(a: GSet) -> bool:
        n = len(a)
        if not lo <= n <= hi:
            return False
        return ratio is None or energy(a) >= Fraction(str(ratio)) * n**3

    return keep


def _all_subsets(g: GroupSpec, spec: dict):
    if g.size > 20:
        raise ConfigError(f"field 'domain.class': exhaustive sweep over |G| = {g.size} > 20")
    keep = _mask_filter(spec)
    bits = (np.arange(1, 2**g.size, dtype=np.int64)[:, None] >> np.arange(g.size)) & 1
    for row in bits.astype(bool):
        a = GSet(g, row)
        if keep(a):
            yield a


def _symmetric_subsets(g: GroupSpec, spec: dict):
    neg = g.neg_index
    orbits = sorted({tuple(sorted({i, int(neg[i])})) for i in range(g.size)})
    if len(orbits) > 20:
        raise ConfigError(f"field 'domain.class': {len(orbits)} orbits is too many to enumerate")
    keep = _mask_filter(spec)
    for bits in range(1, 2 ** len(orbits)):
        mask = np.zeros(g.size, dtype=bool)
        for j, orb in enumerate(orbits):
            if bits >> j & 1:
                mask[list(orb)] = True
        a = GSet(g, mask)
        if keep(a):
            yield a


def _coset_param(g: GroupSpec, spec: dict) -> GSet:
    if "h" not in spec:
        return GSet.full(g)
    return subgroup_generated(_parse_field(g, spec["h"], "domain.h"))


def build_domain(cfg: ExperimentConfig) -> list[Instance]:
    g = cfg.group_spec
    spec = cfg.domain
    kind = spec["class"]
    out: list[Instance] = []

    def push(a: GSet, desc: str | None = None, seed: int = cfg.seed):
        out.append(Instance(len(out), desc or a.to_literal(), a, seed))

    if kind == "all_subsets":
        for a in _all_subsets(g, spec):
            push(a)
    elif kind == "symmetric_subsets":
        for a in _symmetric_subsets(g, spec):
            push(a)
    elif kind == "sets":
        for i, text in enumerate(_param(spec, "sets")):
            push(_parse_field(g, text, f"domain.sets[{i}]"))
    elif kind == "random":
        count = int(_param(spec, "count"))
        density = float(spec.get("density", 0.5))
        keep = _mask_filter(spec)
        for i in range(count):
            rng = np.random.default_rng([cfg.seed, i])
            a = GSet(g, rng.random(g.size) < density)
            if a and keep(a):
                push(a, seed=cfg.seed + i)
    else:
        count = int(spec.get("count", 1))
        for i in range(count):
            s = cfg.seed + i
            try:
                a = _generate(g, kind, spec, s)
            except AALError as e:
                raise ConfigError(f"field 'domain': generator {kind} failed: {e}") from None
            if a:
                push(a, f"{kind}(seed={s})", seed=s)
    return out


def _generate(g: GroupSpec, kind: str, spec: dict, seed: int) -> GSet:
    if kind == "random_subset":
        return gen.gen_random_subset(_coset_param(g, spec), float(_param(spec, "delta")), seed)
    if kind == "independent_cosets":
        return gen.gen_independent_cosets(g, _parse_field(g, spec.get("h", "{}"), "domain.h"), int(_param(spec, "k")), seed)
    if kind == "internally_independent":
        return gen.gen_internally_independent([GroupSpec((n,)) for n in g.orders], int(_param(spec, "k")))[1]
    if kind == "ap":
        return gen.gen_ap(g, _param(spec, "start", 0), _param(spec, "step"), int(_param(spec, "length")))
    if kind == "near_coset":
        return gen.gen_near_coset(_coset_param(g, spec), float(_param(spec, "eps")), float(_param(spec, "eta")), seed)
    raise ConfigError(f"field 'domain.class': unknown generator {kind!r}")


# -- operations ---------------------------------------------------------------------


def _op_energy(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    e = energy(a)
    return {"size": len(a), "energy": e, "ratio": e / len(a) ** 3}, True


def _op_coset_law(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    e = energy(a)
    full = e == len(a) ** 3
    coset = is_coset(a)
    return {"size": len(a), "energy": e, "energy_is_cube": full, "is_coset": coset}, full == coset


def _op_plunnecke(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    r = plunnecke_check(a, int(p.get("n_max", 4)))
    return {"size": len(a), "doubling": r.doubling, "max_slack": max(r.slack), "violations": len(r.violations)}, r.passed


def _op_chang(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    r = chang_growth_test(a, int(p.get("k", 2)), int(p.get("n_max", 10)))
    return {
        "size": len(a),
        "dilate_size": r.dilate_size,
        "hypothesis": r.hypothesis_holds,
        "violations": len(r.violations),
    }, r.passed


def _op_lopez_ross(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    v = lopez_ross_inner(a)
    return {"size": len(a), "inner": v}, v == len(a) ** 2


def _op_spectral_energy(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    e = energy(a)
    s = float(np.sum(fourier(DensityMap.indicator(a)).power() ** 2))
    lhs = e * a.group.size
    rel = abs(s - lhs) / lhs
    return {"size": len(a), "energy": e, "fourier_sum": s, "rel_error": rel}, rel <= float(p.get("tol", 1e-6))


def _op_containment(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    c = check_prop_containment(a, int(p.get("l", 2)), float(p.get("eps", 0.5)))
    return {
        "size": len(a),
        "K": c.doubling_ratio,
        "delta": c.delta,
        "lspec_size": c.lspec_size,
        "bohr_size": c.bohr_size,
        "diff_size": c.difference_set_size,
    }, c.passed


def _op_croot_sisask(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    eps = float(p.get("eps", 0.5))
    lp = p.get("p", 2)
    f = DensityMap.indicator(a)
    res = croot_sisask(f, a, eps, p=lp, k=int(p.get("k", 8)), trials=int(p.get("trials", 64)), seed=seed)
    again, _ = certify_almost_periods(f, a, res.x_set, eps, p=lp)
    return {"size": len(a), "x_size": len(res.x_set), "eps_certified": res.eps_certified}, again == res.x_set


def _op_pipeline(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    r = pipeline(a, p.get("variant", "basic"), trials=int(p.get("trials", 64)), seed=seed)
    return {
        "size": len(a),
        "K": r.K,
        "x_size": len(r.x_set),
        "y_size": len(r.y_set),
        "intersection": r.intersection,
        "growth_order": r.growth_order,
    }, r.passed


def _subgroups(g: GroupSpec) -> list[GSet]:
    """All subgroups, by closing under one extra generator at a time."""
    seen = {GSet.from_indices(g, [0])}
    frontier = list(seen)
    while frontier:
        nxt = []
        for h in frontier:
            for i in h.complement().indices():
                s = subgroup_generated(h | GSet.from_indices(g, [int(i)]))
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), s.indices().tolist()))


def coset_distance(a: GSet) -> tuple[int, GSet]:
    """min |A symdiff C| over all cosets C, with a witnessing coset (first in a fixed order)."""
    g = a.group
    best = (math.inf, None)
    orders = np.array(g.orders)
    for h in _subgroups(g):
        h_coords = g.coords[h.indices()]
        seen = np.zeros(g.size, dtype=bool)
        for t in range(g.size):
            if seen[t]:
                continue
            coset = ((g.coords[t] + h_coords) % orders) @ np.array(g.strides)
            seen[coset] = True
            d = len(a) + len(h) - 2 * int(a.mask[coset].sum())
            if d < best[0]:
                best = (d, GSet.from_indices(g, coset))
    return int(best[0]), best[1]


def _op_coset_distance(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    d, c = coset_distance(a)
    bound = math.ceil(len(a) / 3)
    e = energy(a)
    return {
        "size": len(a),
        "energy_ratio": e / len(a) ** 3,
        "distance": d,
        "distance_ratio": d / len(a),
        "nearest_coset": c,
    }, d <= bound


def _op_bohr_progression(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    gamma = CharSet(a.group, a.mask)
    delta = float(p["delta"])
    d = int(p["d"])
    ok, small, big = check_bohr_hypothesis(gamma, delta, d)
    if not ok:
        return {"size": len(a), "hypothesis": False, "bohr_size": small, "progression_size": -1, "dimension": -1}, True
    _, cert = bohr_to_progression(gamma, delta, d)
    return {
        "size": len(a),
        "hypothesis": True,
        "bohr_size": cert.bohr_size,
        "progression_size": cert.progression_size,
        "dimension": cert.dimension,
    }, cert.passed


def _op_sumset_size(a: GSet, p: dict, seed: int) -> tuple[dict, bool]:
    n = int(p.get("n", 2))
    return {"size": len(a), "sumset_size": len(iterated_sumset(a, n))}, True


OPERATIONS: dict[str, Callable[[GSet, dict, int], tuple[dict, bool]]] = {
    "energy": _op_energy,
    "coset_law": _op_coset_law,
    "plunnecke": _op_plunnecke,
    "chang": _op_chang,
    "lopez_ross": _op_lopez_ross,
    "spectral_energy": _op_spectral_energy,
    "containment": _op_containment,
    "croot_sisask": _op_croot_sisask,
    "pipeline": _op_pipeline,
    "coset_distance": _op_coset_distance,
    "bohr_progression": _op_bohr_progression,
    "sumset_size": _op_sumset_size,
}


# -- sweeps ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Record:
    instance_id: int
    descriptor: str
    measured: dict
    passed: bool


@dataclass
class SweepResult:
    config: ExperimentConfig
    records: list[Record]
    aggregates: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(not r.passed for r in self.records)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = list(self.records[0].measured) if self.records else []
        w.writerow(["instance_id", "descriptor", *keys, "pass"])
        for r in self.records:
            w.writerow([r.instance_id, r.descriptor, *(_cell(r.measured.get(k)) for k in keys), _cell(r.passed)])
        return buf.getvalue()

    def to_json(self) -> str:
        obj = {
            "config": self.config.to_dict(),
            "records": [
                {"instance_id": r.instance_id, "descriptor": r.descriptor, "measured": to_jsonable(r.measured), "pass": r.passed}
                for r in self.records
            ],
            "aggregates": to_jsonable(self.aggregates),
            "failures": self.failures,
        }
        return json.dumps(obj, indent=2, sort_keys=True)


def aggregate(records: list[Record]) -> dict:
    """Per-column min/max over numeric measurements, plus pass/fail counts."""
    agg: dict[str, Any] = {"count": len(records), "passed": sum(r.passed for r in records)}
    agg["failed"] = agg["count"] - agg["passed"]
    if not records:
        return agg
    for key in records[0].measured:
        vals = [r.measured[key] for r in records]
        if all(isinstance(v, (int, float, Fraction, np.integer, np.floating)) and not isinstance(v, bool) for v in vals):
            agg[f"{key}_min"] = min(vals)
            agg[f"{key}_max"] = max(vals)
    return agg


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("AAL_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Evaluate the operation on every domain instance; records come back ordered by id."""
    instances = build_domain(cfg)
    if not instances:
        log.warning("sweep %r has an empty domain; no records produced", cfg.name)
    op = OPERATIONS[cfg.operation["name"]]
    params = {k: v for k, v in cfg.operation.items() if k != "name"}

    def run(inst: Instance) -> Record:
        measured, ok = op(inst.a_set, params, inst.seed)
        return Record(inst.instance_id, inst.descriptor, measured, bool(ok))

    n = thread_count()
    if n > 1 and len(instances) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(run, instances))
    else:
        records = [run(i) for i in instances]
    records.sort(key=lambda r: r.instance_id)
    return SweepResult(cfg, records, aggregate(records))


def run_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None) -> tuple[SweepResult, list[Path]]:
    """Run a sweep and write ``<name>.csv`` and ``<name>.json`` into the output directory."""
    res = run_sweep(cfg)
    target = Path(out_dir or cfg.out_dir or ".")
    target.mkdir(parents=True, exist_ok=True)
    csv_path = target / f"{cfg.name}.csv"
    json_path = target / f"{cfg.name}.json"
    csv_path.write_text(res.to_csv())
    json_path.write_text(res.to_json())
    return res, [csv_path, json_path]


def replay(report_json: str) -> SweepResult:
    """Re-run the config echoed inside an emitted JSON report."""
    return run_sweep(ExperimentConfig.from_json(report_json))


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    return ExperimentConfig.from_json(Path(path).read_text())


def all_group_presentations(max_order: int) -> list[GroupSpec]:
    """Every product of cyclic groups (nondecreasing orders > 1) of order <= max_order."""
    out = [GroupSpec((1,))]

    def rec(prefix: tuple[int, ...], size: int, lo: int):
        for n in range(lo, max_order // size + 1):
            t = prefix + (n,)
            out.append(GroupSpec(t))
            rec(t, size * n, n)

    rec((), 1, 2)
    return out


__all__ = [
    "ExperimentConfig",
    "Instance",
    "Record",
    "SweepResult",
    "OPERATIONS",
    "aggregate",
    "all_group_presentations",
    "build_domain",
    "coset_distance",
    "load_config",
    "replay",
    "run_experiment",
    "run_sweep",
    "to_jsonable",
]
