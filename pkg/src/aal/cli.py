"""Command-line interface: ``aal <subcommand> --group Z12 --set "{0,3,6,9}" ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from . import generators as gen
from .errors import AALError, HypothesisFails
from .experiments import ExperimentConfig, load_config, run_experiment, run_sweep, to_jsonable
from .group import CharSet, GroupSpec, GSet, parse_group, parse_set
from .progressions import bohr_to_progression, check_bohr_hypothesis, growth_order
from .setops import DensityMap, doubling, energy, iterated_sumset, sumset, symmetry_set
from .spectral import bohr_set, fourier, large_spectrum, spectrum_to_csv
from .structure import (
    bsg_extract,
    chang_growth_test,
    croot_sisask,
    katz_koester_iterate,
    pipeline,
    plunnecke_check,
)


def _fraction(text: str):
    from fractions import Fraction

    return Fraction(text)


def _emit(args, name: str, payload: dict[str, Any]) -> None:
    data = to_jsonable(payload)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = list(data)
        w.writerow(keys)
        w.writerow([json.dumps(data[k], separators=(",", ":")) if isinstance(data[k], (list, dict)) else data[k] for k in keys])
        text = buf.getvalue()
    else:
        text = json.dumps(data, indent=2) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{args.format}").write_text(text)
    else:
        sys.stdout.write(text)


def _group(args) -> GroupSpec:
    if not args.group:
        raise SystemExit("error: --group is required")
    return parse_group(args.group)


def _set(args, g: GroupSpec, attr: str = "set") -> GSet:
    text = getattr(args, attr)
    if text is None:
        raise SystemExit(f"error: --{attr.replace('_', '-')} is required")
    return parse_set(g, text)


# -- subcommands ---------------------------------------------------------------


def cmd_energy(args) -> int:
    g = _group(args)
    a = _set(args, g)
    e = energy(a)
    _emit(args, "energy", {"size": len(a), "energy": e, "ratio": e / len(a) ** 3 if a else None,
                           "doubling": doubling(a) if a else None})
    return 0


def cmd_sumset(args) -> int:
    g = _group(args)
    a = _set(args, g)
    res = sumset(a, parse_set(g, args.other)) if args.other else iterated_sumset(a, args.n)
    _emit(args, "sumset", {"size": len(res), "set": res})
    return 0


def cmd_sym(args) -> int:
    g = _group(args)
    s = symmetry_set(_set(args, g), _fraction(args.eta))
    _emit(args, "sym", {"eta": args.eta, "size": len(s), "set": s})
    return 0


def cmd_lspec(args) -> int:
    g = _group(args)
    a = _set(args, g)
    if args.spectrum:
        buf = io.StringIO()
        spectrum_to_csv(fourier(DensityMap.indicator(a)), buf)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "spectrum.csv").write_text(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return 0
    spec = large_spectrum(a, args.eps)
    _emit(args, "lspec", {"eps": args.eps, "size": len(spec), "characters": spec})
    return 0


def cmd_bohr(args) -> int:
    g = _group(args)
    gamma = CharSet(g, parse_set(g, args.gamma).mask)
    if args.d is None and not args.search_d:
        b = bohr_set(gamma, args.delta)
        _emit(args, "bohr", {"delta": args.delta, "size": len(b), "set": b})
        return 0
    if args.search_d:
        for d in range(1, args.search_d + 1):
            if check_bohr_hypothesis(gamma, args.delta, d)[0]:
                break
        else:
            raise HypothesisFails(f"no d <= {args.search_d} satisfies the doubling hypothesis")
    else:
        d = args.d
    prog, cert = bohr_to_progression(gamma, args.delta, d, require_hypothesis=not args.no_hypothesis)
    _emit(args, "bohr", {"d_claim": d, "certificate": cert, "progression": prog.to_json()})
    return 0


def cmd_growth(args) -> int:
    g = _group(args)
    d, prof = growth_order(_set(args, g), args.n_max)
    _emit(args, "growth", {"growth_order": d, "sizes": prof.sizes})
    return 0


def cmd_chang(args) -> int:
    g = _group(args)
    r = chang_growth_test(_set(args, g), args.k, args.n_max)
    _emit(args, "chang", {**to_jsonable(r), "passed": r.passed})
    return 0 if r.passed else 1


def cmd_plunnecke(args) -> int:
    g = _group(args)
    r = plunnecke_check(_set(args, g), args.n_max)
    _emit(args, "plunnecke", {**to_jsonable(r), "passed": r.passed})
    return 0 if r.passed else 1


def cmd_croot_sisask(args) -> int:
    g = _group(args)
    a = _set(args, g)
    f = DensityMap.indicator(parse_set(g, args.f_set) if args.f_set else a)
    p = int(args.p) if float(args.p).is_integer() else args.p
    res = croot_sisask(f, a, args.eps, p=p, k=args.k, trials=args.trials, seed=args.seed)
    _emit(args, "croot-sisask", res)
    return 0


def cmd_kk_iterate(args) -> int:
    g = _group(args)
    tr = katz_koester_iterate(_set(args, g), args.eta, args.max_steps)
    _emit(args, "kk-iterate", tr)
    return 0


def cmd_bsg(args) -> int:
    g = _group(args)
    sub, cert = bsg_extract(_set(args, g), _fraction(args.delta), trials=args.trials, seed=args.seed)
    _emit(args, "bsg", {"set": sub, "certificate": cert})
    return 0


def cmd_pipeline(args) -> int:
    g = _group(args)
    r = pipeline(_set(args, g), args.variant, trials=args.trials, seed=args.seed)
    payload = {f: getattr(r, f) for f in ("variant", "K", "params", "x_set", "y_set", "y_translate",
                                           "intersection", "growth_order", "growth_sizes", "checks")}
    payload.update(frac_of_a=r.frac_of_a, frac_of_y=r.frac_of_y, passed=r.passed)
    _emit(args, "pipeline", payload)
    return 0 if r.passed else 1


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        res, paths = run_experiment(cfg, args.out)
        for p in paths:
            print(p, file=sys.stderr)
    else:
        res = run_sweep(cfg)
        sys.stdout.write(res.to_csv() if args.format == "csv" else res.to_json() + "\n")
    print(f"{len(res.records)} records, {res.failures} failed", file=sys.stderr)
    return res.exit_code


def cmd_gen(args) -> int:
    g = _group(args)
    h = GSet.full(g)
    if args.h:
        from .group import subgroup_generated

        h = subgroup_generated(parse_set(g, args.h))
    kind = args.kind
    if kind == "random-subset":
        a = gen.gen_random_subset(h, args.delta, args.seed)
    elif kind == "independent-cosets":
        a = gen.gen_independent_cosets(g, parse_set(g, args.h or "{}"), args.k, args.seed)
    elif kind == "internally-independent":
        g, a, _ = gen.gen_internally_independent([GroupSpec((n,)) for n in g.orders], args.k)
    elif kind == "ap":
        a = gen.gen_ap(g, _coords(args.start), _coords(args.step), args.length)
    else:
        a = gen.gen_near_coset(h, args.eps, args.eta, args.seed)
    _emit(args, "gen", {"group": g, "size": len(a), "set": a})
    return 0


def _coords(text: str):
    parts = [int(v) for v in text.strip("()").split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", help='group presentation, e.g. "Z12" or "Z2^3xZ5"')
    common.add_argument("--set", help='set literal, e.g. "{0,3,6}" or "{(0,1),(1,1)}"')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write <subcommand>.<format> into this directory")
    common.add_argument("--format", choices=("csv", "json"), default="json")

    ap = argparse.ArgumentParser(prog="aal", description="Exact additive-combinatorics workbench.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    add("energy", cmd_energy, "additive energy and doubling")
    p = add("sumset", cmd_sumset, "A+B, or the iterated sumset nA")
    p.add_argument("--other", help="second summand B")
    p.add_argument("--n", type=int, default=2)
    p = add("sym", cmd_sym, "symmetry set Sym_eta(A)")
    p.add_argument("--eta", required=True, help="threshold in [0,1], exact fraction allowed")
    p = add("lspec", cmd_lspec, "large spectrum, or the full spectrum as CSV")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--spectrum", action="store_true", help="dump every Fourier coefficient")
    p = add("bohr", cmd_bohr, "Bohr set, optionally converted to a convex coset progression")
    p.add_argument("--gamma", required=True, help="character set as a dual-coordinate literal")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--d", type=int, help="dimension claim; runs the progression construction")
    p.add_argument("--search-d", type=int, metavar="D_MAX", help="try d = 1..D_MAX until the hypothesis holds")
    p.add_argument("--no-hypothesis", action="store_true", help="construct even if the doubling hypothesis fails")
    p = add("growth", cmd_growth, "growth profile |nX| and growth order")
    p.add_argument("--n-max", type=int, default=8)
    p = add("chang", cmd_chang, "Chang-type growth test for a symmetric set")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p = add("plunnecke", cmd_plunnecke, "check |nA| <= K^n |A|")
    p.add_argument("--n-max", type=int, default=4)
    p = add("croot-sisask", cmd_croot_sisask, "certified almost-periods of 1_F * mu_A")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--p", type=float, default=2)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--f-set", help="set F for f = 1_F (default: A)")
    p = add("kk-iterate", cmd_kk_iterate, "Katz-Koester iteration trace")
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--max-steps", type=int, default=64)
    p = add("bsg", cmd_bsg, "extract a large subset with small doubling")
    p.add_argument("--delta", required=True, help="energy fraction, exact fraction allowed")
    p.add_argument("--trials", type=int, default=64)
    p = add("pipeline", cmd_pipeline, "Freiman-type structure pipeline")
    p.add_argument("--variant", choices=("basic", "schoen", "lp"), default="basic")
    p.add_argument("--trials", type=int, default=64)
    p = add("sweep", cmd_sweep, "run an experiment config")
    p.add_argument("--config", required=True, help="JSON experiment config or emitted report")
    p = add("gen", cmd_gen, "generate a set from one of the example classes")
    p.add_argument("kind", choices=("random-subset", "independent-cosets", "internally-independent", "ap", "near-coset"))
    p.add_argument("--h", help="generators of the subgroup H")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--start", default="0")
    p.add_argument("--step", default="1")
    p.add_argument("--length", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.0)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except AALError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
