"""Batch front door: load systems, run operations and suites, emit reports.

All reports are JSON with exact rationals as strings; inequalities carry
both sides verbatim so reports are auditable without re-running. The
exit-code taxonomy separates defects from expected refusals:

    0  pass
    1  theorem-check failure (build-breaking)
    2  precondition / validation rejection (e.g. the counterexamples)
    3  malformed input

Environment variables: CEPSKIT_SEED overrides the default --seed,
CEPSKIT_PARALLEL sets the suite parallelism width.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys as _sys
import time
from fractions import Fraction

from . import system as system_mod
from .approx import approximate_periodic, build_s_prime, distance_profile
from .demos import paper_examples_report
from .errors import (
    CepsError,
    DomainError,
    InvalidSystem,
    NotAperiodicAtHorizon,
    NotConditionallyErgodic,
    TheoremViolation,
)
from .generators import (
    RandomSpec,
    direct_product,
    random_system,
    single_cycle,
    swap_example,
    truncated_counterexample,
)
from .rationals import format_rational
from .recurrence import first_return_time, kac_certificate, return_decomposition, \
    check_recurrent
from .suites import SUITE_NAMES, run_suite
from .tower import build_tower, build_tower_eps, build_tower_eps_ls, n_aperiodic


class MalformedInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2; the taxonomy wants 3
        raise MalformedInput(f"{message}\n{self.format_usage()}")


def _default_seed() -> int:
    raw = os.environ.get("CEPSKIT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _parse_indices(raw: str) -> frozenset[int]:
    raw = raw.strip()
    if not raw:
        return frozenset()
    try:
        return frozenset(int(tok) for tok in raw.split(","))
    except ValueError as exc:
        raise MalformedInput(f"bad index list {raw!r}: {exc}") from None


def _parse_eps(raw: str) -> Fraction:
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad rational {raw!r}: {exc}") from None


def _parse_range(raw: str) -> tuple[int, int]:
    try:
        lo, _, hi = raw.partition(":")
        return (int(lo), int(hi if hi else lo))
    except ValueError as exc:
        raise MalformedInput(f"bad range {raw!r} (expected LO:HI): {exc}") from None


def _load_system(path: str, force: bool = False):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            candidate = json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(candidate, dict):
        raise MalformedInput(f"{path} does not hold a system object")
    report = system_mod.validate_ceps(candidate)
    if not report.ok and not force:
        raise InvalidSystem(report)
    return system_mod.from_raw(candidate, force=force)


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def build_parser() -> _Parser:
    parser = _Parser(prog="cepskit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", required=True, help="system JSON file")
            p.add_argument("--force", action="store_true",
                           help="load even if validation fails (demos)")
        p.add_argument("--out", help="also write the JSON report here")
        return p

    common(sub.add_parser("validate", help="validate a system file"))

    gen = common(sub.add_parser("gen", help="generate a system file"), system=False)
    gen.add_argument("--kind", required=True,
                     choices=["cycle", "swap", "product", "random"])
    gen.add_argument("--m", type=int, help="cycle length (kind=cycle)")
    gen.add_argument("--cycles", help="CSV of cycle lengths (kind=product)")
    gen.add_argument("--truncated", type=int,
                     help="product of cycles 1..M (kind=product)")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--num-blocks", default="1:3")
    gen.add_argument("--cycle-lengths", default="1:8")
    gen.add_argument("--denom-bound", type=int, default=12)
    gen.add_argument("--non-ergodic", action="store_true")

    kac = common(sub.add_parser("kac", help="Kac identity certificate"))
    kac.add_argument("--p", required=True, help="CSV of indices")

    dec = common(sub.add_parser("decompose", help="first-return decomposition"))
    dec.add_argument("--p", required=True)

    rec = common(sub.add_parser("recurrent", help="recurrence of p w.r.t. q"))
    rec.add_argument("--p", required=True)
    rec.add_argument("--q", required=True)

    tw = common(sub.add_parser("tower", help="epsilon-free tower"))
    tw.add_argument("--p", required=True)
    tw.add_argument("--n", type=int, required=True)
    tw.add_argument("--csv", help="write level masses as CSV")

    te = common(sub.add_parser("tower-eps", help="epsilon-bounded tower"))
    te.add_argument("--n", type=int, required=True)
    te.add_argument("--eps", required=True)
    te.add_argument("--csv", help="write level masses as CSV")

    tl = common(sub.add_parser("tower-ls", help="epsilon-bounded tower under L_S"))
    tl.add_argument("--v", required=True)
    tl.add_argument("--n", type=int, required=True)
    tl.add_argument("--eps", required=True)

    ap = common(sub.add_parser("aperiodic", help="N-aperiodicity surrogate"))
    ap.add_argument("--v", required=True)
    ap.add_argument("--N", "--n", type=int, required=True, dest="horizon")
    ap.add_argument("--mode", default="criterion",
                    choices=["criterion", "definitional", "both"])

    px = common(sub.add_parser("approx", help="periodic approximation of S"))
    px.add_argument("--eps")
    px.add_argument("--manual", action="store_true")
    px.add_argument("--p")
    px.add_argument("--n", type=int)
    px.add_argument("--samples", type=int, default=10_000)
    px.add_argument("--seed", type=int, default=None)
    px.add_argument("--csv", help="write the worst distance profile as CSV")

    su = common(sub.add_parser("suite", help="seeded property suites"),
                system=False)
    su.add_argument("name", choices=list(SUITE_NAMES) + ["all"])
    su.add_argument("--trials", type=int, default=100)
    su.add_argument("--seed", type=int, default=None)
    su.add_argument("--first-trial", type=int, default=0)

    common(sub.add_parser("demo-paper-examples",
                          help="reproduce the worked-example tables"),
           system=False)
    return parser


def _cmd_validate(args) -> tuple[int, dict]:
    try:
        with open(args.system, "r", encoding="utf-8") as fh:
            candidate = json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {args.system}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{args.system} is not valid JSON: {exc}") from None
    report = system_mod.validate_ceps(candidate)
    payload = {"scenario": "validate", "system": args.system, **report.as_dict()}
    return (0 if report.ok else 2), payload


def _cmd_gen(args) -> tuple[int, dict]:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.kind == "cycle":
        if args.m is None:
            raise MalformedInput("gen --kind cycle needs --m")
        sys = single_cycle(args.m)
    elif args.kind == "swap":
        sys = swap_example()
    elif args.kind == "product":
        if args.truncated is not None:
            sys = truncated_counterexample(args.truncated)
        elif args.cycles:
            try:
                lengths = [int(m) for m in args.cycles.split(",")]
            except ValueError as exc:
                raise MalformedInput(f"bad --cycles {args.cycles!r}: {exc}") from None
            sys = direct_product([single_cycle(m) for m in lengths])
        else:
            raise MalformedInput("gen --kind product needs --cycles or --truncated")
    else:
        spec = RandomSpec(
            seed=seed,
            num_blocks=_parse_range(args.num_blocks),
            cycle_lengths=_parse_range(args.cycle_lengths),
            weight_denominator_bound=args.denom_bound,
            ergodic=not args.non_ergodic,
        )
        sys = random_system(spec)
    payload = {
        "scenario": "gen",
        "kind": args.kind,
        "digest": sys.digest(),
        "system": sys.as_dict(),
    }
    if args.out:
        system_mod.save(sys, args.out)
        payload["written"] = args.out
    return 0, payload


def _cmd_kac(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    p = _parse_indices(args.p)
    started = time.perf_counter()
    lhs, rhs, ok = kac_certificate(sys, p)
    payload = {
        "scenario": "kac",
        "inputs": {"system_digest": sys.digest(), "p": sorted(p)},
        "Tn(p)": [format_rational(a) for a in lhs],
        "P_Tp_e": [format_rational(a) for a in rhs],
        "equal": ok,
        "outcome": "pass" if ok else "fail",
        "timing_seconds": round(time.perf_counter() - started, 6),
    }
    return (0 if ok else 1), payload


def _cmd_decompose(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    p = _parse_indices(args.p)
    decomp = return_decomposition(sys, p)
    n_p = first_return_time(sys, p)
    kac_ok = None
    if sys.is_conditionally_ergodic():
        _, _, kac_ok = kac_certificate(sys, p)
    payload = {
        "scenario": "decompose",
        "inputs": {"system_digest": sys.digest()},
        "p": sorted(p),
        "parts": {str(k): sorted(v) for k, v in sorted(decomp.parts.items())},
        "horizon": decomp.horizon,
        "n_of_p": [format_rational(a) for a in n_p],
        "kac_ok": kac_ok,
    }
    code = 0 if (kac_ok is None or kac_ok) else 1
    return code, payload


def _cmd_recurrent(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    p = _parse_indices(args.p)
    q = _parse_indices(args.q)
    result = check_recurrent(sys, p, q)
    return 0, {
        "scenario": "recurrent",
        "inputs": {"system_digest": sys.digest(), "p": sorted(p), "q": sorted(q)},
        "recurrent": result,
    }


def _tower_payload(scenario, sys, t, extra_inputs, started) -> dict:
    return {
        "scenario": scenario,
        "inputs": {"system_digest": sys.digest(), **extra_inputs},
        **t.as_dict(),
        "outcome": "pass",
        "timing_seconds": round(time.perf_counter() - started, 6),
    }


def _tower_csv(path, sys, t) -> None:
    header = ["level", "members", "mass_per_block"]
    rows = []
    for i, level in enumerate(t.levels):
        mass = sys.expectation(sys.indicator(level))
        per_block = [format_rational(mass[sorted(b)[0]]) for b in sys.blocks]
        rows.append([i, " ".join(map(str, sorted(level))), " ".join(per_block)])
    _write_csv(path, header, rows)


def _cmd_tower(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    p = _parse_indices(args.p)
    started = time.perf_counter()
    t = build_tower(sys, p, args.n)
    if args.csv:
        _tower_csv(args.csv, sys, t)
    return 0, _tower_payload("tower", sys, t, {"p": sorted(p), "n": args.n},
                             started)


def _cmd_tower_eps(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    eps = _parse_eps(args.eps)
    started = time.perf_counter()
    t = build_tower_eps(sys, args.n, eps)
    if args.csv:
        _tower_csv(args.csv, sys, t)
    return 0, _tower_payload(
        "tower-eps", sys, t, {"n": args.n, "eps": format_rational(eps)}, started
    )


def _cmd_tower_ls(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    eps = _parse_eps(args.eps)
    v = _parse_indices(args.v)
    started = time.perf_counter()
    t = build_tower_eps_ls(sys, v, args.n, eps)
    return 0, _tower_payload(
        "tower-ls", sys, t,
        {"v": sorted(v), "n": args.n, "eps": format_rational(eps)}, started,
    )


def _cmd_aperiodic(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    v = _parse_indices(args.v)
    results = {}
    modes = ["criterion", "definitional"] if args.mode == "both" else [args.mode]
    for mode in modes:
        results[mode] = n_aperiodic(sys, v, args.horizon, mode=mode)
    payload = {
        "scenario": "aperiodic",
        "inputs": {"system_digest": sys.digest(), "v": sorted(v),
                   "N": args.horizon},
        "results": results,
        "agree": len(set(results.values())) == 1,
    }
    return (0 if payload["agree"] else 1), payload


def _cmd_approx(args) -> tuple[int, dict]:
    sys = _load_system(args.system, args.force)
    seed = args.seed if args.seed is not None else _default_seed()
    started = time.perf_counter()
    if args.manual:
        if args.p is None or args.n is None:
            raise MalformedInput("approx --manual needs --p and --n")
        eps = _parse_eps(args.eps) if args.eps else None
        result = build_s_prime(
            sys, _parse_indices(args.p), args.n, eps=eps,
            samples=args.samples, seed=seed,
        )
    else:
        if args.eps is None:
            raise MalformedInput("approx needs --eps (or --manual)")
        result = approximate_periodic(
            sys, _parse_eps(args.eps), samples=args.samples, seed=seed
        )
    payload = {
        "scenario": "approx",
        "inputs": {"system_digest": sys.digest(), "manual": args.manual,
                   "seed": seed},
        **result.as_dict(),
        "outcome": "pass" if result.certificate.holds else "fail",
        "timing_seconds": round(time.perf_counter() - started, 6),
    }
    if args.csv:
        worst = result.certificate.worst_observed
        _write_csv(
            args.csv,
            ["coordinate", "worst_distance"],
            [[i, format_rational(worst[i])] for i in range(len(worst))],
        )
    return (0 if result.certificate.holds else 1), payload


def _cmd_suite(args) -> tuple[int, dict]:
    seed = args.seed if args.seed is not None else _default_seed()
    report = run_suite(args.name, args.trials, seed, first_trial=args.first_trial)
    return (0 if report["outcome"] == "pass" else 1), report


def _cmd_demo(args) -> tuple[int, dict]:
    report = paper_examples_report()
    return (0 if report["outcome"] == "pass" else 1), report


_HANDLERS = {
    "validate": _cmd_validate,
    "gen": _cmd_gen,
    "kac": _cmd_kac,
    "decompose": _cmd_decompose,
    "recurrent": _cmd_recurrent,
    "tower": _cmd_tower,
    "tower-eps": _cmd_tower_eps,
    "tower-ls": _cmd_tower_ls,
    "aperiodic": _cmd_aperiodic,
    "approx": _cmd_approx,
    "suite": _cmd_suite,
    "demo-paper-examples": _cmd_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code, report = _HANDLERS[args.command](args)
        # For gen, --out is the system file itself (already written).
        out = None if args.command == "gen" else getattr(args, "out", None)
        _emit(report, out)
        return code
    except MalformedInput as exc:
        print(str(exc), file=_sys.stderr)
        return 3
    except TheoremViolation as exc:
        _emit({"outcome": "theorem-violation", "error": str(exc)},
              getattr(args, "out", None))
        return 1
    except (DomainError, NotConditionallyErgodic, NotAperiodicAtHorizon) as exc:
        _emit({"outcome": "rejected", "kind": type(exc).__name__,
               "error": str(exc)}, getattr(args, "out", None))
        return 2
    except InvalidSystem as exc:
        _emit({"outcome": "rejected", "kind": "InvalidSystem",
               **exc.report.as_dict()}, getattr(args, "out", None))
        return 2
    except CepsError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
