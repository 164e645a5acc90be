"""Command-line front end: one subcommand per verification, JSON reports on stdout.

Exit codes: 0 all verdicts hold, 1 a verdict fails or is not applicable,
2 usage or parse error, 3 a theorem's conclusion failed under its hypotheses.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import (
    BoundExceeded,
    EntryConditionsFailed,
    NegativeInput,
    NotNormalized,
    ParseError,
    PhasemajError,
    TheoremViolation,
)
from .fockspace import FockMixture, certify_nonnegative, mixture_radial, vacuum_decomposition
from .majorize import (
    GridConfig,
    convex_functional,
    decreasing_rearrangement,
    majorizes_continuous,
    wigner_entropy,
)
from .polyexp import evaluate_array
from .sigma import DEFAULT_BOUND, equal_mixture, sigma_coefficients, symmetry_check
from .theorems import (
    MAX_VERTEX_N,
    PROPOSALS,
    NotApplicable,
    Theorem1Instance,
    convolution_G,
    monte_carlo_theorem1,
    verify_theorem1,
    verify_theorem2_convergence,
    vertex_table,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2, 3
SEED_ENV = "PHASEMAJ_SEED"
DEFAULT_SCHEDULE = "30:64,30:128,30:256"

_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?$")


# --------------------------------------------------------------------------
# parsing


def parse_rational(text: str, position: int = 0) -> Fraction:
    """Integer or "p/q"; anything else (floats included) is a ParseError."""
    s = text.strip()
    if not _RATIONAL.match(s):
        raise ParseError(f"expected an integer or p/q, got {text!r}", position)
    return Fraction(s)


def parse_mixture(text: str) -> FockMixture:
    """"n:w,n:w,..." with rational weights, or the keyword "vacuum"."""
    if text.strip().lower() == "vacuum":
        return FockMixture.pure(0)
    weights = {}
    pos = 0
    for item in text.split(","):
        if ":" not in item:
            raise ParseError(f"expected n:weight, got {item!r}", pos)
        n_text, w_text = item.split(":", 1)
        if not n_text.strip().isdigit():
            raise ParseError(f"bad Fock index {n_text!r}", pos)
        n = int(n_text)
        if n in weights:
            raise ParseError(f"Fock index {n} repeated", pos)
        weights[n] = parse_rational(w_text, pos + len(n_text) + 1)
        pos += len(item) + 1
    return FockMixture(weights)


def parse_rational_list(text: str) -> list:
    out, pos = [], 0
    for item in text.split(","):
        out.append(parse_rational(item, pos))
        pos += len(item) + 1
    return out


def parse_schedule(text: str) -> list:
    out, pos = [], 0
    for item in text.split(","):
        if ":" not in item:
            raise ParseError(f"expected z_end:N, got {item!r}", pos)
        z, n = item.split(":", 1)
        if not n.strip().isdigit():
            raise ParseError(f"bad level count {n!r}", pos + len(z) + 1)
        out.append((parse_rational(z, pos), int(n)))
        pos += len(item) + 1
    return out


def load_config(path: str) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value", lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# --------------------------------------------------------------------------
# report helpers


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


class Report:
    def __init__(self, command: str, inputs: dict, seed=None):
        self.command = command
        self.inputs = inputs
        self.seed = seed
        self.verdicts = []
        self.artifacts = {}

    def verdict(self, name: str, holds: bool, **metrics):
        self.verdicts.append({"name": name, "holds": bool(holds), **metrics})

    @property
    def ok(self) -> bool:
        return all(v["holds"] for v in self.verdicts)

    def to_json(self) -> str:
        body = {
            "command": self.command,
            "version": __version__,
            "seed": self.seed,
            "inputs": self.inputs,
            "verdicts": self.verdicts,
            "artifacts": self.artifacts,
        }
        return json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n"


def _grid_config(args) -> GridConfig:
    return GridConfig(
        z_max=args.z_max, cells=args.cells, refine_rounds=args.refine_rounds, tolerance=args.tolerance
    )


def _grid_inputs(args) -> dict:
    return {
        "z_max": args.z_max,
        "cells": args.cells,
        "refine_rounds": args.refine_rounds,
        "tolerance": args.tolerance,
    }


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_profile(args):
    mix = parse_mixture(args.mix)
    prof = mixture_radial(mix)
    z = np.linspace(0.0, args.z_max or 10.0, args.points)
    w = evaluate_array(prof.fn, z)
    report = Report("profile", {"mix": str(mix), "z_max": float(z[-1]), "points": args.points})
    cert = certify_nonnegative(prof)
    report.verdict("nonnegative", True, nonnegative=cert.nonneg)
    report.artifacts["poly_coeffs"] = list(prof.poly.coeffs)
    rows = list(zip(z.tolist(), w.tolist()))
    if args.format == "csv":
        text = _csv_text(("z", "w"), rows)
        if args.data:
            _write(args.data, text)
        else:
            return report, text
    else:
        report.artifacts["samples"] = {"z": z, "w": w}
    return report, None


def cmd_majorize(args):
    a = parse_mixture(args.a)
    b = parse_mixture(args.b)
    cfg = _grid_config(args)
    fa, fb = mixture_radial(a), mixture_radial(b)
    verdict = majorizes_continuous(fa, fb, cfg)
    report = Report("majorize", {"a": str(a), "b": str(b), **_grid_inputs(args)})
    report.verdict(
        "a_majorizes_b",
        verdict.holds,
        min_margin=verdict.min_margin,
        total_a=verdict.total_x,
        total_b=verdict.total_y,
        history=list(verdict.history),
    )
    if args.rearrangement_csv:
        ra = decreasing_rearrangement(fa, cfg)
        rb = decreasing_rearrangement(fb, cfg)
        ta, ia = ra.cumulative()
        tb, ib = rb.cumulative()
        rows = [("a", t, v) for t, v in zip(ta, ia)] + [("b", t, v) for t, v in zip(tb, ib)]
        _write(args.rearrangement_csv, _csv_text(("profile", "t", "cumulative"), rows))
    return report, None


def cmd_entropy(args):
    mix = parse_mixture(args.mix)
    prof = mixture_radial(mix)
    report = Report("entropy", {"mix": str(mix), "method": args.method})
    cfg = GridConfig(z_max=args.z_max, cells=args.cells, tolerance=args.tolerance)
    try:
        flogf = convex_functional(prof, "xlogx", cfg, method=args.method)
    except NegativeInput as exc:
        cert = exc.certificate
        lo, hi = cert.interval
        report.verdict("nonnegative", False, interval=[lo, hi], point=cert.point)
        return report, None
    entropy = wigner_entropy(prof, cfg, method=args.method)
    report.verdict("nonnegative", True)
    report.artifacts["entropy"] = entropy
    report.artifacts["integral_w_ln_w"] = flogf
    return report, None


def cmd_sigma(args):
    if args.mixture is not None:
        M = args.mixture
        mix = equal_mixture(M, args.bound)
        report = Report("sigma", {"mixture": M, "bound": args.bound})
        report.verdict("uniform_identity", True)
        report.verdict("symmetry", symmetry_check(M, args.bound))
        report.artifacts["mixture"] = mix.weights
        return report, None
    if args.m is None or args.n is None:
        raise ParseError("give --m and --n, or --mixture")
    s = sigma_coefficients(args.m, args.n, args.bound)
    report = Report("sigma", {"m": args.m, "n": args.n, "bound": args.bound})
    report.verdict("normalized", sum(s.a) == 1)
    report.artifacts["coefficients"] = list(s.a)
    return report, None


def _vector(v):
    return [str(x) for x in v]


def cmd_theorem1(args, seed):
    a = parse_rational(args.a)
    inputs = {"n": args.n, "a": a}
    if args.vertices:
        if args.n > MAX_VERTEX_N:
            raise ParseError(f"--vertices needs n <= {MAX_VERTEX_N}")
        report = Report("theorem1", {**inputs, "vertices": True})
        rows = []
        for v in vertex_table(args.n, a):
            rows.append({"indices": v.spec.label, "V": _vector(v.V), "U": _vector(v.U),
                         "lambdas": _vector(v.lambdas), "transfers": len(v.transfers)})
        report.verdict("vertices_majorized", True, count=len(rows))
        report.artifacts["vertices"] = rows
        return report, None
    if args.lambdas is not None:
        lambdas = parse_rational_list(args.lambdas)
        inst = Theorem1Instance(args.n, a, tuple(lambdas))
        report = Report("theorem1", {**inputs, "lambdas": lambdas})
        result = verify_theorem1(inst)
        G = convolution_G(inst)
        report.artifacts["G"] = G
        if isinstance(result, NotApplicable):
            report.verdict("applicable", False, first_negative_index=result.index)
        else:
            report.verdict("majorized", result.holds, min_margin=result.min_margin)
        return report, None
    report = Report("theorem1", {**inputs, "samples": args.samples, "lam_max": args.lam_max,
                                 "bits": args.bits, "proposal": args.proposal}, seed=seed)
    s = monte_carlo_theorem1(args.n, a, args.samples, seed=seed, lam_max=args.lam_max,
                             bits=args.bits, jobs=args.jobs, proposal=args.proposal)
    report.verdict(
        "no_violations",
        s.violations == 0,
        holds_count=s.holds,
        not_applicable=s.not_applicable,
        violations=s.violations,
        min_margin=s.min_margin,
    )
    return report, None


def cmd_theorem2(args):
    mix = parse_mixture(args.mixture)
    schedule = parse_schedule(args.schedule)
    report = Report("theorem2", {"mixture": str(mix), "schedule": schedule, "tolerance": args.tolerance})
    dec = vacuum_decomposition(mixture_radial(mix))
    if not dec.entry_conditions_hold:
        raise EntryConditionsFailed(
            f"decomposition total {dec.total}, tail nonnegative: {dec.tail_nonneg}"
        )
    result = verify_theorem2_convergence(dec.c, schedule, args.tolerance)
    for lv in result.levels:
        name = f"level_{lv.z_end}_{lv.N}"
        if lv.verdict is None:
            report.verdict(name, False, applicable=False, error=lv.error)
        else:
            report.verdict(name, lv.verdict.holds, applicable=True, error=lv.error,
                           min_margin=lv.verdict.min_margin, k_tilde=lv.k_tilde)
    report.verdict("error_nonincreasing", result.errors_nonincreasing)
    if result.witness is not None:
        w = result.witness
        report.verdict("witness_doubly_stochastic", w.doubly_stochastic)
        report.artifacts["witness"] = vars(w)
    return report, None


# --------------------------------------------------------------------------
# argument parser


def _add_grid(p, cells=2**14):
    p.add_argument("--z-max", type=float, default=None, help="grid end (default: from a tail bound)")
    p.add_argument("--cells", type=int, default=cells)
    p.add_argument("--refine-rounds", type=int, default=3)
    p.add_argument("--tolerance", type=float, default=1e-9)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasemaj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="file of key=value lines presetting option defaults")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for Monte Carlo")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="sample a mixture's radial Wigner profile")
    p.add_argument("--mix", required=True)
    p.add_argument("--z-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--data", help="CSV file for the samples (with --format csv)")

    p = sub.add_parser("majorize", help="test whether profile a majorizes profile b")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--rearrangement-csv", help="write cumulative rearrangements here")
    _add_grid(p)

    p = sub.add_parser("entropy", help="phase-space entropy of a nonnegative mixture")
    p.add_argument("--mix", required=True)
    p.add_argument("--method", choices=("adaptive", "grid"), default="adaptive")
    p.add_argument("--z-max", type=float, default=None)
    p.add_argument("--cells", type=int, default=2**14)
    p.add_argument("--tolerance", type=float, default=1e-6)

    p = sub.add_parser("sigma", help="beamsplitter output mixtures")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--mixture", type=int, metavar="M")
    p.add_argument("--bound", type=int, default=DEFAULT_BOUND)

    p = sub.add_parser("theorem1", help="discrete convolution majorization")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--lambdas")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lam-max", type=int, default=2)
    p.add_argument("--bits", type=int, default=10)
    p.add_argument("--proposal", choices=PROPOSALS, default="mixed",
                   help="lambda sampler: uniform on the box, or half near cone vertices")
    p.add_argument("--vertices", action="store_true")

    p = sub.add_parser("theorem2", help="continuous theorem by grid refinement")
    p.add_argument("--mixture", required=True)
    p.add_argument("--schedule", default=DEFAULT_SCHEDULE, help='"z_end:N,..." with N doubling')
    p.add_argument("--tolerance", type=float, default=1e-9)
    return parser


def _apply_config(parser, config: dict):
    """Use config values as defaults for every subcommand option they name."""
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    known = set()
    for sp in [parser, *subparsers.choices.values()]:
        for action in sp._actions:
            if action.dest in config:
                known.add(action.dest)
                raw = config[action.dest]
                if isinstance(action, argparse._StoreTrueAction):
                    value = raw.lower() in ("1", "true", "yes", "on")
                else:
                    value = action.type(raw) if action.type else raw
                sp.set_defaults(**{action.dest: value})
    unknown = set(config) - known
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(sorted(unknown))}")


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        if not env.strip().isdigit():
            raise ParseError(f"{SEED_ENV} must be a nonnegative integer, got {env!r}")
        return int(env)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre_parser = argparse.ArgumentParser(add_help=False)
    pre_parser.add_argument("--config")
    pre, _ = pre_parser.parse_known_args(argv)
    try:
        if pre.config:
            _apply_config(parser, load_config(pre.config))
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (OSError, ParseError, ValueError) as exc:
        print(f"phasemaj: {exc}", file=sys.stderr)
        return EXIT_USAGE

    extra = None
    try:
        if args.command == "theorem1":
            report, extra = cmd_theorem1(args, _resolve_seed(args))
        else:
            handler = {
                "profile": cmd_profile,
                "majorize": cmd_majorize,
                "entropy": cmd_entropy,
                "sigma": cmd_sigma,
                "theorem2": cmd_theorem2,
            }[args.command]
            report, extra = handler(args)
    except TheoremViolation as exc:
        print(f"phasemaj: THEOREM VIOLATION: {exc}", file=sys.stderr)
        print(f"phasemaj: instance: {exc.instance!r}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ParseError, NotNormalized, BoundExceeded) as exc:
        print(f"phasemaj: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhasemajError as exc:
        print(f"phasemaj: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"phasemaj: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = report.to_json()
    if args.out:
        _write(args.out, text)
    elif extra is None:
        sys.stdout.write(text)
    if extra is not None:
        sys.stdout.write(extra)
    return EXIT_OK if report.ok else EXIT_FAIL
