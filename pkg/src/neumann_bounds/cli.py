"""``nbl``: bounds, oracle solves, scans, perturbation runs and equality audits.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 a bound or
invariant was violated.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import perturb, verify
from .bounds import parallelogram_bounds, strip_bounds
from .exceptions import CoverageGap, NeumannBoundsError, SolverFailure
from .geometry import Parallelogram, StripDomain, domain_from_json, parallelogram_from_vectors
from .solver import assemble, extrapolate, lowest_eigenpairs, Grid, write_matrix
from .transform import form_for

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VIOLATION = 0, 2, 3, 4


class InputError(Exception):
    pass


def _dumps(obj):
    # repr of a float is the shortest round-tripping form (<= 17 significant digits)
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _positive(kind):
    def parse(value):
        try:
            v = kind(value)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {value}")
        return v

    return parse


def _add_domain(p, strip=True):
    g = p.add_mutually_exclusive_group(required=False)
    g.add_argument("--parallelogram", nargs=3, type=float, metavar=("L1", "L2", "PHI"), help="side lengths and angle")
    g.add_argument("--vectors", nargs=4, type=float, metavar=("A", "B", "C", "D"), help="spanning vectors (A,B) and (C,D)")
    g.add_argument("--domain", metavar="FILE", help="domain JSON file")
    if strip:
        g.add_argument("--strip", metavar="FILE", help="strip domain JSON file")
    p.add_argument("--degrees", action="store_true", help="PHI is given in degrees")


def _domain(cfg):
    if cfg.get("parallelogram"):
        l1, l2, phi = cfg["parallelogram"]
        if cfg.get("degrees"):
            phi = math.radians(phi)
        return Parallelogram.from_sides(l1, l2, phi)
    if cfg.get("vectors"):
        a, b, c, d = cfg["vectors"]
        return parallelogram_from_vectors((a, b), (c, d))
    path = cfg.get("strip") or cfg.get("domain")
    if not path:
        raise InputError("no domain given (use --parallelogram, --vectors, --domain or --strip)")
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read domain file {path}: {exc}") from exc
    dom = domain_from_json(obj)
    if cfg.get("strip") and not isinstance(dom, StripDomain):
        raise InputError(f"{path} does not describe a strip")
    return dom


def build_parser():
    p = argparse.ArgumentParser(prog="nbl", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=_positive(int), default=None, help="worker cap (fallback: NBL_THREADS)")
    p.add_argument("--dump-config", action="store_true", help="print the resolved configuration and exit")
    p.add_argument("--config", metavar="FILE", help="run a configuration written by --dump-config")
    sub = p.add_subparsers(dest="command")

    b = sub.add_parser("bounds", help="closed-form upper bounds")
    _add_domain(b)
    b.add_argument("--out", help="write JSON here instead of stdout")

    s = sub.add_parser("solve", help="oracle eigenvalues")
    _add_domain(s)
    s.add_argument("--n", type=_positive(int), default=32)
    s.add_argument("--k", type=_positive(int), default=4)
    s.add_argument("--no-extrapolate", action="store_true", help="report the single grid n only")
    s.add_argument("--dump-matrix", metavar="PREFIX", help="write PREFIX_K.txt and PREFIX_M.txt on grid n")
    s.add_argument("--out")

    for name, helptext in (("scan", "parallelogram parameter scan"), ("strip-scan", "constant-width strip scan")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("--count", type=_positive(int), default=1000 if name == "scan" else 50)
        c.add_argument("--seed", type=lambda v: int(v, 0), default=verify.DEFAULT_SEED)
        c.add_argument("--n", type=_positive(int), default=24)
        c.add_argument("--refine-n", type=int, default=48)
        c.add_argument("--csv", help="CSV output path (stdout if omitted)")
        c.add_argument("--summary", help="summary JSON path (stderr if omitted)")
        if name == "scan":
            c.add_argument("--sampler", choices=("random", "grid", "square"), default="random")
            c.add_argument("--no-square", action="store_true", help="do not prepend the square")
        else:
            c.add_argument("--ratio", nargs=2, type=_positive(float), default=[1.0, 4.0], metavar=("MIN", "MAX"))
            c.add_argument("--max-k", type=_positive(int), default=3)
            c.add_argument("--slope", nargs=2, type=float, default=[0.3, 1.5], metavar=("MIN", "MAX"))
            c.add_argument("--rectangles", type=float, default=0.1, help="fraction of flat samples")
            c.add_argument("--rho", type=float, nargs="*", default=[], help="also check class A_rho membership")

    t = sub.add_parser("perturb", help="boundary perturbation of the unit square")
    t.add_argument("--t", type=float, nargs="+", default=list(perturb.DEFAULT_T))
    t.add_argument("--n", type=_positive(int), default=32)
    t.add_argument("--bump", choices=("quartic", "sine", "flat"), default="quartic")
    t.add_argument("--scale", type=float, default=None, help="bump amplitude constant")
    t.add_argument("--csv")
    t.add_argument("--json")

    a = sub.add_parser("audit", help="equality clauses for one parallelogram")
    _add_domain(a, strip=False)
    a.add_argument("--n", type=_positive(int), default=24)
    a.add_argument("--out")
    return p


def _resolve(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        base = vars(parser.parse_args([cfg["command"]] if cfg.get("command") else []))
        base.update(cfg)
        if args.threads is not None:
            base["threads"] = args.threads
        base["dump_config"] = args.dump_config or base.get("dump_config", False)
        cfg = base
    else:
        cfg = vars(args)
    cfg.pop("config", None)
    if not cfg.get("command"):
        parser.print_usage(sys.stderr)
        raise InputError("a subcommand is required")
    if cfg.get("threads") is None:
        env = os.environ.get("NBL_THREADS")
        if env:
            try:
                cfg["threads"] = int(env)
            except ValueError as exc:
                raise InputError(f"NBL_THREADS must be an integer, got {env!r}") from exc
    return cfg


def cmd_bounds(cfg):
    dom = _domain(cfg)
    if isinstance(dom, Parallelogram):
        out = {"type": "parallelogram", "l1": dom.l1, "l2": dom.l2, "phi": dom.phi, **parallelogram_bounds(dom).to_dict()}
    else:
        out = {"type": "strip", **strip_bounds(dom).to_dict()}
    _emit(_dumps(out), cfg.get("out"))
    return EXIT_OK


def cmd_solve(cfg):
    dom = _domain(cfg)
    n, k = cfg["n"], cfg["k"]
    if k > 10:
        raise InputError("k must be at most 10")
    K, M = assemble(form_for(dom), Grid(n))
    coarse = lowest_eigenpairs(K, M, k, n=n).eigenvalues
    out = {"n": n, "k": k}
    if cfg.get("no_extrapolate"):
        out["eigenvalues"] = coarse
    else:
        K2, M2 = assemble(form_for(dom), Grid(2 * n))
        fine = lowest_eigenpairs(K2, M2, k, n=2 * n).eigenvalues
        est, err = extrapolate(coarse, fine)
        out.update(eigenvalues=est, errors=err, coarse=coarse, fine=fine)
    if cfg.get("dump_matrix"):
        write_matrix(cfg["dump_matrix"] + "_K.txt", K, n)
        write_matrix(cfg["dump_matrix"] + "_M.txt", M, n)
    _emit(_dumps(out), cfg.get("out"))
    return EXIT_OK


def _write_csv(writer, records, path):
    if path:
        with open(path, "w", newline="") as fh:
            writer(records, fh)
    else:
        writer(records, sys.stdout)


def _write_summary(summary, path):
    text = _dumps(summary)
    if path:
        _emit(text, path)
    else:
        print(text, file=sys.stderr)


def cmd_scan(cfg):
    samples = verify.sample_parameters(cfg["sampler"], cfg["count"], cfg["seed"], include_square=not cfg.get("no_square"))
    recs = verify.scan_parallelograms(samples, n=cfg["n"], refine_n=cfg["refine_n"], threads=cfg.get("threads"))
    _write_csv(verify.write_scan_csv, recs, cfg.get("csv"))
    summary = verify.scan_summary(recs)
    _write_summary(summary, cfg.get("summary"))
    if summary["failures"]:
        return EXIT_SOLVER
    return EXIT_VIOLATION if summary["violations"] else EXIT_OK


def cmd_strip_scan(cfg):
    lo, hi = cfg["ratio"]
    if lo > hi:
        raise InputError("--ratio MIN must not exceed MAX")
    for rho in cfg.get("rho") or []:
        if not 0.0 < rho < 1.0:
            raise InputError(f"rho must lie in (0, 1), got {rho}")
    strips = verify.sample_strips(
        cfg["count"], cfg["seed"], (lo, hi), cfg["max_k"], tuple(cfg["slope"]), cfg["rectangles"]
    )
    recs = verify.scan_strips(strips, n=cfg["n"], refine_n=cfg["refine_n"], rhos=cfg.get("rho") or (), threads=cfg.get("threads"))
    _write_csv(verify.write_strip_csv, recs, cfg.get("csv"))
    violations = sum(len(r.violations) for r in recs)
    mismatches = sum(r.equality == "MISMATCH" for r in recs)
    summary = {
        "records": len(recs),
        "violations": violations,
        "equality_mismatches": mismatches,
        "inconclusive": sum(r.equality == "inconclusive" for r in recs),
        "failures": sum(r.error is not None for r in recs),
    }
    _write_summary(summary, cfg.get("summary"))
    if summary["failures"]:
        return EXIT_SOLVER
    return EXIT_VIOLATION if violations or mismatches else EXIT_OK


def _bump(cfg):
    kind, scale = cfg["bump"], cfg.get("scale")
    if kind == "quartic":
        return perturb.BumpProfile() if scale is None else perturb.BumpProfile("quartic", scale)
    if kind == "sine":
        return perturb.BumpProfile.sine() if scale is None else perturb.BumpProfile.sine(scale)
    return perturb.BumpProfile.flat() if scale is None else perturb.BumpProfile.flat(scale)


def cmd_perturb(cfg):
    ts = cfg["t"]
    if any(t == 0 or abs(t) > 0.1 for t in ts):
        raise InputError("every t must satisfy 0 < |t| <= 0.1")
    if cfg["n"] % 4:
        raise InputError("--n must be a multiple of 4")
    rep = perturb.derivative_check(_bump(cfg), ts, n=cfg["n"], threads=cfg.get("threads"))
    if cfg.get("csv"):
        with open(cfg["csv"], "w", newline="") as fh:
            rep.write_csv(fh)
    else:
        rep.write_csv(sys.stdout)
    if cfg.get("json"):
        _emit(rep.to_json(), cfg["json"])
    else:
        print(rep.to_json(), file=sys.stderr)
    return EXIT_OK


def cmd_audit(cfg):
    dom = _domain(cfg)
    if not isinstance(dom, Parallelogram):
        raise InputError("audit takes a parallelogram")
    rep = verify.equality_audit(dom, n=cfg["n"])
    out = {
        "classification": rep.classification,
        "mu2": rep.mu2,
        "mu3": rep.mu3,
        "mu2_err": rep.mu2_err,
        "mu3_err": rep.mu3_err,
        "bounds": rep.bounds.to_dict(),
        "checks": {k: {"passed": ok, "gap": gap} for k, (ok, gap) in rep.checks.items()},
        "inconclusive": rep.inconclusive,
    }
    _emit(_dumps(out), cfg.get("out"))
    return EXIT_OK if rep.passed else EXIT_VIOLATION


COMMANDS = {
    "bounds": cmd_bounds,
    "solve": cmd_solve,
    "scan": cmd_scan,
    "strip-scan": cmd_strip_scan,
    "perturb": cmd_perturb,
    "audit": cmd_audit,
}


def main(argv=None):
    try:
        cfg = _resolve(argv)
        if cfg.pop("dump_config", False):
            print(_dumps(cfg))
            return EXIT_OK
        return COMMANDS[cfg["command"]](cfg)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    except SolverFailure as exc:
        print(f"nbl: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CoverageGap as exc:
        print(f"nbl: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (InputError, NeumannBoundsError, ValueError, KeyError, TypeError) as exc:
        print(f"nbl: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
