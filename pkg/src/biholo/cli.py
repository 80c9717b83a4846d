"""Command-line front end.

Exit codes: 0 clean (no violation found / all certificates hold),
2 finding (witness, violation, failed certificate), 1 usage or input error.

growth CSV columns: norm_z, norm_fz, lower, upper, ok
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import criteria, mappings, oned
from .linalg import vector_from_json
from .mappings import SpecError
from .search import SearchConfig, find_starlike_violation, search, seeded_witness

DEFAULT_SEED = 20240101
EXIT_OK, EXIT_USAGE, EXIT_FINDING = 0, 1, 2


class UsageError(Exception):
    pass


def _finite(obj):
    """Replace non-finite floats by None so reports stay valid JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_finite(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def load_mapping(path: str) -> mappings.Mapping:
    try:
        if path == "-":
            obj = json.load(sys.stdin)
        else:
            with open(path) as fh:
                obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    try:
        return mappings.from_json(obj)
    except SpecError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def search_config(args) -> SearchConfig:
    try:
        return SearchConfig(
            samples=args.samples,
            refine_steps=args.refine_steps,
            seed=args.seed,
            radius_cap=args.radius_cap,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _alpha(args) -> float:
    try:
        return criteria.check_alpha(args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _config_json(cfg: SearchConfig) -> dict:
    return {
        "samples": cfg.samples,
        "refine_steps": cfg.refine_steps,
        "seed": cfg.seed,
        "radius_cap": cfg.radius_cap,
        "tol": cfg.tol,
    }


def cmd_check_convex(args) -> int:
    f = load_mapping(args.spec)
    alpha = _alpha(args)
    cfg = search_config(args)
    rep = search(f, alpha, cfg)
    emit({"command": "check-convex", "mapping": f.to_json(), "config": _config_json(cfg), "result": rep.to_json()}, args.out)
    return EXIT_OK if rep.verdict == "no_violation_found" else EXIT_FINDING


def cmd_check_starlike(args) -> int:
    f = load_mapping(args.spec)
    alpha = _alpha(args)
    cfg = search_config(args)
    rep = find_starlike_violation(f, alpha, cfg)
    emit({"command": "check-starlike", "mapping": f.to_json(), "config": _config_json(cfg), "result": rep.to_json()}, args.out)
    return EXIT_FINDING if rep.violations or rep.singular_points else EXIT_OK


def cmd_certify(args) -> int:
    f = load_mapping(args.spec)
    alpha = _alpha(args)
    try:
        mappings.as_polynomial(f)
    except TypeError as exc:
        raise UsageError(f"coefficient certificates need a polynomial mapping: {exc}") from exc
    reports = [criteria.coeff_certificate_convex(f, alpha), criteria.coeff_certificate_starlike(f, alpha)]
    if args.c is not None:
        if not 0.0 <= args.c < 1.0:
            raise UsageError("--c must lie in [0, 1)")
        reports.append(criteria.derivative_bound_certificate(f, alpha, args.c, search_config(args)))
    emit(
        {"command": "certify", "alpha": alpha, "mapping": f.to_json(), "certificates": [r.to_json() for r in reports]},
        args.out,
    )
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FINDING


def constants_report(alpha: float) -> dict:
    beta = criteria.beta_of_alpha(alpha)
    table = []
    for r in np.round(np.linspace(0.1, 0.9, 9), 10):
        lo, up = criteria.growth_bounds(beta, float(r))
        table.append({"r": float(r), "lower": lo, "upper": up})
    return {
        "alpha": alpha,
        "A_alpha": criteria.a_alpha(alpha),
        "beta": beta,
        "covering_constant": criteria.covering_constant(beta),
        "growth_table": table,
    }


def cmd_constants(args) -> int:
    emit({"command": "constants", **constants_report(_alpha(args))}, args.out)
    return EXIT_OK


def parse_oned(text: str) -> oned.OneDFunction:
    """``identity``, ``exp_type=LAMBDA``, ``koebe_order=ALPHA``,
    ``power_series=a2,a3,...`` (Python complex literals) or a JSON object."""
    text = text.strip()
    try:
        if text.startswith("{"):
            return oned.from_json(json.loads(text))
        name, _, arg = text.partition("=")
        if name == "identity":
            return oned.Identity()
        if name == "exp_type":
            return oned.ExpType(complex(arg.replace(" ", "")))
        if name == "koebe_order":
            return oned.KoebeOrder(float(arg))
        if name == "power_series":
            return oned.PowerSeries([complex(c) for c in arg.split(",") if c])
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad 1-D function {text!r}: {exc}") from exc
    raise UsageError(f"unknown 1-D function {text!r}")


def cmd_phi_build(args) -> int:
    gs = [parse_oned(g) for g in args.g]
    if args.u:
        try:
            with open(args.u) as fh:
                us = np.array([vector_from_json(v) for v in json.load(fh)])
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load directions from {args.u}: {exc}") from exc
    else:
        if args.n is None:
            raise UsageError("give --n (standard basis directions) or --u")
        if len(gs) > args.n:
            raise UsageError(f"m = {len(gs)} exceeds n = {args.n}")
        us = np.eye(args.n, dtype=np.complex128)[: len(gs)]
    try:
        f = mappings.PhiMapping(us, gs, tol=1e-10)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    emit(f.to_json(), args.out)
    return EXIT_OK


def cmd_alexander(args) -> int:
    f = load_mapping(args.spec)
    try:
        g = mappings.alexander_transform(f)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    emit(g.to_json(), args.out)
    return EXIT_OK


def growth_csv(rows: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["norm_z", "norm_fz", "lower", "upper", "ok"])
    for r, fz, lo, up in rows:
        ok = lo * (1 - criteria.GROWTH_RTOL) <= fz <= up * (1 + criteria.GROWTH_RTOL)
        w.writerow([repr(float(r)), repr(float(fz)), repr(float(lo)), repr(float(up)), int(ok)])
    return buf.getvalue()


def cmd_growth(args) -> int:
    f = load_mapping(args.spec)
    alpha = _alpha(args)
    cfg = search_config(args)
    rep = criteria.growth_check(f, alpha, cfg, keep_rows=bool(args.csv))
    if args.csv:
        atomic_write(args.csv, growth_csv(rep.rows))
    emit({"command": "growth", "mapping": f.to_json(), "config": _config_json(cfg), "result": rep.to_json()}, args.out)
    return EXIT_OK if rep.holds else EXIT_FINDING


def _vector_arg(text: str, name: str):
    try:
        return vector_from_json(json.loads(text))
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"{name}: expected a JSON list of [re, im] pairs ({exc})") from exc


def cmd_seeded_witness(args) -> int:
    f = load_mapping(args.spec)
    alpha = _alpha(args)
    cfg = search_config(args)
    z = _vector_arg(args.z, "--z")
    x = _vector_arg(args.x, "--x")
    try:
        w = seeded_witness(f, alpha, z, x, cfg, refine_locally=not args.no_refine)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    emit(
        {
            "command": "seeded-witness",
            "mapping": f.to_json(),
            "config": _config_json(cfg),
            "result": {"alpha": alpha, "witness": None if w is None else w.to_json()},
        },
        args.out,
    )
    return EXIT_FINDING if w is not None else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biholo", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=True, sampling=True):
        if spec:
            sp.add_argument("spec", help="mapping spec JSON file ('-' for stdin)")
        sp.add_argument("--alpha", type=float, default=0.0, help="order alpha in [0, 1)")
        if sampling:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
            sp.add_argument("--samples", type=int, default=SearchConfig.samples)
            sp.add_argument("--radius-cap", type=float, default=SearchConfig.radius_cap)
            sp.add_argument("--refine-steps", type=int, default=SearchConfig.refine_steps)
        sp.add_argument("--out", help="write the JSON report here instead of stdout")

    sp = sub.add_parser("check-convex", help="search for a convexity-of-order-alpha witness")
    common(sp)
    sp.set_defaults(func=cmd_check_convex)

    sp = sub.add_parser("check-starlike", help="sample for starlikeness-of-order-alpha violations")
    common(sp)
    sp.set_defaults(func=cmd_check_starlike)

    sp = sub.add_parser("certify", help="coefficient certificates (+ sampled |Df - I| <= c certificate)")
    common(sp)
    sp.add_argument("--c", type=float, default=None, help="bound c for the sampled Df certificate")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("constants", help="A(alpha), beta(alpha), covering constant, growth table")
    common(sp, spec=False, sampling=False)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("phi-build", help="write a Phi mapping spec")
    sp.add_argument("--g", action="append", required=True,
                    help="1-D function: identity | exp_type=LAMBDA | koebe_order=ALPHA | power_series=a2,a3 | JSON")
    sp.add_argument("--n", type=int, help="dimension; directions default to e_1..e_m")
    sp.add_argument("--u", help="JSON file with the list of orthonormal direction vectors")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_phi_build)

    sp = sub.add_parser("alexander", help="write the spec of z -> Df(z)(z)")
    sp.add_argument("spec")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_alexander)

    sp = sub.add_parser("growth", help="sampled growth bounds; --csv writes norm_z,norm_fz,lower,upper,ok")
    common(sp)
    sp.add_argument("--csv", help="CSV output path")
    sp.set_defaults(func=cmd_growth)

    sp = sub.add_parser("seeded-witness", help="margin at a given (z, x), refined locally")
    common(sp)
    sp.add_argument("--z", required=True, help="JSON list of [re, im] pairs")
    sp.add_argument("--x", required=True, help="JSON list of [re, im] pairs")
    sp.add_argument("--no-refine", action="store_true")
    sp.set_defaults(func=cmd_seeded_witness)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
