"""Command-line front end.

Three subcommands:

* ``eval``    -- one characteristic evaluation, JSON report.
* ``surface`` -- T over a (tau, r) grid, streamed CSV.
* ``verify``  -- identity/property suites, JSON report, exit 3 on failure.

Exit codes: 0 success, 1 input error, 2 quadrature non-convergence,
3 verification failure.  Output is byte-deterministic for a fixed
configuration, including under ``--jobs N``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import annuluschar, oracle, winding
from .annuluschar import AnnulusWindow
from .funcdsl import (
    Const,
    DslError,
    FunctionModel,
    ParseError,
    RationalFunction,
    parse,
)
from .quad import QuadConfig

__all__ = ["main", "build_function", "RunConfig"]

_FLOAT_FMT = "%.17e"


class CliInputError(Exception):
    """Bad flags, bad function text, or an unsupported model for a suite."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise CliInputError(message)


@dataclass
class RunConfig:
    """Materialized command configuration (one subcommand invocation)."""

    fn_text: str
    model: FunctionModel
    quad: QuadConfig
    jobs: int
    seed: int
    out: Optional[str]
    fmt: str


# ---------------------------------------------------------------------------
# Function-spec parsing
# ---------------------------------------------------------------------------

_RAT_FACTOR_RE = re.compile(r"^\(\s*(?P<root>[^,]+)\s*,\s*(?P<mult>[+-]?\d+)\s*\)$")


def _parse_complex_literal(text: str) -> complex:
    model = parse(text)
    tree = model.tree
    if not isinstance(tree, Const):
        raise CliInputError(f"expected a constant, got {text!r}")
    return tree.value


def build_function(text: str) -> FunctionModel:
    """Parse ``--fn``: DSL text, or ``rational: scale; (root,mult); ...``.

    DSL input is converted to factored rational form whenever the tree is
    free of ``exp``, which unlocks the exact counting paths.
    """
    stripped = text.strip()
    if stripped.startswith("rational:"):
        body = stripped[len("rational:") :]
        parts = [p.strip() for p in body.split(";") if p.strip()]
        if not parts:
            raise CliInputError("rational spec needs at least a scale")
        scale = _parse_complex_literal(parts[0])
        factors = []
        for part in parts[1:]:
            m = _RAT_FACTOR_RE.match(part)
            if not m:
                raise CliInputError(f"bad factor {part!r}; expected (root,mult)")
            root = _parse_complex_literal(m.group("root"))
            factors.append((root, int(m.group("mult"))))
        try:
            return RationalFunction(scale, tuple(factors))
        except ValueError as exc:
            raise CliInputError(str(exc)) from exc
    model = parse(text)
    converted = oracle.as_rational(model)
    return converted if converted is not None else model


def _parse_grid(spec: str, flag: str) -> np.ndarray:
    m = re.match(r"^([^:]+):([^:]+):(\d+)(\(log\))?$", spec.strip())
    if not m:
        raise CliInputError(f"{flag} expects lo:hi:n or lo:hi:n(log), got {spec!r}")
    lo, hi, n = float(m.group(1)), float(m.group(2)), int(m.group(3))
    if n < 1 or n > 10_000 or lo <= 0 or hi < lo:
        raise CliInputError(f"{flag}: invalid grid bounds {spec!r}")
    if n == 1:
        return np.asarray([lo])
    if m.group(4):
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _emit(out_path: Optional[str], text: str) -> None:
    stream, owned = _open_out(out_path)
    try:
        stream.write(text)
    finally:
        if owned:
            stream.close()


def _error_payload(exc: Exception) -> dict:
    payload = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        payload["offset"] = exc.offset
    return {"error": payload}


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def _cmd_eval(args) -> int:
    cfg = _quad_config(args)
    model = build_function(args.fn)
    w = AnnulusWindow(args.tau, args.r)
    report = annuluschar.characteristic(model, w, cfg)
    if not report.quad.converged:
        _emit(args.out, json.dumps(_error_payload(
            RuntimeError("quadrature did not converge")
        )) + "\n")
        return 2
    payload = {
        "N": report.N,
        "m_inner": report.m_inner,
        "m_outer": report.m_outer,
        "m_unit": report.m_unit,
        "m_annulus": report.m_annulus,
        "c_f": report.cf,
        "T": report.T,
        "tau": w.tau,
        "r": w.r,
        "quad_error": report.quad.total_error,
    }
    _emit(args.out, json.dumps(payload) + "\n")
    return 0


# ---------------------------------------------------------------------------
# surface
# ---------------------------------------------------------------------------


def _surface_point(task) -> tuple:
    model, tau, r, cfg = task
    try:
        report = annuluschar.characteristic(model, AnnulusWindow(tau, r), cfg)
        status = "ok" if report.quad.converged else "non-convergent"
        return (tau, r, report.N, report.m_annulus, report.cf, report.T,
                report.quad.total_error, status)
    except Exception as exc:  # recorded per-row, never fatal
        nan = float("nan")
        return (tau, r, nan, nan, nan, nan, nan, type(exc).__name__)


def _cmd_surface(args) -> int:
    cfg = _quad_config(args)
    model = build_function(args.fn)
    taus = _parse_grid(args.tau_grid, "--tau-grid")
    rs = _parse_grid(args.r_grid, "--r-grid")
    if taus.size * rs.size > 10_000:
        raise CliInputError("grid larger than 10^4 points")
    tasks = [(model, float(tau), float(r), cfg) for tau in taus for r in rs]

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_surface_point, tasks, chunksize=8))
    else:
        rows = [_surface_point(t) for t in tasks]

    stream, owned = _open_out(args.out)
    try:
        stream.write("tau,r,N,m_annulus,c_f,T,quad_error,status\n")
        any_bad = False
        for row in rows:
            nums = ",".join(_FLOAT_FMT % v for v in row[:7])
            stream.write(f"{nums},{row[7]}\n")
            if row[7] != "ok":
                any_bad = True
    finally:
        if owned:
            stream.close()
    return 2 if any_bad else 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _require_rational(model: FunctionModel, suite: str) -> RationalFunction:
    if isinstance(model, RationalFunction):
        return model
    raise CliInputError(f"suite {suite!r} needs a rational function")


def _suite_jensen1(model, args, cfg, rng):
    s, r = 1.0 / args.tau, args.r
    residual = annuluschar.jensen_two_circle_residual(model, s, r, cfg)
    return {"s": s, "r": r}, residual, 1e-8


def _suite_jensen2(model, args, cfg, rng):
    w = AnnulusWindow(args.tau, args.r)
    residual = annuluschar.jensen_annulus_residual(model, w, cfg)
    return {"tau": w.tau, "r": w.r}, residual, 1e-8


def _suite_eq12(model, args, cfg, rng):
    rat = _require_rational(model, "eq12")
    t = args.r if args.r > 1 else 2.0
    outer, inner = winding.argument_principle_residuals(rat, t)
    return {"t": t}, float(max(abs(outer), abs(inner))), 0.0


def _suite_cartan(model, args, cfg, rng):
    rat = _require_rational(model, "cartan")
    w = AnnulusWindow(args.tau, args.r)
    residual = annuluschar.cartan_average_residual(rat, w, args.nphi, cfg)
    return {"tau": w.tau, "r": w.r, "nphi": args.nphi}, residual, 1e-6


def _suite_lemma4(model, args, cfg, rng):
    residual = annuluschar.unit_index_average_residual(model, args.nphi, cfg)
    return {"nphi": args.nphi}, residual, 1e-6


def _suite_lemma5(model, args, cfg, rng):
    rat = oracle.as_rational(model)
    target = rat if rat is not None else model
    worst = 0.0
    trials = 0
    attempts = 0
    while trials < 5 and attempts < 200:
        attempts += 1
        zeta = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        t = float(rng.uniform(0.8, 1.3))
        try:
            residual = annuluschar.index_shift_residual(target, t, zeta, cfg)
        except Exception:
            continue
        worst = max(worst, residual)
        trials += 1
    if trials < 5:
        raise CliInputError("could not find admissible (zeta, t) samples")
    return {"trials": trials}, worst, 1e-9


def _suite_lemma6(model, args, cfg, rng):
    residual = annuluschar.torus_average_residual(model, 512, cfg)
    return {"n_grid": 512}, residual, 1e-3


def _suite_fft(model, args, cfg, rng):
    rat = _require_rational(model, "fft")
    w = AnnulusWindow(args.tau, args.r)
    worst = 0.0
    used = []
    for a in (0.5 + 0.0j, -1.5 + 0.5j, 2.0 + 0.0j):
        try:
            report = annuluschar.first_fundamental(rat, a, w, cfg)
        except (winding.BoundaryRootError, ValueError):
            continue
        bound_overrun = max(0.0, abs(report.eps1) - report.eps1_bound - 1e-9)
        worst = max(worst, report.identity_residual, bound_overrun)
        used.append([a.real, a.imag])
    if not used:
        raise CliInputError("no admissible target values a")
    return {"tau": w.tau, "r": w.r, "a": used}, worst, 1e-7


def _suite_theorem1(model, args, cfg, rng):
    rat = _require_rational(model, "theorem1")
    taus = np.geomspace(1.0, max(args.tau, 2.0), 4)
    rs = np.geomspace(1.0, max(args.r, 2.0), 4)
    report = annuluschar.property_scan(rat, taus, rs, cfg, n_phi=args.nphi)
    worst = max(report.checks, key=lambda c: c.violation - c.limit)
    params = {
        "taus": [float(t) for t in taus],
        "rs": [float(r) for r in rs],
        "worst_check": worst.name,
    }
    return params, worst.violation, worst.limit


_SUITES = {
    "jensen1": _suite_jensen1,
    "jensen2": _suite_jensen2,
    "eq12": _suite_eq12,
    "cartan": _suite_cartan,
    "lemma4": _suite_lemma4,
    "lemma5": _suite_lemma5,
    "lemma6": _suite_lemma6,
    "fft": _suite_fft,
    "theorem1": _suite_theorem1,
}


def _cmd_verify(args) -> int:
    cfg = _quad_config(args)
    model = build_function(args.fn)
    names = [s.strip() for s in args.suite.split(",") if s.strip()]
    if not names:
        raise CliInputError("empty suite selection")
    for name in names:
        if name not in _SUITES:
            raise CliInputError(f"unknown suite {name!r}")
    rng = np.random.default_rng(args.seed)
    entries = []
    all_pass = True
    for name in names:
        params, residual, tolerance = _SUITES[name](model, args, cfg, rng)
        ok = bool(residual <= tolerance)
        all_pass &= ok
        entries.append(
            {
                "suite": name,
                "parameters": params,
                "residual": residual,
                "tolerance": tolerance,
                "pass": ok,
            }
        )
    _emit(args.out, json.dumps(entries) + "\n")
    return 0 if all_pass else 3


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _quad_config(args) -> QuadConfig:
    return QuadConfig(tol=args.tol, max_nodes=args.max_nodes)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="annuchar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--fn", required=True, help="function spec (DSL or rational:)")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-nodes", dest="max_nodes", type=int, default=1 << 20)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="single characteristic evaluation")
    common(p_eval)
    p_eval.add_argument("--tau", type=float, required=True)
    p_eval.add_argument("--r", type=float, required=True)
    p_eval.add_argument("--format", dest="fmt", choices=["json"], default="json")
    p_eval.set_defaults(handler=_cmd_eval)

    p_surface = sub.add_parser("surface", help="T over a window grid (CSV)")
    common(p_surface)
    p_surface.add_argument("--tau-grid", dest="tau_grid", required=True)
    p_surface.add_argument("--r-grid", dest="r_grid", required=True)
    p_surface.add_argument("--format", dest="fmt", choices=["csv"], default="csv")
    p_surface.set_defaults(handler=_cmd_surface)

    p_verify = sub.add_parser("verify", help="identity/property suites (JSON)")
    common(p_verify)
    p_verify.add_argument("--suite", required=True)
    p_verify.add_argument("--tau", type=float, default=2.0)
    p_verify.add_argument("--r", type=float, default=3.0)
    p_verify.add_argument("--nphi", type=int, default=256)
    p_verify.add_argument("--format", dest="fmt", choices=["json"], default="json")
    p_verify.set_defaults(handler=_cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except (CliInputError, DslError, ValueError, annuluschar.PoleEnumerationError,
            winding.UnsupportedCountError) as exc:
        sys.stdout.write(json.dumps(_error_payload(exc)) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
