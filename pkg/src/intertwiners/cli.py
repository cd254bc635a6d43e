"""Command-line interface.

Subcommands::

    intertwiners analyze  MATRIX
    intertwiners conserve MATRIX [--phi PHI] [--relation {intertwine,anticommute}]
                                 [--method {spectral,recursive,nullspace}] [--seed auto|FILE]
    intertwiners evolve   MATRIX --state STATE [--tmax T] [--steps N] [--etas FILE]
                                 [--gamma-shift G] [--dps DIGITS]
    intertwiners model    NAME [--param key=value ...]
    intertwiners floquet  SEGMENTS [--periods P] [--state STATE]

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 no symmetry or
seed found. ``--tol`` (or ``INTERTWINER_TOL``) sets the global tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as jio
from .dynamics import (
    FloquetDrive,
    drift_report,
    floquet_propagator,
    stroboscopic_etas,
    stroboscopic_report,
)
from .intertwine import (
    NoSeedError,
    Relation,
    SeedError,
    SpectrumNotSymmetric,
    eta_from_spectrum,
    recursive_tower,
    seed_eta,
    solve_relation,
)
from .linalg import TOL_ENV_VAR, NumericalFailure, default_tol
from .models import MODELS, build_model
from .spectral import eig_biorthogonal, spectrum_symmetry

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_NOSEED = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _relation(args) -> Relation:
    if args.relation == "anticommute":
        return Relation.chiral()
    return Relation("intertwine", args.phi)


# --------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    h = jio.read_matrix(args.matrix)
    spec = eig_biorthogonal(h, tol=args.tol)
    report = spec.report
    syms = spectrum_symmetry(report.values())
    out = {
        "n": int(h.shape[0]),
        "eigenvalues": [[z.real, z.imag] for z in report.values()],
        "clusters": jio.report_to_json(report),
        "diagonalizable": report.is_diagonalizable,
        "symmetries": [{"kind": s.kind, "phi": s.phi} for s in syms],
    }
    _emit(jio.write_json(out), args.output)
    return EXIT_OK


def _auto_seed(h, seed, syms, rel, tol):
    if seed is not None:
        return seed
    if not syms:
        syms = spectrum_symmetry(eig_biorthogonal(h, tol=tol).report.values())
    for sym in syms:
        if sym.kind == "chiral" and rel.kind == "anticommute":
            return seed_eta(h, sym, tol)
        if sym.kind != "chiral" and rel.kind == "intertwine" and np.isclose(sym.relation_phi, rel.phi):
            return seed_eta(h, sym, tol)
    raise NoSeedError("no symmetry matching the requested relation")


def cmd_conserve(args) -> int:
    h, seed, syms = jio.read_model(args.matrix)
    rel = _relation(args)
    tol = args.tol
    if args.method == "nullspace":
        result = solve_relation(h, rel, tol)
    elif args.method == "spectral":
        result = eta_from_spectrum(eig_biorthogonal(h, tol=tol), rel=rel, tol=tol)
    else:
        if args.seed == "auto":
            eta1 = _auto_seed(h, seed, syms, rel, tol)
        else:
            eta1 = jio.read_matrix(args.seed)
        result = recursive_tower(eta1, h, rel, tol)
    _emit(jio.write_json(jio.etas_to_json(result)), args.output)
    return EXIT_OK


def cmd_evolve(args) -> int:
    h, seed, syms = jio.read_model(args.matrix)
    psi = jio.read_state(args.state)
    if psi.size != h.shape[0]:
        raise InputError(f"state has dimension {psi.size}, matrix has {h.shape[0]}")
    if args.etas:
        etas = jio.etas_from_json(jio.read_json(args.etas))
    else:
        # conserved operators of the unshifted generator H + i Gamma
        unshifted = h + 1j * args.gamma_shift * np.eye(h.shape[0])
        etas = list(solve_relation(unshifted, Relation.pt(), args.tol).etas)
        if not etas:
            raise NoSeedError("no conserved operators to track")
    rep = drift_report(h, etas, psi, args.tmax, args.steps, args.gamma_shift, args.dps)
    text = rep.to_csv(args.output)
    if not args.output:
        sys.stdout.write(text)
    flag = " (imaginary residue flagged)" if rep.flagged.any() else ""
    print(f"max relative drift: {rep.worst_drift:.3e}{flag}", file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def _parse_params(pairs) -> dict:
    params = {}
    for item in pairs or []:
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    return params


def cmd_model(args) -> int:
    params = _parse_params(args.param)
    try:
        h, eta1, syms = build_model(args.name, **params)
    except KeyError as exc:
        raise InputError(str(exc)) from exc
    spec = MODELS[args.name]
    obj = jio.matrix_to_json(h)
    obj["model"] = args.name
    obj["params"] = {k: spec.params[k][0](params.get(k, spec.params[k][1])) for k in spec.params}
    obj["seed"] = None if eta1 is None else jio.matrix_to_json(eta1)
    obj["symmetry"] = [jio.symmetry_to_json(s) for s in syms]
    _emit(jio.write_json(obj), args.output)
    return EXIT_OK


def cmd_floquet(args) -> int:
    try:
        segments = jio.read_segments(args.segments)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed segment file: {exc}") from exc
    drive = FloquetDrive(tuple(segments))
    g = floquet_propagator(drive)
    etas = stroboscopic_etas(g, args.tol)
    out = {
        "period": drive.period,
        "propagator": jio.matrix_to_json(g),
        "stroboscopic": jio.etas_to_json(etas),
    }
    outdir = Path(args.output_dir) if args.output_dir else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
        jio.write_json(out, outdir / "floquet.json")
    else:
        print(jio.write_json(out))
    if args.state:
        psi = jio.read_state(args.state)
        if psi.size != drive.dim:
            raise InputError("state dimension does not match the drive")
        rep = stroboscopic_report(drive, etas, psi, args.periods)
        csv_path = outdir / "stroboscopic.csv" if outdir else None
        text = rep.to_csv(csv_path)
        if csv_path is None:
            sys.stdout.write(text)
        print(f"max stroboscopic drift: {rep.worst_drift:.3e}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intertwiners", description="Conserved observables of non-Hermitian Hamiltonians.")
    p.add_argument("--tol", type=_positive, default=None, help=f"global tolerance (default {TOL_ENV_VAR} or 1e-10)")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="eigenvalues, degeneracies and spectral symmetries")
    a.add_argument("matrix")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("conserve", help="construct conserved observables")
    c.add_argument("matrix")
    c.add_argument("--phi", type=float, default=0.0, help="relation phase: eta H = exp(i phi) H^dagger eta")
    c.add_argument("--relation", choices=("intertwine", "anticommute"), default="intertwine")
    c.add_argument("--method", choices=("spectral", "recursive", "nullspace"), default="nullspace")
    c.add_argument("--seed", default="auto", help="'auto' or a matrix JSON file")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_conserve)

    e = sub.add_parser("evolve", help="expectation-value drift under expm(-iHt)")
    e.add_argument("matrix")
    e.add_argument("--state", required=True, help="JSON file or comma-separated complex entries")
    e.add_argument("--tmax", type=_positive, default=20.0)
    e.add_argument("--steps", type=int, default=2001)
    e.add_argument("--etas", help="operator-set JSON (default: nullspace set of H + i*shift)")
    e.add_argument("--gamma-shift", type=float, default=0.0)
    e.add_argument("--dps", type=int, default=None, help="evolve in mpmath at this many digits")
    e.add_argument("-o", "--output", help="CSV path (default: stdout)")
    e.set_defaults(func=cmd_evolve)

    m = sub.add_parser("model", help="write a named model to matrix JSON with metadata")
    m.add_argument("name", choices=sorted(MODELS))
    m.add_argument("--param", action="append", metavar="KEY=VALUE")
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_model)

    f = sub.add_parser("floquet", help="one-period propagator and stroboscopic observables")
    f.add_argument("segments")
    f.add_argument("--periods", type=int, default=100)
    f.add_argument("--state")
    f.add_argument("-o", "--output-dir")
    f.set_defaults(func=cmd_floquet)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = default_tol()
        if getattr(args, "steps", 2) < 2:
            raise InputError("--steps must be at least 2")
        if getattr(args, "periods", 1) < 1:
            raise InputError("--periods must be positive")
        return args.func(args)
    except (NoSeedError, SpectrumNotSymmetric, SeedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOSEED
    except (NumericalFailure, np.linalg.LinAlgError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
