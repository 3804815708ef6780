"""Command-line entry point: ``fracsim <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..boolfn import parse_function, spectrum_profile
from ..bounds import ETA_DEFAULT, bound_sheet
from ..frac.estimate import _json_default
from .config import FORMATS, MODES, ConfigError, ExperimentSpec, expand_cells, load_sweep
from .runner import EXIT_ERROR, EXIT_OK, HarnessError, run, sweep
from .verify import SUITES, render, run_suite


def _write(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, default=_json_default) + "\n"


def _cmd_simulate(args) -> int:
    spec = ExperimentSpec(subcommand="simulate", protocol=args.protocol, n=args.n, m=args.m, k=args.k,
                          ell=args.ell, radius=args.radius, delta=args.delta, f=args.f,
                          trials=args.trials, seed=args.seed, mode=args.mode, eta=args.eta,
                          output=args.output, format=args.format, jobs=args.jobs)
    result = run(spec, jobs=args.jobs)
    _write(result.to_json() if spec.format == "json" else result.to_csv(), spec.output)
    return result.exit_code


def _cmd_bounds(args) -> int:
    try:
        f = parse_function(args.f, args.k)
    except ValueError as exc:
        raise HarnessError(f"boolfn: f={args.f!r}: {exc}") from exc
    m = args.m if args.m is not None else max(1, args.n // 4)
    try:
        sheet = bound_sheet(f, args.n, m, ell=args.ell, eta=args.eta, r=args.r)
    except ValueError as exc:
        raise HarnessError(f"bounds: f={args.f}, n={args.n}, m={m}: {exc}") from exc
    payload = sheet.as_dict()
    payload["thm44_upper"] = sheet.upper.get("thm44")
    _write(_dump(payload), args.output)
    lower_vacuous = all(entry.vacuous or entry.value <= 0 for entry in sheet.lower.values())
    return 2 if lower_vacuous and sheet.upper.get("vacuous", True) else EXIT_OK


def _cmd_verify(args) -> int:
    checks = run_suite(args.suite, args.seed)
    _write(render(checks), args.output)
    return EXIT_ERROR if any(c.status == "FAIL" for c in checks) else EXIT_OK


def _cmd_sweep(args) -> int:
    cells = expand_cells(load_sweep(args.config))
    _write(sweep(cells, jobs=args.jobs), args.output)
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    try:
        f = parse_function(args.f, args.k)
    except ValueError as exc:
        raise HarnessError(f"boolfn: f={args.f!r}: {exc}") from exc
    payload = {"f": f.name, "k": f.k, **spectrum_profile(f).as_dict()}
    if args.coefficients:
        payload["coefficients"] = {str(mask): c for mask, c in f.spectrum.items(tol=1e-12)}
    _write(_dump(payload), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsim", description="f-random access code simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="estimate one protocol's bias and attach bounds")
    sim.add_argument("--protocol", required=True,
                     help="rac-pr, rac-sr, qrac-sr, earac, xor-pr or prrac")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--m", type=int, help="blocks (message bits) for rac-sr, qrac-sr, earac")
    sim.add_argument("--k", type=int, help="arity when --f is a bare family name")
    sim.add_argument("--f", default="xor", help="xor2, maj3, and2, dict0_3, ... or a bare family")
    sim.add_argument("--ell", type=int, help="block count for rac-pr")
    sim.add_argument("--radius", type=int, help="covering radius for rac-pr / xor-pr")
    sim.add_argument("--delta", type=float, help="Newman slack for rac-pr / xor-pr")
    sim.add_argument("--mode", choices=MODES, default="auto")
    sim.add_argument("--trials", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--jobs", type=int)
    sim.add_argument("--eta", type=float, default=ETA_DEFAULT)
    sim.add_argument("--format", choices=FORMATS, default="json")
    sim.add_argument("--output")
    sim.set_defaults(handler=_cmd_simulate)

    bnd = sub.add_parser("bounds", help="lower and upper bound sheet")
    bnd.add_argument("--f", required=True)
    bnd.add_argument("--k", type=int)
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--m", type=int)
    bnd.add_argument("--ell", type=int)
    bnd.add_argument("--eta", type=float, default=ETA_DEFAULT)
    bnd.add_argument("--r", type=float, default=0.5)
    bnd.add_argument("--output")
    bnd.set_defaults(handler=_cmd_bounds)

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--output")
    ver.set_defaults(handler=_cmd_verify)

    swp = sub.add_parser("sweep", help="grid of simulate runs to CSV")
    swp.add_argument("config")
    swp.add_argument("--output")
    swp.add_argument("--jobs", type=int)
    swp.set_defaults(handler=_cmd_sweep)

    spc = sub.add_parser("spectrum", help="Fourier profile of a function")
    spc.add_argument("--f", required=True)
    spc.add_argument("--k", type=int)
    spc.add_argument("--coefficients", action="store_true", help="also list nonzero coefficients")
    spc.add_argument("--output")
    spc.set_defaults(handler=_cmd_spectrum)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"fracsim: harness: {exc}", file=sys.stderr)
    except HarnessError as exc:
        print(f"fracsim: {exc}", file=sys.stderr)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"fracsim: {args.command}: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
