"""Command-line entry point: ``qfi-lab <subcommand> [options]``.

Exit codes: 0 success, 1 verification/invariant failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .duality import (
    BOUND_TOL,
    frontier_sweep,
    ghz_certificate,
    random_duality_campaign,
    separable_certificate,
)
from .errors import ConfigError, InvariantError, ZeroQFIError
from .estimation import (
    MeasurementModel,
    adversary_shift_test,
    run_from_config,
)
from .optimizer import ObjectiveSpec, frontier_scan, optimize
from .qfim import compute_qfim
from .specs import PROBE_SPEC_HELP, parse_direction, parse_probe, parse_theta

SPEC_VERSION = "qfi-lab-spec/1"
CRB_FLOOR = 0.85
log = logging.getLogger("qfi_lab")


class VerificationFailure(Exception):
    """A run completed but its checks did not pass; carries the document."""

    def __init__(self, message: str, document: dict):
        super().__init__(message)
        self.document = document


# --- output -----------------------------------------------------------------

def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out[prefix] = value


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render(document: dict, table: tuple | None, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(document, indent=2, allow_nan=False) + "\n"
    if table is None:
        flat: dict = {}
        _flatten("", {"config": document["config"], **document["result"]}, flat)
        table = (list(flat), [list(flat.values())])
    return render_csv(*table)


def strip_metadata(text: str) -> str:
    """Drop the metadata block of a JSON document (CSV carries none)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return text
    doc.pop("metadata", None)
    return json.dumps(doc, indent=2)


def _document(command: str, config: dict, result) -> dict:
    return {
        "spec_version": SPEC_VERSION,
        "command": command,
        "config": config,
        "result": result,
        "metadata": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "tool_version": __version__,
        },
    }


def _resolved_config(args: argparse.Namespace) -> dict:
    skip = {"func", "output", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _tolerance(args, default: float) -> float:
    if getattr(args, "strict", False) or args.tolerance is None:
        return default
    return float(args.tolerance)


# --- subcommands ---------------------------------------------------------------

def cmd_qfim(args):
    probe = parse_probe(args.probe, args.qubits)
    f = compute_qfim(probe)
    doc = f.to_dict()
    n = f.n
    rows = [list(map(float, f.entries[i])) for i in range(n)]
    return doc, ([f"col{j + 1}" for j in range(n)], rows)


def cmd_frontier(args):
    if args.points < 2:
        raise ConfigError("--points must be >= 2")
    points = frontier_sweep(args.points)
    result = [{"phi": p.phi, "qfi_w": p.qfi_w, "qfi_v": p.qfi_v} for p in points]
    rows = [[p.phi, p.qfi_w, p.qfi_v] for p in points]
    return result, (["phi", "qfi_w", "qfi_v"], rows)


def cmd_verify(args):
    n = args.qubits
    if n is None or n < 2:
        raise ConfigError("verify needs --qubits >= 2 (the complement of w is empty for N=1)")
    if args.equatorial and n != 2:
        raise ConfigError("--equatorial applies to --qubits 2 only")
    tol = _tolerance(args, BOUND_TOL)
    summary = random_duality_campaign(
        n, args.states, args.seed, tol=tol, inject_ghz=True,
        equatorial_states=args.states if n == 2 else None,
    )
    ghz_ok, ghz_report = ghz_certificate(n)
    sep_ok, sep_report = separable_certificate(n, seed=args.seed)
    result = {
        "campaign": summary.to_dict(),
        "ghz_certificate": ghz_report,
        "separable_certificate": sep_report,
    }
    ok = summary.violations == 0 and ghz_ok and sep_ok
    if n == 2:
        ok = ok and summary.max_equatorial_dev <= tol
    result["passed"] = bool(ok)
    if not ok:
        raise VerificationFailure(
            f"duality verification failed; offending seeds {summary.violating_seeds}", result
        )
    return result, None


def cmd_estimate(args):
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read experiment config: {exc}") from exc
    else:
        doc = {
            "probe": args.probe,
            "qubits": args.qubits,
            "theta": args.theta,
            "model": args.model,
            "direction": args.direction,
            "shots": args.shots,
            "repetitions": args.repetitions,
            "seed": args.seed,
        }
    record = run_from_config(doc)
    slack = _tolerance(args, 1.0 - CRB_FLOOR)
    record["crb_ordering_ok"] = bool(record["crb_ratio"] >= 1.0 - slack)
    if not record["crb_ordering_ok"]:
        raise VerificationFailure("empirical variance beats the Cramer-Rao bound", record)
    return record, None


def _parse_constraint(text: str, n: int):
    spec, sep, delta = text.rpartition(":")
    if not sep or not spec:
        raise ConfigError(f"constraint must look like DIRECTION:DELTA, got '{text}'")
    try:
        return parse_direction(spec, n), float(delta)
    except ValueError as exc:
        raise ConfigError(f"bad constraint '{text}': {exc}") from exc


def cmd_optimize(args):
    n = args.qubits
    if n is None or n < 1:
        raise ConfigError("optimize needs --qubits >= 1")
    w = parse_direction(args.direction, n)
    if args.constraint:
        v, delta = _parse_constraint(args.constraint, n)
        if not 0.0 < delta <= n:
            raise ConfigError(f"constraint delta must lie in (0, {n}]")
        try:
            (point,) = frontier_scan(n, w, v, [delta], restarts=args.restarts,
                                     steps=args.steps, step_size=args.step_size,
                                     seed=args.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        result = point.to_dict()
        result["best_value"] = point.max_qfi_w
        result["best_state"] = result.pop("state")
        result["trajectory"] = []
        return result, None
    v = parse_direction(args.pair, n) if args.pair else None
    try:
        spec = ObjectiveSpec(w, v, args.lam if v is not None else 0.0)
        run = optimize(n, spec, args.restarts, args.steps, args.step_size, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return run.to_dict(), None


def cmd_adversary(args):
    probe = parse_probe(args.probe, args.qubits)
    n = probe.num_qubits
    theta = parse_theta(args.theta, n)
    v = parse_direction(args.direction, n)
    try:
        eps = [float(x) for x in args.epsilon.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --epsilon '{args.epsilon}'") from exc
    models = list(MeasurementModel) if args.model == "both" else [MeasurementModel.parse(args.model)]
    rows = []
    for model in models:
        for e in eps:
            rows.append({"model": model.value, "epsilon": e,
                         "deviation": adversary_shift_test(probe, theta, v, e, model)})
    worst = max(r["deviation"] for r in rows)
    result = {"rows": rows, "max_deviation": worst, "blind": bool(worst <= 1e-12)}
    table = (["model", "epsilon", "deviation"], [[r["model"], r["epsilon"], r["deviation"]] for r in rows])
    if args.expect_blind and not result["blind"]:
        raise VerificationFailure("outcome distribution moved along v", result)
    return result, table


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--qubits", type=int, default=None, help="number of sensors N")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the command's check tolerance")
    common.add_argument("--strict", action="store_true",
                        help="ignore --tolerance and use the built-in tolerances")

    parser = argparse.ArgumentParser(prog="qfi-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qfi-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfim", parents=[common], help="QFIM of a probe state")
    p.add_argument("--probe", default="ghz", help=PROBE_SPEC_HELP)
    p.set_defaults(func=cmd_qfim)

    p = sub.add_parser("frontier", parents=[common], help="two-qubit Bell-family frontier")
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("verify", parents=[common], help="randomized duality-bound campaign")
    p.add_argument("--states", type=int, default=1000)
    p.add_argument("--equatorial", action="store_true",
                   help="report the equatorial equality check (N=2)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo Cramer-Rao experiment")
    p.add_argument("--config", default=None, help="experiment document (JSON)")
    p.add_argument("--probe", default="ghz", help=PROBE_SPEC_HELP)
    p.add_argument("--theta", default="zeros", help="comma-separated phases or 'zeros'")
    p.add_argument("--model", default="parity", help="parity | local_x")
    p.add_argument("--direction", default="sum")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--repetitions", type=int, default=200)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("optimize", parents=[common], help="probe-state optimization")
    p.add_argument("--direction", default="sum", help="target direction w")
    p.add_argument("--pair", default=None, help="second direction v for F(w) + lam F(v)")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--constraint", default=None, help="DIRECTION:DELTA, require F(v) >= DELTA")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--step-size", type=float, default=0.1)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("adversary", parents=[common], help="outcome shift along a direction")
    p.add_argument("--probe", default="ghz", help=PROBE_SPEC_HELP)
    p.add_argument("--theta", default="zeros")
    p.add_argument("--direction", default="diff")
    p.add_argument("--epsilon", default="0.1,0.5,1.0")
    p.add_argument("--model", default="both", help="parity | local_x | both")
    p.add_argument("--expect-blind", action="store_true",
                   help="exit 1 unless every deviation is <= 1e-12")
    p.set_defaults(func=cmd_adversary)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    config = _resolved_config(args)
    status = 0
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda msg, *a, **k: log.warning("%s", msg)
        try:
            result, table = args.func(args)
        except VerificationFailure as exc:
            log.error("%s", exc)
            result, table, status = exc.document, None, 1
        except (ZeroQFIError, InvariantError) as exc:
            log.error("%s", exc)
            return 1
        except (ConfigError, ValueError, OSError) as exc:
            log.error("%s", exc)
            return 2
    _emit(render(_document(args.command, config, result), table, args.format), args.output)
    return status


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
