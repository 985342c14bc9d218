"""Parsing of the textual probe and direction specs used by the CLI and
experiment documents."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import ConfigError
from .qfim import Direction, privacy_direction
from .states import (
    ProbeState,
    load_state,
    make_bell_family,
    make_ghz,
    make_plus_product,
    make_random_haar,
    make_zero,
)

PROBE_SPEC_HELP = "ghz | plus | zero | bell:PHI | random:SEED | file:PATH"


def parse_probe(spec: str, qubits: int | None) -> ProbeState:
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "file":
            state = load_state(arg)
            if qubits is not None and state.num_qubits != qubits:
                raise ConfigError(
                    f"{arg} holds {state.num_qubits} qubits, --qubits says {qubits}"
                )
            return state
        if kind == "bell":
            if qubits not in (None, 2):
                raise ConfigError("the Bell family is a two-qubit probe")
            return make_bell_family(float(arg))
        if qubits is None:
            raise ConfigError(f"probe '{spec}' needs a qubit count")
        if kind == "ghz":
            return make_ghz(qubits)
        if kind == "plus":
            return make_plus_product(qubits)
        if kind == "zero":
            return make_zero(qubits)
        if kind == "random":
            return make_random_haar(qubits, int(arg))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad probe spec '{spec}': {exc}") from exc
    raise ConfigError(f"unknown probe spec '{spec}' (expected {PROBE_SPEC_HELP})")


def parse_direction(spec: str, n: int) -> Direction:
    """``sum`` (1/sqrt N), ``diff`` (privacy direction of sensor 1, which is
    (1,-1)/sqrt 2 for N=2) or comma-separated weights, auto-normalized."""
    spec = spec.strip().lower()
    if spec == "sum":
        return Direction.uniform(n)
    if spec == "diff":
        if n < 2:
            raise ConfigError("'diff' needs at least two sensors")
        return privacy_direction(1, Direction.uniform(n))
    try:
        weights = np.array([float(x) for x in spec.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad direction '{spec}'") from exc
    if weights.size != n:
        raise ConfigError(f"direction has {weights.size} entries, expected {n}")
    norm = float(np.linalg.norm(weights))
    if norm < 1e-8:
        raise ConfigError("direction has zero norm")
    if abs(norm - 1.0) > 1e-6:
        warnings.warn(f"direction norm {norm:.6g} != 1; normalizing", stacklevel=2)
    return Direction(weights)


def parse_theta(spec, n: int) -> np.ndarray:
    if isinstance(spec, (list, tuple, np.ndarray)):
        values = [float(x) for x in spec]
    else:
        spec = str(spec).strip().lower()
        if spec == "zeros":
            return np.zeros(n)
        try:
            values = [_parse_angle(x) for x in spec.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad theta '{spec}'") from exc
    if len(values) != n:
        raise ConfigError(f"theta has {len(values)} entries, expected {n}")
    return np.array(values)


def _parse_angle(text: str) -> float:
    """A float, optionally written as a multiple of pi (``pi/8``, ``0.25pi``)."""
    text = text.strip().replace(" ", "")
    if "pi" not in text:
        return float(text)
    head, _, tail = text.partition("pi")
    coeff = 1.0 if head in ("", "+") else -1.0 if head == "-" else float(head.rstrip("*"))
    if tail:
        if not tail.startswith("/"):
            raise ValueError(text)
        coeff /= float(tail[1:])
    return coeff * math.pi
