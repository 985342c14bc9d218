"""N-qubit pure probe states, local phase encoding and Pauli-Z statistics.

Basis labels follow the big-endian convention: sensor 1 (index 0 in code)
occupies the most significant bit of the label ``x``.  The sign
``s_j(x)`` is the sigma_z eigenvalue of qubit ``j`` in ``|x>``, i.e. ``+1``
when that bit is 0 and ``-1`` when it is 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, InvariantError
from .rng import make_rng

NORM_TOL = 1e-12
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class ProbeState:
    """Normalized pure state of ``num_qubits`` qubits.

    The amplitude array is copied and frozen, so instances can be shared
    freely between workers.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if int(self.num_qubits) < 1:
            raise ValueError("num_qubits must be >= 1")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 2**self.num_qubits:
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got {amps.size}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvariantError(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "num_qubits", int(self.num_qubits))
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> "ProbeState":
        """Normalize an arbitrary nonzero vector of length 2**N."""
        vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
        n = int(round(math.log2(vec.size))) if vec.size else 0
        if vec.size == 0 or 2**n != vec.size:
            raise ValueError("vector length must be a power of two")
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(n, vec / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_dict(self) -> dict:
        return {
            "n": self.num_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProbeState":
        try:
            n = int(doc["n"])
            pairs = np.asarray(doc["amplitudes"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed probe-state document: {exc}") from exc
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ConfigError("amplitudes must be a list of [re, im] pairs")
        return cls(n, pairs[:, 0] + 1j * pairs[:, 1])


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Local phases, one per sensor, reduced to [0, 2*pi)."""

    angles: np.ndarray

    def __post_init__(self):
        angles = np.array(self.angles, dtype=float).reshape(-1)
        if not np.all(np.isfinite(angles)):
            raise ValueError("phases must be finite")
        angles = np.mod(angles, TWO_PI)
        # np.mod can round up to exactly 2*pi for tiny negative inputs
        angles[angles >= TWO_PI] = 0.0
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)

    def __len__(self) -> int:
        return self.angles.size


ThetaLike = Union[ParamVector, Sequence[float], np.ndarray]


def _theta_array(theta: ThetaLike) -> np.ndarray:
    if isinstance(theta, ParamVector):
        return theta.angles
    arr = np.asarray(theta, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("phases must be finite")
    return arr


@lru_cache(maxsize=32)
def z_signs(n: int) -> np.ndarray:
    """Matrix ``S`` of shape (2**n, n) with ``S[x, j] = s_j(x)``."""
    labels = np.arange(2**n)[:, None]
    shifts = (n - 1 - np.arange(n))[None, :]
    signs = 1.0 - 2.0 * ((labels >> shifts) & 1)
    signs.setflags(write=False)
    return signs


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"number of qubits must be a positive integer, got {n!r}")
    return int(n)


def make_ghz(n: int) -> ProbeState:
    n = _check_n(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return ProbeState(n, amps)


def make_plus_product(n: int) -> ProbeState:
    n = _check_n(n)
    return ProbeState(n, np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128))


def make_zero(n: int) -> ProbeState:
    """The computational basis state |0...0>."""
    n = _check_n(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = 1.0
    return ProbeState(n, amps)


def make_bell_family(phi: float) -> ProbeState:
    """cos(phi)|Phi+> + sin(phi)|Psi+> for phi in [0, pi/2]."""
    if not 0.0 <= phi <= math.pi / 2:
        raise ValueError(f"phi must lie in [0, pi/2], got {phi!r}")
    c, s = math.cos(phi) / math.sqrt(2.0), math.sin(phi) / math.sqrt(2.0)
    return ProbeState.from_vector([c, s, s, c])


def make_random_haar(n: int, seed: int) -> ProbeState:
    """Haar-random state from normalized i.i.d. standard complex Gaussians."""
    n = _check_n(n)
    rng = make_rng(seed)
    vec = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return ProbeState.from_vector(vec)


def equatorial2_state(q: float, phases: Sequence[float]) -> ProbeState:
    """Two-qubit equatorial state with |a00|^2=|a11|^2=q/2, |a01|^2=|a10|^2=(1-q)/2."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"mixing weight q must lie in [0, 1], got {q!r}")
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (4,):
        raise ValueError("expected four phases")
    mags = np.sqrt([q / 2, (1 - q) / 2, (1 - q) / 2, q / 2])
    return ProbeState.from_vector(mags * np.exp(1j * phases))


def make_random_equatorial2(seed: int) -> ProbeState:
    rng = make_rng(seed)
    q = rng.uniform(0.0, 1.0)
    phases = rng.uniform(0.0, TWO_PI, size=4)
    return equatorial2_state(q, phases)


def encode(state: ProbeState, theta: ThetaLike) -> ProbeState:
    """Apply exp(-i/2 sum_j theta_j Z_j), a diagonal phase on every label."""
    angles = _theta_array(theta)
    if angles.size != state.num_qubits:
        raise ValueError(
            f"theta has {angles.size} entries for a {state.num_qubits}-qubit state"
        )
    phase = z_signs(state.num_qubits) @ angles
    return ProbeState(state.num_qubits, state.amplitudes * np.exp(-0.5j * phase))


def z_expectations(state: ProbeState) -> np.ndarray:
    return state.probabilities @ z_signs(state.num_qubits)


def zz_correlations(state: ProbeState) -> np.ndarray:
    signs = z_signs(state.num_qubits)
    corr = (signs * state.probabilities[:, None]).T @ signs
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)  # s_j(x)^2 = 1 exactly
    return corr


def is_equatorial(state: ProbeState, tol: float = 1e-10) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return bool(np.max(np.abs(z_expectations(state))) <= tol)


def fidelity(a: ProbeState, b: ProbeState) -> float:
    """Overlap magnitude |<a|b>|, insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states act on different numbers of qubits")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))


def save_state(state: ProbeState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_state(path: str | Path) -> ProbeState:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"probe-state file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"probe-state file is not valid JSON: {path}") from exc
    return ProbeState.from_dict(doc)
