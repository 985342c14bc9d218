"""Quantum Fisher information matrix of a locally phase-encoded pure probe.

For the encoding exp(-i/2 sum_j theta_j Z_j) the QFIM is the covariance
matrix of the commuting generators Z_j in the probe state,

    F_ij = <Z_i Z_j> - <Z_i><Z_j>,

which does not depend on theta.  The QFI of a linear combination u^T theta
is the quadratic form u^T F u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvariantError
from .states import ProbeState, encode, fidelity, z_expectations, zz_correlations

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-9
DIAG_TOL = 1e-10
TRACE_TOL = 1e-9
UNIT_TOL = 1e-12
MIN_DIRECTION_NORM = 1e-8


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit vector in R^N.  Inputs are normalized on construction."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("direction must be a finite, nonempty vector")
        norm = float(np.linalg.norm(w))
        if norm < MIN_DIRECTION_NORM:
            raise ValueError(f"direction norm {norm:.3g} is degenerate")
        w = w / norm
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.size

    def __len__(self) -> int:
        return self.weights.size

    def __neg__(self) -> "Direction":
        return Direction(-self.weights)

    @classmethod
    def uniform(cls, n: int) -> "Direction":
        """The sum direction 1/sqrt(N)."""
        return cls(np.ones(n))


DirectionLike = Union[Direction, Sequence[float], np.ndarray]


def as_direction(u: DirectionLike) -> Direction:
    return u if isinstance(u, Direction) else Direction(u)


@dataclass(frozen=True, eq=False)
class QFIMatrix:
    entries: np.ndarray

    def __post_init__(self):
        f = np.array(self.entries, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1] or f.shape[0] < 1:
            raise ValueError("QFIM must be a nonempty square matrix")
        f.setflags(write=False)
        object.__setattr__(self, "entries", f)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def check(self) -> "QFIMatrix":
        """Raise InvariantError unless the matrix is a valid QFIM."""
        f = self.entries
        asym = float(np.max(np.abs(f - f.T)))
        if asym > SYMMETRY_TOL:
            raise InvariantError(f"QFIM not symmetric (max asymmetry {asym:.3g})")
        lam_min = float(np.linalg.eigvalsh(0.5 * (f + f.T))[0])
        if lam_min < -PSD_TOL:
            raise InvariantError(f"QFIM not PSD (min eigenvalue {lam_min:.3g})")
        diag = np.diag(f)
        if np.any(diag < -DIAG_TOL) or np.any(diag > 1.0 + DIAG_TOL):
            raise InvariantError("QFIM diagonal outside [0, 1]")
        if self.trace > self.n + TRACE_TOL:
            raise InvariantError(f"QFIM trace {self.trace!r} exceeds N = {self.n}")
        return self

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "entries": [float(x) for x in self.entries.reshape(-1)],
            "trace": self.trace,
            "eigenvalues": [float(x) for x in spectral(self).eigenvalues],
        }


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: tuple  # of Direction, matching eigenvalues

    def matrix(self) -> np.ndarray:
        vecs = np.column_stack([e.weights for e in self.eigenvectors])
        return (vecs * self.eigenvalues) @ vecs.T


def compute_qfim(state: ProbeState) -> QFIMatrix:
    z = z_expectations(state)
    f = zz_correlations(state) - np.outer(z, z)
    return QFIMatrix(0.5 * (f + f.T)).check()


def qfi_along(f: QFIMatrix, u: DirectionLike) -> float:
    u = as_direction(u)
    if u.n != f.n:
        raise ValueError(f"direction has {u.n} entries, QFIM is {f.n}x{f.n}")
    value = float(u.weights @ f.entries @ u.weights)
    if value < 0.0:
        if value < -SYMMETRY_TOL:
            raise InvariantError(f"negative QFI {value!r} along direction")
        value = 0.0
    return value


def bures_angle_sq(a: ProbeState, b: ProbeState) -> float:
    """2 (1 - |<a|b>|), evaluated as min over global phase of |a - e^{ic} b|^2.

    The difference form avoids the cancellation in ``1 - fidelity`` when the
    states are nearly identical.
    """
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    if abs(overlap) == 0.0:
        return 2.0 * (1.0 - fidelity(a, b))
    aligned = b.amplitudes * (np.conj(overlap) / abs(overlap))
    return float(np.sum(np.abs(a.amplitudes - aligned) ** 2))


def qfi_oracle(
    state: ProbeState, u: DirectionLike, step: float = 1e-4, theta=None
) -> float:
    """Finite-difference QFI along ``u`` from state overlaps alone.

    Uses |<psi(theta)|psi(theta + step*u)>| = 1 - F step^2 / 8 + O(step^4),
    i.e. F ~ 8 (1 - |<.|.>|) / step^2, with the overlap defect computed in
    the numerically stable difference form.
    """
    if not 1e-6 <= step <= 1e-2:
        raise ValueError(f"step must lie in [1e-6, 1e-2], got {step!r}")
    u = as_direction(u)
    if u.n != state.num_qubits:
        raise ValueError("direction dimension does not match the state")
    theta = np.zeros(state.num_qubits) if theta is None else np.asarray(theta, float)
    here = encode(state, theta)
    # symmetric pair: the two one-sided defects share the leading term
    plus = encode(state, theta + step * u.weights)
    minus = encode(state, theta - step * u.weights)
    overlap_defect = (bures_angle_sq(here, plus) + bures_angle_sq(here, minus)) / 4.0
    return max(0.0, 8.0 * overlap_defect / step**2)


def spectral(f: QFIMatrix) -> SpectralDecomposition:
    vals, vecs = np.linalg.eigh(0.5 * (f.entries + f.entries.T))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    vals = np.where(np.abs(vals) <= PSD_TOL, 0.0, vals)
    if np.any(vals < 0.0):
        raise InvariantError(f"negative eigenvalue {vals.min()!r} in QFIM")
    vals.setflags(write=False)
    return SpectralDecomposition(vals, tuple(Direction(vecs[:, k]) for k in range(f.n)))


def orthonormal_complement(w: DirectionLike) -> list[Direction]:
    """N-1 unit vectors completing ``w`` to an orthonormal basis.

    Gram-Schmidt over the standard basis in order of increasing overlap
    with ``w``; the basis vector most parallel to ``w`` is skipped.
    """
    w = as_direction(w)
    n = w.n
    if n < 2:
        raise ValueError("orthonormal complement needs N >= 2")
    overlaps = np.abs(w.weights)
    skip = int(np.argmax(overlaps))
    order = [k for k in np.argsort(overlaps, kind="stable") if k != skip]
    basis = [w.weights]
    out = []
    for k in order:
        v = np.zeros(n)
        v[k] = 1.0
        for _ in range(2):  # re-orthogonalize for the 1e-12 budget
            for b in basis:
                v = v - (b @ v) * b
        v = v / np.linalg.norm(v)
        basis.append(v)
        out.append(Direction(v))
    return out


def privacy_direction(j: int, w: DirectionLike) -> Direction:
    """Normalized component of e_j orthogonal to ``w`` (``j`` is 1-based)."""
    w = as_direction(w)
    if not 1 <= j <= w.n:
        raise ValueError(f"sensor index {j} outside 1..{w.n}")
    e = np.zeros(w.n)
    e[j - 1] = 1.0
    v = e - w.weights[j - 1] * w.weights
    norm = np.linalg.norm(v)
    if norm < MIN_DIRECTION_NORM:
        raise ValueError(f"e_{j} is parallel to the sensing direction")
    v = v / norm
    v = v - (v @ w.weights) * w.weights
    return Direction(v)
