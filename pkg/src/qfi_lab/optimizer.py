"""Probe-state search maximizing QFI objectives.

Finite-difference gradient ascent over the amplitude parameters with an
accept-if-better rule: a rejected step halves the step size, an accepted one
resets it.  Several seeded restarts are run and the best one is kept.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvariantError
from .qfim import Direction, DirectionLike, as_direction, compute_qfim, qfi_along
from .rng import make_rng
from .states import ProbeState, equatorial2_state, z_signs

FD_STEP = 1e-5
ORTHO_TOL = 1e-10
BOUND_TOL = 1e-9
FEASIBILITY_TOL = 5e-10  # F(v) >= delta - tol counts as feasible


class ParamMode(enum.Enum):
    FULL = "full"
    EQUATORIAL2 = "equatorial2"


@dataclass(frozen=True, eq=False)
class ProbeParameterization:
    """FULL: re/im parts of all 2**N amplitudes (re block first).
    EQUATORIAL2: mixing weight q followed by four phases."""

    mode: ParamMode
    params: np.ndarray
    num_qubits: int = 2

    def __post_init__(self):
        object.__setattr__(self, "params", np.asarray(self.params, dtype=float).reshape(-1))


def param_count(mode: ParamMode, n: int) -> int:
    if mode is ParamMode.EQUATORIAL2:
        return 5
    return 2 ** (n + 1)


def params_to_state(p: ProbeParameterization) -> ProbeState:
    if p.params.size != param_count(p.mode, p.num_qubits):
        raise ValueError(
            f"{p.mode.value} mode needs {param_count(p.mode, p.num_qubits)} params, "
            f"got {p.params.size}"
        )
    if p.mode is ParamMode.EQUATORIAL2:
        if p.num_qubits != 2:
            raise ValueError("EQUATORIAL2 describes two-qubit probes only")
        return equatorial2_state(float(p.params[0]), p.params[1:])
    half = p.params.size // 2
    amps = p.params[:half] + 1j * p.params[half:]
    if np.linalg.norm(amps) == 0.0:
        raise ValueError("all-zero amplitude parameters")
    return ProbeState.from_vector(amps)


def _orthogonal_check(w: Direction, v: Direction | None) -> None:
    if v is None:
        return
    if v.n != w.n:
        raise ValueError("directions have different dimensions")
    if abs(float(w.weights @ v.weights)) > ORTHO_TOL:
        raise ValueError("w and v must be orthogonal")


def objective(
    state: ProbeState, w: DirectionLike, v: DirectionLike | None = None, lam: float = 0.0
) -> float:
    """F(w), plus lam * F(v) when a second direction is given."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    w = as_direction(w)
    v = None if v is None else as_direction(v)
    _orthogonal_check(w, v)
    f = compute_qfim(state)
    value = qfi_along(f, w)
    if v is not None:
        value += lam * qfi_along(f, v)
    return value


@dataclass(frozen=True)
class ObjectiveSpec:
    w: Direction
    v: Direction | None = None
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "w", as_direction(self.w))
        if self.v is not None:
            object.__setattr__(self, "v", as_direction(self.v))
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        _orthogonal_check(self.w, self.v)

    def to_dict(self) -> dict:
        return {
            "w": [float(x) for x in self.w.weights],
            "v": None if self.v is None else [float(x) for x in self.v.weights],
            "lambda": self.lam,
        }


@dataclass
class OptimizationRun:
    spec: ObjectiveSpec
    restarts: int
    steps: int
    step_size: float
    seed: int
    best_value: float
    best_state: ProbeState
    trajectory: list
    best_restart: int = 0
    max_evaluated: float = -math.inf  # largest objective value ever evaluated
    mode: ParamMode = ParamMode.FULL

    def to_dict(self) -> dict:
        return {
            "objective": self.spec.to_dict(),
            "mode": self.mode.value,
            "restarts": self.restarts,
            "steps": self.steps,
            "step_size": self.step_size,
            "seed": self.seed,
            "best_value": self.best_value,
            "best_restart": self.best_restart,
            "max_evaluated": self.max_evaluated,
            "best_state": self.best_state.to_dict(),
            "trajectory": [[int(t), float(val)] for t, val in self.trajectory],
        }


# --- batched evaluation -------------------------------------------------------

def _batch_probs(x: np.ndarray, mode: ParamMode, n: int) -> np.ndarray:
    """Outcome probabilities |a_x|^2 for a batch of parameter rows."""
    if mode is ParamMode.EQUATORIAL2:
        q = np.clip(x[:, 0], 0.0, 1.0)[:, None]
        # phases drop out of |a_x|^2 but are kept so the state is well defined
        return np.hstack([q / 2, (1 - q) / 2, (1 - q) / 2, q / 2])
    half = x.shape[1] // 2
    p = x[:, :half] ** 2 + x[:, half:] ** 2
    return p / p.sum(axis=1, keepdims=True)


def _batch_qfi(probs: np.ndarray, u: np.ndarray, n: int) -> np.ndarray:
    """u^T F u = Var_p(sum_j u_j s_j(x)) for every row of ``probs``."""
    g = z_signs(n) @ u
    mean = probs @ g
    return np.clip(probs @ (g * g) - mean**2, 0.0, None)


class _Evaluator:
    """Vectorized QFI quantities over batches of parameter vectors."""

    def __init__(self, n: int, mode: ParamMode, w: Direction, v: Direction | None):
        self.n, self.mode = n, mode
        self.w = w.weights
        self.v = None if v is None else v.weights
        self.max_pair = -math.inf  # largest F(w) + F(v) evaluated

    def qfis(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        probs = _batch_probs(np.atleast_2d(x), self.mode, self.n)
        qw = _batch_qfi(probs, self.w, self.n)
        if self.v is None:
            return qw, None
        qv = _batch_qfi(probs, self.v, self.n)
        self.max_pair = max(self.max_pair, float(np.max(qw + qv)))
        return qw, qv


def _normalize(x: np.ndarray, mode: ParamMode) -> np.ndarray:
    if mode is ParamMode.EQUATORIAL2:
        y = x.copy()
        y[0] = min(1.0, max(0.0, y[0]))
        y[1:] = np.mod(y[1:], 2 * math.pi)
        return y
    return x / np.linalg.norm(x)


def _fd_gradient(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    eye = np.eye(x.size) * h
    vals = fun(np.vstack([x + eye, x - eye]))
    return (vals[: x.size] - vals[x.size:]) / (2.0 * h)


def _ascend(
    fun: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    steps: int,
    step_size: float,
    mode: ParamMode,
    fd_step: float = FD_STEP,
    accept: Callable[[np.ndarray], bool] | None = None,
    stop: Callable[[np.ndarray], bool] | None = None,
) -> tuple[np.ndarray, float, list]:
    x = _normalize(x0, mode)
    val = float(fun(x[None, :])[0])
    h = step_size
    trajectory = [(0, val)]
    for t in range(1, steps + 1):
        if stop is not None and stop(x):
            break
        grad = _fd_gradient(fun, x, fd_step)
        if not np.any(grad):
            trajectory.append((t, val))
            continue
        cand = _normalize(x + h * grad, mode)
        cval = float(fun(cand[None, :])[0])
        if cval > val and (accept is None or accept(cand)):
            x, val, h = cand, cval, step_size
        else:
            h *= 0.5
            if h < 1e-14:
                h = step_size
        trajectory.append((t, val))
    return x, val, trajectory


def _initial_params(rng: np.random.Generator, mode: ParamMode, n: int) -> np.ndarray:
    if mode is ParamMode.EQUATORIAL2:
        return np.concatenate([[rng.uniform()], rng.uniform(0, 2 * math.pi, 4)])
    return rng.standard_normal(param_count(mode, n))


def _state_of(x: np.ndarray, mode: ParamMode, n: int) -> ProbeState:
    return params_to_state(ProbeParameterization(mode, x, n))


def optimize(
    n: int,
    spec: ObjectiveSpec,
    restarts: int = 8,
    steps: int = 500,
    step_size: float = 0.1,
    seed: int = 0,
    *,
    mode: ParamMode = ParamMode.FULL,
    fd_step: float = FD_STEP,
) -> OptimizationRun:
    """Maximize ``spec`` over n-qubit probes; restart r is seeded by (seed, r)."""
    if restarts < 1 or steps < 1 or step_size <= 0:
        raise ValueError("need restarts >= 1, steps >= 1 and step_size > 0")
    if spec.w.n != n:
        raise ValueError("objective directions do not match n")
    ev = _Evaluator(n, mode, spec.w, spec.v)
    max_seen = [-math.inf]

    def fun(x):
        qw, qv = ev.qfis(x)
        vals = qw if qv is None else qw + spec.lam * qv
        max_seen[0] = max(max_seen[0], float(np.max(vals)))
        return vals

    best = None
    for r in range(restarts):
        rng = make_rng([seed, r])
        x, val, traj = _ascend(fun, _initial_params(rng, mode, n), steps, step_size, mode,
                               fd_step)
        if best is None or val > best[1]:  # ties keep the lowest restart index
            best = (x, val, traj, r)
    x, _, traj, r = best
    state = _state_of(x, mode, n)
    value = objective(state, spec.w, spec.v, spec.lam)
    if spec.v is not None and spec.lam == 1.0 and max_seen[0] > n + BOUND_TOL:
        raise InvariantError(f"evaluated F(w)+F(v) = {max_seen[0]!r} > {n}")
    return OptimizationRun(
        spec=spec, restarts=restarts, steps=steps, step_size=step_size, seed=seed,
        best_value=value, best_state=state, trajectory=traj, best_restart=r,
        max_evaluated=max_seen[0], mode=mode,
    )


@dataclass
class FrontierScanPoint:
    delta: float
    max_qfi_w: float | None
    qfi_v: float | None
    bound: float
    feasible: bool
    state: ProbeState | None = field(default=None, repr=False)

    @property
    def gap(self) -> float | None:
        return None if self.max_qfi_w is None else self.bound - self.max_qfi_w

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "max_qfi_w": self.max_qfi_w,
            "qfi_v": self.qfi_v,
            "bound": self.bound,
            "gap": self.gap,
            "feasible": self.feasible,
            "state": None if self.state is None else self.state.to_dict(),
        }


def frontier_scan(
    n: int,
    w: DirectionLike,
    v: DirectionLike,
    delta_grid: Sequence[float],
    restarts: int = 4,
    steps: int = 200,
    step_size: float = 0.1,
    seed: int = 0,
    *,
    penalty_weights: Sequence[float] = (10.0, 100.0, 1000.0),
) -> list[FrontierScanPoint]:
    """Largest F(w) found subject to F(v) >= delta, for every delta.

    Each restart ascends F(w) - mu max(0, delta - F(v))^2 with mu escalated
    over ``penalty_weights`` (warm-started), then climbs F(v) back over delta
    if needed and polishes F(w) rejecting every infeasible candidate.  Only
    feasible points are reported.
    """
    w, v = as_direction(w), as_direction(v)
    _orthogonal_check(w, v)
    if w.n != n:
        raise ValueError("directions do not match n")
    mode = ParamMode.FULL
    ev = _Evaluator(n, mode, w, v)
    results = []
    for k, delta in enumerate(delta_grid):
        delta = float(delta)
        if not 0.0 < delta <= n:
            raise ValueError(f"delta {delta!r} outside (0, {n}]")
        feasible = lambda x: bool(ev.qfis(x)[1][0] >= delta - FEASIBILITY_TOL)  # noqa: E731
        best = None
        for r in range(restarts):
            x = _initial_params(make_rng([seed, k, r]), mode, n)
            for mu in penalty_weights:
                def pen(xb, mu=mu):
                    qw, qv = ev.qfis(xb)
                    return qw - mu * np.maximum(0.0, delta - qv) ** 2
                x, _, _ = _ascend(pen, x, steps, step_size, mode)
            if not feasible(x[None, :]):
                x, _, _ = _ascend(lambda xb: ev.qfis(xb)[1], x, steps, step_size, mode,
                                  stop=lambda c: feasible(c[None, :]))
            if not feasible(x[None, :]):
                continue
            x, qw, _ = _ascend(lambda xb: ev.qfis(xb)[0], x, max(1, steps // 4), step_size,
                               mode, accept=lambda c: feasible(c[None, :]))
            if best is None or qw > best[1]:
                best = (x, qw)
        if best is None:
            results.append(FrontierScanPoint(delta, None, None, n - delta, False))
            continue
        state = _state_of(best[0], mode, n)
        f = compute_qfim(state)
        qw, qv = qfi_along(f, w), qfi_along(f, v)
        results.append(FrontierScanPoint(delta, qw, qv, n - delta,
                                          qv >= delta - FEASIBILITY_TOL, state))
    if ev.max_pair > n + BOUND_TOL:
        raise InvariantError(f"evaluated F(w)+F(v) = {ev.max_pair!r} > {n}")
    return results
