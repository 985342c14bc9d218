"""Checks of the QFI duality bound F(w) + F(v) <= N and its equality cases."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvariantError
from .qfim import (
    Direction,
    DirectionLike,
    as_direction,
    compute_qfim,
    orthonormal_complement,
    qfi_along,
)
from .rng import derive_seed, make_rng
from .states import (
    ProbeState,
    is_equatorial,
    make_bell_family,
    make_ghz,
    make_plus_product,
    make_random_equatorial2,
    make_random_haar,
)

BOUND_TOL = 1e-9
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class DualityReport:
    n: int
    qfi_w: float
    qfi_v: float
    sum: float
    bound: float
    margin: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FrontierPoint:
    phi: float
    qfi_w: float
    qfi_v: float


def verify_duality(
    state: ProbeState, w: DirectionLike, v: DirectionLike, tol: float = BOUND_TOL
) -> DualityReport:
    w, v = as_direction(w), as_direction(v)
    n = state.num_qubits
    if w.n != n or v.n != n:
        raise ValueError("direction dimension does not match the state")
    if abs(float(w.weights @ v.weights)) > ORTHO_TOL:
        raise ValueError("sensing directions must be orthogonal")
    f = compute_qfim(state)
    qw, qv = qfi_along(f, w), qfi_along(f, v)
    total = qw + qv
    return DualityReport(
        n=n,
        qfi_w=qw,
        qfi_v=qv,
        sum=total,
        bound=float(n),
        margin=float(n) - total,
        passed=bool(total <= n + tol),
    )


def frontier_sweep(num_points: int = 101) -> list[FrontierPoint]:
    """QFI pair along the sum/difference directions for the two-qubit Bell family."""
    if num_points < 2:
        raise ValueError("num_points must be >= 2")
    w = Direction([1.0, 1.0])
    v = Direction([1.0, -1.0])
    points = []
    for phi in np.linspace(0.0, math.pi / 2, num_points):
        phi = min(float(phi), math.pi / 2)
        f = compute_qfim(make_bell_family(phi))
        points.append(FrontierPoint(phi, qfi_along(f, w), qfi_along(f, v)))
    return points


def _max_abs_offdiag(m: np.ndarray) -> float:
    off = m - np.diag(np.diag(m))
    return float(np.max(np.abs(off))) if m.shape[0] > 1 else 0.0


def ghz_certificate(n: int, state: ProbeState | None = None) -> tuple[bool, dict]:
    """Check that a probe (GHZ by default) has QFIM 11^T, QFI N along the sum
    direction and vanishing QFI along every complementary direction."""
    if n < 2:
        raise ValueError("certificate needs n >= 2")
    state = make_ghz(n) if state is None else state
    f = compute_qfim(state)
    w = Direction.uniform(n)
    qw = qfi_along(f, w)
    comp = [qfi_along(f, v) for v in orthonormal_complement(w)]
    dev = float(np.max(np.abs(f.entries - np.ones((n, n)))))
    ok = dev <= 1e-10 and abs(qw - n) <= 1e-9 and max(comp) <= 1e-9
    report = {
        "n": n,
        "max_dev_from_ones": dev,
        "max_abs_offdiag": _max_abs_offdiag(f.entries),
        "qfi_w": qw,
        "max_complement_qfi": max(comp),
        "passed": bool(ok),
    }
    return bool(ok), report


def separable_certificate(n: int, pairs: int = 8, seed: int = 0) -> tuple[bool, dict]:
    """|+>^N has QFIM = I, so every orthogonal pair sums to exactly 2."""
    state = make_plus_product(n)
    f = compute_qfim(state)
    dev = float(np.max(np.abs(f.entries - np.eye(n))))
    rng = make_rng([seed, n])
    worst = 0.0
    for _ in range(pairs):
        w, v = random_orthogonal_pair(n, rng)
        worst = max(worst, abs(qfi_along(f, w) + qfi_along(f, v) - 2.0))
    ok = dev <= 1e-10 and worst <= 1e-9
    return bool(ok), {"n": n, "max_dev_from_identity": dev, "max_pair_dev": worst,
                      "passed": bool(ok)}


def rank1_uniqueness_check(state: ProbeState, tol: float = 1e-9) -> bool:
    """True iff every direction orthogonal to 1/sqrt(N) carries no QFI.

    For an equatorial probe this pins the QFIM to c 11^T with trace N, hence
    c = 1; that consequence is asserted whenever the check succeeds.
    """
    if not is_equatorial(state, tol):
        raise ValueError("rank-1 uniqueness check requires an equatorial probe")
    n = state.num_qubits
    f = compute_qfim(state)
    w = Direction.uniform(n)
    if n == 1:
        return True
    if any(qfi_along(f, v) > tol for v in orthonormal_complement(w)):
        return False
    dev = float(np.max(np.abs(f.entries - np.ones((n, n)))))
    if dev > 10 * tol:
        raise InvariantError(f"null space contains 1^perp but QFIM deviates from 11^T by {dev!r}")
    return True


def random_direction(n: int, rng: np.random.Generator) -> Direction:
    while True:
        g = rng.standard_normal(n)
        if np.linalg.norm(g) > 1e-8:
            return Direction(g)


def random_orthogonal_pair(n: int, rng: np.random.Generator) -> tuple[Direction, Direction]:
    """w uniform on the sphere, v uniform on the great sphere orthogonal to w."""
    w = random_direction(n, rng)
    comp = np.array([c.weights for c in orthonormal_complement(w)])
    coeffs = random_direction(n - 1, rng).weights
    v = coeffs @ comp
    v = v - (v @ w.weights) * w.weights
    return w, Direction(v)


@dataclass
class CampaignSummary:
    n: int
    num_states: int
    seed: int
    max_sum: float
    max_sum_state_seed: int | None
    violations: int
    violating_seeds: list = field(default_factory=list)
    equatorial_states: int = 0
    max_equatorial_dev: float | None = None
    ghz_injected: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _worker_count(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("QFI_LAB_THREADS", "1") or 1)
    return max(1, int(workers))


def _haar_trial(n: int, seed: int, index: int, tol: float) -> tuple[int, float, bool]:
    state_seed = derive_seed(seed, index)
    state = make_random_haar(n, state_seed)
    w, v = random_orthogonal_pair(n, make_rng([seed, index, 1]))
    report = verify_duality(state, w, v, tol)
    return state_seed, report.sum, report.passed


def _equatorial_trial(seed: int, index: int) -> float:
    state = make_random_equatorial2(derive_seed(seed, 10**9 + index))
    w, v = random_orthogonal_pair(2, make_rng([seed, 10**9 + index, 1]))
    return abs(verify_duality(state, w, v).sum - 2.0)


def random_duality_campaign(
    n: int,
    num_states: int,
    seed: int,
    *,
    equatorial_states: int | None = None,
    inject_ghz: bool = False,
    tol: float = BOUND_TOL,
    workers: int | None = None,
) -> CampaignSummary:
    """Sample Haar probes with random orthogonal pairs and count bound violations.

    Each trial uses its own stream keyed by (seed, index), so the summary is
    independent of ``workers``.  For n=2 the equatorial equality case is also
    sampled (``equatorial_states`` defaults to ``num_states``).
    """
    if n < 2:
        raise ValueError("campaign needs n >= 2")
    if num_states < 1:
        raise ValueError("num_states must be >= 1")
    workers = _worker_count(workers)

    def run(fn, args):
        if workers == 1:
            return [fn(*a) for a in args]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda a: fn(*a), args))

    trials = run(_haar_trial, [(n, seed, i, tol) for i in range(num_states)])
    sums = [t[1] for t in trials]
    best = int(np.argmax(sums))
    summary = CampaignSummary(
        n=n,
        num_states=num_states,
        seed=seed,
        max_sum=float(sums[best]),
        max_sum_state_seed=trials[best][0],
        violations=sum(not t[2] for t in trials),
        violating_seeds=[t[0] for t in trials if not t[2]],
    )
    if inject_ghz:
        ghz = make_ghz(n)
        w = Direction.uniform(n)
        reports = [verify_duality(ghz, w, orthonormal_complement(w)[0], tol)]
        reports.append(verify_duality(ghz, *random_orthogonal_pair(n, make_rng([seed, 0, 3])), tol))
        summary.ghz_injected = True
        summary.violations += sum(not r.passed for r in reports)
        if reports[0].sum > summary.max_sum:
            summary.max_sum = reports[0].sum
            summary.max_sum_state_seed = None  # GHZ itself, not a sampled state
    if n == 2:
        count = num_states if equatorial_states is None else equatorial_states
        devs = run(_equatorial_trial, [(seed, i) for i in range(count)])
        summary.equatorial_states = count
        summary.max_equatorial_dev = float(max(devs)) if devs else 0.0
    return summary


def tradeoff_bound(n: int, delta: float) -> float:
    """Ceiling on F(w) for any probe with F(v) >= delta along an orthogonal v."""
    if not 0.0 < delta <= n:
        raise ValueError(f"delta must lie in (0, {n}], got {delta!r}")
    return float(n) - delta


def tradeoff_campaign(
    n: int, delta: float, num_states: int, seed: int, tol: float = BOUND_TOL
) -> dict:
    """Count sampled probes with F(v) >= delta whose F(w) exceeds n - delta."""
    ceiling = tradeoff_bound(n, delta)
    qualifying = violations = 0
    for i in range(num_states):
        state = make_random_haar(n, derive_seed(seed, i))
        w, v = random_orthogonal_pair(n, make_rng([seed, i, 2]))
        f = compute_qfim(state)
        qw, qv = qfi_along(f, w), qfi_along(f, v)
        if qv >= delta:
            qualifying += 1
            violations += qw > ceiling + tol
    return {"n": n, "delta": delta, "ceiling": ceiling, "qualifying": qualifying,
            "violations": int(violations)}
