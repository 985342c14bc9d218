"""Monte Carlo measurement of encoded probes and Cramer-Rao comparisons.

Two measurements are modelled: every qubit in the X basis reduced to the
global parity (optimal for GHZ probes estimating the phase sum), and per-qubit
X outcomes kept individually (optimal for product probes).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, ZeroQFIError
from .qfim import Direction, DirectionLike, as_direction, compute_qfim, qfi_along
from .rng import SUBSEED_SCHEDULE, derive_seed, make_rng
from .states import ParamVector, ProbeState, ThetaLike, _theta_array, encode

WINDOW = (0.2 * math.pi, 0.8 * math.pi)
ZERO_QFI_TOL = 1e-12


class MeasurementModel(enum.Enum):
    GHZ_PARITY = "parity"
    LOCAL_X = "local_x"

    @classmethod
    def parse(cls, text: str) -> "MeasurementModel":
        key = text.strip().lower()
        for model in cls:
            if key in (model.value, model.name.lower()):
                return model
        raise ConfigError(f"unknown measurement model '{text}'")


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    model: MeasurementModel
    outcomes: tuple
    probs: np.ndarray

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, (float(p) for p in self.probs)))


@dataclass(frozen=True)
class EstimationResult:
    target_value: float
    estimate: float
    empirical_variance: float
    shots_per_repetition: int
    repetitions: int
    crb_per_shot: float
    crb_total: float

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["subseed_schedule"] = SUBSEED_SCHEDULE
        return doc


def hadamard_all(amplitudes: np.ndarray, n: int) -> np.ndarray:
    """Apply H to every qubit (fast Walsh-Hadamard transform, normalized)."""
    a = np.asarray(amplitudes, dtype=np.complex128)
    for k in range(n):
        a = a.reshape(2**k, 2, 2 ** (n - k - 1))
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
    return a.reshape(-1) / 2 ** (n / 2)


def _bit_parity(n: int) -> np.ndarray:
    labels = np.arange(2**n)
    parity = np.zeros(2**n, dtype=int)
    for k in range(n):
        parity ^= (labels >> k) & 1
    return parity


def outcome_distribution(state: ProbeState, model: MeasurementModel) -> OutcomeDistribution:
    n = state.num_qubits
    px = np.abs(hadamard_all(state.amplitudes, n)) ** 2
    if model is MeasurementModel.LOCAL_X:
        outcomes = tuple(format(x, f"0{n}b") for x in range(2**n))
        return OutcomeDistribution(model, outcomes, px)
    odd = _bit_parity(n).astype(bool)
    p_minus = float(px[odd].sum())
    probs = np.array([1.0 - p_minus, p_minus])
    return OutcomeDistribution(model, (+1, -1), probs)


def sample_shots(distribution: OutcomeDistribution, shots: int, seed: int) -> np.ndarray:
    """Multinomial counts aligned with ``distribution.outcomes``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = np.clip(distribution.probs, 0.0, None)
    p = p / p.sum()
    return make_rng(seed).multinomial(int(shots), p)


def estimate_target(
    counts,
    model: MeasurementModel,
    w: DirectionLike,
    calibration: float = 0.0,
) -> float:
    """Plug-in estimate of w^T theta from one batch of outcome counts.

    Parity: the total phase is arccos(2 p_plus - 1) minus ``calibration`` (a
    known phase offset added to the probe by the operator), scaled by
    1/sqrt(N).  Local X: theta_j = arccos(<X_j>) per qubit, combined with the
    weights of ``w``; ``calibration`` is unused.  Frequencies are clamped to
    [1/(2M), 1 - 1/(2M)] so edge outcomes give finite estimates.
    """
    w = as_direction(w)
    counts = np.asarray(counts, dtype=float)
    total = float(counts.sum())
    if counts.size == 0 or total <= 0:
        raise ValueError("empty counts")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    n = w.n
    lo, hi = 1.0 / (2.0 * total), 1.0 - 1.0 / (2.0 * total)
    if model is MeasurementModel.GHZ_PARITY:
        if counts.size != 2:
            raise ValueError("parity counts must have two entries (+1, -1)")
        if not np.allclose(w.weights, 1.0 / math.sqrt(n), atol=1e-12):
            raise ValueError("the parity estimator targets the sum direction only")
        p_plus = float(np.clip(counts[0] / total, lo, hi))
        return (math.acos(2.0 * p_plus - 1.0) - calibration) / math.sqrt(n)
    if counts.size != 2**n:
        raise ValueError(f"local-X counts need {2**n} entries")
    labels = np.arange(2**n)
    theta_hat = np.empty(n)
    for j in range(n):
        bit = (labels >> (n - 1 - j)) & 1
        p0 = float(np.clip(counts[bit == 0].sum() / total, lo, hi))
        theta_hat[j] = math.acos(2.0 * p0 - 1.0)
    return float(w.weights @ theta_hat)


def check_window(theta: np.ndarray, model: MeasurementModel) -> None:
    lo, hi = WINDOW
    if model is MeasurementModel.GHZ_PARITY:
        total = float(np.sum(theta))
        if not lo <= total <= hi:
            raise ValueError(
                f"total phase {total:.4f} outside the invertible window [0.2pi, 0.8pi]"
            )
    elif np.any(theta < lo) or np.any(theta > hi):
        raise ValueError("every local phase must lie in [0.2pi, 0.8pi] for local-X inversion")


def run_experiment(
    probe: ProbeState,
    theta_true: ThetaLike,
    model: MeasurementModel,
    w: DirectionLike,
    shots: int,
    repetitions: int,
    seed: int,
    calibration: float = 0.0,
) -> EstimationResult:
    """Repeat an M-shot experiment R times and compare the spread with 1/(M F_Q).

    Repetition r samples with child seed ``derive_seed(seed, r)``.
    """
    w = as_direction(w)
    theta = _theta_array(theta_true if isinstance(theta_true, ParamVector)
                         else ParamVector(theta_true))
    if theta.size != probe.num_qubits or w.n != probe.num_qubits:
        raise ValueError("theta/direction length does not match the probe")
    if shots < 1 or repetitions < 2:
        raise ValueError("need shots >= 1 and repetitions >= 2")
    qfi = qfi_along(compute_qfim(probe), w)
    if qfi <= ZERO_QFI_TOL:
        raise ZeroQFIError(
            f"zero QFI along direction {np.round(w.weights, 6).tolist()}; CRB undefined"
        )
    check_window(theta, model)
    dist = outcome_distribution(encode(probe, theta), model)
    estimates = np.array([
        estimate_target(sample_shots(dist, shots, derive_seed(seed, r)), model, w, calibration)
        for r in range(repetitions)
    ])
    crb_per_shot = 1.0 / qfi
    return EstimationResult(
        target_value=float(w.weights @ theta),
        estimate=float(estimates.mean()),
        empirical_variance=float(estimates.var(ddof=1)),
        shots_per_repetition=int(shots),
        repetitions=int(repetitions),
        crb_per_shot=crb_per_shot,
        crb_total=crb_per_shot / shots,
    )


def classical_fisher_information(
    probe: ProbeState,
    theta: ThetaLike,
    model: MeasurementModel,
    u: DirectionLike,
    step: float = 1e-4,
) -> float:
    """Fisher information of the measurement outcomes along theta + s u."""
    if not 1e-6 <= step <= 1e-2:
        raise ValueError(f"step must lie in [1e-6, 1e-2], got {step!r}")
    u = as_direction(u)
    theta = _theta_array(theta)
    p0 = outcome_distribution(encode(probe, theta), model).probs
    p_up = outcome_distribution(encode(probe, theta + step * u.weights), model).probs
    p_dn = outcome_distribution(encode(probe, theta - step * u.weights), model).probs
    grad_sq = ((p_up - p_dn) / (2.0 * step)) ** 2
    live = p0 >= 1e-12
    flagged = ~live & (grad_sq >= 1e-12)
    if np.any(flagged):
        warnings.warn(
            f"{int(flagged.sum())} vanishing outcomes with nonzero slope were skipped",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(np.sum(grad_sq[live] / p0[live]))


def adversary_shift_test(
    probe: ProbeState,
    theta: ThetaLike,
    v: DirectionLike,
    epsilon: float,
    model: MeasurementModel,
) -> float:
    """Largest change of any outcome probability when theta moves by epsilon*v."""
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    v = as_direction(v)
    theta = _theta_array(theta)
    before = outcome_distribution(encode(probe, theta), model).probs
    after = outcome_distribution(encode(probe, theta + epsilon * v.weights), model).probs
    return float(np.max(np.abs(after - before)))


def run_from_config(doc: dict) -> dict:
    """Run one experiment described by a configuration document.

    Keys: ``probe`` (probe spec), ``qubits``, ``theta``, ``model``,
    ``direction``, ``shots``, ``repetitions``, ``seed`` and optionally
    ``calibration``.  Returns the flat result record.
    """
    from .specs import parse_direction, parse_probe, parse_theta

    try:
        qubits = doc.get("qubits")
        probe = parse_probe(str(doc["probe"]), None if qubits is None else int(qubits))
        n = probe.num_qubits
        theta = parse_theta(doc.get("theta", "zeros"), n)
        direction = doc.get("direction", "sum")
        if isinstance(direction, (list, tuple)):
            w = Direction(direction)
        else:
            w = parse_direction(str(direction), n)
        model = MeasurementModel.parse(str(doc.get("model", "parity")))
        shots, reps, seed = int(doc["shots"]), int(doc["repetitions"]), int(doc["seed"])
    except KeyError as exc:
        raise ConfigError(f"experiment config is missing {exc}") from exc
    result = run_experiment(probe, theta, model, w, shots, reps, seed,
                            float(doc.get("calibration", 0.0)))
    record = result.to_dict()
    record["crb_ratio"] = result.empirical_variance / result.crb_total
    return record
