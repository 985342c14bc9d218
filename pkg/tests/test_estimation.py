import math
import warnings

import numpy as np
import pytest

from qfi_lab.errors import ConfigError, ZeroQFIError
from qfi_lab.estimation import (
    EstimationResult,
    MeasurementModel,
    OutcomeDistribution,
    adversary_shift_test,
    classical_fisher_information,
    estimate_target,
    outcome_distribution,
    run_experiment,
    run_from_config,
    sample_shots,
)
from qfi_lab.qfim import Direction, compute_qfim, orthonormal_complement, qfi_along
from qfi_lab.states import encode, make_ghz, make_plus_product, make_random_haar, make_zero

from conftest import H, kron_all

PARITY, LOCAL_X = MeasurementModel.GHZ_PARITY, MeasurementModel.LOCAL_X


def dense_x_probs(state):
    """X-basis outcome probabilities via an explicit Kronecker product of H."""
    h = kron_all([H] * state.num_qubits)
    return np.abs(h @ state.amplitudes) ** 2


def test_local_x_matches_dense(rng):
    for n in range(1, 6):
        s = make_random_haar(n, n)
        s = encode(s, rng.uniform(0, 2 * math.pi, n))
        np.testing.assert_allclose(outcome_distribution(s, LOCAL_X).probs, dense_x_probs(s), atol=1e-14)


def test_parity_closed_form_against_brute_force(rng):
    for n in (2, 3, 4):
        for _ in range(5):
            theta = rng.uniform(0, 2 * math.pi, n)
            s = encode(make_ghz(n), theta)
            dense = dense_x_probs(s)
            even = np.array([bin(x).count("1") % 2 == 0 for x in range(2**n)])
            brute = dense[even].sum()
            closed = (1 + math.cos(theta.sum())) / 2
            assert abs(brute - closed) < 1e-12
            assert abs(outcome_distribution(s, PARITY).probs[0] - closed) < 1e-12


def test_distribution_examples():
    d = outcome_distribution(make_plus_product(3), LOCAL_X)
    assert d.probs[0] == pytest.approx(1, abs=1e-14) and d.outcomes[0] == "000"
    for seed in range(10):
        s = make_random_haar(1 + seed % 5, seed)
        for model in MeasurementModel:
            p = outcome_distribution(s, model).probs
            assert np.all(p >= -1e-15) and abs(p.sum() - 1) < 1e-12


def test_sample_shots():
    dist = OutcomeDistribution(PARITY, (+1, -1), np.array([1.0, 0.0]))
    assert sample_shots(dist, 100, 3).tolist() == [100, 0]
    d = OutcomeDistribution(PARITY, (+1, -1), np.array([0.5, 0.5]))
    np.testing.assert_array_equal(sample_shots(d, 1000, 9), sample_shots(d, 1000, 9))
    counts = sample_shots(d, 10**6, 123)
    assert counts.sum() == 10**6
    assert np.all(np.abs(counts - 5 * 10**5) <= 5 * 10**3)
    with pytest.raises(ValueError):
        sample_shots(d, 0, 1)


def test_estimate_target_parity_exact():
    n, m = 4, 10**6
    for phi in (0.7, math.pi / 2, 2.2):
        p = (1 + math.cos(phi)) / 2
        est = estimate_target([p * m, (1 - p) * m], PARITY, Direction.uniform(n))
        assert est == pytest.approx(phi / 2, abs=1e-12)
    # p = 1/2 inverts to total phase pi/2, i.e. w^T theta = (pi/2)/2 for N=4
    est = estimate_target([m / 2, m / 2], PARITY, Direction.uniform(4))
    assert est == pytest.approx(math.pi / 4, abs=1e-12)
    # calibration subtracts a known phase offset before scaling
    est = estimate_target([m / 2, m / 2], PARITY, Direction.uniform(4), calibration=0.5)
    assert est == pytest.approx((math.pi / 2 - 0.5) / 2, abs=1e-12)


def test_estimate_target_local_x_exact():
    s = encode(make_plus_product(2), [math.pi / 2, math.pi / 2])
    counts = outcome_distribution(s, LOCAL_X).probs * 10**6
    est = estimate_target(counts, LOCAL_X, [1, 1])
    assert est == pytest.approx(math.pi / math.sqrt(2), abs=1e-9)


def test_estimate_target_errors():
    with pytest.raises(ValueError):
        estimate_target([0, 0], PARITY, Direction.uniform(2))
    with pytest.raises(ValueError):
        estimate_target([], PARITY, Direction.uniform(2))
    with pytest.raises(ValueError):
        estimate_target([5, 5], PARITY, [1, 0])
    # degenerate frequencies are clamped, not infinite
    assert math.isfinite(estimate_target([100, 0], PARITY, Direction.uniform(2)))


def test_run_experiment_ghz_and_plus():
    n = 4
    ghz = run_experiment(make_ghz(n), [math.pi / 8] * n, PARITY, Direction.uniform(n),
                         10**5, 200, seed=7)
    assert abs(ghz.empirical_variance / 2.5e-6 - 1) <= 0.15
    assert ghz.crb_total == pytest.approx(ghz.crb_per_shot / ghz.shots_per_repetition)
    plus = run_experiment(make_plus_product(n), [math.pi / 2] * n, LOCAL_X,
                          Direction.uniform(n), 10**5, 200, seed=7)
    assert abs(plus.empirical_variance / 1e-5 - 1) <= 0.15
    for r in (ghz, plus):
        assert abs(r.estimate - r.target_value) < 4 * math.sqrt(r.crb_total / r.repetitions)
        assert r.empirical_variance >= 0.85 * r.crb_total


def test_run_experiment_deterministic():
    args = (make_ghz(3), [0.5, 0.5, 0.5], PARITY, Direction.uniform(3), 1000, 20, 4)
    assert run_experiment(*args) == run_experiment(*args)


def test_run_experiment_zero_qfi():
    v = orthonormal_complement(Direction.uniform(4))[0]
    with pytest.raises(ZeroQFIError):
        run_experiment(make_ghz(4), [math.pi / 8] * 4, LOCAL_X, v, 100, 10, 1)


def test_run_experiment_window():
    with pytest.raises(ValueError):
        run_experiment(make_ghz(2), [0.0, 0.0], PARITY, Direction.uniform(2), 100, 10, 1)
    with pytest.raises(ValueError):
        run_experiment(make_plus_product(2), [0.1, math.pi / 2], LOCAL_X, [1, 1], 100, 10, 1)


def test_cfi_parity_equals_n():
    for n in (2, 3, 4, 6):
        theta = np.full(n, math.pi / (2 * n))
        cfi = classical_fisher_information(make_ghz(n), theta, PARITY, Direction.uniform(n))
        assert abs(cfi - n) <= 1e-4
        assert abs(cfi - qfi_along(compute_qfim(make_ghz(n)), Direction.uniform(n))) <= 1e-4


def test_cfi_vanishes_off_sum_for_ghz(rng):
    for n in (2, 4):
        for v in orthonormal_complement(Direction.uniform(n)):
            for model in MeasurementModel:
                theta = rng.uniform(0, 1, n)
                assert classical_fisher_information(make_ghz(n), theta, model, v) <= 1e-10


def test_cfi_product_local_x_is_one():
    n = 3
    cfi = classical_fisher_information(make_plus_product(n), [1.0, 1.3, 2.0], LOCAL_X,
                                       Direction.uniform(n))
    assert abs(cfi - 1) <= 1e-6


def test_cfi_never_exceeds_qfi(rng):
    for i in range(50):
        n = int(rng.integers(1, 5))
        probe = make_random_haar(n, 300 + i)
        theta = rng.uniform(0, 2 * math.pi, n)
        u = rng.standard_normal(n)
        model = list(MeasurementModel)[i % 2]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cfi = classical_fisher_information(probe, theta, model, u)
        assert cfi <= qfi_along(compute_qfim(probe), u) + 1e-4


def test_cfi_step_range():
    with pytest.raises(ValueError):
        classical_fisher_information(make_ghz(2), [0, 0], PARITY, [1, 1], step=0.5)


def test_adversary_examples(rng):
    n = 5
    theta = rng.uniform(0, 2 * math.pi, n)
    v_perp = orthonormal_complement(Direction.uniform(n))[1]
    for model in MeasurementModel:
        assert adversary_shift_test(make_ghz(n), theta, v_perp, 0.3, model) <= 1e-12
    theta = np.full(n, 0.3)
    assert adversary_shift_test(make_ghz(n), theta, Direction.uniform(n), 0.3, PARITY) > 0.01
    dev = adversary_shift_test(make_plus_product(n), np.zeros(n), v_perp, 0.3, LOCAL_X)
    assert dev > 0.01
    with pytest.raises(ValueError):
        adversary_shift_test(make_ghz(2), [0, 0], [1, -1], 0.0, PARITY)


def test_ghz_blindness_all_epsilons(rng):
    for n in (2, 4, 6):
        for eps in (0.1, 0.5, 1.0):
            for v in orthonormal_complement(Direction.uniform(n)):
                for model in MeasurementModel:
                    theta = rng.uniform(0, 2 * math.pi, n)
                    assert adversary_shift_test(make_ghz(n), theta, v, eps, model) <= 1e-12


def test_run_from_config_document():
    doc = {
        "probe": "ghz", "qubits": 3, "theta": [0.5, 0.5, 0.5], "model": "parity",
        "direction": "sum", "shots": 2000, "repetitions": 30, "seed": 11,
    }
    rec = run_from_config(doc)
    fields = set(EstimationResult.__dataclass_fields__)
    assert fields <= set(rec) and rec["subseed_schedule"]
    assert rec == run_from_config(dict(doc))
    with pytest.raises(ConfigError):
        run_from_config({"probe": "ghz", "qubits": 2})
