import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfi_lab.errors import InvariantError
from qfi_lab.qfim import (
    Direction,
    QFIMatrix,
    compute_qfim,
    orthonormal_complement,
    privacy_direction,
    qfi_along,
    qfi_oracle,
    spectral,
)
from qfi_lab.states import encode, make_ghz, make_plus_product, make_random_haar, make_zero
from qfi_lab.states import is_equatorial

from conftest import dense_qfim


def test_qfim_named_states():
    for n in (1, 2, 4, 7):
        np.testing.assert_allclose(compute_qfim(make_ghz(n)).entries, np.ones((n, n)), atol=1e-12)
        np.testing.assert_allclose(compute_qfim(make_plus_product(n)).entries, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(compute_qfim(make_zero(n)).entries, 0.0, atol=1e-15)


@pytest.mark.parametrize("seed", range(8))
def test_qfim_matches_dense_operator_covariance(seed):
    s = make_random_haar(1 + seed % 5, seed)
    np.testing.assert_allclose(compute_qfim(s).entries, dense_qfim(s), atol=1e-12)


def test_qfim_matches_oracle_on_random_directions(rng):
    for k in range(6):
        s = make_random_haar(k + 1, 100 + k)
        f = compute_qfim(s)
        for _ in range(20):
            u = Direction(rng.standard_normal(s.num_qubits))
            assert abs(qfi_along(f, u) - qfi_oracle(s, u, 1e-4)) <= 1e-6


def test_qfi_along_examples(rng):
    for n in (2, 3, 6):
        ghz = compute_qfim(make_ghz(n))
        w = Direction.uniform(n)
        assert abs(qfi_along(ghz, w) - n) < 1e-12
        for v in orthonormal_complement(w):
            assert qfi_along(ghz, v) < 1e-12
        plus = compute_qfim(make_plus_product(n))
        for _ in range(5):
            assert abs(qfi_along(plus, rng.standard_normal(n)) - 1) < 1e-12
    with pytest.raises(ValueError):
        qfi_along(compute_qfim(make_ghz(3)), [1.0, 0.0])


def test_oracle_examples(rng):
    assert abs(qfi_oracle(make_ghz(3), Direction.uniform(3), 1e-4) - 3) < 1e-6
    for n in (1, 3, 5):
        assert qfi_oracle(make_zero(n), rng.standard_normal(n), 1e-4) < 1e-8
    s = make_random_haar(4, 77)
    f = compute_qfim(s)
    for _ in range(10):
        u = rng.standard_normal(4)
        assert abs(qfi_oracle(s, u, 1e-4) - qfi_along(f, u)) < 1e-6
    for step in (1e-7, 0.1):
        with pytest.raises(ValueError):
            qfi_oracle(s, u, step)


@pytest.mark.parametrize("step", [1e-5, 1e-4, 1e-3, 1e-2])
def test_oracle_error_budget(step, rng):
    s = make_random_haar(3, 5)
    f = compute_qfim(s)
    for _ in range(5):
        u = rng.standard_normal(3)
        assert abs(qfi_oracle(s, u, step) - qfi_along(f, u)) <= max(1e-6, 10 * step**2)


def test_spectral_examples():
    for n in (2, 5):
        sd = spectral(compute_qfim(make_ghz(n)))
        np.testing.assert_allclose(sd.eigenvalues, [n] + [0] * (n - 1), atol=1e-12)
        top = sd.eigenvectors[0].weights
        np.testing.assert_allclose(np.abs(top), 1 / math.sqrt(n), atol=1e-12)
    np.testing.assert_allclose(spectral(QFIMatrix(np.eye(4))).eigenvalues, 1.0)
    np.testing.assert_allclose(spectral(QFIMatrix(np.zeros((3, 3)))).eigenvalues, 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_spectral_reconstruction(seed):
    f = compute_qfim(make_random_haar(2 + seed % 5, seed))
    sd = spectral(f)
    assert np.all(np.diff(sd.eigenvalues) <= 0)
    np.testing.assert_allclose(sd.matrix(), f.entries, atol=1e-8)
    vecs = np.column_stack([e.weights for e in sd.eigenvectors])
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(f.n), atol=1e-8)


def test_orthonormal_complement_examples(rng):
    out = orthonormal_complement([1.0, 0.0, 0.0])
    span = np.array([d.weights for d in out])
    assert np.allclose(span[:, 0], 0)
    (only,) = orthonormal_complement([1.0, 1.0])
    assert np.allclose(np.abs(only.weights), 1 / math.sqrt(2))
    assert abs(only.weights @ [1, 1]) < 1e-12
    for _ in range(20):
        w = Direction(rng.standard_normal(5))
        basis = np.array([w.weights] + [d.weights for d in orthonormal_complement(w)])
        np.testing.assert_allclose(basis @ basis.T, np.eye(5), atol=1e-12)
    with pytest.raises(ValueError):
        orthonormal_complement([1.0])
    a = [d.weights for d in orthonormal_complement([0.3, -0.2, 0.9])]
    b = [d.weights for d in orthonormal_complement([0.3, -0.2, 0.9])]
    np.testing.assert_array_equal(a, b)


def test_privacy_direction():
    w = Direction.uniform(4)
    v = privacy_direction(1, w)
    e1 = np.array([1.0, 0, 0, 0])
    np.testing.assert_allclose(v.weights, (e1 - 0.5 * w.weights) / math.sqrt(0.75), atol=1e-15)
    np.testing.assert_allclose(privacy_direction(1, [1, 1]).weights, [1 / math.sqrt(2), -1 / math.sqrt(2)])
    for n in (2, 3, 8):
        w = Direction.uniform(n)
        for j in range(1, n + 1):
            v = privacy_direction(j, w)
            assert abs(v.weights @ w.weights) <= 1e-12
            e = np.eye(n)[j - 1]
            closed = (e - w.weights[j - 1] * w.weights) / math.sqrt(1 - 1 / n)
            np.testing.assert_allclose(v.weights, closed, atol=1e-14)
    with pytest.raises(ValueError):
        privacy_direction(2, [0.0, 1.0, 0.0])


def test_direction_rejects_degenerate():
    with pytest.raises(ValueError):
        Direction([0.0, 1e-9])
    d = Direction([3.0, 4.0])
    assert abs(np.linalg.norm(d.weights) - 1) < 1e-12


def test_invalid_qfim_rejected():
    with pytest.raises(InvariantError):
        QFIMatrix([[1.0, 2.0], [2.0, 1.0]]).check()  # not PSD
    with pytest.raises(InvariantError):
        QFIMatrix([[1.0, 0.5], [0.0, 1.0]]).check()
    with pytest.raises(InvariantError):
        QFIMatrix([[1.5]]).check()


def test_qfim_export_document():
    doc = compute_qfim(make_ghz(3)).to_dict()
    assert doc["n"] == 3 and len(doc["entries"]) == 9
    assert abs(doc["trace"] - 3) < 1e-12
    np.testing.assert_allclose(doc["eigenvalues"], [3, 0, 0], atol=1e-12)


# --- properties ------------------------------------------------------------------

haar = st.builds(make_random_haar, st.integers(1, 6), st.integers(0, 2**31))


@settings(max_examples=50, deadline=None)
@given(haar, st.data())
def test_qfim_theta_independent(s, data):
    f = compute_qfim(s).entries
    for _ in range(10):
        theta = data.draw(st.lists(st.floats(0, 2 * math.pi), min_size=s.num_qubits,
                                   max_size=s.num_qubits))
        np.testing.assert_allclose(compute_qfim(encode(s, theta)).entries, f, atol=1e-10)


@settings(max_examples=80, deadline=None)
@given(haar)
def test_trace_bound(s):
    f = compute_qfim(s)
    assert f.trace <= s.num_qubits + 1e-9
    if is_equatorial(s, 1e-10):
        assert abs(f.trace - s.num_qubits) <= 1e-10


@settings(max_examples=80, deadline=None)
@given(haar, st.data())
def test_quadratic_form_matches_spectrum_and_sign(s, data):
    n = s.num_qubits
    u = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n)))
    if np.linalg.norm(u) < 1e-3:
        u = np.ones(n)
    f = compute_qfim(s)
    sd = spectral(f)
    u = Direction(u)
    via_spectrum = sum(lam * (u.weights @ e.weights) ** 2
                       for lam, e in zip(sd.eigenvalues, sd.eigenvectors))
    assert abs(qfi_along(f, u) - via_spectrum) <= 1e-8
    assert qfi_along(f, u) == pytest.approx(qfi_along(f, -u), abs=1e-15)


def test_oracle_consistency_100_pairs():
    rng = np.random.default_rng(2)
    for i in range(100):
        s = make_random_haar(int(rng.integers(1, 7)), 1000 + i)
        u = rng.standard_normal(s.num_qubits)
        assert abs(qfi_along(compute_qfim(s), u) - qfi_oracle(s, u, 1e-4)) <= 1e-5
