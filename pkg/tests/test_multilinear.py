import itertools

import numpy as np
import pytest

from biholo.linalg import norm
from biholo.multilinear import NormConfig, SymTensor, estimate_norm, op_norm, random_tensor, symmetrize

from conftest import random_vector


def brute_eval(coeffs, vs):
    """Explicit multi-index sum, independent of the contraction code."""
    n = coeffs.shape[0]
    k = coeffs.ndim - 1
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        for idx in itertools.product(range(n), repeat=k):
            term = coeffs[(i,) + idx]
            for v, j in zip(vs, idx):
                term = term * v[j]
            out[i] += term
    return out


def test_zero_tensor():
    A = SymTensor.zeros(3, 2)
    assert np.array_equal(A.eval([1, 2], [3, 4j], [5, 6]), np.zeros(2))
    assert op_norm(A) == 0.0


@pytest.mark.parametrize("k,n", [(2, 2), (3, 2), (2, 3), (4, 2)])
def test_eval_matches_brute_force(rng, k, n):
    A = random_tensor(k, n, rng)
    vs = [random_vector(rng, n) for _ in range(k)]
    assert np.allclose(A.eval(*vs), brute_eval(A.coeffs, vs), atol=1e-12)


def test_eval_symmetric_and_multilinear(rng):
    A = random_tensor(3, 3, rng)
    u, v, w, y = (random_vector(rng, 3) for _ in range(4))
    assert np.allclose(A.eval(u, v, w), A.eval(w, u, v))
    c = 0.7 - 0.2j
    assert np.allclose(A.eval(c * u + y, v, w), c * A.eval(u, v, w) + A.eval(y, v, w))


def test_symmetrization_idempotent(rng):
    c = rng.standard_normal((3, 3, 3, 3))
    s = symmetrize(c)
    assert np.allclose(symmetrize(s), s, atol=1e-15)
    assert np.allclose(s, np.transpose(s, (0, 2, 1, 3)))


def test_rank_one_structure(rng):
    a = 0.3 * np.exp(0.4j)
    u = random_vector(rng, 3, radius=1.0)
    A = SymTensor.from_rank_one(a, u, 2)
    assert np.allclose(A.eval(u, u), a * u)
    z = random_vector(rng, 3)
    zu = np.vdot(u, z)  # <z, u>
    assert np.allclose(A.diag_eval(z), a * zu**2 * u)
    # dense path agrees with the structured diagonal
    assert np.allclose(A.eval(z, z), A.diag_eval(z))
    assert op_norm(A) == pytest.approx(abs(a), abs=1e-15)
    assert estimate_norm(A).exact


def test_diag_eval(rng):
    A = random_tensor(3, 2, rng)
    z = random_vector(rng, 2)
    t = 0.4 + 0.9j
    assert np.allclose(A.diag_eval(np.zeros(2)), 0)
    assert np.allclose(A.diag_eval(t * z), t**3 * A.diag_eval(z))
    assert np.allclose(A.diag_eval(z), A.eval(z, z, z))


def test_batched_eval_matches_loop(rng):
    A = random_tensor(2, 3, rng)
    zs = np.array([random_vector(rng, 3) for _ in range(5)])
    batched = A.diag_eval(zs)
    assert np.allclose(batched, [A.diag_eval(z) for z in zs])


def test_dimension_mismatch():
    A = SymTensor.zeros(2, 2)
    with pytest.raises(ValueError):
        A.eval([1, 0, 0], [1, 0, 0])
    with pytest.raises(ValueError):
        A.diag_eval([1, 0, 0])


def test_construction_bounds():
    with pytest.raises(ValueError):
        SymTensor(np.zeros((2,) * 8))
    with pytest.raises(ValueError):
        SymTensor(np.zeros((17, 17, 17)))


@pytest.mark.parametrize("k,n", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_norm_estimate_dominates_samples(rng, k, n):
    A = random_tensor(k, n, rng)
    est = estimate_norm(A)
    assert est.converged and not est.exact
    x = rng.standard_normal((10_000, n)) + 1j * rng.standard_normal((10_000, n))
    x /= norm(x)[:, None]
    sampled = norm(A.diag_eval(x))
    assert sampled.max() <= est.value * (1 + NormConfig().tol)
    # argmax attains the reported value
    assert norm(A.diag_eval(est.argmax)) == pytest.approx(est.value, rel=1e-12)


@pytest.mark.parametrize("k,n", [(2, 3), (3, 2), (4, 2)])
def test_norm_upper_bound(rng, k, n):
    A = random_tensor(k, n, rng)
    est = estimate_norm(A)
    assert est.upper >= est.value
    # Bounds the full multilinear form, not only the diagonal.
    vs = []
    for _ in range(k):
        v = rng.standard_normal((5000, n)) + 1j * rng.standard_normal((5000, n))
        vs.append(v / norm(v)[:, None])
    assert norm(A.eval(*vs)).max() <= est.upper
    B = SymTensor.from_rank_one(0.7j, [0.6, 0.8], k)
    assert estimate_norm(B).upper == estimate_norm(B).value


def test_norm_homogeneity(rng):
    A = random_tensor(3, 2, rng)
    c = -1.3 + 2.1j
    assert op_norm(A.scaled(c)) == pytest.approx(abs(c) * op_norm(A), rel=1e-8)


def test_norm_deterministic(rng):
    A = random_tensor(2, 3, rng)
    B = SymTensor(A.coeffs, symmetric=True)
    assert op_norm(A) == op_norm(B)


def test_json_round_trip(rng):
    A = random_tensor(3, 2, rng)
    B = SymTensor.from_json(A.to_json())
    assert np.array_equal(A.coeffs, B.coeffs)
    u = random_vector(rng, 2, radius=1.0)
    R = SymTensor.from_rank_one(0.2j, u, 3)
    R2 = SymTensor.from_json(R.to_json())
    assert R2.rank_one is not None and np.array_equal(R2.coeffs, R.coeffs)


def test_json_symmetrizes_on_load():
    c = np.zeros((2, 2, 2, 2))
    c[0, 0, 1] = [1.0, 0.0]
    A = SymTensor.from_json({"k": 2, "n": 2, "coeffs": c.tolist()})
    assert A.coeffs[0, 0, 1] == A.coeffs[0, 1, 0] == 0.5
