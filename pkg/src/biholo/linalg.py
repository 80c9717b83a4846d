"""Small dense complex linear algebra on C^n.

Vectors are ``complex128`` arrays whose last axis is the space dimension;
leading axes are batch axes and every routine here broadcasts over them.
The inner product is linear in the first slot and conjugate-linear in the
second, ``inner(z, w) = sum_j z_j * conj(w_j)``.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

# Slack for strict inequalities (open conditions on the open ball).
EPS_STRICT = 1e-9
# Matrices with a condition estimate above this are treated as singular.
COND_LIMIT = 1e12


class NotLocallyBiholomorphic(ArithmeticError):
    """Df(z) is singular or too ill-conditioned to invert at ``z``."""

    def __init__(self, message: str, z=None):
        super().__init__(message)
        self.z = None if z is None else np.asarray(z)


def as_cvector(z, n: int | None = None) -> np.ndarray:
    v = np.asarray(z, dtype=np.complex128)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.shape[-1] < 1:
        raise ValueError("vectors must have dimension >= 1")
    if n is not None and v.shape[-1] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {v.shape[-1]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_cmatrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_dims(z: np.ndarray, w: np.ndarray) -> None:
    if z.shape[-1] != w.shape[-1]:
        raise ValueError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")


def inner(z, w):
    """Hilbert inner product <z, w>, batched over leading axes."""
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    _check_dims(z, w)
    # Separate real/imaginary sums keep <z, z> exactly real.
    re = np.sum(z.real * w.real + z.imag * w.imag, axis=-1)
    im = np.sum(z.imag * w.real - z.real * w.imag, axis=-1)
    out = re + 1j * im
    return out[()] if out.ndim == 0 else out


def norm(z):
    z = np.asarray(z, dtype=np.complex128)
    out = np.sqrt(np.sum(z.real**2 + z.imag**2, axis=-1))
    return out[()] if out.ndim == 0 else out


def re_inner(x, z):
    """Re <x, z>; the tangency functional of the convexity condition."""
    return np.real(inner(x, z))


def op_norm2(m) -> float:
    """Spectral norm (operator norm induced by the Hilbert norm)."""
    return float(np.linalg.norm(np.asarray(m, dtype=np.complex128), ord=2))


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def cond1_estimate(lu_piv, anorm: float) -> float:
    lu, _ = lu_piv
    gecon = lapack.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        return np.inf
    return 1.0 / rcond


def solve(m, b, z=None) -> np.ndarray:
    """Solve ``m v = b`` by LU with partial pivoting.

    Raises NotLocallyBiholomorphic when the one-norm condition estimate
    exceeds ``COND_LIMIT``.  ``z`` is only attached to the exception.
    """
    m = as_cmatrix(m)
    b = as_cvector(b, m.shape[-1])
    if m.ndim != 2:
        raise ValueError("solve() takes a single matrix; use batched_solve()")
    anorm = float(np.max(np.sum(np.abs(m), axis=0)))
    if anorm == 0.0:
        raise NotLocallyBiholomorphic("zero matrix", z)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            lu_piv = scipy.linalg.lu_factor(m, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NotLocallyBiholomorphic(str(exc), z) from exc
    cond = cond1_estimate(lu_piv, anorm)
    if not cond <= COND_LIMIT:
        raise NotLocallyBiholomorphic(f"condition estimate {cond:.3g} > {COND_LIMIT:.0e}", z)
    return scipy.linalg.lu_solve(lu_piv, b, check_finite=False)


def batched_solve(m, b) -> tuple[np.ndarray, np.ndarray]:
    """Solve a stack of systems; returns ``(v, ok)``.

    Systems whose condition number exceeds ``COND_LIMIT`` are not solved:
    their rows of ``v`` are NaN and ``ok`` is False there.
    """
    m = as_cmatrix(m)
    b = np.asarray(b, dtype=np.complex128)
    s = np.linalg.svd(m, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = s[..., 0] / s[..., -1]
    ok = np.isfinite(cond) & (cond <= COND_LIMIT)
    safe = np.where(ok[..., None, None], m, np.eye(m.shape[-1]))
    v = np.linalg.solve(safe, b[..., None])[..., 0]
    v[~ok] = np.nan
    return v, ok


# JSON forms: complex scalars are [re, im]; vectors are lists of pairs;
# matrices are lists of rows.

def complex_to_json(c) -> list[float]:
    c = complex(c)
    return [float(c.real), float(c.imag)]


def complex_from_json(obj) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in obj
    ):
        return complex(float(obj[0]), float(obj[1]))
    raise ValueError(f"expected [re, im] pair, got {obj!r}")


def vector_to_json(v) -> list[list[float]]:
    return [complex_to_json(c) for c in np.asarray(v).reshape(-1)]


def vector_from_json(obj) -> np.ndarray:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ValueError("expected a non-empty list of [re, im] pairs")
    return as_cvector([complex_from_json(c) for c in obj])


def matrix_to_json(m) -> list[list[list[float]]]:
    return [vector_to_json(row) for row in np.asarray(m)]


def matrix_from_json(obj) -> np.ndarray:
    return as_cmatrix([vector_from_json(row) for row in obj])
