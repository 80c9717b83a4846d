"""Symmetric k-linear operators A: (C^n)^k -> C^n.

A tensor is stored densely as ``coeffs[i, j1, ..., jk]`` (output index
first); evaluation is
``A(v1, ..., vk)_i = sum coeffs[i, j1..jk] (v1)_j1 ... (vk)_jk``.
Coefficients are symmetrized over the input axes on construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_cvector, complex_from_json, complex_to_json, inner, norm, vector_from_json, vector_to_json

MAX_ARITY = 6
MAX_DIM = 16
# Dense storage bound: n^(k+1) entries.
MAX_ENTRIES = 1 << 22


def symmetrize(coeffs: np.ndarray) -> np.ndarray:
    """Average ``coeffs`` over all permutations of its input axes (1..k)."""
    c = np.asarray(coeffs, dtype=np.complex128)
    k = c.ndim - 1
    if k < 1:
        raise ValueError("coefficient array needs an output axis and at least one input axis")
    if k == 1:
        return c.copy()
    # Adjacent transpositions generate S_k; an exactly symmetric array is
    # returned unchanged so that load/serialize round trips are bit-exact.
    if all(
        np.array_equal(c, np.swapaxes(c, i, i + 1)) for i in range(1, k)
    ):
        return c.copy()
    acc = np.zeros_like(c)
    for perm in itertools.permutations(range(1, k + 1)):
        acc += np.transpose(c, (0,) + perm)
    acc /= math.factorial(k)
    # Summation order differs between permuted entries; copy each entry from
    # its sorted multi-index so the result is exactly symmetric.
    idx = np.indices(c.shape, dtype=np.int8)
    idx[1:] = np.sort(idx[1:], axis=0)
    return acc[tuple(idx)]


def _flatten_batch(vs):
    arrs = [np.asarray(v, dtype=np.complex128) for v in vs]
    batch = np.broadcast_shapes(*(a.shape[:-1] for a in arrs))
    n = arrs[0].shape[-1]
    flat = [np.broadcast_to(a, batch + (n,)).reshape(-1, n) for a in arrs]
    return batch, flat


class SymTensor:
    """Bounded symmetric k-linear operator on C^n.

    ``rank_one`` tensors ``z -> a <z,u>^k u`` remember ``(a, u)`` so that
    their operator norm is computed exactly.
    """

    __slots__ = ("k", "n", "coeffs", "rank_one", "_norm_cache")

    def __init__(self, coeffs, *, symmetric: bool = False, rank_one=None):
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.ndim < 3:
            raise ValueError("arity k must be >= 2")
        n = c.shape[0]
        if any(s != n for s in c.shape):
            raise ValueError(f"coefficient array must be (n,)*(k+1), got {c.shape}")
        k = c.ndim - 1
        if k > MAX_ARITY:
            raise ValueError(f"arity {k} exceeds {MAX_ARITY}")
        if n > MAX_DIM:
            raise ValueError(f"dimension {n} exceeds {MAX_DIM}")
        if c.size > MAX_ENTRIES:
            raise ValueError(f"dense tensor with {c.size} entries exceeds {MAX_ENTRIES}")
        if not np.all(np.isfinite(c)):
            raise ValueError("tensor has non-finite coefficients")
        if not symmetric:
            c = symmetrize(c)
        c.setflags(write=False)
        self.k = k
        self.n = n
        self.coeffs = c
        self.rank_one = rank_one
        self._norm_cache = {}

    @classmethod
    def zeros(cls, k: int, n: int) -> SymTensor:
        return cls(np.zeros((n,) * (k + 1)), symmetric=True)

    @classmethod
    def from_rank_one(cls, a, u, k: int) -> SymTensor:
        """The k-linear map whose diagonal is ``z -> a <z,u>^k u``."""
        u = as_cvector(u)
        if u.ndim != 1:
            raise ValueError("u must be a single vector")
        a = complex(a)
        cu = np.conj(u)
        c = a * u
        for _ in range(k):
            c = np.multiply.outer(c, cu)
        return cls(c, symmetric=True, rank_one=(a, u.copy()))

    def scaled(self, c) -> SymTensor:
        c = complex(c)
        ro = None if self.rank_one is None else (c * self.rank_one[0], self.rank_one[1])
        return SymTensor(c * self.coeffs, symmetric=True, rank_one=ro)

    def __add__(self, other: SymTensor) -> SymTensor:
        if (self.k, self.n) != (other.k, other.n):
            raise ValueError("cannot add tensors of different arity/dimension")
        return SymTensor(self.coeffs + other.coeffs, symmetric=True)

    def __repr__(self) -> str:
        tag = ", rank_one" if self.rank_one is not None else ""
        return f"SymTensor(k={self.k}, n={self.n}{tag})"

    def _check(self, v: np.ndarray) -> None:
        if v.shape[-1] != self.n:
            raise ValueError(f"dimension mismatch: tensor n={self.n}, vector n={v.shape[-1]}")

    def eval(self, *vs) -> np.ndarray:
        """A(v1, ..., vk); each ``vi`` may carry the same batch axes."""
        if len(vs) != self.k:
            raise ValueError(f"expected {self.k} arguments, got {len(vs)}")
        for v in vs:
            self._check(np.asarray(v))
        batch, flat = _flatten_batch(vs)
        t = np.tensordot(flat[-1], self.coeffs, axes=([1], [self.k]))
        for v in reversed(flat[:-1]):
            t = np.einsum("b...j,bj->b...", t, v)
        return t.reshape(batch + (self.n,))

    def diag_eval(self, z) -> np.ndarray:
        """A(z^k) = A(z, ..., z)."""
        z = np.asarray(z, dtype=np.complex128)
        self._check(z)
        if self.rank_one is not None:
            a, u = self.rank_one
            return (a * inner(z, u) ** self.k)[..., None] * u
        return self.eval(*([z] * self.k))

    def partial_eval(self, z, times: int) -> np.ndarray:
        """Contract ``times`` input slots with ``z``; the free slots remain.

        Result shape is ``batch + (n,) * (k + 1 - times)``.
        """
        z = np.asarray(z, dtype=np.complex128)
        self._check(z)
        if not 0 <= times <= self.k:
            raise ValueError("times out of range")
        batch = z.shape[:-1]
        zf = z.reshape(-1, self.n)
        t = np.broadcast_to(self.coeffs, (zf.shape[0],) + self.coeffs.shape)
        for _ in range(times):
            t = np.einsum("b...j,bj->b...", t, zf)
        return t.reshape(batch + (self.n,) * (self.k + 1 - times))

    def to_json(self) -> dict:
        if self.rank_one is not None:
            a, u = self.rank_one
            return {"rank_one": {"a": complex_to_json(a), "u": vector_to_json(u), "k": self.k}}
        pairs = np.stack([self.coeffs.real, self.coeffs.imag], axis=-1)
        return {"k": self.k, "n": self.n, "coeffs": pairs.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> SymTensor:
        if not isinstance(obj, dict):
            raise ValueError("tensor must be a JSON object")
        if "rank_one" in obj:
            ro = obj["rank_one"]
            return cls.from_rank_one(complex_from_json(ro["a"]), vector_from_json(ro["u"]), int(ro["k"]))
        k, n = int(obj["k"]), int(obj["n"])
        raw = np.asarray(obj["coeffs"], dtype=np.float64)
        if raw.shape != (n,) * (k + 1) + (2,):
            raise ValueError(f"coeffs shape {raw.shape[:-1]} does not match k={k}, n={n}")
        return cls(raw[..., 0] + 1j * raw[..., 1])


@dataclass(frozen=True)
class NormConfig:
    restarts: int = 32
    max_iter: int = 2000
    tol: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class NormEstimate:
    value: float
    converged: bool
    # True when the structured (closed-form) path was used; otherwise the
    # value is a lower bound of the true norm.
    exact: bool
    argmax: np.ndarray | None = None
    # Rigorous upper bound; equals ``value`` when exact.
    upper: float = math.nan

    @property
    def bias(self) -> str:
        return "exact" if self.exact else "lower_bound"


def _ascent(A: SymTensor, x0: np.ndarray, cfg: NormConfig):
    """Vectorized projected gradient ascent of |A(x^k)|^2 over the sphere."""
    k = A.k
    x = x0 / norm(x0)[:, None]

    def value_and_grad(x):
        t = A.partial_eval(x, k - 1)  # (R, n, n): A(x^{k-1}, .)
        y = np.einsum("rij,rj->ri", t, x)
        phi = np.sum(np.abs(y) ** 2, axis=-1)
        g = k * np.einsum("rij,ri->rj", np.conj(t), y)  # J^H y
        return phi, g

    phi, g = value_and_grad(x)
    eta = np.ones(len(x))
    done = np.zeros(len(x), dtype=bool)
    for _ in range(cfg.max_iter):
        gt = g - np.real(inner(g, x))[:, None] * x
        scale = k * np.maximum(phi, 1e-300)
        done |= (norm(gt) / scale <= cfg.tol) | (phi == 0.0)
        if done.all():
            break
        step = (eta / scale)[:, None] * gt
        xn = x + step
        xn /= norm(xn)[:, None]
        phin, gn = value_and_grad(xn)
        better = (phin > phi) & ~done
        x = np.where(better[:, None], xn, x)
        g = np.where(better[:, None], gn, g)
        phi = np.where(better, phin, phi)
        eta = np.where(better, eta * 1.5, eta * 0.5)
        # Step too small to change phi in floating point: stationary to rounding.
        done |= eta < 1e-14
    return np.sqrt(phi), x, done


def estimate_norm(A: SymTensor, cfg: NormConfig | None = None) -> NormEstimate:
    """sup over unit x of |A(x^k)|, which equals the full multilinear norm."""
    cfg = cfg or NormConfig()
    if cfg in A._norm_cache:
        return A._norm_cache[cfg]
    if A.rank_one is not None:
        a, u = A.rank_one
        nu = float(norm(u))
        v = abs(a) * nu ** (A.k + 1)
        est = NormEstimate(v, True, True, u / nu if nu else None, v)
    elif not np.any(A.coeffs):
        est = NormEstimate(0.0, True, True, None, 0.0)
    else:
        rng = np.random.default_rng(cfg.seed)
        starts = rng.standard_normal((cfg.restarts, A.n)) + 1j * rng.standard_normal((cfg.restarts, A.n))
        starts = np.concatenate([starts, np.eye(A.n, dtype=np.complex128)])
        vals, xs, done = _ascent(A, starts, cfg)
        best = int(np.argmax(vals))  # first maximum: deterministic tie-break
        up = max(norm_upper_bound(A), float(vals[best]))
        est = NormEstimate(float(vals[best]), bool(done[best]), False, xs[best], up)
    A._norm_cache[cfg] = est
    return est


def norm_upper_bound(A: SymTensor) -> float:
    """Spectral norm of the n x n^k matricization.

    A(v1..vk) is that matrix applied to v1 (x) ... (x) vk, whose norm is
    the product of the |vi|, so this bounds the operator norm from above.
    """
    return float(np.linalg.norm(A.coeffs.reshape(A.n, -1), ord=2))


def op_norm(A: SymTensor, cfg: NormConfig | None = None) -> float:
    return estimate_norm(A, cfg).value


def random_tensor(k: int, n: int, rng: np.random.Generator, scale: float = 1.0) -> SymTensor:
    c = rng.standard_normal((n,) * (k + 1)) + 1j * rng.standard_normal((n,) * (k + 1))
    return SymTensor(scale * c)
