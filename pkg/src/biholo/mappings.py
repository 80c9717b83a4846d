"""Holomorphic self-maps of the unit ball normalized by f(0)=0, Df(0)=I.

Three families are supported: truncated homogeneous expansions
``z + sum_k A_k(z^k)``, the rank-one quadratic ``z + a<z,u>^2 u`` and the
diagonal lift ``Phi_{u_1..u_m}(g_1..g_m)``.  All methods broadcast over
leading batch axes of ``z`` and ``x``.
"""

from __future__ import annotations

import numpy as np

from . import oned
from .linalg import (
    COND_LIMIT,
    NotLocallyBiholomorphic,
    as_cvector,
    batched_solve,
    complex_from_json,
    complex_to_json,
    identity,
    inner,
    norm,
    vector_from_json,
    vector_to_json,
)
from .multilinear import MAX_ARITY, SymTensor

ORTHO_TOL = 1e-12
MAX_DEGREE = MAX_ARITY


def _in_ball(z) -> np.ndarray:
    z = as_cvector(z)
    if np.any(norm(z) >= 1.0):
        raise ValueError("point outside the open unit ball")
    return z


class Mapping:
    type = "abstract"
    n: int

    # Batched primitives; no domain checks.
    def _eval(self, z):
        raise NotImplementedError

    def _df(self, z):
        raise NotImplementedError

    def _d2(self, z, x):
        raise NotImplementedError

    def _inv_df(self, z, v):
        """Closed-form Df(z)^{-1} v where available; returns (w, ok)."""
        return batched_solve(self._df(z), v)

    def _inv_d2(self, z, x):
        return self._inv_df(z, self._d2(z, x))

    def inv_d2_batch(self, z, x, generic: bool = False):
        """Df(z)^{-1} D^2f(z)(x, x) with a per-point invertibility mask."""
        if generic:
            return batched_solve(self._df(z), self._d2(z, x))
        return self._inv_d2(z, x)

    def inv_df_batch(self, z, v, generic: bool = False):
        if generic:
            return batched_solve(self._df(z), v)
        return self._inv_df(z, v)

    # Public, domain-checked API.
    def eval(self, z):
        return self._eval(_in_ball(as_cvector(z, self.n)))

    def dfrechet(self, z):
        return self._df(_in_ball(as_cvector(z, self.n)))

    def d2frechet(self, z, x):
        return self._d2(_in_ball(as_cvector(z, self.n)), as_cvector(x, self.n))

    def inv_df_apply(self, z, v, generic: bool = False):
        z = _in_ball(as_cvector(z, self.n))
        w, ok = self.inv_df_batch(z, as_cvector(v, self.n), generic=generic)
        if not np.all(ok):
            raise NotLocallyBiholomorphic("Df(z) is not invertible", z)
        return w

    def inv_d2(self, z, x, generic: bool = False):
        z = _in_ball(as_cvector(z, self.n))
        w, ok = self.inv_d2_batch(z, as_cvector(x, self.n), generic=generic)
        if not np.all(ok):
            raise NotLocallyBiholomorphic("Df(z) is not invertible", z)
        return w

    def to_json(self) -> dict:
        raise NotImplementedError


class PolynomialMapping(Mapping):
    """z + sum_k A_k(z^k) with 2 <= k <= 6."""

    type = "polynomial"

    def __init__(self, n: int, terms=()):
        self.n = int(n)
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        terms = tuple(terms)
        for t in terms:
            if not isinstance(t, SymTensor):
                raise TypeError("terms must be SymTensor instances")
            if t.n != self.n:
                raise ValueError(f"term of dimension {t.n} in a mapping of dimension {self.n}")
            if not 2 <= t.k <= MAX_DEGREE:
                raise ValueError(f"term arity {t.k} outside 2..{MAX_DEGREE}")
        self.terms = terms

    def __repr__(self):
        return f"PolynomialMapping(n={self.n}, degrees={[t.k for t in self.terms]})"

    def _eval(self, z):
        out = np.array(z, dtype=np.complex128)
        for t in self.terms:
            out = out + t.diag_eval(z)
        return out

    def _df(self, z):
        m = np.broadcast_to(identity(self.n), z.shape[:-1] + (self.n, self.n)).copy()
        for t in self.terms:
            m += t.k * t.partial_eval(z, t.k - 1)
        return m

    def _d2(self, z, x):
        z, x = np.broadcast_arrays(z, x)
        out = np.zeros(z.shape, dtype=np.complex128)
        for t in self.terms:
            p = t.partial_eval(z, t.k - 2)  # (..., n, n, n)
            out += t.k * (t.k - 1) * np.einsum("...ijl,...j,...l->...i", p, x, x)
        return out

    def to_json(self) -> dict:
        return {"type": self.type, "n": self.n, "terms": [t.to_json() for t in self.terms]}


class RankOneQuadratic(Mapping):
    """z + a <z,u>^2 u with |u| = 1."""

    type = "rank_one_quadratic"

    def __init__(self, a, u):
        u = as_cvector(u)
        if u.ndim != 1:
            raise ValueError("u must be a single vector")
        if abs(float(norm(u)) - 1.0) > ORTHO_TOL:
            raise ValueError("u must have unit norm")
        self.a = complex(a)
        self.u = u.copy()
        self.n = u.shape[0]

    def __repr__(self):
        return f"RankOneQuadratic(a={self.a!r}, n={self.n})"

    def _zeta(self, z):
        return inner(z, self.u)

    def _eval(self, z):
        zeta = np.asarray(self._zeta(z))
        return z + (self.a * zeta**2)[..., None] * self.u

    def _df(self, z):
        zeta = np.asarray(self._zeta(z))
        proj = np.outer(self.u, np.conj(self.u))
        return identity(self.n) + (2 * self.a * zeta)[..., None, None] * proj

    def _d2(self, z, x):
        z, x = np.broadcast_arrays(z, x)
        return (2 * self.a * np.asarray(inner(x, self.u)) ** 2)[..., None] * self.u

    def _inv_df(self, z, v):
        # Df = I + 2a zeta P with P = <., u>u, so Df^{-1} = I - (2a zeta / (1 + 2a zeta)) P.
        z, v = np.broadcast_arrays(z, v)
        d = 1.0 + 2 * self.a * np.asarray(self._zeta(z))
        ok = np.abs(d) * COND_LIMIT > np.maximum(1.0, np.abs(d))
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(ok, (d - 1.0) / d, np.nan)
        w = v - (coef * np.asarray(inner(v, self.u)))[..., None] * self.u
        return w, ok

    def as_polynomial(self) -> PolynomialMapping:
        return PolynomialMapping(self.n, [SymTensor.from_rank_one(self.a, self.u, 2)])

    def to_json(self) -> dict:
        return {"type": self.type, "n": self.n, "a": complex_to_json(self.a), "u": vector_to_json(self.u)}


def check_orthonormal(us, tol: float = ORTHO_TOL) -> float:
    """Max deviation of the Gram matrix from I; raises beyond ``tol``."""
    us = np.asarray(us, dtype=np.complex128)
    gram = us @ np.conj(us).T  # gram[j, k] = <u_j, u_k>
    dev = float(np.max(np.abs(gram - np.eye(len(us))))) if len(us) else 0.0
    if dev > tol:
        raise ValueError(f"u vectors are not orthonormal (Gram deviation {dev:.3g} > {tol:g})")
    return dev


class PhiMapping(Mapping):
    """z - sum_j <z,u_j>u_j + sum_j g_j(<z,u_j>) u_j."""

    type = "phi"

    def __init__(self, us, gs, tol: float = ORTHO_TOL):
        us = as_cvector(us)
        if us.ndim != 2:
            raise ValueError("us must be an (m, n) array of vectors")
        m, n = us.shape
        gs = tuple(g if isinstance(g, oned.OneDFunction) else oned.from_json(g) for g in gs)
        if len(gs) != m:
            raise ValueError(f"{m} directions but {len(gs)} functions")
        if m < 2:
            raise ValueError("Phi needs at least two directions")
        if m > n:
            raise ValueError(f"m = {m} exceeds dimension n = {n}")
        check_orthonormal(us, tol)
        self.us = us.copy()
        self.gs = gs
        self.m, self.n = m, n

    def __repr__(self):
        return f"PhiMapping(n={self.n}, gs={list(self.gs)})"

    def _zetas(self, z):
        return z @ np.conj(self.us).T  # (..., m)

    def _apply_each(self, fn_name, zeta):
        return np.stack([getattr(g, fn_name)(zeta[..., j]) for j, g in enumerate(self.gs)], axis=-1)

    def _eval(self, z):
        zeta = self._zetas(z)
        return z + (self._apply_each("g", zeta) - zeta) @ self.us

    def _df(self, z):
        zeta = self._zetas(z)
        dg = self._apply_each("dg", zeta)
        # sum_j (g_j' - 1) u_j conj(u_j)^T
        corr = np.einsum("...j,ja,jb->...ab", dg - 1.0, self.us, np.conj(self.us))
        return identity(self.n) + corr

    def _d2(self, z, x):
        z, x = np.broadcast_arrays(z, x)
        zeta = self._zetas(z)
        xi = x @ np.conj(self.us).T
        return (self._apply_each("d2g", zeta) * xi**2) @ self.us

    def _derivatives(self, z):
        zeta = self._zetas(z)
        dg = self._apply_each("dg", zeta)
        ok = np.all(np.abs(dg) >= oned.DERIVATIVE_FLOOR, axis=-1)
        return zeta, dg, ok

    def _inv_df(self, z, v):
        z, v = np.broadcast_arrays(z, v)
        _, dg, ok = self._derivatives(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = 1.0 - 1.0 / dg
        vj = v @ np.conj(self.us).T
        w = v - (coef * vj) @ self.us
        w[~ok] = np.nan
        return w, ok

    def _inv_d2(self, z, x):
        z, x = np.broadcast_arrays(z, x)
        zeta, dg, ok = self._derivatives(z)
        d2 = self._apply_each("d2g", zeta)
        xi = x @ np.conj(self.us).T
        with np.errstate(divide="ignore", invalid="ignore"):
            w = (d2 / dg * xi**2) @ self.us
        w[~ok] = np.nan
        return w, ok

    def to_json(self) -> dict:
        return {
            "type": self.type,
            "n": self.n,
            "u": [vector_to_json(u) for u in self.us],
            "g": [g.to_json() for g in self.gs],
        }


# Module-level operations.

def evaluate(f: Mapping, z):
    return f.eval(z)


def dfrechet(f: Mapping, z):
    return f.dfrechet(z)


def d2frechet(f: Mapping, z, x):
    return f.d2frechet(z, x)


def inv_df_apply(f: Mapping, z, v, generic: bool = False):
    """Df(z)^{-1} v; closed form for rank-one and Phi maps unless ``generic``."""
    return f.inv_df_apply(z, v, generic=generic)


def phi_inv_d2(f: PhiMapping, z, x):
    """sum_j (g_j''/g_j')(<z,u_j>) <x,u_j>^2 u_j."""
    if not isinstance(f, PhiMapping):
        raise TypeError("phi_inv_d2 needs a PhiMapping")
    return f.inv_d2(z, x)


def as_polynomial(f: Mapping) -> PolynomialMapping:
    if isinstance(f, PolynomialMapping):
        return f
    if isinstance(f, RankOneQuadratic):
        return f.as_polynomial()
    raise TypeError(f"{type(f).__name__} has no finite homogeneous expansion")


def alexander_transform(f: Mapping) -> PolynomialMapping:
    """g(z) = Df(z)(z): each term A_k becomes k A_k."""
    f = as_polynomial(f)
    return PolynomialMapping(f.n, [t.scaled(t.k) for t in f.terms])


class SpecError(ValueError):
    """Malformed mapping spec; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _at(path: str, fn, *args):
    try:
        return fn(*args)
    except SpecError:
        raise
    except KeyError as exc:
        raise SpecError(path, f"missing field {exc.args[0]!r}") from exc
    except (ValueError, TypeError, IndexError) as exc:
        raise SpecError(path, str(exc)) from exc


def _field(obj: dict, key: str, path: str):
    if key not in obj:
        raise SpecError(path, f"missing field {key!r}")
    return obj[key]


def _list_field(obj: dict, key: str, path: str) -> list:
    val = _field(obj, key, path)
    if not isinstance(val, list):
        raise SpecError(f"{path}.{key}", "expected a list")
    return val


def from_json(obj: dict, path: str = "$") -> Mapping:
    """Build a mapping from its JSON spec; errors carry JSON field paths."""
    if not isinstance(obj, dict):
        raise SpecError(path, "mapping spec must be a JSON object")
    kind = obj.get("type")
    if kind == "polynomial":
        n = _at(f"{path}.n", int, _field(obj, "n", path))
        terms = [
            _at(f"{path}.terms[{i}]", SymTensor.from_json, t) for i, t in enumerate(obj.get("terms", []))
        ]
        return _at(path, PolynomialMapping, n, terms)
    if kind == "rank_one_quadratic":
        a = _at(f"{path}.a", complex_from_json, _field(obj, "a", path))
        u = _at(f"{path}.u", vector_from_json, _field(obj, "u", path))
        f = _at(path, RankOneQuadratic, a, u)
        if "n" in obj and obj["n"] != f.n:
            raise SpecError(f"{path}.n", f"does not match len(u) = {f.n}")
        return f
    if kind == "phi":
        us = [_at(f"{path}.u[{i}]", vector_from_json, u) for i, u in enumerate(_list_field(obj, "u", path))]
        gs = [_at(f"{path}.g[{i}]", oned.from_json, g) for i, g in enumerate(_list_field(obj, "g", path))]
        if us and any(len(u) != len(us[0]) for u in us):
            raise SpecError(f"{path}.u", "direction vectors have different dimensions")
        tol = float(obj.get("ortho_tol", 1e-10))
        f = _at(path, PhiMapping, np.array(us), gs, tol)
        if "n" in obj and obj["n"] != f.n:
            raise SpecError(f"{path}.n", f"does not match the direction vectors (n = {f.n})")
        return f
    raise SpecError(f"{path}.type", f"unknown mapping type {kind!r}")


def identity_mapping(n: int) -> PolynomialMapping:
    return PolynomialMapping(n, [])


# Random constructors used by tests and sampling checks.

def random_orthonormal(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    q, _ = np.linalg.qr(g)
    return q.T.copy()


def random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / norm(v)


def random_polynomial(n: int, degrees, rng: np.random.Generator, scale: float = 0.3) -> PolynomialMapping:
    from .multilinear import random_tensor

    terms = [random_tensor(k, n, rng, scale / (n ** ((k + 1) / 2))) for k in degrees]
    return PolynomialMapping(n, terms)


def random_oned(rng: np.random.Generator) -> oned.OneDFunction:
    kind = rng.integers(4)
    if kind == 0:
        return oned.Identity()
    if kind == 1:
        return oned.ExpType(complex(*(rng.uniform(-1.5, 1.5, 2))))
    if kind == 2:
        return oned.KoebeOrder(float(rng.choice([0.0, 0.25, 0.5, 0.7])))
    # Keep g' = 1 + 2 a2 xi + 3 a3 xi^2 away from zero on the disk.
    a2, a3 = (rng.uniform(-0.2, 0.2, 2) + 1j * rng.uniform(-0.2, 0.2, 2)) / np.array([2, 3])
    return oned.PowerSeries([a2, a3])


def random_phi(n: int, m: int, rng: np.random.Generator) -> PhiMapping:
    return PhiMapping(random_orthonormal(n, m, rng), [random_oned(rng) for _ in range(m)])
