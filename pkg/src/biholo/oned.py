"""Normalized analytic functions on the unit disk and their 1-D tests.

Every built-in satisfies g(0) = 0 and g'(0) = 1.  Evaluators accept
scalars or complex arrays and broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import EPS_STRICT, NotLocallyBiholomorphic, complex_from_json, complex_to_json

# |g'| below this is treated as a critical point (g not locally univalent).
DERIVATIVE_FLOOR = 1e-12


def _disk(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.complex128)
    if np.any(np.abs(xi) >= 1.0):
        raise ValueError("argument outside the open unit disk")
    return xi


class OneDFunction:
    name = "abstract"

    def g(self, xi):
        raise NotImplementedError

    def dg(self, xi):
        raise NotImplementedError

    def d2g(self, xi):
        raise NotImplementedError

    def log_derivative_ratio(self, xi):
        """g''(xi) / g'(xi), raising when g' vanishes."""
        xi = _disk(xi)
        d1 = self.dg(xi)
        if np.any(np.abs(d1) < DERIVATIVE_FLOOR):
            raise NotLocallyBiholomorphic(f"{self.name}: g' vanishes")
        return self.d2g(xi) / d1

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"name": self.name, **self.params()}

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(repr(self.to_json()))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class Identity(OneDFunction):
    name = "identity"

    def g(self, xi):
        return np.asarray(xi, dtype=np.complex128) * 1

    def dg(self, xi):
        return np.ones_like(np.asarray(xi, dtype=np.complex128))

    def d2g(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=np.complex128))


class ExpType(OneDFunction):
    """(e^{lam xi} - 1) / lam, whose ratio g''/g' is the constant lam."""

    name = "exp_type"

    def __init__(self, lam):
        self.lam = complex(lam)

    def g(self, xi):
        xi = np.asarray(xi, dtype=np.complex128)
        if self.lam == 0:
            return xi * 1
        return np.expm1(self.lam * xi) / self.lam

    def dg(self, xi):
        return np.exp(self.lam * np.asarray(xi, dtype=np.complex128))

    def d2g(self, xi):
        return self.lam * self.dg(xi)

    def params(self):
        return {"lambda": complex_to_json(self.lam)}


class KoebeOrder(OneDFunction):
    """The extremal convex function of order alpha.

    ``(1 - (1-xi)^(2alpha-1)) / (2alpha-1)`` and ``-log(1-xi)`` at
    alpha = 1/2, principal branches (Re(1-xi) > 0 on the disk).
    """

    name = "koebe_order"

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not 0.0 <= alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        self.alpha = alpha

    def g(self, xi):
        w = 1.0 - np.asarray(xi, dtype=np.complex128)
        if self.alpha == 0.5:
            return -np.log(w)
        p = 2.0 * self.alpha - 1.0
        return (1.0 - w**p) / p

    def dg(self, xi):
        w = 1.0 - np.asarray(xi, dtype=np.complex128)
        if self.alpha == 0.5:
            return 1.0 / w
        return w ** (2.0 * self.alpha - 2.0)

    def d2g(self, xi):
        w = 1.0 - np.asarray(xi, dtype=np.complex128)
        if self.alpha == 0.5:
            return 1.0 / w**2
        return (2.0 - 2.0 * self.alpha) * w ** (2.0 * self.alpha - 3.0)

    def params(self):
        return {"alpha": self.alpha}


class PowerSeries(OneDFunction):
    """xi + a_2 xi^2 + ... + a_K xi^K."""

    name = "power_series"

    def __init__(self, coeffs):
        self.coeffs = tuple(complex(c) for c in coeffs)
        # Ascending coefficients of the full polynomial, constant term first.
        full = np.array((0.0, 1.0) + self.coeffs, dtype=np.complex128)
        self._p = np.polynomial.Polynomial(full)
        self._dp = self._p.deriv()
        self._d2p = self._p.deriv(2)

    def g(self, xi):
        return self._p(np.asarray(xi, dtype=np.complex128))

    def dg(self, xi):
        return self._dp(np.asarray(xi, dtype=np.complex128)) * (1 + 0j)

    def d2g(self, xi):
        return self._d2p(np.asarray(xi, dtype=np.complex128)) * (1 + 0j)

    def params(self):
        return {"coeffs": [complex_to_json(c) for c in self.coeffs]}


BUILTINS = {cls.name: cls for cls in (Identity, ExpType, KoebeOrder, PowerSeries)}


def from_json(obj) -> OneDFunction:
    if isinstance(obj, str):
        obj = {"name": obj}
    if not isinstance(obj, dict) or "name" not in obj:
        raise ValueError("1-D function must be an object with a 'name'")
    name = obj["name"]
    if name == "identity":
        return Identity()
    if name == "exp_type":
        return ExpType(complex_from_json(obj["lambda"]))
    if name == "koebe_order":
        return KoebeOrder(float(obj["alpha"]))
    if name == "power_series":
        return PowerSeries([complex_from_json(c) for c in obj.get("coeffs", [])])
    raise ValueError(f"unknown 1-D function {name!r}; known: {sorted(BUILTINS)}")


def convex_order_margin_1d(g: OneDFunction, xi):
    """Re{1 + xi g''(xi)/g'(xi)}; g is in K(alpha) iff this exceeds alpha on U."""
    xi = _disk(xi)
    out = np.real(1.0 + xi * g.log_derivative_ratio(xi))
    return out[()] if out.ndim == 0 else out


def sk_margin_1d(g: OneDFunction, xi):
    """|g''(xi)/g'(xi)|; membership in SK(U, alpha) needs this <= 1 - alpha."""
    out = np.abs(g.log_derivative_ratio(_disk(xi)))
    return out[()] if out.ndim == 0 else out


def disk_grid(radii=None, angles: int = 64, n_random: int = 1000, seed: int = 0) -> np.ndarray:
    """Polar grid (radii 0.1..0.9 by default) plus uniform random disk points."""
    if radii is None:
        radii = np.linspace(0.1, 0.9, 9)
    theta = 2 * np.pi * np.arange(angles) / angles
    polar = (np.asarray(radii)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    rng = np.random.default_rng(seed)
    rand = 0.9 * np.sqrt(rng.uniform(size=n_random)) * np.exp(2j * np.pi * rng.uniform(size=n_random))
    return np.concatenate([polar, rand])


def in_k_alpha_on_grid(g: OneDFunction, alpha: float, grid=None) -> tuple[bool, float]:
    """Grid test of Re{1 + xi g''/g'} > alpha; returns (passes, worst slack)."""
    grid = disk_grid() if grid is None else grid
    slack = float(np.min(convex_order_margin_1d(g, grid)) - alpha)
    return slack > EPS_STRICT, slack


def in_sk_on_grid(g: OneDFunction, alpha: float, grid=None) -> tuple[bool, float]:
    grid = disk_grid() if grid is None else grid
    slack = float((1.0 - alpha) - np.max(sk_margin_1d(g, grid)))
    return slack >= 0.0, slack


@dataclass(frozen=True)
class CoefficientTest:
    holds: bool
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return alpha


def coeff_test_convex_1d(coeffs, alpha: float) -> CoefficientTest:
    """sum_{k>=2} k(k-alpha)|a_k| <= 1 - alpha, coefficients listed from a_2."""
    alpha = _check_alpha(alpha)
    lhs = sum((k * (k - alpha)) * abs(complex(a)) for k, a in enumerate(coeffs, start=2))
    rhs = 1.0 - alpha
    return CoefficientTest(lhs <= rhs, float(lhs), rhs)


def coeff_test_starlike_1d(coeffs, alpha: float) -> CoefficientTest:
    """sum_{k>=2} (k-alpha)|a_k| <= 1 - alpha."""
    alpha = _check_alpha(alpha)
    lhs = sum((k - alpha) * abs(complex(a)) for k, a in enumerate(coeffs, start=2))
    rhs = 1.0 - alpha
    return CoefficientTest(lhs <= rhs, float(lhs), rhs)
