"""Witness search for violations of the order-alpha convexity condition.

A witness is an admissible pair (z, x), ``0 < |z| < 1``, ``|x| = 1``,
``Re<x, z> = 0``, whose margin falls below alpha.  The search draws random
admissible pairs, keeps the lowest margins and refines them by projected
descent on the 4n real coordinates.  "No witness" is not a proof.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import TANGENCY_TOL, check_alpha, convexity_margins, starlike_margins
from .linalg import as_cvector, inner, norm, re_inner, vector_to_json
from .mappings import Mapping

CHUNK = 8192


@dataclass(frozen=True)
class SearchConfig:
    samples: int = 100_000
    refine_steps: int = 200
    seed: int = 0
    radius_cap: float = 0.999
    tol: float = 1e-10
    candidates: int = 8

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0.0 < self.radius_cap < 1.0:
            raise ValueError("radius_cap must lie in (0, 1)")
        if self.refine_steps < 0 or self.candidates < 1:
            raise ValueError("refine_steps must be >= 0 and candidates >= 1")


@dataclass
class Witness:
    z: np.ndarray
    x: np.ndarray
    margin: float
    alpha: float
    validated: bool = False
    path: str = "sampled"
    seed_margin: float | None = None

    def to_json(self) -> dict:
        d = {
            "z": vector_to_json(self.z),
            "x": vector_to_json(self.x),
            "margin": self.margin,
            "alpha": self.alpha,
            "validated": self.validated,
            "path": self.path,
        }
        if self.seed_margin is not None:
            d["seed_margin"] = self.seed_margin
        return d


@dataclass
class SearchReport:
    alpha: float
    evaluated: int = 0
    min_margin: float = math.inf
    witness: Witness | None = None
    singular_points: int = 0
    singular_example: np.ndarray | None = None
    refined: int = 0

    @property
    def verdict(self) -> str:
        if self.witness is not None:
            return "certified_violation"
        if self.singular_points:
            return "not_locally_biholomorphic"
        return "no_violation_found"

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "verdict": self.verdict,
            "evaluated": self.evaluated,
            "refined_candidates": self.refined,
            "min_margin": self.min_margin,
            "witness": None if self.witness is None else self.witness.to_json(),
            "singular_points": self.singular_points,
            "singular_example": None if self.singular_example is None else vector_to_json(self.singular_example),
            "note": "no violation found is not a proof of membership",
        }


# Sampling ------------------------------------------------------------------

def _gaussian(rng, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def sample_ball(n: int, rng: np.random.Generator, radius_cap: float = 0.999, size: int = 1) -> np.ndarray:
    """Uniform points of the ball of radius ``radius_cap`` (nonzero)."""
    d = _gaussian(rng, (size, n))
    d /= norm(d)[:, None]
    r = radius_cap * rng.uniform(size=size) ** (1.0 / (2 * n))
    r = np.where(r > 0.0, r, radius_cap)
    return d * r[:, None]


def tangent_project(z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """x - (Re<x,z>/|z|^2) z, normalized.  Degenerate rows come back NaN."""
    nz2 = np.real(inner(z, z))
    xp = x - (re_inner(x, z) / nz2)[..., None] * z
    nx = norm(xp)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = xp / np.asarray(nx)[..., None]
    out[np.asarray(nx) < 1e-8] = np.nan
    return out


def sample_admissible(n: int, rng: np.random.Generator, radius_cap: float = 0.999, size: int | None = None):
    """Random admissible pairs (z, x); one pair when ``size`` is None."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 1 if size is None else size
    z = sample_ball(n, rng, radius_cap, m)
    x = tangent_project(z, _gaussian(rng, (m, n)))
    bad = np.isnan(x[:, 0])
    while np.any(bad):
        x[bad] = tangent_project(z[bad], _gaussian(rng, (int(bad.sum()), n)))
        bad = np.isnan(x[:, 0])
    if size is None:
        return z[0], x[0]
    return z, x


def project_pair(z: np.ndarray, x: np.ndarray, radius_cap: float):
    """Map an arbitrary (z, x) onto the admissible set."""
    nz = norm(z)
    scale = np.where(nz > radius_cap, radius_cap / np.maximum(nz, 1e-300), 1.0)
    z = z * np.asarray(scale)[..., None]
    return z, tangent_project(z, x)


# Refinement ----------------------------------------------------------------

def _pack(z, x):
    return np.concatenate([z.real, z.imag, x.real, x.imag], axis=-1)


def _unpack(p, n):
    return p[..., :n] + 1j * p[..., n : 2 * n], p[..., 2 * n : 3 * n] + 1j * p[..., 3 * n :]


def _objective(f: Mapping, p: np.ndarray, radius_cap: float) -> np.ndarray:
    z, x = _unpack(p, f.n)
    z, x = project_pair(z, x, radius_cap)
    m, ok = convexity_margins(f, z, x)
    bad = ~ok | ~np.isfinite(m) | (norm(z) < 1e-12)
    return np.where(bad, np.inf, m)


def refine(f: Mapping, z, x, steps: int, radius_cap: float = 0.999, fd_step: float = 1e-7):
    """Projected descent of the margin from an admissible start.

    Returns ``(z, x, margin, history)``; ``history`` lists the margin after
    each accepted step and is non-increasing.
    """
    n = f.n
    z, x = project_pair(as_cvector(z, n), as_cvector(x, n), radius_cap)
    p = _pack(z, x)
    cur = float(_objective(f, p[None], radius_cap)[0])
    history = [cur]
    if not np.isfinite(cur):
        return z, x, cur, history
    eye = np.eye(4 * n)
    eta = 0.05
    for _ in range(steps):
        probes = np.concatenate([p + fd_step * eye, p - fd_step * eye])
        vals = _objective(f, probes, radius_cap)
        if not np.all(np.isfinite(vals)):
            break
        grad = (vals[: 4 * n] - vals[4 * n :]) / (2 * fd_step)
        gn = float(np.linalg.norm(grad))
        if gn == 0.0:
            break
        while eta > 1e-12:
            trial = p - (eta / gn) * grad
            tz, tx = project_pair(*_unpack(trial, n), radius_cap)
            trial = _pack(tz, tx)
            val = float(_objective(f, trial[None], radius_cap)[0])
            if val < cur:
                p, cur = trial, val
                history.append(cur)
                eta = min(eta * 1.5, 0.5)
                break
            eta *= 0.5
        else:
            break
    z, x = _unpack(p, n)
    return z, x, cur, history


# Search --------------------------------------------------------------------

def _validate(f: Mapping, w: Witness) -> bool:
    m, ok = convexity_margins(f, w.z, w.x, generic=True)
    return bool(ok) and abs(float(m) - w.margin) <= 1e-8 * max(1.0, abs(w.margin))


def _witness_key(w: Witness) -> tuple:
    return (w.margin, json.dumps(w.to_json(), sort_keys=True))


def search(f: Mapping, alpha: float, cfg: SearchConfig | None = None) -> SearchReport:
    """Sample admissible pairs, refine the worst ones, report the best witness."""
    alpha = check_alpha(alpha)
    cfg = cfg or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    report = SearchReport(alpha=alpha)
    pool_m = np.empty(0)
    pool_z = np.empty((0, f.n), dtype=np.complex128)
    pool_x = np.empty((0, f.n), dtype=np.complex128)
    left = cfg.samples
    while left > 0:
        size = min(CHUNK, left)
        left -= size
        z, x = sample_admissible(f.n, rng, cfg.radius_cap, size)
        m, ok = convexity_margins(f, z, x)
        ok &= np.isfinite(m)
        report.evaluated += size
        nbad = int(np.count_nonzero(~ok))
        if nbad:
            if report.singular_example is None:
                report.singular_example = z[np.flatnonzero(~ok)[0]].copy()
            report.singular_points += nbad
        pool_m = np.concatenate([pool_m, m[ok]])
        pool_z = np.concatenate([pool_z, z[ok]])
        pool_x = np.concatenate([pool_x, x[ok]])
        keep = np.argsort(pool_m, kind="stable")[: cfg.candidates]
        pool_m, pool_z, pool_x = pool_m[keep], pool_z[keep], pool_x[keep]
    if len(pool_m):
        report.min_margin = float(pool_m[0])

    best = None
    for z0, x0, m0 in zip(pool_z, pool_x, pool_m):
        if cfg.refine_steps:
            z1, x1, m1, _ = refine(f, z0, x0, cfg.refine_steps, cfg.radius_cap)
            report.refined += 1
        else:
            z1, x1, m1 = z0, x0, float(m0)
        if not np.isfinite(m1):
            continue
        report.min_margin = min(report.min_margin, m1)
        cand = Witness(z=z1, x=x1, margin=float(m1), alpha=alpha, path="sampled", seed_margin=float(m0))
        if best is None or _witness_key(cand) < _witness_key(best):
            best = cand
    if best is not None and best.margin < alpha - cfg.tol:
        best.validated = _validate(f, best)
        report.witness = best
    return report


def find_witness(f: Mapping, alpha: float, cfg: SearchConfig | None = None) -> Witness | None:
    return search(f, alpha, cfg).witness


def seeded_witness(f: Mapping, alpha: float, z, x, cfg: SearchConfig | None = None, refine_locally: bool = True) -> Witness | None:
    """Evaluate (and optionally refine) the margin at a given admissible seed.

    ``x`` is normalized first, so the margin is that of the unit direction.
    Returns a witness iff the final margin is below ``alpha - cfg.tol``.
    """
    alpha = check_alpha(alpha)
    cfg = cfg or SearchConfig()
    z = as_cvector(z, f.n)
    x = as_cvector(x, f.n)
    nz, nx = float(norm(z)), float(norm(x))
    if not 0.0 < nz < 1.0 or nx == 0.0:
        raise ValueError("seed must satisfy 0 < |z| < 1 and x != 0")
    if abs(float(re_inner(x, z))) > TANGENCY_TOL * nz * nx:
        raise ValueError("seed is not admissible: Re<x, z> != 0")
    x = x / nx
    m0, ok = convexity_margins(f, z, x)
    if not ok:
        return None
    m0 = float(m0)
    zf, xf, mf = z, x, m0
    if refine_locally and cfg.refine_steps:
        cap = max(cfg.radius_cap, nz)
        z1, x1, m1, _ = refine(f, z, x, cfg.refine_steps, cap)
        if np.isfinite(m1) and m1 <= m0:
            zf, xf, mf = z1, x1, m1
    if not mf < alpha - cfg.tol:
        return None
    w = Witness(z=zf, x=xf, margin=float(mf), alpha=alpha, path="seeded", seed_margin=m0)
    w.validated = _validate(f, w)
    return w


@dataclass
class StarlikeReport:
    alpha: float
    evaluated: int
    min_normalized_margin: float
    violations: int
    singular_points: int
    worst_z: np.ndarray | None = field(default=None)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "evaluated": self.evaluated,
            "min_normalized_margin": self.min_normalized_margin,
            "violations": self.violations,
            "singular_points": self.singular_points,
            "worst_z": None if self.worst_z is None else vector_to_json(self.worst_z),
            "verdict": "violation_found" if self.violations else "no_violation_found",
        }


def find_starlike_violation(f: Mapping, alpha: float, cfg: SearchConfig | None = None) -> StarlikeReport:
    """Sample the ball for points where starlikeness of order alpha fails.

    Margins are divided by |z|^2 (they scale like it near 0); a point
    counts as a violation when that ratio is below ``-cfg.tol``.
    """
    alpha = check_alpha(alpha)
    cfg = cfg or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    rep = StarlikeReport(alpha, 0, math.inf, 0, 0)
    left = cfg.samples
    while left > 0:
        size = min(CHUNK, left)
        left -= size
        z = sample_ball(f.n, rng, cfg.radius_cap, size)
        m, ok = starlike_margins(f, z, alpha)
        ok &= np.isfinite(m)
        rep.evaluated += size
        rep.singular_points += int(np.count_nonzero(~ok))
        if not np.any(ok):
            continue
        q = m[ok] / np.real(inner(z[ok], z[ok]))
        rep.violations += int(np.count_nonzero(q < -cfg.tol))
        i = int(np.argmin(q))
        if q[i] < rep.min_normalized_margin:
            rep.min_normalized_margin = float(q[i])
            rep.worst_z = z[ok][i].copy()
    return rep
