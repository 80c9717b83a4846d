"""Convexity/starlikeness margins, coefficient certificates and constants.

Conventions: ``alpha`` is the order, ``0 <= alpha < 1``.  Pointwise
margins are positive exactly when the (open) condition holds at the point;
strict comparisons use ``EPS_STRICT``.  Coefficient certificates compare
``lhs <= rhs`` with no slack.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import NotLocallyBiholomorphic, as_cvector, identity, inner, norm, re_inner
from .mappings import Mapping, as_polynomial
from .multilinear import NormConfig, SymTensor, estimate_norm

TANGENCY_TOL = 1e-10
# Relative rounding guard for sampled growth bounds.
GROWTH_RTOL = 1e-12


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return alpha


# Pointwise margins ---------------------------------------------------------

def convexity_margins(f: Mapping, z, x, generic: bool = False):
    """Batched ``|x|^2 - Re<Df(z)^{-1} D^2f(z)(x,x), z>`` and an ok-mask.

    No admissibility checks; rows where Df(z) is not invertible are NaN.
    """
    w, ok = f.inv_d2_batch(z, x, generic=generic)
    nx2 = np.real(inner(x, x))
    return nx2 - np.real(inner(w, z)), ok


def convexity_margin(f: Mapping, z, x, generic: bool = False) -> float:
    """Margin of the convexity inequality at an admissible pair (z, x).

    f satisfies the order-alpha condition at (z, x) iff the returned value
    exceeds ``alpha * |x|^2``.
    """
    z = as_cvector(z, f.n)
    x = as_cvector(x, f.n)
    nz, nx = float(norm(z)), float(norm(x))
    if not 0.0 < nz < 1.0:
        raise ValueError("need 0 < |z| < 1")
    if nx == 0.0:
        raise ValueError("x must be nonzero")
    if abs(float(re_inner(x, z))) > TANGENCY_TOL * nx * nz:
        raise ValueError("tangency violated: Re<x, z> != 0")
    m, ok = convexity_margins(f, z, x, generic=generic)
    if not ok:
        raise NotLocallyBiholomorphic("Df(z) is not invertible", z)
    return float(m)


def starlike_margins(f: Mapping, z, alpha: float, generic: bool = False):
    alpha = check_alpha(alpha)
    h, ok = f.inv_df_batch(z, f._eval(z), generic=generic)
    p = inner(h, z)
    nz2 = np.real(inner(z, z))
    if alpha == 0.0:
        return np.real(p), ok
    c = nz2 / (2.0 * alpha)
    return c - np.abs(p - c), ok


def starlike_margin(f: Mapping, z, alpha: float, generic: bool = False) -> float:
    """Positive iff the order-alpha starlikeness condition holds at z.

    alpha > 0: ``|z|^2/(2 alpha) - |<h, z> - |z|^2/(2 alpha)|``;
    alpha = 0: ``Re<h, z>``; here ``h = Df(z)^{-1} f(z)``.
    """
    z = as_cvector(z, f.n)
    if not 0.0 < float(norm(z)) < 1.0:
        raise ValueError("need 0 < |z| < 1")
    m, ok = starlike_margins(f, z, alpha, generic=generic)
    if not ok:
        raise NotLocallyBiholomorphic("Df(z) is not invertible", z)
    return float(m)


# Constants -----------------------------------------------------------------

def a_alpha(alpha: float) -> float:
    """The piecewise bound of the starlike coefficient condition."""
    a = check_alpha(alpha)
    if a <= 0.25:
        return (2 - a) * math.sqrt(1 - 2 * a) / math.sqrt(5 - 2 * a)
    if a <= 0.4:
        return (2 - a) * (1 - a) / (2 + a)
    if a < 0.5:
        return a
    return 1 - a


def beta_of_alpha(alpha: float) -> float:
    """Order of starlikeness guaranteed for convex maps of order alpha."""
    a = check_alpha(alpha)
    s = 2 * a - 1
    return (s + math.sqrt(s * s + 8)) / 4


def growth_bounds(beta: float, r):
    """Lower/upper growth bounds for starlike maps of order beta at |z| = r."""
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1)")
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("r must lie in [0, 1)")
    p = 2.0 * (1.0 - beta)
    lower = r / (1.0 + r) ** p
    upper = r / (1.0 - r) ** p
    if lower.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


def covering_constant(beta: float) -> float:
    return 2.0 ** (-2.0 * (1.0 - beta))


# Certificates --------------------------------------------------------------

@dataclass
class CertificateReport:
    kind: str
    holds: bool
    lhs: float
    rhs: float
    term_norms: list = field(default_factory=list)
    # "exact": structured norms; "lower_bound": estimated norms;
    # "sampled": sup over random samples only.
    soundness: str = "exact"
    converged: bool = True
    label: str = ""
    details: dict = field(default_factory=dict)
    # Upper bound of the left-hand side; differs from lhs only for
    # estimated norms.  ``holds`` is decided on it.
    lhs_upper: float | None = None

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def status(self) -> str:
        if self.holds:
            return "holds"
        if self.lhs_upper is not None and self.lhs <= self.rhs:
            return "inconclusive"
        return "fails"

    def to_json(self) -> dict:
        d = asdict(self)
        d["slack"] = self.slack
        d["status"] = self.status
        return d


def homogeneous_parts(f: Mapping) -> dict[int, SymTensor]:
    """The degree-k part A_k of the expansion (terms of equal arity summed)."""
    f = as_polynomial(f)
    parts: dict[int, SymTensor] = {}
    for t in f.terms:
        parts[t.k] = t if t.k not in parts else parts[t.k] + t
    return dict(sorted(parts.items()))


def _coefficient_report(kind, label, f, weight, rhs, norm_cfg) -> CertificateReport:
    norms = []
    lhs = upper = 0.0
    exact = converged = True
    for k, A in homogeneous_parts(f).items():
        est = estimate_norm(A, norm_cfg)
        exact &= est.exact
        converged &= est.converged
        norms.append({
            "k": k, "norm": est.value, "norm_upper": est.upper, "weight": weight(k),
            "bias": est.bias, "converged": est.converged,
        })
        lhs += weight(k) * est.value
        upper += weight(k) * est.upper
    # An estimated norm is a lower bound: "holds" needs the upper bound,
    # so an underestimate can only make the report inconclusive.
    return CertificateReport(
        kind=kind,
        holds=bool((lhs if exact else upper) <= rhs),
        lhs=float(lhs),
        lhs_upper=None if exact else float(upper),
        rhs=float(rhs),
        term_norms=norms,
        soundness="exact" if exact else "lower_bound",
        converged=converged,
        label=label,
    )


def coeff_certificate_convex(f: Mapping, alpha: float, norm_cfg: NormConfig | None = None) -> CertificateReport:
    """sum k(k-alpha)|A_k| <= 1 - alpha, sufficient for convexity of order alpha."""
    a = check_alpha(alpha)
    return _coefficient_report("coeff_convex", "convex of order alpha", f, lambda k: k * (k - a), 1 - a, norm_cfg)


def coeff_certificate_starlike(f: Mapping, alpha: float, norm_cfg: NormConfig | None = None) -> CertificateReport:
    """sum (k-alpha)|A_k| <= A(alpha), sufficient for starlikeness of order alpha."""
    a = check_alpha(alpha)
    return _coefficient_report(
        "coeff_starlike", "starlike of order alpha", f, lambda k: k - a, a_alpha(a), norm_cfg
    )


def coeff_convex_class(f: Mapping, alpha: float, norm_cfg: NormConfig | None = None) -> CertificateReport:
    """Membership in CoeffConvexClass: sum k(k-alpha)|A_k| <= A(alpha)."""
    a = check_alpha(alpha)
    return _coefficient_report(
        "CoeffConvexClass", "coefficient convex class", f, lambda k: k * (k - a), a_alpha(a), norm_cfg
    )


def coeff_starlike_class(f: Mapping, alpha: float, norm_cfg: NormConfig | None = None) -> CertificateReport:
    """Membership in CoeffStarlikeClass: sum (k-alpha)|A_k| <= A(alpha)."""
    rep = coeff_certificate_starlike(f, alpha, norm_cfg)
    rep.kind, rep.label = "CoeffStarlikeClass", "coefficient starlike class"
    return rep


def derivative_bound_certificate(f: Mapping, alpha: float, c: float, sampler=None) -> CertificateReport:
    """Sampled check of |Df(z) - I| <= c and |D^2f(z)(x,x)| <= (1-c)(1-alpha).

    Sound only up to sampling: a "holds" verdict means no sample exceeded
    either bound.
    """
    from .search import SearchConfig, sample_admissible

    a = check_alpha(alpha)
    if not 0.0 <= c < 1.0:
        raise ValueError("c must lie in [0, 1)")
    cfg = sampler or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    df_sup = d2_sup = 0.0
    for z, x in _chunks(f.n, cfg, rng, sample_admissible):
        dev = f._df(z) - identity(f.n)
        df_sup = max(df_sup, float(np.max(np.linalg.norm(dev, ord=2, axis=(-2, -1)))))
        d2_sup = max(d2_sup, float(np.max(norm(f._d2(z, x)))))
    rhs = (1 - c) * (1 - a)
    return CertificateReport(
        kind="DerivativeBound",
        holds=bool(df_sup <= c and d2_sup <= rhs),
        lhs=d2_sup,
        rhs=rhs,
        soundness="sampled",
        label="sampled certificate",
        details={"c": c, "df_minus_identity_sup": df_sup, "df_bound_holds": bool(df_sup <= c), "samples": cfg.samples},
    )


def norm_condition_check(f: Mapping, alpha: float, sampler=None) -> CertificateReport:
    """Sampled sup of |Df(z)^{-1} D^2f(z)(x,x)| over admissible unit x vs 1 - alpha.

    This is the NormConvexClass condition; when it holds on the samples
    every sampled convexity margin is at least alpha.
    """
    from .search import SearchConfig, sample_admissible

    a = check_alpha(alpha)
    cfg = sampler or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    sup = 0.0
    min_margin = math.inf
    singular = 0
    for z, x in _chunks(f.n, cfg, rng, sample_admissible):
        w, ok = f.inv_d2_batch(z, x)
        singular += int(np.count_nonzero(~ok))
        if np.any(ok):
            sup = max(sup, float(np.max(norm(w[ok]))))
            m = np.real(inner(x[ok], x[ok])) - np.real(inner(w[ok], z[ok]))
            min_margin = min(min_margin, float(np.min(m)))
    return CertificateReport(
        kind="NormConvexClass",
        holds=bool(sup <= 1 - a and singular == 0),
        lhs=sup,
        rhs=1 - a,
        soundness="sampled",
        label="sampled certificate",
        details={"min_margin": min_margin, "singular_points": singular, "samples": cfg.samples},
    )


def _chunks(n, cfg, rng, sampler, chunk: int = 8192):
    left = cfg.samples
    while left > 0:
        size = min(chunk, left)
        yield sampler(n, rng, radius_cap=cfg.radius_cap, size=size)
        left -= size


@dataclass
class GrowthReport:
    alpha: float
    beta: float
    samples: int
    violations: int
    worst_lower_slack: float
    worst_upper_slack: float
    rows: np.ndarray | None = None  # columns: |z|, |f(z)|, lower, upper

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "samples": self.samples,
            "violations": self.violations,
            "worst_lower_slack": self.worst_lower_slack,
            "worst_upper_slack": self.worst_upper_slack,
            "holds": self.holds,
            "label": "sampled check",
        }


def growth_check(f: Mapping, alpha: float, sampler=None, max_radius: float = 0.95, keep_rows: bool = False) -> GrowthReport:
    """Sample |z| <= max_radius and compare |f(z)| with the growth bounds."""
    from .search import SearchConfig, sample_ball

    a = check_alpha(alpha)
    beta = beta_of_alpha(a)
    cfg = sampler or SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    z = sample_ball(f.n, rng, radius_cap=min(max_radius, cfg.radius_cap), size=cfg.samples)
    r = norm(z)
    fz = norm(f._eval(z))
    lower, upper = growth_bounds(beta, r)
    lo_slack = fz - lower
    up_slack = upper - fz
    bad = (fz < lower * (1 - GROWTH_RTOL)) | (fz > upper * (1 + GROWTH_RTOL))
    rows = np.column_stack([r, fz, lower, upper]) if keep_rows else None
    return GrowthReport(
        alpha=a,
        beta=beta,
        samples=len(z),
        violations=int(np.count_nonzero(bad)),
        worst_lower_slack=float(np.min(lo_slack)),
        worst_upper_slack=float(np.min(up_slack)),
        rows=rows,
    )
