import math

import numpy as np
import pytest

from biholo import criteria, oned
from biholo.criteria import (
    a_alpha,
    beta_of_alpha,
    coeff_certificate_convex,
    coeff_certificate_starlike,
    coeff_convex_class,
    coeff_starlike_class,
    convexity_margin,
    derivative_bound_certificate,
    covering_constant,
    growth_bounds,
    growth_check,
    norm_condition_check,
    starlike_margin,
)
from biholo.linalg import norm
from biholo.mappings import PhiMapping, PolynomialMapping, RankOneQuadratic, alexander_transform, identity_mapping, random_orthonormal
from biholo.multilinear import SymTensor, random_tensor
from biholo.search import SearchConfig, find_starlike_violation, sample_admissible

from conftest import random_vector

# Independent transcriptions of the four branches of A(alpha).
BRANCHES = [
    lambda a: (2 - a) * math.sqrt(1 - 2 * a) / math.sqrt(5 - 2 * a),
    lambda a: (2 - a) * (1 - a) / (2 + a),
    lambda a: a,
    lambda a: 1 - a,
]
SMALL = SearchConfig(samples=4000, refine_steps=0, seed=3)


def rank_one_poly(a, u, k=2):
    return PolynomialMapping(len(u), [SymTensor.from_rank_one(a, u, k)])


# margins -----------------------------------------------------------------

def test_identity_convexity_margin(rng):
    f = identity_mapping(3)
    z, x = sample_admissible(3, rng)
    x = 2.5 * x
    assert convexity_margin(f, z, x) == pytest.approx(norm(x) ** 2)


@pytest.mark.parametrize("a_abs,theta,r", [(0.3, 0.4, 0.9), (0.2, -2.0, 0.5), (0.45, 3.0, 0.99)])
def test_rank_one_quadratic_margin_formula(a_abs, theta, r):
    u = np.array([0.6, 0.8j, 0])
    f = RankOneQuadratic(a_abs * np.exp(1j * theta), u)
    z0 = -r * np.exp(-1j * theta) * u
    x = 1j * np.exp(-1j * theta) * u
    expect = (1 - 4 * a_abs * r) / (1 - 2 * a_abs * r)
    assert convexity_margin(f, z0, x) == pytest.approx(expect, abs=1e-13)
    assert convexity_margin(f, z0, x, generic=True) == pytest.approx(expect, abs=1e-13)


def test_exp_type_phi_margin_formula(rng):
    us = random_orthonormal(3, 3, rng)
    lams = [0.5, 1.2 * np.exp(0.9j), -0.3j]
    f = PhiMapping(us, [oned.ExpType(l) for l in lams])
    k, r = 1, 0.9
    theta = np.angle(lams[k])
    z0 = -r * np.exp(-1j * theta) * us[k]
    x = 1j * np.exp(-1j * theta) * us[k]
    assert convexity_margin(f, z0, x) == pytest.approx(1 - r * abs(lams[k]), abs=1e-13)


def test_margin_scale_covariance(rng):
    f = RankOneQuadratic(0.3 + 0.1j, [1, 0])
    z, x = sample_admissible(2, rng)
    for t in (0.1, 2.0, 7.5):
        assert convexity_margin(f, z, t * x) == pytest.approx(t**2 * convexity_margin(f, z, x), rel=1e-12)


def test_margin_preconditions():
    f = identity_mapping(2)
    with pytest.raises(ValueError, match="tangency"):
        convexity_margin(f, [0.5, 0], [1, 0])
    with pytest.raises(ValueError):
        convexity_margin(f, [0, 0], [1, 0])
    with pytest.raises(ValueError):
        convexity_margin(f, [0.5, 0], [0, 0])


def test_starlike_margin_identity(rng):
    f = identity_mapping(2)
    z = random_vector(rng, 2, radius=0.6)
    assert starlike_margin(f, z, 0.0) == pytest.approx(0.36)
    assert starlike_margin(f, z, 0.5) == pytest.approx(0.36)


def test_starlike_margin_dense_oracle():
    f = RankOneQuadratic(0.25, [1, 0])
    z = np.array([0.5, 0])
    # dense oracle: Df(z) = diag(1 + 2 a z1, 1), f(z) = (z1 + a z1^2, 0)
    df = np.array([[1 + 0.25, 0], [0, 1]])
    h = np.linalg.solve(df, [0.5 + 0.25 * 0.25, 0])
    assert starlike_margin(f, z, 0.0) == pytest.approx(np.real(np.vdot(z, h)), abs=1e-15)
    for alpha in (0.3, 0.7):
        c = 0.25 / (2 * alpha)
        expect = c - abs(np.vdot(z, h) - c)
        assert starlike_margin(f, z, alpha) == pytest.approx(expect, abs=1e-15)


# constants ---------------------------------------------------------------

@pytest.mark.parametrize("bp,left,right,value", [(0.25, 0, 1, 7 / 12), (0.4, 1, 2, 0.4), (0.5, 2, 3, 0.5)])
def test_a_alpha_breakpoints(bp, left, right, value):
    assert BRANCHES[left](bp) == pytest.approx(value, abs=1e-12)
    assert BRANCHES[right](bp) == pytest.approx(value, abs=1e-12)
    assert a_alpha(bp) == pytest.approx(value, abs=1e-12)


def test_a_alpha_values():
    assert a_alpha(0.0) == pytest.approx(2 / math.sqrt(5), abs=1e-15)
    assert a_alpha(0.75) == pytest.approx(0.25)
    grid = np.arange(0, 1, 1e-3)
    assert all(a_alpha(a) <= 1 - a for a in grid)
    with pytest.raises(ValueError):
        a_alpha(1.0)


def test_beta():
    assert beta_of_alpha(0.0) == 0.5
    assert beta_of_alpha(0.5) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    grid = np.arange(0, 1, 1e-3)
    b = np.array([beta_of_alpha(a) for a in grid])
    assert np.all(np.abs(2 * b**2 - (2 * grid - 1) * b - 1) <= 1e-12)
    assert np.all(np.diff(b) > 0)


def test_growth_bounds():
    assert growth_bounds(0.5, 0.0) == (0.0, 0.0)
    lo, up = growth_bounds(0.5, 0.5)
    assert lo == pytest.approx(1 / 3) and up == pytest.approx(1.0)
    assert covering_constant(0.5) == 0.5


# certificates ------------------------------------------------------------

def test_identity_certificates():
    f = identity_mapping(2)
    for rep in (coeff_certificate_convex(f, 0.3), coeff_certificate_starlike(f, 0.3)):
        assert rep.holds and rep.lhs == 0.0


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.9])
def test_boundary_tensor_certificate(alpha):
    t = (1 - alpha) / (4 - 2 * alpha)
    f = rank_one_poly(t, np.array([0, 1.0]))
    rep = coeff_certificate_convex(f, alpha)
    assert rep.lhs == pytest.approx(1 - alpha, abs=1e-15)
    assert rep.soundness == "exact"
    if alpha == 0.0:
        assert rep.holds and rep.slack == 0.0


def test_boundary_general_tensor(rng):
    A = random_tensor(2, 3, rng)
    t = 0.25
    A = A.scaled(t / criteria.estimate_norm(A).value)
    rep = coeff_certificate_convex(PolynomialMapping(3, [A]), 0.0)
    assert rep.lhs == pytest.approx(1.0, rel=1e-10)
    assert rep.soundness == "lower_bound"
    # The estimate sits on the bound but the upper bound does not, so the
    # report must not claim "holds".
    assert rep.lhs_upper > rep.rhs and rep.status == "inconclusive" and not rep.holds


def test_estimated_certificate_decided_by_upper_bound(rng):
    from biholo.multilinear import norm_upper_bound

    A = random_tensor(3, 2, rng)
    inside = PolynomialMapping(2, [A.scaled(0.9 / (3 * 3 * norm_upper_bound(A)))])
    rep = coeff_certificate_convex(inside, 0.0)
    assert rep.holds and rep.status == "holds" and rep.lhs <= rep.lhs_upper <= rep.rhs
    outside = PolynomialMapping(2, [A.scaled(1.1 / (9 * criteria.estimate_norm(A).value))])
    assert coeff_certificate_convex(outside, 0.0).status == "fails"


def test_failing_certificates():
    f = rank_one_poly(0.3, np.array([1.0, 0]))
    rep = coeff_certificate_convex(f, 0.0)
    assert not rep.holds and rep.lhs == pytest.approx(1.2)
    f = rank_one_poly(0.5, np.array([1.0, 0]))
    assert coeff_certificate_convex(f, 0.0).lhs == pytest.approx(2.0)
    rep = coeff_certificate_starlike(f, 0.0)
    assert not rep.holds and rep.lhs == pytest.approx(1.0) and rep.rhs == pytest.approx(2 / math.sqrt(5))


def test_equal_arity_terms_are_summed():
    u = np.array([1.0, 0])
    f = PolynomialMapping(2, [SymTensor.from_rank_one(0.1, u, 2), SymTensor.from_rank_one(-0.1, u, 2)])
    assert coeff_certificate_convex(f, 0.0).lhs == pytest.approx(0.0, abs=1e-15)


def test_derivative_bound_certificate():
    assert derivative_bound_certificate(identity_mapping(2), 0.4, 0.5, SMALL).holds
    for alpha in (0.0, 0.3, 0.6):
        a = 0.9 * (1 - alpha) / (4 - 2 * alpha)
        c = 1 - 2 * a / (1 - alpha)
        rep = derivative_bound_certificate(RankOneQuadratic(a * 1j, [0.6, 0.8]), alpha, c, SMALL)
        assert rep.holds and rep.label == "sampled certificate"
    rep = derivative_bound_certificate(RankOneQuadratic(0.6, [1, 0]), 0.0, 0.2, SearchConfig(samples=20000, seed=1))
    assert not rep.holds and rep.lhs > 0.8


def test_growth_identity_and_boundary():
    assert growth_check(identity_mapping(3), 0.4, SMALL).violations == 0
    f = rank_one_poly(0.25, np.array([1.0, 0]))
    rep = growth_check(f, 0.0, SearchConfig(samples=10_000, seed=7))
    assert rep.violations == 0 and rep.worst_lower_slack >= -1e-12


def test_growth_negative_control_runs():
    rep = growth_check(RankOneQuadratic(0.6, [1, 0]), 0.0, SMALL)
    assert rep.samples == SMALL.samples


def test_norm_condition_for_sk_phi():
    """Phi maps built from SK(U, alpha) functions satisfy the norm condition
    and show no sampled margin below alpha."""
    rng = np.random.default_rng(8)
    for alpha in (0.0, 0.3, 0.6):
        us = random_orthonormal(3, 3, rng)
        lams = (1 - alpha) * rng.uniform(0.2, 1, 3) * np.exp(2j * np.pi * rng.uniform(size=3))
        f = PhiMapping(us, [oned.ExpType(l) for l in lams])
        rep = norm_condition_check(f, alpha, SMALL)
        assert rep.holds
        assert rep.details["min_margin"] >= alpha


def test_alexander_equivalence_small():
    rng = np.random.default_rng(9)
    for _ in range(10):
        A = random_tensor(2, 2, rng, 0.1)
        f = PolynomialMapping(2, [A])
        for alpha in (0.0, 0.45, 0.7):
            assert coeff_convex_class(f, alpha).holds == coeff_starlike_class(alexander_transform(f), alpha).holds


def test_convex_member_is_starlike_of_order_beta():
    f = rank_one_poly(0.2, np.array([0.6, 0.8j]))
    beta = beta_of_alpha(0.0)
    rep = find_starlike_violation(f, beta, SearchConfig(samples=20_000, seed=4))
    assert rep.violations == 0
