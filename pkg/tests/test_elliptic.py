"""Special-function layer: frozen brute-force oracles, functional identities,
parity, trigonometric limits, and truncation behaviour."""

import cmath
import math

import numpy as np
import pytest

from ecslab.elliptic import (
    TWO_PI,
    EllipticContext,
    TruncationPolicy,
    beta_potential,
    log_dtheta,
    log_theta_annulus,
    pair_potential,
    theta,
    theta_annulus,
)
from ecslab.errors import DomainError, SingularityError, TruncationError

# Golden values from over-truncated brute-force oracles (see oracle helpers
# below, run with 200+ terms, tails < 1e-20):
C0_BETA2 = -0.3224669806160446       # 1/12 - sum_{m=1}^{200} 1/(2 sinh^2(m))
THETA_BETA2_R13 = 0.566169552117803  # 200-factor product at beta=2, r=1.3
V_BETA2_R10 = 0.9659016666737067     # |m| <= 60 lattice sum at beta=2, r=1.0


def brute_c0(beta, terms=200):
    s = 0.0
    for m in range(1, terms + 1):
        x = beta * m / 2.0
        if x > 350.0:
            break
        s += 1.0 / (2.0 * math.sinh(x) ** 2)
    return 1.0 / 12.0 - s


def brute_theta(beta, r, terms=200):
    q = math.exp(-beta / 2.0)
    val = math.sin(r / 2.0)
    for m in range(1, terms + 1):
        q2m = q ** (2 * m)
        if q2m == 0.0:
            break
        val *= 1.0 - 2.0 * q2m * math.cos(r) + q2m * q2m
    return val


def brute_lattice_sum(beta, r, mmax=60):
    total = 0.0
    for m in range(-mmax, mmax + 1):
        w = cmath.sin(complex(r, beta * m) / 2.0)
        total += (1.0 / (4.0 * w * w)).real
    return total


def fd1_richardson(fn, x, h=1e-3):
    def d(step):
        return (
            fn(x - 2 * step) / 12 - 2 * fn(x - step) / 3
            + 2 * fn(x + step) / 3 - fn(x + 2 * step) / 12
        ) / step

    return (16.0 * d(h / 2) - d(h)) / 15.0


def test_truncation_policy_term_rule():
    pol = TruncationPolicy(target_eps=1e-16, max_terms=256)
    for beta in (1.5, 2.0, 4.0, 8.0):
        q = math.exp(-beta / 2.0)
        n = pol.n_terms(q)
        assert q ** (2 * n) < 1e-16
        assert q ** (2 * (n - 1)) >= 1e-16 or n == 1


def test_truncation_policy_cap():
    pol = TruncationPolicy(target_eps=1e-16, max_terms=8)
    with pytest.raises(TruncationError):
        pol.n_terms(math.exp(-0.5))  # beta=1 needs ~37 terms


def test_context_bitlevel_q_beta():
    for beta in (1.5, 2.0, 3.7, 8.0):
        ctx = EllipticContext.from_beta(beta)
        assert ctx.q == math.exp(-ctx.beta / 2.0)
    ctx = EllipticContext.from_q(0.3)
    assert ctx.q == math.exp(-ctx.beta / 2.0)
    tctx = EllipticContext.trigonometric()
    assert tctx.q == 0.0 and math.isinf(tctx.beta)
    assert tctx.q == math.exp(-tctx.beta / 2.0)


def test_context_constant_ordering():
    prev = None
    for beta in (1.5, 2.0, 4.0, 8.0):
        ctx = EllipticContext.from_beta(beta)
        assert ctx.c1 == 1.0 / 12.0
        assert ctx.c0 <= ctx.c1
        if prev is not None:
            assert ctx.c0 > prev  # approaches c1 from below as beta grows
        prev = ctx.c0
    assert EllipticContext.trigonometric().c0 == 1.0 / 12.0


def test_c0_frozen_beta2():
    ctx = EllipticContext.from_beta(2.0)
    assert ctx.c0 == pytest.approx(C0_BETA2, abs=1e-15)
    assert ctx.c0 == pytest.approx(brute_c0(2.0), abs=1e-15)


def test_c0_beta8_first_term_bound():
    ctx = EllipticContext.from_beta(8.0)
    assert 1.0 / 12.0 - ctx.c0 < 1.01 / (2.0 * math.sinh(4.0) ** 2)


def test_theta_trig_and_frozen():
    tctx = EllipticContext.trigonometric()
    assert theta(tctx, math.pi) == 1.0
    ctx = EllipticContext.from_beta(2.0)
    assert theta(ctx, 1.3) == pytest.approx(THETA_BETA2_R13, rel=1e-14)
    assert theta(ctx, 1.3) == pytest.approx(brute_theta(2.0, 1.3), rel=1e-14)


def test_theta_odd_bitwise():
    ctx = EllipticContext.from_beta(3.0)
    for r in (0.3, 1.0, 2.9, 5.1):
        assert theta(ctx, -r) == -theta(ctx, r)


def test_pair_potential_trig_and_frozen():
    tctx = EllipticContext.trigonometric()
    assert pair_potential(tctx, math.pi) == 0.25
    ctx = EllipticContext.from_beta(2.0)
    assert pair_potential(ctx, 1.0) == pytest.approx(V_BETA2_R10, rel=1e-14)
    assert pair_potential(ctx, 1.0) == pytest.approx(brute_lattice_sum(2.0, 1.0), rel=1e-14)


def test_pair_potential_even_bitwise():
    ctx = EllipticContext.from_beta(2.0)
    for r in (0.4, 1.0, 3.3):
        assert pair_potential(ctx, r) == pair_potential(ctx, -r)


def test_log_dtheta_trig_and_parity():
    tctx = EllipticContext.trigonometric()
    assert abs(log_dtheta(tctx, math.pi)) < 1e-16
    ctx = EllipticContext.from_beta(3.0)
    assert log_dtheta(ctx, -0.7) == -log_dtheta(ctx, 0.7)


def test_log_dtheta_fd_oracle():
    ctx = EllipticContext.from_beta(2.0)
    fd = fd1_richardson(lambda x: math.log(theta(ctx, x)), 1.0)
    assert log_dtheta(ctx, 1.0) == pytest.approx(fd, abs=1e-9)


def test_beta_potential_trig_and_parity():
    tctx = EllipticContext.trigonometric()
    for r in (0.3, 1.7, 4.4):
        assert beta_potential(tctx, r) == 1.0 / 12.0
    ctx = EllipticContext.from_beta(3.0)
    assert beta_potential(ctx, 0.7) == beta_potential(ctx, -0.7)


def test_beta_potential_fd_beta_oracle():
    # c1 - d/dbeta log theta, the derivative taken across full contexts
    r, beta, h = 1.0, 2.0, 1e-4

    def logtheta(b):
        return math.log(theta(EllipticContext.from_beta(b), r))

    d1 = (logtheta(beta + h) - logtheta(beta - h)) / (2 * h)
    d2 = (logtheta(beta + h / 2) - logtheta(beta - h / 2)) / h
    fd = (4.0 * d2 - d1) / 3.0
    ctx = EllipticContext.from_beta(beta)
    assert beta_potential(ctx, r) == pytest.approx(1.0 / 12.0 - fd, abs=1e-8)


def test_singularity_guard():
    ctx = EllipticContext.from_beta(2.0)
    for fn in (pair_potential, log_dtheta, beta_potential):
        with pytest.raises(SingularityError):
            fn(ctx, 1e-8)
        with pytest.raises(SingularityError):
            fn(ctx, TWO_PI - 1e-8)
        with pytest.raises(SingularityError):
            fn(ctx, -TWO_PI + 1e-8)
    # theta itself is entire
    assert theta(ctx, 0.0) == 0.0


def test_functional_identities_sampled():
    rng = np.random.default_rng(42)
    for _ in range(40):
        beta = rng.uniform(1.5, 8.0)
        r = rng.uniform(0.2, TWO_PI - 0.2)
        ctx = EllipticContext.from_beta(beta)
        vv = pair_potential(ctx, r)
        # derivative of the log-derivative is minus the pair potential
        dphi = fd1_richardson(lambda x: log_dtheta(ctx, x), r)
        assert abs(dphi + vv) < 1e-9 * (1.0 + abs(vv))
        # square identity
        ph = log_dtheta(ctx, r)
        ff = beta_potential(ctx, r)
        assert abs(ph * ph - vv + 2.0 * ff + ctx.c0) < 1e-9 * (1.0 + abs(vv))


def test_three_point_identity_sampled():
    rng = np.random.default_rng(7)
    count = 0
    while count < 30:
        beta = rng.uniform(1.5, 8.0)
        x = rng.uniform(0.2, TWO_PI - 0.2)
        y = rng.uniform(0.2, TWO_PI - 0.2)
        z = -x - y
        if abs(math.remainder(z, TWO_PI)) < 0.2:
            continue
        ctx = EllipticContext.from_beta(beta)
        lhs = (
            log_dtheta(ctx, x) * log_dtheta(ctx, y)
            + log_dtheta(ctx, x) * log_dtheta(ctx, z)
            + log_dtheta(ctx, y) * log_dtheta(ctx, z)
        )
        rhs = beta_potential(ctx, x) + beta_potential(ctx, y) + beta_potential(ctx, z)
        assert abs(lhs - rhs) < 1e-9
        count += 1


def test_truncation_monotonicity():
    # squaring the tail target roughly doubles the term count; values must
    # move by less than the original target
    loose = EllipticContext.from_beta(2.0, TruncationPolicy(target_eps=1e-16))
    tight = EllipticContext.from_beta(2.0, TruncationPolicy(target_eps=1e-32))
    assert tight.n_series >= 2 * loose.n_series - 2
    for r in (0.5, 1.0, 2.8, 5.0):
        assert abs(theta(loose, r) - theta(tight, r)) < 1e-16
        assert abs(pair_potential(loose, r) - pair_potential(tight, r)) < 1e-16
        assert abs(log_dtheta(loose, r) - log_dtheta(tight, r)) < 1e-16
        assert abs(beta_potential(loose, r) - beta_potential(tight, r)) < 1e-16
    assert abs(loose.c0 - tight.c0) < 1e-16


def test_theta_annulus_trig_and_consistency():
    tctx = EllipticContext.trigonometric()
    assert theta_annulus(tctx, 0.5) == 0.5
    ctx = EllipticContext.from_q(math.exp(-1.2))  # beta = 2.4
    z = 0.6 * cmath.exp(0.9j)
    direct = theta_annulus(ctx, z)
    via_log = cmath.exp(log_theta_annulus(ctx, z))
    assert abs(direct - via_log) < 1e-14 * abs(direct)


def test_theta_annulus_factorization_on_circle():
    # theta(x) = (i/2) exp(-i x/2) theta_annulus(exp(i x)), |z| = 1 by continuity
    ctx = EllipticContext.from_beta(2.4)
    x = 1.1
    lhs = theta(ctx, x)
    rhs = 0.5j * cmath.exp(-0.5j * x) * theta_annulus(ctx, cmath.exp(1j * x), strict=False)
    assert abs(lhs - rhs) < 1e-13 * abs(lhs)


def test_theta_annulus_domain():
    ctx = EllipticContext.from_beta(2.0)
    q2 = ctx.q2
    with pytest.raises(DomainError):
        theta_annulus(ctx, q2 * 0.5)
    with pytest.raises(DomainError):
        theta_annulus(ctx, 1.2)
    with pytest.raises(DomainError):
        theta_annulus(ctx, 1.0 + 0.0j, strict=True)  # |z| = 1 needs strict=False
    assert theta_annulus(ctx, cmath.exp(0.4j), strict=False) != 0
    with pytest.raises(DomainError):
        log_theta_annulus(ctx, 1.0 + 0.0j, strict=False)  # zero of the product


def test_trig_limit_exact():
    tctx = EllipticContext.trigonometric()
    rng = np.random.default_rng(1)
    for _ in range(50):
        r = rng.uniform(0.2, TWO_PI - 0.2)
        s = math.sin(r / 2.0)
        assert theta(tctx, r) == s
        assert pair_potential(tctx, r) == 0.25 / (s * s)
        assert beta_potential(tctx, r) == 1.0 / 12.0
