"""Elliptic special functions on the torus with periods 2*pi and i*beta.

Everything is built from the nome q = exp(-beta/2).  The central objects:

    theta(r)           odd theta-type product  sin(r/2) * prod_m (1 - 2 q^{2m} cos r + q^{4m})
    pair_potential(r)  lattice sum  sum_{m in Z} 1 / (4 sin^2[(r + i beta m)/2])
                       (a Weierstrass-type pair potential, shifted so that the
                       trigonometric limit beta -> infinity is 1/(4 sin^2(r/2)))
    log_dtheta(r)      d/dr log theta
    beta_potential(r)  c1 - d/dbeta log theta, the potential-like function that
                       enters every beta-derivative identity
    ctx.c0             c1 - sum_{m>=1} 1/(2 sinh^2(beta m / 2)),  c1 = 1/12

plus the multiplicative theta variant on the annulus q^2 < |z| < 1,

    theta_annulus(z)   (1 - z) * prod_m (1 - q^{2m} z)(1 - q^{2m}/z)

used for contour-integral coefficient extraction.  All q-series and lattice
sums are truncated under an explicit tail bound (TruncationPolicy); the
trigonometric limit q = 0 is an exact closed-form branch, never a numerical
limit.  Evaluation closer than delta_sing to a lattice point r = 0 (mod 2*pi)
raises SingularityError rather than returning a huge number.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError, TruncationError

TWO_PI = 2.0 * math.pi
C1 = 1.0 / 12.0

# sinh(x)**2 overflows past ~710; terms are < 1e-300 long before that
_EXP_CUTOFF = 350.0


@dataclass(frozen=True)
class TruncationPolicy:
    """How many series/product terms to keep: smallest M with q^(2M) < target_eps,
    capped at max_terms (cap hit -> TruncationError)."""

    target_eps: float = 1e-16
    max_terms: int = 256

    def __post_init__(self):
        if not (self.target_eps > 0.0):
            raise ValueError("target_eps must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")

    def n_terms(self, q: float) -> int:
        """Number of q-series terms needed for a tail below target_eps."""
        if q == 0.0:
            return 0
        n = max(1, int(math.log(self.target_eps) / (2.0 * math.log(q))))
        while q ** (2 * n) >= self.target_eps:
            n += 1
            if n > self.max_terms:
                raise TruncationError(
                    f"q={q!r}: {self.max_terms} terms cannot reach tail bound "
                    f"{self.target_eps!r}"
                )
        if n > self.max_terms:
            raise TruncationError(
                f"q={q!r}: need {n} terms for tail bound {self.target_eps!r}, "
                f"cap is {self.max_terms}"
            )
        return n

    def n_terms_weighted(self, q: float) -> int:
        """Term count for m-weighted series (terms ~ 2 m q^{2m}, as in the
        beta-differentiated product): the plain rule plus however many more
        terms the weight costs."""
        if q == 0.0:
            return 0
        n = self.n_terms(q)
        bound = self.target_eps * (1.0 - q * q)
        while 2.0 * n * q ** (2 * n) >= bound:
            n += 1
            if n > self.max_terms:
                raise TruncationError(
                    f"q={q!r}: {self.max_terms} terms cannot reach weighted "
                    f"tail bound {self.target_eps!r}"
                )
        return n


def _c0_sum(beta: float, eps: float, max_terms: int) -> float:
    """sum_{m>=1} 1/(2 sinh^2(beta m/2)) with geometric tail bound below eps.

    Terms satisfy t_{m+1} <= q^2 t_m (q^2 = e^-beta), so once a term drops
    under eps*(1 - q^2) the remaining tail is below eps.
    """
    q2 = math.exp(-beta)
    stop = eps * (1.0 - q2)
    total = 0.0
    for m in range(1, max_terms + 1):
        x = 0.5 * beta * m
        if x > _EXP_CUTOFF:
            return total
        t = 0.5 / math.sinh(x) ** 2
        total += t
        if t < stop:
            return total
    raise TruncationError(
        f"c0 series at beta={beta!r}: cap {max_terms} hit before tail < {eps!r}"
    )


@dataclass(frozen=True)
class EllipticContext:
    """Immutable evaluation environment: fixed beta (nome q = exp(-beta/2)),
    truncation policy, and the cached constants c0, c1.

    q = 0 (beta = inf) denotes the trigonometric limit and selects exact
    sin/cot closed forms throughout.  Construct via from_beta / from_q /
    trigonometric; instances are freely shareable across workers.
    """

    beta: float
    q: float
    trunc: TruncationPolicy
    c0: float
    c1: float = C1
    delta_sing: float = 1e-6
    n_series: int = field(default=0, repr=False)
    n_series_beta: int = field(default=0, repr=False)

    @classmethod
    def from_beta(
        cls,
        beta: float,
        trunc: TruncationPolicy | None = None,
        delta_sing: float = 1e-6,
    ) -> "EllipticContext":
        if not beta > 0.0:
            raise DomainError(f"beta must be positive (got {beta!r})")
        trunc = trunc or TruncationPolicy()
        q = math.exp(-0.5 * beta)  # == 0.0 for beta = inf
        if q == 0.0:
            return cls(beta=beta, q=0.0, trunc=trunc, c0=C1, delta_sing=delta_sing)
        c0 = C1 - _c0_sum(beta, trunc.target_eps, trunc.max_terms)
        return cls(
            beta=beta,
            q=q,
            trunc=trunc,
            c0=c0,
            delta_sing=delta_sing,
            n_series=trunc.n_terms(q),
            n_series_beta=trunc.n_terms_weighted(q),
        )

    @classmethod
    def from_q(
        cls,
        q: float,
        trunc: TruncationPolicy | None = None,
        delta_sing: float = 1e-6,
    ) -> "EllipticContext":
        if not 0.0 <= q < 1.0:
            raise DomainError(f"nome must lie in [0, 1) (got {q!r})")
        if q == 0.0:
            return cls.trigonometric(trunc=trunc, delta_sing=delta_sing)
        # re-canonicalize so the stored pair satisfies q == exp(-beta/2) bitwise
        return cls.from_beta(-2.0 * math.log(q), trunc=trunc, delta_sing=delta_sing)

    @classmethod
    def trigonometric(
        cls,
        trunc: TruncationPolicy | None = None,
        delta_sing: float = 1e-6,
    ) -> "EllipticContext":
        """The q = 0 limit (beta = inf): plain trigonometric functions."""
        return cls(
            beta=math.inf,
            q=0.0,
            trunc=trunc or TruncationPolicy(),
            c0=C1,
            delta_sing=delta_sing,
        )

    @property
    def q2(self) -> float:
        return self.q * self.q

    def annulus_bounds(self) -> tuple[float, float]:
        """(inner, outer) moduli of the analyticity annulus of theta_annulus."""
        return (self.q2, 1.0)


def _check_regular(ctx: EllipticContext, r: float) -> None:
    if abs(math.remainder(r, TWO_PI)) < ctx.delta_sing:
        raise SingularityError(
            f"r={r!r} is within {ctx.delta_sing!r} of a lattice point (0 mod 2*pi)"
        )


def theta(ctx: EllipticContext, r: float) -> float:
    """Odd theta-type product; entire in r, positive on (0, 2*pi), zero at 0."""
    val = math.sin(0.5 * r)
    if ctx.q == 0.0:
        return val
    c2 = 2.0 * math.cos(r)
    q2 = ctx.q2
    q2m = 1.0
    for _ in range(ctx.n_series):
        q2m *= q2
        val *= 1.0 - q2m * (c2 - q2m)
    return val


def log_dtheta(ctx: EllipticContext, r: float) -> float:
    """d/dr log theta(r): (1/2)cot(r/2) plus the term-wise differentiated q-series."""
    _check_regular(ctx, r)
    half = 0.5 * r
    val = 0.5 * math.cos(half) / math.sin(half)
    if ctx.q == 0.0:
        return val
    s = math.sin(r)
    c2 = 2.0 * math.cos(r)
    q2 = ctx.q2
    q2m = 1.0
    for _ in range(ctx.n_series):
        q2m *= q2
        val += 2.0 * q2m * s / (1.0 - q2m * (c2 - q2m))
    return val


def pair_potential(ctx: EllipticContext, r: float) -> float:
    """Lattice sum sum_m 1/(4 sin^2[(r + i beta m)/2]), +-m terms paired.

    The paired term magnitudes decay like 4 e^{-beta m}; summation stops once
    a pair drops under target_eps*(1 - q^2), bounding the tail by target_eps.
    """
    _check_regular(ctx, r)
    s = math.sin(0.5 * r)
    val = 0.25 / (s * s)
    if ctx.q == 0.0:
        return val
    eps = ctx.trunc.target_eps
    stop = eps * (1.0 - ctx.q2)
    for m in range(1, ctx.trunc.max_terms + 1):
        if 0.5 * ctx.beta * m > _EXP_CUTOFF:
            return val
        w = cmath.sin(complex(0.5 * r, 0.5 * ctx.beta * m))
        pair = 2.0 * (0.25 / (w * w)).real
        val += pair
        if abs(pair) < stop:
            return val
    raise TruncationError(
        f"pair_potential at beta={ctx.beta!r}, r={r!r}: cap {ctx.trunc.max_terms} "
        f"hit before tail < {eps!r}"
    )


def beta_potential(ctx: EllipticContext, r: float) -> float:
    """c1 - d/dbeta log theta(r), via exact term-wise q-series differentiation
    (d/dbeta q^{2m} = -m q^{2m}).  Identically c1 in the trigonometric limit."""
    _check_regular(ctx, r)
    if ctx.q == 0.0:
        return ctx.c1
    c = math.cos(r)
    c2 = 2.0 * c
    q2 = ctx.q2
    q2m = 1.0
    val = ctx.c1
    for m in range(1, ctx.n_series_beta + 1):
        q2m *= q2
        val += 2.0 * m * q2m * (q2m - c) / (1.0 - q2m * (c2 - q2m))
    return val


def _check_annulus(ctx: EllipticContext, z: np.ndarray, strict: bool) -> None:
    mod = np.abs(z)
    lo, hi = ctx.annulus_bounds()
    # non-strict mode admits |z| = 1 (continuity extension for unit-circle tests)
    hi_ok = mod < hi if strict else mod <= hi * (1.0 + 1e-12)
    if not (np.all(mod > lo) and np.all(hi_ok)):
        raise DomainError(
            f"|z| in [{mod.min():.6g}, {mod.max():.6g}] outside annulus "
            f"({lo:.6g}, {hi:.6g})" + ("" if strict else " (relaxed)")
        )
    if np.any(z == 1.0):
        raise DomainError("theta_annulus vanishes at z = 1")


def theta_annulus(ctx: EllipticContext, z, strict: bool = True):
    """(1-z) * prod_m (1 - q^{2m} z)(1 - q^{2m}/z) on q^2 < |z| < 1.

    Accepts a complex scalar or ndarray.  strict=False relaxes the outer bound
    to |z| <= 1 (the product extends there by continuity).
    """
    zz = np.asarray(z, dtype=complex)
    _check_annulus(ctx, zz, strict)
    val = 1.0 - zz
    q2 = ctx.q2
    q2m = 1.0
    for _ in range(ctx.n_series):
        q2m *= q2
        val = val * (1.0 - q2m * zz) * (1.0 - q2m / zz)
    return complex(val) if np.isscalar(z) or np.ndim(z) == 0 else val


def log_theta_annulus(ctx: EllipticContext, z, strict: bool = True):
    """log of theta_annulus as a sum of per-factor principal logarithms.

    Each subtracted term (z, q^{2m} z, q^{2m}/z) has modulus < 1 on the
    annulus, so every factor lies in the right half-plane and the per-factor
    principal log is analytic; no winding bookkeeping is needed.
    exp(log_theta_annulus(z)) == theta_annulus(z) to roundoff.
    """
    zz = np.asarray(z, dtype=complex)
    _check_annulus(ctx, zz, strict)
    val = np.log(1.0 - zz)
    q2 = ctx.q2
    q2m = 1.0
    for _ in range(ctx.n_series):
        q2m *= q2
        val = val + np.log(1.0 - q2m * zz) + np.log(1.0 - q2m / zz)
    return complex(val) if np.isscalar(z) or np.ndim(z) == 0 else val
