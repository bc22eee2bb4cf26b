"""Product wavefunctions and their exact log-derivative data.

A ProductState is a constant times a plane wave times a product of theta
factors theta(X_a - X_b)^p with complex exponents p.  The three model
families built here:

    build_phi0(mass_model)      prod_{J<K} theta(X_J - X_K)^(lam m_J m_K)
    build_psi0(N, Nt, lam)      two-species ground state: exponents lam within
                                the first group, 1/lam within the second, -1
                                across
    build_kernel_F(deformed)    two psi0 blocks times cross factors with
                                exponents -lam, -1/lam, +1, +1

Real powers of theta are well defined because evaluation is restricted to
globally ordered configurations in (0, 2*pi), where every factor difference
lies in (0, 2*pi) and theta > 0.  States are immutable; evaluation is pure.

The module also hosts the contour-integral machinery: Laurent coefficients of
the annulus product  prod_j theta_annulus(z_j/xi)^(-lam) * prod_J
theta_annulus(zt_J/xi)  extracted by the trapezoidal rule on a circle
|xi| = R inside the annulus 1 < R < 1/q^2 (spectrally convergent in the node
count).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .elliptic import (
    TWO_PI,
    EllipticContext,
    beta_potential,
    log_dtheta,
    log_theta_annulus,
    pair_potential,
    theta,
)
from .errors import ConstraintError, DomainError, QuadratureError, SingularityError

ROLE_X = "x"
ROLE_XT = "xt"
ROLE_Y = "y"
ROLE_YT = "yt"
ROLE_MASS = "m"

LEFT_ROLES = (ROLE_X, ROLE_XT)
RIGHT_ROLES = (ROLE_Y, ROLE_YT)


def _as_complex(value) -> complex:
    return complex(value)


@dataclass(frozen=True)
class MassModel:
    """Particle count, coupling and masses for the many-body operator; derived
    power sums and pair couplings gamma_JK = lam (m_J + m_K)(lam m_J m_K - 1)."""

    lam: complex
    masses: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_complex(self.lam))
        object.__setattr__(self, "masses", tuple(_as_complex(m) for m in self.masses))
        if self.lam == 0:
            raise ConstraintError("coupling lam must be non-zero")
        if len(self.masses) < 1:
            raise ConstraintError("at least one mass required")
        if any(m == 0 for m in self.masses):
            raise ConstraintError("all masses must be non-zero")

    @property
    def calN(self) -> int:
        return len(self.masses)

    def power_sum(self, n: int) -> complex:
        return sum(m**n for m in self.masses)

    def gamma(self, J: int, K: int) -> complex:
        mJ, mK = self.masses[J], self.masses[K]
        return self.lam * (mJ + mK) * (self.lam * mJ * mK - 1.0)

    @property
    def beta_term_coefficient(self) -> complex:
        """Coefficient of the beta-derivative in the source identity: 2 lam |m|."""
        return 2.0 * self.lam * self.power_sum(1)


@dataclass(frozen=True)
class DeformedModel:
    """Group sizes (N, Ntilde, M, Mtilde) and coupling for the two-species
    deformed operators acting on the left (x, xt) and right (y, yt) groups."""

    N: int
    Ntilde: int
    M: int = 0
    Mtilde: int = 0
    lam: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_complex(self.lam))
        for name in ("N", "Ntilde", "M", "Mtilde"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ConstraintError(f"{name} must be a non-negative integer")
        if self.lam == 0:
            raise ConstraintError("coupling lam must be non-zero")

    @property
    def balanced(self) -> bool:
        """True iff (N - M) lam == Ntilde - Mtilde, killing the beta-derivative
        term so the kernel identity closes without it."""
        lhs = (self.N - self.M) * self.lam
        rhs = complex(self.Ntilde - self.Mtilde)
        tol = 4.0 * 2.22e-16 * (abs(lhs) + abs(rhs) + 1.0)
        return abs(lhs - rhs) <= tol

    @property
    def beta_term_coefficient(self) -> complex:
        """2[(N - M) lam - Ntilde + Mtilde]; exactly zero for balanced models."""
        if self.balanced:
            return 0.0 + 0.0j
        return 2.0 * ((self.N - self.M) * self.lam - self.Ntilde + self.Mtilde)

    def group_sizes(self) -> tuple[int, int, int, int]:
        return (self.N, self.Ntilde, self.M, self.Mtilde)

    def mass_model(self) -> MassModel:
        """Embedding into the many-body operator: masses 1, -1/lam, -1, 1/lam
        on the four groups make it the difference of left and right operators."""
        lam = self.lam
        masses = (
            (1.0,) * self.N
            + (-1.0 / lam,) * self.Ntilde
            + (-1.0,) * self.M
            + (1.0 / lam,) * self.Mtilde
        )
        if not masses:
            raise ConstraintError("embedding needs at least one coordinate")
        return MassModel(lam=lam, masses=masses)


@dataclass(frozen=True)
class Configuration:
    """Strictly descending coordinates in (0, 2*pi) with pairwise separation
    >= min_sep, so every ordered difference X_a - X_b (a before b) lies in
    (0, 2*pi) and theta powers are well defined."""

    coords: tuple[float, ...]
    min_sep: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(x) for x in self.coords))
        if self.min_sep <= 0.0:
            raise DomainError("min_sep must be positive")
        for x in self.coords:
            if not 0.0 < x < TWO_PI:
                raise DomainError(f"coordinate {x!r} outside (0, 2*pi)")
        for a, b in zip(self.coords, self.coords[1:]):
            if a <= b:
                raise DomainError("coordinates must be strictly descending")
            if a - b < self.min_sep:
                raise SingularityError(
                    f"adjacent coordinates closer than min_sep={self.min_sep!r}"
                )

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class PairFactor:
    """theta(X_a - X_b)^power with a < b in the flat coordinate order."""

    a: int
    b: int
    power: complex


@dataclass(frozen=True)
class CoordinateRole:
    tag: str
    mass: complex


@dataclass(frozen=True)
class ProductState:
    """prefactor * exp(i k . X) * prod theta(X_a - X_b)^p, with exact value,
    per-coordinate log-derivative, and log-beta-derivative evaluation."""

    prefactor: complex
    pair_factors: tuple[PairFactor, ...]
    momentum: tuple[complex, ...]
    roles: tuple[CoordinateRole, ...]

    @property
    def n_coords(self) -> int:
        return len(self.roles)

    def indices_with_tag(self, tag: str) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r.tag == tag)

    def _diff(self, cfg: Configuration, fac: PairFactor) -> float:
        d = cfg.coords[fac.a] - cfg.coords[fac.b]
        if not 0.0 < d < TWO_PI:
            raise DomainError(
                f"ordering violated: X[{fac.a}] - X[{fac.b}] = {d!r} not in (0, 2*pi)"
            )
        if min(d, TWO_PI - d) < cfg.min_sep:
            raise SingularityError(
                f"pair ({fac.a}, {fac.b}) closer than min_sep={cfg.min_sep!r}"
            )
        return d

    def _check(self, cfg: Configuration) -> None:
        if len(cfg) != self.n_coords:
            raise DomainError(
                f"configuration has {len(cfg)} coordinates, state needs {self.n_coords}"
            )

    def eval(self, ctx: EllipticContext, cfg: Configuration) -> complex:
        """Value via exp(sum p log theta + i k . X); theta > 0 on every factor."""
        self._check(cfg)
        s = 0.0 + 0.0j
        for fac in self.pair_factors:
            s += fac.power * math.log(theta(ctx, self._diff(cfg, fac)))
        for k, x in zip(self.momentum, cfg.coords):
            s += 1j * k * x
        return self.prefactor * cmath.exp(s)

    def log_grad(self, ctx: EllipticContext, cfg: Configuration, J: int) -> complex:
        """d/dX_J log of the state: i k_J plus signed p * (log theta)' terms."""
        self._check(cfg)
        g = 1j * self.momentum[J]
        for fac in self.pair_factors:
            if fac.a == J:
                g += fac.power * log_dtheta(ctx, self._diff(cfg, fac))
            elif fac.b == J:
                g -= fac.power * log_dtheta(ctx, self._diff(cfg, fac))
        return g

    def log_grad2(self, ctx: EllipticContext, cfg: Configuration, J: int) -> complex:
        """d^2/dX_J^2 log of the state: -sum over factors touching J of
        p * pair_potential (second log-derivative of theta is -pair_potential)."""
        self._check(cfg)
        g2 = 0.0 + 0.0j
        for fac in self.pair_factors:
            if J in (fac.a, fac.b):
                g2 -= fac.power * pair_potential(ctx, self._diff(cfg, fac))
        return g2

    def log_beta_deriv(self, ctx: EllipticContext, cfg: Configuration) -> complex:
        """d/dbeta log of the state: sum p (c1 - beta_potential) over factors."""
        self._check(cfg)
        s = 0.0 + 0.0j
        for fac in self.pair_factors:
            s += fac.power * (ctx.c1 - beta_potential(ctx, self._diff(cfg, fac)))
        return s


def _pair_block(
    offset_a: int, size_a: int, offset_b: int, size_b: int, power: complex
) -> list[PairFactor]:
    """All cross pairs between two groups (or within one when they coincide)."""
    facs = []
    if offset_a == offset_b:
        for i in range(size_a):
            for j in range(i + 1, size_a):
                facs.append(PairFactor(offset_a + i, offset_a + j, power))
    else:
        for i in range(size_a):
            for j in range(size_b):
                facs.append(PairFactor(offset_a + i, offset_b + j, power))
    return facs


def build_phi0(model: MassModel) -> ProductState:
    """Ground-state product for the many-body operator: exponents lam m_J m_K."""
    facs = [
        PairFactor(J, K, model.lam * model.masses[J] * model.masses[K])
        for J in range(model.calN)
        for K in range(J + 1, model.calN)
    ]
    roles = tuple(CoordinateRole(ROLE_MASS, m) for m in model.masses)
    return ProductState(
        prefactor=1.0 + 0.0j,
        pair_factors=tuple(facs),
        momentum=(0.0 + 0.0j,) * model.calN,
        roles=roles,
    )


def build_psi0(N: int, Ntilde: int, lam: complex) -> ProductState:
    """Two-species ground state on groups (x, xt)."""
    lam = _as_complex(lam)
    if lam == 0:
        raise ConstraintError("coupling lam must be non-zero")
    if N < 0 or Ntilde < 0 or N + Ntilde < 1:
        raise ConstraintError("need N + Ntilde >= 1 non-negative group sizes")
    facs = (
        _pair_block(0, N, 0, N, lam)
        + _pair_block(N, Ntilde, N, Ntilde, 1.0 / lam)
        + _pair_block(0, N, N, Ntilde, -1.0 + 0.0j)
    )
    roles = tuple(CoordinateRole(ROLE_X, 1.0) for _ in range(N)) + tuple(
        CoordinateRole(ROLE_XT, -1.0 / lam) for _ in range(Ntilde)
    )
    return ProductState(
        prefactor=1.0 + 0.0j,
        pair_factors=tuple(facs),
        momentum=(0.0 + 0.0j,) * (N + Ntilde),
        roles=roles,
    )


def build_kernel_F(model: DeformedModel) -> ProductState:
    """Kernel-function candidate: psi0(x, xt) * psi0(y, yt) times cross factors
    theta(x - y)^-lam, theta(xt - yt)^(-1/lam), theta(x - yt), theta(xt - y)."""
    N, Nt, M, Mt = model.group_sizes()
    if N + Nt < 1:
        raise ConstraintError("left block needs N + Ntilde >= 1")
    lam = model.lam
    oX, oXT, oY, oYT = 0, N, N + Nt, N + Nt + M
    facs = (
        _pair_block(oX, N, oX, N, lam)
        + _pair_block(oXT, Nt, oXT, Nt, 1.0 / lam)
        + _pair_block(oX, N, oXT, Nt, -1.0 + 0.0j)
        + _pair_block(oY, M, oY, M, lam)
        + _pair_block(oYT, Mt, oYT, Mt, 1.0 / lam)
        + _pair_block(oY, M, oYT, Mt, -1.0 + 0.0j)
        + _pair_block(oX, N, oY, M, -lam)
        + _pair_block(oXT, Nt, oYT, Mt, -1.0 / lam)
        + _pair_block(oX, N, oYT, Mt, 1.0 + 0.0j)
        + _pair_block(oXT, Nt, oY, M, 1.0 + 0.0j)
    )
    roles = (
        tuple(CoordinateRole(ROLE_X, 1.0) for _ in range(N))
        + tuple(CoordinateRole(ROLE_XT, -1.0 / lam) for _ in range(Nt))
        + tuple(CoordinateRole(ROLE_Y, -1.0) for _ in range(M))
        + tuple(CoordinateRole(ROLE_YT, 1.0 / lam) for _ in range(Mt))
    )
    return ProductState(
        prefactor=1.0 + 0.0j,
        pair_factors=tuple(facs),
        momentum=(0.0 + 0.0j,) * len(roles),
        roles=roles,
    )


def dress_plane_wave(state: ProductState, v: float, c: complex) -> ProductState:
    """Multiply by c * exp(i v sum_J m_J X_J) (masses read from the coordinate
    roles); shifts every log-gradient by exactly i v m_J."""
    c = _as_complex(c)
    if c == 0:
        raise ConstraintError("dressing constant c must be non-zero")
    momentum = tuple(k + v * r.mass for k, r in zip(state.momentum, state.roles))
    return replace(state, prefactor=state.prefactor * c, momentum=momentum)


@dataclass(frozen=True)
class QuadratureSpec:
    """Trapezoidal contour rule: node count, circle radius (None selects the
    geometric mean of the annulus bounds), and an optional node-doubling
    convergence check."""

    nodes: int = 256
    radius: float | None = None
    check: bool = False
    check_tol: float = 1e-10

    def resolve_radius(self, ctx: EllipticContext) -> float:
        if self.radius is not None:
            return self.radius
        if ctx.q == 0.0:
            return 2.0
        return 1.0 / ctx.q  # sqrt(1 * 1/q^2)


def annulus_integrand(
    ctx: EllipticContext,
    lam: complex,
    z: Sequence[complex],
    zt: Sequence[complex],
    xi: complex,
    strict: bool = True,
) -> complex:
    """prod_j theta_annulus(z_j/xi)^(-lam) * prod_J theta_annulus(zt_J/xi),
    powers taken through the analytic per-factor log."""
    s = 0.0 + 0.0j
    for zj in np.asarray(z, dtype=complex):
        s -= lam * log_theta_annulus(ctx, zj / xi, strict=strict)
    for zJ in np.asarray(zt, dtype=complex):
        s += log_theta_annulus(ctx, zJ / xi, strict=strict)
    return cmath.exp(s)


def _check_unit_circle(z: np.ndarray, what: str) -> None:
    if z.size and np.max(np.abs(np.abs(z) - 1.0)) > 1e-9:
        raise DomainError(f"{what} must lie on the unit circle")


def pn_coefficients(
    ctx: EllipticContext,
    N: int,
    Ntilde: int,
    lam: complex,
    z: Sequence[complex],
    zt: Sequence[complex],
    n_values: Iterable[int],
    quad: QuadratureSpec | None = None,
) -> dict[int, complex]:
    """Laurent coefficients P_n of the annulus product integrand.

    P_n = (1/K) sum_k xi_k^n * integrand(xi_k) on xi_k = R exp(2 pi i k / K),
    1 < R < 1/q^2; the trapezoidal rule is spectrally convergent in K.  With
    quad.check, the K and 2K results must agree to check_tol (relative to the
    coefficient scale) and the finer result is returned.
    """
    quad = quad or QuadratureSpec()
    z = np.asarray(z, dtype=complex)
    zt = np.asarray(zt, dtype=complex)
    if len(z) != N or len(zt) != Ntilde:
        raise ConstraintError("z / zt lengths must match N / Ntilde")
    _check_unit_circle(z, "z")
    _check_unit_circle(zt, "zt")
    ns = list(n_values)
    if quad.nodes < 16:
        raise QuadratureError(f"need at least 16 quadrature nodes (got {quad.nodes})")
    R = quad.resolve_radius(ctx)
    lo, hi = 1.0, math.inf if ctx.q == 0.0 else 1.0 / ctx.q2
    if not lo < R < hi:
        raise QuadratureError(f"contour radius {R!r} outside annulus ({lo}, {hi})")

    def compute(K: int) -> dict[int, complex]:
        xi = R * np.exp(2j * np.pi * np.arange(K) / K)
        s = np.zeros(K, dtype=complex)
        for zj in z:
            s -= lam * log_theta_annulus(ctx, zj / xi)
        for zJ in zt:
            s += log_theta_annulus(ctx, zJ / xi)
        w = np.exp(s)
        return {n: complex(np.mean(xi**n * w)) for n in ns}

    result = compute(quad.nodes)
    if quad.check:
        finer = compute(2 * quad.nodes)
        scale = max(1.0, max(abs(v) for v in finer.values()))
        worst = max(abs(result[n] - finer[n]) for n in ns)
        if worst > quad.check_tol * scale:
            raise QuadratureError(
                f"{quad.nodes} nodes not converged: doubling moved a coefficient "
                f"by {worst:.3e} (tol {quad.check_tol * scale:.3e})"
            )
        return finer
    return result


def reconstruct_annulus_product(
    ctx: EllipticContext, coefficients: Mapping[int, complex], xi: complex
) -> complex:
    """Partial Laurent sum sum_n xi^-n P_n; converges to annulus_integrand(xi)
    as the coefficient range grows."""
    lo, hi = 1.0, math.inf if ctx.q == 0.0 else 1.0 / ctx.q2
    if not lo < abs(xi) < hi:
        raise DomainError(f"|xi| = {abs(xi)!r} outside annulus ({lo}, {hi})")
    return sum(coefficients[n] * xi ** (-n) for n in sorted(coefficients))


def coords_to_circle(cfg_coords: Sequence[float]) -> np.ndarray:
    """Map angles to unit-circle points exp(i x)."""
    return np.exp(1j * np.asarray(cfg_coords, dtype=float))
