"""Apply the many-body and deformed two-species operators to states.

Two deliberately independent backends:

    analytic   exact logarithmic derivatives of ProductStates, built from the
               closed forms log_dtheta, pair_potential and beta_potential
               (second log-derivative of a theta factor is minus the pair
               potential).  This is the precision path.
    fd         central-difference stencils (order 2/4/6, optional Richardson
               extrapolation) applied to plain state evaluation.  It touches
               no derivative formula at all, which is what makes it an
               independent check; beta-derivatives rebuild the elliptic
               context at beta +- h.

Both backends report the local ratio (O Psi)/Psi at a configuration along
with a scale 1 + max single |term|, so residuals of cancellation-heavy
identities can be judged relative to the size of what cancelled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .elliptic import EllipticContext, beta_potential, log_dtheta, pair_potential
from .errors import ConstraintError, DomainError
from .states import (
    LEFT_ROLES,
    RIGHT_ROLES,
    Configuration,
    DeformedModel,
    MassModel,
    ProductState,
)

_EPS = 2.220446049250313e-16

# central-difference weights for the second derivative, by accuracy order
_D2_STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    4: ((-2, -1, 0, 1, 2), (-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0)),
    6: (
        (-3, -2, -1, 0, 1, 2, 3),
        (1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0),
    ),
}


@dataclass(frozen=True)
class StencilSpec:
    """Finite-difference policy: central order in {2, 4, 6}, step h, number of
    Richardson halving levels, and the step used for beta-derivatives."""

    order: int = 4
    h: float = 1e-3
    richardson_levels: int = 1
    h_beta: float = 1e-3

    def __post_init__(self):
        if self.order not in _D2_STENCILS:
            raise ConstraintError(f"stencil order must be one of {sorted(_D2_STENCILS)}")
        if self.h <= 0.0 or self.h_beta <= 0.0:
            raise ConstraintError("stencil steps must be positive")
        if not 0 <= self.richardson_levels <= 4:
            raise ConstraintError("richardson_levels must be in [0, 4]")

    @property
    def extent(self) -> float:
        """Largest coordinate offset the stencil reaches."""
        return max(abs(o) for o in _D2_STENCILS[self.order][0]) * self.h

    def check_step(self, min_sep: float) -> None:
        if self.h > min_sep / 10.0:
            raise ConstraintError(
                f"stencil step h={self.h!r} exceeds min_sep/10 = {min_sep / 10.0!r}"
            )


@dataclass(frozen=True)
class OperatorApplication:
    """Local ratio (O Psi)/Psi at one configuration.

    scale = 1 + largest single |contribution| (kinetic term, potential term),
    the normalization used for relative residuals.  err_estimate is the
    finite-difference accuracy heuristic (None on the analytic backend).
    """

    value: complex
    scale: float
    backend: str
    err_estimate: float | None = None

    @property
    def max_term(self) -> float:
        return self.scale - 1.0


def _richardson(values: Sequence[complex], order: int) -> tuple[complex, float]:
    """Extrapolate values computed at steps h, h/2, ... (error series in even
    powers starting at h^order).  Returns (best, |best - second_best|)."""
    col = list(values)
    if len(col) == 1:
        return col[0], 0.0
    k = 0
    prev = col[-1]
    while len(col) > 1:
        fac = 2.0 ** (order + 2 * k)
        col = [(fac * col[i + 1] - col[i]) / (fac - 1.0) for i in range(len(col) - 1)]
        k += 1
        if len(col) > 1:
            prev = col[-1]
    return col[0], abs(col[0] - prev)


def fd_second_ratio(
    fn: Callable[[tuple[float, ...]], complex],
    cfg: Configuration,
    index: int,
    spec: StencilSpec,
    center: complex,
) -> tuple[complex, float]:
    """(d^2_index fn)/fn at cfg by central differences on plain evaluations.

    Stencil values are normalized by the center value before differencing to
    keep the combination well conditioned.  Returns (ratio, error estimate).
    """
    spec.check_step(cfg.min_sep)
    offsets, weights = _D2_STENCILS[spec.order]
    levels = []
    max_ratio = 1.0
    h_fin = spec.h
    for level in range(spec.richardson_levels + 1):
        h = spec.h / (2.0**level)
        h_fin = h
        # weights sum to zero, so differencing (f/center - 1) instead of
        # f/center removes the constant mode exactly and cuts cancellation
        acc = 0.0 + 0.0j
        for o, w in zip(offsets, weights):
            if o == 0:
                continue
            coords = list(cfg.coords)
            coords[index] += o * h
            val = fn(tuple(coords)) / center
            max_ratio = max(max_ratio, abs(val))
            acc += w * (val - 1.0)
        levels.append(acc / (h * h))
    best, trunc_est = _richardson(levels, spec.order)
    roundoff = _EPS * max_ratio * sum(abs(w) for w in weights) / (h_fin * h_fin)
    return best, 4.0 * (trunc_est + roundoff)


def fd_beta_ratio(
    state: ProductState,
    ctx: EllipticContext,
    cfg: Configuration,
    spec: StencilSpec,
) -> tuple[complex, float]:
    """(d/dbeta Psi)/Psi by rebuilding the context at beta +- h (order-2
    central differences, Richardson extrapolated)."""
    if ctx.q == 0.0:
        raise DomainError("beta-derivative undefined in the trigonometric limit")
    center = state.eval(ctx, cfg)

    def diff(h: float) -> complex:
        up = EllipticContext.from_beta(ctx.beta + h, ctx.trunc, ctx.delta_sing)
        dn = EllipticContext.from_beta(ctx.beta - h, ctx.trunc, ctx.delta_sing)
        return (state.eval(up, cfg) - state.eval(dn, cfg)) / (2.0 * h * center)

    h_fin = spec.h_beta
    levels = []
    for level in range(spec.richardson_levels + 1):
        h_fin = spec.h_beta / (2.0**level)
        levels.append(diff(h_fin))
    best, trunc_est = _richardson(levels, 2)
    roundoff = _EPS / h_fin
    return best, 4.0 * (trunc_est + roundoff)


def beta_derivative(
    state: ProductState,
    ctx: EllipticContext,
    cfg: Configuration,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
) -> complex:
    """(d/dbeta Psi)/Psi; exact beta_potential series or FD across contexts."""
    if ctx.q == 0.0:
        raise DomainError("beta-derivative undefined in the trigonometric limit")
    if backend == "analytic":
        return state.log_beta_deriv(ctx, cfg)
    if backend == "fd":
        value, _ = fd_beta_ratio(state, ctx, cfg, stencil or StencilSpec())
        return value
    raise ConstraintError(f"unknown backend {backend!r}")


def stencil_min_sep(min_sep: float, spec: StencilSpec) -> float:
    """min_sep for stencil-shifted configurations: the original less twice the
    stencil reach (a pair may lose at most 2*extent of separation)."""
    return max(min_sep - 2.0 * spec.extent, 1e-9)


def _state_fn(
    state: ProductState, ctx: EllipticContext, cfg: Configuration, spec: StencilSpec
) -> Callable[[tuple[float, ...]], complex]:
    """Wrap state.eval for stencil use; shifted points get a correspondingly
    reduced min_sep so legitimate stencil evaluations are not rejected."""
    reduced = stencil_min_sep(cfg.min_sep, spec)

    def fn(coords: tuple[float, ...]) -> complex:
        return state.eval(ctx, Configuration(coords, min_sep=reduced))

    return fn


def _kinetic_ratios_analytic(
    state: ProductState, ctx: EllipticContext, cfg: Configuration, indices: Sequence[int]
) -> list[complex]:
    """(d^2_J Psi)/Psi = d^2_J log Psi + (d_J log Psi)^2 per coordinate."""
    out = []
    for J in indices:
        g = state.log_grad(ctx, cfg, J)
        out.append(state.log_grad2(ctx, cfg, J) + g * g)
    return out


def _kinetic_ratios_fd(
    fn: Callable[[tuple[float, ...]], complex],
    cfg: Configuration,
    indices: Sequence[int],
    spec: StencilSpec,
) -> tuple[list[complex], float]:
    center = fn(cfg.coords)
    if center == 0:
        raise DomainError("state vanishes at the configuration; FD ratio undefined")
    ratios, err = [], 0.0
    for J in indices:
        val, e = fd_second_ratio(fn, cfg, J, spec, center)
        ratios.append(val)
        err = max(err, e)
    return ratios, err


def apply_calH(
    model: MassModel,
    state: ProductState,
    ctx: EllipticContext,
    cfg: Configuration,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
) -> OperatorApplication:
    """Ratio (H Psi)/Psi for the many-body operator: kinetic terms
    -(1/m_J) d^2_J plus the pair potential sum gamma_JK * pair_potential."""
    if state.n_coords != model.calN:
        raise ConstraintError("state coordinate count does not match the model")
    indices = range(model.calN)
    err = None
    if backend == "analytic":
        ratios = _kinetic_ratios_analytic(state, ctx, cfg, indices)
    elif backend == "fd":
        spec = stencil or StencilSpec()
        ratios, err = _kinetic_ratios_fd(_state_fn(state, ctx, cfg, spec), cfg, indices, spec)
    else:
        raise ConstraintError(f"unknown backend {backend!r}")
    terms = [-r / model.masses[J] for J, r in zip(indices, ratios)]
    for J in range(model.calN):
        for K in range(J + 1, model.calN):
            d = cfg.coords[J] - cfg.coords[K]
            terms.append(model.gamma(J, K) * pair_potential(ctx, d))
    value = sum(terms)
    scale = 1.0 + max((abs(t) for t in terms), default=0.0)
    return OperatorApplication(value=value, scale=scale, backend=backend, err_estimate=err)


def _deformed_groups(
    model: DeformedModel, state_or_tags, side: str
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if side == "left":
        tags, sizes = LEFT_ROLES, (model.N, model.Ntilde)
    elif side == "right":
        tags, sizes = RIGHT_ROLES, (model.M, model.Mtilde)
    else:
        raise ConstraintError(f"side must be 'left' or 'right' (got {side!r})")
    main = state_or_tags.indices_with_tag(tags[0])
    tilde = state_or_tags.indices_with_tag(tags[1])
    if (len(main), len(tilde)) != sizes:
        raise ConstraintError(
            f"state groups {len(main)}/{len(tilde)} do not match model sizes {sizes}"
        )
    return main, tilde


def _deformed_potential_terms(
    lam: complex,
    main: Sequence[int],
    tilde: Sequence[int],
    ctx: EllipticContext,
    cfg: Configuration,
) -> list[complex]:
    terms = []
    for i, a in enumerate(main):
        for b in main[i + 1 :]:
            terms.append(2.0 * lam * (lam - 1.0) * pair_potential(ctx, cfg.coords[a] - cfg.coords[b]))
    for i, a in enumerate(tilde):
        for b in tilde[i + 1 :]:
            terms.append((2.0 * (lam - 1.0) / lam) * pair_potential(ctx, cfg.coords[a] - cfg.coords[b]))
    for a in main:
        for b in tilde:
            terms.append(2.0 * (1.0 - lam) * pair_potential(ctx, cfg.coords[a] - cfg.coords[b]))
    return terms


def _assemble_deformed(
    lam: complex,
    main_ratios: Sequence[complex],
    tilde_ratios: Sequence[complex],
    pot_terms: Sequence[complex],
    backend: str,
    err: float | None,
) -> OperatorApplication:
    terms = [-r for r in main_ratios] + [lam * r for r in tilde_ratios] + list(pot_terms)
    value = sum(terms)
    scale = 1.0 + max((abs(t) for t in terms), default=0.0)
    return OperatorApplication(value=value, scale=scale, backend=backend, err_estimate=err)


def apply_H_deformed(
    model: DeformedModel,
    side: str,
    state: ProductState,
    ctx: EllipticContext,
    cfg: Configuration,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
) -> OperatorApplication:
    """Ratio (H Psi)/Psi for the deformed operator on one side's groups:
    -sum d^2 on the main group, +lam sum d^2 on the tilde group, and the
    three potential blocks 2 lam(lam-1), 2(lam-1)/lam, 2(1-lam)."""
    main, tilde = _deformed_groups(model, state, side)
    err = None
    if backend == "analytic":
        main_ratios = _kinetic_ratios_analytic(state, ctx, cfg, main)
        tilde_ratios = _kinetic_ratios_analytic(state, ctx, cfg, tilde)
    elif backend == "fd":
        spec = stencil or StencilSpec()
        fn = _state_fn(state, ctx, cfg, spec)
        ratios, err = _kinetic_ratios_fd(fn, cfg, tuple(main) + tuple(tilde), spec)
        main_ratios, tilde_ratios = ratios[: len(main)], ratios[len(main) :]
    else:
        raise ConstraintError(f"unknown backend {backend!r}")
    pot = _deformed_potential_terms(model.lam, main, tilde, ctx, cfg)
    return _assemble_deformed(model.lam, main_ratios, tilde_ratios, pot, backend, err)


def apply_H_deformed_fn(
    model: DeformedModel,
    fn: Callable[[tuple[float, ...]], complex],
    groups: tuple[Sequence[int], Sequence[int]],
    ctx: EllipticContext,
    cfg: Configuration,
    stencil: StencilSpec | None = None,
) -> OperatorApplication:
    """FD-only deformed-operator application for an arbitrary evaluable
    function; groups gives the (main, tilde) coordinate index sets."""
    spec = stencil or StencilSpec()
    main, tilde = tuple(groups[0]), tuple(groups[1])
    if (len(main), len(tilde)) not in ((model.N, model.Ntilde), (model.M, model.Mtilde)):
        raise ConstraintError("group sizes do not match the model")
    ratios, err = _kinetic_ratios_fd(fn, cfg, main + tilde, spec)
    pot = _deformed_potential_terms(model.lam, main, tilde, ctx, cfg)
    return _assemble_deformed(
        model.lam, ratios[: len(main)], ratios[len(main) :], pot, "fd", err
    )


# ---------------------------------------------------------------------------
# Mass-weighted kinetic ratio sum_J (1/m_J)(d^2_J Phi0)/Phi0 in three
# algebraically equivalent groupings, used to cross-check the analytic
# backend's assembly term by term.


def kinetic_ratio_direct(
    model: MassModel, ctx: EllipticContext, cfg: Configuration
) -> complex:
    """Per-coordinate grouping: sum_J [ sum_{K != J} lam m_K (log theta)''
    + m_J ( sum_{K != J} lam m_K (log theta)' )^2 ]."""
    lam, masses = model.lam, model.masses
    total = 0.0 + 0.0j
    for J in range(model.calN):
        lin = 0.0 + 0.0j
        grad = 0.0 + 0.0j
        for K in range(model.calN):
            if K == J:
                continue
            d = cfg.coords[J] - cfg.coords[K]
            lin += -lam * masses[K] * pair_potential(ctx, d)
            grad += lam * masses[K] * log_dtheta(ctx, d)
        total += lin + masses[J] * grad * grad
    return total


def kinetic_ratio_split(
    model: MassModel, ctx: EllipticContext, cfg: Configuration
) -> tuple[complex, complex]:
    """(two_body, three_body) grouping of the same quantity."""
    lam, masses = model.lam, model.masses
    two = 0.0 + 0.0j
    for J in range(model.calN):
        for K in range(J + 1, model.calN):
            d = cfg.coords[J] - cfg.coords[K]
            ph = log_dtheta(ctx, d)
            two += lam * (masses[J] + masses[K]) * (-pair_potential(ctx, d)) + (
                lam**2 * masses[J] * masses[K] * (masses[J] + masses[K]) * ph * ph
            )
    three = 0.0 + 0.0j
    for J in range(model.calN):
        for K in range(J + 1, model.calN):
            for L in range(K + 1, model.calN):
                pJK = log_dtheta(ctx, cfg.coords[J] - cfg.coords[K])
                pJL = log_dtheta(ctx, cfg.coords[J] - cfg.coords[L])
                pKL = log_dtheta(ctx, cfg.coords[K] - cfg.coords[L])
                # factor 2: the squared gradient sums ordered pairs (K, L)
                three += (
                    2.0
                    * lam**2
                    * masses[J]
                    * masses[K]
                    * masses[L]
                    * (pJK * pJL - pKL * pJK + pJL * pKL)
                )
    return two, three


def kinetic_ratio_reduced(
    model: MassModel, ctx: EllipticContext, cfg: Configuration
) -> complex:
    """Fully reduced grouping: sum_{J<K} [ gamma_JK pair_potential
    - 2 lam^2 |m| m_J m_K beta_potential - lam^2 c0 m_J m_K (m_J + m_K) ]."""
    lam, masses = model.lam, model.masses
    msum = model.power_sum(1)
    total = 0.0 + 0.0j
    for J in range(model.calN):
        for K in range(J + 1, model.calN):
            d = cfg.coords[J] - cfg.coords[K]
            mm = masses[J] * masses[K]
            total += (
                model.gamma(J, K) * pair_potential(ctx, d)
                - 2.0 * lam**2 * msum * mm * beta_potential(ctx, d)
                - lam**2 * ctx.c0 * mm * (masses[J] + masses[K])
            )
    return total


def coupling_potential(
    model: MassModel, ctx: EllipticContext, cfg: Configuration
) -> complex:
    """sum_{J<K} gamma_JK pair_potential(X_J - X_K)."""
    total = 0.0 + 0.0j
    for J in range(model.calN):
        for K in range(J + 1, model.calN):
            total += model.gamma(J, K) * pair_potential(ctx, cfg.coords[J] - cfg.coords[K])
    return total
