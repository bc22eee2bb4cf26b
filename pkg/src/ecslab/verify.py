"""Closed-form constants, residual checks, and seeded verification suites.

Every identity the library claims gets a quantified residual: the operator is
applied to the candidate state at sampled configurations, the closed-form
constant is subtracted, and the leftover is normalized by 1 + the largest
single contribution (these identities are near-total cancellations of large
terms, so raw residuals would flatter or damn them unfairly).

Tolerance tiers reflect the error budget of each pipeline:

    analytic backend        1e-9   (closed-form log-derivatives)
    fd backend              1e-6   (order-4 stencils + one Richardson level)
    contour eigenfunctions  1e-5   (quadrature + FD stacking)
    closed-form equalities  1e-13  (pure constant arithmetic)

All sampling is seeded (numpy SeedSequence-style [seed, index] streams), so a
suite is reproducible regardless of execution order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .elliptic import (
    TWO_PI,
    EllipticContext,
    TruncationPolicy,
    beta_potential,
    log_dtheta,
    pair_potential,
    theta,
)
from .errors import (
    ConstraintError,
    DegenerateCoefficientError,
    PackingError,
)
from .operators import (
    StencilSpec,
    apply_H_deformed,
    apply_H_deformed_fn,
    apply_calH,
    beta_derivative,
    stencil_min_sep,
)
from .states import (
    Configuration,
    DeformedModel,
    MassModel,
    QuadratureSpec,
    build_kernel_F,
    build_phi0,
    build_psi0,
    coords_to_circle,
    dress_plane_wave,
    pn_coefficients,
)

ANALYTIC_TOL = 1e-9
FD_TOL = 1e-6
CONTOUR_TOL = 1e-5
CLOSED_FORM_TOL = 1e-13
EXACT_TOL = 1e-15  # for quantities the code constructs as exact zeros

_EPS = 2.220446049250313e-16


# ---------------------------------------------------------------------------
# Closed-form constants


@dataclass(frozen=True)
class ShiftSpec:
    """Convention shift: b0 added to the pair potential, b1 the beta-log-
    derivative of a constant rescaling of theta."""

    b0: float = 0.0
    b1: float = 0.0


def energy_E0_prop1(model: MassModel, ctx: EllipticContext) -> complex:
    """Eigen-constant of the source identity:
    lam^2 [ (|m^2||m| - |m^3|) c0 + (|m|^2 - |m^2|) |m| c1 ]."""
    m1, m2, m3 = (model.power_sum(n) for n in (1, 2, 3))
    lam2 = model.lam**2
    return lam2 * ((m2 * m1 - m3) * ctx.c0 + (m1 * m1 - m2) * m1 * ctx.c1)


def energy_E0_double_sum(model: MassModel, ctx: EllipticContext) -> complex:
    """Same constant as an explicit double sum over pairs (cross-check form)."""
    lam2 = model.lam**2
    m1 = model.power_sum(1)
    total = 0.0 + 0.0j
    for J in range(model.calN):
        for K in range(J + 1, model.calN):
            mm = model.masses[J] * model.masses[K]
            total += lam2 * mm * (model.masses[J] + model.masses[K]) * ctx.c0
            total += 2.0 * m1 * lam2 * mm * ctx.c1
    return total


def constant_C(model: DeformedModel, ctx: EllipticContext) -> complex:
    """Kernel-identity constant as a c0/c1 polynomial in the group sizes."""
    N, Nt, M, Mt = model.N, model.Ntilde, model.M, model.Mtilde
    lam = model.lam
    a, at = N - M, Nt - Mt
    c0_part = (
        (N * (N - 1) - M * (M - 1)) * lam**2
        - (N + M) * at * lam
        + a * (Nt + Mt)
        - (Nt * (Nt - 1) - Mt * (Mt - 1)) / lam
    )
    c1_part = (
        a * (a * a - N - M) * lam**2
        - (3 * a * a - N - M) * at * lam
        + a * (3 * at * at - Nt - Mt)
        - at * (at * at - Nt - Mt) / lam
    )
    return c0_part * ctx.c0 + c1_part * ctx.c1


def energy_E0_cor2(N: int, Ntilde: int, ctx: EllipticContext) -> float:
    """Ground-state eigenvalue (N - Ntilde^2/N) c0 at coupling Ntilde/N."""
    if N < 1:
        raise ConstraintError("ground-state eigenvalue needs N >= 1")
    return (N - Ntilde * Ntilde / N) * ctx.c0


def energy_En_cor3(N: int, Ntilde: int, n: int, ctx: EllipticContext) -> float:
    """Excited eigenvalue n^2 + [N - 1 - Ntilde^2/(N-1)] c0 at coupling
    Ntilde/(N-1)."""
    if N < 2 or Ntilde < 1:
        raise ConstraintError("excited eigenvalues need N >= 2 and Ntilde >= 1")
    return n * n + (N - 1 - Ntilde * Ntilde / (N - 1)) * ctx.c0


def shifted_E0(model: MassModel, ctx: EllipticContext, shift: ShiftSpec) -> complex:
    """Eigen-constant after the convention shift (b0, b1):
    E0 - [lam^2(|m^2||m| - |m^3|) - lam (calN - 1)|m|] b0
       - lam^2 (|m|^2 - |m^2|)|m| b1."""
    m1, m2, m3 = (model.power_sum(n) for n in (1, 2, 3))
    lam = model.lam
    base = energy_E0_prop1(model, ctx)
    return (
        base
        - (lam**2 * (m2 * m1 - m3) - lam * (model.calN - 1) * m1) * shift.b0
        - lam**2 * (m1 * m1 - m2) * m1 * shift.b1
    )


def lemma1_shift(model: DeformedModel, v: float) -> complex:
    """Constant shift from plane-wave dressing: [N - M - (Nt - Mt)/lam] v^2."""
    return (model.N - model.M - (model.Ntilde - model.Mtilde) / model.lam) * v * v


# ---------------------------------------------------------------------------
# Configuration sampling


def sample_configurations(
    group_sizes: Sequence[int],
    min_sep: float = 0.2,
    count: int = 1,
    seed=0,
    margin: float | None = None,
) -> list[Configuration]:
    """Seeded, strictly descending configurations in (margin, 2*pi - margin)
    with pairwise separation >= min_sep.  Flat coordinate order covers the
    groups back to back (first group first)."""
    n = int(sum(group_sizes))
    if n < 1:
        raise PackingError("no coordinates requested")
    if margin is None:
        margin = min_sep
    slack = (TWO_PI - 2.0 * margin) - (n - 1) * min_sep
    if slack <= 0.0:
        raise PackingError(
            f"{n} coordinates with min_sep={min_sep!r} and margin={margin!r} "
            f"do not fit in (0, 2*pi)"
        )
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        u = np.sort(rng.uniform(0.0, slack, size=n))
        ascending = margin + u + min_sep * np.arange(n)
        out.append(Configuration(tuple(ascending[::-1]), min_sep=min_sep))
    return out


# ---------------------------------------------------------------------------
# Residual entries (one identity, one configuration)


def _scale(*magnitudes: float) -> float:
    return 1.0 + max(magnitudes, default=0.0)


def residual_prop1(
    model: MassModel,
    ctx: EllipticContext,
    cfg: Configuration,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
) -> tuple[float, float]:
    """|(H + 2 lam |m| d/dbeta - E0) Phi0 / Phi0| and its scale."""
    state = build_phi0(model)
    app = apply_calH(model, state, ctx, cfg, backend=backend, stencil=stencil)
    coef = model.beta_term_coefficient
    bterm = 0.0 + 0.0j
    if coef != 0:
        bterm = coef * beta_derivative(state, ctx, cfg, backend=backend, stencil=stencil)
    e0 = energy_E0_prop1(model, ctx)
    residual = abs(app.value + bterm - e0)
    return residual, _scale(app.max_term, abs(bterm), abs(e0))


def residual_cor1(
    model: DeformedModel,
    ctx: EllipticContext,
    cfg: Configuration,
    dressing: tuple[float, complex] | None = None,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
) -> tuple[float, float]:
    """|(H_left - H_right + coef d/dbeta - C) F / F| and its scale; with a
    plane-wave dressing (v, c) the constant gains the center-of-mass shift."""
    state = build_kernel_F(model)
    const = constant_C(model, ctx)
    if dressing is not None:
        v, c = dressing
        state = dress_plane_wave(state, v, c)
        const = const + lemma1_shift(model, v)
    left = apply_H_deformed(model, "left", state, ctx, cfg, backend=backend, stencil=stencil)
    if model.M + model.Mtilde > 0:
        right = apply_H_deformed(
            model, "right", state, ctx, cfg, backend=backend, stencil=stencil
        )
        right_value, right_max = right.value, right.max_term
    else:
        right_value, right_max = 0.0 + 0.0j, 0.0
    coef = model.beta_term_coefficient
    bterm = 0.0 + 0.0j
    if coef != 0:
        bterm = coef * beta_derivative(state, ctx, cfg, backend=backend, stencil=stencil)
    residual = abs(left.value - right_value + bterm - const)
    return residual, _scale(left.max_term, right_max, abs(bterm), abs(const))


def residual_cor2(
    N: int,
    Ntilde: int,
    ctx: EllipticContext,
    cfg: Configuration,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
) -> tuple[float, float]:
    """|(H psi0)/psi0 - E0| at the eigenfunction coupling Ntilde/N."""
    if N < 1 or Ntilde < 1:
        raise ConstraintError("ground-state check needs N >= 1 and Ntilde >= 1")
    lam = Ntilde / N
    model = DeformedModel(N, Ntilde, 0, 0, lam)
    state = build_psi0(N, Ntilde, lam)
    app = apply_H_deformed(model, "left", state, ctx, cfg, backend=backend, stencil=stencil)
    e0 = energy_E0_cor2(N, Ntilde, ctx)
    return abs(app.value - e0), _scale(app.max_term, abs(e0))


def _pn_reference_scale(table: dict[int, complex]) -> float:
    return max(abs(v) for v in table.values())


def residual_cor3(
    N: int,
    Ntilde: int,
    n: int,
    ctx: EllipticContext,
    cfg: Configuration,
    quad: QuadratureSpec | None = None,
    stencil: StencilSpec | None = None,
) -> tuple[float, float]:
    """|(H psi_n)/psi_n - E(n)| via FD on the full contour-coefficient product.

    psi_n = psi0 * P_n(z, zt) with z = exp(i x); every stencil point re-runs
    the quadrature at the shifted z.  Configurations where |P_n| falls under
    1e-8 of the local coefficient scale raise DegenerateCoefficientError.
    """
    if N < 2 or Ntilde < 1:
        raise ConstraintError("contour eigenfunctions need N >= 2 and Ntilde >= 1")
    lam = Ntilde / (N - 1)
    quad = quad or QuadratureSpec()
    spec = stencil or StencilSpec()
    model = DeformedModel(N, Ntilde, 0, 0, lam)
    state = build_psi0(N, Ntilde, lam)

    z0 = coords_to_circle(cfg.coords[:N])
    zt0 = coords_to_circle(cfg.coords[N:])
    ref_range = range(-(abs(n) + 2), abs(n) + 3)
    table = pn_coefficients(ctx, N, Ntilde, lam, z0, zt0, ref_range, quad)
    if abs(table[n]) < 1e-8 * _pn_reference_scale(table):
        raise DegenerateCoefficientError(
            f"coefficient n={n} vanishes at this configuration"
        )

    reduced = stencil_min_sep(cfg.min_sep, spec)

    def psi_n(coords: tuple[float, ...]) -> complex:
        inner = Configuration(coords, min_sep=reduced)
        z = coords_to_circle(coords[:N])
        zt = coords_to_circle(coords[N:])
        p = pn_coefficients(ctx, N, Ntilde, lam, z, zt, [n], quad)[n]
        return state.eval(ctx, inner) * p

    app = apply_H_deformed_fn(
        model, psi_n, (range(N), range(N, N + Ntilde)), ctx, cfg, spec
    )
    en = energy_En_cor3(N, Ntilde, n, ctx)
    return abs(app.value - en), _scale(app.max_term, abs(en))


# ---------------------------------------------------------------------------
# Reports


@dataclass
class SampleRecord:
    """One verified sample: what was checked, where, and how it scored."""

    index: int
    seed: object
    backend: str
    check: str
    params: dict
    config: list[float]
    residual: float
    scale: float
    rel_residual: float
    tolerance: float
    passed: bool

    @classmethod
    def make(cls, index, seed, backend, check, params, config, residual, scale, tol):
        rel = residual / scale
        return cls(
            index=index,
            seed=seed,
            backend=backend,
            check=check,
            params=params,
            config=list(config),
            residual=float(residual),
            scale=float(scale),
            rel_residual=float(rel),
            tolerance=float(tol),
            passed=bool(rel < tol),
        )

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "seed": jsonable(self.seed),
            "backend": self.backend,
            "check": self.check,
            "params": jsonable(self.params),
            "config": [float(x) for x in self.config],
            "residual": self.residual,
            "scale": self.scale,
            "rel_residual": self.rel_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class ResidualReport:
    """Suite outcome: per-sample records, the headline tolerance, the worst
    relative residual, and truncation/stencil metadata.  Wall time is kept on
    the object but serialized separately by the CLI so reports stay
    byte-comparable."""

    suite: str
    params: dict
    samples: list[SampleRecord]
    tolerance: float
    max_rel_residual: float = field(init=False)
    passed: bool = field(init=False)
    meta: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0

    def __post_init__(self):
        self.max_rel_residual = max((s.rel_residual for s in self.samples), default=0.0)
        self.passed = all(s.passed for s in self.samples)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "params": jsonable(self.params),
            "samples": [s.to_dict() for s in self.samples],
            "max_rel_residual": self.max_rel_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "meta": jsonable(self.meta),
        }


def jsonable(x):
    """Recursively convert params to JSON-stable values (complex -> [re, im])."""
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.complexfloating,)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def _meta(ctx: EllipticContext | None, stencil: StencilSpec | None, quad=None) -> dict:
    meta: dict = {}
    if ctx is not None:
        meta["truncation"] = {
            "target_eps": ctx.trunc.target_eps,
            "max_terms": ctx.trunc.max_terms,
            "n_series": ctx.n_series,
        }
    if stencil is not None:
        meta["stencil"] = {
            "order": stencil.order,
            "h": stencil.h,
            "richardson_levels": stencil.richardson_levels,
            "h_beta": stencil.h_beta,
        }
    if quad is not None:
        meta["quadrature"] = {"nodes": quad.nodes, "radius": quad.radius}
    return meta


# ---------------------------------------------------------------------------
# Random parameter draws (seeded)


def _rng(seed, *path: int) -> np.random.Generator:
    parts = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    return np.random.default_rng(parts + list(path))


def _draw_lambda(rng: np.random.Generator) -> complex:
    # annulus 0.3 <= |lam| <= 3 keeps 1/lam bounded
    mod = rng.uniform(0.3, 3.0)
    return mod * np.exp(1j * rng.uniform(0.0, TWO_PI))


def _draw_masses(rng: np.random.Generator, n: int) -> tuple[complex, ...]:
    masses = []
    for _ in range(n):
        mod = rng.uniform(0.3, 2.0)
        if rng.random() < 0.5:
            masses.append(complex(mod if rng.random() < 0.5 else -mod))
        else:
            masses.append(mod * np.exp(1j * rng.uniform(0.0, TWO_PI)))
    return tuple(masses)


def _ulps(diff: float, ref: float) -> float:
    return abs(diff) / (_EPS * max(abs(ref), 1e-300))


def _fd1(fn: Callable[[float], float], x: float, h: float = 1e-3) -> float:
    """First derivative, order-4 central stencil with one Richardson level.
    Deliberately local so property checks do not share the operator FD code."""

    def d(step: float) -> float:
        return (
            fn(x - 2 * step) / 12.0
            - 2.0 * fn(x - step) / 3.0
            + 2.0 * fn(x + step) / 3.0
            - fn(x + 2 * step) / 12.0
        ) / step

    return (16.0 * d(h / 2.0) - d(h)) / 15.0


# ---------------------------------------------------------------------------
# Suites


def suite_appendix(
    samples: int = 200,
    seed: int = 0,
    beta: float | None = None,
    tol: float = ANALYTIC_TOL,
    trunc: TruncationPolicy | None = None,
) -> ResidualReport:
    """Functional identities of the special functions on random (beta, r):
    derivative (d/dr log-derivative = -pair potential), square, three-point,
    and parity (the last in units of ulp, tolerance 2)."""
    t0 = time.perf_counter()
    records: list[SampleRecord] = []
    for k in range(samples):
        rng = _rng(seed, k)
        b = beta if beta is not None else rng.uniform(1.5, 8.0)
        ctx = EllipticContext.from_beta(b, trunc)
        r = rng.uniform(0.2, TWO_PI - 0.2)
        vv = pair_potential(ctx, r)
        params = {"beta": b, "r": r}

        dphi = _fd1(lambda x: log_dtheta(ctx, x), r)
        records.append(
            SampleRecord.make(
                len(records), [seed, k], "fd", "derivative", params, [r],
                abs(dphi + vv), 1.0 + abs(vv), tol,
            )
        )

        ph = log_dtheta(ctx, r)
        ff = beta_potential(ctx, r)
        records.append(
            SampleRecord.make(
                len(records), [seed, k], "analytic", "square", params, [r],
                abs(ph * ph - vv + 2.0 * ff + ctx.c0), 1.0 + abs(vv), tol,
            )
        )

        while True:
            x = rng.uniform(0.2, TWO_PI - 0.2)
            y = rng.uniform(0.2, TWO_PI - 0.2)
            z = -x - y
            if abs(math.remainder(z, TWO_PI)) >= 0.2:
                break
        three = (
            log_dtheta(ctx, x) * log_dtheta(ctx, y)
            + log_dtheta(ctx, x) * log_dtheta(ctx, z)
            + log_dtheta(ctx, y) * log_dtheta(ctx, z)
            - beta_potential(ctx, x)
            - beta_potential(ctx, y)
            - beta_potential(ctx, z)
        )
        records.append(
            SampleRecord.make(
                len(records), [seed, k], "analytic", "three-point",
                {"beta": b, "x": x, "y": y}, [x, y], abs(three), 1.0, tol,
            )
        )

        worst = max(
            _ulps(theta(ctx, r) + theta(ctx, -r), theta(ctx, r)),
            _ulps(log_dtheta(ctx, r) + log_dtheta(ctx, -r), log_dtheta(ctx, r)),
            _ulps(pair_potential(ctx, r) - pair_potential(ctx, -r), vv),
            _ulps(beta_potential(ctx, r) - beta_potential(ctx, -r), ff),
        )
        records.append(
            SampleRecord.make(
                len(records), [seed, k], "analytic", "parity", params, [r],
                worst, 1.0, 2.0,
            )
        )
    pol = trunc or TruncationPolicy()
    return ResidualReport(
        suite="appendix",
        params={"samples": samples, "seed": seed, "beta": beta},
        samples=records,
        tolerance=tol,
        meta={
            "parity_units": "ulp",
            "truncation": {"target_eps": pol.target_eps, "max_terms": pol.max_terms},
            "fd": "order-4 central, one Richardson level, h=1e-3",
        },
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def suite_trig_limit(samples: int = 50, seed: int = 0) -> ResidualReport:
    """q = 0 closed forms: theta = sin(r/2), pair potential = 1/(4 sin^2(r/2)),
    c0 and the beta potential both 1/12, each within 2 ulp."""
    t0 = time.perf_counter()
    ctx = EllipticContext.trigonometric()
    records = []
    for k in range(samples):
        rng = _rng(seed, k)
        r = rng.uniform(0.2, TWO_PI - 0.2)
        s = math.sin(0.5 * r)
        worst = max(
            _ulps(theta(ctx, r) - s, s),
            _ulps(pair_potential(ctx, r) - 0.25 / (s * s), 0.25 / (s * s)),
            _ulps(ctx.c0 - 1.0 / 12.0, 1.0 / 12.0),
            _ulps(beta_potential(ctx, r) - 1.0 / 12.0, 1.0 / 12.0),
        )
        records.append(
            SampleRecord.make(k, [seed, k], "analytic", "trig-limit", {"r": r}, [r], worst, 1.0, 2.0)
        )
    return ResidualReport(
        suite="trig-limit",
        params={"samples": samples, "seed": seed},
        samples=records,
        tolerance=2.0,
        meta={"units": "ulp"},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def _backend_records(
    index: int,
    seed,
    check: str,
    params: dict,
    cfg: Configuration,
    fn: Callable[[str], tuple[float, float]],
    backends: Sequence[str],
    tol_analytic: float,
    tol_fd: float,
) -> list[SampleRecord]:
    out = []
    for backend in backends:
        residual, scale = fn(backend)
        tol = tol_analytic if backend == "analytic" else tol_fd
        out.append(
            SampleRecord.make(index, seed, backend, check, params, cfg.coords, residual, scale, tol)
        )
    return out


def suite_prop1(
    samples: int = 50,
    seed: int = 0,
    model: MassModel | None = None,
    ctx: EllipticContext | None = None,
    beta: float | None = None,
    backends: Sequence[str] = ("analytic", "fd"),
    stencil: StencilSpec | None = None,
    tol_analytic: float = ANALYTIC_TOL,
    tol_fd: float = FD_TOL,
    min_sep: float = 0.2,
) -> ResidualReport:
    """Source-identity residuals.  With an explicit model, `samples` counts
    configurations; otherwise `samples` seeded random models are drawn
    (calN in {2,3,4}, complex coupling and mixed masses, beta in [1.5, 6])."""
    t0 = time.perf_counter()
    spec = stencil or StencilSpec()
    records: list[SampleRecord] = []
    if model is not None:
        run_ctx = ctx or EllipticContext.from_beta(beta if beta is not None else 2.5)
        cfgs = sample_configurations([model.calN], min_sep, samples, seed=[seed, 0])
        for i, cfg in enumerate(cfgs):
            params = {"calN": model.calN, "lam": model.lam, "masses": model.masses,
                      "beta": run_ctx.beta}
            records.extend(
                _backend_records(
                    i, [seed, i], "source-identity", params, cfg,
                    lambda b: residual_prop1(model, run_ctx, cfg, backend=b, stencil=spec),
                    backends, tol_analytic, tol_fd,
                )
            )
        run_meta_ctx = run_ctx
    else:
        run_meta_ctx = None
        for k in range(samples):
            rng = _rng(seed, k)
            calN = int(rng.choice([2, 3, 4]))
            b = beta if beta is not None else rng.uniform(1.5, 6.0)
            mdl = MassModel(lam=_draw_lambda(rng), masses=_draw_masses(rng, calN))
            run_ctx = EllipticContext.from_beta(b)
            run_meta_ctx = run_ctx
            cfg = sample_configurations([calN], min_sep, 1, seed=[seed, k, 1])[0]
            params = {"calN": calN, "lam": mdl.lam, "masses": mdl.masses, "beta": b}
            records.extend(
                _backend_records(
                    k, [seed, k], "source-identity", params, cfg,
                    lambda bk, m=mdl, c=run_ctx, cf=cfg: residual_prop1(
                        m, c, cf, backend=bk, stencil=spec
                    ),
                    backends, tol_analytic, tol_fd,
                )
            )
    return ResidualReport(
        suite="prop1",
        params={"samples": samples, "seed": seed, "beta": beta,
                "fixed_model": model is not None},
        samples=records,
        tolerance=tol_analytic,
        meta=_meta(run_meta_ctx, spec),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def suite_cor1(
    samples: int = 30,
    seed: int = 0,
    model: DeformedModel | None = None,
    ctx: EllipticContext | None = None,
    beta: float | None = None,
    dressing: tuple[float, complex] | None = None,
    backends: Sequence[str] = ("analytic", "fd"),
    stencil: StencilSpec | None = None,
    tol_analytic: float = ANALYTIC_TOL,
    tol_fd: float = FD_TOL,
    min_sep: float = 0.2,
) -> ResidualReport:
    """Kernel-identity residuals over random group sizes <= 2 and couplings,
    with per-sample closed-form embedding checks (constant equality) and an
    exact zero beta-coefficient record for balanced draws."""
    t0 = time.perf_counter()
    spec = stencil or StencilSpec()
    records: list[SampleRecord] = []

    def run_one(index, sample_seed, mdl: DeformedModel, run_ctx, cfg, dress):
        params = {
            "N": mdl.N, "Ntilde": mdl.Ntilde, "M": mdl.M, "Mtilde": mdl.Mtilde,
            "lam": mdl.lam, "beta": run_ctx.beta, "balanced": mdl.balanced,
            "dressing": None if dress is None else {"v": dress[0], "c": dress[1]},
        }
        records.extend(
            _backend_records(
                index, sample_seed, "kernel-identity", params, cfg,
                lambda b: residual_cor1(mdl, run_ctx, cfg, dressing=dress, backend=b, stencil=spec),
                backends, tol_analytic, tol_fd,
            )
        )
        emb = energy_E0_prop1(mdl.mass_model(), run_ctx)
        cc = constant_C(mdl, run_ctx)
        records.append(
            SampleRecord.make(
                index, sample_seed, "closed-form", "embedding-constant", params,
                cfg.coords, abs(emb - cc), 1.0 + abs(cc), CLOSED_FORM_TOL,
            )
        )
        if mdl.balanced:
            records.append(
                SampleRecord.make(
                    index, sample_seed, "closed-form", "beta-coefficient-zero",
                    params, cfg.coords, abs(mdl.beta_term_coefficient), 1.0, EXACT_TOL,
                )
            )

    if model is not None:
        run_ctx = ctx or EllipticContext.from_beta(beta if beta is not None else 2.5)
        cfgs = sample_configurations(model.group_sizes(), min_sep, samples, seed=[seed, 0])
        for i, cfg in enumerate(cfgs):
            run_one(i, [seed, i], model, run_ctx, cfg, dressing)
        meta_ctx = run_ctx
    else:
        meta_ctx = None
        for k in range(samples):
            rng = _rng(seed, k)
            while True:
                N, Nt, M, Mt = (int(v) for v in rng.integers(0, 3, size=4))
                if N + Nt >= 1:
                    break
            if k % 3 == 0 and N != M and Nt != Mt:
                lam = complex((Nt - Mt) / (N - M))  # balanced draw
            else:
                lam = _draw_lambda(rng)
            mdl = DeformedModel(N, Nt, M, Mt, lam)
            b = beta if beta is not None else rng.uniform(1.5, 6.0)
            run_ctx = EllipticContext.from_beta(b)
            meta_ctx = run_ctx
            cfg = sample_configurations(mdl.group_sizes(), min_sep, 1, seed=[seed, k, 1])[0]
            run_one(k, [seed, k], mdl, run_ctx, cfg, dressing)
    return ResidualReport(
        suite="cor1",
        params={"samples": samples, "seed": seed, "beta": beta,
                "fixed_model": model is not None},
        samples=records,
        tolerance=tol_analytic,
        meta=_meta(meta_ctx, spec),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def suite_cor2(
    pairs: Sequence[tuple[int, int]] = ((1, 1), (2, 1), (2, 2), (3, 2)),
    betas: Sequence[float] = (2.0, 4.0),
    samples: int = 10,
    seed: int = 0,
    tol: float = ANALYTIC_TOL,
    backend: str = "analytic",
    stencil: StencilSpec | None = None,
    lam_override: complex | None = None,
    min_sep: float = 0.2,
) -> ResidualReport:
    """Ground-state eigenvalue residuals at the coupling Ntilde/N."""
    t0 = time.perf_counter()
    spec = stencil or StencilSpec()
    records = []
    meta_ctx = None
    for N, Nt in pairs:
        if N < 1 or Nt < 1:
            raise ConstraintError("ground-state suite needs N >= 1 and Ntilde >= 1")
        lam = Nt / N
        if lam_override is not None and abs(lam_override - lam) > 1e-12:
            raise ConstraintError(
                f"ground-state eigenfunction requires lam = Ntilde/N = {lam!r} "
                f"(got {lam_override!r})"
            )
        for b in betas:
            ctx = EllipticContext.from_beta(b)
            meta_ctx = ctx
            e0 = energy_E0_cor2(N, Nt, ctx)
            cfgs = sample_configurations([N, Nt], min_sep, samples, seed=[seed, N, Nt, int(b * 1e6)])
            for i, cfg in enumerate(cfgs):
                residual, scale = residual_cor2(N, Nt, ctx, cfg, backend=backend, stencil=spec)
                records.append(
                    SampleRecord.make(
                        len(records), [seed, N, Nt, i], backend, "ground-eigenvalue",
                        {"N": N, "Ntilde": Nt, "lam": lam, "beta": b, "eigenvalue": e0},
                        cfg.coords, residual, scale, tol,
                    )
                )
    return ResidualReport(
        suite="cor2",
        params={"pairs": [list(p) for p in pairs], "betas": list(betas),
                "samples": samples, "seed": seed},
        samples=records,
        tolerance=tol,
        meta=_meta(meta_ctx, spec),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def suite_cor3(
    N: int = 2,
    Ntilde: int = 1,
    beta: float = 2.5,
    n_values: Sequence[int] = (-2, -1, 0, 1, 2, 3),
    samples: int = 5,
    seed: int = 0,
    tol: float = CONTOUR_TOL,
    quad: QuadratureSpec | None = None,
    stencil: StencilSpec | None = None,
    lam_override: complex | None = None,
    min_sep: float = 0.2,
) -> ResidualReport:
    """Excited-eigenvalue residuals for the contour-coefficient eigenfunctions,
    plus quadrature stability records (node doubling, contour independence)
    and, for (N, Ntilde) = (2, 1), the q = 0 closed-form coefficients."""
    t0 = time.perf_counter()
    if N < 2 or Ntilde < 1:
        raise ConstraintError("excited suite needs N >= 2 and Ntilde >= 1")
    lam = Ntilde / (N - 1)
    if lam_override is not None and abs(lam_override - lam) > 1e-12:
        raise ConstraintError(
            f"contour eigenfunctions require lam = Ntilde/(N-1) = {lam!r} "
            f"(got {lam_override!r})"
        )
    quad = quad or QuadratureSpec()
    spec = stencil or StencilSpec()
    ctx = EllipticContext.from_beta(beta)
    records = []
    for n in n_values:
        en = energy_En_cor3(N, Ntilde, n, ctx)
        got = 0
        attempt = 0
        last_err: DegenerateCoefficientError | None = None
        while got < samples and attempt < 8 * samples:
            cfg = sample_configurations([N, Ntilde], min_sep, 1, seed=[seed, 200 + n, attempt])[0]
            attempt += 1
            try:
                residual, scale = residual_cor3(N, Ntilde, n, ctx, cfg, quad=quad, stencil=spec)
            except DegenerateCoefficientError as err:
                last_err = err
                continue
            records.append(
                SampleRecord.make(
                    len(records), [seed, n, attempt - 1], "fd", "excited-eigenvalue",
                    {"N": N, "Ntilde": Ntilde, "lam": lam, "beta": beta,
                     "n": n, "eigenvalue": en},
                    cfg.coords, residual, scale, tol,
                )
            )
            got += 1
        if got < samples:
            raise last_err or DegenerateCoefficientError(
                f"could not find non-degenerate configurations for n={n}"
            )

    # quadrature stability at a reference configuration
    ref = sample_configurations([N, Ntilde], min_sep, 1, seed=[seed, 999])[0]
    z = coords_to_circle(ref.coords[:N])
    zt = coords_to_circle(ref.coords[N:])
    ns = list(n_values)
    base = pn_coefficients(ctx, N, Ntilde, lam, z, zt, ns, quad)
    doubled = pn_coefficients(
        ctx, N, Ntilde, lam, z, zt, ns,
        QuadratureSpec(nodes=2 * quad.nodes, radius=quad.radius),
    )
    p_scale = max(1.0, max(abs(v) for v in base.values()))
    diff = max(abs(base[n] - doubled[n]) for n in ns)
    records.append(
        SampleRecord.make(
            len(records), [seed, 999], "quadrature", "node-doubling",
            {"nodes": quad.nodes}, ref.coords, diff, p_scale, 1e-10,
        )
    )
    r1 = quad.resolve_radius(ctx)
    r2 = math.sqrt(r1)
    alt = pn_coefficients(ctx, N, Ntilde, lam, z, zt, ns, QuadratureSpec(nodes=quad.nodes, radius=r2))
    diff = max(abs(base[n] - alt[n]) for n in ns)
    records.append(
        SampleRecord.make(
            len(records), [seed, 999], "quadrature", "contour-independence",
            {"radius_1": r1, "radius_2": r2}, ref.coords, diff, p_scale, 1e-9,
        )
    )

    if (N, Ntilde) == (2, 1):
        tctx = EllipticContext.trigonometric()
        tp = pn_coefficients(tctx, 2, 1, 1.0, z, zt, [-1, 0, 1], QuadratureSpec())
        expect = {-1: 0.0 + 0.0j, 0: 1.0 + 0.0j, 1: z[0] + z[1] - zt[0]}
        for n in (-1, 0, 1):
            records.append(
                SampleRecord.make(
                    len(records), [seed, 999], "quadrature", f"trig-closed-form-n{n}",
                    {"n": n}, ref.coords, abs(tp[n] - expect[n]), 1.0, 1e-12,
                )
            )

    return ResidualReport(
        suite="cor3",
        params={"N": N, "Ntilde": Ntilde, "beta": beta, "lam": lam,
                "n_values": list(n_values), "samples": samples, "seed": seed},
        samples=records,
        tolerance=tol,
        meta=_meta(ctx, spec, quad),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def suite_lemma1(
    samples: int = 20,
    seed: int = 0,
    beta: float | None = None,
    tol_residual: float = ANALYTIC_TOL,
    tol_closed: float = CLOSED_FORM_TOL,
    stencil: StencilSpec | None = None,
    min_sep: float = 0.2,
) -> ResidualReport:
    """Plane-wave dressing: dressed kernel residuals at the analytic tier and
    the closed-form equality of the constant shift with the embedded-mass
    center-of-mass term |m| v^2."""
    t0 = time.perf_counter()
    spec = stencil or StencilSpec()
    records = []
    meta_ctx = None
    for k in range(samples):
        rng = _rng(seed, k)
        while True:
            N, Nt, M, Mt = (int(v) for v in rng.integers(0, 3, size=4))
            if N + Nt >= 1 and M + Mt >= 1:
                break
        mdl = DeformedModel(N, Nt, M, Mt, _draw_lambda(rng))
        b = beta if beta is not None else rng.uniform(1.5, 6.0)
        ctx = EllipticContext.from_beta(b)
        meta_ctx = ctx
        v = rng.uniform(-1.0, 1.0)
        c = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0.0, TWO_PI))
        cfg = sample_configurations(mdl.group_sizes(), min_sep, 1, seed=[seed, k, 1])[0]
        params = {"N": N, "Ntilde": Nt, "M": M, "Mtilde": Mt, "lam": mdl.lam,
                  "beta": b, "v": v, "c": complex(c)}
        residual, scale = residual_cor1(
            mdl, ctx, cfg, dressing=(v, complex(c)), backend="analytic", stencil=spec
        )
        records.append(
            SampleRecord.make(
                k, [seed, k], "analytic", "dressed-kernel-identity", params,
                cfg.coords, residual, scale, tol_residual,
            )
        )
        shift = lemma1_shift(mdl, v)
        embedded = mdl.mass_model().power_sum(1) * v * v
        records.append(
            SampleRecord.make(
                k, [seed, k], "closed-form", "dressing-shift", params,
                cfg.coords, abs(shift - embedded), 1.0 + abs(shift), tol_closed,
            )
        )
    return ResidualReport(
        suite="lemma1",
        params={"samples": samples, "seed": seed, "beta": beta},
        samples=records,
        tolerance=tol_residual,
        meta=_meta(meta_ctx, spec),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def suite_shift(
    samples: int = 20,
    seed: int = 0,
    beta: float | None = None,
    tol: float = CLOSED_FORM_TOL,
) -> ResidualReport:
    """Closed-form constant algebra: the traceless-mass reduction of the
    eigen-constant, the (c0, c1) convention shift collapsing it to
    lam (calN - 1)|m| c0, and the no-op shift."""
    t0 = time.perf_counter()
    records = []
    meta_ctx = None
    for k in range(samples):
        rng = _rng(seed, k)
        b = beta if beta is not None else rng.uniform(1.5, 6.0)
        ctx = EllipticContext.from_beta(b)
        meta_ctx = ctx
        lam = _draw_lambda(rng)
        calN = int(rng.choice([2, 3, 4]))

        mdl = MassModel(lam=lam, masses=_draw_masses(rng, calN))
        params = {"calN": calN, "lam": lam, "beta": b, "masses": mdl.masses}
        shifted = shifted_E0(mdl, ctx, ShiftSpec(b0=ctx.c0, b1=ctx.c1))
        target = lam * (calN - 1) * mdl.power_sum(1) * ctx.c0
        records.append(
            SampleRecord.make(
                k, [seed, k], "closed-form", "convention-shift", params, [],
                abs(shifted - target), 1.0 + abs(target), tol,
            )
        )
        noop = shifted_E0(mdl, ctx, ShiftSpec(0.0, 0.0))
        records.append(
            SampleRecord.make(
                k, [seed, k], "closed-form", "shift-noop", params, [],
                abs(noop - energy_E0_prop1(mdl, ctx)), 1.0 + abs(noop), tol,
            )
        )

        # traceless draw: last mass balances the rest exactly
        while True:
            head = list(_draw_masses(rng, calN - 1))
            tail = -sum(head)
            if tail != 0:
                break
        mdl0 = MassModel(lam=lam, masses=tuple(head) + (tail,))
        e0 = energy_E0_prop1(mdl0, ctx)
        reduced = -(lam**2) * mdl0.power_sum(3) * ctx.c0
        params0 = {"calN": calN, "lam": lam, "beta": b, "masses": mdl0.masses}
        records.append(
            SampleRecord.make(
                k, [seed, k], "closed-form", "traceless-reduction", params0, [],
                abs(e0 - reduced), 1.0 + abs(reduced), tol,
            )
        )
        shifted0 = shifted_E0(mdl0, ctx, ShiftSpec(b0=ctx.c0, b1=ctx.c1))
        records.append(
            SampleRecord.make(
                k, [seed, k], "closed-form", "traceless-shift-zero", params0, [],
                abs(shifted0), 1.0 + abs(e0), tol,
            )
        )
    return ResidualReport(
        suite="shift",
        params={"samples": samples, "seed": seed, "beta": beta},
        samples=records,
        tolerance=tol,
        meta=_meta(meta_ctx, None),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )
