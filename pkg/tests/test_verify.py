"""Closed-form constants, residual entries, configuration sampling, and the
report machinery."""

import json

import numpy as np
import pytest

from ecslab.elliptic import TWO_PI, EllipticContext
from ecslab.errors import ConstraintError, DegenerateCoefficientError, PackingError
from ecslab.states import DeformedModel, MassModel
from ecslab.verify import (
    ShiftSpec,
    constant_C,
    energy_E0_cor2,
    energy_E0_double_sum,
    energy_E0_prop1,
    energy_En_cor3,
    lemma1_shift,
    residual_cor1,
    residual_cor2,
    residual_cor3,
    residual_prop1,
    sample_configurations,
    shifted_E0,
    suite_appendix,
    suite_cor2,
    suite_lemma1,
    suite_prop1,
    suite_shift,
)


def rng_draw(seed):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0, TWO_PI))
    masses = tuple(
        rng.uniform(0.4, 1.5) * np.exp(1j * rng.uniform(0, TWO_PI)) for _ in range(3)
    )
    return complex(lam), tuple(complex(m) for m in masses)


# --- constants ---------------------------------------------------------------


def test_energy_E0_trivial_and_direct():
    ctx = EllipticContext.from_beta(2.0)
    assert energy_E0_prop1(MassModel(lam=1.7, masses=(1.0, -1.0)), ctx) == 0.0
    lam = 1.3
    model = MassModel(lam=lam, masses=(1.0, 1.0))
    expected = lam**2 * (2.0 * ctx.c0 + 4.0 * ctx.c1)
    assert energy_E0_prop1(model, ctx) == pytest.approx(expected, rel=1e-15)


def test_energy_E0_double_sum_crosscheck():
    ctx = EllipticContext.from_beta(3.1)
    for seed in range(8):
        lam, masses = rng_draw(seed)
        model = MassModel(lam=lam, masses=masses)
        a = energy_E0_prop1(model, ctx)
        b = energy_E0_double_sum(model, ctx)
        assert abs(a - b) < 1e-13 * (1.0 + abs(a))


def test_constant_C_antisymmetric_zero():
    ctx = EllipticContext.from_beta(2.5)
    for n, nt in ((1, 1), (2, 1), (2, 2)):
        model = DeformedModel(n, nt, n, nt, lam=0.73 + 0.21j)
        assert constant_C(model, ctx) == 0.0


def test_constant_C_balanced_reduction():
    # with (N-M) lam = Ntilde - Mtilde the constant collapses to
    # [-lam^2 (N-M) + (Ntilde-Mtilde)/lam] c0
    ctx = EllipticContext.from_beta(2.0)
    for N, Nt, M, Mt in ((2, 1, 1, 0), (2, 2, 1, 1), (2, 1, 0, 0), (1, 2, 0, 1)):
        lam = (Nt - Mt) / (N - M)
        model = DeformedModel(N, Nt, M, Mt, lam)
        assert model.balanced
        expected = (-(lam**2) * (N - M) + (Nt - Mt) / lam) * ctx.c0
        assert constant_C(model, ctx) == pytest.approx(expected, abs=1e-13)


def test_constant_C_matches_embedding():
    ctx = EllipticContext.from_beta(2.7)
    rng = np.random.default_rng(5)
    for _ in range(10):
        N, Nt, M, Mt = (int(v) for v in rng.integers(0, 3, size=4))
        if N + Nt < 1:
            continue
        lam = complex(rng.uniform(0.4, 2.5) * np.exp(1j * rng.uniform(0, TWO_PI)))
        model = DeformedModel(N, Nt, M, Mt, lam)
        cc = constant_C(model, ctx)
        emb = energy_E0_prop1(model.mass_model(), ctx)
        assert abs(cc - emb) < 1e-13 * (1.0 + abs(cc))


def test_energy_cor2_values():
    ctx2 = EllipticContext.from_beta(2.0)
    assert energy_E0_cor2(1, 1, ctx2) == 0.0
    assert energy_E0_cor2(2, 2, ctx2) == 0.0
    assert energy_E0_cor2(2, 1, ctx2) == pytest.approx(1.5 * ctx2.c0, rel=1e-15)
    with pytest.raises(ConstraintError):
        energy_E0_cor2(0, 1, ctx2)


def test_energy_cor3_values():
    ctx = EllipticContext.from_beta(2.5)
    assert energy_En_cor3(2, 1, 0, ctx) == 0.0
    assert energy_En_cor3(2, 1, 3, ctx) == 9.0
    ctx2 = EllipticContext.from_beta(2.0)
    assert energy_En_cor3(3, 1, 1, ctx2) == pytest.approx(1.0 + 1.5 * ctx2.c0, rel=1e-14)
    with pytest.raises(ConstraintError):
        energy_En_cor3(1, 1, 0, ctx)


def test_shifted_E0():
    ctx = EllipticContext.from_beta(2.2)
    lam, masses = rng_draw(3)
    model = MassModel(lam=lam, masses=masses)
    e0 = energy_E0_prop1(model, ctx)
    assert shifted_E0(model, ctx, ShiftSpec(0.0, 0.0)) == e0
    target = lam * (model.calN - 1) * model.power_sum(1) * ctx.c0
    got = shifted_E0(model, ctx, ShiftSpec(b0=ctx.c0, b1=ctx.c1))
    assert abs(got - target) < 1e-13 * (1.0 + abs(target))
    # traceless masses: the shifted constant vanishes
    m0 = MassModel(lam=lam, masses=(0.8, -0.3, -0.5))
    got0 = shifted_E0(m0, ctx, ShiftSpec(b0=ctx.c0, b1=ctx.c1))
    assert abs(got0) < 1e-15


def test_lemma1_shift_matches_embedding():
    model = DeformedModel(2, 1, 1, 2, lam=0.9 - 0.3j)
    v = 0.37
    shift = lemma1_shift(model, v)
    embedded = model.mass_model().power_sum(1) * v * v
    assert abs(shift - embedded) < 1e-14 * (1.0 + abs(shift))


# --- configuration sampling --------------------------------------------------


def test_sample_configurations_deterministic_and_valid():
    a = sample_configurations([2], 0.2, 3, seed=7)
    b = sample_configurations([2], 0.2, 3, seed=7)
    assert [c.coords for c in a] == [c.coords for c in b]
    c = sample_configurations([2], 0.2, 1, seed=8)[0]
    assert c.coords != a[0].coords
    for cfg in sample_configurations([2, 1, 1, 1], 0.2, 5, seed=3):
        xs = cfg.coords
        assert all(xs[i] > xs[i + 1] for i in range(len(xs) - 1))
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                d = xs[i] - xs[j]
                assert 0.2 <= d <= TWO_PI - 0.2


def test_sample_configurations_packing_error():
    with pytest.raises(PackingError):
        sample_configurations([5], 1.5, 1, seed=0)


# --- residual entries ---------------------------------------------------------


def test_residual_prop1_examples():
    ctx3 = EllipticContext.from_beta(3.0)
    cfg = sample_configurations([2], 0.2, 1, seed=1)[0]
    model = MassModel(lam=2.0, masses=(1.0, 1.0))
    res, scale = residual_prop1(
        model, ctx3, type(cfg)((2.1, 0.8), min_sep=cfg.min_sep)
    )
    assert res / scale < 1e-9

    ctx = EllipticContext.from_beta(2.4)
    model = MassModel(lam=1.3 - 0.4j, masses=(1.0, -1.0, 0.37 + 0.2j))
    cfg = sample_configurations([3], 0.2, 1, seed=2)[0]
    res, scale = residual_prop1(model, ctx, cfg)
    assert res / scale < 1e-9

    single = MassModel(lam=1.1, masses=(0.6,))
    cfg1 = sample_configurations([1], 0.2, 1, seed=3)[0]
    res, _ = residual_prop1(single, ctx, cfg1)
    assert res == 0.0


def test_residual_cor1_examples():
    ctx = EllipticContext.from_beta(2.5)
    model = DeformedModel(1, 0, 1, 0, lam=0.7)
    cfg = sample_configurations(model.group_sizes(), 0.2, 1, seed=4)[0]
    res, scale = residual_cor1(model, ctx, cfg)
    assert res / scale < 1e-9

    balanced = DeformedModel(2, 1, 1, 0, lam=1.0)
    assert balanced.balanced and balanced.beta_term_coefficient == 0.0
    cfg = sample_configurations(balanced.group_sizes(), 0.2, 1, seed=5)[0]
    res, scale = residual_cor1(balanced, ctx, cfg)
    assert res / scale < 1e-9

    dressed = DeformedModel(1, 1, 1, 1, lam=0.9)
    cfg = sample_configurations(dressed.group_sizes(), 0.2, 1, seed=6)[0]
    res, scale = residual_cor1(dressed, ctx, cfg, dressing=(0.4, 1.0 + 0.0j))
    assert res / scale < 1e-9
    # the same parameters at v=0 reduce to the undressed identity
    res0, scale0 = residual_cor1(dressed, ctx, cfg, dressing=(0.0, 2.0 + 0.0j))
    assert res0 / scale0 < 1e-9


def test_residual_cor2_examples():
    ctx3 = EllipticContext.from_beta(3.0)
    cfg = sample_configurations([1, 1], 0.2, 1, seed=7)[0]
    res, scale = residual_cor2(1, 1, ctx3, cfg)
    assert res < 1e-13

    cfg = sample_configurations([2, 1], 0.2, 1, seed=8)[0]
    res, scale = residual_cor2(2, 1, ctx3, cfg)
    assert res / scale < 1e-9

    ctx2 = EllipticContext.from_beta(2.0)
    cfg = sample_configurations([3, 2], 0.2, 1, seed=9)[0]
    res, scale = residual_cor2(3, 2, ctx2, cfg)
    assert res / scale < 1e-9


def test_residual_cor3_examples():
    tctx = EllipticContext.trigonometric()
    cfg = sample_configurations([2, 1], 0.2, 1, seed=10)[0]
    res, scale = residual_cor3(2, 1, 0, tctx, cfg)
    assert res / scale < 1e-6

    ctx = EllipticContext.from_beta(2.5)
    cfg = sample_configurations([2, 1], 0.2, 1, seed=11)[0]
    res, scale = residual_cor3(2, 1, 2, ctx, cfg)
    assert res / scale < 1e-5

    with pytest.raises(DegenerateCoefficientError):
        residual_cor3(2, 1, -1, tctx, cfg)
    with pytest.raises(ConstraintError):
        residual_cor3(1, 1, 0, ctx, cfg)


# --- suites and reports --------------------------------------------------------


def test_suite_reports_structure_and_determinism():
    r1 = suite_shift(samples=4, seed=9)
    r2 = suite_shift(samples=4, seed=9)
    assert json.dumps(r1.to_dict(), sort_keys=True) == json.dumps(r2.to_dict(), sort_keys=True)
    assert r1.passed
    d = r1.to_dict()
    assert set(d) == {"suite", "params", "samples", "max_rel_residual", "tolerance", "pass", "meta"}
    s = d["samples"][0]
    assert s["passed"] == (s["rel_residual"] < s["tolerance"])
    assert r1.elapsed_ms >= 0.0


def test_suite_prop1_fixed_model_mode():
    model = MassModel(lam=1.3, masses=(1.0, -1.0, 0.5))
    report = suite_prop1(samples=4, seed=7, model=model, beta=2.5)
    assert report.passed
    backends = {s.backend for s in report.samples}
    assert backends == {"analytic", "fd"}
    for s in report.samples:
        assert s.tolerance == (1e-9 if s.backend == "analytic" else 1e-6)


def test_suite_appendix_small():
    report = suite_appendix(samples=20, seed=13)
    assert report.passed
    checks = {s.check for s in report.samples}
    assert checks == {"derivative", "square", "three-point", "parity"}


def test_suite_cor2_rejects_wrong_coupling():
    with pytest.raises(ConstraintError):
        suite_cor2(pairs=((2, 1),), lam_override=0.9)
    report = suite_cor2(pairs=((2, 1),), betas=(3.0,), samples=2, seed=1, lam_override=0.5)
    assert report.passed
    ctx = EllipticContext.from_beta(3.0)
    for s in report.samples:
        assert s.params["eigenvalue"] == pytest.approx(1.5 * ctx.c0, rel=1e-15)


def test_suite_lemma1_small():
    report = suite_lemma1(samples=5, seed=21)
    assert report.passed
    checks = {s.check for s in report.samples}
    assert checks == {"dressed-kernel-identity", "dressing-shift"}


def test_suite_cor3_other_group_sizes():
    from ecslab.verify import suite_cor3

    report = suite_cor3(N=3, Ntilde=2, beta=2.5, n_values=(0, 2), samples=1, seed=4)
    assert report.passed
    assert report.params["lam"] == 1.0
    report = suite_cor3(N=3, Ntilde=1, beta=2.5, n_values=(1,), samples=1, seed=4)
    assert report.passed
    assert report.params["lam"] == 0.5
