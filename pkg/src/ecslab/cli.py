"""Command-line surface: run verification suites and emit constant /
eigenvalue / coefficient tables as machine-readable reports.

    ecslab verify {appendix,prop1,cor1,cor2,cor3,lemma1,shift,all} [flags]
    ecslab table  {eigenvalues,constants,coefficients} [flags]

Reports are JSON objects {manifest, suite, samples[], max_rel_residual,
tolerance, pass, meta, elapsed_ms} (or flattened CSV with --format csv).  The
manifest echoes the full normalized parameter record, so identical manifests
reproduce byte-identical reports up to the elapsed_ms field.

Exit codes: 0 all samples pass; 1 a tolerance failed; 2 parameter/constraint
violation; 3 numerical-domain error (singularities, truncation caps,
annulus/packing violations, degenerate coefficients).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

from .elliptic import EllipticContext
from .errors import ConstraintError, EcsError
from .operators import StencilSpec
from .states import DeformedModel, MassModel, QuadratureSpec, coords_to_circle
from .verify import (
    ShiftSpec,
    constant_C,
    energy_E0_cor2,
    energy_E0_prop1,
    energy_En_cor3,
    jsonable,
    shifted_E0,
    suite_appendix,
    suite_cor1,
    suite_cor2,
    suite_cor3,
    suite_lemma1,
    suite_prop1,
    suite_shift,
)

SUITES = ("appendix", "prop1", "cor1", "cor2", "cor3", "lemma1", "shift", "all")
TABLE_KINDS = ("eigenvalues", "constants", "coefficients")


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConstraintError(f"cannot parse complex number {text!r}") from exc


def _parse_masses(text: str) -> tuple[complex, ...]:
    return tuple(_parse_complex(tok) for tok in text.split(",") if tok)


def _parse_int_range(text: str) -> list[int]:
    """'a..b' (inclusive), a comma list, or a single integer."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise ConstraintError(f"empty range {text!r}")
        return list(range(lo_i, hi_i + 1))
    if "," in text:
        return [int(tok) for tok in text.split(",") if tok]
    return [int(text)]


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecslab",
        description="verification suites and tables for elliptic "
        "Calogero-Sutherland type operator identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--beta", help="imaginary half-period parameter (comma list in tables)")
        grp.add_argument("--q", help="nome in [0,1); 0 selects the trigonometric limit")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None, help="override the primary tolerance")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--fd-order", type=int, choices=(2, 4, 6), default=4)
        p.add_argument("--fd-step", type=float, default=1e-3)
        p.add_argument("--quad-nodes", type=int, default=256)
        p.add_argument("--quad-radius", type=float, default=None)
        p.add_argument("--lambda", dest="lam", default=None, help="coupling (complex, j-notation)")
        p.add_argument("--N", type=int, default=None)
        p.add_argument("--Ntilde", type=int, default=None)
        p.add_argument("--M", type=int, default=None)
        p.add_argument("--Mtilde", type=int, default=None)
        p.add_argument("--n", default=None, help="integer label or range 'a..b'")

    pv = sub.add_parser("verify", help="run a residual verification suite")
    pv.add_argument("suite", choices=SUITES)
    add_common(pv)
    pv.add_argument("--samples", type=int, default=None,
                    help="configurations (fixed model) or random draws (sweep)")
    pv.add_argument("--calN", type=int, default=None)
    pv.add_argument("--masses", default=None, help="comma-separated complex masses")
    pv.add_argument("--v", type=float, default=None, help="plane-wave dressing velocity")
    pv.add_argument("--backend", choices=("analytic", "fd", "both"), default=None,
                    help="default: analytic for a fixed model, both for sweeps")

    pt = sub.add_parser("table", help="emit constants / eigenvalues / coefficient tables")
    pt.add_argument("kind", choices=TABLE_KINDS)
    add_common(pt)
    pt.add_argument("--calN", type=int, default=None)
    pt.add_argument("--masses", default=None)
    pt.add_argument("--b0", type=float, default=None)
    pt.add_argument("--b1", type=float, default=None)
    pt.add_argument("--z", default=None, help="comma-separated complex unit-circle points")
    pt.add_argument("--zt", default=None)
    return parser


def _beta_from_args(args, default: float | None = 2.5) -> float | None:
    """Single beta value for verify commands (None = let the suite draw)."""
    if args.beta is not None:
        vals = _parse_float_list(args.beta)
        if len(vals) != 1:
            raise ConstraintError("verify takes a single --beta value")
        return vals[0]
    if args.q is not None:
        vals = _parse_float_list(args.q)
        if len(vals) != 1:
            raise ConstraintError("verify takes a single --q value")
        q = vals[0]
        if q == 0.0:
            return math.inf
        if not 0.0 < q < 1.0:
            raise ConstraintError("--q must lie in [0, 1)")
        return -2.0 * math.log(q)
    return default


def _ctx_list_from_args(args) -> list[EllipticContext]:
    """Context grid for table commands (comma lists allowed)."""
    if args.q is not None:
        out = []
        for q in _parse_float_list(args.q):
            out.append(EllipticContext.from_q(q))
        return out
    betas = _parse_float_list(args.beta) if args.beta is not None else [2.5]
    return [EllipticContext.from_beta(b) for b in betas]


def _manifest(args) -> dict:
    record = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    record["command"] = args.command
    return jsonable(record)


def _stencil(args) -> StencilSpec:
    return StencilSpec(order=args.fd_order, h=args.fd_step)


def _quad(args) -> QuadratureSpec:
    return QuadratureSpec(nodes=args.quad_nodes, radius=args.quad_radius)


def _backends(args, fixed_model: bool) -> tuple[str, ...]:
    choice = getattr(args, "backend", None)
    if choice is None:
        choice = "analytic" if fixed_model else "both"
    return ("analytic", "fd") if choice == "both" else (choice,)


def _run_verify_one(suite: str, args) -> dict:
    seed = args.seed
    stencil = _stencil(args)
    tol = args.tol
    if suite == "appendix":
        beta = _beta_from_args(args, default=None)
        report = suite_appendix(samples=args.samples or 200, seed=seed,
                                beta=beta, tol=tol or 1e-9)
    elif suite == "prop1":
        beta = _beta_from_args(args, default=None)
        model = None
        if args.masses is not None:
            masses = _parse_masses(args.masses)
            if args.calN is not None and args.calN != len(masses):
                raise ConstraintError(
                    f"--calN {args.calN} does not match {len(masses)} masses"
                )
            lam = _parse_complex(args.lam) if args.lam else 1.0 + 0.0j
            model = MassModel(lam=lam, masses=masses)
        samples = args.samples or (20 if model is not None else 50)
        kwargs = {}
        if tol is not None:
            kwargs["tol_analytic"] = tol
        report = suite_prop1(samples=samples, seed=seed, model=model, beta=beta,
                             backends=_backends(args, model is not None),
                             stencil=stencil, **kwargs)
    elif suite == "cor1":
        beta = _beta_from_args(args, default=None)
        model = None
        dressing = None
        if args.N is not None or args.Ntilde is not None:
            lam = _parse_complex(args.lam) if args.lam else 1.0 + 0.0j
            model = DeformedModel(args.N or 0, args.Ntilde or 0,
                                  args.M or 0, args.Mtilde or 0, lam)
            if args.v is not None:
                dressing = (args.v, 1.0 + 0.0j)
        samples = args.samples or (10 if model is not None else 30)
        kwargs = {}
        if tol is not None:
            kwargs["tol_analytic"] = tol
        report = suite_cor1(samples=samples, seed=seed, model=model, beta=beta,
                            dressing=dressing, stencil=stencil,
                            backends=_backends(args, model is not None), **kwargs)
    elif suite == "cor2":
        if args.N is not None:
            if args.Ntilde is None:
                raise ConstraintError("cor2 needs --Ntilde with --N")
            pairs = ((args.N, args.Ntilde),)
        else:
            pairs = ((1, 1), (2, 1), (2, 2), (3, 2))
        if args.beta is not None or args.q is not None:
            betas = (_beta_from_args(args),)
        else:
            betas = (2.0, 4.0)
        lam_override = _parse_complex(args.lam) if args.lam else None
        report = suite_cor2(pairs=pairs, betas=betas, samples=args.samples or 10,
                            seed=seed, tol=tol or 1e-9, stencil=stencil,
                            lam_override=lam_override)
    elif suite == "cor3":
        n_values = _parse_int_range(args.n) if args.n else (-2, -1, 0, 1, 2, 3)
        lam_override = _parse_complex(args.lam) if args.lam else None
        report = suite_cor3(N=args.N or 2, Ntilde=args.Ntilde or 1,
                            beta=_beta_from_args(args) or 2.5,
                            n_values=n_values, samples=args.samples or 5,
                            seed=seed, tol=tol or 1e-5, quad=_quad(args),
                            stencil=stencil, lam_override=lam_override)
    elif suite == "lemma1":
        report = suite_lemma1(samples=args.samples or 20, seed=seed,
                              beta=_beta_from_args(args, default=None),
                              tol_residual=tol or 1e-9, stencil=stencil)
    elif suite == "shift":
        report = suite_shift(samples=args.samples or 20, seed=seed,
                             beta=_beta_from_args(args, default=None),
                             tol=tol or 1e-13)
    else:
        raise ConstraintError(f"unknown suite {suite!r}")
    return report.to_dict()


def _run_verify(args) -> dict:
    t0 = time.perf_counter()
    if args.suite == "all":
        parts = [_run_verify_one(s, args) for s in SUITES if s != "all"]
        samples = []
        for part in parts:
            for s in part["samples"]:
                s = dict(s)
                s["suite"] = part["suite"]
                samples.append(s)
        payload = {
            "manifest": _manifest(args),
            "suite": "all",
            "samples": samples,
            "max_rel_residual": max(p["max_rel_residual"] for p in parts),
            "tolerance": None,
            "pass": all(p["pass"] for p in parts),
            "meta": {"suites": [
                {"suite": p["suite"], "pass": p["pass"],
                 "max_rel_residual": p["max_rel_residual"],
                 "tolerance": p["tolerance"]}
                for p in parts
            ]},
        }
    else:
        part = _run_verify_one(args.suite, args)
        payload = {"manifest": _manifest(args), **part}
    payload["elapsed_ms"] = (time.perf_counter() - t0) * 1e3
    return payload


def _table_eigenvalues(args) -> list[dict]:
    if args.N is None or args.Ntilde is None:
        raise ConstraintError("table eigenvalues needs --N and --Ntilde")
    rows = []
    for ctx in _ctx_list_from_args(args):
        if args.n is not None:
            lam = args.Ntilde / (args.N - 1) if args.N >= 2 else None
            if lam is None:
                raise ConstraintError("excited eigenvalues need N >= 2")
            for n in _parse_int_range(args.n):
                en = energy_En_cor3(args.N, args.Ntilde, n, ctx)
                rows.append({
                    "N": args.N, "Ntilde": args.Ntilde, "lam": lam,
                    "beta": ctx.beta, "q": ctx.q, "n": n, "energy": en,
                    "energy_minus_n2": en - n * n, "c0": ctx.c0,
                })
        else:
            lam = args.Ntilde / args.N
            e0 = energy_E0_cor2(args.N, args.Ntilde, ctx)
            rows.append({
                "N": args.N, "Ntilde": args.Ntilde, "lam": lam,
                "beta": ctx.beta, "q": ctx.q, "energy": e0, "c0": ctx.c0,
            })
    return rows


def _table_constants(args) -> list[dict]:
    rows = []
    shift = None
    if args.b0 is not None or args.b1 is not None:
        shift = ShiftSpec(b0=args.b0 or 0.0, b1=args.b1 or 0.0)
    for ctx in _ctx_list_from_args(args):
        if args.masses is not None:
            lam = _parse_complex(args.lam) if args.lam else 1.0 + 0.0j
            model = MassModel(lam=lam, masses=_parse_masses(args.masses))
            row = {
                "calN": model.calN, "lam": lam, "beta": ctx.beta, "q": ctx.q,
                "E0": energy_E0_prop1(model, ctx), "c0": ctx.c0,
            }
            if shift is not None:
                row["E0_shifted"] = shifted_E0(model, ctx, shift)
                row["b0"], row["b1"] = shift.b0, shift.b1
            rows.append(row)
        elif args.N is not None:
            lam = _parse_complex(args.lam) if args.lam else 1.0 + 0.0j
            model = DeformedModel(args.N, args.Ntilde or 0, args.M or 0,
                                  args.Mtilde or 0, lam)
            row = {
                "N": model.N, "Ntilde": model.Ntilde, "M": model.M,
                "Mtilde": model.Mtilde, "lam": lam, "beta": ctx.beta,
                "q": ctx.q, "C": constant_C(model, ctx), "c0": ctx.c0,
                "balanced": model.balanced,
            }
            if shift is not None:
                row["C_shifted"] = shifted_E0(model.mass_model(), ctx, shift)
                row["b0"], row["b1"] = shift.b0, shift.b1
            rows.append(row)
        else:
            raise ConstraintError("table constants needs --masses or --N/--Ntilde/--M/--Mtilde")
    return rows


def _table_coefficients(args) -> list[dict]:
    from .states import pn_coefficients

    if args.N is None or args.Ntilde is None:
        raise ConstraintError("table coefficients needs --N and --Ntilde")
    N, Nt = args.N, args.Ntilde
    if args.lam is not None:
        lam = _parse_complex(args.lam)
    elif N >= 2:
        lam = complex(Nt / (N - 1))
    else:
        raise ConstraintError("give --lambda explicitly when N < 2")
    n_values = _parse_int_range(args.n) if args.n else list(range(-20, 21))
    rows = []
    for ctx in _ctx_list_from_args(args):
        if args.z is not None:
            z = [_parse_complex(t) for t in args.z.split(",") if t]
            zt = [_parse_complex(t) for t in (args.zt or "").split(",") if t]
        else:
            total = N + Nt
            angles = [2.0 * math.pi * (total - i) / (total + 1) for i in range(total)]
            z = list(coords_to_circle(angles[:N]))
            zt = list(coords_to_circle(angles[N:]))
        coeffs = pn_coefficients(ctx, N, Nt, lam, z, zt, n_values, _quad(args))
        for n in n_values:
            p = coeffs[n]
            rows.append({
                "N": N, "Ntilde": Nt, "lam": lam, "beta": ctx.beta, "q": ctx.q,
                "n": n, "P": p, "P_abs": abs(p),
            })
    return rows


def _run_table(args) -> dict:
    t0 = time.perf_counter()
    if args.kind == "eigenvalues":
        rows = _table_eigenvalues(args)
    elif args.kind == "constants":
        rows = _table_constants(args)
    else:
        rows = _table_coefficients(args)
    return {
        "manifest": _manifest(args),
        "kind": args.kind,
        "rows": jsonable(rows),
        "pass": True,
        "elapsed_ms": (time.perf_counter() - t0) * 1e3,
    }


def _csv_cell(value):
    # nested values (complex [re, im] pairs, configs, params) stay JSON-encoded
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return value


def _to_csv(payload: dict) -> str:
    rows = payload.get("samples") or payload.get("rows") or []
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0].keys())
    for row in rows[1:]:
        for k in row:
            if k not in cols:
                cols.append(k)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c, "")) for c in cols])
    return buf.getvalue()


def _emit(payload: dict, args) -> None:
    if args.format == "csv":
        text = _to_csv(payload)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _normalize_argv(argv):
    """Join value-taking flags whose argument starts with '-' (e.g. --n -2..3)
    so argparse does not mistake the value for an option."""
    if argv is None:
        argv = sys.argv[1:]
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--n", "--masses", "--lambda", "--z", "--zt", "--v") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(_normalize_argv(argv))
    try:
        if args.command == "verify":
            payload = _run_verify(args)
        else:
            payload = _run_table(args)
    except ConstraintError as exc:
        json.dump({"error": str(exc), "manifest": _manifest(args)},
                  sys.stderr, indent=2, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    except EcsError as exc:
        json.dump({"error": str(exc), "manifest": _manifest(args)},
                  sys.stderr, indent=2, sort_keys=True)
        sys.stderr.write("\n")
        return 3
    _emit(payload, args)
    return 0 if payload["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
