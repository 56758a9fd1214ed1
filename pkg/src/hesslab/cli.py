"""Batch front door: argument parsing, pipeline orchestration, reports.

Subcommands
    matrix-suite   symmetric-function property battery on random matrices
    radial         closed-form radial oracle table
    solve          solve the exterior problem, save a field checkpoint
    monotone       F(t) table with the monotonicity audit
    identities     identity and inequality ledger
    certify        ball certification verdict
    report         aggregate run over a builtin body battery

Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
4 audit violation (an invariant or inequality failed numerically).
All emitted files carry the configuration hash and the final epsilon.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .errors import HesslabError, NewtonStall, PoorFit, TruncationTooClose
from .identities import (
    CERTIFIED_BALL,
    VIOLATED,
    c_formula,
    certify_ball,
    identity_lemma33,
    inequality_ledger,
    pohozaev_lemma34,
)
from .monotone import (
    F_eval,
    ProblemSpec,
    limit_bound,
    monotonicity_audit,
    weights,
    weights_ode_residual,
)
from .radial import RadialSolution, radial_F
from .solver import ExteriorField, solve_exterior
from .surfaces import RevolutionBody
from .symfunc import (
    ConeSpec,
    gamma_cone_contains,
    newton_maclaurin_gap,
    sigma_grad,
    sigma_matrix,
    verify_matrix_identities,
)

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_AUDIT = 4


def _config_hash(args):
    payload = json.dumps(
        {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        default=str,
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _parse_body(args):
    """Builtin body specs: sphere, spheroid:a,b, cosper:amp,freq, or a
    revolution-profile file path prefixed with profile:."""
    src = args.body
    n = args.n
    if src == "sphere":
        return RevolutionBody.sphere(args.R, n=n)
    if src.startswith("spheroid:"):
        a, b = (float(v) for v in src.split(":", 1)[1].split(","))
        return RevolutionBody.spheroid(a, b, n=n)
    if src.startswith("cosper:"):
        amp, freq = src.split(":", 1)[1].split(",")
        return RevolutionBody.cos_perturbed(
            n=n, amplitude=float(amp), frequency=int(freq), R=args.R
        )
    if src.startswith("profile:"):
        return RevolutionBody.load_profile(src.split(":", 1)[1])
    raise ValueError(
        f"unknown body {src!r}; expected sphere, spheroid:a,b, "
        "cosper:amp,freq or profile:path"
    )


def _build_spec(args):
    errors = []
    try:
        spec = ProblemSpec(
            n=args.n,
            k=args.k,
            a=args.a,
            C3=args.C3,
            C4=args.C4,
            eps_schedule=tuple(args.eps_schedule),
            cnk=args.cnk,
        )
    except ValueError as exc:
        errors.append(str(exc))
        spec = None
    if errors:
        print(json.dumps({"config_errors": errors}), file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return spec


def _header(args):
    return f"# config={_config_hash(args)} eps_min={min(args.eps_schedule):g}"


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _t_grid(args, spec=None):
    if args.t_grid:
        return np.asarray([float(v) for v in args.t_grid.split(",")])
    return np.linspace(-0.9, -0.25, 8)


def _solve(args, spec, body):
    try:
        return solve_exterior(
            body,
            spec,
            schedule=spec.eps_schedule,
            R_out=args.R_out,
            N_s=args.N_s,
            N_theta=args.N_theta,
        )
    except (NewtonStall, TruncationTooClose, PoorFit) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_SOLVER)
    except ValueError as exc:
        print(json.dumps({"config_errors": [str(exc)]}), file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


# -- subcommands -------------------------------------------------------


def cmd_matrix_suite(args):
    rng = np.random.default_rng(args.seed)
    worst_identity = 0.0
    worst_grad = 0.0
    worst_nm = 0.0
    trials = args.trials
    for _ in range(trials):
        n = int(rng.integers(3, 7))
        A = rng.standard_normal((n, n))
        A = (A + A.T) / 2.0
        k = int(rng.integers(1, n))
        worst_identity = max(worst_identity, max(verify_matrix_identities(A, k)))

        # finite-difference probe of one random gradient entry
        i, j = rng.integers(0, n, size=2)
        h = 1e-6
        Ap, Am = A.copy(), A.copy()
        Ap[i, j] += h
        Ap[j, i] = Ap[i, j]
        Am[i, j] -= h
        Am[j, i] = Am[i, j]
        fd = (sigma_matrix(Ap, k) - sigma_matrix(Am, k)) / (2 * h)
        g = sigma_grad(A, k)
        analytic = g[i, j] + g[j, i] if i != j else g[i, i]
        worst_grad = max(worst_grad, abs(fd - analytic) / max(1.0, abs(fd)))

        lam = np.abs(rng.standard_normal(n)) + 0.1
        ell = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, ell + 1))
        worst_nm = min(worst_nm, newton_maclaurin_gap(lam, m, ell))
    ok = worst_identity <= 1e-10 and worst_grad <= 1e-5 and worst_nm >= -1e-12
    print(_header(args))
    print(f"trials={trials} identity_residual={worst_identity:.3e} "
          f"gradient_fd_error={worst_grad:.3e} newton_maclaurin_min={worst_nm:.3e}")
    print("matrix-suite:", "ok" if ok else "VIOLATION")
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_radial(args):
    spec = _build_spec(args)
    sol = RadialSolution(n=args.n, k=args.k, R=args.R)
    ts = _t_grid(args)
    out = _outdir(args)
    rows = []
    for t in ts:
        c1, c2 = weights(t, spec)
        rows.append((t, float(c1), float(c2), radial_F(sol, t, spec)))
    limit = limit_bound(spec, sol.rho)
    path = out / "radial.csv"
    with open(path, "w") as fh:
        fh.write(_header(args) + "\n")
        fh.write("t,C1,C2,F,limit\n")
        for t, c1, c2, F in rows:
            fh.write(f"{t:.12g},{c1:.12g},{c2:.12g},{F:.12g},{limit:.12g}\n")
    Fs = np.array([r[3] for r in rows])
    spread = float(Fs.max() - Fs.min())
    print(_header(args))
    print(f"R={args.R} rho={sol.rho:.12g} F_mean={Fs.mean():.12g} "
          f"F_spread={spread:.3e} limit={limit:.12g}")
    print(f"wrote {path}")
    return EXIT_OK if spread <= 1e-10 * max(1.0, abs(Fs.mean())) else EXIT_AUDIT


def cmd_solve(args):
    spec = _build_spec(args)
    try:
        body = _parse_body(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"config_errors": [str(exc)]}), file=sys.stderr)
        return EXIT_CONFIG
    field = _solve(args, spec, body)
    out = _outdir(args)
    path = out / "field.txt"
    field.save_checkpoint(path)
    with open(path) as fh:
        content = fh.read()
    with open(path, "w") as fh:
        fh.write(content.replace("\n", f" {_header(args)[2:]}\n", 1))
    print(_header(args))
    print(f"rho_hat={field.rho_hat:.8g} residual={field.residual_norm:.3e} "
          f"margin={field.admissible:.3e}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_monotone(args):
    spec = _build_spec(args)
    try:
        body = _parse_body(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"config_errors": [str(exc)]}), file=sys.stderr)
        return EXIT_CONFIG
    field = _solve(args, spec, body)
    ts = _t_grid(args, spec)
    if args.tol_mono is not None:
        tol = args.tol_mono
    else:
        # Richardson estimate from a half-resolution companion solve
        coarse_args = argparse.Namespace(**vars(args))
        coarse_args.N_s = max(32, args.N_s // 2)
        coarse_args.N_theta = (
            None if args.N_theta is None else max(16, args.N_theta // 2)
        )
        coarse = _solve(coarse_args, spec, body)
        Ff = np.array([F_eval(field, t, spec).F for t in ts])
        Fc = np.array([F_eval(coarse, t, spec).F for t in ts])
        tol = float(np.max(np.abs(Ff - Fc)) / 3.0)
    report = monotonicity_audit(field, spec, tol, t_grid=ts)
    out = _outdir(args)
    path = out / "monotone.csv"
    with open(path, "w") as fh:
        fh.write(_header(args) + "\n")
        fh.write("t,C1,C2,intHk,intHk1,F,violation,limit_gap\n")
        prev = None
        for t, F in zip(report.t, report.F):
            res = F_eval(field, t, spec)
            viol = max(F - prev, 0.0) if prev is not None else 0.0
            prev = F
            fh.write(
                f"{t:.12g},{res.C1:.12g},{res.C2:.12g},{res.int_hk:.12g},"
                f"{res.int_hk1:.12g},{F:.12g},{viol:.3e},"
                f"{F - report.limit_value:.12g}\n"
            )
    plot = out / "monotone_plot.dat"
    with open(plot, "w") as fh:
        fh.write(_header(args) + "\n")
        for t, F in zip(report.t, report.F):
            fh.write(f"{t:.12g} {F:.12g}\n")
    print(_header(args))
    print(f"tol_mono={report.tol_mono:.3e} upward={report.upward_violation:.3e} "
          f"limit_gap_min={report.limit_gap_min:.3e} "
          f"constant={report.constant_flag}")
    print(f"wrote {path} and {plot}")
    ok = report.non_increasing and report.limit_respected
    return EXIT_OK if ok else EXIT_AUDIT


def _ledger_rows(solution, body, spec):
    rows = []
    if spec.k >= 2:
        rows.append(identity_lemma33(solution, body))
        rows.append(pohozaev_lemma34(solution, body))
    rows.extend(inequality_ledger(solution, body, spec))
    return rows


def cmd_identities(args):
    spec = _build_spec(args)
    try:
        body = _parse_body(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"config_errors": [str(exc)]}), file=sys.stderr)
        return EXIT_CONFIG
    if args.body == "sphere":
        solution = RadialSolution(n=args.n, k=args.k, R=args.R)
    else:
        solution = _solve(args, spec, body)
    rows = _ledger_rows(solution, body, spec)
    out = _outdir(args)
    path = out / "ledger.csv"
    with open(path, "w") as fh:
        fh.write(_header(args) + "\n")
        fh.write("name,lhs,rhs,gap,verdict,tolerance\n")
        for e in rows:
            fh.write(
                f"{e.name},{e.lhs:.12g},{e.rhs:.12g},"
                f"{e.residual_or_gap:.12g},{e.verdict},{e.tolerance:g}\n"
            )
    print(_header(args))
    for e in rows:
        print(f"{e.name}: {e.verdict} (gap {e.residual_or_gap:.3e})")
    print(f"wrote {path}")
    bad = any(e.verdict == VIOLATED for e in rows)
    return EXIT_AUDIT if bad else EXIT_OK


def cmd_certify(args):
    spec = _build_spec(args)
    try:
        body = _parse_body(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"config_errors": [str(exc)]}), file=sys.stderr)
        return EXIT_CONFIG
    if args.body == "sphere":
        solution = RadialSolution(n=args.n, k=args.k, R=args.R)
    else:
        solution = _solve(args, spec, body)
    report = certify_ball(solution, body, spec)
    print(_header(args))
    print(f"verdict={report.verdict} gradient_spread={report.gradient_spread:.3e} "
          f"profile_deviation={report.profile_deviation:.3e} "
          f"squeeze_rel={report.squeeze_rel:.3e}")
    return EXIT_OK


def cmd_report(args):
    bodies = ["sphere", "spheroid:1.2,1", "cosper:0.05,2"]
    out = _outdir(args)
    status = EXIT_OK
    lines = [_header(args)]
    for src in bodies:
        sub = argparse.Namespace(**vars(args))
        sub.body = src
        spec = _build_spec(sub)
        try:
            body = _parse_body(sub)
        except (ValueError, OSError) as exc:
            print(json.dumps({"config_errors": [str(exc)]}), file=sys.stderr)
            return EXIT_CONFIG
        if src == "sphere":
            solution = RadialSolution(n=sub.n, k=sub.k, R=sub.R)
        else:
            solution = _solve(sub, spec, body)
        cert = certify_ball(solution, body, spec)
        rows = inequality_ledger(solution, body, spec)
        bad = [e.name for e in rows if e.verdict == VIOLATED]
        if bad:
            status = EXIT_AUDIT
        lines.append(
            f"{src}: verdict={cert.verdict} spread={cert.gradient_spread:.3e} "
            f"violations={','.join(bad) if bad else 'none'}"
        )
    path = out / "report.txt"
    path.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {path}")
    return status


# -- parser ------------------------------------------------------------


def _add_common(p, need_body=False):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--C3", type=float, default=1.0)
    p.add_argument("--C4", type=float, default=0.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--cnk", type=float, default=1.0)
    p.add_argument("--eps-schedule", type=lambda s: [float(v) for v in s.split(",")],
                   default=[0.5, 0.1, 0.02], dest="eps_schedule")
    p.add_argument("--N-s", type=int, default=128, dest="N_s")
    p.add_argument("--N-theta", type=int, default=None, dest="N_theta")
    p.add_argument("--R-out", type=float, default=None, dest="R_out")
    p.add_argument("--t-grid", type=str, default=None, dest="t_grid")
    p.add_argument("--tol-mono", type=float, default=None, dest="tol_mono")
    p.add_argument("--out", type=str, default="hesslab-out")
    if need_body:
        p.add_argument("--body", type=str, default="sphere")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hesslab",
        description="Exterior k-Hessian potential laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix-suite", help="symmetric-function battery")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-schedule", type=lambda s: [float(v) for v in s.split(",")],
                   default=[0.5, 0.1, 0.02], dest="eps_schedule")
    p.set_defaults(func=cmd_matrix_suite)

    p = sub.add_parser("radial", help="radial oracle table")
    _add_common(p)
    p.set_defaults(func=cmd_radial)

    p = sub.add_parser("solve", help="solve and save a field checkpoint")
    _add_common(p, need_body=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("monotone", help="F(t) audit table")
    _add_common(p, need_body=True)
    p.set_defaults(func=cmd_monotone)

    p = sub.add_parser("identities", help="identity and inequality ledger")
    _add_common(p, need_body=True)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("certify", help="ball certification verdict")
    _add_common(p, need_body=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("report", help="aggregate body battery")
    _add_common(p, need_body=True)
    p.set_defaults(func=cmd_report)
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "a", None) is None and args.command != "matrix-suite":
        args.a = float(args.k + 1)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except HesslabError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
