"""Batch experiment front end.

Eight subcommands, each a single deterministic experiment that writes
result.json (byte-stable for fixed command, params, and seed), manifest.json
(version, seed, timing — the only place timing lives), and optional CSV/JSONL
artifacts. Exit status: 0 all asserted checks pass, 1 an assertion failed,
2 usage or parameter error (nothing written).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, reporting
from .bubbles import (
    BubbleParams,
    ball_robin_residual,
    halfspace_residual,
    verify_fullspace,
)
from .cones import (
    make_sigma_k_operator,
    homogenize,
    sample_cone_directions,
    sigma_all,
    validate_operator,
)
from .conformal import (
    Invert,
    MoebiusMap,
    Scale,
    Translate,
    conjugation_residual,
)
from .errors import ConformaError, DomainError
from .fields import BubbleField, ConstantField, ball, finite_difference
from .moving_sphere import (
    SweepConfig,
    alpha_invariant,
    critical_radius,
    gradient_bound_check,
    h_lemma_check,
    harnack_constant,
    harnack_product,
)
from .radial import (
    bubble_deviation,
    matched_bubble,
    mu_star,
    profile_max_unit_residual,
    shoot,
)
from .sampling import ball_points, make_rng, shell_points
from .yamabe import c_star, continuation

SUP_TOL_RADIAL = 1e-5
R1_TOL = 1e-10
R2_TOL = 1e-12


def _parse_word(text: str) -> MoebiusMap:
    """Parse 'translate:0.3,0,-0.1;scale:2;invert' into a Mobius word."""
    gens = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if part == "invert":
            gens.append(Invert())
            continue
        if ":" not in part:
            raise DomainError(f"bad generator {part!r}")
        head, payload = part.split(":", 1)
        if head == "translate":
            gens.append(Translate(tuple(float(c) for c in payload.split(","))))
        elif head == "scale":
            gens.append(Scale(float(payload)))
        else:
            raise DomainError(f"unknown generator {head!r}")
    if not gens:
        raise DomainError("empty Mobius word")
    return MoebiusMap(tuple(gens))


# ---------------------------------------------------------------------------
# command handlers: each returns (result_dict, passed, artifacts)
# artifacts: list of (filename, kind, payload); kind in {"csv", "jsonl"}


def _cmd_validate_operator(args):
    op = make_sigma_k_operator(args.n, args.k)
    report = validate_operator(op, sample_count=args.samples, seed=args.seed)
    rd = report.to_json_dict()
    passed = all(entry["pass"] for entry in rd.values())
    result = {
        "operator": op.name,
        "n": args.n,
        "k": args.k,
        "samples": args.samples,
        "checks": rd,
    }
    return result, passed, []


def _matched_beta(n: int, k: int, a: float) -> float:
    op = make_sigma_k_operator(n, k)
    return 0.5 * mu_star(op) * a * a


def _cmd_verify_liouville(args):
    n, k, a = args.n, args.k, args.a
    family = args.family
    if family == "fullspace":
        beta = args.beta if args.beta is not None else _matched_beta(n, k, a)
        p = BubbleParams(n=n, a=a, beta=beta)
        op = make_sigma_k_operator(n, k)
        res = verify_fullspace(op, p, sample_count=args.samples, seed=args.seed)
    elif family == "halfspace":
        beta = args.beta if args.beta is not None else 1.0
        center = [0.0] * n
        center[-1] = args.xn
        p = BubbleParams(n=n, a=a, beta=beta, center=np.asarray(center))
        c = args.c if args.c is not None else (n - 2.0) / a * beta * args.xn
        res = halfspace_residual(p, c, sample_count=args.samples, seed=args.seed)
    elif family == "ball":
        beta = args.beta if args.beta is not None else 1.0
        p = BubbleParams(n=n, a=a, beta=beta)
        c = args.c if args.c is not None else -0.5 * (n - 2.0) * (1.0 - beta) / a
        res = ball_robin_residual(p, c, sample_count=args.samples, seed=args.seed)
    else:
        raise DomainError(f"unknown family {family!r}")
    checks = {
        "r1": {"pass": res.r1 <= R1_TOL, "value": res.r1, "tol": R1_TOL},
        "r2": {"pass": res.r2 <= R2_TOL, "value": res.r2, "tol": R2_TOL},
    }
    result = {
        "family": family,
        "bubble": p.to_json_dict(),
        "samples_used": res.samples_used,
        "checks": checks,
    }
    return result, checks["r1"]["pass"] and checks["r2"]["pass"], []


def _cmd_radial_shoot(args):
    op = make_sigma_k_operator(args.n, args.k)
    profile = shoot(op, args.v0, h=args.h, r_max=args.r_max)
    params = matched_bubble(op, args.v0)
    sup_error = bubble_deviation(profile, params)
    unit_res = profile_max_unit_residual(op, profile)
    passed = profile.status == "ok" and sup_error <= args.sup_tol
    result = {
        "profile": profile.to_json_dict(),
        "matched_bubble": params.to_json_dict(),
        "sup_error": sup_error,
        "sup_tol": args.sup_tol,
        "max_unit_residual": unit_res,
        "pass": passed,
    }
    rows = list(
        zip(
            profile.r.tolist(),
            profile.v.tolist(),
            profile.vp.tolist(),
            profile.vpp.tolist(),
        )
    )
    return result, passed, [("profile.csv", "csv", (("r", "v", "vp", "vpp"), rows))]


def _ring_centers(n: int, radius: float, count: int) -> np.ndarray:
    """Origin plus (count-1) points on a planar ring of the given radius."""
    xs = [np.zeros(n)]
    for j in range(count - 1):
        x = np.zeros(n)
        ang = 2.0 * math.pi * j / (count - 1)
        x[0] = radius * math.cos(ang)
        x[1] = radius * math.sin(ang)
        xs.append(x)
    return np.asarray(xs)


def _cmd_moving_sphere(args):
    if args.task == "lemmas":
        return _cmd_appendix_suite(args)
    n = args.n
    u = BubbleField(
        BubbleParams(n=n, a=args.a, beta=args.beta), domain=ball(args.domain_radius)
    )
    rng = make_rng(args.seed)
    pts = ball_points(rng, n, args.check_count, radius=args.domain_radius)
    cfg = SweepConfig(
        lambda_min=args.lambda_min,
        lambda_max=args.lambda_max,
        check_points=pts,
        lambda_steps=args.lambda_steps,
    )
    if args.center_count < 2:
        raise DomainError("center-count must be at least 2")
    origin = critical_radius(u, np.zeros(n), cfg)
    expected = args.beta ** -0.5
    centers = _ring_centers(n, args.center_radius, args.center_count)
    alpha = alpha_invariant(u, centers, cfg)
    alpha_expected = (args.a / args.beta) ** (0.5 * (n - 2))
    checks = {
        "lambda_bar_origin": {
            "pass": origin.flag == ""
            and abs(origin.lambda_bar - expected) <= 1e-3 * expected,
            "value": origin.lambda_bar,
            "expected": expected,
            "flag": origin.flag,
        },
        "alpha_spread": {
            "pass": alpha.spread <= 1e-2 * alpha_expected,
            "value": alpha.spread,
            "alpha_expected": alpha_expected,
        },
    }
    passed = all(c["pass"] for c in checks.values())
    result = {
        "n": n,
        "a": args.a,
        "beta": args.beta,
        "alpha": alpha.to_json_dict(),
        "checks": checks,
    }
    artifacts = []
    if args.emit_sweep_csv:
        header = tuple(f"x{i}" for i in range(n)) + ("lambda_bar", "alpha")
        rows = []
        for x, val in zip(centers, alpha.values):
            cr = critical_radius(u, x, cfg)
            rows.append(tuple(x.tolist()) + (cr.lambda_bar, val))
        artifacts.append(("sweep.csv", "csv", (header, rows)))
    return result, passed, artifacts


def _h_catalog(rng, count: int):
    """Deterministic catalog of 1-D test functions (value, derivative, alpha, a).

    Mix of decaying bubble traces (pass), constants (pass), off-center or
    tight bubbles (may fail the hypothesis), and exponentials (fail both).
    """
    out = []
    for i in range(count):
        kind = i % 5
        if kind == 0:
            alpha = 1.0 + float(rng.integers(1, 4))
            a = 0.25 + 0.5 * float(rng.random())

            def h(s, alpha=alpha):
                return (1.0 + s * s) ** (-0.5 * alpha)

            def hp(s, alpha=alpha):
                return -alpha * s * (1.0 + s * s) ** (-0.5 * alpha - 1.0)

        elif kind == 1:
            alpha = float(rng.integers(0, 3))
            a = 0.5 + float(rng.random())
            c = 0.5 + 2.0 * float(rng.random())

            def h(s, c=c):
                return c + 0.0 * np.asarray(s)

            def hp(s):
                return 0.0 * np.asarray(s)

        elif kind == 2:
            alpha = 1.0 + float(rng.integers(1, 4))
            beta = 2.0 + 6.0 * float(rng.random())
            a = 0.6 + 0.6 * float(rng.random())  # beta too tight for this a

            def h(s, alpha=alpha, beta=beta):
                return (1.0 + beta * s * s) ** (-0.5 * alpha)

            def hp(s, alpha=alpha, beta=beta):
                return -alpha * beta * s * (1.0 + beta * s * s) ** (
                    -0.5 * alpha - 1.0
                )

        elif kind == 3:
            alpha = 1.0 + 2.0 * float(rng.random())
            a = 0.4 + 0.4 * float(rng.random())
            m = -0.5 + float(rng.random())  # off-center trace

            def h(s, alpha=alpha, m=m):
                return (1.0 + (s - m) ** 2) ** (-0.5 * alpha)

            def hp(s, alpha=alpha, m=m):
                return -alpha * (s - m) * (1.0 + (s - m) ** 2) ** (
                    -0.5 * alpha - 1.0
                )

        else:
            gamma = 2.0 + 8.0 * float(rng.random())
            alpha = 1.0 + float(rng.integers(1, 3))
            a = 0.5 + 0.5 * float(rng.random())

            def h(s, gamma=gamma):
                return np.exp(gamma * np.asarray(s, dtype=float))

            def hp(s, gamma=gamma):
                return gamma * np.exp(gamma * np.asarray(s, dtype=float))

        out.append((h, hp, alpha, a))
    return out


def _cmd_appendix_suite(args):
    rng = make_rng(args.seed)
    catalog = _h_catalog(rng, args.h_count)
    implication_failures = 0
    hyp_passes = 0
    concl_passes = 0
    for h, hp, alpha, a in catalog:
        rep = h_lemma_check(h, hp, alpha, a, sample_density=args.density)
        hyp_passes += int(rep.hypothesis_pass)
        concl_passes += int(rep.conclusion_pass)
        if not rep.implication_holds():
            implication_failures += 1

    grad_reports = []
    grad_ok = True
    fields = [
        ("bubble_beta1", BubbleField(BubbleParams(3, 1.0, 1.0), domain=ball(9.0)), 0.5),
        (
            "bubble_beta4",
            BubbleField(BubbleParams(3, 1.0, 4.0), domain=ball(9.0)),
            0.25,
        ),
        ("constant", ConstantField(3, 2.0, domain=ball(9.0)), 1.0),
    ]
    for name, u, a in fields:
        rep = gradient_bound_check(u, a, seed=args.seed)
        entry = {"field": name, "a": a}
        entry.update(rep.to_json_dict())
        grad_reports.append(entry)
        if rep.vacuous or not rep.conclusion_pass:
            grad_ok = False

    checks = {
        "no_implication_failures": {
            "pass": implication_failures == 0,
            "failures": implication_failures,
            "h_count": args.h_count,
            "hypothesis_passes": hyp_passes,
            "conclusion_passes": concl_passes,
        },
        "gradient_bound_on_catalog": {"pass": grad_ok, "reports": grad_reports},
    }
    passed = all(c["pass"] for c in checks.values())
    result = {"task": "lemmas", "checks": checks}
    return result, passed, []


def _cmd_harnack(args):
    n = args.n
    a = math.sqrt(2.0 * n * args.beta)  # sigma_1(lam(A^u)) = 1 normalization
    u = BubbleField(
        BubbleParams(n=n, a=a, beta=args.beta), domain=ball(3.0 * args.R)
    )
    rep = harnack_product(
        u, args.R, args.delta, n, sample_count=args.samples, seed=args.seed
    )
    checks = {
        "product_bound": {"pass": rep.passed, "P": rep.P, "B": rep.B},
        "rescaling_exactness": {
            "pass": rep.rescaling_exactness <= 1e-10,
            "value": rep.rescaling_exactness,
        },
    }
    passed = all(c["pass"] for c in checks.values())
    result = {
        "n": n,
        "R": args.R,
        "delta": args.delta,
        "beta": args.beta,
        "C_n": harnack_constant(n),
        "report": rep.to_json_dict(),
        "checks": checks,
    }
    return result, passed, []


def _cmd_homogenize(args):
    if not args.op.startswith("sigma"):
        raise DomainError(f"unknown operator {args.op!r} (expected sigmaK)")
    try:
        k = int(args.op[len("sigma"):])
    except ValueError as exc:
        raise DomainError(f"unknown operator {args.op!r}") from exc
    n = args.n
    op = make_sigma_k_operator(n, k)
    deg1 = homogenize(op)
    rng = make_rng(args.seed)
    lams = sample_cone_directions(rng, n, args.samples)

    gap = 0.0
    for lam in lams:
        target = sigma_all(lam)[k - 1] ** (1.0 / k)
        gap = max(gap, abs(deg1.f(lam) - target))

    deg_gap = 0.0
    for lam in lams[: min(len(lams), 100)]:
        base = deg1.f(lam)
        for s in (0.5, 2.0, 7.3):
            deg_gap = max(deg_gap, abs(deg1.f(s * lam) - s * base) / (s * base))

    conc_worst = -math.inf
    pairs = min(args.triples, len(lams) - 1)
    for i in range(pairs):
        lam, mu = lams[i], lams[i + 1]
        mid = deg1.f(0.5 * (lam + mu))
        conc_worst = max(conc_worst, 0.5 * (deg1.f(lam) + deg1.f(mu)) - mid)

    checks = {
        "closed_form_gap": {"pass": gap <= 1e-10, "value": gap, "tol": 1e-10},
        "degree_one": {"pass": deg_gap <= 1e-9, "value": deg_gap, "tol": 1e-9},
        "midpoint_concavity": {
            "pass": conc_worst <= 1e-9,
            "worst": conc_worst,
            "pairs": pairs,
        },
    }
    passed = all(c["pass"] for c in checks.values())
    result = {"operator": op.name, "n": n, "k": k, "samples": args.samples,
              "checks": checks}
    return result, passed, []


def _cmd_solve_yamabe(args):
    op = make_sigma_k_operator(args.n, args.k)
    res = continuation(
        op, args.L, args.N, t_steps=args.t_steps, tol=args.tol, scheme=args.scheme
    )
    result = res.to_json_dict()
    passed = res.status == "ok"
    if passed and op.homogeneous_degree == 1.0:
        cs = c_star(op)
        dev = float(np.max(np.abs(res.final.values - cs)))
        result["c_star"] = cs
        result["constant_branch_deviation"] = dev
    artifacts = [
        (
            "trace.jsonl",
            "jsonl",
            [r.to_json_dict() for r in res.records],
        )
    ]
    if res.final is not None:
        rows = list(zip(res.final.nodes().tolist(), res.final.values.tolist()))
        artifacts.append(("grid.csv", "csv", (("t_node", "u"), rows)))
    return result, passed, artifacts


def _cmd_conjugation_test(args):
    n = args.n
    u = BubbleField(BubbleParams(n=n, a=args.a, beta=args.beta))
    if args.mode == "fd":
        u = finite_difference(u, h=args.h, order=2)
        tol = 1e-4
    else:
        tol = 1e-8
    psi = _parse_word(args.word)
    rng = make_rng(args.seed)
    pts = shell_points(rng, n, args.samples, 0.6, 1.4)
    res = conjugation_residual(u, psi, pts)
    checks = {
        "eigenvalue_conjugation": {"pass": res <= tol, "value": res, "tol": tol}
    }
    result = {
        "n": n,
        "mode": args.mode,
        "word": args.word,
        "samples": args.samples,
        "checks": checks,
    }
    return result, checks["eigenvalue_conjugation"]["pass"], []


# ---------------------------------------------------------------------------
# parser and driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conforma",
        description="Desk-scale checks for conformally invariant curvature equations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output-dir", default=".", help="artifact directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv", "both"), default="json")

    p = sub.add_parser("validate-operator", help="structural checks on (f, cone)")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(handler=_cmd_validate_operator)

    p = sub.add_parser("verify-liouville", help="bubble residuals for the rigidity families")
    common(p)
    p.add_argument("--family", choices=("fullspace", "halfspace", "ball"),
                   default="fullspace")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--xn", type=float, default=0.7)
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(handler=_cmd_verify_liouville)

    p = sub.add_parser("radial-shoot", help="integrate the radial profile, compare to the bubble")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--r-max", type=float, default=0.9)
    p.add_argument("--sup-tol", type=float, default=SUP_TOL_RADIAL)
    p.set_defaults(handler=_cmd_radial_shoot)

    p = sub.add_parser("moving-sphere", help="critical-radius sweeps or interval-lemma suite")
    common(p)
    p.add_argument("--task", choices=("sweep", "lemmas"), default="sweep")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--domain-radius", type=float, default=8.0)
    p.add_argument("--lambda-min", type=float, default=0.04)
    p.add_argument("--lambda-max", type=float, default=4.0)
    p.add_argument("--lambda-steps", type=int, default=256)
    p.add_argument("--check-count", type=int, default=4096)
    p.add_argument("--center-count", type=int, default=9)
    p.add_argument("--center-radius", type=float, default=0.3)
    p.add_argument("--emit-sweep-csv", action="store_true")
    p.add_argument("--h-count", type=int, default=50, help="lemmas task: catalog size")
    p.add_argument("--density", type=int, default=64, help="lemmas task: grid density")
    p.set_defaults(handler=_cmd_moving_sphere)

    p = sub.add_parser("harnack", help="sup-inf product against the explicit constant")
    common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=4096)
    p.set_defaults(handler=_cmd_harnack)

    p = sub.add_parser("homogenize", help="degree-1 normalization checks")
    common(p)
    p.add_argument("--op", default="sigma2", help="sigmaK, e.g. sigma2")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--triples", type=int, default=500)
    p.set_defaults(handler=_cmd_homogenize)

    p = sub.add_parser("solve-yamabe", help="homotopy continuation on the product manifold")
    common(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--t-steps", type=int, default=11)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--scheme", choices=("spectral", "fd4"), default="spectral")
    p.set_defaults(handler=_cmd_solve_yamabe)

    p = sub.add_parser("conjugation-test", help="eigenvalue conjugation under a Mobius word")
    common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--word", default="translate:0.3,-0.1,0.2;scale:1.7;invert")
    p.add_argument("--mode", choices=("analytic", "fd"), default="analytic")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(handler=_cmd_conjugation_test)

    return parser


def _args_digest(args) -> dict:
    skip = {"handler", "command", "output_dir", "format"}
    out = {}
    for key in sorted(vars(args)):
        if key not in skip:
            out[key] = getattr(args, key)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        result, passed, artifacts = args.handler(args)
    except ConformaError as exc:
        # parameter-shape problems are usage errors: nothing is written
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t0

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    payload = {
        "command": args.command,
        "seed": args.seed,
        "params": _args_digest(args),
        "result": result,
        "pass": passed,
    }
    reporting.write_json(out_dir / "result.json", payload)
    reporting.write_json(
        out_dir / "manifest.json",
        {
            "version": __version__,
            "command": args.command,
            "seed": args.seed,
            "timing_seconds": elapsed,
        },
    )
    for name, kind, payload_ in artifacts:
        if kind == "csv" and (args.format in ("csv", "both") or name == "sweep.csv"):
            header, rows = payload_
            reporting.write_csv(out_dir / name, header, rows)
        elif kind == "jsonl":
            with open(out_dir / name, "w", newline="") as fh:
                for rec in payload_:
                    fh.write(reporting.dumps_json(rec))

    if not passed:
        print(f"FAIL: {args.command} (see {out_dir / 'result.json'})", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
