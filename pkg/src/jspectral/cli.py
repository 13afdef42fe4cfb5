"""Batch command-line front end.

One process, one subcommand, one JSON document (or CSV table) on stdout or
to --out. Defaults: grid_n=1024, tol=1e-8, seed=42, JSON to stdout. The same
configuration and seed produce byte-identical output. Exit codes: 0 success,
2 invalid arguments, 3 numerical non-convergence (message carries the best
residual).

The environment variable JSPECTRAL_OUT_DIR supplies a default directory for
relative --out paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import gtrig, jspec, pcpt, series, snum
from .oper import compose, hardy
from .space import ConvergenceError, Space


def _space_pair(args, q=None):
    dom = Space.uniform(args.grid_n, args.p, args.b)
    cod = Space.uniform(args.grid_n, args.q if q is None else q, args.b)
    return dom, cod


def _emit(args, doc, csv_text=None):
    if args.out_format == "csv":
        if csv_text is None:
            raise SystemExit("this command has no CSV form")
        payload = csv_text
    else:
        payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        path = args.out
        if not os.path.isabs(path):
            path = os.path.join(os.environ.get("JSPECTRAL_OUT_DIR", ""), path)
        with open(path, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _js_doc(js, args):
    return {
        "lambdas": js.lambdas,
        "nus": js.nus,
        "residuals": js.residuals,
        "converged": js.converged,
        "tol": args.tol,
        "grid_n": args.grid_n,
        "seed": args.seed,
        "p": args.p,
        "q": args.q,
    }


def _cmd_jspec(args):
    dom, cod = _space_pair(args)
    T = hardy(dom, cod)
    js = jspec.compute_jspectrum(T, args.levels, tol=args.tol, seed=args.seed,
                                 restarts=args.restarts)
    _emit(args, _js_doc(js, args), js.to_csv())


def _cmd_dual(args):
    dom, cod = _space_pair(args)
    T = hardy(dom, cod)
    js = jspec.dual_jspectrum(T, args.levels, tol=args.tol, seed=args.seed,
                              restarts=args.restarts)
    doc = _js_doc(js, args)
    doc["lambda_match"] = js.meta.get("lambda_match")
    doc["first_dual_vector_dev"] = js.meta.get("first_dual_vector_dev")
    _emit(args, doc, js.to_csv())


def _cmd_series(args):
    dom, cod = _space_pair(args)
    T = hardy(dom, cod)
    tests = series.random_unit_vectors(dom, 20, seed=args.seed)
    ns = list(range(1, args.levels + 1))
    if args.kind == "target":
        js = jspec.compute_jspectrum(T, args.levels, tol=args.tol, seed=args.seed,
                                     restarts=args.restarts)
        rep = series.hilbert_target_series(T, js)
    elif args.kind == "source":
        js = jspec.compute_jspectrum(T, args.levels, tol=args.tol, seed=args.seed,
                                     restarts=args.restarts)
        rep = series.hilbert_source_series(T, js)
    elif args.kind == "linearized":
        rep = series.linearized_series(T, args.levels, tol=args.tol, seed=args.seed,
                                       restarts=args.restarts)
    elif args.kind == "hilbertian":
        mid = Space.uniform(args.grid_n, 2.0, args.b)
        A = hardy(dom, mid)
        B = hardy(mid, cod)
        T = compose(B, A)
        js = jspec.compute_jspectrum(T, args.levels, tol=args.tol, seed=args.seed,
                                     restarts=args.restarts)
        rep = series.hilbertian_series(A, B, js)
    elif args.kind == "double":
        mid = Space.uniform(args.grid_n, 2.0, args.b)
        A = hardy(dom, mid)
        B = hardy(mid, cod)
        T = compose(B, A)
        rep = series.double_series(A, B, args.levels, tol=args.tol, seed=args.seed,
                                   restarts=args.restarts)
        ns = list(range(1, rep.n_terms + 1))
    elif args.kind in ("half-direct", "half-dual"):
        mid = Space.uniform(args.grid_n, 2.0, args.b)
        A = hardy(dom, mid)
        B = hardy(mid, cod)
        T = compose(B, A)
        rep = series.half_series(A, B, "A" if args.kind == "half-direct" else "B",
                                 args.levels, tol=args.tol, seed=args.seed,
                                 restarts=args.restarts)
    else:
        raise SystemExit(2)
    errors = rep.reconstruction_errors(T, tests, ns)
    doc = {
        "kind": rep.kind,
        "lambdas": rep.lambdas,
        "errors": errors,
        "tol": args.tol,
        "grid_n": args.grid_n,
        "seed": args.seed,
    }
    _emit(args, doc, rep.error_table_csv(T, tests, ns))


def _cmd_snum(args):
    dom, cod = _space_pair(args)
    T = hardy(dom, cod)
    js = jspec.compute_jspectrum(T, args.n_max, tol=args.tol, seed=args.seed,
                                 restarts=args.restarts)
    rep = snum.approx_numbers_report(T, args.n_max, js=js, tol=args.tol,
                                     seed=args.seed)
    table = snum.sandwich_check(js, rep["values"])
    doc = {
        "approx": rep["values"],
        "kind": rep["kind"],
        "lambdas": js.lambdas,
        "lower": table.lower,
        "upper": table.upper,
        "passed": table.passed,
        "tol": args.tol,
        "grid_n": args.grid_n,
    }
    _emit(args, doc, table.to_csv())


def _cmd_gtrig(args):
    g = gtrig.GenTrig(args.p, args.q)
    xs = np.linspace(0.0, g.pi_pq / 2.0, args.samples)
    doc = {
        "p": args.p,
        "q": args.q,
        "pi_pq": g.pi_pq,
        "pi_cross_check_rtol": 1e-10,
        "inversion_xtol": 1e-15,
        "x": xs.tolist(),
        "sin_pq": [g.sin(x) for x in xs],
        "cos_pq": [g.cos(x) for x in xs],
    }
    _emit(args, doc, g.table_csv(xs))


def _cmd_pcompact(args):
    if args.demo == "hardy":
        cover, report = pcpt.hardy_qcompact_demo(
            args.p, args.q, n_terms=args.terms, grid_n=args.grid_n, seed=args.seed
        )
        _emit(args, report, cover.to_csv())
    elif args.demo == "sobolev":
        cover, report = pcpt.sobolev_embedding_demo(args.terms, grid_n=args.grid_n,
                                                    seed=args.seed)
        _emit(args, report, cover.to_csv())
    else:
        report = pcpt.ideal_inclusion_demo(grid_n=args.grid_n, seed=args.seed)
        _emit(args, report)


def _cmd_alphap(args):
    rep = series.alpha_p_report(args.p)
    _emit(args, {"alpha_p": rep["alpha_p"], "maximizer": rep["maximizer"],
                 "objective": rep["objective"], "p": args.p,
                 "method": "grid scan (1e4 points) + golden-section refinement"})


def _cmd_konig(args):
    if args.case == "jordan":
        sp = Space.sequence(2, 2.0)
        T = jspec.LinOp(np.array([[0.5, 1.0], [0.0, 0.5]]), sp, sp)
    elif args.case == "diag":
        sp = Space.sequence(3, 2.0)
        T = jspec.LinOp(np.diag([0.9, 0.5, 0.1]), sp, sp)
    else:
        sp = Space.uniform(args.grid_n, 2.0, args.b)
        T = hardy(sp, sp)
    rep = jspec.konig_report(T, args.n, args.k_max, tol=args.tol, seed=args.seed)
    rep["case"] = args.case
    _emit(args, rep)


def _cmd_bilap(args):
    rep = gtrig.bilaplacian_check(args.p, b=args.b, grid_n=args.grid_n,
                                  tol=args.tol, seed=args.seed)
    _emit(args, rep)


def _cmd_hardy_norm(args):
    _emit(args, {
        "norm": gtrig.hardy_norm_formula(args.p, args.b),
        "norm_dual_form": gtrig.hardy_norm_formula(args.p, args.b, "dual"),
        "p": args.p,
        "b": args.b,
    })


def build_parser():
    ap = argparse.ArgumentParser(
        prog="jspectral",
        description="j-eigenvalue laboratory for discretized Hardy-type operators",
    )
    ap.add_argument("--out", default=None, help="output path (default: stdout)")
    ap.add_argument("--format", dest="out_format", choices=("json", "csv"),
                    default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp_, q_default=2.0):
        sp_.add_argument("--p", type=float, default=2.0)
        sp_.add_argument("--q", type=float, default=q_default)
        sp_.add_argument("--b", type=float, default=1.0)
        sp_.add_argument("--grid-n", type=int, default=1024)
        sp_.add_argument("--tol", type=float, default=1e-8)
        sp_.add_argument("--seed", type=int, default=42)
        sp_.add_argument("--restarts", type=int, default=8)

    s = sub.add_parser("jspec", help="deflation j-spectrum of the Hardy operator")
    common(s)
    s.add_argument("--levels", type=int, default=4)
    s.set_defaults(func=_cmd_jspec)

    s = sub.add_parser("dual", help="j-spectrum of the adjoint with duality checks")
    common(s)
    s.add_argument("--levels", type=int, default=4)
    s.set_defaults(func=_cmd_dual)

    s = sub.add_parser("series", help="series representations and reconstruction errors")
    common(s)
    s.add_argument("--kind", choices=("target", "source", "linearized", "hilbertian",
                                      "double", "half-direct", "half-dual"), default="target")
    s.add_argument("--levels", type=int, default=6)
    s.set_defaults(func=_cmd_series)

    s = sub.add_parser("snum", help="approximation numbers and sandwich bounds")
    common(s)
    s.add_argument("--n-max", type=int, default=5)
    s.set_defaults(func=_cmd_snum)

    s = sub.add_parser("gtrig", help="generalized sine/cosine table")
    common(s)
    s.add_argument("--samples", type=int, default=50)
    s.set_defaults(func=_cmd_gtrig)

    s = sub.add_parser("pcompact", help="p-compactness demonstrations")
    common(s)
    s.add_argument("--demo", choices=("hardy", "sobolev", "ideal"), default="hardy")
    s.add_argument("--terms", type=int, default=64)
    s.set_defaults(func=_cmd_pcompact)

    s = sub.add_parser("alphap", help="projection constant alpha_p")
    s.add_argument("--p", type=float, required=True)
    s.set_defaults(func=_cmd_alphap)

    s = sub.add_parser("konig", help="lambda_n(T^k)^(1/k) sequences")
    common(s)
    s.add_argument("--case", choices=("jordan", "diag", "hardy"), default="jordan")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--k-max", type=int, default=20)
    s.set_defaults(func=_cmd_konig)

    s = sub.add_parser("bilap", help="bi-Laplacian extremal check for H*H")
    common(s)
    s.set_defaults(func=_cmd_bilap)

    s = sub.add_parser("hardy-norm", help="closed-form Hardy operator norm")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--b", type=float, default=1.0)
    s.set_defaults(func=_cmd_hardy_norm)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except ConvergenceError as exc:
        res = "" if exc.residual is None else f" (best residual {exc.residual:.3e})"
        print(f"error: numerical non-convergence: {exc}{res}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
