"""Command-line interface.

Subcommands:

* ``bounds-eval``   evaluate one named bound quantity at a point
* ``bounds-table``  tabulate the solution-independent gradient-estimate
                    right-hand sides over a time range
* ``kernel-eval``   print the log-derivative jet of a space's kernel
* ``verify``        run a certification check and report pass/fail
* ``entropy``       trace an entropy functional over a time range
* ``compare``       per-node slack of every gradient estimate side by side

Exit codes: 0 all checks pass, 1 at least one violation, 2 usage error,
3 numerical failure.  Output is deterministic: the same argv (and seed)
produces byte-identical bytes; floats are serialized with 17 significant
digits so 64-bit values round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import ContractError, NumericalFailure
from . import bounds as B
from . import certify as C
from . import entropy as E
from . import kernels as K
from . import spaces as SP

EXIT_PASS = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def fmt(value) -> str:
    """17-significant-digit decimal form (exact round-trip for 64-bit floats)."""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def json_text(obj) -> str:
    """JSON with deterministic key order and 17g floats (nan/inf become null)."""
    def emit(node):
        if isinstance(node, dict):
            items = ", ".join(f"{json.dumps(str(k))}: {emit(v)}"
                              for k, v in sorted(node.items()))
            return "{" + items + "}"
        if isinstance(node, (list, tuple)):
            return "[" + ", ".join(emit(v) for v in node) + "]"
        if isinstance(node, bool):
            return "true" if node else "false"
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        if isinstance(node, (float, np.floating)):
            x = float(node)
            return format(x, ".17g") if math.isfinite(x) else "null"
        if node is None:
            return "null"
        return json.dumps(str(node))
    return emit(obj)


def parse_space(text: str) -> SP.ModelSpace:
    text = text.strip().lower()
    if text.startswith("euclidean"):
        return SP.euclidean(int(text[len("euclidean"):]))
    if text.startswith("e") and text[1:].isdigit():
        return SP.euclidean(int(text[1:]))
    if text in ("h2", "h3"):
        return SP.hyperbolic(int(text[1]))
    if text.startswith("h") and "-k" in text:
        dim, kk = text[1:].split("-k")
        return SP.hyperbolic(int(dim), float(kk))
    if text == "circle":
        return SP.circle()
    if text.startswith("circle:"):
        return SP.circle(float(text.split(":", 1)[1]))
    if text.startswith("torus:"):
        return SP.flat_torus(float(p) for p in text.split(":", 1)[1].split("x"))
    raise ContractError(
        f"unknown space {text!r} (use e<n>, h2, h3, circle[:L], torus:L1xL2...)")


def parse_t_range(text: str) -> np.ndarray:
    """a:b:steps -> geometric grid with the given number of steps."""
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError as exc:
        raise ContractError(f"bad range {text!r}, expected a:b:steps") from exc
    if not (0 < a < b and steps >= 2):
        raise ContractError("need 0 < a < b and steps >= 2")
    return np.geomspace(a, b, steps)


class _Output:
    def __init__(self, path):
        self._chunks = []
        self._path = path

    def line(self, text=""):
        self._chunks.append(text + "\n")

    def finish(self):
        data = "".join(self._chunks)
        if self._path:
            with open(self._path, "w") as fh:
                fh.write(data)
        else:
            sys.stdout.write(data)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

QUANTITIES = (
    "main-alpha", "main-phi", "linearized-alpha", "linearized-phi",
    "li-yau-rhs", "davies-rhs", "hamilton-rhs",
    "kernel-lower-main", "kernel-lower-linearized", "dm-h",
    "monotone-weight", "t-tilde", "s", "phi-accum",
    "sinh-defect", "linearized-margin",
)


def _quantity_value(args) -> float:
    name, n, k, t = args.estimate, args.n, args.k, args.t
    if name in ("main-alpha", "main-phi", "linearized-alpha", "linearized-phi"):
        variant, part = name.rsplit("-", 1)
        pair = B.alpha_phi(variant, n, k, t)
        return pair.alpha if part == "alpha" else pair.phi
    if name in ("li-yau-rhs", "davies-rhs"):
        if args.alpha is None:
            raise ContractError(f"{name} needs --alpha")
        denom = 2.0 if name == "li-yau-rhs" else 4.0
        return (n * args.alpha ** 2 * k / (denom * (args.alpha - 1.0))
                + n * args.alpha ** 2 / (2.0 * t))
    if name == "hamilton-rhs":
        return math.exp(4.0 * k * t) * n / (2.0 * t)
    if name in ("kernel-lower-main", "kernel-lower-linearized"):
        return B.kernel_lower_bound(name.rsplit("-", 1)[1], n, k, args.d, t)
    if name == "dm-h":
        return B.dm_h(n, args.K, args.d, t)
    if name == "monotone-weight":
        return B.monotone_weight(n, k, t)
    if name in ("t-tilde", "s", "phi-accum"):
        kin = B.lyh_kinematics(k, t, args.branch)
        return {"t-tilde": kin.t_tilde, "s": kin.s, "phi-accum": kin.phi}[name]
    vals = B.technical_inequalities(args.x if args.x is not None else t, n)
    return vals.sinh_pair_defect if name == "sinh-defect" else vals.linearized_pair_margin


def cmd_bounds_eval(args, out: _Output) -> int:
    out.line(fmt(float(_quantity_value(args))))
    return EXIT_PASS


def cmd_bounds_table(args, out: _Output) -> int:
    t_grid = parse_t_range(args.t_range)
    n, k = args.n, args.k
    cols = ("t", "main_alpha", "main_phi", "linearized_alpha", "linearized_phi",
            "li_yau2_rhs", "davies2_rhs", "hamilton_rhs")
    config = dict(command="bounds-table", n=n, k=k, t_range=args.t_range,
                  format=args.format)
    rows = []
    for t in t_grid:
        t = float(t)
        pm = B.alpha_phi("main", n, k, t)
        pl = B.alpha_phi("linearized", n, k, t)
        rows.append((t, pm.alpha, pm.phi, pl.alpha, pl.phi,
                     2.0 * n * k + 2.0 * n / t, n * k + 2.0 * n / t,
                     math.exp(4.0 * k * t) * n / (2.0 * t)))
    _emit_table(out, args.format, config, cols, rows)
    return EXIT_PASS


def cmd_kernel_eval(args, out: _Output) -> int:
    space = parse_space(args.space)
    if space.kind == SP.EUCLIDEAN:
        jet = K.euclid_jet(space.dim, args.d, args.t)
    elif space.kind == SP.HYPERBOLIC and space.dim == 3:
        jet = K.h3_jet(args.d, args.t, space.curvature_scale)
    elif space.kind == SP.HYPERBOLIC and space.dim == 2:
        value = K.h2_kernel(args.d, args.t)
        out.line(json_text({"u": value, "space": args.space, "d": args.d,
                            "t": args.t, "note": "value only (no analytic jet)"}))
        return EXIT_PASS
    else:
        jet = K.periodic_jet(space.lengths, args.d, args.t)
    if args.convention == "minus-ln":
        jet = jet.to(K.Convention.MINUS_LN)
    payload = {name: getattr(jet, name)
               for name in ("u", "f", "f_r", "f_rr", "f_t", "lap_f", "gradsq")}
    payload.update(convention=jet.convention.value, n=jet.n, t=jet.t,
                   d=args.d, space=args.space)
    out.line(json_text(payload))
    return EXIT_PASS


def cmd_verify(args, out: _Output) -> int:
    space = parse_space(args.space)
    k = args.k
    sup_factor = 1.0
    if args.negative_control:
        if args.estimate == "hamilton-log":
            sup_factor = 0.5
        else:
            sharp = SP.ricci_lower_bound(space).k
            if sharp == 0.0:
                raise ContractError(
                    "negative control needs positive curvature bound or hamilton-log")
            k = sharp / 2.0
    estimate = B.Estimate(args.estimate) if args.estimate else None
    spec = C.SweepSpec(
        space=space, check=args.check, estimate=estimate,
        t_grid=parse_t_range(args.t_range) if args.t_range else None,
        pair_count=args.pairs, seed=args.seed, tol=args.tol, k=k,
        alpha=args.alpha, sup_bound_factor=sup_factor, branch=args.branch,
    )
    report = C.run_check(spec)
    config = dict(command="verify", check=args.check, space=args.space,
                  estimate=args.estimate, pairs=args.pairs, seed=args.seed,
                  tol=report.tolerance, k=k, alpha=args.alpha,
                  branch=args.branch, negative_control=args.negative_control,
                  t_range=args.t_range, format=args.format)

    if args.format == "json":
        payload = report.to_json_dict(sample_rows=spec.sample_rows)
        payload["params"].update(config)
        out.line(json_text(payload))
    elif args.format == "csv":
        out.line("# " + json_text(config))
        out.line(",".join(report.columns))
        for row in report.rows:
            out.line(",".join(fmt(v) for v in row))
    else:
        out.line("# " + json_text(config))
        out.line(f"check={report.check} samples={report.n_samples} "
                 f"tolerance={fmt(report.tolerance)}")
        out.line(",".join(report.columns))
        for row in report.worst_rows(10):
            out.line(",".join(fmt(v) for v in row))
        for note in report.notes:
            out.line(f"note: {note}")
        verdict = "PASS" if report.passed else "FAIL"
        out.line(f"{verdict}: violations={report.violations} "
                 f"worst_slack={fmt(report.worst_slack)} "
                 f"at {report.worst_location}")
    return EXIT_PASS if report.passed else EXIT_VIOLATIONS


def cmd_entropy(args, out: _Output) -> int:
    space = parse_space(args.space)
    t_grid = parse_t_range(args.t_range)
    trace = E.entropy_trace(args.functional, space, None, t_grid, k=args.k)
    config = dict(command="entropy", functional=args.functional,
                  space=args.space, t_range=args.t_range, k=args.k,
                  format=args.format)
    cols = ("t", "value", "derivative", "identity_residual", "mass")
    rows = []
    for i, t in enumerate(trace.t_values):
        deriv = trace.discrete_derivatives[i] if i < trace.discrete_derivatives.size else math.nan
        resid = trace.identity_residuals[i] if i < trace.identity_residuals.size else math.nan
        rows.append((float(t), float(trace.values[i]), float(deriv), float(resid),
                     float(trace.normalization_checks[i])))
    _emit_table(out, args.format, config, cols, rows)
    return EXIT_PASS


def cmd_compare(args, out: _Output) -> int:
    space = parse_space(args.space)
    n = space.dim
    k = SP.ricci_lower_bound(space).k if args.k is None else args.k
    r_grid = np.linspace(0.05, 8.0, 40)
    t_grid = C.geometric_grid(0.05, 8.0)
    source = C.JetSource(space, r_grid, t_values=t_grid)
    ests = [(B.Estimate.MAIN, None), (B.Estimate.LINEARIZED, None),
            (B.Estimate.DAVIES, 2.0), (B.Estimate.LI_YAU, 2.0),
            (B.Estimate.YAU, None), (B.Estimate.BAKRY_QIAN, None),
            (B.Estimate.HAMILTON, None)]
    cols = ("r", "t") + tuple(f"slack_{e.value}" + ("2" if a else "")
                              for e, a in ests)
    rows = []
    for t in t_grid:
        t = float(t)
        jet = source.jets(t)
        slacks = [np.broadcast_to(B.estimate_slack(e, jet, n, k, t, alpha=a),
                                  r_grid.shape) for e, a in ests]
        for i in range(r_grid.size):
            rows.append((float(r_grid[i]), t) + tuple(float(s[i]) for s in slacks))
    config = dict(command="compare", space=args.space, k=k, format=args.format)
    _emit_table(out, args.format, config, cols, rows)
    return EXIT_PASS


def _emit_table(out: _Output, format_, config, cols, rows):
    if format_ == "json":
        out.line(json_text({"config": config, "columns": list(cols),
                            "rows": [list(r) for r in rows]}))
        return
    out.line("# " + json_text(config))
    out.line(",".join(cols))
    for row in rows:
        out.line(",".join(fmt(v) for v in row))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatbounds",
        description="evaluate and certify heat-kernel gradient estimates, "
                    "Harnack inequalities, kernel bounds, and entropy traces "
                    "on model spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("human", "csv", "json"), default="human")
        p.add_argument("--out", default=None, help="write output to a file")

    p = sub.add_parser("bounds-eval", help="evaluate one named bound quantity")
    p.add_argument("--estimate", required=True, choices=QUANTITIES)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--d", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--branch", choices=B.LYH_BRANCHES, default="energy")
    common(p)
    p.set_defaults(func=cmd_bounds_eval)

    p = sub.add_parser("bounds-table", help="tabulate gradient-estimate RHS over time")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--t-range", required=True, metavar="A:B:STEPS")
    common(p)
    p.set_defaults(func=cmd_bounds_table)

    p = sub.add_parser("kernel-eval", help="print a kernel's log-derivative jet")
    p.add_argument("--space", required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--convention", choices=("ln-u", "minus-ln"), default="ln-u")
    common(p)
    p.set_defaults(func=cmd_kernel_eval)

    p = sub.add_parser("verify", help="run a certification check")
    p.add_argument("--check", required=True, choices=C.CHECKS)
    p.add_argument("--space", required=True)
    p.add_argument("--estimate", default=None,
                   choices=[e.value for e in B.Estimate])
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=20240)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--branch", choices=B.LYH_BRANCHES, default="energy")
    p.add_argument("--t-range", default=None, metavar="A:B:STEPS")
    p.add_argument("--negative-control", action="store_true",
                   help="understate k (or undersize the hamilton-log ceiling)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("entropy", help="trace an entropy functional")
    p.add_argument("--functional", required=True, choices=E.FUNCTIONALS)
    p.add_argument("--space", required=True)
    p.add_argument("--t-range", required=True, metavar="A:B:STEPS")
    p.add_argument("--k", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("compare", help="per-node slack of every gradient estimate")
    p.add_argument("--space", required=True)
    p.add_argument("--k", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    out = _Output(args.out)
    try:
        code = args.func(args, out)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        out.finish()
    except BrokenPipeError:
        pass
    return code


if __name__ == "__main__":
    sys.exit(main())
