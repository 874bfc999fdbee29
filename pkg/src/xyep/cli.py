"""Command-line front end.

Every subcommand writes one document (JSON, CSV or SVG) to ``--output`` or
stdout, and optionally a figure to ``--figure``.  Exit codes: 0 success,
1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from xyep import plotting, serialize
from xyep.asymptotics import convergence_report, fit_rate
from xyep.errors import XYEPError
from xyep.exceptional import GAP_MEASURES, find_eps, gap_landscape, verify_ep, verify_trivial_point
from xyep.model import (
    ModelParams,
    assemble_spectrum,
    centroid_match,
    exact_diagonalization,
    quasi_energies_matrix,
    spectra_match,
)
from xyep.pt import ON_AXIS_TOL, on_axis_eps, pt_spectrum_check
from xyep.topology import phase_diagram

FORMATS = ("json", "csv", "svg")
# options whose values may legitimately start with '-'
_VALUE_OPTS = {"--lambda", "--grid", "--sweep"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# argument parsing ----------------------------------------------------------

def parse_complex(text) -> complex:
    """``"re,im"`` or a Python complex literal such as ``"0.5+2j"``."""
    try:
        if "," in text:
            re_, im_ = text.split(",")
            z = complex(float(re_), float(im_))
        else:
            z = complex(text.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse complex value {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise argparse.ArgumentTypeError(f"non-finite value {text!r}")
    return z


def parse_grid(text):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse grid {text!r}") from None
    if len(vals) != 4 or not all(map(math.isfinite, vals)):
        raise argparse.ArgumentTypeError("grid must be re_min,re_max,im_min,im_max")
    if vals[0] >= vals[1] or vals[2] >= vals[3]:
        raise argparse.ArgumentTypeError("grid bounds must be increasing")
    return vals


def parse_res(text):
    try:
        parts = [int(x) for x in text.replace("x", ",").split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse resolution {text!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) < 2:
        raise argparse.ArgumentTypeError("resolution must be N or NRE,NIM with N >= 2")
    return parts


def parse_sweep(text):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must be start:stop:count, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("sweep count must be >= 1")
    return [a, b, n]


def parse_L_list(text):
    try:
        Ls = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse L list {text!r}") from None
    return Ls


def positive_float(text):
    x = float(text)
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"tolerance must be > 0, got {text!r}")
    return x


def _normalize_argv(argv):
    """Glue ``--grid -1.5,...`` into ``--grid=-1.5,...`` so argparse accepts it."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1][:1] == "-" and argv[i + 1][1:2] in set("0123456789."):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    common.add_argument("--figure", default=None, help="also write a figure (.svg or .png)")
    common.add_argument("--threads", type=int, default=None,
                        help="cap on worker threads (default: $XYEP_THREADS or 1)")

    parser = _Parser(prog="xyep", description="Exceptional points of the non-Hermitian XY chain.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def chain(p, L_default=None):
        p.add_argument("--L", type=int, required=L_default is None, default=L_default)
        p.add_argument("--allow-odd", action="store_true")

    p = sub.add_parser("quasi", parents=[common], help="quasi-energies")
    chain(p)
    p.add_argument("--lambda", dest="lam", type=parse_complex, default=complex(0))
    p.set_defaults(func=cmd_quasi)

    p = sub.add_parser("spectrum", parents=[common], help="full free-fermion spectrum")
    chain(p)
    p.add_argument("--lambda", dest="lam", type=parse_complex, default=complex(0))
    p.add_argument("--compare-ed", action="store_true")
    p.add_argument("--tol", type=positive_float, default=1e-8)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("eps", parents=[common], help="exceptional points")
    chain(p)
    p.add_argument("--axis-tol", type=positive_float, default=ON_AXIS_TOL)
    p.set_defaults(func=cmd_eps)

    p = sub.add_parser("rings", parents=[common], help="ring convergence over several L")
    p.add_argument("--L", type=parse_L_list, default=[8, 16, 32])
    p.set_defaults(func=cmd_rings)

    p = sub.add_parser("gap", parents=[common], help="quasi-energy gap landscape")
    chain(p)
    p.add_argument("--grid", type=parse_grid, default=[-2.5, 2.5, -2.5, 2.5])
    p.add_argument("--res", type=parse_res, default=[201, 201])
    p.add_argument("--measure", choices=GAP_MEASURES, default="smallest_two")
    p.add_argument("--no-refine", action="store_true", help="skip refining grid minima to zeros")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("pt", parents=[common], help="PT symmetry along lambda = i lambda_I")
    chain(p)
    p.add_argument("--sweep", type=parse_sweep, default=[0.1, 3.0, 30])
    p.add_argument("--route", choices=("free_fermion", "ed"), default="free_fermion")
    p.add_argument("--tol", type=positive_float, default=1e-9)
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser("phase", parents=[common], help="winding-number phase diagram")
    p.add_argument("--grid", type=parse_grid, default=[-1.5, 1.5, -1.5, 1.5])
    p.add_argument("--res", type=parse_res, default=[101, 101])
    p.add_argument("--nk", type=int, default=256)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("verify", parents=[common], help="verify EPs or trivial points")
    chain(p)
    p.add_argument("--lambda", dest="lam", type=parse_complex, default=None,
                   help="verify this value instead of every EP")
    p.add_argument("--trivial", action="store_true", help="check the trivial points instead")
    p.add_argument("--tol", type=positive_float, default=1e-6)
    p.add_argument("--hamiltonian", choices=("auto", "on", "off"), default="auto")
    p.set_defaults(func=cmd_verify)
    return parser


# subcommands ---------------------------------------------------------------
# each returns (data, columns, rows, figure_factory, ok)

def _params(args):
    return ModelParams(args.L, args.lam, allow_odd=args.allow_odd)


def _check_even(args):
    ModelParams(args.L, 0.0, allow_odd=args.allow_odd)


def cmd_quasi(args):
    q = quasi_energies_matrix(_params(args))
    data = serialize.quasi_to_dict(q)
    cols = [("epsilon", "complex"), ("sector", "str")]
    rows = [[e, s] for e, s in zip(q.epsilons, q.sectors)]
    return data, cols, rows, lambda: plotting.quasi_figure(q, f"L={args.L}"), True


def cmd_spectrum(args):
    p = _params(args)
    ff = assemble_spectrum(quasi_energies_matrix(p))
    data = {"free_fermion": serialize.spectrum_to_dict(ff)}
    E = ff.sorted()
    cols = [("energy", "complex")]
    rows = [[e] for e in E]
    ed = None
    ok = True
    if args.compare_ed:
        ed = exact_diagonalization(p)
        raw = spectra_match(ff.energies, ed.energies, args.tol)
        m = raw if raw.matched else centroid_match(ff.energies, ed.energies, args.tol)
        data["exact_diag"] = serialize.spectrum_to_dict(ed)
        data["match"] = {"matched": m.matched, "max_distance": m.max_distance, "method": m.method,
                         "raw_max_distance": raw.max_distance}
        cols.append(("energy_ed", "complex"))
        rows = [[e, d] for e, d in zip(E, ed.sorted())]
        ok = m.matched
    return data, cols, rows, lambda: plotting.spectrum_figure(ff, ed, f"L={args.L}"), ok


def cmd_eps(args):
    _check_even(args)
    recs = find_eps(args.L)
    axis = {id(r) for r in on_axis_eps(args.L, args.axis_tol, recs)}
    data = {
        "count": len(recs),
        "on_axis_count": len(axis),
        "records": [dict(serialize.ep_to_dict(r), on_axis=id(r) in axis) for r in recs],
    }
    cols = serialize.EP_COLUMNS + [("on_axis", "bool")]
    rows = [serialize.ep_row(r) + [id(r) in axis] for r in recs]
    return data, cols, rows, lambda: plotting.eps_figure(recs, f"L={args.L}"), True


def cmd_rings(args):
    reps = [convergence_report(L) for L in args.L]
    inner = [r.inner_max_dev for r in reps]
    outer = [r.outer_max_dev for r in reps]
    data = {
        "reports": [
            {
                "L": r.L,
                "inner_max_dev": r.inner_max_dev,
                "outer_max_dev": r.outer_max_dev,
                "max_angle_error": max(r.angle_errors),
                "unmatched": r.unmatched,
                "two_sided": r.two_sided,
                "lambdas": r.lambdas,
                "rings": r.rings,
            }
            for r in reps
        ],
        "monotone_inner": all(a > b for a, b in zip(inner, inner[1:])),
        "monotone_outer": all(a > b for a, b in zip(outer, outer[1:])),
        "fitted_exponent": fit_rate(reps),
    }
    cols = [("L", "int"), ("inner_max_dev", "float"), ("outer_max_dev", "float"),
            ("max_angle_error", "float"), ("unmatched", "int"), ("two_sided", "bool")]
    rows = [[r.L, r.inner_max_dev, r.outer_max_dev, max(r.angle_errors), r.unmatched, r.two_sided]
            for r in reps]
    return data, cols, rows, lambda: plotting.rings_figure(reps), True


def cmd_gap(args):
    _check_even(args)
    g = args.grid
    land = gap_landscape(args.L, g[:2], g[2:], args.res[0], args.res[1], threads=args.threads,
                         measure=args.measure)
    recs = find_eps(args.L, verify=False) if 4 <= args.L <= 64 and args.L % 2 == 0 else []
    zeros = [] if args.no_refine else land.zeros()
    data = {
        "L": args.L,
        "measure": land.measure,
        "re": land.re,
        "im": land.im,
        "gap": land.gap,
        "local_minima": land.local_minima(),
        "zeros": [{"lambda": z.lam, "gap": z.gap, "overlap": z.overlap, "is_ep": z.is_ep} for z in zeros],
        "eps": [r.lambda_ep for r in recs],
    }
    cols = [("lambda", "complex"), ("gap", "float")]
    rows = [[complex(x, y), land.gap[i, j]] for i, y in enumerate(land.im) for j, x in enumerate(land.re)]
    return data, cols, rows, lambda: plotting.gap_figure(land, recs), True


def cmd_pt(args):
    _check_even(args)
    a, b, n = args.sweep
    vals = np.linspace(a, b, n)
    if np.any(vals == 0):
        raise ValueError("sweep must not include lambda_I = 0")
    reps = [pt_spectrum_check(args.L, x, args.tol, route=args.route) for x in vals]
    on_axis = on_axis_eps(args.L) if args.L >= 4 and args.L % 2 == 0 else []
    data = {
        "reports": [
            {
                "lambda": r.lam,
                "conjugation_defect": r.conjugation_defect,
                "quasi_defect": r.quasi_defect,
                "real_count": r.real_count,
                "conjugate_pair_count": r.conjugate_pair_count,
                "passed": r.passed,
            }
            for r in reps
        ],
        "all_passed": all(r.passed for r in reps),
        "on_axis_eps": [r.lambda_ep for r in on_axis],
    }
    cols = [("lambda", "complex"), ("conjugation_defect", "float"), ("quasi_defect", "float"),
            ("real_count", "int"), ("conjugate_pair_count", "int"), ("passed", "bool")]
    rows = [[r.lam, r.conjugation_defect, r.quasi_defect, r.real_count, r.conjugate_pair_count, r.passed]
            for r in reps]
    return data, cols, rows, lambda: plotting.pt_figure(reps), True


def cmd_phase(args):
    g = args.grid
    d = phase_diagram(g[:2], g[2:], args.res[0], args.res[1], n_k=args.nk, threads=args.threads)
    data = {
        "re": d.re,
        "im": d.im,
        "w": d.w,
        "boundary": d.boundary,
        "n_k": d.n_k,
        "counts": {"+1": int(((d.w == 1) & ~d.boundary).sum()),
                   "-1": int(((d.w == -1) & ~d.boundary).sum()),
                   "boundary": int(d.boundary.sum())},
    }
    cols = [("lambda", "complex"), ("w", "int"), ("boundary", "bool")]
    rows = [[complex(x, y), d.w[i, j], d.boundary[i, j]]
            for i, y in enumerate(d.im) for j, x in enumerate(d.re)]
    return data, cols, rows, lambda: plotting.phase_figure(d), True


def cmd_verify(args):
    _check_even(args)
    ham = {"auto": None, "on": True, "off": False}[args.hamiltonian]
    if args.trivial:
        reps = [verify_trivial_point(args.L, s, b, hamiltonian=ham)
                for s in (1, -1) for b in ("plus", "minus")]
        entries = [
            {
                "lambda": r.lam,
                "branch": r.branch,
                "degeneracy_detected": r.degeneracy_detected,
                "min_matrix_overlap": r.min_matrix_overlap,
                "min_hamiltonian_overlap": r.min_hamiltonian_overlap,
                "is_ep": not (r.min_matrix_overlap > 0.1),
                "passed": r.degeneracy_detected and r.min_matrix_overlap > 0.1,
            }
            for r in reps
        ]
        cols = [("lambda", "complex"), ("branch", "str"), ("degeneracy_detected", "bool"),
                ("min_matrix_overlap", "float"), ("min_hamiltonian_overlap", "float"),
                ("is_ep", "bool"), ("passed", "bool")]
        lams = [r.lam for r in reps]
    else:
        targets = [args.lam] if args.lam is not None else [r.lambda_ep for r in find_eps(args.L)]
        reps = [verify_ep(lam, args.L, args.tol, hamiltonian=ham) for lam in targets]
        entries = []
        for v in reps:
            h = v.hamiltonian
            entries.append({
                "lambda": v.lambda_ep,
                "quasi_gap": v.quasi_gap,
                "matrix_overlap": v.matrix_overlap,
                "matrix_passed": v.matrix_passed,
                "hamiltonian_checked": h is not None,
                "coalescing_levels": h.coalescing if h else -1,
                "targets_checked": h.targets_checked if h else 0,
                "hamiltonian_max_overlap": h.max_overlap if h else math.nan,
                "passed": v.passed,
            })
        cols = [("lambda", "complex"), ("quasi_gap", "float"), ("matrix_overlap", "float"),
                ("matrix_passed", "bool"), ("hamiltonian_checked", "bool"), ("coalescing_levels", "int"),
                ("targets_checked", "int"), ("hamiltonian_max_overlap", "float"), ("passed", "bool")]
        lams = [v.lambda_ep for v in reps]
    ok = all(e["passed"] for e in entries)
    data = {"entries": entries, "all_passed": ok}
    rows = [[e[name] for name, _ in cols] for e in entries]

    def fig():
        from types import SimpleNamespace
        pts = [SimpleNamespace(lambda_ep=z, ring="inner" if abs(z) < 1 else "outer") for z in lams]
        return plotting.eps_figure(pts, f"L={args.L}")

    return data, cols, rows, fig, ok


# driver --------------------------------------------------------------------

def config_of(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "figure")}
    return serialize.to_jsonable(cfg)


def _threads(value):
    if value is None:
        env = os.environ.get("XYEP_THREADS")
        if env is None:
            return 1
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"XYEP_THREADS must be an integer, got {env!r}") from None
    if value < 1:
        raise UsageError(f"--threads must be >= 1, got {value}")
    return value


def _figure_format(path):
    ext = os.path.splitext(path)[1].lower().lstrip(".")
    if ext not in ("svg", "png", "pdf"):
        raise UsageError(f"figure must end in .svg, .png or .pdf, got {path!r}")
    return ext


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_normalize_argv(argv))
        args.threads = _threads(args.threads)
        if args.figure:
            _figure_format(args.figure)
    except UsageError as e:
        print(f"xyep: error: {e}", file=sys.stderr)
        return 1

    from threadpoolctl import threadpool_limits

    try:
        with threadpool_limits(limits=args.threads):
            data, cols, rows, figure, ok = args.func(args)
    except (ValueError, argparse.ArgumentTypeError) as e:
        print(f"xyep: error: {e}", file=sys.stderr)
        return 1
    except (XYEPError, np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError) as e:
        print(f"xyep: numerical failure: {e}", file=sys.stderr)
        return 2

    cfg = config_of(args)
    if args.format == "json":
        payload = serialize.dumps_json(serialize.document(args.command, cfg, data)).encode()
    elif args.format == "csv":
        payload = serialize.dumps_csv(args.command, cfg, cols, rows).encode()
    else:
        header = serialize.dumps_json(serialize.document(args.command, cfg, {})).strip()
        payload = plotting.render(figure(), "svg", description=header)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    if args.figure:
        with open(args.figure, "wb") as fh:
            fh.write(plotting.render(figure(), _figure_format(args.figure)))
    return 0 if ok else 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
