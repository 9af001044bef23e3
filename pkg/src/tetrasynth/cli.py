"""Command-line front end.

Every subcommand reads a JSON problem file (``--input``, or stdin) and writes
JSON (or CSV for ``sample-grid``) to ``--output`` or stdout.  Exit codes:
0 for Solvable / true / value computed, 2 for Infeasible / false, 3 for
Unknown, 1 for usage, input or numerical errors (with a JSON error object on
stderr).
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .exceptions import InvalidInputError, TetraSynthError
from .mu import mu_diag, mu_lower_bound
from .mu_synthesis import MuCertificate, reduce_to_tetra, solve_mu, verify_mu
from .numeric_core import disc_points, operator_norm
from .realization import (
    boundary_einner_check,
    canonical_lift,
    tetra_from_colligation,
    verify_identity,
)
from .serialization import (
    certificate_from_json,
    certificate_to_json,
    colligation_from_json,
    decode_array,
    encode_array,
    encode_complex,
    point_from_json,
    point_to_json,
    problem_from_json,
)
from .tetra_interp import (
    SearchConfig,
    Status,
    necessary_checks,
    solve_tetra,
    verify_certificate,
)
from .tetrablock import closed_margin, in_closed_tetrablock, in_distinguished_boundary, in_open_tetrablock

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_ERROR, EXIT_FALSE, EXIT_UNKNOWN = 0, 1, 2, 3
_STATUS_EXIT = {Status.SOLVABLE: EXIT_OK, Status.INFEASIBLE: EXIT_FALSE, Status.UNKNOWN: EXIT_UNKNOWN}

_SUBCOMMAND_KIND = {
    "membership": "membership",
    "mu": "mu_value",
    "solve-tetra": "tetra_interp",
    "solve-mu": "mu_synthesis",
    "realize": "realize",
    "lift": "lift",
    "verify": "verify",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _default_threads():
    raw = os.environ.get("TETRASYNTH_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser():
    p = _Parser(prog="tetrasynth", description="Tetrablock interpolation and 2x2 mu-synthesis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in list(_SUBCOMMAND_KIND) + ["sample-grid"]:
        sp = sub.add_parser(name)
        if name == "sample-grid":
            sp.add_argument("mode", choices=["tetra-slice", "mu-levels"])
        sp.add_argument("--input", "-i", help="problem file (default: stdin)")
        sp.add_argument("--output", "-o", help="result file (default: stdout)")
        sp.add_argument("--tol", type=float, default=1e-7)
        sp.add_argument("--starts", type=int, default=32)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--grid", type=int, default=200)
        sp.add_argument("--quad", type=int, default=4096)
        sp.add_argument("--threads", type=int, default=None,
                        help="solver worker threads (default: $TETRASYNTH_THREADS or 1)")
    return p


def _read_input(path):
    text = sys.stdin.read() if path in (None, "-") else open(path, encoding="utf-8").read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInputError("problem file must be a JSON object")
    return doc


def _jsonable(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(doc):
    return json.dumps(doc, indent=2, default=_jsonable) + "\n"


def _write_output(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_kind(doc, command):
    kind = doc.get("kind")
    want = _SUBCOMMAND_KIND[command]
    if command == "verify" and kind in ("verify", "tetra_interp", "mu_synthesis"):
        return
    if kind != want:
        raise InvalidInputError(f"{command} expects kind {want!r}, got {kind!r}")


def _search_config(args):
    threads = args.threads if args.threads is not None else _default_threads()
    if args.starts < 0 or threads < 1:
        raise InvalidInputError("--starts must be >= 0 and --threads >= 1")
    return SearchConfig(starts=args.starts, seed=args.seed, tol=args.tol, threads=threads)


def _meta(args, wall_time):
    return {
        "seed": args.seed,
        "starts": args.starts,
        "tol": args.tol,
        "grid": args.grid,
        "wall_time": wall_time,
        "version": __version__,
    }


def _cmd_membership(doc, args):
    x = point_from_json(doc["point"])
    closed = bool(in_closed_tetrablock(x))
    out = {
        "in_closed": closed,
        "in_open": bool(in_open_tetrablock(x)),
        "in_bE": bool(in_distinguished_boundary(x)),
        "margin": float(closed_margin(x)),
    }
    return out, EXIT_OK if closed else EXIT_FALSE


def _cmd_mu(doc, args):
    A = decode_array(doc["matrix"], (2, 2))
    rel_tol = float(doc.get("rel_tol", args.tol))
    out = {"mu": mu_diag(A, rel_tol), "lower_bound": mu_lower_bound(A), "norm": operator_norm(A), "rel_tol": rel_tol}
    return out, EXIT_OK


def _solve(doc, args, solver):
    problem = problem_from_json(doc)
    cfg = _search_config(args)
    t0 = time.perf_counter()
    cert = solver(problem, cfg)
    meta = _meta(args, time.perf_counter() - t0)
    return certificate_to_json(cert, problem, meta), _STATUS_EXIT[Status(cert.status)]


def _eval_points(doc, args):
    if "points" in doc:
        return decode_array(doc["points"]).ravel()
    return disc_points(args.grid, 0.95)


def _cmd_realize(doc, args):
    col = colligation_from_json(doc["colligation"])
    x = tetra_from_colligation(col)
    pts = _eval_points(doc, args)
    vals = x.evaluate(pts)
    samples = x.evaluate(disc_points(max(args.grid, 1), 1.0 - 1e-10))
    defect = float(np.max(np.maximum(-closed_margin(samples), 0.0)))
    bdefect, skipped = boundary_einner_check(x, return_skipped=True)
    ok = defect <= 1e-9 and bdefect <= 1e-5
    out = {
        "points": encode_array(pts),
        "values": [point_to_json(v) for v in vals.T],
        "unitarity_residual": col.unitarity_residual,
        "membership_defect": defect,
        "boundary_defect": bdefect,
        "boundary_skipped": skipped,
        "ok": ok,
    }
    return out, EXIT_OK if ok else EXIT_FALSE


def _cmd_lift(doc, args):
    col = colligation_from_json(doc["colligation"])
    x = tetra_from_colligation(col)
    F = canonical_lift(x, quad_m=args.quad)
    pts = _eval_points(doc, args)
    vals = F.evaluate(pts)
    rng = np.random.default_rng(args.seed)
    n_probes = int(doc.get("probes", 100))
    probes = np.stack([disc_points(n_probes, 0.9)[rng.permutation(n_probes)] for _ in range(4)], axis=1)
    resid, skipped = verify_identity(F, probes, return_skipped=True)
    out = {
        "diagonal": F.diagonal,
        "quad_m": F.quad_m,
        "points": encode_array(pts),
        "F": encode_array(vals),
        "F21_at_0": encode_complex(F(0.0)[1, 0]),
        "max_norm": float(max(operator_norm(v) for v in vals)) if len(vals) else 0.0,
        "identity_residual": resid,
        "identity_skipped": skipped,
    }
    return out, EXIT_OK


def _cmd_verify(doc, args):
    if doc.get("kind") == "verify":
        doc = doc["certificate"]
    cert, problem = certificate_from_json(doc)
    if problem is None:
        raise InvalidInputError("certificate file carries no problem")
    status = Status(cert.status)
    out = {"status": status.value}
    if status is Status.UNKNOWN:
        return out, EXIT_UNKNOWN
    mu = isinstance(cert, MuCertificate)
    tetra_problem = reduce_to_tetra(problem) if mu else problem
    if status is Status.INFEASIBLE:
        reason = necessary_checks(tetra_problem)
        claimed = cert.tetra.reason if mu else cert.reason
        ok = reason is not None and claimed is not None and reason.code == claimed.code
        out.update({"reason": None if reason is None else reason.code, "ok": ok})
        return out, EXIT_OK if ok else EXIT_FALSE
    tetra_cert = cert.tetra if mu else cert
    report = verify_certificate(tetra_problem, tetra_cert)
    out["tetra_report"] = report
    ok = report["ok"]
    if mu:
        if cert.function is None:
            raise InvalidInputError("Solvable mu certificate carries no function")
        mu_report = verify_mu(problem, cert.function, args.grid)
        out["mu_report"] = mu_report
        ok = ok and mu_report["ok"]
    out["ok"] = ok
    return out, EXIT_OK if ok else EXIT_FALSE


def _grid_axes(params, args):
    try:
        re_lo, re_hi = (float(v) for v in params.get("re", (-1.0, 1.0)))
        im_lo, im_hi = (float(v) for v in params.get("im", (-1.0, 1.0)))
        n_re, n_im = (int(v) for v in params.get("shape", (args.grid, args.grid)))
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed grid bounds: {exc}") from exc
    if n_re < 0 or n_im < 0 or not np.all(np.isfinite([re_lo, re_hi, im_lo, im_hi])) or re_lo > re_hi or im_lo > im_hi:
        raise InvalidInputError("grid bounds must be finite with lo <= hi and non-negative shape")
    return np.linspace(re_lo, re_hi, n_re), np.linspace(im_lo, im_hi, n_im)


def _cmd_sample_grid(doc, args):
    """CSV rows ``re,im,verdict`` (tetra-slice) or ``re,im,value`` (mu-levels).

    Rows run over the real axis first, then the imaginary axis.
    """
    re, im = _grid_axes(doc, args)
    Z = (re[:, None] + 1j * im[None, :]).ravel()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.mode == "tetra-slice":
        coord = doc.get("vary", "x3")
        if coord not in ("x1", "x2", "x3"):
            raise InvalidInputError("vary must be one of x1, x2, x3")
        base = point_from_json(doc.get("point", [[0, 0]] * 3)).as_tuple()
        pts = np.empty((3, Z.size), dtype=np.complex128)
        pts[:] = np.asarray(base)[:, None]
        pts[int(coord[1]) - 1] = Z
        verdict = in_closed_tetrablock(pts) if Z.size else np.zeros(0, bool)
        w.writerow(["re", "im", "verdict"])
        for z, v in zip(Z, np.atleast_1d(verdict)):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), int(v)])
    else:
        A0 = decode_array(doc["A0"], (2, 2))
        A1 = decode_array(doc["A1"], (2, 2))
        rel_tol = float(doc.get("rel_tol", 1e-9))
        w.writerow(["re", "im", "value"])
        for z in Z:
            w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(mu_diag(A0 + z * A1, rel_tol))])
    return buf.getvalue(), EXIT_OK


_COMMANDS = {
    "membership": _cmd_membership,
    "mu": _cmd_mu,
    "solve-tetra": lambda doc, args: _solve(doc, args, solve_tetra),
    "solve-mu": lambda doc, args: _solve(doc, args, solve_mu),
    "realize": _cmd_realize,
    "lift": _cmd_lift,
    "verify": _cmd_verify,
}


def _fail(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return EXIT_ERROR


def run(argv=None):
    """Run the CLI and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", str(exc))
    try:
        doc = _read_input(args.input)
        if args.command == "sample-grid":
            text, code = _cmd_sample_grid(doc, args)
        else:
            _check_kind(doc, args.command)
            result, code = _COMMANDS[args.command](doc, args)
            text = dumps(result)
        _write_output(args.output, text)
        return code
    except OSError as exc:
        return _fail("io", str(exc))
    except (TetraSynthError, ValueError, ZeroDivisionError) as exc:
        return _fail(type(exc).__name__, str(exc))
    except (KeyError, TypeError) as exc:
        return _fail("InvalidInputError", f"missing or malformed field: {exc}")


def main(argv=None):
    sys.exit(run(argv))
