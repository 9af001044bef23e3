"""JSON encoding of problems, colligations and certificates.

Complex numbers are written as ``[re, im]`` pairs of doubles; Python's float
repr round-trips exactly, so parse(serialize(x)) reproduces every value.
"""

import numpy as np

from .exceptions import InvalidInputError
from .mu_synthesis import MuCertificate, MuProblem, ScaledSchurFunction
from .pick_np import Colligation
from .tetra_interp import (
    BCParams,
    Certificate,
    InfeasibilityReason,
    Status,
    TetraProblem,
)
from .tetrablock import TetraPoint

__all__ = [
    "encode_complex",
    "decode_complex",
    "encode_array",
    "decode_array",
    "point_to_json",
    "point_from_json",
    "colligation_to_json",
    "colligation_from_json",
    "scaled_to_json",
    "scaled_from_json",
    "problem_to_json",
    "problem_from_json",
    "certificate_to_json",
    "certificate_from_json",
]


def encode_complex(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(obj):
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if not (isinstance(obj, (list, tuple)) and len(obj) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        raise InvalidInputError(f"expected a complex number as [re, im], got {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


def encode_array(a):
    """Nested lists with ``[re, im]`` leaves."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_array(row) for row in a]


def decode_array(obj, shape=None):
    def walk(o):
        if isinstance(o, (list, tuple)) and o and isinstance(o[0], (list, tuple)):
            return [walk(v) for v in o]
        if isinstance(o, (list, tuple)) and not o:
            return []
        return decode_complex(o)

    if not isinstance(obj, (list, tuple)):
        raise InvalidInputError("expected an array")
    try:
        out = np.array(walk(obj), dtype=np.complex128)
    except ValueError as exc:
        raise InvalidInputError(f"ragged array: {exc}") from exc
    if shape is not None:
        if out.size != int(np.prod(shape)):
            raise InvalidInputError(f"array has {out.size} entries, expected shape {shape}")
        out = out.reshape(shape)
    return out


def _complex_list(obj, name):
    if not isinstance(obj, (list, tuple)):
        raise InvalidInputError(f"{name} must be a list of [re, im] pairs")
    return np.array([decode_complex(v) for v in obj], dtype=np.complex128)


def point_to_json(x):
    return [encode_complex(v) for v in TetraPoint.coerce(x)]


def point_from_json(obj):
    vals = _complex_list(obj, "point")
    if vals.size != 3:
        raise InvalidInputError("a tetrablock point has three coordinates")
    return TetraPoint(*vals)


def colligation_to_json(col):
    return {
        "dimH": col.dimH,
        "A": encode_array(col.A),
        "B": encode_array(col.B),
        "C": encode_array(col.C),
        "D": encode_array(col.D),
    }


def colligation_from_json(obj):
    try:
        h = int(obj["dimH"])
        D = decode_array(obj["D"])
        m = D.shape[0]
        return Colligation(
            decode_array(obj["A"], (h, h)),
            decode_array(obj["B"], (h, m)),
            decode_array(obj["C"], (m, h)),
            D.reshape(m, m),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed colligation: {exc}") from exc


def scaled_to_json(f):
    return {"chi": colligation_to_json(f.chi), "scale_poly": encode_array(f.scale_poly)}


def scaled_from_json(obj):
    return ScaledSchurFunction(colligation_from_json(obj["chi"]), _complex_list(obj["scale_poly"], "scale_poly"))


def problem_to_json(problem):
    if isinstance(problem, TetraProblem):
        return {
            "kind": "tetra_interp",
            "nodes": encode_array(problem.nodes),
            "targets": [point_to_json(t) for t in problem.targets],
        }
    if isinstance(problem, MuProblem):
        return {
            "kind": "mu_synthesis",
            "nodes": encode_array(problem.nodes),
            "targets": encode_array(problem.targets),
        }
    raise InvalidInputError(f"cannot serialize {type(problem).__name__}")


def problem_from_json(doc):
    """``TetraProblem`` or ``MuProblem`` from an interpolation problem file."""
    kind = doc.get("kind")
    try:
        nodes = _complex_list(doc["nodes"], "nodes")
        if kind == "tetra_interp":
            return TetraProblem(nodes, [point_from_json(t) for t in doc["targets"]])
        if kind == "mu_synthesis":
            return MuProblem(nodes, decode_array(doc["targets"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed {kind} problem: {exc}") from exc
    raise InvalidInputError(f"not an interpolation problem kind: {kind!r}")


def _params_to_json(p):
    return {"b": encode_array(p.b), "c": encode_array(p.c), "branches": list(p.branches)}


def _tetra_cert_to_json(cert):
    out = {}
    if cert.params is not None:
        out["params"] = _params_to_json(cert.params)
    if cert.min_eig is not None:
        out["min_eig"] = cert.min_eig
    if cert.colligation is not None:
        out["colligation"] = colligation_to_json(cert.colligation)
    if cert.reason is not None:
        out["reason"] = {"code": cert.reason.code, "message": cert.reason.message, "node": cert.reason.node}
    if cert.best_objective is not None:
        out["best_objective"] = cert.best_objective
    out["starts_used"] = cert.starts_used
    return out


def _tetra_cert_from_json(status, body, report):
    params = None
    if "params" in body:
        p = body["params"]
        params = BCParams(_complex_list(p["b"], "b"), _complex_list(p["c"], "c"), tuple(p["branches"]))
    reason = None
    if "reason" in body:
        r = body["reason"]
        reason = InfeasibilityReason(r["code"], r["message"], r.get("node"))
    return Certificate(
        status=status,
        params=params,
        min_eig=body.get("min_eig"),
        colligation=colligation_from_json(body["colligation"]) if "colligation" in body else None,
        report=report,
        reason=reason,
        best_objective=body.get("best_objective"),
        starts_used=body.get("starts_used", 0),
    )


def certificate_to_json(cert, problem=None, meta=None):
    """Certificate file for a tetra or mu certificate.

    The problem is embedded so the file can be verified on its own.
    """
    if isinstance(cert, MuCertificate):
        body = {"tetra": _tetra_cert_to_json(cert.tetra)}
        body["tetra_report"] = cert.tetra.report
        if cert.function is not None:
            body["function"] = scaled_to_json(cert.function)
        kind = "mu_synthesis"
    else:
        body = _tetra_cert_to_json(cert)
        kind = "tetra_interp"
    doc = {"kind": kind, "status": Status(cert.status).value, "certificate": body, "report": cert.report}
    if meta is not None:
        doc["meta"] = meta
    if problem is not None:
        doc["problem"] = problem_to_json(problem)
    return doc


def certificate_from_json(doc):
    """Inverse of :func:`certificate_to_json`; returns ``(certificate, problem or None)``."""
    try:
        status = Status(doc["status"])
        body = doc["certificate"]
        kind = doc.get("kind", "tetra_interp")
        report = doc.get("report", {})
        problem = problem_from_json(doc["problem"]) if "problem" in doc else None
        if kind == "mu_synthesis":
            tetra = _tetra_cert_from_json(status, body["tetra"], body.get("tetra_report", {}))
            f = scaled_from_json(body["function"]) if "function" in body else None
            return MuCertificate(status, tetra, f, report), problem
        if kind == "tetra_interp":
            return _tetra_cert_from_json(status, body, report), problem
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed certificate: {exc}") from exc
    raise InvalidInputError(f"unknown certificate kind {kind!r}")
