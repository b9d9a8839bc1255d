"""JSON problem files with exponent-vector polynomial encoding.

Layout (format ``gsip-problem/1``)::

    {
      "format": "gsip-problem/1",
      "name": "glibp6",
      "n": 1, "p": 1,
      "f": [{"c": 1.0, "e": [1]}],                   # polynomials in x (length-n exponents)
      "X_ineq": [...], "X_eq": [...],
      "A": [[1.0], [-1.0]],
      "b": [poly_x, ...],
      "g": [poly_xu, ...],                           # exponents over (x, u), length n + p
      "structure": {"kind": "box", "lower": [...], "upper": [...]},
      "convexity": [null | "convex" | "concave" | "unknown", ...],
      "phi0": [[poly_x, ...], ...],                  # optional cut maps x -> u
      "vertices": [[poly_x, ...], ...],              # optional vertex maps
      "options": {...}, "metadata": {...}
    }
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ..core import GsipProblem, ProblemError, Structure
from ..poly import Polynomial, PolynomialMap, VariableSpace

FORMAT = "gsip-problem/1"


class ProblemFileError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def encode_poly(p: Polynomial) -> list[dict]:
    return [{"c": float(c), "e": list(e)} for e, c in p.items()]


def decode_poly(data: Any, space: VariableSpace, where: str) -> Polynomial:
    if isinstance(data, (int, float)):
        return Polynomial.constant(space, float(data))
    if not isinstance(data, list):
        raise ProblemFileError(where, "a polynomial is a list of {c, e} terms or a number")
    terms: dict[tuple, float] = {}
    for k, t in enumerate(data):
        loc = f"{where}[{k}]"
        if not isinstance(t, dict) or "c" not in t or "e" not in t:
            raise ProblemFileError(loc, "each term needs keys 'c' and 'e'")
        e = t["e"]
        if not isinstance(e, list) or len(e) != space.dim:
            raise ProblemFileError(loc, f"exponent must have length {space.dim}, got {e!r}")
        if any((not isinstance(v, int)) or v < 0 for v in e):
            raise ProblemFileError(loc, f"exponents must be nonnegative integers, got {e!r}")
        try:
            c = float(t["c"])
        except (TypeError, ValueError):
            raise ProblemFileError(loc, f"coefficient {t['c']!r} is not a number") from None
        terms[tuple(e)] = terms.get(tuple(e), 0.0) + c
    return Polynomial(space, terms)


def _polys(data, key, space, required=False):
    if key not in data:
        if required:
            raise ProblemFileError(key, "missing field")
        return []
    if not isinstance(data[key], list):
        raise ProblemFileError(key, "expected a list of polynomials")
    return [decode_poly(item, space, f"{key}[{i}]") for i, item in enumerate(data[key])]


def _maps(data, key, space, p):
    if data.get(key) is None:
        return None
    out = []
    for i, comps in enumerate(data[key]):
        if not isinstance(comps, list) or len(comps) != p:
            raise ProblemFileError(f"{key}[{i}]", f"a cut map needs p = {p} components")
        out.append(PolynomialMap([decode_poly(c, space, f"{key}[{i}][{j}]") for j, c in enumerate(comps)]))
    return out


def problem_from_dict(data: dict) -> GsipProblem:
    if not isinstance(data, dict):
        raise ProblemFileError("<root>", "expected a JSON object")
    fmt = data.get("format", FORMAT)
    if fmt != FORMAT:
        raise ProblemFileError("format", f"unsupported format {fmt!r}, expected {FORMAT!r}")
    for key in ("n", "p"):
        if not isinstance(data.get(key), int) or data[key] < 0:
            raise ProblemFileError(key, "must be a nonnegative integer")
    n, p = data["n"], data["p"]
    xs = VariableSpace([("x", n)])
    xus = VariableSpace([("x", n), ("u", p)])
    if "f" not in data:
        raise ProblemFileError("f", "missing field")
    f = decode_poly(data["f"], xs, "f")
    A = data.get("A")
    if not isinstance(A, list) or not A:
        raise ProblemFileError("A", "expected a nonempty list of rows")
    for i, row in enumerate(A):
        if not isinstance(row, list) or len(row) != p:
            raise ProblemFileError(f"A[{i}]", f"row must have p = {p} entries")
    b = _polys(data, "b", xs, True)
    if len(b) != len(A):
        raise ProblemFileError("b", f"A has {len(A)} rows but b has {len(b)} entries")
    g = _polys(data, "g", xus, True)
    if "s" in data and data["s"] != len(g):
        raise ProblemFileError("s", f"s = {data['s']} but g has {len(g)} entries")
    st = data.get("structure", {"kind": "generic"})
    if isinstance(st, str):
        st = {"kind": st}
    kind = st.get("kind", "generic")
    lower = upper = simplex_upper = None
    if kind == "box":
        lower = PolynomialMap(_polys(st, "lower", xs, True))
        upper = PolynomialMap(_polys(st, "upper", xs, True))
    elif kind == "simplex":
        lower = PolynomialMap(_polys(st, "lower", xs, True))
        simplex_upper = decode_poly(st.get("upper"), xs, "structure.upper")
    elif kind != "generic":
        raise ProblemFileError("structure.kind", f"unknown structure {kind!r}")
    try:
        return GsipProblem(
            name=data.get("name", "problem"), n=n, p=p, f=f, A=np.array(A, float), b=b, g=g,
            X_ineq=_polys(data, "X_ineq", xs), X_eq=_polys(data, "X_eq", xs), structure=Structure(kind),
            lower=lower, upper=upper, simplex_upper=simplex_upper,
            convexity=list(data.get("convexity") or [None] * len(g)),
            phi0=_maps(data, "phi0", xs, p), vertices=_maps(data, "vertices", xs, p),
            options=dict(data.get("options", {})), metadata=dict(data.get("metadata", {})))
    except ProblemError as exc:
        raise ProblemFileError("<problem>", str(exc)) from None


def problem_to_dict(problem: GsipProblem) -> dict:
    out: dict[str, Any] = {
        "format": FORMAT,
        "name": problem.name,
        "n": problem.n,
        "p": problem.p,
        "s": problem.s,
        "f": encode_poly(problem.f),
        "X_ineq": [encode_poly(h) for h in problem.X_ineq],
        "X_eq": [encode_poly(h) for h in problem.X_eq],
        "A": problem.A.tolist(),
        "b": [encode_poly(h) for h in problem.b],
        "g": [encode_poly(h) for h in problem.g],
        "convexity": [None if c is None else c.value for c in problem.convexity],
    }
    if problem.structure is Structure.BOX:
        out["structure"] = {"kind": "box", "lower": [encode_poly(h) for h in problem.lower],
                            "upper": [encode_poly(h) for h in problem.upper]}
    elif problem.structure is Structure.SIMPLEX:
        out["structure"] = {"kind": "simplex", "lower": [encode_poly(h) for h in problem.lower],
                            "upper": encode_poly(problem.simplex_upper)}
    else:
        out["structure"] = {"kind": "generic"}
    if problem.phi0 is not None:
        out["phi0"] = [[encode_poly(c) for c in q] for q in problem.phi0]
    if problem.vertices is not None:
        out["vertices"] = [[encode_poly(c) for c in q] for q in problem.vertices]
    if problem.options:
        out["options"] = problem.options
    if problem.metadata:
        out["metadata"] = problem.metadata
    return out


def parse_problem(path) -> GsipProblem:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return problem_from_dict(data)


def emit_problem(problem: GsipProblem, path=None) -> str:
    text = json.dumps(problem_to_dict(problem), indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def same_problem(a: GsipProblem, b: GsipProblem) -> bool:
    """Term-level equality of two problems."""
    def maps_eq(p, q):
        if p is None or q is None:
            return p is q
        return len(p) == len(q) and all(x == y for x, y in zip(p, q))

    return (a.name == b.name and a.n == b.n and a.p == b.p and a.f == b.f
            and np.array_equal(a.A, b.A) and a.b == b.b and a.g == b.g
            and a.X_ineq == b.X_ineq and a.X_eq == b.X_eq and a.structure == b.structure
            and a.convexity == b.convexity and maps_eq(a.phi0, b.phi0) and maps_eq(a.vertices, b.vertices)
            and (a.lower == b.lower) and (a.upper == b.upper) and a.simplex_upper == b.simplex_upper
            and a.metadata == b.metadata and a.options == b.options)
