"""JSON wire formats for algebras, matrices and vectors."""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .exact_linalg import Matrix, as_fraction, format_fraction
from .nary_core import NaryAlgebra

__all__ = [
    "FormatError",
    "algebra_to_json",
    "algebra_from_json",
    "load_algebra",
    "read_json",
    "vector_from_json",
    "vectors_from_json",
    "matrix_from_json",
    "vector_to_json",
]


class FormatError(ValueError):
    """Malformed input file or identifier."""


_BUILTIN = re.compile(r"^A:(\d+)$")


def algebra_to_json(A: NaryAlgebra) -> dict:
    brackets = []
    for idx in sorted(A.sc):
        val = A.sc[idx]
        brackets.append({
            "args": list(idx),
            "value": {str(j + 1): format_fraction(c) for j, c in enumerate(val) if c},
        })
    return {"arity": A.arity, "dim": A.dim, "brackets": brackets}


def _scalar(x, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise FormatError(f"{where}: expected an integer or a \"p/q\" string, got {x!r}")
    try:
        return as_fraction(x)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def _check_keys(obj, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise FormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise FormatError(f"{where}: missing keys {sorted(missing)}")


def algebra_from_json(data) -> NaryAlgebra:
    keys = {"arity", "dim", "brackets"}
    _check_keys(data, keys, "algebra", keys)
    arity, d = data["arity"], data["dim"]
    if not (isinstance(arity, int) and isinstance(d, int)) or arity < 2 or d < 1:
        raise FormatError("algebra: arity must be an integer >= 2 and dim an integer >= 1")
    if not isinstance(data["brackets"], list):
        raise FormatError("algebra: brackets must be an array")
    sc = {}
    for n, entry in enumerate(data["brackets"]):
        where = f"brackets[{n}]"
        _check_keys(entry, {"args", "value"}, where, {"args", "value"})
        args = entry["args"]
        if (not isinstance(args, list) or len(args) != arity
                or not all(isinstance(i, int) and not isinstance(i, bool) for i in args)):
            raise FormatError(f"{where}: args must be {arity} integers")
        if any(b <= a for a, b in zip(args, args[1:])) or args[0] < 1 or args[-1] > d:
            raise FormatError(f"{where}: args must be strictly increasing within 1..{d}")
        if tuple(args) in sc:
            raise FormatError(f"{where}: duplicate args {args}")
        value = entry["value"]
        if not isinstance(value, dict):
            raise FormatError(f"{where}: value must be an object")
        vec = [Fraction(0)] * d
        for j, c in value.items():
            if not re.fullmatch(r"[1-9]\d*", j) or int(j) > d:
                raise FormatError(f"{where}: bad coordinate key {j!r}")
            vec[int(j) - 1] = _scalar(c, f"{where}.value[{j}]")
        sc[tuple(args)] = vec
    return NaryAlgebra(arity, d, sc)


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_algebra(name: str) -> NaryAlgebra:
    """Built-in identifier ("A:4" .. "A:9", "M8") or path to an algebra JSON file."""
    m = _BUILTIN.match(name)
    if m:
        from .filippov import FilippovDomainError, build_filippov
        try:
            return build_filippov(int(m.group(1)))
        except FilippovDomainError as exc:
            raise FormatError(str(exc)) from exc
    if name == "M8":
        from .malcev import build_m8
        return build_m8()
    if not Path(name).exists():
        raise FormatError(f"unknown algebra identifier or missing file: {name!r}")
    return algebra_from_json(read_json(name))


def vector_from_json(data, d: int = None, where: str = "vector") -> tuple:
    if not isinstance(data, list):
        raise FormatError(f"{where}: expected an array")
    v = tuple(_scalar(x, f"{where}[{k}]") for k, x in enumerate(data))
    if d is not None and len(v) != d:
        raise FormatError(f"{where}: expected length {d}, got {len(v)}")
    return v


def vectors_from_json(data, d: int = None, where: str = "points") -> list:
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise FormatError(f"{where}: expected an array of arrays")
    return [vector_from_json(r, d, f"{where}[{k}]") for k, r in enumerate(data)]


def matrix_from_json(data, d: int = None, where: str = "matrix") -> Matrix:
    rows = vectors_from_json(data, None, where)
    if not rows:
        raise FormatError(f"{where}: empty matrix")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise FormatError(f"{where}: ragged rows")
    if d is not None and (len(rows), n) != (d, d):
        raise FormatError(f"{where}: expected {d}x{d}, got {len(rows)}x{n}")
    return Matrix.from_rows(rows, n)


def vector_to_json(v) -> list:
    return [format_fraction(x) for x in v]
