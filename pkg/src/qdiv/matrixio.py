"""Plain-text matrix files.

A matrix file is one JSON object ``{"dim": d, "re": [[...]], "im": [[...]]}``
with row-major real and imaginary parts. A projector file is
``{"dim": d, "projectors": [<matrix object>, ...]}``. Floats are written with
17 significant digits, which round-trips IEEE doubles bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError


class MatrixFileError(ValidationError):
    pass


def _fmt(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise MatrixFileError(f"cannot serialise non-finite value {x!r}")
    s = format(x, ".17g")
    # "-0" would come back as the integer 0 and lose its sign
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _rows(a: np.ndarray, indent: str) -> str:
    rows = ("[" + ", ".join(_fmt(x) for x in row) + "]" for row in a)
    return "[\n" + ",\n".join(indent + "  " + r for r in rows) + "\n" + indent + "]"


def _matrix_text(m, indent: str = "") -> str:
    a = np.asarray(m, dtype=complex)
    return (
        "{\n"
        f'{indent}  "dim": {a.shape[0]},\n'
        f'{indent}  "re": {_rows(a.real, indent + "  ")},\n'
        f'{indent}  "im": {_rows(a.imag, indent + "  ")}\n'
        f"{indent}}}"
    )


def dumps_matrix(m) -> str:
    return _matrix_text(m) + "\n"


def dumps_projectors(projectors) -> str:
    ps = [np.asarray(p) for p in projectors]
    dim = ps[0].shape[0] if ps else 0
    body = ",\n".join("    " + _matrix_text(p, "    ") for p in ps)
    return f'{{\n  "dim": {dim},\n  "projectors": [\n{body}\n  ]\n}}\n'


def _parse_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, dict) or not {"dim", "re", "im"} <= obj.keys():
        raise MatrixFileError(f"{where}: expected an object with keys dim, re, im")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MatrixFileError(f"{where}: dim must be a positive integer, got {dim!r}")
    parts = []
    for key in ("re", "im"):
        rows = obj[key]
        if (
            not isinstance(rows, list)
            or len(rows) != dim
            or any(not isinstance(r, list) or len(r) != dim for r in rows)
        ):
            raise MatrixFileError(f"{where}: '{key}' must be a {dim}x{dim} array")
        try:
            arr = np.array(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise MatrixFileError(f"{where}: '{key}' has non-numeric entries") from exc
        parts.append(arr)
    out = np.empty((dim, dim), dtype=complex)
    out.real, out.imag = parts  # arithmetic would drop signed zeros
    return out


def _load(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise MatrixFileError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def read_matrix(path) -> np.ndarray:
    return _parse_matrix(_load(path), str(path))


def read_projectors(path) -> list[np.ndarray]:
    obj = _load(path)
    if not isinstance(obj, dict) or not isinstance(obj.get("projectors"), list):
        raise MatrixFileError(f"{path}: expected an object with a 'projectors' list")
    ps = [_parse_matrix(p, f"{path}[projectors][{i}]") for i, p in enumerate(obj["projectors"])]
    if not ps:
        raise MatrixFileError(f"{path}: empty projector list")
    dim = obj.get("dim", ps[0].shape[0])
    if any(p.shape[0] != dim for p in ps):
        raise MatrixFileError(f"{path}: projector dimensions disagree with dim={dim}")
    return ps


def write_matrix(path, m) -> None:
    Path(path).write_text(dumps_matrix(m))


def write_projectors(path, projectors) -> None:
    Path(path).write_text(dumps_projectors(projectors))


def digest(*paths) -> str:
    """SHA-256 over the raw bytes of the given files, in order."""
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()
