"""JSON matrix files: ``{"n": n, "re": [[...]], "im": [[...]]}``, row-major."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .linalg import HERMITIAN_TOL, hermitian_deviation


class MatrixFileError(DomainError):
    """A matrix file is malformed or fails its Hermitian check."""


def matrix_to_dict(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"n": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_dict(data, hermitian: bool = True) -> np.ndarray:
    if not isinstance(data, dict):
        raise MatrixFileError("matrix file must hold a JSON object")
    for key in ("n", "re", "im"):
        if key not in data:
            raise MatrixFileError(f"missing field '{key}'")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MatrixFileError(f"field 'n' must be a positive integer, got {n!r}")
    parts = {}
    for key in ("re", "im"):
        try:
            arr = np.array(data[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise MatrixFileError(f"field '{key}' is not a numeric array: {exc}") from None
        if arr.shape != (n, n):
            raise MatrixFileError(f"field '{key}' has shape {arr.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(arr)):
            raise MatrixFileError(f"field '{key}' has non-finite entries")
        parts[key] = arr
    M = parts["re"] + 1j * parts["im"]
    if hermitian:
        dev = hermitian_deviation(M)
        if dev > HERMITIAN_TOL * max(float(np.max(np.abs(M))), 1.0):
            raise MatrixFileError(f"matrix is not Hermitian: max |A - A*| = {dev:.3e}")
    return M


def load_matrix(path, hermitian: bool = True) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return matrix_from_dict(data, hermitian=hermitian)


def save_matrix(path, M) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(M)) + "\n", encoding="utf-8")
