"""Text formats shared by every command.

Matrix file: line 1 holds ``n``; each of the next ``n`` lines holds ``n``
whitespace-separated decimals or the token ``inf``.  Masses file: ``n``
decimals on one line.  Index-list file: one integer per line.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class FormatError(ValueError):
    """Malformed input file; ``line`` is 1-based."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}: line {line}: {message}")


def _token(tok: str, path, line: int) -> float:
    if tok.lower() in ("inf", "+inf"):
        return math.inf
    try:
        value = float(tok)
    except ValueError:
        raise FormatError(path, line, f"cannot parse {tok!r} as a decimal") from None
    if not math.isfinite(value):
        raise FormatError(path, line, f"only the token 'inf' may be non-finite, got {tok!r}")
    return value


def read_matrix(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(path, 1, "expected the matrix size n")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise FormatError(path, 1, f"matrix size {lines[0].strip()!r} is not an integer") from None
    if n < 1:
        raise FormatError(path, 1, "matrix size must be positive")
    rows = lines[1:]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) < n:
        raise FormatError(path, len(rows) + 1,
                          f"unexpected end of file: expected {n} rows, found {len(rows)}")
    if len(rows) > n:
        raise FormatError(path, n + 2, f"extra content after {n} rows")
    out = np.empty((n, n))
    for i, row in enumerate(rows):
        toks = row.split()
        if len(toks) != n:
            raise FormatError(path, i + 2, f"expected {n} entries, found {len(toks)}")
        out[i] = [_token(t, path, i + 2) for t in toks]
    return out


def format_value(x: float) -> str:
    if math.isinf(x) and x > 0:
        return "inf"
    return repr(float(x))


def write_matrix(path, values) -> None:
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    lines = [str(n)]
    lines += [" ".join(format_value(x) for x in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_masses(path, n: int | None = None) -> np.ndarray:
    """Masses from ``path``; uniform over ``n`` points when ``path`` is None."""
    if path is None:
        if n is None:
            raise ValueError("need n for uniform masses")
        return np.full(n, 1.0 / n)
    toks = Path(path).read_text().split()
    masses = np.array([_token(t, path, 1) for t in toks])
    if n is not None and masses.shape[0] != n:
        raise FormatError(path, 1, f"expected {n} masses, found {masses.shape[0]}")
    return masses


def write_masses(path, masses) -> None:
    Path(path).write_text(" ".join(format_value(x) for x in masses) + "\n")


def read_index_list(path) -> list[int]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        try:
            out.append(int(s))
        except ValueError:
            raise FormatError(path, lineno, f"expected an integer index, got {s!r}") from None
    return out


def write_index_list(path, indices) -> None:
    Path(path).write_text("".join(f"{int(i)}\n" for i in indices))


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with stable key order; infinities become the string ``"inf"``."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, default=_default)


def _clean(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return _clean(obj.to_dict())
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")
