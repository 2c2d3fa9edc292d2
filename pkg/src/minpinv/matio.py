"""Matrix and vector file I/O: CSV and MatrixMarket array format.

CSV layout: a literal header line ``rows,cols``, a dimensions line
``<m>,<n>``, then m comma-separated rows.  MatrixMarket follows the
standard dense "array" format (column-major values, one per line).
Values are printed with Python's shortest round-trip ``repr`` so a
write/read cycle reproduces every float bit-exactly.

Vectors are stored as single-column matrices; the readers also accept
single-row files.
"""

import numpy as np

from .errors import InputError
from .linalg import require_matrix, require_vector

MM_HEADER = "%%MatrixMarket matrix array real general"


def format_float(value):
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(value))


def _parse_float(token, where):
    try:
        return float(token)
    except ValueError as exc:
        raise InputError(f"cannot parse number {token!r} in {where}") from exc


# ---------------------------------------------------------------------------
# CSV

def dump_matrix_csv(a):
    a = require_matrix(a)
    m, n = a.shape
    lines = ["rows,cols", f"{m},{n}"]
    for row in a:
        lines.append(",".join(format_float(x) for x in row))
    return "\n".join(lines) + "\n"


def load_matrix_csv(text, where="csv input"):
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError(f"{where} is empty")
    start = 0
    if lines[0].replace(" ", "") == "rows,cols":
        start = 1
    if start >= len(lines):
        raise InputError(f"{where} has no dimension line")
    dims = lines[start].split(",")
    if len(dims) != 2:
        raise InputError(f"{where}: dimension line must be 'rows,cols' values")
    try:
        m, n = int(dims[0]), int(dims[1])
    except ValueError as exc:
        raise InputError(f"{where}: bad dimensions {lines[start]!r}") from exc
    if m < 1 or n < 1:
        raise InputError(f"{where}: dimensions must be positive, got {m}x{n}")
    body = lines[start + 1:]
    if len(body) != m:
        raise InputError(f"{where}: expected {m} data rows, found {len(body)}")
    out = np.empty((m, n))
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != n:
            raise InputError(
                f"{where}: row {i + 1} has {len(parts)} entries, expected {n}"
            )
        for j, tok in enumerate(parts):
            out[i, j] = _parse_float(tok, f"{where} row {i + 1}")
    if not np.all(np.isfinite(out)):
        raise InputError(f"{where} contains non-finite entries")
    return out


# ---------------------------------------------------------------------------
# MatrixMarket (dense array format)

def dump_matrix_mm(a):
    a = require_matrix(a)
    m, n = a.shape
    lines = [MM_HEADER, f"{m} {n}"]
    for j in range(n):          # array format stores columns contiguously
        for i in range(m):
            lines.append(format_float(a[i, j]))
    return "\n".join(lines) + "\n"


def load_matrix_mm(text, where="matrixmarket input"):
    lines = text.splitlines()
    if not lines:
        raise InputError(f"{where} is empty")
    header = lines[0].strip().lower().split()
    if header[:2] != ["%%matrixmarket", "matrix"] or header[2:5] != [
        "array", "real", "general",
    ]:
        raise InputError(
            f"{where}: unsupported MatrixMarket header {lines[0]!r} "
            "(need 'matrix array real general')"
        )
    rest = [ln.strip() for ln in lines[1:]]
    rest = [ln for ln in rest if ln and not ln.startswith("%")]
    if not rest:
        raise InputError(f"{where} has no size line")
    dims = rest[0].split()
    if len(dims) != 2:
        raise InputError(f"{where}: bad size line {rest[0]!r}")
    try:
        m, n = int(dims[0]), int(dims[1])
    except ValueError as exc:
        raise InputError(f"{where}: bad size line {rest[0]!r}") from exc
    if m < 1 or n < 1:
        raise InputError(f"{where}: dimensions must be positive, got {m}x{n}")
    values = rest[1:]
    if len(values) != m * n:
        raise InputError(
            f"{where}: expected {m * n} values, found {len(values)}"
        )
    out = np.empty((m, n))
    idx = 0
    for j in range(n):
        for i in range(m):
            out[i, j] = _parse_float(values[idx], where)
            idx += 1
    if not np.all(np.isfinite(out)):
        raise InputError(f"{where} contains non-finite entries")
    return out


# ---------------------------------------------------------------------------
# path-level helpers

def _is_mm_path(path):
    return str(path).lower().endswith((".mtx", ".mm"))


def write_matrix(path, a):
    text = dump_matrix_mm(a) if _is_mm_path(path) else dump_matrix_csv(a)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def read_matrix(path):
    try:
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("%%MatrixMarket") or _is_mm_path(path):
        return load_matrix_mm(text, where=str(path))
    return load_matrix_csv(text, where=str(path))


def write_vector(path, u):
    u = require_vector(u)
    write_matrix(path, u.reshape(-1, 1))


def read_vector(path):
    a = read_matrix(path)
    if a.shape[1] == 1:
        return a[:, 0].copy()
    if a.shape[0] == 1:
        return a[0, :].copy()
    raise InputError(
        f"{path}: expected a single-column or single-row vector, got {a.shape}"
    )
