"""Reader and writer for Matrix Market coordinate files."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import ParseError, ValidationError

FIELDS = ("real", "pattern", "integer")
SYMMETRIES = ("symmetric", "general")


def read_matrix_market(path):
    """Parse a square coordinate file into a symmetric CSR matrix.

    Duplicate entries collapse: pattern entries become 1 and for valued
    files the last occurrence wins. Files stored as ``symmetric`` are
    mirrored across the diagonal; ``general`` files are averaged with their
    transpose.

    Returns
    -------
    scipy.sparse.csr_matrix
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise ParseError("missing %%MatrixMarket header", 1)
    obj, fmt, field, symm = (h.lower() for h in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(f"unsupported object/format {obj} {fmt}", 1)
    if field not in FIELDS:
        raise ParseError(f"unsupported field {field!r}", 1)
    if symm not in SYMMETRIES:
        raise ParseError(f"unsupported symmetry {symm!r}", 1)

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if s and not s.startswith("%"):
            size = s.split()
            break
    if size is None:
        raise ParseError("missing size line", lineno)
    try:
        nrows, ncols, nnz = (int(t) for t in size)
    except ValueError:
        raise ParseError(f"bad size line {' '.join(size)!r}", lineno) from None
    if nrows != ncols:
        raise ValidationError(f"adjacency must be square, got {nrows}x{ncols}")
    if nrows < 1 or nnz < 0:
        raise ParseError("nonpositive dimension or negative entry count", lineno)

    entries = {}
    count = 0
    want = 2 if field == "pattern" else 3
    for ln in range(lineno + 1, len(lines) + 1):
        s = lines[ln - 1].strip()
        if not s or s.startswith("%"):
            continue
        tok = s.split()
        if len(tok) != want:
            raise ParseError(f"expected {want} fields, got {len(tok)}", ln)
        try:
            i, j = int(tok[0]), int(tok[1])
            v = 1.0 if field == "pattern" else float(tok[2])
        except ValueError:
            raise ParseError(f"bad entry {s!r}", ln) from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise ValidationError(f"line {ln}: index ({i}, {j}) out of bounds for {nrows}x{ncols}")
        if symm == "symmetric":
            i, j = max(i, j), min(i, j)
        entries[(i - 1, j - 1)] = v
        count += 1
    if count != nnz:
        raise ParseError(f"header declares {nnz} entries, found {count}", len(lines))

    if entries:
        ij = np.array(list(entries.keys()), dtype=np.int64)
        vals = np.array(list(entries.values()), dtype=float)
        rows, cols = ij[:, 0], ij[:, 1]
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsr()
    if symm == "symmetric":
        A = A + sp.tril(A, -1).T
    else:
        A = 0.5 * (A + A.T)
    return sp.csr_matrix(A)


def write_matrix_market(path, A, field="pattern", comment=None):
    """Write the lower triangle of a symmetric matrix in coordinate format."""
    if field not in ("pattern", "real"):
        raise ValidationError(f"unsupported field {field!r}")
    L = sp.tril(sp.csr_matrix(A)).tocoo()
    order = np.lexsort((L.row, L.col))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field} symmetric\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {L.nnz}\n")
        for idx in order:
            if field == "pattern":
                fh.write(f"{L.row[idx] + 1} {L.col[idx] + 1}\n")
            else:
                fh.write(f"{L.row[idx] + 1} {L.col[idx] + 1} {L.data[idx]:.17g}\n")
