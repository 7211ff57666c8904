"""Dense GF(2) linear algebra on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


class GF2Error(ValueError):
    """Raised for singular or inconsistent GF(2) systems."""


def as_bits(matrix) -> np.ndarray:
    return (np.asarray(matrix, dtype=np.int64) & 1).astype(np.uint8)


def row_reduce(matrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = as_bits(matrix)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return row_reduce_upto(a, a.shape[1])


def rank(matrix) -> int:
    a = as_bits(matrix)
    if a.size == 0:
        return 0
    return len(row_reduce(a)[1])


def nullspace(matrix) -> np.ndarray:
    """Basis of {x : A x = 0} as rows of the returned array."""
    a = as_bits(matrix)
    cols = a.shape[1]
    red, pivots = row_reduce(a)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = red[i, f]
    return basis


def solve(matrix, rhs) -> np.ndarray:
    """One solution of A x = b with every free variable set to 0.

    ``rhs`` may be a vector or a (rows, batch) matrix of right-hand sides; the
    result then has shape (cols, batch).
    """
    a = as_bits(matrix)
    b = as_bits(rhs)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    rows, cols = a.shape
    aug = np.concatenate([a, b], axis=1)
    red, pivots = row_reduce_upto(aug, cols)
    r = len(pivots)
    if np.any(red[r:, cols:]):
        raise GF2Error("inconsistent system")
    x = np.zeros((cols, b.shape[1]), dtype=np.uint8)
    for i, pc in enumerate(pivots):
        x[pc] = red[i, cols:]
    return x[:, 0] if vector else x


def row_reduce_upto(matrix: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    """Row reduction pivoting only on the first ``ncols`` columns."""
    a = as_bits(matrix).copy()
    rows = a.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        if hit.size:
            a[hit] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def inverse(matrix) -> np.ndarray:
    a = as_bits(matrix)
    n, m = a.shape
    if n != m:
        raise GF2Error("matrix is not square")
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    red, pivots = row_reduce_upto(aug, n)
    if len(pivots) != n:
        raise GF2Error("matrix is singular")
    return red[:, n:]


def matmul(a, b) -> np.ndarray:
    return ((as_bits(a).astype(np.int64) @ as_bits(b).astype(np.int64)) & 1).astype(np.uint8)


def in_rowspan(vec, matrix) -> bool:
    m = as_bits(matrix)
    if m.size == 0:
        return not np.any(as_bits(vec))
    return rank(np.vstack([m, as_bits(vec)[None, :]])) == rank(m)
