"""Exact integer linear algebra on numpy object arrays.

All arithmetic stays in Python integers (``dtype=object``), so nothing here
can overflow.
"""
from math import gcd
from typing import Iterable, List, Sequence, Tuple
import numpy as np


def as_int_matrix(rows: Iterable[Sequence[int]], n_cols: int = None) -> np.ndarray:
    """Copy rows into a 2-d object array of Python ints."""
    rows = [[int(v) for v in row] for row in rows]
    if not rows:
        return np.zeros((0, n_cols or 0), dtype=object)
    return np.array(rows, dtype=object).reshape(len(rows), len(rows[0]))


def exgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Extended GCD: returns (g, x, y) with a*x + b*y = g and g >= 0."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def unimodular_pair(a: int, b: int) -> np.ndarray:
    """2x2 integer matrix M of determinant 1 with M @ [a, b] = [gcd(a, b), 0]."""
    g, x, y = exgcd(a, b)
    if g == 0:
        return np.array([[1, 0], [0, 1]], dtype=object)
    return np.array([[x, y], [-b // g, a // g]], dtype=object)


def row_reduce(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
    """Row Hermite normal form with the unimodular transform.

    Returns (H, U, rank) with U @ A == H, U unimodular, H in reduced row
    echelon form over the integers: positive pivots, entries above a pivot
    in [0, pivot), zero rows last.
    """
    H = np.array(A, dtype=object).copy()
    m, n = H.shape
    U = np.eye(m, dtype=object)
    for i in range(m):
        for j in range(m):
            U[i, j] = int(U[i, j])

    r = 0
    for c in range(n):
        if r == m:
            break
        for i in range(r + 1, m):
            if H[i, c] != 0:
                M = unimodular_pair(H[r, c], H[i, c])
                H[[r, i]] = M @ H[[r, i]]
                U[[r, i]] = M @ U[[r, i]]
        if H[r, c] == 0:
            continue
        if H[r, c] < 0:
            H[r] = -H[r]
            U[r] = -U[r]
        for i in range(r):
            q = H[i, c] // H[r, c]
            if q:
                H[i] = H[i] - q * H[r]
                U[i] = U[i] - q * U[r]
        r += 1

    return H, U, r


def rank(A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    return row_reduce(A)[2]


def hermite_normal_form(rows: Iterable[Sequence[int]], n_cols: int) -> List[Tuple[int, ...]]:
    """Canonical reduced row HNF of the lattice spanned by rows (zero rows dropped)."""
    A = as_int_matrix(rows, n_cols)
    if A.shape[0] == 0:
        return []
    H, _, r = row_reduce(A)
    return [tuple(int(v) for v in H[i]) for i in range(r)]


def left_kernel(A: np.ndarray) -> List[Tuple[int, ...]]:
    """Saturated integer basis of {k : k @ A = 0}, in canonical HNF."""
    m = A.shape[0]
    if m == 0:
        return []
    if A.shape[1] == 0:
        return [tuple(1 if i == j else 0 for j in range(m)) for i in range(m)]
    _, U, r = row_reduce(A)
    basis = [tuple(int(v) for v in U[i]) for i in range(r, m)]
    return hermite_normal_form(basis, m)


def primitive(v: Sequence[int]) -> Tuple[int, ...]:
    """Divide by the gcd of the entries and make the first nonzero entry positive."""
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        return tuple(int(x) for x in v)
    out = [int(x) // g for x in v]
    for x in out:
        if x != 0:
            if x < 0:
                out = [-y for y in out]
            break
    return tuple(out)


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(int(a) * int(b) for a, b in zip(u, v))
