"""Exact linear algebra over the rationals.

Two representations are used.  Sparse vectors are ``dict[int, mpq]`` (only
nonzero entries stored); they carry the big affine computations.  Small
dense matrices are numpy object arrays of mpq, which keeps ``@``, ``kron``
and slicing available for the finite-dimensional modules.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import sympy
from sympy.polys.matrices import DomainMatrix

from .rational import ONE, ZERO, Q, to_q

SparseVec = dict


# -- sparse vectors ---------------------------------------------------------

def axpy(y: dict, a, x: dict) -> None:
    """y += a*x in place, dropping exact zeros."""
    if not a:
        return
    for k, v in x.items():
        s = y.get(k, ZERO) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def scaled(a, x: dict) -> dict:
    if not a:
        return {}
    return {k: a * v for k, v in x.items()}


def vec_add(*vs: dict) -> dict:
    out: dict = {}
    for v in vs:
        axpy(out, ONE, v)
    return out


class Echelon:
    """Incrementally built echelon basis of a subspace.

    Rows are normalised so the pivot (smallest key) has coefficient 1.
    """

    def __init__(self):
        self.rows: dict = {}

    def __len__(self):
        return len(self.rows)

    def reduce(self, v: dict) -> dict:
        v = dict(v)
        while v:
            p = min(v)
            row = self.rows.get(p)
            if row is None:
                # leading term is new; remaining keys can still reduce but
                # that is unnecessary for membership
                return v
            axpy(v, -v[p], row)
        return v

    def add(self, v: dict) -> bool:
        """Insert v; returns True if it enlarged the span."""
        r = self.reduce(v)
        if not r:
            return False
        p = min(r)
        inv = ONE / r[p]
        self.rows[p] = {k: c * inv for k, c in r.items()}
        return True

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)


def rref(rows: Iterable[dict]) -> dict:
    """Reduced row echelon form as {pivot column: row}."""
    ech = Echelon()
    for r in rows:
        if r:
            ech.add(r)
    piv = ech.rows
    # back substitution, largest pivot first
    for p in sorted(piv, reverse=True):
        prow = piv[p]
        for q in piv:
            if q < p:
                c = piv[q].get(p)
                if c:
                    axpy(piv[q], -c, prow)
    return piv


def nullspace(rows: Iterable[dict], ncols: int) -> list:
    """Basis of {x : r.x = 0 for all rows r}, as sparse vectors.

    The basis vector for free column f has x[f] = 1 and zeros on the other
    free columns, so the output is canonical for a given row space.
    """
    piv = rref(rows)
    assert all(k < ncols for row in piv.values() for k in row), "column out of range"
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = {f: ONE}
        for p, row in piv.items():
            c = row.get(f)
            if c:
                x[p] = -c
        basis.append(x)
    return basis


def sparse_rank(rows: Iterable[dict]) -> int:
    ech = Echelon()
    n = 0
    for r in rows:
        if r and ech.add(r):
            n += 1
    return n


# -- dense object matrices --------------------------------------------------

def qmat(data) -> np.ndarray:
    """Build an mpq object matrix from nested sequences."""
    arr = np.array(data, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_q(v)
    return out


def zeros(n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    out = np.empty((n, m), dtype=object)
    out.fill(ZERO)
    return out


def identity(n: int) -> np.ndarray:
    out = zeros(n)
    for i in range(n):
        out[i, i] = ONE
    return out


def is_zero(a: np.ndarray) -> bool:
    return all(not x for x in a.flat)


def dense_rows(a: np.ndarray) -> list:
    rows = []
    for i in range(a.shape[0]):
        rows.append({j: a[i, j] for j in range(a.shape[1]) if a[i, j]})
    return rows


def rank(a: np.ndarray) -> int:
    return sparse_rank(dense_rows(a))


def kernel(a: np.ndarray) -> list:
    """Right kernel of a dense matrix as a list of column vectors (1-d arrays)."""
    basis = nullspace(dense_rows(a), a.shape[1])
    out = []
    for x in basis:
        v = np.empty(a.shape[1], dtype=object)
        v.fill(ZERO)
        for k, c in x.items():
            v[k] = c
        out.append(v)
    return out


def column_space_basis(vectors: Sequence[np.ndarray]) -> list:
    """Greedy subset of vectors spanning the same space (order kept)."""
    ech = Echelon()
    keep = []
    for v in vectors:
        if ech.add({i: c for i, c in enumerate(v) if c}):
            keep.append(v)
    return keep


def _charpoly_factors(a: np.ndarray) -> list:
    """[(Poly over QQ, multiplicity)] for the characteristic polynomial of a."""
    lam = sympy.Symbol("lam")
    rows = [[sympy.QQ(int(x.numerator), int(x.denominator)) for x in row] for row in a]
    dm = DomainMatrix(rows, a.shape, sympy.QQ)
    poly = sympy.Poly(dm.charpoly(), lam, domain=sympy.QQ)
    return poly.factor_list()[1]


def rational_eigenvalues(a: np.ndarray) -> tuple:
    """Rational eigenvalues with algebraic multiplicity.

    Returns (dict eigenvalue -> multiplicity, number of eigenvalues not in Q).
    """
    n = a.shape[0]
    if n == 0:
        return {}, 0
    out: dict = {}
    irrational = 0
    for p, mult in _charpoly_factors(a):
        if p.degree() == 1:
            c1, c0 = p.all_coeffs()
            r = -c0 / c1
            out[Q(int(r.p), int(r.q))] = out.get(Q(int(r.p), int(r.q)), 0) + mult
        else:
            irrational += p.degree() * mult
    return out, irrational


def jordan_blocks(a: np.ndarray, lam) -> list:
    """Sizes of the Jordan blocks of a at eigenvalue lam, largest first."""
    n = a.shape[0]
    m = a - lam * identity(n)
    ranks = [n]
    power = identity(n)
    while True:
        power = power @ m
        r = rank(power)
        ranks.append(r)
        if r == ranks[-2]:
            break
    # number of blocks of size >= k is ranks[k-1] - ranks[k]
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    sizes = []
    for k in range(len(at_least)):
        exactly = at_least[k] - (at_least[k + 1] if k + 1 < len(at_least) else 0)
        sizes.extend([k + 1] * exactly)
    return sorted(sizes, reverse=True)


def jordan_structure(a: np.ndarray) -> dict:
    """{eigenvalue: block sizes} for the rational part of the spectrum."""
    eig, irr = rational_eigenvalues(a)
    if irr:
        raise ValueError("matrix has eigenvalues outside Q")
    return {lam: jordan_blocks(a, lam) for lam in sorted(eig)}


def inverse(a: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse of a square mpq matrix."""
    n = a.shape[0]
    m = np.concatenate([a.copy(), identity(n)], axis=1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r, col]), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        if piv != col:
            m[[col, piv]] = m[[piv, col]]
        inv = ONE / m[col, col]
        m[col] = m[col] * inv
        for r in range(n):
            if r != col and m[r, col]:
                m[r] = m[r] - m[r, col] * m[col]
    return m[:, n:]


def independent_rows(a: np.ndarray) -> list:
    """Indices of a maximal set of linearly independent rows (greedy, in order)."""
    ech = Echelon()
    out = []
    for i in range(a.shape[0]):
        if ech.add({j: a[i, j] for j in range(a.shape[1]) if a[i, j]}):
            out.append(i)
    return out


def poly_eval(coeffs: Sequence, a: np.ndarray) -> np.ndarray:
    """Evaluate sum coeffs[i] * a^(deg-i) (highest degree first) by Horner."""
    n = a.shape[0]
    out = zeros(n)
    for c in coeffs:
        out = out @ a + to_q(c) * identity(n)
    return out


def factor_charpoly(a: np.ndarray) -> list:
    """Irreducible factors of the characteristic polynomial over Q.

    Returns [(coefficient list, highest degree first, as mpq), multiplicity].
    """
    out = []
    for f, mult in _charpoly_factors(a):
        coeffs = [Q(int(c.p), int(c.q)) for c in f.all_coeffs()]
        out.append((coeffs, mult))
    return out
