"""Integer kernels for truncated two-variable series.

Arrays are int64 with axis 0 the z-exponent (offset by the caller) and
axis 1 the q-exponent.  Each kernel has a numba version and a numpy
version with identical results; ``TAKIFF_KERNELS=numpy`` forces numpy,
otherwise numba is used when it imports.
"""
from __future__ import annotations

import os

import numpy as np

# -- numpy versions -------------------------------------------------------------


def _conv_np(a, b, qcut):
    za, qa = a.shape
    zb, qb = b.shape
    out = np.zeros((za + zb - 1, qcut + 1), dtype=np.int64)
    for j in range(min(qa, qcut + 1)):
        col = a[:, j]
        if not col.any():
            continue
        for i in range(zb):
            row = b[i, : qcut + 1 - j]
            nz = np.nonzero(col)[0]
            if nz.size == 0 or not row.any():
                continue
            out[nz + i, j: j + row.size] += np.outer(col[nz], row)
    return out


def _binomial_np(arr, c, dz, dq):
    """arr <- arr * (1 + c z^dz q^dq), in place; needs headroom for dz."""
    nz, nq = arr.shape
    if dq >= nq:
        return
    src = arr.copy()
    if dz >= 0:
        arr[dz:, dq:] += c * src[: nz - dz, : nq - dq]
    else:
        arr[: nz + dz, dq:] += c * src[-dz:, : nq - dq]


def _geometric_np(arr, step):
    """arr <- arr / (1 - q^step), in place."""
    nq = arr.shape[1]
    for j in range(step, nq):
        arr[:, j] += arr[:, j - step]


def _flow_np(arr, zmin, ell, shift, width):
    """Move entry (z, q) to (z, q + ell*z - shift), dropping q outside [0, width)."""
    nz, nq = arr.shape
    out = np.zeros((nz, width), dtype=np.int64)
    for r in range(nz):
        d = ell * (zmin + r) - shift
        lo, hi = max(0, -d), min(nq, width - d)
        if lo < hi:
            out[r, lo + d: hi + d] = arr[r, lo:hi]
    return out


def _eval_np(arr, zpow, qpow):
    """sum c[r, j] zpow[r] qpow[j] with complex power tables."""
    return complex(zpow @ arr.astype(np.complex128) @ qpow)


def _abs_row_sums_np(arr, zabs):
    return np.abs(arr).astype(np.float64).T @ zabs


# -- numba versions ----------------------------------------------------------------

try:
    from numba import njit
except ImportError:          # pragma: no cover - numba is a declared dependency
    njit = None

if njit is not None:

    @njit(cache=True)
    def _conv_nb(a, b, qcut):
        za, qa = a.shape
        zb, qb = b.shape
        out = np.zeros((za + zb - 1, qcut + 1), dtype=np.int64)
        for r1 in range(za):
            for j1 in range(min(qa, qcut + 1)):
                c = a[r1, j1]
                if c == 0:
                    continue
                for r2 in range(zb):
                    for j2 in range(min(qb, qcut + 1 - j1)):
                        out[r1 + r2, j1 + j2] += c * b[r2, j2]
        return out

    @njit(cache=True)
    def _binomial_nb(arr, c, dz, dq):
        nz, nq = arr.shape
        if dq >= nq:
            return
        src = arr.copy()
        for r in range(nz):
            s = r - dz
            if s < 0 or s >= nz:
                continue
            for j in range(dq, nq):
                arr[r, j] += c * src[s, j - dq]

    @njit(cache=True)
    def _geometric_nb(arr, step):
        nz, nq = arr.shape
        for j in range(step, nq):
            for r in range(nz):
                arr[r, j] += arr[r, j - step]

    @njit(cache=True)
    def _flow_nb(arr, zmin, ell, shift, width):
        nz, nq = arr.shape
        out = np.zeros((nz, width), dtype=np.int64)
        for r in range(nz):
            d = ell * (zmin + r) - shift
            for j in range(nq):
                t = j + d
                if 0 <= t < width:
                    out[r, t] = arr[r, j]
        return out

    @njit(cache=True)
    def _eval_nb(arr, zpow, qpow):
        acc = 0j
        nz, nq = arr.shape
        for r in range(nz):
            row = 0j
            for j in range(nq):
                if arr[r, j] != 0:
                    row += arr[r, j] * qpow[j]
            acc += row * zpow[r]
        return acc

    @njit(cache=True)
    def _abs_row_sums_nb(arr, zabs):
        nz, nq = arr.shape
        out = np.zeros(nq)
        for r in range(nz):
            for j in range(nq):
                out[j] += abs(arr[r, j]) * zabs[r]
        return out


def backend() -> str:
    if os.environ.get("TAKIFF_KERNELS", "").lower() == "numpy" or njit is None:
        return "numpy"
    return "numba"


def _pick(name):
    def call(*args):
        fn = globals()[f"_{name}_{'nb' if backend() == 'numba' else 'np'}"]
        return fn(*args)
    call.__name__ = name
    return call


conv = _pick("conv")
binomial = _pick("binomial")
geometric = _pick("geometric")
flow = _pick("flow")
evaluate = _pick("eval")
abs_row_sums = _pick("abs_row_sums")
