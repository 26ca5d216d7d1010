"""Exact truncated series in z and q with rational offsets.

A :class:`FormalSeries` represents

    z^zoff q^qoff  sum_{r, j} c[r, j] z^(zmin + r) q^j

with integer coefficients.  ``zoff`` is normalised into [0, 1); ``qoff`` is
any rational.  Coefficients are only *known* on a region

    j <= cutoff + slope * (zmin + r)      and      zlo <= zmin + r <= zhi

(bounds optional).  Plain truncation has slope 0; substituting z -> z q^l
tilts the region, which keeps every stored coefficient honest.  Entries
outside the region are stored as zero and never compared.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .rational import Q, fmt_q, floor_q, to_q

_LIMIT = 2 ** 62


def _frac(x) -> tuple:
    """(integer part, fractional part in [0,1))."""
    x = to_q(x)
    f = floor_q(x)
    return f, x - f


@dataclass(frozen=True, eq=False)
class FormalSeries:
    zoff: Q
    qoff: Q
    zmin: int
    coeffs: np.ndarray
    cutoff: int
    slope: int = 0
    zlo: int | None = None
    zhi: int | None = None

    # -- construction --

    @classmethod
    def make(cls, coeffs, zexp=0, qoff=0, cutoff=None, slope=0, zlo=None, zhi=None):
        """Series z^zexp q^qoff sum c[r, j] z^r q^j with zexp rational."""
        zi, zf = _frac(zexp)
        arr = np.ascontiguousarray(np.asarray(coeffs, dtype=np.int64))
        if arr.ndim != 2:
            raise ValueError("coefficients must be a 2-d array")
        cut = arr.shape[1] - 1 if cutoff is None else cutoff
        shift = lambda b: None if b is None else b + zi
        s = cls(zf, to_q(qoff), zi, arr, cut, slope, shift(zlo), shift(zhi))
        return s._clean()

    @classmethod
    def one(cls, cutoff: int) -> "FormalSeries":
        arr = np.zeros((1, cutoff + 1), dtype=np.int64)
        arr[0, 0] = 1
        return cls.make(arr, cutoff=cutoff)

    @classmethod
    def from_terms(cls, terms: dict, zoff, qoff, cutoff: int) -> "FormalSeries":
        """From {(z_int, q_int): c} relative to the given offsets."""
        zi, zf = _frac(zoff)
        if not terms:
            return cls(zf, to_q(qoff), zi, np.zeros((1, cutoff + 1), dtype=np.int64), cutoff)
        zs = [a for a, _ in terms]
        lo, hi = min(zs), max(zs)
        arr = np.zeros((hi - lo + 1, cutoff + 1), dtype=np.int64)
        for (a, b), c in terms.items():
            if b < 0:
                raise ValueError("negative q index")
            if b <= cutoff:
                arr[a - lo, b] += int(c)
        return cls(zf, to_q(qoff), lo + zi, arr, cutoff)._clean()

    def _clean(self) -> "FormalSeries":
        """Zero entries outside the known region and trim empty z rows."""
        arr = self.coeffs.copy()
        nz, nq = arr.shape
        zs = self.zmin + np.arange(nz)
        limit = self.cutoff + self.slope * zs
        mask = np.arange(nq)[None, :] > limit[:, None]
        if self.zlo is not None:
            mask |= (zs < self.zlo)[:, None]
        if self.zhi is not None:
            mask |= (zs > self.zhi)[:, None]
        arr[mask] = 0
        rows = np.nonzero(arr.any(axis=1))[0]
        if rows.size == 0:
            return FormalSeries(self.zoff, self.qoff, self.zmin, np.zeros((1, max(nq, 1)), np.int64),
                                self.cutoff, self.slope, self.zlo, self.zhi)
        lo, hi = rows[0], rows[-1]
        return FormalSeries(self.zoff, self.qoff, self.zmin + int(lo), arr[lo: hi + 1],
                            self.cutoff, self.slope, self.zlo, self.zhi)

    # -- inspection --

    def known(self, z: int, j: int) -> bool:
        if j < 0 or j > self.cutoff + self.slope * z:
            return False
        if self.zlo is not None and z < self.zlo:
            return False
        return self.zhi is None or z <= self.zhi

    def terms(self) -> dict:
        """{(z_int, q_int): c} of nonzero coefficients relative to the offsets."""
        out = {}
        rs, js = np.nonzero(self.coeffs)
        for r, j in zip(rs, js):
            out[(self.zmin + int(r), int(j))] = int(self.coeffs[r, j])
        return out

    def coefficient(self, zexp, qexp) -> int:
        """Coefficient of z^zexp q^qexp (absolute exponents)."""
        z = to_q(zexp) - self.zoff
        j = to_q(qexp) - self.qoff
        if z.denominator != 1 or j.denominator != 1:
            return 0
        z, j = int(z), int(j)
        if not self.known(z, j):
            raise KeyError("coefficient outside the known region")
        r = z - self.zmin
        if 0 <= r < self.coeffs.shape[0] and 0 <= j < self.coeffs.shape[1]:
            return int(self.coeffs[r, j])
        return 0

    def q_coefficients(self, j: int) -> dict:
        """{absolute z exponent: c} at relative q index j."""
        out = {}
        if j < self.coeffs.shape[1]:
            for r in np.nonzero(self.coeffs[:, j])[0]:
                out[self.zoff + self.zmin + int(r)] = int(self.coeffs[r, j])
        return out

    def q_totals(self) -> list:
        return [int(x) for x in self.coeffs.sum(axis=0)[: self.cutoff + 1]]

    @property
    def is_rectangular(self) -> bool:
        return self.slope == 0 and self.zlo is None and self.zhi is None

    def to_json(self) -> dict:
        return {"z_offset": fmt_q(self.zoff), "q_offset": fmt_q(self.qoff), "cutoff": self.cutoff,
                "slope": self.slope, "terms": [[z, j, c] for (z, j), c in sorted(self.terms().items())]}

    # -- arithmetic --

    def _aligned(self, other: "FormalSeries") -> int:
        """Integer d with other.qoff = self.qoff + d."""
        if self.zoff != other.zoff:
            raise ValueError("z offsets differ by a non-integer")
        d = other.qoff - self.qoff
        if d.denominator != 1:
            raise ValueError("q offsets differ by a non-integer")
        if self.slope != other.slope:
            raise ValueError("known regions have different slopes")
        return int(d)

    def _combine(self, other: "FormalSeries", sign: int) -> "FormalSeries":
        d = self._aligned(other)
        base = min(0, d)                        # new qoff = self.qoff + base
        sa, sb = -base, d - base                # column shifts
        cut = min(self.cutoff + sa, other.cutoff + sb)
        zlo = _max_opt(self.zlo, other.zlo)
        zhi = _min_opt(self.zhi, other.zhi)
        lo = min(self.zmin, other.zmin)
        hi = max(self.zmin + self.coeffs.shape[0], other.zmin + other.coeffs.shape[0])
        width = max(self.coeffs.shape[1] + sa, other.coeffs.shape[1] + sb, cut + 1)
        arr = np.zeros((hi - lo, width), dtype=np.int64)
        ra = self.zmin - lo
        arr[ra: ra + self.coeffs.shape[0], sa: sa + self.coeffs.shape[1]] += self.coeffs
        rb = other.zmin - lo
        arr[rb: rb + other.coeffs.shape[0], sb: sb + other.coeffs.shape[1]] += sign * other.coeffs
        return FormalSeries(self.zoff, self.qoff + base, lo, arr, cut, self.slope, zlo, zhi)._clean()

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c: int) -> "FormalSeries":
        _check_overflow(int(np.abs(self.coeffs).max(initial=0)) * abs(int(c)))
        return FormalSeries(self.zoff, self.qoff, self.zmin, self.coeffs * int(c), self.cutoff,
                            self.slope, self.zlo, self.zhi)

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        if not (self.is_rectangular and other.is_rectangular):
            raise ValueError("products need plain truncated series")
        _check_overflow(int(np.abs(self.coeffs).sum()) * int(np.abs(other.coeffs).sum()))
        cut = min(self.cutoff, other.cutoff)
        arr = K.conv(self.coeffs, other.coeffs, cut)
        zi, zf = _frac(self.zoff + other.zoff)
        return FormalSeries(zf, self.qoff + other.qoff, self.zmin + other.zmin + zi, arr, cut)._clean()

    def shift(self, zexp=0, qexp=0) -> "FormalSeries":
        """Multiply by z^zexp q^qexp; zexp must keep q offsets aligned (integral
        when the region is tilted)."""
        zi, zf = _frac(self.zoff + to_q(zexp))
        dz = zi
        if self.slope and zf != self.zoff:
            raise ValueError("fractional z shift of a tilted series")
        # row r keeps its coefficients; its integer z moves by dz, so the
        # bound j <= cutoff + slope*z needs cutoff - slope*dz
        return FormalSeries(zf, self.qoff + to_q(qexp), self.zmin + dz, self.coeffs,
                            self.cutoff - self.slope * dz, self.slope,
                            None if self.zlo is None else self.zlo + dz,
                            None if self.zhi is None else self.zhi + dz)

    def parity_twist(self, ref) -> "FormalSeries":
        """Multiply the coefficient of z^x by (-1)^(x - ref); x - ref must be integral."""
        d = to_q(ref) - self.zoff
        if d.denominator != 1:
            raise ValueError("reference exponent is not congruent to the z offset")
        signs = np.where((self.zmin - int(d) + np.arange(self.coeffs.shape[0])) % 2 == 0, 1, -1)
        return FormalSeries(self.zoff, self.qoff, self.zmin, self.coeffs * signs[:, None],
                            self.cutoff, self.slope, self.zlo, self.zhi)

    def flow(self, ell: int) -> "FormalSeries":
        """Substitute z -> z q^ell."""
        ell = int(ell)
        if ell == 0:
            return self
        nz, nq = self.coeffs.shape
        zs = self.zmin + np.arange(nz)
        qoff = self.qoff + ell * self.zoff
        # smallest new column among stored entries
        d = ell * zs
        low = int(d.min())
        shift = low
        width = nq + int(d.max()) - low
        arr = K.flow(self.coeffs, self.zmin, ell, shift, width)
        cutoff = self.cutoff - shift
        return FormalSeries(self.zoff, qoff + shift, self.zmin, arr, cutoff, self.slope + ell,
                            self.zlo, self.zhi)._clean()

    def restrict_z(self, zlo=None, zhi=None) -> "FormalSeries":
        """Restrict the known region to zlo <= z <= zhi (absolute exponents)."""
        conv = lambda b: None if b is None else int(to_q(b) - self.zoff)
        lo = _max_opt(self.zlo, conv(zlo))
        hi = _min_opt(self.zhi, conv(zhi))
        return FormalSeries(self.zoff, self.qoff, self.zmin, self.coeffs, self.cutoff, self.slope,
                            lo, hi)._clean()

    def truncate(self, cutoff: int) -> "FormalSeries":
        return FormalSeries(self.zoff, self.qoff, self.zmin, self.coeffs, min(cutoff, self.cutoff),
                            self.slope, self.zlo, self.zhi)._clean()

    def agree(self, other: "FormalSeries") -> tuple:
        """Compare on the intersection of known regions.

        Returns (equal, number of positions compared, first mismatch or None).
        Positions are counted only where at least one side is nonzero.
        """
        if self.zoff != other.zoff:
            return False, 0, ("z offset", fmt_q(self.zoff), fmt_q(other.zoff))
        d = other.qoff - self.qoff
        if d.denominator != 1:
            return False, 0, ("q offset", fmt_q(self.qoff), fmt_q(other.qoff))
        d = int(d)
        a, b = self.terms(), other.terms()
        keys = set(a) | {(z, j + d) for z, j in b}
        compared = 0
        for z, j in sorted(keys):
            if not (self.known(z, j) and other.known(z, j - d)):
                continue
            compared += 1
            x, y = a.get((z, j), 0), b.get((z, j - d), 0)
            if x != y:
                return False, compared, (z, j, x, y)
        return True, compared, None

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        same_region = (self.cutoff, self.slope, self.zlo, self.zhi) == (other.cutoff, other.slope,
                                                                         other.zlo, other.zhi)
        return same_region and self.qoff == other.qoff and self.agree(other)[0]

    __hash__ = None


def _max_opt(a, b):
    if a is None:
        return b
    return a if b is None else max(a, b)


def _min_opt(a, b):
    if a is None:
        return b
    return a if b is None else min(a, b)


def _check_overflow(bound: int) -> None:
    if bound >= _LIMIT:
        raise OverflowError("series coefficients may exceed int64; lower the cutoff")


# -- product builders ------------------------------------------------------------------

def product(factors, cutoff: int, zexp=0, qoff=0, bosons: int = 0) -> FormalSeries:
    """z^zexp q^qoff prod (1 + c z^dz q^dq) / prod_{i>=1} (1 - q^i)^bosons.

    ``factors`` is a list of (c, dz, dq) with dq >= 0; each appears once.
    """
    neg = sum(max(0, -dz) for c, dz, dq in factors if dq <= cutoff)
    pos = sum(max(0, dz) for c, dz, dq in factors if dq <= cutoff)
    arr = np.zeros((neg + pos + 1, cutoff + 1), dtype=np.int64)
    arr[neg, 0] = 1
    for c, dz, dq in factors:
        if dq <= cutoff:
            K.binomial(arr, int(c), int(dz), int(dq))
    for i in range(1, cutoff + 1):
        for _ in range(bosons):
            K.geometric(arr, i)
    _check_overflow(int(np.abs(arr).max(initial=0)) * 4)
    return FormalSeries.make(arr, to_q(zexp) - neg, qoff, cutoff)


def fermion_factors(sign: int, zpow: int, start: int, cutoff: int, mult: int = 1) -> list:
    """Factors (1 + sign z^zpow q^i)^mult for i >= start."""
    return [(sign, zpow, i) for i in range(start, cutoff + 1) for _ in range(mult)]


def eta_power(p: int, cutoff: int) -> FormalSeries:
    """eta(q)^p = q^(p/24) prod (1 - q^i)^p."""
    if p >= 0:
        facs = [(-1, 0, i) for i in range(1, cutoff + 1) for _ in range(p)]
        return product(facs, cutoff, 0, Q(p, 24))
    return product([], cutoff, 0, Q(p, 24), bosons=-p)
