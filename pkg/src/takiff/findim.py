"""Finite-dimensional modules of Takiff gl(1|1).

Generators are indexed in the order of :data:`GENS`, which is also the
basis order of the built-in ``gl11_takiff`` spec.  Modules hold one dense
mpq matrix per generator; the defining relations are checked against the
structure constants of that spec rather than restated here.

Labels follow the average-N convention: the N-label of a module is the
mean N-eigenvalue of its states.  :func:`label_n_from_hws` is the single
place where highest-weight eigenvalues are converted to labels.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg as la
from .algebra import EVEN, ODD, builtin, sign
from .rational import ONE, ZERO, Q, fmt_q, to_q

GENS = ("N", "E", "psi+", "psi-", "tN", "tE", "tpsi+", "tpsi-")
N, E, PP, PM, TN, TE, TPP, TPM = range(8)
ODD_GENS = frozenset((PP, PM, TPP, TPM))

KINDS = ("A", "S", "T", "V", "P", "GenTyp")
IRREDUCIBLE = ("A", "S", "T")


@lru_cache(maxsize=1)
def takiff_gl11():
    return builtin("gl11_takiff")


@dataclass(frozen=True, order=True)
class FinWeight:
    n: Q
    e: Q
    tn: Q
    te: Q

    def __post_init__(self):
        for f in ("n", "e", "tn", "te"):
            object.__setattr__(self, f, to_q(getattr(self, f)))

    def __add__(self, other: "FinWeight") -> "FinWeight":
        return FinWeight(self.n + other.n, self.e + other.e, self.tn + other.tn, self.te + other.te)


@dataclass(frozen=True, order=True)
class ClassLabel:
    """A module class; ``m`` is only used by GenTyp."""
    kind: str
    n: Q
    e: Q = ZERO
    tn: Q = ZERO
    te: Q = ZERO
    m: int = 0

    def __post_init__(self):
        for f in ("n", "e", "tn", "te"):
            object.__setattr__(self, f, to_q(getattr(self, f)))
        k, e, te = self.kind, self.e, self.te
        if k not in KINDS:
            raise ValueError(f"unknown kind {k!r}")
        if k in ("A", "P") and (e or te):
            raise ValueError(f"{k} requires e = te = 0")
        if k == "S" and (te or not e):
            raise ValueError("S requires te = 0 and e != 0")
        if k in ("T", "GenTyp") and not te:
            raise ValueError(f"{k} requires te != 0")
        if k == "V" and te:
            raise ValueError("V (reducible Verma) requires te = 0")
        if k == "GenTyp" and self.m < 2:
            raise ValueError("GenTyp needs m >= 2")
        if k != "GenTyp" and self.m:
            raise ValueError("m is only meaningful for GenTyp")

    @property
    def dim(self) -> int:
        return {"A": 1, "S": 2, "T": 4, "V": 4, "P": 4}.get(self.kind, 4 * self.m)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "n": fmt_q(self.n), "e": fmt_q(self.e),
               "tn": fmt_q(self.tn), "te": fmt_q(self.te)}
        if self.kind == "GenTyp":
            out["m"] = self.m
        return out

    @classmethod
    def from_json(cls, d: dict) -> "ClassLabel":
        return cls(d["kind"], to_q(d.get("n", "0")), to_q(d.get("e", "0")),
                   to_q(d.get("tn", "0")), to_q(d.get("te", "0")), int(d.get("m", 0)))

    def __str__(self):
        sub = f"{fmt_q(self.n)},{fmt_q(self.e)}|{fmt_q(self.tn)},{fmt_q(self.te)}"
        return f"{self.kind}{self.m if self.m else ''}_{{{sub}}}"


def label_n_from_hws(kind: str, hws_n) -> Q:
    """N-label (average eigenvalue) of a module generated from a hws of N-eigenvalue hws_n."""
    hws_n = to_q(hws_n)
    shift = {"A": ZERO, "S": Q(1, 2), "T": ONE, "V": ONE, "GenTyp": ONE, "P": ONE}[kind]
    return hws_n - shift


def hws_n_from_label(kind: str, n) -> Q:
    return to_q(n) - label_n_from_hws(kind, 0)


# -- modules -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FinModule:
    action: tuple                 # 8 square mpq matrices in GENS order
    parities: tuple               # parity of each basis state
    name: str = field(default="", compare=False)

    @property
    def dimension(self) -> int:
        return len(self.parities)

    def mat(self, g) -> np.ndarray:
        return self.action[GENS.index(g) if isinstance(g, str) else g]

    @property
    def states(self) -> list:
        """(weight, parity) per basis state; tn is the diagonal entry of tN,
        which is its generalised eigenvalue in the triangular bases used here."""
        a = self.action
        return [(FinWeight(a[N][i, i], a[E][i, i], a[TN][i, i], a[TE][i, i]), self.parities[i])
                for i in range(self.dimension)]

    def check(self) -> None:
        """Raise ValueError unless the matrices define a module."""
        spec = takiff_gl11()
        d = self.dimension
        for g, m in enumerate(self.action):
            if m.shape != (d, d):
                raise ValueError(f"{GENS[g]} matrix has shape {m.shape}")
            want = 1 if g in ODD_GENS else 0
            for i in range(d):
                for j in range(d):
                    if m[i, j] and (self.parities[i] + self.parities[j]) & 1 != want:
                        raise ValueError(f"{GENS[g]} does not have parity {want}")
        for a in range(8):
            for b in range(a, 8):
                lhs = la.zeros(d)
                for c, v in spec.structure.get((a, b), {}).items():
                    lhs = lhs + v * self.action[c]
                ma, mb = self.action[a], self.action[b]
                rhs = ma @ mb - sign(spec.parity(a) * spec.parity(b)) * (mb @ ma)
                if not np.array_equal(lhs, rhs):
                    raise ValueError(f"relation [{GENS[a]},{GENS[b]}] fails")

    def restrict(self, columns: list) -> "FinModule":
        """Module structure on the invariant span of the given homogeneous columns."""
        b = np.stack(columns, axis=1) if columns else la.zeros(self.dimension, 0)
        rows = la.independent_rows(b)
        binv = la.inverse(b[rows, :])
        act = []
        for m in self.action:
            img = m @ b
            sub = binv @ img[rows, :]
            if not np.array_equal(b @ sub, img):
                raise ValueError("span is not invariant")
            act.append(sub)
        pars = []
        for v in columns:
            ps = {self.parities[i] for i in range(self.dimension) if v[i]}
            if len(ps) != 1:
                raise ValueError("column is not parity homogeneous")
            pars.append(ps.pop())
        return FinModule(tuple(act), tuple(pars), self.name)


def _module(mats: dict, parities, name="") -> FinModule:
    d = len(parities)
    act = tuple(mats.get(g, la.zeros(d)) for g in range(8))
    return FinModule(act, tuple(parities), name)


def verma(w: FinWeight) -> FinModule:
    """Verma module on |v>, psi-|v>, tpsi-|v>, tpsi- psi-|v> (hws weight w)."""
    n, e, tn, te = w.n, w.e, w.tn, w.te
    m = {g: la.zeros(4) for g in range(8)}
    for i, dn in enumerate((0, 1, 1, 2)):
        m[N][i, i] = n - dn
        m[E][i, i] = e
        m[TE][i, i] = te
        m[TN][i, i] = tn
    m[TN][2, 1] = -ONE              # tN psi-v = tn psi-v - tpsi-v
    m[PM][1, 0] = ONE               # psi- v
    m[PM][3, 2] = -ONE              # psi- tpsi- v = -tpsi- psi- v
    m[TPM][2, 0] = ONE
    m[TPM][3, 1] = ONE
    m[PP][0, 1] = e                 # psi+ psi- v = e v
    m[PP][0, 2] = te                # psi+ tpsi- v = te v
    m[PP][1, 3] = te                # psi+ tpsi- psi- v = te psi- v - e tpsi- v
    m[PP][2, 3] = -e
    m[TPP][0, 1] = te
    m[TPP][2, 3] = -te              # tpsi+ tpsi- psi- v = -te tpsi- v
    return _module(m, (EVEN, ODD, ODD, EVEN), f"V(hws {fmt_q(n)})")


def atypical(n, tn) -> FinModule:
    m = {g: la.zeros(1) for g in range(8)}
    m[N][0, 0] = to_q(n)
    m[TN][0, 0] = to_q(tn)
    return _module(m, (EVEN,), "A")


def semitypical(n, e, tn) -> FinModule:
    """S_{n,e|tn,0}: quotient of the Verma module of hws n + 1/2."""
    return _s_module(FinWeight(to_q(n) + Q(1, 2), e, tn, 0))


def irreducible_quotient(w: FinWeight) -> tuple:
    """(module, label) for the irreducible quotient of verma(w)."""
    if w.te:
        return verma(w), ClassLabel("T", label_n_from_hws("T", w.n), w.e, w.tn, w.te)
    if w.e:
        return _s_module(w), ClassLabel("S", label_n_from_hws("S", w.n), w.e, w.tn, ZERO)
    return atypical(w.n, w.tn), ClassLabel("A", w.n, ZERO, w.tn, ZERO)


def _s_module(w: FinWeight) -> FinModule:
    # quotient of the Verma module by the span of tpsi-v, tpsi- psi-v
    v = verma(w)
    keep = [0, 1]
    act = tuple(m[np.ix_(keep, keep)].copy() for m in v.action)
    return FinModule(act, (EVEN, ODD), "S")


def generalized_verma(w: FinWeight, m: int = 2) -> FinModule:
    """m copies of verma(w) glued by a nilpotent shift in tN (GenTyp_m)."""
    v = verma(w)
    j = la.zeros(m)
    for i in range(m - 1):
        j[i + 1, i] = ONE           # tN |v_i> = tn |v_i> + |v_{i+1}>
    ident = la.identity(m)
    act = [np.kron(a, ident) for a in v.action]
    act[TN] = act[TN] + np.kron(la.identity(4), j)
    pars = tuple(p for p in v.parities for _ in range(m))
    return FinModule(tuple(act), pars, f"GenTyp{m}")


def module_for_label(lab: ClassLabel) -> FinModule:
    """A concrete module in the class (irreducible for A/S/T)."""
    hn = hws_n_from_label(lab.kind, lab.n)
    w = FinWeight(hn, lab.e, lab.tn, lab.te)
    if lab.kind == "A":
        return atypical(lab.n, lab.tn)
    if lab.kind == "S":
        return _s_module(w)
    if lab.kind in ("T", "V"):
        return verma(w)
    if lab.kind == "GenTyp":
        return generalized_verma(w, lab.m)
    # P_{n,0|tn,0} = S_{0,1|0,0} x S_{0,-1|0,0} x A_{n,0|tn,0}
    s1 = module_for_label(ClassLabel("S", 0, 1, 0, 0))
    s2 = module_for_label(ClassLabel("S", 0, -1, 0, 0))
    return tensor(tensor(s1, s2), atypical(lab.n, lab.tn))


def tensor(m1: FinModule, m2: FinModule) -> FinModule:
    """Graded tensor product: x(a b) = (xa) b + (-1)^{|x||a|} a (xb)."""
    i1, i2 = la.identity(m1.dimension), la.identity(m2.dimension)
    p1 = la.zeros(m1.dimension)
    for i, p in enumerate(m1.parities):
        p1[i, i] = sign(p)
    act = []
    for g in range(8):
        left = i1 if g not in ODD_GENS else p1
        act.append(np.kron(m1.action[g], i2) + np.kron(left, m2.action[g]))
    pars = tuple((a + b) & 1 for a in m1.parities for b in m2.parities)
    return FinModule(tuple(act), pars, f"({m1.name})x({m2.name})")


def casimir_matrices(m: FinModule) -> tuple:
    a = m.action
    q1 = a[N] @ a[TE] + a[TN] @ a[E] + a[PM] @ a[TPP] + a[TPM] @ a[PP]
    q2 = a[TN] @ a[TE] + a[TPM] @ a[TPP]
    return q1, q2


def jordan_structure(m: FinModule, generator) -> dict:
    return la.jordan_structure(m.mat(generator))


# -- decomposition ---------------------------------------------------------------

def _blocks(m: FinModule) -> dict:
    """State indices grouped by (N, E, tE, parity); requires those diagonal."""
    a = m.action
    for g in (N, E, TE):
        d = a[g]
        if any(d[i, j] for i in range(m.dimension) for j in range(m.dimension) if i != j):
            raise ValueError(f"{GENS[g]} must act diagonally")
    out: dict = {}
    for i in range(m.dimension):
        key = (a[N][i, i], a[E][i, i], a[TE][i, i], m.parities[i])
        out.setdefault(key, []).append(i)
    return out


def weight_multiset(m: FinModule) -> Counter:
    """Counter of (n, e, tn, te): tn is the generalised tN eigenvalue."""
    out: Counter = Counter()
    for (n, e, te, _), idx in _blocks(m).items():
        sub = m.action[TN][np.ix_(idx, idx)]
        eig, irr = la.rational_eigenvalues(sub)
        if irr:
            raise ValueError("tN has non-rational eigenvalues")
        for tn, mult in eig.items():
            out[(n, e, tn, te)] += mult
    return out


_PROFILE = {"A": (ZERO,), "S": (Q(1, 2), Q(-1, 2)), "T": (ONE, ZERO, ZERO, -ONE)}


def composition_factors(m: FinModule) -> Counter:
    """Composition factors, peeled from the weight multiset.

    Irreducible characters are unitriangular with respect to the highest
    N-eigenvalue, so repeatedly removing the character of the irreducible
    whose top weight is the current top weight is exact.
    """
    chars = weight_multiset(m)
    groups: dict = {}
    for (n, e, tn, te), c in chars.items():
        groups.setdefault((e, tn, te), Counter())[n] += c
    out: Counter = Counter()
    for (e, tn, te), ns in groups.items():
        kind = "T" if te else ("S" if e else "A")
        prof = _PROFILE[kind]
        while +ns:
            top = max(k for k, v in ns.items() if v)
            label_n = top - prof[0]
            mult = ns[top]
            for d in prof:
                ns[label_n + d] -= mult
                if ns[label_n + d] < 0:
                    raise ValueError("weights are not a sum of irreducible characters")
            out[ClassLabel(kind, label_n, e, tn, te)] += mult
            ns = +ns
    return out


@dataclass(frozen=True)
class Unidentified:
    dim: int
    weights: tuple
    jordan_tN: dict

    def to_json(self) -> dict:
        return {"kind": "unidentified", "dim": self.dim,
                "jordan_tN": {fmt_q(k): v for k, v in sorted(self.jordan_tN.items())}}


@dataclass(frozen=True)
class DecompositionReport:
    summands: tuple               # ClassLabel or Unidentified, sorted
    factors: Counter

    def factor_list(self) -> list:
        return sorted(self.factors.elements())

    def to_json(self) -> dict:
        return {"summands": [s.to_json() for s in self.summands],
                "factors": [lab.to_json() for lab in self.factor_list()]}


def endomorphisms(m: FinModule) -> list:
    """Basis of the even module endomorphisms (they preserve the weight blocks)."""
    blocks = list(_blocks(m).values())
    unknowns = [(i, j) for idx in blocks for i in idx for j in idx]
    pos = {u: k for k, u in enumerate(unknowns)}
    d = m.dimension
    rows = []
    for g in range(8):
        a = m.action[g]
        nz_cols = [[i for i in range(d) if a[i, j]] for j in range(d)]
        nz_rows = [[j for j in range(d) if a[i, j]] for i in range(d)]
        # (X a - a X)[i, j] = sum_k X[i,k] a[k,j] - a[i,k] X[k,j]
        for i in range(d):
            for j in range(d):
                row: dict = {}
                for k in nz_cols[j]:
                    u = pos.get((i, k))
                    if u is not None:
                        row[u] = row.get(u, ZERO) + a[k, j]
                for k in nz_rows[i]:
                    u = pos.get((k, j))
                    if u is not None:
                        row[u] = row.get(u, ZERO) - a[i, k]
                row = {k: v for k, v in row.items() if v}
                if row:
                    rows.append(row)
    out = []
    for x in la.nullspace(rows, len(unknowns)):
        mat = la.zeros(d)
        for u, v in x.items():
            mat[unknowns[u]] = v
        out.append(mat)
    return out


def _fitting_split(m: FinModule, b: np.ndarray) -> list | None:
    """Split m along the coprime factors of b's characteristic polynomial."""
    blocks = list(_blocks(m).values())
    factors = la.factor_charpoly(b)
    if len(factors) < 2:
        return None
    parts = []
    for coeffs, mult in factors:
        f = la.poly_eval(coeffs, b)
        fm = la.identity(m.dimension)
        for _ in range(mult):
            fm = fm @ f
        cols = []
        for idx in blocks:
            sub = fm[np.ix_(idx, idx)]
            for v in la.kernel(sub):
                col = np.empty(m.dimension, dtype=object)
                col.fill(ZERO)
                for k, i in enumerate(idx):
                    col[i] = v[k]
                cols.append(col)
        parts.append(m.restrict(cols))
    return parts


def indecomposable_summands(m: FinModule, rng: random.Random | None = None,
                            tries: int = 40) -> list:
    """Split m into summands with local endomorphism rings (best effort).

    Every endomorphism whose characteristic polynomial has two coprime
    factors yields a Fitting splitting.  Basis elements are tried first,
    then random small-integer combinations.
    """
    rng = rng or random.Random(0)
    if m.dimension <= 1:
        return [m]
    ends = endomorphisms(m)
    if len(ends) <= 1:
        return [m]
    cands = list(ends)
    for _ in range(tries):
        cands.append(sum((rng.randint(-3, 3) * x for x in ends), la.zeros(m.dimension)))
    for b in cands:
        parts = _fitting_split(m, b)
        if parts:
            out = []
            for p in parts:
                out.extend(indecomposable_summands(p, rng, tries))
            return out
    return [m]


def _top_space(m: FinModule) -> tuple:
    ntop = max(m.action[N][i, i] for i in range(m.dimension))
    return ntop, [i for i in range(m.dimension) if m.action[N][i, i] == ntop]


def _span_dim(vectors: list) -> int:
    return len(la.column_space_basis(vectors))


def _generated_dim(m: FinModule, starts: list) -> int:
    """Dimension of the span of lowering-operator descendants of starts."""
    a = m.action
    vecs = list(starts)
    for s in starts:
        pm = a[PM] @ s
        tpm = a[TPM] @ s
        vecs += [pm, tpm, a[TPM] @ pm]
    return _span_dim(vecs)


def identify(m: FinModule) -> ClassLabel | Unidentified:
    """Name an indecomposable summand when it matches a known class."""
    a = m.action
    d = m.dimension
    es = {a[E][i, i] for i in range(d)}
    tes = {a[TE][i, i] for i in range(d)}
    chars = weight_multiset(m)
    tns = {k[2] for k in chars}
    avg = sum((a[N][i, i] for i in range(d)), ZERO) / d
    jord = la.jordan_structure(a[TN]) if len(tns) == 1 else {}

    def unidentified():
        return Unidentified(d, tuple(sorted(chars.items())), la.jordan_structure(a[TN]))

    if len(es) != 1 or len(tes) != 1 or len(tns) != 1:
        return unidentified()
    e, te, tn = es.pop(), tes.pop(), tns.pop()
    ntop, top = _top_space(m)
    basis_vec = []
    for i in top:
        v = np.empty(d, dtype=object)
        v.fill(ZERO)
        v[i] = ONE
        basis_vec.append(v)
    raisers_kill = all(la.is_zero(a[g][:, top]) for g in (PP, TPP))
    if d == 1:
        return ClassLabel("A", avg, e, tn, te) if not (e or te) else unidentified()
    if d == 2 and te == 0 and e and len(top) == 1 and raisers_kill:
        if _generated_dim(m, basis_vec) == 2:
            return ClassLabel("S", avg, e, tn, ZERO)
    if d == 4 and len(top) == 1 and raisers_kill and _generated_dim(m, basis_vec) == 4:
        return ClassLabel("T" if te else "V", avg, e, tn, te)
    if d == 4 and not (e or te) and jord.get(tn) == [1, 1, 1, 1] \
            and la.is_zero(a[TPP]) and la.is_zero(a[TPM]) \
            and not la.is_zero(a[PP]) and not la.is_zero(a[PM]):
        ns = sorted((a[N][i, i] for i in range(d)), reverse=True)
        if ns == [avg + 1, avg, avg, avg - 1]:
            return ClassLabel("P", avg, ZERO, tn, ZERO)
    if d == 8 and te and len(top) == 2 and raisers_kill and _generated_dim(m, basis_vec) == 8:
        sub = a[TN][np.ix_(top, top)]
        if not la.is_zero(sub - tn * la.identity(2)):
            return ClassLabel("GenTyp", avg, e, tn, te, m=2)
    return unidentified()


def _sort_key(s):
    if isinstance(s, ClassLabel):
        return (0, s)
    return (1, s.dim, str(s.jordan_tN))


def decompose(m: FinModule, full_structure: bool = True) -> DecompositionReport:
    factors = composition_factors(m)
    summands: tuple = ()
    if full_structure:
        parts = indecomposable_summands(m)
        summands = tuple(sorted((identify(p) for p in parts), key=_sort_key))
        total = sum(p.dimension for p in parts)
        assert total == m.dimension
    return DecompositionReport(summands, factors)


# -- Grothendieck ring -----------------------------------------------------------

def expand_verma(lab: ClassLabel) -> Counter:
    """[V_{n,e|tn,0}] in terms of irreducibles."""
    if lab.kind != "V":
        return Counter({lab: 1})
    n, e, tn = lab.n, lab.e, lab.tn
    h = Q(1, 2)
    if e:
        return Counter({ClassLabel("S", n + h, e, tn): 1, ClassLabel("S", n - h, e, tn): 1})
    return Counter({ClassLabel("A", n + 1, 0, tn): 1, ClassLabel("A", n, 0, tn): 2,
                    ClassLabel("A", n - 1, 0, tn): 1})


def _typ(n, e, tn, te) -> Counter:
    kind = "T" if te else "V"
    return expand_verma(ClassLabel(kind, n, e, tn, te))


def groth_product(a: ClassLabel, b: ClassLabel) -> Counter:
    """Product of two irreducible classes, expanded to irreducibles."""
    for x in (a, b):
        if x.kind not in IRREDUCIBLE:
            raise ValueError(f"groth_product takes irreducible classes, got {x.kind}")
    order = {"A": 0, "S": 1, "T": 2}
    if order[a.kind] > order[b.kind]:
        a, b = b, a
    n, e, tn = a.n + b.n, a.e + b.e, a.tn + b.tn
    h = Q(1, 2)
    if a.kind == "A":
        return Counter({ClassLabel(b.kind, n, b.e, tn, b.te): 1})
    if a.kind == "S" and b.kind == "S":
        return _typ(n, e, tn, ZERO)
    if a.kind == "S":
        return _typ(n + h, e, tn, b.te) + _typ(n - h, e, tn, b.te)
    te = a.te + b.te
    out = _typ(n + 1, e, tn, te) + _typ(n - 1, e, tn, te)
    for k, v in _typ(n, e, tn, te).items():
        out[k] += 2 * v
    return out


def groth_mul(x: Counter, y: Counter) -> Counter:
    """Bilinear extension of groth_product to combinations."""
    out: Counter = Counter()
    for a, ca in x.items():
        for b, cb in y.items():
            for c, cc in groth_product(a, b).items():
                out[c] += ca * cb * cc
    return +out


def groth_to_json(x: Counter) -> list:
    return [{"coeff": c, **lab.to_json()} for lab, c in sorted(x.items())]
