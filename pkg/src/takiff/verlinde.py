"""S-matrix entries, the continuum Verlinde formula and fusion of affine
Takiff gl(1|1) modules.

Weights enter only through the measure-normalised variables

    n,   e/k,   k tn/tk,   te/tk

in which the typical S-matrix exponent has integer coefficients.  Every
integrand is a finite or singly-infinite sum of pure phases
exp(2 pi i L) with L affine-linear in each integration variable, so each
integral is a delta function of a coefficient.  Everything is symbolic
(sympy) and exact.
"""
from __future__ import annotations

import functools
import json
from collections import Counter
from dataclasses import dataclass, field

import sympy as sp

from .affine import AffClassLabel
from .algebra import LevelPair
from .rational import Q, fmt_q, is_integer, to_q

HALF = Q(1, 2)

# integration variables, in the order the integrals are done
TE, KTN, E, N = sp.symbols("te'/tk k*tn'/tk e'/k n'")
INTEGRATION_ORDER = (TE, KTN, E, N)
# parameters of the third (basis) module in a Verlinde coefficient
C_N, C_E, C_KTN, C_TE = sp.symbols("n3 e3/k k*tn3/tk te3/tk")
C_PARAMS = (C_N, C_E, C_KTN, C_TE)

STATUS_DEDUCED = "deduced"
STATUS_CONJ = "conjectural-per-paper"
STATUS_GROTH = "Grothendieck-only"


def _r(x):
    """mpq or int -> sympy Rational; sympy expressions pass through."""
    if isinstance(x, sp.Basic):
        return x
    x = to_q(x)
    return sp.Rational(int(x.numerator), int(x.denominator))


def _q(x) -> Q:
    x = sp.nsimplify(x)
    if not x.is_Rational:
        raise ValueError(f"expected a rational, got {x}")
    return Q(int(x.p), int(x.q))


# -- normalised weights ----------------------------------------------------------------

@dataclass(frozen=True)
class NormWeight:
    """(n, e/k, k tn/tk, te/tk) of a typical or Verma label."""
    n: object
    e: object
    ktn: object
    te: object

    def as_tuple(self):
        return self.n, self.e, self.ktn, self.te


def normalise(n, e, tn, te, levels: LevelPair) -> NormWeight:
    k, tk = levels.k, levels.tk
    if not k:
        raise NotImplementedError("k = 0 is not supported")
    return NormWeight(_r(n), _r(to_q(e) / k), _r(k * to_q(tn) / tk), _r(to_q(te) / tk))


def basis_label(nw: NormWeight, levels: LevelPair) -> AffClassLabel:
    """Typical (te/tk not integral) or reducible Verma class with these parameters."""
    k, tk = levels.k, levels.tk
    te = _q(nw.te)
    kind = "V" if is_integer(te) else "T"
    return AffClassLabel(kind, _q(nw.n), _q(nw.e) * k, _q(nw.ktn) * tk / k, te * tk)


# -- S-matrix entries --------------------------------------------------------------------

def typical_exponent(p, d=(N, E, KTN, TE)):
    """Exponent L of S = exp(2 pi i L) between (n, e/k, k tn/tk, te/tk) tuples p and d."""
    n, e, ktn, te = (_r(x) for x in p)
    n2, e2, ktn2, te2 = d
    return -(n * te2 + n2 * te + ktn * e2 + ktn2 * e + 2 * te * te2 - ktn * te2 - ktn2 * te)


DENOMINATORS = ("none", "2cos", "4cos2")


@dataclass(frozen=True)
class SEntry:
    """exp(2 pi i exponent) / denominator(pi te'/tk)."""
    kind: str                       # typical, semitypical, atypical, vacuum
    exponent: object
    denominator: str = "none"
    flow: int = 0

    def value(self, n, e, ktn, te) -> complex:
        """Numerical value at primed normalised variables."""
        sub = {N: n, E: e, KTN: ktn, TE: te}
        val = complex(sp.exp(2 * sp.pi * sp.I * self.exponent.subs(sub)).evalf())
        c = complex(sp.cos(sp.pi * te).evalf()) if self.denominator != "none" else 1
        return val / {"none": 1, "2cos": 2 * c, "4cos2": 4 * c * c}[self.denominator]

    def to_json(self) -> dict:
        return {"kind": self.kind, "exponent": str(self.exponent), "denominator": self.denominator,
                "flow": self.flow}


def s_entry(label: AffClassLabel, levels: LevelPair) -> SEntry:
    k, tk = levels.k, levels.tk
    if label.kind in ("T", "V"):
        nw = normalise(label.n, label.e, label.tn, label.te, levels)
        return SEntry("typical", sp.expand(typical_exponent(nw.as_tuple())))
    n, ktn, ell = _r(label.n), _r(k * label.tn / tk), label.flow
    base = -(n * TE + ktn * E - ktn * TE + N * ell)
    if label.kind == "S":
        e = _r(label.e / k)
        return SEntry("semitypical", sp.expand(base - KTN * e), "2cos", ell)
    kind = "vacuum" if (label.n, label.tn, ell) == (0, 0, 0) else "atypical"
    return SEntry(kind, sp.expand(base), "4cos2", ell)


# -- phase sums ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseTerm:
    """coeff * (-1)^(sum of alternating indices) * exp(2 pi i exponent)."""
    coeff: object
    exponent: object
    alternating: tuple = ()


@dataclass(frozen=True)
class PhaseSum:
    terms: tuple
    indices: tuple = ()             # series indices, each summed over 0, 1, 2, ...

    def __mul__(self, other: "PhaseSum") -> "PhaseSum":
        if set(self.indices) & set(other.indices):
            raise ValueError("series indices must be distinct")
        terms = tuple(PhaseTerm(sp.expand(a.coeff * b.coeff), sp.expand(a.exponent + b.exponent),
                                a.alternating + b.alternating)
                      for a in self.terms for b in other.terms)
        return PhaseSum(terms, self.indices + other.indices)

    @classmethod
    def phase(cls, exponent) -> "PhaseSum":
        return cls((PhaseTerm(sp.Integer(1), exponent),))


def cos_expand(marker: str, index, var=TE) -> PhaseSum:
    """1/(2 cos pi x) = sum (-1)^m exp(i pi (2m+1) x),
    1/(4 cos^2 pi x) = sum (-1)^m (m+1) exp(2 pi i (m+1) x)."""
    m = index
    if marker == "2cos":
        return PhaseSum((PhaseTerm(sp.Integer(1), (m + sp.Rational(1, 2)) * var, (m,)),), (m,))
    if marker == "4cos2":
        return PhaseSum((PhaseTerm(m + 1, (m + 1) * var, (m,)),), (m,))
    raise ValueError(f"unknown denominator marker {marker!r}")


def cos_power(p: int, var=TE) -> PhaseSum:
    """(2 cos pi x)^p for p >= 0 as a finite phase sum."""
    terms = tuple(PhaseTerm(sp.binomial(p, j), sp.Rational(p - 2 * j, 2) * var) for j in range(p + 1))
    return PhaseSum(terms)


def resum_pair(ps: PhaseSum, new_index) -> PhaseSum:
    """Cauchy product: rewrite a two-index sum whose exponents depend on
    m1 + m2 only as a one-index sum over m = m1 + m2."""
    if len(ps.indices) != 2:
        raise ValueError("need exactly two series indices")
    m1, m2 = ps.indices
    m = new_index
    out = []
    for t in ps.terms:
        expo = sp.expand(t.exponent.subs(m1, m - m2))
        if m2 in expo.free_symbols:
            raise ValueError("exponent does not depend on m1 + m2 alone")
        if set(t.alternating) != {m1, m2}:
            raise ValueError("both indices must alternate")
        c = sp.summation(t.coeff.subs(m1, m - m2), (m2, 0, m))
        out.append(PhaseTerm(sp.factor(c), expo, (m,)))
    return PhaseSum(tuple(out), (m,))


# -- delta calculus --------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaProduct:
    """prod_v delta(constraint_v = 0) with a multiplicity; constraints keyed by
    the integration variable they came from."""
    constraints: tuple              # ((variable, expression), ...)
    multiplicity: object
    alternating: tuple = ()
    indices: tuple = ()
    residual: object = sp.Integer(0)

    def to_json(self) -> dict:
        return {"constraints": [{"from": str(v), "delta": f"{sp.sstr(c)} = 0"} for v, c in self.constraints],
                "multiplicity": str(self.multiplicity),
                "alternating": [str(m) for m in self.alternating],
                "indices": [str(m) for m in self.indices]}

    def solve(self, unknowns) -> tuple:
        """(solution dict, |Jacobian|) for the delta arguments in the given unknowns."""
        eqs = [c for _, c in self.constraints]
        A, b = sp.linear_eq_to_matrix(eqs, list(unknowns))
        det = A.det()
        if det == 0:
            raise ValueError("delta constraints are degenerate")
        sol = A.LUsolve(b)
        return {u: sp.expand(s) for u, s in zip(unknowns, sol)}, abs(det)


def integrate_phase(ps: PhaseSum, order=INTEGRATION_ORDER) -> list:
    """Integrate every term over R in each variable: exp(2 pi i a x) -> delta(a)."""
    out = []
    for t in ps.terms:
        expo = sp.expand(t.exponent)
        cons = []
        rest = expo
        for x in order:
            poly = sp.Poly(rest, x)
            if poly.degree() > 1:
                raise ValueError(f"exponent is not affine-linear in {x}")
            a = sp.expand(poly.coeff_monomial(x))
            if a.free_symbols & set(order):
                raise ValueError(f"coefficient of {x} involves other integration variables")
            cons.append((x, a))
            rest = sp.expand(rest - a * x)
        out.append(DeltaProduct(tuple(cons), t.coeff, t.alternating, ps.indices, rest))
    return out


def unitarity_check() -> DeltaProduct:
    """int S(w, w')^* S(w, w'') over w in the normalised measure."""
    w = sp.symbols("n e/k k*tn/tk te/tk")
    p1 = sp.symbols("n' e'/k k*tn'/tk te'/tk")
    p2 = sp.symbols("n'' e''/k k*tn''/tk te''/tk")
    expo = -typical_exponent(w, p1) + typical_exponent(w, p2)
    order = (w[3], w[2], w[1], w[0])
    (dp,) = integrate_phase(PhaseSum.phase(expo), order)
    return dp


def unitarity_constraints() -> tuple:
    """(solution of the four deltas for the '' variables, Jacobian factor)."""
    dp = unitarity_check()
    p2 = sp.symbols("n'' e''/k k*tn''/tk te''/tk")
    sol, jac = dp.solve(p2)
    return sol, jac, dp


# -- Verlinde ---------------------------------------------------------------------------------

_DEPTH = {"none": 0, "2cos": 1, "4cos2": 2}


class UnresolvedSeries(ValueError):
    pass


@dataclass
class GrothFusionElement:
    terms: Counter
    status: str = "Grothendieck"
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"status": self.status,
                "terms": [{"coeff": c, **lab.to_json()} for lab, c in sorted(self.terms.items())],
                "delta_trace": self.trace}


def verlinde_integrand(a: AffClassLabel, b: AffClassLabel, levels: LevelPair) -> PhaseSum:
    """S_a S_b S_C^* / S_0 with C a symbolic basis module, denominators expanded."""
    sa, sb = s_entry(a, levels), s_entry(b, levels)
    sc = -typical_exponent(C_PARAMS)
    ps = PhaseSum.phase(sp.expand(sa.exponent + sb.exponent + sc))
    p = 2 - _DEPTH[sa.denominator] - _DEPTH[sb.denominator]
    m = sp.Symbol("m", integer=True, nonnegative=True)
    if p >= 0:
        return ps * cos_power(p)
    return ps * cos_expand("2cos" if p == -1 else "4cos2", m)


def _term_labels(dp: DeltaProduct, levels: LevelPair) -> tuple:
    sol, jac = dp.solve(C_PARAMS)
    if dp.residual != 0:
        res = sp.expand(dp.residual.subs(sol))
        if not (res.is_integer or (res.is_Rational and res.q == 1)):
            raise UnresolvedSeries(f"residual phase {res}")
    mult = sp.expand(dp.multiplicity / jac)
    return sol, mult


def _resum(sol: dict, mult, dp: DeltaProduct, levels: LevelPair) -> AffClassLabel:
    """Recognise sum_m (-1)^m mult(m) [V^(m)] as one S^ or A^ class."""
    (m,) = dp.indices
    if tuple(dp.alternating) != (m,):
        raise UnresolvedSeries("series is not alternating")
    slope = [sp.expand(sp.diff(sol[c], m)) for c in C_PARAMS]
    if slope != [-1, 0, 0, 0]:
        raise UnresolvedSeries(f"unexpected progression {slope}")
    base = {c: sp.expand(sol[c].subs(m, 0)) for c in C_PARAMS}
    ell = _q(base[C_TE])
    if not is_integer(ell):
        raise UnresolvedSeries("flow of a resummed family must be integral")
    ell = int(ell)
    k, tk = levels.k, levels.tk
    ktn = _q(base[C_KTN]) * tk / k
    eb = (_q(base[C_E]) - ell) * k
    n0 = _q(base[C_N])
    if sp.expand(mult - 1) == 0:
        if not eb:
            raise UnresolvedSeries("multiplicity-one family with e = 0 is not irreducible")
        return AffClassLabel("S", n0 + HALF + 2 * ell, eb, ktn, 0, ell)
    if sp.expand(mult - (m + 1)) == 0:
        if eb:
            raise UnresolvedSeries("(m+1) family needs e = flow * k")
        return AffClassLabel("A", n0 + 1 + 2 * ell, 0, ktn, 0, ell)
    raise UnresolvedSeries(f"unrecognised multiplicity {mult}")


@functools.lru_cache(maxsize=None)
def _verlinde_cached(a: AffClassLabel, b: AffClassLabel, levels: LevelPair) -> tuple:
    ps = verlinde_integrand(a, b, levels)
    out = Counter()
    trace = []
    for dp in integrate_phase(ps):
        trace.append(dp.to_json())
        sol, mult = _term_labels(dp, levels)
        if dp.indices:
            out[_resum(sol, mult, dp, levels)] += 1
            continue
        if not (mult.is_Integer):
            raise UnresolvedSeries(f"non-integral coefficient {mult}")
        nw = NormWeight(*(sol[c] for c in C_PARAMS))
        out[basis_label(nw, levels)] += int(mult)
    return tuple(sorted((+out).items())), json.dumps(trace)


def verlinde(a: AffClassLabel, b: AffClassLabel, levels: LevelPair) -> GrothFusionElement:
    """Grothendieck fusion [a] x [b] from the continuum Verlinde formula, in the
    basis of typicals and reducible Vermas with infinite alternating families
    resummed into S^ / A^ classes."""
    for x in (a, b):
        if x.kind not in ("T", "V", "S", "A"):
            raise ValueError(f"unsupported class {x.kind}")
    items, trace = _verlinde_cached(a, b, levels)
    return GrothFusionElement(Counter(dict(items)), "Grothendieck", json.loads(trace))


# -- the Grothendieck ring on irreducibles ----------------------------------------------------

def to_irreducibles(x: Counter, levels: LevelPair) -> Counter:
    """Replace reducible Verma classes by their composition factors."""
    out = Counter()
    k, tk = levels.k, levels.tk
    for lab, c in x.items():
        if lab.kind != "V":
            out[lab] += c
            continue
        ell = int(lab.te / tk)
        n, eb = lab.n + 2 * ell, lab.e - ell * k
        if eb:
            out[AffClassLabel("S", n + HALF, eb, lab.tn, 0, ell)] += c
            out[AffClassLabel("S", n - HALF, eb, lab.tn, 0, ell)] += c
        else:
            out[AffClassLabel("A", n + 1, 0, lab.tn, 0, ell)] += c
            out[AffClassLabel("A", n, 0, lab.tn, 0, ell)] += 2 * c
            out[AffClassLabel("A", n - 1, 0, lab.tn, 0, ell)] += c
    return +out


def groth_fuse(x: Counter, y: Counter, levels: LevelPair) -> Counter:
    """Bilinear Grothendieck fusion on combinations of classes, result in irreducibles."""
    out = Counter()
    for a, ca in x.items():
        for b, cb in y.items():
            for c, cc in verlinde(a, b, levels).terms.items():
                out[c] += ca * cb * cc
    return to_irreducibles(+out, levels)


def flow_element(x: Counter, ell: int, levels: LevelPair) -> Counter:
    from .affine import spectral_flow_label
    return Counter({spectral_flow_label(lab, ell, levels): c for lab, c in x.items()})


VACUUM = AffClassLabel("A", 0, 0, 0)


# -- the six families, written out ---------------------------------------------------------------

def _typ(n, e, tn, te, levels) -> AffClassLabel:
    return basis_label(normalise(n, e, tn, te, levels), levels)


def grothendieck_rule(a: AffClassLabel, b: AffClassLabel, levels: LevelPair) -> Counter:
    """The six Grothendieck fusion families, directly from their closed forms."""
    order = {"A": 0, "S": 1, "T": 2, "V": 2}
    if order[a.kind] > order[b.kind]:
        a, b = b, a
    k, tk = levels.k, levels.tk
    tn = a.tn + b.tn
    if b.kind in ("T", "V"):
        if a.kind == "A":
            ell = a.flow
            return Counter({_typ(a.n + b.n - 2 * ell, b.e + ell * k, tn, b.te + ell * tk, levels): 1})
        if a.kind == "S":
            ell = a.flow
            n, e, te = a.n + b.n - 2 * ell, a.e + b.e + ell * k, b.te + ell * tk
            return Counter({_typ(n + HALF, e, tn, te, levels): 1, _typ(n - HALF, e, tn, te, levels): 1})
        n, e, te = a.n + b.n, a.e + b.e, a.te + b.te
        out = Counter({_typ(n + 1, e, tn, te, levels): 1, _typ(n - 1, e, tn, te, levels): 1})
        out[_typ(n, e, tn, te, levels)] += 2
        return out
    L = a.flow + b.flow
    if a.kind == "S":
        return Counter({_typ(a.n + b.n - 2 * L, a.e + b.e + L * k, tn, L * tk, levels): 1})
    if b.kind == "S":
        return Counter({AffClassLabel("S", a.n + b.n, b.e, tn, 0, L): 1})
    return Counter({AffClassLabel("A", a.n + b.n, 0, tn, 0, L): 1})


# -- genuine fusion -----------------------------------------------------------------------------

@dataclass(frozen=True)
class FusionSummand:
    kind: str                       # T, S, A, P (projective-like, induced) or GenTyp
    n: Q
    e: Q = Q(0)
    tn: Q = Q(0)
    te: Q = Q(0)
    flow: int = 0
    m: int = 0

    def to_json(self) -> dict:
        d = {"kind": self.kind, "n": fmt_q(self.n), "e": fmt_q(self.e), "tn": fmt_q(self.tn)}
        if self.kind in ("T", "GenTyp", "P"):
            d["te"] = fmt_q(self.te)
        if self.kind in ("S", "A") or self.flow:
            d["flow"] = self.flow
        if self.m:
            d["m"] = self.m
        return d


@dataclass
class FusionResult:
    summands: list
    status: str
    reason: str = ""
    grothendieck: GrothFusionElement | None = None

    def to_json(self) -> dict:
        out = {"status": self.status, "summands": [s.to_json() for s in self.summands], "reason": self.reason}
        if self.grothendieck is not None:
            out["grothendieck"] = self.grothendieck.to_json()
        return out


def _summand(lab: AffClassLabel) -> FusionSummand:
    return FusionSummand(lab.kind, lab.n, lab.e, lab.tn, lab.te, lab.flow)


def _in_window(t, left_closed: bool) -> bool:
    return (-HALF <= t < HALF) if left_closed else (-HALF < t <= HALF)


def _unflow_typical(lab: AffClassLabel, levels: LevelPair, left_closed: bool) -> tuple:
    """(ell, label) with lab = sigma^ell(label) and label's te/tk in the window."""
    t = lab.te / levels.tk
    ell = 0
    while not _in_window(t - ell, left_closed):
        ell += 1 if t - ell > 0 else -1
    k, tk = levels.k, levels.tk
    return ell, AffClassLabel("T", lab.n + 2 * ell, lab.e - ell * k, lab.tn, lab.te - ell * tk)


def _flow_summand(s: FusionSummand, ell: int, levels: LevelPair) -> FusionSummand:
    if not ell:
        return s
    if s.kind in ("S", "A"):
        return FusionSummand(s.kind, s.n, s.e, s.tn, s.te, s.flow + ell, s.m)
    # typical-like modules: sigma^ell X_{n,e|tn,te} = X_{n-2l, e+lk | tn, te+l tk}
    return FusionSummand(s.kind, s.n - 2 * ell, s.e + ell * levels.k, s.tn, s.te + ell * levels.tk,
                         0, s.m)


def fusion_lift(a: AffClassLabel, b: AffClassLabel, levels: LevelPair) -> FusionResult:
    """Genuine fusion rules where the Grothendieck result can be lifted."""
    groth = verlinde(a, b, levels)
    if "V" in (a.kind, b.kind):
        return FusionResult([], STATUS_GROTH, "reducible Verma classes are not lifted", groth)
    order = {"A": 0, "S": 1, "T": 2}
    if order[a.kind] > order[b.kind]:
        a, b = b, a
    tk = levels.tk
    status = STATUS_DEDUCED if not (a.flow or b.flow) else STATUS_CONJ
    if a.kind == "A" or (a.kind == "S" and b.kind == "T"):
        # a single class, or two typicals whose conformal dimensions differ by te/tk mod 1
        labs = sorted(groth.terms)
        reason = "single irreducible" if len(labs) == 1 else \
            "conformal dimensions differ by te/tk, which is not an integer"
        if a.kind == "S":
            t = labs[0].te / tk
            if is_integer(t):
                return FusionResult([], STATUS_GROTH, "result is not typical", groth)
        return FusionResult([_summand(x) for x in labs for _ in range(groth.terms[x])], status, reason)
    if a.kind == "S":          # S x S
        e = a.e + b.e
        n, tn = a.n + b.n, a.tn + b.tn
        L = a.flow + b.flow
        if e:
            out = [FusionSummand("S", n + HALF, e, tn, 0, 0), FusionSummand("S", n - HALF, e, tn, 0, 0)]
        else:
            out = [FusionSummand("P", n, 0, tn, 0, 0)]
        out = [_flow_summand(s, L, levels) for s in out]
        return FusionResult(out, STATUS_CONJ, "induced from the finite tensor product")
    # T x T
    l1, a0 = _unflow_typical(a, levels, True)
    l2, b0 = _unflow_typical(b, levels, False)
    if a0.te + b0.te == 0:
        return FusionResult([], STATUS_GROTH, "te1 + te2 = 0 in the window: structure not determined",
                            groth)
    n, e, tn, te = a0.n + b0.n, a0.e + b0.e, a0.tn + b0.tn, a0.te + b0.te
    out = [FusionSummand("T", n + 1, e, tn, te), FusionSummand("GenTyp", n, e, tn, te, 0, 2),
           FusionSummand("T", n - 1, e, tn, te)]
    out = [_flow_summand(s, l1 + l2, levels) for s in out]
    return FusionResult(out, STATUS_CONJ, "induced from the finite tensor product"
                        + (" and spectral flow" if l1 or l2 else ""))


# -- comparison with the finite tensor ring -----------------------------------------------------

def to_finite(lab: AffClassLabel):
    """Finite class whose induced module is the given unflowed class (|te/tk| < 1)."""
    from .findim import ClassLabel
    if lab.flow:
        raise ValueError("only unflowed classes correspond to finite ones")
    if lab.kind == "T":
        return ClassLabel("T", lab.n, lab.e, lab.tn, lab.te)
    if lab.kind == "S":
        return ClassLabel("S", lab.n, lab.e, lab.tn)
    if lab.kind == "A":
        return ClassLabel("A", lab.n, 0, lab.tn)
    raise ValueError(f"no finite counterpart for {lab.kind}")


def from_finite(lab) -> AffClassLabel:
    return AffClassLabel(lab.kind, lab.n, lab.e, lab.tn, lab.te if lab.kind == "T" else 0)
