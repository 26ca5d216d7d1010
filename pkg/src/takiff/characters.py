"""Characters and supercharacters of affine Takiff gl(1|1) modules.

A character is ``tr z^{N_0} q^{L_0}`` (c = 0).  The remaining variables
x, tx, y, ty, tz only ever appear as monomials x^k tx^tk y^e ty^te tz^tn
that are constant on a module, so they live in a :class:`Prefactor`
together with an overall phase i^p.

Highest-weight states are even.  The supercharacter then weights a state
by (-1)^(N_0 - N_0(hws)), i.e. z -> -z in the product formulas.
"""
from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .affine import (AffClassLabel, AffWeight, build_verma, conformal_dim,
                     irreducible_counts)
from .algebra import LevelPair
from .rational import ONE, ZERO, Q, fmt_q, to_q
from .series import FormalSeries, eta_power, product

HALF = Q(1, 2)


# -- records ------------------------------------------------------------------------

@dataclass(frozen=True)
class Prefactor:
    """x^k tx^tk y^e ty^te tz^tn times i^phase."""
    k: Q = ZERO
    tk: Q = ZERO
    e: Q = ZERO
    te: Q = ZERO
    tn: Q = ZERO
    phase: int = 0

    def to_json(self) -> dict:
        return {"k": fmt_q(self.k), "tk": fmt_q(self.tk), "e": fmt_q(self.e), "te": fmt_q(self.te),
                "tn": fmt_q(self.tn), "phase_power_of_i": self.phase % 4}


@dataclass(frozen=True)
class Recipe:
    """Product data z^zexp q^qoff prod(1 + c z^dz q^dq) / prod(1 - q^i)^bosons,
    kept so that evaluation can bound the truncation tail."""
    zexp: Q
    qoff: Q
    factors: tuple          # (c, dz, dq_start) meaning i >= dq_start, each once per entry
    bosons: int

    def expand(self, cutoff: int, signs: bool = True) -> FormalSeries:
        facs = []
        for c, dz, start in self.factors:
            facs.extend((c if signs else abs(c), dz, i) for i in range(start, cutoff + 1))
        return product(facs, cutoff, self.zexp, self.qoff, self.bosons)


@dataclass(frozen=True)
class Character:
    series: FormalSeries
    prefactor: Prefactor = field(default_factory=Prefactor)
    super: bool = False
    label: str = ""
    recipe: Recipe | None = None
    flow: int = 0

    def to_json(self) -> dict:
        return {"label": self.label, "supercharacter": self.super,
                "prefactor": self.prefactor.to_json(), **self.series.to_json()}


# -- product formulas ---------------------------------------------------------------

def _typ_recipe(w: AffWeight, sign: int) -> Recipe:
    # (1 + z q^i)^2 (1 + z^-1 q^(i-1))^2, i >= 1
    facs = ((sign, 1, 1), (sign, 1, 1), (sign, -1, 0), (sign, -1, 0))
    return Recipe(w.n + 1, conformal_dim(w), facs, 4)


def _styp_recipe(n, e, tn, levels: LevelPair, sign: int) -> Recipe:
    facs = ((sign, 1, 1), (sign, 1, 1), (sign, -1, 1), (sign, -1, 0))
    return Recipe(to_q(n) + HALF, to_q(tn) * to_q(e) / levels.tk, facs, 4)


def _atyp_recipe(n, sign: int) -> Recipe:
    facs = ((sign, 1, 1), (sign, 1, 1), (sign, -1, 1), (sign, -1, 1))
    return Recipe(to_q(n), ZERO, facs, 4)


def _from_recipe(r: Recipe, cutoff: int, pre: Prefactor, sup: bool, label: str) -> Character:
    return Character(r.expand(cutoff), pre, sup, label, r)


def verma_character(w: AffWeight, cutoff: int, supertrace: bool = False) -> Character:
    """Character of the Verma module labelled by w (any te)."""
    lv = w.levels
    pre = Prefactor(lv.k, lv.tk, w.e, w.te, w.tn)
    name = f"V^_{{{fmt_q(w.n)},{fmt_q(w.e)}|{fmt_q(w.tn)},{fmt_q(w.te)}}}"
    return _from_recipe(_typ_recipe(w, -1 if supertrace else 1), cutoff, pre, supertrace, name)


def typical_character(w: AffWeight, cutoff: int, supertrace: bool = False) -> Character:
    """z^{n+1} q^Delta prod (1 + z q^i)^2 (1 + z^-1 q^{i-1})^2 / (1 - q^i)^4."""
    return verma_character(w, cutoff, supertrace)


def _check_label(label: AffClassLabel, kind: str):
    if label.kind != kind:
        raise ValueError(f"expected a {kind} label, got {label.kind}")


def semitypical_character(label: AffClassLabel, levels: LevelPair, cutoff: int,
                          supertrace: bool = False) -> Character:
    """sigma^flow of S^_{n,e|tn,0}: the unflowed product formula, then z -> z q^flow."""
    _check_label(label, "S")
    r = _styp_recipe(label.n, label.e, label.tn, levels, -1 if supertrace else 1)
    pre = Prefactor(levels.k, levels.tk, label.e, ZERO, label.tn)
    ch = _from_recipe(r, cutoff, pre, supertrace, str(label))
    return spectral_flow_character(ch, label.flow, levels)


def atypical_character(label: AffClassLabel, levels: LevelPair, cutoff: int,
                       supertrace: bool = False) -> Character:
    """sigma^flow of A^_{n,0|tn,0}: z^n prod (1 + z q^i)^2 (1 + z^-1 q^i)^2 / (1 - q^i)^4."""
    _check_label(label, "A")
    r = _atyp_recipe(label.n, -1 if supertrace else 1)
    pre = Prefactor(levels.k, levels.tk, ZERO, ZERO, label.tn)
    ch = _from_recipe(r, cutoff, pre, supertrace, str(label))
    return spectral_flow_character(ch, label.flow, levels)


def character(label: AffClassLabel, levels: LevelPair, cutoff: int,
              supertrace: bool = False) -> Character:
    """Irreducible (or Verma) character of any class label."""
    if label.kind in ("T", "V"):
        w = AffWeight(label.n, label.e, label.tn, label.te, levels)
        return typical_character(w, cutoff, supertrace)
    if label.kind == "S":
        return semitypical_character(label, levels, cutoff, supertrace)
    return atypical_character(label, levels, cutoff, supertrace)


def supercharacter(label: AffClassLabel, levels: LevelPair, cutoff: int) -> Character:
    return character(label, levels, cutoff, supertrace=True)


# -- spectral flow -------------------------------------------------------------------

def spectral_flow_series(s: FormalSeries, ell: int) -> FormalSeries:
    """z -> z q^ell.  The known region tilts, so nothing unknown is reported."""
    return s.flow(ell)


def spectral_flow_character(ch: Character, ell: int, levels: LevelPair) -> Character:
    """Character of sigma^ell M: same z, q shifted, (e, te) -> (e + ell k, te + ell tk)."""
    if not ell:
        return ch
    p = ch.prefactor
    pre = replace(p, e=p.e + ell * levels.k, te=p.te + ell * levels.tk)
    return Character(spectral_flow_series(ch.series, ell), pre, ch.super,
                     ch.label, None, ch.flow + ell)


# -- resolutions ---------------------------------------------------------------------

def _max_z_rise(grades: int) -> int:
    """Largest relative z-power reachable within the given number of grades:
    each raise of z costs one of q^1, q^1, q^2, q^2, ... (the z q^i factors)."""
    cost, a, i = 0, 0, 0
    while True:
        step = i // 2 + 1
        if cost + step > grades:
            return a
        cost += step
        a += 1
        i += 1


@dataclass(frozen=True)
class ResolutionSum:
    """Sum_{m <= terms-1} of signed Verma characters restricted to a z-window."""
    series: FormalSeries
    terms: int
    window: tuple
    first_silent: int
    prefactor: Prefactor
    labels: tuple


def resolution_character(label: AffClassLabel, levels: LevelPair, cutoff: int,
                         supertrace: bool = False, margin: int = 2,
                         induced_parity: bool = True) -> ResolutionSum:
    """sum_m (-1)^m mult(m) ch V^_{n - s - 2 l - m, e + l k | tn, l tk}, with
    mult = 1, s = 1/2 (S) or mult = m + 1, s = 1 (A).

    The sum is exact in the window of z-powers covered by the irreducible
    character up to ``cutoff`` (plus ``margin``).  Term m uses cutoff
    cutoff + l m so all terms are known up to the same absolute q-power.
    The loop stops at the first m whose Verma provably has no state in the
    window and asserts that this term indeed vanishes there.

    For supercharacters each Verma's hws is even; with ``induced_parity``
    the m-th hws carries the parity (-1)^m that the resolution maps induce,
    which is what makes the alternating signs correct.
    """
    if label.kind not in ("S", "A"):
        raise ValueError("resolutions exist for S and A labels")
    ell = label.flow
    s = HALF if label.kind == "S" else ONE
    direct = character(label, levels, cutoff, supertrace)
    ds = direct.series
    zs = [z for z, _ in ds.terms()]
    zlo = ds.zoff + min(zs) - margin
    zhi = ds.zoff + max(zs) + margin
    top = None                           # absolute q-power known for every term
    total = None
    labels = []
    m = 0
    first_silent = None
    while True:
        nm = label.n - s - 2 * ell - m
        w = AffWeight(nm, label.e + ell * levels.k, label.tn, ell * levels.tk, levels)
        delta = conformal_dim(w)
        if top is None:
            top = delta + cutoff
        cut_m = int(top - delta)
        hws_z = nm + 1
        # in the window only states with z >= zlo matter; raising z by a costs >= a(a+1)/2-ish grades
        if hws_z + _max_z_rise(max(cut_m, 0)) < zlo:
            first_silent = m
            if cut_m >= 0:
                probe = verma_character(w, cut_m, supertrace).series.restrict_z(zlo, zhi)
                if probe.terms():
                    raise AssertionError(f"resolution term {m} contributes inside the window")
            break
        if cut_m >= 0:
            mult = 1 if label.kind == "S" else m + 1
            sign = (-1) ** m
            if supertrace and induced_parity:
                sign *= (-1) ** m
            term = verma_character(w, cut_m, supertrace).series.restrict_z(zlo, zhi)
            term = term.scale(sign * mult)
            total = term if total is None else total + term
            labels.append((sign * mult, w))
        m += 1
        if m > 10 * (cutoff + 10) * (abs(ell) + 1):
            raise RuntimeError("resolution did not terminate")
    pre = replace(direct.prefactor)
    return ResolutionSum(total, m, (zlo, zhi), first_silent, pre, tuple(labels))


# -- brute force ---------------------------------------------------------------------

def brute_force_character(label_or_weight, levels: LevelPair | None, cutoff: int,
                          supertrace: bool = False) -> FormalSeries:
    """Trace over an explicitly built truncated module.

    A weight gives its Verma module; an unflowed S or A label gives the
    quotient of its Verma module by the submodule generated by the
    grade-0 singular vector.
    """
    if isinstance(label_or_weight, AffWeight):
        w = label_or_weight
        counts = build_verma(w, cutoff).character_counts(supertrace)
    else:
        lab = label_or_weight
        if lab.flow:
            raise ValueError("brute force is available for unflowed classes")
        if lab.kind in ("T", "V"):
            w = AffWeight(lab.n, lab.e, lab.tn, lab.te, levels)
            counts = build_verma(w, cutoff).character_counts(supertrace)
        else:
            s = HALF if lab.kind == "S" else ONE
            w = AffWeight(lab.n - s, lab.e, lab.tn, 0, levels)
            counts = irreducible_counts(w, cutoff, supertrace)
    delta = conformal_dim(w)
    zoff = w.n + 1
    terms = Counter()
    for (n0, g), c in counts.items():
        terms[(int(n0 - zoff), g)] += c
    return FormalSeries.from_terms(dict(terms), zoff, delta, cutoff)


# -- theta and eta ---------------------------------------------------------------------

def theta1(cutoff: int) -> tuple:
    """theta_1(z;q) = -i sum_{r in Z+1/2} (-1)^(r-1/2) z^r q^(r^2/2).

    Returned as (series, phase) with the overall factor i^phase = -i kept
    apart so the coefficients stay integral.
    """
    terms = {}
    a = 0
    while True:
        # r = a + 1/2 and r = -a - 1/2 share q^((a^2+a)/2)
        j = (a * a + a) // 2
        if j > cutoff:
            break
        terms[(a, j)] = (-1) ** a
        terms[(-a - 1, j)] = (-1) ** (a + 1)
        a += 1
    return FormalSeries.from_terms(terms, HALF, Q(1, 8), cutoff), 3


def theta1_product(cutoff: int) -> tuple:
    """The same function from -i q^(1/8) z^(1/2) prod (1-q^i)(1-z q^i)(1-z^-1 q^(i-1))."""
    facs = []
    for i in range(1, cutoff + 1):
        facs += [(-1, 0, i), (-1, 1, i)]
    facs += [(-1, -1, i - 1) for i in range(1, cutoff + 2)]
    return product(facs, cutoff, HALF, Q(1, 8)), 3


def theta1_sq_over_eta6(cutoff: int) -> tuple:
    """(series, phase) of theta_1^2 / eta^6."""
    th, p = theta1(cutoff)
    return th * th * eta_power(-6, cutoff), 2 * p


def typical_supercharacter_theta_form(w: AffWeight, cutoff: int) -> Character:
    """i x^k y^e z^n tx^tk ty^te tz^tn q^Delta theta_1^2 / eta^6, as stated for
    typical supercharacters."""
    ratio, p = theta1_sq_over_eta6(cutoff)
    lv = w.levels
    s = ratio.shift(w.n, conformal_dim(w))
    return Character(s, Prefactor(lv.k, lv.tk, w.e, w.te, w.tn, 1 + p), True, "theta form")


def proportionality(a: Character, b: Character) -> tuple:
    """(p, compared) with a = i^p b as functions, checked on every jointly
    known coefficient; p is None if no such constant exists."""
    if (a.prefactor.k, a.prefactor.tk, a.prefactor.e, a.prefactor.te, a.prefactor.tn) != (
            b.prefactor.k, b.prefactor.tk, b.prefactor.e, b.prefactor.te, b.prefactor.tn):
        return None, 0
    for sgn in (1, -1):
        ok, cnt, _ = a.series.agree(b.series.scale(sgn))
        if ok and cnt:
            # i^pa a.s = i^pa sgn b.s = i^(pa - pb) sgn (i^pb b.s)
            return (a.prefactor.phase - b.prefactor.phase + (2 if sgn < 0 else 0)) % 4, cnt
    return None, 0


# -- evaluation ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModularPoint:
    tau: complex
    nu: complex = 0j
    mu: complex = 0j
    tmu: complex = 0j
    tnu: complex = 0j
    t: complex = 0j
    tt: complex = 0j

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise ValueError("Im tau must be positive")

    def shifted(self, dtau=1) -> "ModularPoint":
        return replace(self, tau=self.tau + dtau)


@dataclass(frozen=True)
class Evaluation:
    value: complex
    bound: float

    def to_json(self) -> dict:
        return {"re": repr(self.value.real), "im": repr(self.value.imag), "error_bound": repr(self.bound)}


def _e(x) -> complex:
    return cmath.exp(2j * cmath.pi * x)


def _series_value(s: FormalSeries, nu: complex, tau: complex) -> complex:
    nz, nq = s.coeffs.shape
    zpow = np.array([_e((s.zoff + s.zmin + r) * nu) for r in range(nz)], dtype=np.complex128)
    qpow = np.array([_e(float(j) * tau) for j in range(nq)], dtype=np.complex128)
    return K.evaluate(s.coeffs, zpow, qpow) * _e(float(s.qoff) * tau)


def _tail_bound(r: Recipe, cutoff: int, nu: complex, tau: complex) -> float:
    """Bound on sum_{j > cutoff} |c_j(z)| |q|^j for the product without its
    z^zexp q^qoff prefactor, via the positive majorant: explicit terms up to
    2 cutoff + 2, then the Cauchy estimate |c_j| <= F(rho) rho^-j."""
    x = abs(_e(tau))
    zabs = abs(_e(nu))
    c2 = 2 * cutoff + 2
    maj = r.expand(c2, signs=False)
    base = maj.zoff + maj.zmin - r.zexp
    zpow = np.array([zabs ** float(base + i) for i in range(maj.coeffs.shape[0])])
    rows = K.abs_row_sums(maj.coeffs, zpow)
    mid = sum(rows[j] * x ** j for j in range(cutoff + 1, len(rows)))
    rho = math.sqrt(x)
    logf = 0.0
    for c, dz, start in r.factors:
        pw = start
        while True:
            t = zabs ** dz * rho ** pw
            logf += math.log1p(abs(c) * t)
            if pw > 0 and t < 1e-18:
                break
            pw += 1
    i = 1
    while rho ** i > 1e-18:
        logf -= r.bosons * math.log1p(-rho ** i)
        i += 1
    ratio = x / rho
    far = math.exp(logf) * ratio ** (c2 + 1) / (1 - ratio)
    return float(mid + far)


def eval_at(ch: Character, p: ModularPoint) -> Evaluation:
    """Numerical value with a rigorous bound on the dropped q-tail."""
    s = ch.series
    if not s.is_rectangular:
        raise ValueError("evaluate the unflowed character and apply the prefactor shift")
    pre = ch.prefactor
    mono = _e(pre.k * p.t + pre.tk * p.tt + pre.e * p.mu + pre.te * p.tmu + pre.tn * p.tnu)
    mono *= 1j ** (pre.phase % 4)
    val = mono * _series_value(s, p.nu, p.tau)
    if ch.recipe is None:
        return Evaluation(val, float("nan"))
    scale = abs(mono) * abs(_e(float(ch.recipe.zexp) * p.nu)) * abs(_e(float(ch.recipe.qoff) * p.tau))
    return Evaluation(val, scale * _tail_bound(ch.recipe, s.cutoff, p.nu, p.tau))


def t_transformation_error(w: AffWeight, p: ModularPoint, cutoff: int = 12) -> tuple:
    """(relative difference between sch at tau+1 and e^{2 pi i Delta} sch at tau,
    combined truncation bound relative to |sch|)."""
    ch = typical_character(w, cutoff, supertrace=True)
    a = eval_at(ch, p.shifted(1))
    b = eval_at(ch, p)
    phase = _e(float(conformal_dim(w)))
    diff = abs(a.value - phase * b.value) / abs(b.value)
    return diff, (a.bound + b.bound) / abs(b.value)


def theta_form_constant(w: AffWeight, cutoff: int) -> tuple:
    """(p, compared) with sch T^_w = i^p z^n q^Delta theta_1^2/eta^6 (all prefactors equal)."""
    ratio, ph = theta1_sq_over_eta6(cutoff)
    lv = w.levels
    bare = Character(ratio.shift(w.n, conformal_dim(w)), Prefactor(lv.k, lv.tk, w.e, w.te, w.tn, ph))
    return proportionality(typical_character(w, cutoff, supertrace=True), bare)
