"""Sugawara fields on truncated induced modules.

A field is a list of normally ordered bilinears c :A B: in currents of the
Takiff double.  Its modes are realised only through their action on basis
states, where the mode sum is finite: a positive mode above the grade of
the state it hits acts as zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg as la
from .affine import InducedModule
from .algebra import LevelPair, SuperalgebraSpec, builtin
from .rational import ONE, ZERO, Q, fmt_q


@dataclass(frozen=True)
class BilinearField:
    terms: tuple                   # (coeff, left generator, right generator)
    name: str = ""

    def perturbed(self, i: int, eps) -> "BilinearField":
        c, a, b = self.terms[i]
        terms = list(self.terms)
        terms[i] = (c + eps, a, b)
        return BilinearField(tuple(terms), f"{self.name}+eps[{i}]")

    def describe(self, spec: SuperalgebraSpec) -> list:
        return [[fmt_q(c), spec.basis[a].name, spec.basis[b].name] for c, a, b in self.terms]


def build_T_general(spec: SuperalgebraSpec, levels: LevelPair) -> BilinearField:
    """T = (1/tk) sum kinv(a,b) :J^a tJ^b: - (k + 2 h)/(2 tk^2) sum kinv(a,b) :tJ^a tJ^b:."""
    if not spec.is_takiff:
        raise ValueError("the Takiff Sugawara field needs a Takiff double")
    base = spec.base
    d = base.dim
    try:
        kinv = la.inverse(base.form)
    except ZeroDivisionError:
        raise ValueError("base form is degenerate") from None
    k, tk = levels.k, levels.tk
    c2 = -(k + 2 * spec.dual_coxeter) / (2 * tk ** 2)
    terms = []
    for a in range(d):
        for b in range(d):
            if kinv[a, b]:
                terms.append((kinv[a, b] / tk, a, b + d))
    for a in range(d):
        for b in range(d):
            if kinv[a, b] and c2:
                terms.append((c2 * kinv[a, b], a + d, b + d))
    return BilinearField(tuple(terms), f"T[{spec.name}]")


def build_T_gl11(levels: LevelPair) -> BilinearField:
    """The gl(1|1) Takiff energy-momentum tensor built from the Casimirs."""
    spec = builtin("gl11_takiff")
    i = spec.index
    k, tk = levels.k, levels.tk
    a, b = ONE / tk, k / tk ** 2
    terms = (
        (a, i("N"), i("tE")),
        (a, i("E"), i("tN")),
        (-a, i("psi+"), i("tpsi-")),
        (a, i("psi-"), i("tpsi+")),
        (-b, i("tN"), i("tE")),
        (b, i("tpsi+"), i("tpsi-")),
        (ONE / tk ** 2, i("tE"), i("tE")),
    )
    return BilinearField(terms, "T[gl11]")


class ModeRealisation:
    """Modes L_n of a field acting on an induced module (memoised)."""

    def __init__(self, module: InducedModule, field_: BilinearField):
        self.module = module
        self.field = field_
        self._memo: dict = {}

    def _on_state(self, n: int, st: tuple) -> dict:
        key = (n, st)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        mod = self.module
        gr = mod.grade(st)
        out: dict = {}
        for c, a, b in self.field.terms:
            sg = -ONE if mod.parity[a] and mod.parity[b] else ONE
            # m <= -1: A_m B_{n-m}, nonzero only if n - m <= gr
            for m in range(n - gr, 0):
                inner = mod.act((n - m, b), st)
                for t, v in inner.items():
                    la.axpy(out, c * v, mod.act((m, a), t))
            # m >= 0: (-1)^{|a||b|} B_{n-m} A_m
            for m in range(0, gr + 1):
                inner = mod.act((m, a), st)
                for t, v in inner.items():
                    la.axpy(out, sg * c * v, mod.act((n - m, b), t))
        self._memo[key] = out
        return out

    def L(self, n: int, vec: dict) -> dict:
        out: dict = {}
        for st, c in vec.items():
            la.axpy(out, c, self._on_state(n, st))
        return out

    def commutator(self, m: int, n: int, vec: dict) -> dict:
        out = self.L(m, self.L(n, vec))
        la.axpy(out, -ONE, self.L(n, self.L(m, vec)))
        return out


def _hws(module: InducedModule) -> dict:
    return {((), 0): ONE}


def central_charge(rep: ModeRealisation) -> Q:
    """c measured from [L_2, L_-2] - 4 L_0 on the generating state."""
    v = _hws(rep.module)
    w = rep.commutator(2, -2, v)
    la.axpy(w, -4, rep.L(0, v))
    if set(w) - set(v):
        raise ValueError("[L_2, L_-2] - 4 L_0 is not a multiple of the generating state")
    return 2 * w.get(((), 0), ZERO)


@dataclass
class CheckReport:
    passed: bool
    checked: int
    central_charge: Q | None = None
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"passed": self.passed, "checked": self.checked,
               "failures": self.failures}
        if self.central_charge is not None:
            out["central_charge"] = fmt_q(self.central_charge)
        return out


def _states_up_to(module: InducedModule, top: int) -> list:
    return [st for g in range(min(top, module.cutoff) + 1) for st in module.basis[g]]


def check_virasoro(rep: ModeRealisation, m_range, n_range, c=None) -> CheckReport:
    """[L_m, L_n] = (m - n) L_{m+n} + c/12 (m^3 - m) delta_{m+n,0} on every
    basis state of grade <= cutoff - max(|m|, |n|, |m+n|)."""
    mod = rep.module
    if c is None:
        c = central_charge(rep)
    checked = 0
    failures = []
    for m in m_range:
        for n in n_range:
            top = mod.cutoff - max(abs(m), abs(n), abs(m + n))
            for st in _states_up_to(mod, top):
                v = {st: ONE}
                lhs = rep.commutator(m, n, v)
                rhs = rep.L(m + n, v)
                rhs = {t: (m - n) * x for t, x in rhs.items()}
                if m + n == 0:
                    la.axpy(rhs, c * (m ** 3 - m) / 12, v)
                la.axpy(lhs, -ONE, rhs)
                checked += 1
                if lhs:
                    failures.append({"m": m, "n": n, "state": mod.state_name(st)})
                    break
    return CheckReport(not failures, checked, c, failures)


def check_primary(rep: ModeRealisation, m_range, n_range, generators=None) -> CheckReport:
    """[L_m, J_n] = -n J_{m+n} for every listed generator of the double."""
    mod = rep.module
    gens = range(mod.ngen) if generators is None else generators
    checked = 0
    failures = []
    for g in gens:
        for m in m_range:
            for n in n_range:
                top = mod.cutoff - max(abs(m), abs(n), abs(m + n))
                for st in _states_up_to(mod, top):
                    v = {st: ONE}
                    lhs = rep.L(m, mod.apply((n, g), v, check=False))
                    la.axpy(lhs, -ONE, mod.apply((n, g), rep.L(m, v), check=False))
                    la.axpy(lhs, n, mod.apply((m + n, g), v, check=False))
                    checked += 1
                    if lhs:
                        failures.append({"generator": mod.gen_name(g), "m": m, "n": n,
                                         "state": mod.state_name(st)})
                        break
    return CheckReport(not failures, checked, None, failures)


def l0_blocks(rep: ModeRealisation, grade: int) -> dict:
    """{N_0 eigenvalue: dense L_0 matrix} on the weight spaces of a grade
    (GradedVerma modules only)."""
    mod = rep.module
    out = {}
    for (n0, g), states in sorted(mod.weight_index.items()):
        if g != grade:
            continue
        idx = {st: i for i, st in enumerate(states)}
        mat = la.zeros(len(states))
        for j, st in enumerate(states):
            for t, c in rep.L(0, {st: ONE}).items():
                mat[idx[t], j] = c
        out[n0] = mat
    return out
