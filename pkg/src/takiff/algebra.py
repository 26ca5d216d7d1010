"""Lie superalgebras from structure constants, Takiff doubling, affinisation.

A :class:`SuperalgebraSpec` is immutable.  Its bracket table is complete
over ordered pairs: when only one ordering is supplied the other is filled
in by graded antisymmetry, and a supplied pair that contradicts its partner
is rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .linalg import identity, qmat, zeros
from .rational import ONE, ZERO, Q, fmt_q, to_q

EVEN, ODD = 0, 1
_PARITY = {"even": EVEN, "odd": ODD}
_PARITY_NAME = {EVEN: "even", ODD: "odd"}
TILDE = "t"


def sign(p: int):
    return -ONE if p & 1 else ONE


@dataclass(frozen=True)
class BasisElement:
    index: int
    name: str
    parity: int


@dataclass(frozen=True)
class LevelPair:
    k: Q
    tk: Q

    def __post_init__(self):
        object.__setattr__(self, "k", to_q(self.k))
        object.__setattr__(self, "tk", to_q(self.tk))
        if not self.tk:
            raise ValueError("tk must be nonzero (critical level is excluded)")


@dataclass(frozen=True, order=True)
class ModeElement:
    """J^a_mode (tilde False) or its Takiff partner (tilde True)."""
    base: int
    tilde: bool
    mode: int


@dataclass(frozen=True)
class SuperalgebraSpec:
    basis: tuple
    structure: Mapping            # (a, b) -> {c: coeff}, nonzero entries only
    form: np.ndarray = field(compare=False)
    dual_coxeter: Q = ZERO
    takiff_dim: int | None = None  # set on Takiff doubles: size of the base
    name: str = ""

    # construction -----------------------------------------------------

    @classmethod
    def build(cls, names, parities, brackets, form, dual_coxeter=0,
              takiff_dim=None, name="") -> "SuperalgebraSpec":
        """Validate and complete a bracket table.

        ``brackets`` maps (a, b) index pairs to {c: coeff}.
        """
        if len(set(names)) != len(names):
            raise ValueError("duplicate basis names")
        basis = tuple(BasisElement(i, n, _parity(p)) for i, (n, p) in enumerate(zip(names, parities)))
        d = len(basis)
        table: dict = {}
        for (a, b), comb in brackets.items():
            _check_index(a, d)
            _check_index(b, d)
            comb = {c: to_q(v) for c, v in comb.items() if to_q(v)}
            for c in comb:
                _check_index(c, d)
            if a == b and basis[a].parity == EVEN and comb:
                raise ValueError(f"[{names[a]},{names[a]}] must vanish for even elements")
            if (a, b) in table and table[(a, b)] != comb:
                raise ValueError(f"bracket ({names[a]},{names[b]}) given twice with different values")
            table[(a, b)] = comb
        # graded antisymmetry: [b,a] = -(-1)^{p_a p_b} [a,b]
        for (a, b), comb in list(table.items()):
            s = -sign(basis[a].parity * basis[b].parity)
            partner = {c: s * v for c, v in comb.items()}
            if (b, a) in table:
                if table[(b, a)] != partner:
                    raise ValueError(f"brackets ({names[a]},{names[b]}) and ({names[b]},{names[a]}) "
                                     "violate graded antisymmetry")
            else:
                table[(b, a)] = partner
        table = {k: v for k, v in table.items() if v}
        for (a, b), comb in table.items():
            want = (basis[a].parity + basis[b].parity) & 1
            for c in comb:
                if basis[c].parity != want:
                    raise ValueError(f"[{names[a]},{names[b]}] leaves the {_PARITY_NAME[want]} span")
        kappa = qmat(form) if not isinstance(form, np.ndarray) else form
        if kappa.shape != (d, d):
            raise ValueError(f"form must be {d}x{d}")
        for a in range(d):
            for b in range(d):
                if kappa[a, b] and basis[a].parity != basis[b].parity:
                    raise ValueError("form is not even")
                if kappa[a, b] != sign(basis[a].parity * basis[b].parity) * kappa[b, a]:
                    raise ValueError("form is not supersymmetric")
        kappa.setflags(write=False)
        if takiff_dim is not None and 2 * takiff_dim != d:
            raise ValueError("takiff_dim must be half the basis size")
        return cls(basis, _FrozenTable(table), kappa, to_q(dual_coxeter), takiff_dim, name)

    # accessors --------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        for b in self.basis:
            if b.name == name:
                return b.index
        raise KeyError(f"no basis element named {name!r}")

    def parity(self, i: int) -> int:
        return self.basis[i].parity

    def bracket(self, a: int, b: int) -> dict:
        return bracket(self, a, b)

    @property
    def sdim(self) -> int:
        return sum(1 if b.parity == EVEN else -1 for b in self.basis)

    @property
    def is_takiff(self) -> bool:
        return self.takiff_dim is not None

    @cached_property
    def base(self) -> "SuperalgebraSpec":
        """The algebra the affinisation is built on.

        For a Takiff double this is recovered from the first half of the
        basis, with the base form read off the pairing block.
        """
        if not self.is_takiff:
            return self
        d = self.takiff_dim
        names = [b.name for b in self.basis[:d]]
        pars = [b.parity for b in self.basis[:d]]
        br = {(a, b): comb for (a, b), comb in self.structure.items() if a < d and b < d}
        form = self.form[:d, d:].copy()
        return SuperalgebraSpec.build(names, pars, br, form, self.dual_coxeter, None,
                                      self.name.removesuffix("_takiff"))

    def with_bracket(self, a: str, b: str, result: Mapping[str, object]) -> "SuperalgebraSpec":
        """Copy with one bracket (and its antisymmetric partner) replaced."""
        ia, ib = self.index(a), self.index(b)
        table = {k: dict(v) for k, v in self.structure.items() if k not in ((ia, ib), (ib, ia))}
        table[(ia, ib)] = {self.index(c): to_q(v) for c, v in result.items()}
        return SuperalgebraSpec.build([x.name for x in self.basis], [x.parity for x in self.basis],
                                      table, self.form.copy(), self.dual_coxeter, self.takiff_dim,
                                      self.name + "_modified")


class _FrozenTable(dict):
    """dict that refuses mutation after construction."""

    def _ro(self, *a, **k):
        raise TypeError("structure table is immutable")

    __setitem__ = __delitem__ = clear = pop = popitem = setdefault = update = _ro  # type: ignore

    def __hash__(self):
        return hash(tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self.items())))


def _parity(p) -> int:
    if p in (EVEN, ODD):
        return int(p)
    try:
        return _PARITY[p]
    except KeyError:
        raise ValueError(f"parity must be 'even' or 'odd', got {p!r}") from None


def _check_index(i: int, d: int):
    if not (isinstance(i, (int, np.integer)) and 0 <= i < d):
        raise IndexError(f"basis index {i} out of range 0..{d - 1}")


# -- operations -------------------------------------------------------------

def bracket(spec: SuperalgebraSpec, a: int, b: int) -> dict:
    _check_index(a, spec.dim)
    _check_index(b, spec.dim)
    return dict(spec.structure.get((a, b), {}))


def _bracket_vec(spec, a: int, v: dict) -> dict:
    out: dict = {}
    for b, cb in v.items():
        for c, cc in spec.structure.get((a, b), {}).items():
            s = out.get(c, ZERO) + cb * cc
            if s:
                out[c] = s
            else:
                out.pop(c, None)
    return out


@dataclass(frozen=True)
class JacobiReport:
    passed: bool
    triple: tuple | None = None     # names of the first violating triple
    residual: dict | None = None    # {name: coeff} of the nonzero Jacobi sum
    checked: int = 0

    def to_json(self) -> dict:
        out = {"passed": self.passed, "checked": self.checked}
        if self.triple is not None:
            out["triple"] = list(self.triple)
            out["residual"] = {k: fmt_q(v) for k, v in self.residual.items()}
        return out


def jacobi_sum(spec: SuperalgebraSpec, a: int, b: int, c: int) -> dict:
    """(-1)^{ac}[a,[b,c]] + (-1)^{ba}[b,[c,a]] + (-1)^{cb}[c,[a,b]]."""
    p = spec.parity
    out: dict = {}
    for (x, y, z, s) in ((a, b, c, p(a) * p(c)), (b, c, a, p(b) * p(a)), (c, a, b, p(c) * p(b))):
        inner = {x2: v for x2, v in spec.structure.get((y, z), {}).items()}
        term = _bracket_vec(spec, x, inner)
        for k, v in term.items():
            t = out.get(k, ZERO) + sign(s) * v
            if t:
                out[k] = t
            else:
                out.pop(k, None)
    return out


def check_jacobi(spec: SuperalgebraSpec) -> JacobiReport:
    """Exhaustive graded Jacobi check over all ordered basis triples.

    Triples are visited in lexicographic index order.  The three cyclic
    rotations of a triple express one condition, so the reported triple is
    the first rotation met in that order.
    """
    d = spec.dim
    n = 0
    for a in range(d):
        for b in range(d):
            for c in range(d):
                n += 1
                r = jacobi_sum(spec, a, b, c)
                if r:
                    names = tuple(spec.basis[i].name for i in (a, b, c))
                    return JacobiReport(False, names,
                                        {spec.basis[k].name: v for k, v in sorted(r.items())}, n)
    return JacobiReport(True, None, None, n)


def takiff_extend(spec: SuperalgebraSpec) -> SuperalgebraSpec:
    """Double the algebra by an abelian copy of its adjoint representation."""
    if spec.is_takiff:
        raise ValueError("generalised Takiff algebras (m>2) are not supported")
    rep = check_jacobi(spec)
    if not rep.passed:
        raise ValueError(f"input fails the Jacobi identity at {rep.triple}")
    d = spec.dim
    names = [b.name for b in spec.basis] + [TILDE + b.name for b in spec.basis]
    pars = [b.parity for b in spec.basis] * 2
    table: dict = {}
    for (a, b), comb in spec.structure.items():
        table[(a, b)] = dict(comb)
        table[(a, b + d)] = {c + d: v for c, v in comb.items()}
        table[(a + d, b)] = {c + d: v for c, v in comb.items()}
    form = zeros(2 * d)
    form[:d, d:] = spec.form
    form[d:, :d] = spec.form
    return SuperalgebraSpec.build(names, pars, table, form, spec.dual_coxeter, d, spec.name + "_takiff")


def affine_bracket(spec: SuperalgebraSpec, x: ModeElement, y: ModeElement,
                   levels: LevelPair) -> tuple:
    """[x, y] in the affinisation, with K -> k and the tilde centre -> tk.

    Returns ({ModeElement: coeff}, central scalar).
    """
    g = spec.base
    for m in (x, y):
        _check_index(m.base, g.dim)
        if m.tilde and not spec.is_takiff:
            raise ValueError("tilde modes need a Takiff double")
    if x.tilde and y.tilde:
        return {}, ZERO
    comb = g.structure.get((x.base, y.base), {})
    tilde = x.tilde or y.tilde
    mode = x.mode + y.mode
    out = {ModeElement(c, tilde, mode): v for c, v in comb.items()}
    central = ZERO
    if mode == 0 and x.mode:
        level = levels.tk if tilde else levels.k
        central = x.mode * g.form[x.base, y.base] * level
    return out, central


def supertrace_form(spec: SuperalgebraSpec, matrices, parities) -> np.ndarray:
    """kappa(a,b) = str(rho(a) rho(b)) after checking rho is a representation."""
    mats = [qmat(m) if not isinstance(m, np.ndarray) else m for m in matrices]
    if len(mats) != spec.dim:
        raise ValueError("need one matrix per basis element")
    n = len(parities)
    sgn = [sign(p) for p in parities]
    for a in range(spec.dim):
        if mats[a].shape != (n, n):
            raise ValueError("matrix size does not match the grading")
        for i in range(n):
            for j in range(n):
                if mats[a][i, j] and (parities[i] + parities[j]) & 1 != spec.parity(a):
                    raise ValueError(f"matrix of {spec.basis[a].name} has the wrong parity")
    for a in range(spec.dim):
        for b in range(spec.dim):
            lhs = zeros(n)
            for c, v in spec.structure.get((a, b), {}).items():
                lhs = lhs + v * mats[c]
            rhs = mats[a] @ mats[b] - sign(spec.parity(a) * spec.parity(b)) * (mats[b] @ mats[a])
            if not np.array_equal(lhs, rhs):
                raise ValueError(f"representation violates [{spec.basis[a].name},{spec.basis[b].name}]")
    out = zeros(spec.dim)
    for a in range(spec.dim):
        for b in range(spec.dim):
            prod = mats[a] @ mats[b]
            out[a, b] = sum((sgn[i] * prod[i, i] for i in range(n)), ZERO)
    return out


# -- JSON -------------------------------------------------------------------

def spec_from_json(data: dict) -> SuperalgebraSpec:
    try:
        names = [b["name"] for b in data["basis"]]
        pars = [b["parity"] for b in data["basis"]]
        idx = {n: i for i, n in enumerate(names)}
        table: dict = {}
        for entry in data.get("brackets", []):
            key = (idx[entry["a"]], idx[entry["b"]])
            comb: dict = {}
            for term in entry["result"]:
                c = idx[term["c"]]
                comb[c] = comb.get(c, ZERO) + to_q(term["coeff"])
            if key in table and table[key] != comb:
                raise ValueError(f"bracket ({entry['a']},{entry['b']}) listed twice")
            table[key] = comb
        form = [[to_q(v) for v in row] for row in data["form"]]
    except KeyError as exc:
        raise ValueError(f"spec is missing {exc}") from None
    return SuperalgebraSpec.build(names, pars, table, form, data.get("dual_coxeter", "0"),
                                  data.get("takiff_of_dim"), data.get("name", ""))


def spec_to_json(spec: SuperalgebraSpec) -> dict:
    names = [b.name for b in spec.basis]
    brackets = []
    for (a, b) in sorted(spec.structure):
        if a > b:
            continue
        brackets.append({"a": names[a], "b": names[b],
                         "result": [{"c": names[c], "coeff": fmt_q(v)}
                                    for c, v in sorted(spec.structure[(a, b)].items())]})
    out = {"name": spec.name,
           "basis": [{"name": b.name, "parity": _PARITY_NAME[b.parity]} for b in spec.basis],
           "brackets": brackets,
           "form": [[fmt_q(v) for v in row] for row in spec.form],
           "dual_coxeter": fmt_q(spec.dual_coxeter)}
    if spec.is_takiff:
        out["takiff_of_dim"] = spec.takiff_dim
    return out


def load_spec(path) -> SuperalgebraSpec:
    with open(path) as fh:
        return spec_from_json(json.load(fh))


BUILTINS = ("gl11", "sl2", "u1", "gl11_takiff", "sl2_takiff", "u1_takiff")


def builtin(name: str) -> SuperalgebraSpec:
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin {name!r}; choose from {BUILTINS}")
    text = resources.files("takiff.data").joinpath(f"{name}.json").read_text()
    return spec_from_json(json.loads(text))


def resolve_spec(arg: str) -> SuperalgebraSpec:
    """A builtin name or a path to a spec file."""
    if arg in BUILTINS:
        return builtin(arg)
    return load_spec(Path(arg))


# -- gl(1|1) defining representation -----------------------------------------

def gl11_defining_rep() -> tuple:
    """(matrices in basis order N, E, psi+, psi-; parities of the (1|1) space)."""
    half = Q(1, 2)
    n = qmat([[half, 0], [0, -half]])
    e = identity(2)
    pp = qmat([[0, 1], [0, 0]])
    pm = qmat([[0, 0], [1, 0]])
    return [n, e, pp, pm], [EVEN, ODD]
