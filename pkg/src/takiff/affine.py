"""Grade-truncated induced modules over affine Takiff superalgebras.

A module is induced from a finite-dimensional *seed* of the zero-mode
algebra: positive modes kill the seed, zero modes act by the seed matrices
and negative modes act freely.  States are PBW monomials in negative modes
applied to seed basis vectors.  A monomial is a sorted tuple of mode keys
``(mode, g)`` where ``g`` indexes the Takiff double (tilde partners come
after the base generators), so sorting is by mode index, then tilde flag,
then generator order.  The leftmost factor acts last.

For Takiff gl(1|1) the seed is the four-dimensional finite Verma module;
its basis vectors play the role of the zero-mode factors psi-_0, tpsi-_0.

Weight labels follow the Verma-label convention: the Verma module with
label (n, e, tn, te) has a highest-weight state of N_0-eigenvalue n + 1, so
n is the mean N_0-eigenvalue of the four ground states.
"""
from __future__ import annotations

import os
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import findim
from . import linalg as la
from .algebra import LevelPair, ModeElement, SuperalgebraSpec, builtin
from .rational import ONE, ZERO, Q, fmt_q, is_integer, to_q

MAX_CUTOFF_DEFAULT = 6


def max_cutoff() -> int:
    return int(os.environ.get("TAKIFF_MAX_CUTOFF", MAX_CUTOFF_DEFAULT))


class GradeOverflow(ValueError):
    pass


# -- weights and labels -----------------------------------------------------------

@dataclass(frozen=True)
class AffWeight:
    """Verma label (n, e, tn, te) at levels (k, tk); the hws has N_0 = n + 1."""
    n: Q
    e: Q
    tn: Q
    te: Q
    levels: LevelPair

    def __post_init__(self):
        for f in ("n", "e", "tn", "te"):
            object.__setattr__(self, f, to_q(getattr(self, f)))

    def hws_weight(self) -> findim.FinWeight:
        return findim.FinWeight(self.n + 1, self.e, self.tn, self.te)

    def to_json(self) -> dict:
        return {"n": fmt_q(self.n), "e": fmt_q(self.e), "tn": fmt_q(self.tn), "te": fmt_q(self.te),
                "k": fmt_q(self.levels.k), "tk": fmt_q(self.levels.tk)}


def conformal_dim(w: AffWeight) -> Q:
    """Minimal conformal dimension of the Verma module labelled by w."""
    k, tk = w.levels.k, w.levels.tk
    return w.n * w.te / tk + w.tn * w.e / tk - k * w.tn * w.te / tk ** 2 + w.te ** 2 / tk ** 2


def spectral_flow_weight(w: AffWeight, ell: int) -> tuple:
    """Eigenvalues of sigma^ell |v> for a state |v> with N_0, E_0, tN_0, tE_0
    eigenvalues (w.n, w.e, w.tn, w.te).

    Returns (new weight, shift of the L_0-eigenvalue).  Each step adds the
    (unchanged) N_0-eigenvalue to the conformal dimension.
    """
    k, tk = w.levels.k, w.levels.tk
    return AffWeight(w.n, w.e + ell * k, w.tn, w.te + ell * tk, w.levels), ell * w.n


AFF_KINDS = ("T", "S", "A", "V")


@dataclass(frozen=True, order=True)
class AffClassLabel:
    """Irreducible (or Verma) class.

    For T and V the fields are the module label.  For S and A the fields
    (n, e, tn) label the unflowed module with te = 0 and the class is its
    image under sigma^flow.
    """
    kind: str
    n: Q
    e: Q = ZERO
    tn: Q = ZERO
    te: Q = ZERO
    flow: int = 0

    def __post_init__(self):
        if self.kind not in AFF_KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        for f in ("n", "e", "tn", "te"):
            object.__setattr__(self, f, to_q(getattr(self, f)))
        object.__setattr__(self, "flow", int(self.flow))
        if self.kind in ("S", "A"):
            if self.te:
                raise ValueError("S and A labels carry te = 0 and a flow")
            if self.kind == "S" and not self.e:
                raise ValueError("S label needs e != 0")
            if self.kind == "A" and self.e:
                raise ValueError("A label needs e = 0")
        elif self.flow:
            raise ValueError("T and V labels carry no flow")

    def flowed(self, levels: LevelPair) -> tuple:
        """Module label (n, e, tn, te) of the class as a highest-weight module."""
        if self.kind in ("T", "V"):
            return self.n, self.e, self.tn, self.te
        ell = self.flow
        shift = Q(1, 2) if self.kind == "S" else ONE
        if ell == 0:
            return self.n, self.e, self.tn, ZERO
        n = self.n - 2 * ell + (shift if ell > 0 else -shift)
        return n, self.e + ell * levels.k, self.tn, ell * levels.tk

    def to_json(self) -> dict:
        d = {"kind": self.kind, "n": fmt_q(self.n), "e": fmt_q(self.e), "tn": fmt_q(self.tn)}
        if self.kind in ("T", "V"):
            d["te"] = fmt_q(self.te)
        else:
            d["flow"] = self.flow
        return d

    @classmethod
    def from_json(cls, d: dict) -> "AffClassLabel":
        kind = d["kind"]
        if kind in ("T", "V"):
            if int(d.get("flow", 0)):
                raise ValueError("T and V labels take te, not flow")
            return cls(kind, d["n"], d.get("e", 0), d.get("tn", 0), d.get("te", 0))
        return cls(kind, d["n"], d.get("e", 0), d.get("tn", 0), 0, int(d.get("flow", 0)))

    def __str__(self):
        core = f"{self.kind}^_{{{fmt_q(self.n)},{fmt_q(self.e)}|{fmt_q(self.tn)},"
        if self.kind in ("T", "V"):
            return core + f"{fmt_q(self.te)}}}"
        pre = f"sigma^{self.flow} " if self.flow else ""
        return pre + core + "0}"


def classify(w: AffWeight) -> AffClassLabel:
    """Class of the irreducible quotient of the Verma module labelled by w."""
    k, tk = w.levels.k, w.levels.tk
    r = w.te / tk
    if not is_integer(r):
        return AffClassLabel("T", w.n, w.e, w.tn, w.te)
    if not k:
        raise NotImplementedError("k = 0 with te/tk integral is not supported")
    ell = int(r)
    atyp = w.e / k == r
    shift = ONE if atyp else Q(1, 2)
    kind = "A" if atyp else "S"
    eb = w.e - ell * k
    if ell == 0:
        return AffClassLabel(kind, w.n + shift, eb, w.tn, 0, 0)
    nb = w.n + 2 * ell + (-shift if ell > 0 else shift)
    return AffClassLabel(kind, nb, eb, w.tn, 0, ell)


def spectral_flow_label(lab: AffClassLabel, ell: int, levels: LevelPair) -> AffClassLabel:
    if lab.kind in ("S", "A"):
        return AffClassLabel(lab.kind, lab.n, lab.e, lab.tn, 0, lab.flow + ell)
    return AffClassLabel(lab.kind, lab.n - 2 * ell, lab.e + ell * levels.k, lab.tn,
                         lab.te + ell * levels.tk)


# -- seeds and the induced module ---------------------------------------------

@dataclass(frozen=True)
class Seed:
    """Zero-mode representation: one matrix per basis element of the double."""
    matrices: tuple
    parities: tuple
    names: tuple

    @property
    def dim(self) -> int:
        return len(self.parities)


def seed_from_finmodule(m: findim.FinModule, names=None) -> Seed:
    names = names or tuple(f"s{i}" for i in range(m.dimension))
    return Seed(tuple(m.action), tuple(m.parities), tuple(names))


def trivial_seed(spec: SuperalgebraSpec) -> Seed:
    return Seed(tuple(la.zeros(1) for _ in range(spec.dim)), (0,), ("",))


VERMA_SEED_NAMES = ("", "psi-_0", "tpsi-_0", "tpsi-_0 psi-_0")


class InducedModule:
    """Induced module over the affinisation of a Takiff double, truncated at
    a grade cutoff.  Vectors are sparse dicts {(monomial, seed index): mpq}."""

    def __init__(self, spec: SuperalgebraSpec, levels: LevelPair, seed: Seed, cutoff: int):
        if cutoff < 0:
            raise ValueError("cutoff must be non-negative")
        if cutoff > max_cutoff():
            raise ValueError(f"cutoff {cutoff} exceeds the ceiling {max_cutoff()} "
                             "(raise TAKIFF_MAX_CUTOFF to override)")
        if not spec.is_takiff:
            raise ValueError("induced modules are built over a Takiff double")
        if len(seed.matrices) != spec.dim:
            raise ValueError("seed needs one matrix per basis element")
        self.spec = spec
        self.levels = levels
        self.seed = seed
        self.cutoff = cutoff
        self.d = spec.base.dim
        self.ngen = spec.dim
        self.parity = tuple(spec.parity(g) for g in range(self.ngen))
        self._table = self._bracket_table()
        self._memo: dict = {}
        self._seed_cols = [
            [{i: m[i, s] for i in range(seed.dim) if m[i, s]} for s in range(seed.dim)]
            for m in seed.matrices
        ]

    def _bracket_table(self) -> dict:
        base = self.spec.base
        d = self.d
        table = {}
        for a in range(self.ngen):
            for b in range(self.ngen):
                ta, tb = a >= d, b >= d
                if ta and tb:
                    continue
                comb = dict(self.spec.structure.get((a, b), {}))
                level = self.levels.tk if (ta or tb) else self.levels.k
                central = base.form[a % d, b % d] * level
                if comb or central:
                    table[(a, b)] = (comb, central)
        return table

    # -- basic data --

    def gen_name(self, g: int) -> str:
        return self.spec.basis[g].name

    def key_of(self, x: ModeElement) -> tuple:
        return (x.mode, x.base + (self.d if x.tilde else 0))

    def mode_element(self, key: tuple) -> ModeElement:
        m, g = key
        return ModeElement(g % self.d, g >= self.d, m)

    @staticmethod
    def grade(state: tuple) -> int:
        return -sum(m for m, _ in state[0])

    def state_parity(self, state: tuple) -> int:
        mono, s = state
        return (self.seed.parities[s] + sum(self.parity[g] for _, g in mono)) & 1

    def state_name(self, state: tuple) -> str:
        mono, s = state
        parts = [f"{self.gen_name(g)}_{m}" for m, g in mono]
        if self.seed.names[s]:
            parts.append(self.seed.names[s])
        return " ".join(parts + ["|v>"])

    @cached_property
    def basis(self) -> list:
        """Basis states per grade, canonically ordered."""
        out = []
        for g in range(self.cutoff + 1):
            states = [(mono, s) for mono in self._monomials(g) for s in range(self.seed.dim)]
            out.append(sorted(states))
        return out

    @cached_property
    def index(self) -> dict:
        return {st: i for grade in self.basis for i, st in enumerate(grade)}

    def _monomials(self, grade: int) -> list:
        keys = sorted((-j, g) for j in range(1, grade + 1) for g in range(self.ngen))
        out = []

        def rec(start, left, acc):
            if left == 0:
                out.append(tuple(acc))
                return
            for i in range(start, len(keys)):
                m, g = keys[i]
                if -m > left:
                    continue
                odd = self.parity[g]
                if odd and acc and acc[-1] == keys[i]:
                    continue
                acc.append(keys[i])
                rec(i + 1 if odd else i, left + m, acc)
                acc.pop()

        rec(0, grade, [])
        return out

    def grade_dims(self) -> list:
        return [len(b) for b in self.basis]

    # -- the action --

    def act(self, x: tuple, state: tuple) -> dict:
        """Mode key x = (mode, g) applied to a basis state."""
        memo_key = (x, state)
        hit = self._memo.get(memo_key)
        if hit is not None:
            return hit
        res = self._act(x, state)
        self._memo[memo_key] = res
        return res

    def _act(self, x: tuple, state: tuple) -> dict:
        mono, s = state
        m, g = x
        if not mono:
            if m > 0:
                return {}
            if m == 0:
                return {((), i): c for i, c in self._seed_cols[g][s].items()}
            return {((x,), s): ONE}
        y = mono[0]
        if m < 0 and x <= y:
            if x == y and self.parity[g]:
                # x x R = 1/2 [x, x] R; no central term since the mode is nonzero
                comb, _ = self._table.get((g, g), ({}, ZERO))
                out: dict = {}
                rest = (mono[1:], s)
                for c, v in comb.items():
                    la.axpy(out, v / 2, self.act((2 * m, c), rest))
                return out
            return {((x,) + mono, s): ONE}
        rest = (mono[1:], s)
        out = {}
        comb, central = self._table.get((g, y[1]), ({}, ZERO))
        mode = m + y[0]
        for c, v in comb.items():
            la.axpy(out, v, self.act((mode, c), rest))
        if central and mode == 0:
            la.axpy(out, m * central, {rest: ONE})
        sg = -ONE if self.parity[g] and self.parity[y[1]] else ONE
        for st, c in self.act(x, rest).items():
            la.axpy(out, sg * c, self.act(y, st))
        return out

    def apply(self, x, vec: dict, check: bool = True) -> dict:
        """Apply a ModeElement or mode key to a sparse vector."""
        key = self.key_of(x) if isinstance(x, ModeElement) else x
        out: dict = {}
        for st, c in vec.items():
            if check and self.grade(st) - key[0] > self.cutoff:
                raise GradeOverflow(f"result grade exceeds cutoff {self.cutoff}")
            la.axpy(out, c, self.act(key, st))
        return out

    def apply_word(self, word, vec: dict) -> dict:
        """Apply x_1 x_2 ... x_r (rightmost first)."""
        for x in reversed(list(word)):
            vec = self.apply(x, vec)
        return vec

    def bracket_action(self, x: tuple, y: tuple, vec: dict) -> dict:
        """Action of the affine bracket [x, y} on vec."""
        comb, central = self._table.get((x[1], y[1]), ({}, ZERO))
        mode = x[0] + y[0]
        out: dict = {}
        for c, v in comb.items():
            la.axpy(out, v, self.apply((mode, c), vec))
        if central and mode == 0:
            la.axpy(out, x[0] * central, vec)
        return out

    def to_dense(self, vec: dict, grade: int) -> np.ndarray:
        v = np.empty(len(self.basis[grade]), dtype=object)
        v.fill(ZERO)
        for st, c in vec.items():
            v[self.index[st]] = c
        return v

    def operator_matrix(self, op, grade_in: int, grade_out: int) -> np.ndarray:
        """Dense matrix of a linear map (callable on sparse vectors) between grades."""
        rows, cols = len(self.basis[grade_out]), len(self.basis[grade_in])
        out = la.zeros(rows, cols)
        for j, st in enumerate(self.basis[grade_in]):
            for t, c in op({st: ONE}).items():
                if self.grade(t) != grade_out:
                    raise ValueError("operator leaves the target grade")
                out[self.index[t], j] = c
        return out


# -- Takiff gl(1|1) Verma modules ---------------------------------------------------

_CHARGE = {findim.PP: 1, findim.PM: -1, findim.TPP: 1, findim.TPM: -1}


class GradedVerma(InducedModule):
    """Verma module of affine Takiff gl(1|1), or the module induced from any
    finite gl(1|1) seed whose N, E, tE matrices are diagonal."""

    def __init__(self, w: AffWeight, cutoff: int, seed: Seed | None = None):
        spec = builtin("gl11_takiff")
        if seed is None:
            seed = seed_from_finmodule(findim.verma(w.hws_weight()), VERMA_SEED_NAMES)
        super().__init__(spec, w.levels, seed, cutoff)
        self.weight = w
        self._seed_n = [seed.matrices[findim.N][i, i] for i in range(seed.dim)]

    def n0(self, state: tuple) -> Q:
        mono, s = state
        return self._seed_n[s] + sum(_CHARGE.get(g, 0) for _, g in mono)

    @cached_property
    def weight_index(self) -> dict:
        """(N_0-eigenvalue, grade) -> list of states."""
        out = defaultdict(list)
        for g, states in enumerate(self.basis):
            for st in states:
                out[(self.n0(st), g)].append(st)
        return dict(out)

    def multiplicities(self) -> dict:
        """{grade: {N_0 - n: dimension}} with n the Verma label."""
        out: dict = {}
        for (n0, g), states in self.weight_index.items():
            out.setdefault(g, {})[n0 - self.weight.n] = len(states)
        return {g: dict(sorted(row.items(), reverse=True)) for g, row in sorted(out.items())}

    def multiplicity_rows(self) -> list:
        return [tuple(r.values()) for r in self.multiplicities().values()]

    def character_counts(self, supertrace: bool = False) -> Counter:
        """{(N_0-eigenvalue, grade): trace of 1 or of (-1)^F} over the basis."""
        out = Counter()
        for g, states in enumerate(self.basis):
            for st in states:
                out[(self.n0(st), g)] += -1 if supertrace and self.state_parity(st) else 1
        return out


def build_verma(w: AffWeight, cutoff: int) -> GradedVerma:
    return GradedVerma(w, cutoff)


def build_generalized(w: AffWeight, cutoff: int, m: int = 2) -> GradedVerma:
    """Module induced from the finite GenTyp_m seed."""
    return GradedVerma(w, cutoff, seed_from_finmodule(findim.generalized_verma(w.hws_weight(), m)))


def apply_mode(gv: InducedModule, x: ModeElement, state: dict) -> dict:
    return gv.apply(x, state)


def hws(gv: InducedModule) -> dict:
    return {((), 0): ONE}


# -- singular vectors ---------------------------------------------------------------

@dataclass
class SingularReport:
    grade: int
    singular: list         # sparse vectors
    generalized: list

    def to_json(self, gv: InducedModule) -> dict:
        def enc(v):
            return [[gv.state_name(st), fmt_q(c)] for st, c in sorted(v.items())]
        out = {"grade": self.grade, "singular": [enc(v) for v in self.singular],
               "generalized": [enc(v) for v in self.generalized]}
        if isinstance(gv, GradedVerma):
            out["n0"] = [fmt_q(gv.n0(next(iter(v)))) for v in self.singular + self.generalized]
        return out


def raising_keys(gv: InducedModule, modes) -> list:
    """psi+_0, tpsi+_0 and the given positive modes of every current."""
    keys = [(0, findim.PP), (0, findim.TPP)]
    keys += [(m, g) for m in modes for g in range(gv.ngen)]
    return keys


def _kernel(gv: GradedVerma, states: list, keys: list) -> list:
    eqs = defaultdict(dict)
    for j, st in enumerate(states):
        for x in keys:
            if x[0] > gv.grade(st):
                continue
            for t, c in gv.act(x, st).items():
                eqs[(x, t)][j] = c
    basis = la.nullspace(eqs.values(), len(states))
    return [{states[j]: c for j, c in v.items()} for v in basis]


def _zero_closure(gv: GradedVerma, vecs: list, ech: la.Echelon, index: dict) -> list:
    """Add the zero-mode orbit of vecs to ech; returns the newly added vectors."""
    new = []
    queue = list(vecs)
    while queue:
        v = queue.pop()
        if ech.add({index[st]: c for st, c in v.items()}):
            new.append(v)
            for g in range(gv.ngen):
                w = gv.apply((0, g), v, check=False)
                if w:
                    queue.append(w)
    return new


class _Submodule:
    """Span, grade by grade, of the submodule generated by (generalised)
    highest-weight vectors, truncated at the cutoff."""

    def __init__(self, gv: GradedVerma):
        self.gv = gv
        self.ech = [la.Echelon() for _ in range(gv.cutoff + 1)]
        self.vecs = [[] for _ in range(gv.cutoff + 1)]

    def contains(self, v: dict, grade: int) -> bool:
        return self.ech[grade].contains({self.gv.index[st]: c for st, c in v.items()})

    def add(self, v: dict, grade: int) -> None:
        gv = self.gv
        new = {grade: _zero_closure(gv, [v], self.ech[grade], gv.index)}
        for g in range(grade, gv.cutoff + 1):
            fresh = new.get(g, [])
            self.vecs[g].extend(fresh)
            for u in fresh:
                for j in range(1, gv.cutoff - g + 1):
                    for a in range(gv.ngen):
                        w = gv.apply((-j, a), u, check=False)
                        if w:
                            new.setdefault(g + j, []).extend(
                                _zero_closure(gv, [w], self.ech[g + j], gv.index))

    def dims(self) -> Counter:
        out = Counter()
        for g in range(self.gv.cutoff + 1):
            by_n0 = Counter()
            for row in self.ech[g].rows.values():
                by_n0[self.gv.n0(self.gv.basis[g][min(row)])] += 1
            for n0, c in by_n0.items():
                out[(n0, g)] += c
        return out


def singular_vectors(gv: GradedVerma, grade: int, modes=None, _sub=None) -> SingularReport:
    """Primitive singular and generalised singular vectors at a grade.

    ``modes`` defaults to 1..grade: N_m and tN_m are not brackets of lower
    modes, so no smaller set of positive modes suffices in general.

    Weight spaces are scanned from high to low N_0; a kernel vector is kept
    only if it is not already in the submodule generated by the vectors kept
    so far (at this and lower grades).  The generating hws is excluded.
    """
    if grade > gv.cutoff:
        raise GradeOverflow("grade beyond cutoff")
    sub = _sub or _primitive_submodule(gv, grade)
    keys = raising_keys(gv, range(1, grade + 1) if modes is None else modes)
    tn = gv.weight.tn
    sing, gen = [], []
    for n0 in sorted({n for (n, g) in gv.weight_index if g == grade}, reverse=True):
        states = gv.weight_index[(n0, grade)]
        ker = _kernel(gv, states, keys)
        if grade == 0:
            ker = [v for v in ker if set(v) != {((), 0)}]
        if not ker:
            continue
        # eigen part: combinations annihilated by tN_0 - tn
        images = []
        for v in ker:
            w = gv.apply((0, findim.TN), v)
            la.axpy(w, -tn, v)
            images.append(w)
        idx = {st: i for i, st in enumerate(states)}
        rows = defaultdict(dict)
        for j, w in enumerate(images):
            for st, c in w.items():
                rows[idx[st]][j] = c
        eig = []
        for comb in la.nullspace(rows.values(), len(ker)):
            v: dict = {}
            for j, c in comb.items():
                la.axpy(v, c, ker[j])
            eig.append(v)
        for v in eig:
            if not sub.contains(v, grade):
                sing.append(v)
                sub.add(v, grade)
        for v in ker:
            if not sub.contains(v, grade):
                gen.append(v)
                sub.add(v, grade)
    return SingularReport(grade, sing, gen)


def _primitive_submodule(gv: GradedVerma, grade: int) -> _Submodule:
    sub = _Submodule(gv)
    for g in range(grade):
        singular_vectors(gv, g, _sub=sub)
    return sub


def all_singular_vectors(gv: GradedVerma, max_grade: int | None = None, modes=None) -> list:
    top = gv.cutoff if max_grade is None else max_grade
    sub = _Submodule(gv)
    return [singular_vectors(gv, g, modes, _sub=sub) for g in range(top + 1)]


def submodule_dims(gv: GradedVerma, generators: list) -> Counter:
    """{(N_0, grade): dim} of the submodule generated by (generalised)
    highest-weight vectors, given as (sparse vector, grade) pairs."""
    sub = _Submodule(gv)
    for v, g in generators:
        sub.add(v, g)
    return sub.dims()


def irreducible_counts(w: AffWeight, cutoff: int, supertrace: bool = False) -> Counter:
    """Brute-force (super)trace data of the irreducible quotient of the Verma
    module at an untwisted weight (te = 0 or te/tk not integral)."""
    gv = build_verma(w, cutoff)
    full = gv.character_counts(supertrace)
    lab = classify(w)
    if lab.kind == "T":
        return full
    if lab.flow:
        raise NotImplementedError("quotients are built for unflowed weights only")
    # maximal submodule: generated by tpsi-_0|v> (S) or psi-_0|v> (A)
    gen = {((), 2): ONE} if lab.kind == "S" else {((), 1): ONE}
    sub = _Submodule(gv)
    sub.add(gen, 0)
    out = Counter(full)
    for g in range(cutoff + 1):
        for row in sub.ech[g].rows.values():
            st = gv.basis[g][min(row)]
            out[(gv.n0(st), g)] -= -1 if supertrace and gv.state_parity(st) else 1
    return Counter({key: v for key, v in out.items() if v})
