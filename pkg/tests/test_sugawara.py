import random

import pytest

from takiff import linalg as la
from takiff.affine import (AffWeight, InducedModule, build_generalized, build_verma, conformal_dim,
                           trivial_seed)
from takiff.algebra import LevelPair, SuperalgebraSpec, builtin, takiff_extend
from takiff.findim import PM
from takiff.rational import ONE, Q
from takiff.sugawara import (BilinearField, ModeRealisation, build_T_general, build_T_gl11,
                             central_charge, check_primary, check_virasoro, l0_blocks)

from conftest import rand_q

LV = LevelPair(Q(3, 2), Q(-5, 7))
MR = range(-2, 3)
HWS = {((), 0): ONE}


@pytest.fixture(scope="module")
def gl11_rep():
    w = AffWeight(Q(1, 3), 2, Q(1, 4), Q(2, 7), LV)
    return ModeRealisation(build_verma(w, 3), build_T_gl11(LV))


@pytest.fixture(scope="module")
def sl2_rep():
    spec = builtin("sl2_takiff")
    lv = LevelPair(Q(5, 3), Q(2, 7))
    return ModeRealisation(InducedModule(spec, lv, trivial_seed(spec), 3), build_T_general(spec, lv))


def test_central_charges(gl11_rep, sl2_rep):
    assert central_charge(gl11_rep) == 0
    assert central_charge(sl2_rep) == 6      # 2 sdim sl2


def test_u1_central_charge():
    spec = builtin("u1_takiff")
    lv = LevelPair(2, Q(1, 3))
    rep = ModeRealisation(InducedModule(spec, lv, trivial_seed(spec), 2), build_T_general(spec, lv))
    assert central_charge(rep) == 2


def test_virasoro_gl11(gl11_rep):
    r = check_virasoro(gl11_rep, MR, MR)
    assert r.passed and r.central_charge == 0 and r.checked > 1000


def test_virasoro_sl2(sl2_rep):
    r = check_virasoro(sl2_rep, MR, MR)
    assert r.passed and r.central_charge == 6


def test_primary_gl11(gl11_rep):
    assert check_primary(gl11_rep, MR, MR).passed


def test_primary_sl2(sl2_rep):
    assert check_primary(sl2_rep, MR, MR).passed


def test_virasoro_examples(gl11_rep):
    mod = gl11_rep.module
    for st in mod.basis[1]:
        v = {st: ONE}
        assert gl11_rep.commutator(1, -1, v) == {t: 2 * c for t, c in gl11_rep.L(0, v).items()}
        assert gl11_rep.commutator(1, 1, v) == {}
    assert gl11_rep.L(1, HWS) == {} and gl11_rep.L(2, HWS) == {}


def test_primary_examples(gl11_rep):
    mod = gl11_rep.module
    for st in mod.basis[0] + mod.basis[1]:
        v = {st: ONE}
        # [L_1, psi-_{-1}] = psi-_0
        lhs = gl11_rep.L(1, mod.apply((-1, PM), v))
        la.axpy(lhs, -ONE, mod.apply((-1, PM), gl11_rep.L(1, v)))
        assert lhs == mod.apply((0, PM), v)
        # [L_-1, N_1] = -N_0
        lhs = gl11_rep.L(-1, mod.apply((1, 0), v))
        la.axpy(lhs, -ONE, mod.apply((1, 0), gl11_rep.L(-1, v)))
        assert lhs == {t: -c for t, c in mod.apply((0, 0), v).items()}


def test_l0_on_hws_random_weights():
    rng = random.Random(11)
    for _ in range(10):
        lv = LevelPair(rand_q(rng, nonzero=True), rand_q(rng, nonzero=True))
        w = AffWeight(rand_q(rng), rand_q(rng), rand_q(rng), rand_q(rng), lv)
        rep = ModeRealisation(build_verma(w, 0), build_T_gl11(lv))
        assert rep.L(0, HWS) == {((), 0): conformal_dim(w)}


def test_l0_semisimple_part(gl11_rep):
    w = gl11_rep.module.weight
    delta = conformal_dim(w)
    for g in range(3):
        for n0, mat in l0_blocks(gl11_rep, g).items():
            eig, irr = la.rational_eigenvalues(mat)
            assert irr == 0 and set(eig) == {delta + g}


def test_l0_nilpotent_on_gentyp2():
    w = AffWeight(Q(1, 3), 2, Q(1, 4), Q(2, 7), LV)
    rep = ModeRealisation(build_generalized(w, 2), build_T_gl11(LV))
    d = conformal_dim(w)
    want = (LV.k / LV.tk) * (w.e / LV.k - w.te / LV.tk)
    assert rep.L(0, HWS) == {((), 0): d, ((), 1): want}
    assert rep.L(0, {((), 1): ONE}) == {((), 1): d}


def test_general_formula_plus_te_te_is_gl11():
    spec = builtin("gl11_takiff")
    gv = build_verma(AffWeight(Q(1, 3), 2, Q(1, 4), Q(2, 7), LV), 2)
    gen = build_T_general(spec, LV)
    full = BilinearField(gen.terms + ((ONE / LV.tk ** 2, spec.index("tE"), spec.index("tE")),))
    a, b = ModeRealisation(gv, build_T_gl11(LV)), ModeRealisation(gv, full)
    for n in MR:
        for st in gv.basis[0] + gv.basis[1]:
            assert a.L(n, {st: ONE}) == b.L(n, {st: ONE})
    # without the tE tE term the field is not a Virasoro field here (gl(1|1) is not simple)
    assert not check_primary(ModeRealisation(gv, gen), MR, MR).passed


def test_uniqueness_probe(gl11_rep):
    t = build_T_gl11(LV)
    for i in range(len(t.terms)):
        rep = ModeRealisation(gl11_rep.module, t.perturbed(i, 1))
        ok = check_virasoro(rep, MR, MR, c=0).passed and check_primary(rep, MR, MR).passed
        assert not ok, i


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        build_T_general(builtin("gl11"), LV)
    flat = takiff_extend(SuperalgebraSpec.build(["a"], ["even"], {}, [[0]], name="flat"))
    with pytest.raises(ValueError, match="degenerate"):
        build_T_general(flat, LV)
