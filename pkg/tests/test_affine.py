import random

import pytest

from takiff import linalg as la
from takiff.affine import (AffClassLabel, AffWeight, GradeOverflow, all_singular_vectors, apply_mode,
                           build_verma, classify, conformal_dim, hws, irreducible_counts,
                           singular_vectors, spectral_flow_label, spectral_flow_weight)
from takiff.algebra import LevelPair, ModeElement
from takiff.findim import PP, TE, TPM
from takiff.rational import ONE, Q

from conftest import rand_q

LV = LevelPair(Q(3, 2), Q(-5, 7))


def gen_function_dims(top):
    """Coefficients of 4 prod (1+q^i)^4/(1-q^i)^4 by direct polynomial products."""
    c = [0] * (top + 1)
    c[0] = 4
    for i in range(1, top + 1):
        for _ in range(4):
            c = [c[j] + (c[j - i] if j >= i else 0) for j in range(top + 1)]
            nxt = c[:]
            for j in range(i, top + 1):
                nxt[j] += nxt[j - i]
            c = nxt
    return c


def weight(rng, te=None, e=None):
    return AffWeight(rand_q(rng), rand_q(rng) if e is None else e, rand_q(rng),
                     rand_q(rng) if te is None else te, LV)


def test_grade_dimensions():
    gv = build_verma(AffWeight(0, 1, 2, Q(1, 3), LV), 3)
    assert gv.grade_dims() == gen_function_dims(3) == [4, 32, 160, 640]


def test_fig1_rows():
    gv = build_verma(AffWeight(Q(1, 2), 0, 0, 0, LV), 2)
    assert gv.multiplicity_rows() == [(1, 2, 1), (2, 8, 12, 8, 2), (1, 12, 39, 56, 39, 12, 1)]
    assert gv.multiplicities()[2][0] == 56


def test_multiplicities_palindromic(rng):
    gv = build_verma(weight(rng), 3)
    for row in gv.multiplicity_rows():
        assert row == row[::-1]


def test_grade_zero_is_finite_verma(rng):
    w = weight(rng)
    gv = build_verma(w, 0)
    top = w.n + 1
    assert sorted(gv.n0(s) for s in gv.basis[0]) == [top - 2, top - 1, top - 1, top]


def test_monomials_canonical(rng):
    gv = build_verma(weight(rng), 3)
    for states in gv.basis:
        for mono, _ in states:
            assert list(mono) == sorted(mono)
            odd = [x for x in mono if gv.parity[x[1]]]
            assert len(odd) == len(set(odd))


def test_apply_mode_examples(rng):
    w = weight(rng)
    gv = build_verma(w, 3)
    assert apply_mode(gv, ModeElement(PP, False, 0), hws(gv)) == {}
    assert apply_mode(gv, ModeElement(PP, True, 0), hws(gv)) == {}
    for st in gv.basis[2][:40]:
        assert apply_mode(gv, ModeElement(1, False, 0), {st: ONE}) == {st: w.e}
        assert apply_mode(gv, ModeElement(1, True, 0), {st: ONE}) == {st: w.te}


def test_anticommutator_identity(rng):
    gv = build_verma(weight(rng), 3)
    up, down = (1, PP), (-1, TPM)
    for g in range(3):
        for st in gv.basis[g]:
            v = {st: ONE}
            lhs = gv.apply(up, gv.apply(down, v))
            la.axpy(lhs, ONE, gv.apply(down, gv.apply(up, v)))
            rhs = gv.apply((0, TE), v)
            la.axpy(rhs, LV.tk, v)
            assert lhs == rhs


def test_random_commutators(rng):
    gv = build_verma(weight(rng), 3)
    for _ in range(100):
        x = (rng.randint(-1, 2), rng.randrange(8))
        y = (rng.randint(-1, 2), rng.randrange(8))
        st = rng.choice(gv.basis[rng.randint(0, 1)])
        v = {st: ONE}
        lhs = gv.apply(x, gv.apply(y, v))
        sg = -ONE if gv.parity[x[1]] and gv.parity[y[1]] else ONE
        la.axpy(lhs, -sg, gv.apply(y, gv.apply(x, v)))
        la.axpy(lhs, -ONE, gv.bracket_action(x, y, v))
        assert not lhs


def test_grade_overflow():
    gv = build_verma(AffWeight(0, 1, 0, Q(1, 3), LV), 1)
    with pytest.raises(GradeOverflow):
        gv.apply((-1, 0), {gv.basis[1][0]: ONE})


def test_cutoff_ceiling(monkeypatch):
    monkeypatch.setenv("TAKIFF_MAX_CUTOFF", "2")
    with pytest.raises(ValueError):
        build_verma(AffWeight(0, 1, 0, Q(1, 3), LV), 3)


def names(gv, vecs):
    return [{gv.state_name(s): c for s, c in v.items()} for v in vecs]


def test_singular_band_edge_half():
    w = AffWeight(Q(2, 3), Q(1, 5), Q(-1, 2), LV.tk / 2, LV)
    reps = all_singular_vectors(build_verma(w, 3))
    assert all(not r.singular and not r.generalized for r in reps[1:])


def test_singular_te_zero_e_nonzero():
    gv = build_verma(AffWeight(Q(2, 3), Q(1, 5), Q(-1, 2), 0, LV), 2)
    rep = singular_vectors(gv, 0)
    assert names(gv, rep.singular) == [{"tpsi-_0 |v>": 1}]
    assert rep.generalized == []


def test_singular_te_zero_e_zero():
    gv = build_verma(AffWeight(Q(2, 3), 0, Q(-1, 2), 0, LV), 2)
    rep = singular_vectors(gv, 0)
    assert names(gv, rep.singular) == [{"tpsi-_0 |v>": 1}]
    assert names(gv, rep.generalized) == [{"psi-_0 |v>": 1}]
    assert all(not r.singular and not r.generalized for r in all_singular_vectors(gv)[1:])


def test_singular_after_flow():
    # e/k = te/tk = 1: the quotient is sigma^1 of an atypical, singular vectors at grade 1
    gv = build_verma(AffWeight(Q(1, 3), LV.k, Q(1, 4), LV.tk, LV), 2)
    reps = all_singular_vectors(gv)
    assert [(len(r.singular), len(r.generalized)) for r in reps] == [(0, 0), (1, 1), (0, 0)]
    assert names(gv, reps[1].singular) == [{"tpsi+_-1 |v>": 1}]
    assert names(gv, reps[1].generalized) == [{"psi+_-1 |v>": 1}]


def test_typical_weights_have_no_singular_vectors():
    """Evidence (not proof) beyond the irreducibility band: grades <= 3."""
    rng = random.Random(7)
    for _ in range(10):
        while True:
            te = rand_q(rng, nonzero=True)
            if (te / LV.tk).denominator != 1:
                break
        reps = all_singular_vectors(build_verma(weight(rng, te=te), 3))
        assert all(not r.singular and not r.generalized for r in reps)


def test_singular_constraint_nu():
    rng = random.Random(3)
    for ell, e_mult in ((1, 1), (1, 0), (2, 0), (-1, 1)):
        e = ell * LV.k if e_mult else rand_q(rng, nonzero=True)
        w = AffWeight(rand_q(rng), e, rand_q(rng), ell * LV.tk, LV)
        gv = build_verma(w, 3)
        found = 0
        for r in all_singular_vectors(gv):
            for v in r.singular + r.generalized:
                nu = gv.n0(next(iter(v))) - (w.n + 1)
                assert abs(nu) <= r.grade + 1
                found += 1
        assert found


def test_raising_set_needs_all_modes():
    # N_3 is not a bracket of lower modes, so modes 1 and 2 alone admit E_-3|v>
    gv = build_verma(AffWeight(Q(1, 3), 2, Q(1, 4), Q(-5, 14), LV), 3)
    assert singular_vectors(gv, 3, modes=(1, 2)).singular
    assert not singular_vectors(gv, 3).singular
    assert not singular_vectors(gv, 3, modes=(1, 2, 3, 4)).singular


def test_classify_examples():
    assert classify(AffWeight(0, 1, 0, LV.tk / 3, LV)).kind == "T"
    s = classify(AffWeight(Q(1, 2), 3, 1, 0, LV))
    assert (s.kind, s.flow, s.n) == ("S", 0, 1)
    a = classify(AffWeight(0, 2 * LV.k, 1, 2 * LV.tk, LV))
    assert (a.kind, a.flow) == ("A", 2)
    assert a.flowed(LV) == (0, 2 * LV.k, 1, 2 * LV.tk)
    with pytest.raises(NotImplementedError):
        classify(AffWeight(0, 1, 0, 1, LevelPair(0, 1)))


def test_classify_flowed_roundtrip(rng):
    for _ in range(20):
        ell = rng.choice([-2, -1, 1, 2, 3])
        atyp = rng.random() < 0.5
        e = ell * LV.k if atyp else ell * LV.k + rand_q(rng, nonzero=True)
        w = AffWeight(rand_q(rng), e, rand_q(rng), ell * LV.tk, LV)
        lab = classify(w)
        assert lab.flow == ell and lab.kind == ("A" if atyp else "S")
        assert lab.flowed(LV) == (w.n, w.e, w.tn, w.te)


def test_conformal_dim():
    lv = LevelPair(1, 1)
    assert conformal_dim(AffWeight(1, 2, 3, 1, lv)) == 5
    assert conformal_dim(AffWeight(0, 0, 0, 0, lv)) == 0
    w = AffWeight(Q(7, 3), Q(2, 5), Q(-3, 4), 0, LV)
    assert conformal_dim(w) == w.tn * w.e / LV.tk


def test_spectral_flow_weight():
    w = AffWeight(Q(1, 2), 1, 2, Q(1, 3), LV)
    w1, shift = spectral_flow_weight(w, 1)
    assert (w1.n, w1.e, w1.tn, w1.te, shift) == (w.n, 1 + LV.k, 2, Q(1, 3) + LV.tk, w.n)
    assert spectral_flow_weight(w, 0) == (w, 0)
    w3, s3 = spectral_flow_weight(w, 3)
    a, s1 = spectral_flow_weight(w, 1)
    b, s2 = spectral_flow_weight(a, 2)
    assert (b, s1 + s2) == (w3, s3)


def test_spectral_flow_label():
    t = AffClassLabel("T", 1, 2, 3, Q(1, 3))
    assert spectral_flow_label(t, 2, LV) == AffClassLabel("T", -3, 2 + 2 * LV.k, 3, Q(1, 3) + 2 * LV.tk)
    s = AffClassLabel("S", 1, 2, 3, 0, 1)
    assert spectral_flow_label(s, -1, LV) == AffClassLabel("S", 1, 2, 3)


def test_label_validation():
    with pytest.raises(ValueError):
        AffClassLabel("S", 0, 0, 0)
    with pytest.raises(ValueError):
        AffClassLabel("A", 0, 1, 0)
    with pytest.raises(ValueError):
        AffClassLabel("T", 0, 1, 0, 1, flow=1)
    lab = AffClassLabel("A", 1, 0, 2, 0, -3)
    assert AffClassLabel.from_json(lab.to_json()) == lab


def test_irreducible_quotient_ground_states():
    s = irreducible_counts(AffWeight(Q(1, 2), 3, 1, 0, LV), 0)
    assert sorted(s.items()) == [((Q(1, 2), 0), 1), ((Q(3, 2), 0), 1)]
    a = irreducible_counts(AffWeight(0, 0, 1, 0, LV), 1)
    assert [v for (n, g), v in a.items() if g == 0] == [1]
