import random
from collections import Counter

import numpy as np
import pytest

from takiff import linalg as la
from takiff.findim import (ClassLabel, FinWeight, casimir_matrices, composition_factors, decompose,
                           expand_verma, generalized_verma, groth_mul, groth_product,
                           irreducible_quotient, jordan_structure, module_for_label, tensor, verma)
from takiff.rational import Q

from conftest import rand_q

H = Q(1, 2)


def rand_weight(rng, e0=False, te0=False):
    return FinWeight(rand_q(rng), Q(0) if e0 else rand_q(rng, nonzero=True), rand_q(rng),
                     Q(0) if te0 else rand_q(rng, nonzero=True))


def rand_label(rng, kind):
    n, tn = rand_q(rng), rand_q(rng)
    if kind == "A":
        return ClassLabel("A", n, 0, tn, 0)
    if kind == "S":
        return ClassLabel("S", n, rand_q(rng, nonzero=True), tn, 0)
    return ClassLabel("T", n, rand_q(rng), tn, rand_q(rng, nonzero=True))


def test_verma_basics(rng):
    for _ in range(5):
        w = rand_weight(rng)
        v = verma(w)
        v.check()
        assert v.dimension == 4
        assert [s[0].n for s in v.states] == [w.n, w.n - 1, w.n - 1, w.n - 2]
        tn = v.mat("tN")
        # tN psi-|v> = tn psi-|v> - tpsi-|v>
        col = tn[:, 1]
        assert list(col) == [0, w.tn, -1, 0]
        assert jordan_structure(v, "tN") == {w.tn: [2, 1, 1]}


def test_irreducible_quotients():
    m, lab = irreducible_quotient(FinWeight(2, 0, 3, 0))
    assert m.dimension == 1 and lab == ClassLabel("A", 2, 0, 3, 0)
    m, lab = irreducible_quotient(FinWeight(2, 5, 3, 0))
    m.check()
    assert m.dimension == 2 and lab == ClassLabel("S", Q(3, 2), 5, 3, 0)
    m, lab = irreducible_quotient(FinWeight(2, 0, 3, 7))
    assert m.dimension == 4 and lab == ClassLabel("T", 1, 0, 3, 7)


def test_label_invariants():
    with pytest.raises(ValueError):
        ClassLabel("A", 0, 1, 0, 0)
    with pytest.raises(ValueError):
        ClassLabel("S", 0, 0, 0, 0)
    with pytest.raises(ValueError):
        ClassLabel("T", 0, 1, 0, 0)


def test_labels_are_average_n(rng):
    for kind in ("A", "S", "T"):
        lab = rand_label(rng, kind)
        m = module_for_label(lab)
        m.check()
        ns = [s[0].n for s in m.states]
        assert sum(ns) / len(ns) == lab.n
        assert m.dimension == lab.dim


def test_casimirs(rng):
    for _ in range(5):
        w = rand_weight(rng)
        q1, q2 = casimir_matrices(verma(w))
        assert np.array_equal(q1, (w.n * w.te + w.tn * w.e) * la.identity(4))
        assert np.array_equal(q2, w.tn * w.te * la.identity(4))
    a = module_for_label(ClassLabel("A", 3, 0, 2, 0))
    assert all(la.is_zero(q) for q in casimir_matrices(a))


def test_casimirs_commute(rng):
    mods = [verma(rand_weight(rng)), generalized_verma(rand_weight(rng)),
            module_for_label(ClassLabel("P", 1, 0, 2, 0)),
            tensor(module_for_label(rand_label(rng, "S")), module_for_label(rand_label(rng, "T")))]
    for m in mods:
        for q in casimir_matrices(m):
            for g in m.action:
                assert np.array_equal(q @ g, g @ q)


def test_gentyp2_structure(rng):
    w = rand_weight(rng)
    g = generalized_verma(w)
    g.check()
    # block sizes computed by hand: (tN - tn)^2 = 2 X(x)J has rank 1
    assert jordan_structure(g, "tN") == {w.tn: [3, 2, 2, 1]}
    q1, q2 = casimir_matrices(g)
    # Q1|v> = (n te + tn e)|v> + e|w>, Q2|v> = tn te|v> + te|w>; |v> = state 0, |w> = state 1
    col1, col2 = q1[:, 0], q2[:, 0]
    assert col1[0] == w.n * w.te + w.tn * w.e and col1[1] == w.e
    assert col2[0] == w.tn * w.te and col2[1] == w.te
    assert all(not x for x in col1[2:]) and all(not x for x in col2[2:])
    for q in (q1, q2):
        blocks = la.jordan_structure(q)
        assert max(max(b) for b in blocks.values()) == 2


def test_atypical_jordan():
    assert jordan_structure(module_for_label(ClassLabel("A", 1, 0, 4, 0)), "tN") == {4: [1]}


def test_tensor_dimension_and_weights(rng):
    m1, m2 = module_for_label(rand_label(rng, "T")), module_for_label(rand_label(rng, "T"))
    t = tensor(m1, m2)
    t.check()
    assert t.dimension == 16
    w1 = [s[0] for s in m1.states]
    w2 = [s[0] for s in m2.states]
    assert sorted(s[0] for s in t.states) == sorted(a + b for a in w1 for b in w2)


def test_tp_ax_example():
    r = decompose(tensor(module_for_label(ClassLabel("A", 1, 0, 0, 0)),
                         module_for_label(ClassLabel("A", 2, 0, 1, 0))))
    assert r.summands == (ClassLabel("A", 3, 0, 1, 0),)


def test_tp_sxs_examples():
    s = lambda e: module_for_label(ClassLabel("S", 0, e, 0, 0))
    r = decompose(tensor(s(1), s(1)))
    assert r.summands == (ClassLabel("S", -H, 2, 0, 0), ClassLabel("S", H, 2, 0, 0))
    p = tensor(s(1), s(-1))
    r = decompose(p)
    assert r.summands == (ClassLabel("P", 0, 0, 0, 0),)
    assert jordan_structure(p, "tN") == {0: [1, 1, 1, 1]}
    assert r.factors == Counter({ClassLabel("A", 1): 1, ClassLabel("A", 0): 2, ClassLabel("A", -1): 1})


def expected_summands(a, b):
    """Direct-sum rules for two irreducibles, or None where only factors are known."""
    order = {"A": 0, "S": 1, "T": 2}
    if order[a.kind] > order[b.kind]:
        a, b = b, a
    n, e, tn = a.n + b.n, a.e + b.e, a.tn + b.tn
    if a.kind == "A":
        return [ClassLabel(b.kind, n, b.e, tn, b.te)]
    if a.kind == "S" and b.kind == "S":
        if e:
            return [ClassLabel("S", n + H, e, tn), ClassLabel("S", n - H, e, tn)]
        return [ClassLabel("P", n, 0, tn, 0)]
    if a.kind == "S":
        return [ClassLabel("T", n + H, e, tn, b.te), ClassLabel("T", n - H, e, tn, b.te)]
    te = a.te + b.te
    if not te:
        return None
    return [ClassLabel("T", n + 1, e, tn, te), ClassLabel("GenTyp", n, e, tn, te, m=2),
            ClassLabel("T", n - 1, e, tn, te)]


CASES = [("A", "A"), ("A", "S"), ("S", "A"), ("A", "T"), ("S", "S"), ("S", "T"), ("T", "T")]


@pytest.mark.parametrize("ka,kb", CASES)
def test_tensor_rules_random(ka, kb):
    rng = random.Random(hash((ka, kb)) & 0xFFFF)
    for i in range(6):
        a, b = rand_label(rng, ka), rand_label(rng, kb)
        if ka == kb == "S" and i % 2:
            b = ClassLabel("S", b.n, -a.e, b.tn, 0)
        if ka == kb == "T" and i % 2:
            b = ClassLabel("T", b.n, -a.e if i % 4 == 1 else b.e, b.tn, -a.te)
        r = decompose(tensor(module_for_label(a), module_for_label(b)))
        assert r.factors == groth_product(a, b)
        want = expected_summands(a, b)
        if want is not None:
            assert sorted(r.summands) == sorted(want)
        assert sum(f.dim * c for f, c in r.factors.items()) == a.dim * b.dim


def test_txt_zero_te_factor_multiplicities():
    a = ClassLabel("T", 0, 1, 0, Q(1, 3))
    for e2, kind, mults in ((Q(2), "S", [1, 3, 3, 1]), (Q(-1), "A", [1, 4, 6, 4, 1])):
        b = ClassLabel("T", 0, e2, 0, Q(-1, 3))
        r = decompose(tensor(module_for_label(a), module_for_label(b)))
        assert all(f.kind == kind for f in r.factors)
        assert [r.factors[f] for f in sorted(r.factors, reverse=True)] == mults


def test_verma_factors_atypical(rng):
    for _ in range(3):
        w = FinWeight(rand_q(rng), 0, rand_q(rng), 0)
        f = composition_factors(verma(w))
        n = w.n - 1
        assert f == Counter({ClassLabel("A", n + 1, 0, w.tn): 1, ClassLabel("A", n, 0, w.tn): 2,
                             ClassLabel("A", n - 1, 0, w.tn): 1})


def test_groth_examples():
    s1, s2 = ClassLabel("S", 1, 2, 0, 0), ClassLabel("S", -3, 1, 1, 0)
    assert groth_product(s1, s2) == Counter({ClassLabel("S", -2 + H, 3, 1): 1,
                                             ClassLabel("S", -2 - H, 3, 1): 1})
    t1, t2 = ClassLabel("T", 0, 1, 0, 1), ClassLabel("T", 1, 1, 1, 1)
    assert groth_product(t1, t2) == Counter({ClassLabel("T", 2, 2, 1, 2): 1, ClassLabel("T", 1, 2, 1, 2): 2,
                                             ClassLabel("T", 0, 2, 1, 2): 1})
    unit = ClassLabel("A", 0, 0, 0, 0)
    for x in (s1, t1, ClassLabel("A", 3, 0, 2, 0)):
        assert groth_product(unit, x) == Counter({x: 1})
    assert expand_verma(ClassLabel("V", 0, 0, 0, 0))[ClassLabel("A", 0)] == 2


def test_groth_ring_axioms(rng):
    kinds = ["A", "S", "T"]
    for _ in range(15):
        a, b, c = (rand_label(rng, rng.choice(kinds)) for _ in range(3))
        assert groth_product(a, b) == groth_product(b, a)
        x = Counter({a: 1})
        y = Counter({b: 1})
        z = Counter({c: 1})
        assert groth_mul(groth_mul(x, y), z) == groth_mul(x, groth_mul(y, z))
        assert all(v > 0 for v in groth_product(a, b).values())
