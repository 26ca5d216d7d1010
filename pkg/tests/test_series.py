import numpy as np
import pytest

from takiff import _kernels as K
from takiff.rational import Q
from takiff.series import FormalSeries, eta_power, product


@pytest.fixture
def nrng():
    return np.random.default_rng(7)


def test_conv_backends_agree(nrng):
    for _ in range(20):
        a = nrng.integers(-9, 9, (nrng.integers(1, 6), nrng.integers(1, 8)))
        b = nrng.integers(-9, 9, (nrng.integers(1, 6), nrng.integers(1, 8)))
        cut = int(nrng.integers(0, 9))
        assert np.array_equal(K._conv_np(a, b, cut), K._conv_nb(a, b, cut))


def test_inplace_backends_agree(nrng):
    for dz in (-2, -1, 0, 1, 3):
        for dq in (0, 1, 4):
            x = nrng.integers(-5, 5, (7, 8))
            y = x.copy()
            K._binomial_np(x, -3, dz, dq)
            K._binomial_nb(y, -3, dz, dq)
            assert np.array_equal(x, y)
    x = nrng.integers(-5, 5, (4, 9))
    y = x.copy()
    K._geometric_np(x, 3)
    K._geometric_nb(y, 3)
    assert np.array_equal(x, y)


def test_flow_and_eval_backends_agree(nrng):
    a = nrng.integers(-5, 5, (5, 6))
    for ell in (-2, 1, 3):
        assert np.array_equal(K._flow_np(a, -2, ell, -6, 20), K._flow_nb(a, -2, ell, -6, 20))
    zp = np.exp(1j * np.arange(5))
    qp = 0.3 ** np.arange(6) + 0j
    assert abs(K._eval_np(a, zp, qp) - K._eval_nb(a, zp, qp)) < 1e-12
    assert np.allclose(K._abs_row_sums_np(a, np.ones(5)), K._abs_row_sums_nb(a, np.ones(5)))


def test_backend_flag(monkeypatch):
    monkeypatch.setenv("TAKIFF_KERNELS", "numpy")
    assert K.backend() == "numpy"
    s = product([(1, 1, 1), (1, -1, 0)], 5, 0, 0, bosons=2)
    monkeypatch.delenv("TAKIFF_KERNELS")
    assert K.backend() == "numba"
    assert s == product([(1, 1, 1), (1, -1, 0)], 5, 0, 0, bosons=2)


def test_eta_inverse_powers():
    e = eta_power(-6, 5)
    assert e.qoff == Q(-1, 4)
    assert e.q_totals() == [1, 6, 27, 98, 315, 918]
    assert eta_power(1, 7).q_totals() == [1, -1, -1, 0, 0, 1, 0, 1]   # Euler pentagonal
    assert eta_power(1, 7).qoff == Q(1, 24)


def test_offsets_normalised():
    s = FormalSeries.from_terms({(0, 0): 1, (1, 2): 3}, Q(7, 2), Q(-1, 3), 4)
    assert s.zoff == Q(1, 2) and s.zmin == 3
    assert s.coefficient(Q(9, 2), Q(5, 3)) == 3
    assert s.coefficient(Q(7, 2), Q(2, 3)) == 0
    with pytest.raises(KeyError):
        s.coefficient(Q(7, 2), Q(14, 3))


def test_add_with_shifted_offsets():
    a = FormalSeries.from_terms({(0, 0): 1}, 0, 0, 3)
    b = FormalSeries.from_terms({(0, 0): 2}, 0, 1, 3)
    s = a + b
    assert s.terms() == {(0, 0): 1, (0, 1): 2}
    assert s.cutoff == 3           # b is only known up to absolute q^4, a up to q^3
    with pytest.raises(ValueError):
        a + FormalSeries.from_terms({(0, 0): 1}, Q(1, 2), 0, 3)


def test_product_commutative_associative(nrng):
    def rnd():
        t = {(int(nrng.integers(-2, 3)), int(nrng.integers(0, 5))): int(nrng.integers(-4, 5))
             for _ in range(6)}
        return FormalSeries.from_terms(t, Q(1, 3), Q(1, 5), 6)
    for _ in range(10):
        a, b, c = rnd(), rnd(), rnd()
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)


def test_flow_inverse():
    s = product([(1, 1, i) for i in range(1, 9)] + [(1, -1, i) for i in range(0, 9)], 8, Q(1, 2), 0)
    assert s.flow(0) is s
    back = s.flow(1).flow(-1)
    ok, compared, _ = back.agree(s)
    assert ok and compared > 20


def test_flow_tilts_known_region():
    s = FormalSeries.from_terms({(z, 0): 1 for z in range(-3, 4)}, 0, 0, 2)
    f = s.flow(1)
    # z^-3 moves to q^-3 and the row is known up to q^-3 + 2
    assert f.coefficient(-3, -3) == 1
    with pytest.raises(KeyError):
        f.coefficient(-3, 0)
    assert f.coefficient(3, 3) == 1
    assert f.coefficient(3, 5) == 0


def test_agree_reports_mismatch():
    a = FormalSeries.from_terms({(0, 0): 1, (1, 1): 2}, 0, 0, 3)
    b = FormalSeries.from_terms({(0, 0): 1, (1, 1): 5}, 0, 0, 3)
    ok, _, where = a.agree(b)
    assert not ok and where == (1, 1, 2, 5)


def test_parity_twist():
    s = FormalSeries.from_terms({(0, 0): 1, (-1, 0): 2, (-2, 0): 1}, Q(1, 2), 0, 0)
    t = s.parity_twist(Q(1, 2))
    assert t.terms() == {(0, 0): 1, (-1, 0): -2, (-2, 0): 1}
    with pytest.raises(ValueError):
        s.parity_twist(0)


def test_overflow_guard():
    big = FormalSeries.from_terms({(0, 0): 2 ** 40}, 0, 0, 1)
    with pytest.raises(OverflowError):
        big * big


def test_json_roundtrip_shape():
    s = FormalSeries.from_terms({(0, 0): 1, (-1, 2): -4}, Q(1, 2), Q(1, 8), 2)
    d = s.to_json()
    assert d["z_offset"] == "1/2" and d["q_offset"] == "1/8"
    assert d["terms"] == [[-1, 2, -4], [0, 0, 1]]
