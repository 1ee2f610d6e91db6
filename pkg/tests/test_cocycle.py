import json
import warnings

import numpy as np
import pytest

from cocyclelab.cocycle import (
    GOLDEN,
    Cocycle,
    Frequency,
    TrigMatrixPoly,
    almost_mathieu,
    approximants,
    cocycle_from_dict,
    cocycle_to_dict,
    diag,
    dump_cocycle,
    evaluate,
    exterior_cocycle,
    family,
    iterate,
    load_cocycle,
    random_trig,
    scalar_winding,
    scaled_iterate,
    shift_imag,
)
from cocyclelab.exceptions import DimensionError, RangeError
from cocyclelab.linalg import exterior_power

from .conftest import constant


def test_evaluate_constant():
    C = np.array([[1, 2], [3, 4]], dtype=complex)
    P = TrigMatrixPoly.constant(C)
    assert np.allclose(evaluate(P, 0.3 + 0.7j), C)


def test_evaluate_scalar_imaginary_phase():
    P = TrigMatrixPoly.from_modes({1: [[1.0]]})
    assert evaluate(P, 0.25j)[0, 0] == pytest.approx(np.exp(-2 * np.pi * 0.25))


def test_evaluate_cosine():
    P = TrigMatrixPoly.from_modes({1: np.eye(2), -1: np.eye(2)})
    assert np.allclose(evaluate(P, 0.0), 2 * np.eye(2))


def test_evaluate_periodic_in_real_part():
    c = random_trig(3, 2, seed=3)
    z = 0.123 + 0.05j
    assert np.allclose(evaluate(c.map, z), evaluate(c.map, z + 5))


def test_poly_validation():
    with pytest.raises(DimensionError):
        TrigMatrixPoly(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        TrigMatrixPoly(np.full((1, 2, 2), np.inf))


def test_from_function_recovers_poly():
    c = random_trig(2, 3, seed=1)
    P = TrigMatrixPoly.from_function(lambda x: evaluate(c.map, x), 2, 3)
    assert np.allclose(P.coeffs, c.map.coeffs)


def test_iterate_zero_is_identity(amo3):
    assert np.allclose(iterate(amo3, 0, 0.4), np.eye(2))


def test_iterate_constant_power(golden):
    C = np.array([[1.0, 2.0], [0.5, -1.0]])
    assert np.allclose(iterate(constant(C), 5, 0.3), np.linalg.matrix_power(C, 5))


def test_iterate_scalar_phases():
    c = scalar_winding(1, freq=Frequency.irrational(0.3))
    x = 0.17
    assert iterate(c, 2, x)[0, 0] == pytest.approx(np.exp(2j * np.pi * (2 * x + 0.3)))


def test_iterate_order_rightmost_first():
    # A(x) upper triangular for x=0 and lower triangular for x=1/2 under alpha=1/2
    U = np.array([[1, 1], [0, 1]], dtype=complex)
    L = np.array([[1, 0], [1, 1]], dtype=complex)
    P = TrigMatrixPoly.from_modes({0: (U + L) / 2, 1: (U - L) / 4, -1: (U - L) / 4})
    c = Cocycle(Frequency.rational(1, 2), P)
    assert np.allclose(evaluate(P, 0.0), U) and np.allclose(evaluate(P, 0.5), L)
    assert np.allclose(iterate(c, 2, 0.0), L @ U)
    assert not np.allclose(L @ U, U @ L)


def test_cocycle_law():
    c = random_trig(3, 2, seed=11, freq=Frequency.irrational(0.3819))
    z = 0.21 + 0.02j
    m, n = 4, 5
    lhs = iterate(c, m + n, z)
    rhs = iterate(c, m, z + n * c.alpha) @ iterate(c, n, z)
    assert np.allclose(lhs, rhs, rtol=1e-9)


def test_scaled_iterate_matches_plain(amo3):
    P, ls = scaled_iterate(amo3, 30, np.array([0.1, 0.7]))
    direct = iterate(amo3, 30, np.array([0.1, 0.7]))
    assert np.allclose(np.exp(ls)[:, None, None] * P, direct, rtol=1e-9)


def test_scaled_iterate_zero_product():
    c = constant([[0, 1], [0, 0]])
    P, ls = scaled_iterate(c, 3, 0.0)
    assert ls == -np.inf and np.allclose(P, 0)


def test_shift_imag_examples():
    P = TrigMatrixPoly.from_modes({1: [[1.0]]})
    assert shift_imag(P, 0) is P
    assert shift_imag(P, 0.1).coefficient(1)[0, 0] == pytest.approx(np.exp(-0.2 * np.pi))
    C = TrigMatrixPoly.constant(np.eye(2))
    assert np.allclose(shift_imag(C, 3.0).coeffs, C.coeffs)


def test_shift_imag_exact_evaluation(amo3):
    S = shift_imag(amo3.map, 0.13)
    assert np.allclose(evaluate(S, 0.31), evaluate(amo3.map, 0.31 + 0.13j))


def test_shift_imag_round_trip():
    c = random_trig(3, 3, seed=5)
    back = shift_imag(shift_imag(c.map, 0.2), -0.2)
    assert np.allclose(back.coeffs, c.map.coeffs, atol=1e-12)


def test_shift_imag_range_error():
    with pytest.raises(RangeError):
        shift_imag(TrigMatrixPoly.from_modes({1: [[1.0]]}), 200.0)


def test_exterior_cocycle_examples(amo3):
    assert exterior_cocycle(amo3, 1) is amo3
    det = exterior_cocycle(amo3, 2)
    assert det.dim == 1
    assert np.allclose(evaluate(det.map, np.linspace(0, 1, 7)), 1.0)
    d = diag([2.0, 3.0], windings=[1, -2])
    prod = exterior_cocycle(d, 2)
    x = 0.37
    assert evaluate(prod.map, x)[0, 0] == pytest.approx(6 * np.exp(2j * np.pi * (1 - 2) * x))


def test_exterior_cocycle_iterates_commute():
    c = random_trig(4, 1, seed=9)
    for k in (2, 3):
        ck = exterior_cocycle(c, k)
        z = 0.3 + 0.01j
        assert np.allclose(iterate(ck, 6, z), exterior_power(iterate(c, 6, z), k), rtol=1e-9)
    with pytest.raises(ValueError):
        exterior_cocycle(c, 5)


def test_frequency():
    f = Frequency.rational(9, 7)
    assert (f.p, f.q) == (2, 7) and f.is_rational
    assert Frequency.parse("3/8").q == 8
    assert not Frequency.parse("0.25").is_rational
    with pytest.raises(ValueError):
        Frequency(0.5, 2, 4)


def test_approximants_golden(golden):
    assert [a.q for a in approximants(golden, 8)] == [1, 2, 3, 5, 8, 13, 21, 34]


def test_approximants_pi():
    # independent oracle: continued fraction [0; 7, 15, 1, 292, ...] of pi - 3
    a = approximants(np.pi - 3, 4)
    assert [(x.p, x.q) for x in a] == [(1, 7), (15, 106), (16, 113), (4687, 33102)]


def test_approximants_rational_float_warns():
    with pytest.warns(RuntimeWarning):
        a = approximants(0.5 + 2.0 ** -52, 60)
    assert len(a) < 60


def test_approximants_exact_rational_no_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = approximants(Frequency.rational(3, 8), 10)
    assert a[-1].q == 8


def test_approximants_best_approximation(golden):
    a = approximants(np.sqrt(2) - 1, 12)
    for cur, nxt in zip(a, a[1:]):
        assert abs(cur.q * (np.sqrt(2) - 1) - cur.p) < 1 / nxt.q
        assert nxt.q_prev == cur.q


def test_families():
    c = almost_mathieu(0.5, 2.0)
    x = 0.2
    assert np.allclose(evaluate(c.map, x), [[0.5 - 2 * np.cos(2 * np.pi * x), -1], [1, 0]])
    assert c.alpha == pytest.approx(GOLDEN)
    assert evaluate(scalar_winding(-2, 3.0).map, 0.1)[0, 0] == pytest.approx(3 * np.exp(-0.4j * np.pi))
    assert family("diag", values=[2, 1]).dim == 2
    with pytest.raises(ValueError):
        family("nope")


def test_json_round_trip(tmp_path):
    c = random_trig(2, 2, seed=4, freq="3/7")
    d = cocycle_to_dict(c)
    json.dumps(d)
    back = cocycle_from_dict(d)
    assert back.freq == c.freq
    assert np.allclose(back.map.coeffs, c.map.coeffs)
    path = tmp_path / "c.json"
    dump_cocycle(c, path)
    assert np.allclose(load_cocycle(path).map.coeffs, c.map.coeffs)


def test_json_bad_spec():
    with pytest.raises(ValueError):
        cocycle_from_dict({"dim": 2, "freq": {"kind": "irrational", "value": 0.3}})
    with pytest.raises(ValueError):
        cocycle_from_dict({"dim": 2, "freq": {"kind": "weird"}, "coeffs": []})
    with pytest.raises(DimensionError):
        cocycle_from_dict({"dim": 2, "freq": {"kind": "rational", "p": 1, "q": 3},
                           "coeffs": [{"j": 0, "re": [[1.0]]}]})
