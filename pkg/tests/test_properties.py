import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cocyclelab.cocycle import (
    Cocycle,
    Frequency,
    approximants,
    cocycle_from_dict,
    cocycle_to_dict,
    evaluate,
    iterate,
    random_trig,
    scaled_iterate,
    shift_imag,
)
from cocyclelab.domination import winding_number
from cocyclelab.linalg import (
    Subspace,
    exterior_power,
    gap_metric,
    oblique_projector,
    principal_angles,
    singular_values,
    spectral_radius,
    trace_power_lower_bound,
)
from cocyclelab.lyapunov import profile

SETTINGS = settings(max_examples=60, deadline=None)
seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 5)


def cmat(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def subspace(rng, d, r):
    return Subspace.span(rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r)))


@SETTINGS
@given(seeds, dims, st.data())
def test_exterior_top_singular_is_product(seed, d, data):
    k = data.draw(st.integers(1, d))
    B = cmat(np.random.default_rng(seed), d)
    s = singular_values(B)
    top = singular_values(exterior_power(B, k))[0]
    assert top == pytest.approx(np.prod(s[:k]), rel=1e-9)


@SETTINGS
@given(seeds, dims, st.data())
def test_exterior_power_multiplicative(seed, d, data):
    k = data.draw(st.integers(1, d))
    rng = np.random.default_rng(seed)
    A, B = cmat(rng, d), cmat(rng, d)
    lhs = exterior_power(A @ B, k)
    rhs = exterior_power(A, k) @ exterior_power(B, k)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(lhs).max())


@SETTINGS
@given(seeds, dims)
def test_spectral_radius_bounds(seed, d):
    B = cmat(np.random.default_rng(seed), d)
    rho = spectral_radius(B)
    # |tr B^k| <= d rho^k for every k
    P = np.eye(d)
    for k in range(1, d + 1):
        P = P @ B
        assert abs(np.trace(P)) <= d * rho**k * (1 + 1e-9)
    k, val = trace_power_lower_bound(B)
    assert val == pytest.approx(abs(np.trace(np.linalg.matrix_power(B, k))) ** (1 / k))
    assert rho <= singular_values(B)[0] * (1 + 1e-12)
    assert spectral_radius(B @ B @ B) == pytest.approx(rho**3, rel=1e-8)


@SETTINGS
@given(seeds, st.integers(0, 6), st.integers(0, 6), st.floats(0, 1), st.floats(-0.05, 0.05))
def test_cocycle_law(seed, m, n, x, t):
    c = random_trig(2, 2, seed=seed % 1000)
    z = np.array([x + 1j * t])
    lhs = iterate(c, m + n, z)
    rhs = iterate(c, m, z + n * c.alpha) @ iterate(c, n, z)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * max(1, np.abs(lhs).max()))


@SETTINGS
@given(seeds, st.integers(0, 8), st.floats(0, 1))
def test_scaled_iterate_matches_iterate(seed, n, x):
    c = random_trig(3, 1, seed=seed % 1000)
    P, ls = scaled_iterate(c, n, np.array([x]))
    assert np.allclose(np.exp(ls)[:, None, None] * P, iterate(c, n, np.array([x])), rtol=1e-10)


@SETTINGS
@given(seeds, st.floats(-0.3, 0.3), st.floats(0, 1))
def test_shift_round_trip(seed, t, x):
    A = random_trig(2, 3, seed=seed % 1000).map
    back = shift_imag(shift_imag(A, t), -t)
    assert np.allclose(back.coeffs, A.coeffs, rtol=1e-12, atol=1e-12)
    assert np.allclose(evaluate(shift_imag(A, t), x), evaluate(A, x + 1j * t), rtol=1e-10)


@SETTINGS
@given(seeds)
def test_json_round_trip(seed):
    c = random_trig(3, 2, seed=seed % 1000)
    back = cocycle_from_dict(cocycle_to_dict(c))
    assert np.array_equal(back.map.coeffs, c.map.coeffs) and back.alpha == c.alpha


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 999), st.integers(1, 2))
def test_profile_convex_in_t(seed, k):
    c = random_trig(2, 1, seed=seed)
    prof = profile(c, np.linspace(-0.2, 0.2, 9), 6, 2048)
    # zeros of det near the line spoil the quadrature; err reports it
    assume(np.nanmax(prof.err[k - 1]) < 1e-8)
    assert prof.convexity_violation(k) >= -1e-6


@SETTINGS
@given(seeds, dims, st.data())
def test_oblique_projector_norm_identity(seed, d, data):
    r = data.draw(st.integers(1, d - 1))
    rng = np.random.default_rng(seed)
    u, s = subspace(rng, d, r), subspace(rng, d, d - r)
    proj = oblique_projector(u, s)
    assume(proj.angle > 1e-4)
    assert proj.norm * np.sin(proj.angle) == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(proj.matrix @ proj.matrix, proj.matrix, atol=1e-8 * proj.norm**2)


@SETTINGS
@given(seeds, dims, st.data())
def test_gap_metric_is_sine_of_largest_angle(seed, d, data):
    r = data.draw(st.integers(1, d - 1))
    rng = np.random.default_rng(seed)
    U, V = subspace(rng, d, r), subspace(rng, d, r)
    g = gap_metric(U, V)
    assert g == pytest.approx(np.sin(principal_angles(U, V)[-1]), abs=1e-10)
    assert g == pytest.approx(gap_metric(V, U), abs=1e-12) and g <= 1 + 1e-12


@pytest.mark.filterwarnings("ignore:frequency")
@SETTINGS
@given(st.floats(0.01, 0.99).filter(lambda a: abs(a - 0.5) > 1e-3))
def test_best_approximation(alpha):
    approx = approximants(Frequency.irrational(alpha), 6)
    dist = lambda k: abs(k * alpha - round(k * alpha))
    for a, nxt in zip(approx, approx[1:]):
        assert abs(a.q * alpha - a.p) == pytest.approx(dist(a.q), abs=1e-12)
        for k in range(1, nxt.q):
            assert dist(k) >= dist(a.q) - 1e-12


@SETTINGS
@given(st.integers(-4, 4), st.integers(-4, 4))
def test_winding_additive(a, b):
    x = np.arange(128) / 128
    f = np.exp(2j * np.pi * a * x) * (2 + np.cos(2 * np.pi * x))
    g = np.exp(2j * np.pi * b * x)
    wf, wg = winding_number(f).winding, winding_number(g).winding
    assert winding_number(f * g).winding == wf + wg == a + b
