import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from cocyclelab.cocycle import Frequency, almost_mathieu, scalar_winding
from cocyclelab.exceptions import NormalizationError
from cocyclelab.stochastic import (
    ObstacleSpec,
    bad_set_measure,
    bad_set_series,
    hitting_probability,
    obstacle_scaling_study,
)

from .conftest import constant


def harmonic_measure(box, N=80):
    """Finite-difference Dirichlet solve on (-2, 2)^2: 1 on ``box``, 0 on the boundary."""
    x0, x1, y0, y1 = box
    g = np.linspace(-2, 2, N + 1)
    X, Y = np.meshgrid(g, g, indexing="ij")
    tol = 1e-12
    obst = (X >= x0 - tol) & (X <= x1 + tol) & (Y >= y0 - tol) & (Y <= y1 + tol)
    interior = np.zeros_like(obst)
    interior[1:-1, 1:-1] = True
    free = interior & ~obst
    n = N + 1
    lap1 = sp.diags([-1, 2, -1], [-1, 0, 1], shape=(n, n))
    eye = sp.identity(n)
    L = (sp.kron(lap1, eye) + sp.kron(eye, lap1)).tocsr()
    f = free.ravel()
    rhs = -L[f][:, obst.ravel()] @ np.ones(obst.sum())
    u = spl.spsolve(L[f][:, f].tocsc(), rhs)
    full = obst.ravel().astype(float)
    full[f] = u
    return full.reshape(n, n)[N // 2, N // 2]


def test_harmonic_oracle_sanity():
    assert harmonic_measure((-2, 2, -2, 2)) == pytest.approx(1.0)
    # a centered symmetric box: the value is 1 at the origin
    assert harmonic_measure((-1, 1, -1, 1)) == pytest.approx(1.0)


def test_obstacle_validation():
    with pytest.raises(ValueError):
        ObstacleSpec(((-1.5, 0, 0, 1),))
    with pytest.raises(ValueError):
        ObstacleSpec.slab(2.5)


def test_slice_measure():
    assert ObstacleSpec.empty().rho == 0
    assert ObstacleSpec.full().rho == 2
    assert ObstacleSpec.slab(0.3).rho == pytest.approx(0.3)
    two = ObstacleSpec(((-1, 0, 0, 0.5), (0.5, 1, 0.25, 0.75), (0, 0.1, -1, -0.9)))
    assert two.rho == pytest.approx(0.75 + 0.1)


def test_segment_hit_test():
    spec = ObstacleSpec.segment(0.5, -1, 1)
    a = np.array([[0.0, 0.0], [0.0, 0.0], [0.4, 1.2], [0.5, 0.0]])
    b = np.array([[1.0, 0.0], [0.4, 0.9], [0.6, 1.2], [0.5, 0.0]])
    assert spec.hits_segment(a, b).tolist() == [True, False, False, True]
    assert spec.contains(np.array([[0.5, 1.0], [0.5, 1.01]])).tolist() == [True, False]


def test_empty_obstacle_never_hit():
    e = hitting_probability(ObstacleSpec.empty(), 500, 1e-2, 1)
    assert e.estimate == 0 and e.hits == 0


def test_full_block_hit_at_start():
    e = hitting_probability(ObstacleSpec.full(), 500, 1e-2, 1)
    assert e.estimate == 1


def test_segment_through_origin():
    assert hitting_probability(ObstacleSpec.segment(), 200, 1e-2, 1).estimate == 1


def test_segment_off_origin_positive():
    e = hitting_probability(ObstacleSpec.segment(0.5), 2000, 1e-2, 3)
    assert e.ci_low > 0
    # crossing a vertical line at 0.5 is more likely than not
    assert e.estimate > 0.5


def test_nested_obstacles_monotone():
    ests = [hitting_probability(ObstacleSpec.slab(r), 2000, 1e-2, 5).hits
            for r in (0.05, 0.2, 0.6, 1.2)]
    assert ests == sorted(ests)


def test_thread_count_invariance():
    spec = ObstacleSpec.slab(0.3)
    a = hitting_probability(spec, 1700, 1e-2, 11, workers=1)
    b = hitting_probability(spec, 1700, 1e-2, 11, workers=3)
    assert a.hits == b.hits


def test_seed_determinism():
    spec = ObstacleSpec.slab(0.3)
    assert (hitting_probability(spec, 600, 1e-2, 2).hits
            == hitting_probability(spec, 600, 1e-2, 2).hits)


def test_ci_width_scaling():
    spec = ObstacleSpec.slab(0.5)
    w = [hitting_probability(spec, W, 1e-2, 9).half_width for W in (2000, 4000, 8000)]
    assert w[1] / w[0] == pytest.approx(1 / math.sqrt(2), rel=0.2)
    assert w[2] / w[0] == pytest.approx(0.5, rel=0.2)


def test_step_size_robustness():
    spec = ObstacleSpec.slab(0.5)
    a = hitting_probability(spec, 10_000, 1e-2, 13)
    b = hitting_probability(spec, 10_000, 5e-3, 13)
    assert abs(a.estimate - b.estimate) < max(a.half_width, b.half_width)


@pytest.mark.slow
def test_matches_finite_difference_oracle():
    box = (-1.0, 1.0, 0.8, 1.0)
    exact = harmonic_measure(box)
    e = hitting_probability(ObstacleSpec((box,)), 10_000, 1e-3, 17)
    assert abs(e.estimate - exact) < 2 * e.half_width


def test_scaling_study_floor():
    st = obstacle_scaling_study([0.0, 0.3, 0.9], 1500, 1e-2, 4)
    assert st.monotone and st.positive
    assert len(list(st.rows())) == 3
    assert st.c_hat == pytest.approx(min(e.estimate / r for r, e in zip(st.rho, st.estimates) if r))


SMALL = dict(t_grid=15, x_grid=64)


def test_bad_set_constant_is_empty():
    c = constant(np.diag([2.0, 0.5]))
    assert all(r.measure == 0 for r in bad_set_series(c, 8, [2, 3, 4], **SMALL))


def test_bad_set_scalar_is_empty():
    reps = bad_set_series(scalar_winding(1), 8, [2, 3, 4], **SMALL)
    assert all(r.measure == 0 for r in reps)
    assert all(np.all(r.profile >= r.psi_floor - 1e-12) for r in reps)


def test_bad_set_antitone_in_delta():
    c = almost_mathieu(0, 3)
    m = [bad_set_measure(c, 13, 5, delta=d, **SMALL).measure for d in (0.05, 0.2, 0.5)]
    assert m == sorted(m, reverse=True)


def test_bad_set_amo_non_increasing():
    reps = bad_set_series(almost_mathieu(0, 3), 13, [3, 4, 5, 6], **SMALL)
    m = [r.measure for r in reps]
    assert m == sorted(m, reverse=True)
    assert [r.q for r in reps] == [3, 5, 8, 13]
    assert all(0 <= r.measure <= 2 * r.eps for r in reps)
    assert reps[0].kappa >= 0.01


def test_bad_set_errors():
    with pytest.raises(ValueError):
        bad_set_measure(almost_mathieu(0, 3, freq=Frequency.rational(1, 3)), 4, 1, **SMALL)
    with pytest.raises(NormalizationError):
        bad_set_measure(constant(np.zeros((2, 2))), 2, 2, reference=0.0, **SMALL)
