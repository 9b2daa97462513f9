import numpy as np
import pytest

from halfstokes.core import (BesovIndex, BoundaryField, IterationTrace,
                             ScalarField, VectorField, make_grid,
                             parabolic_scale)
from halfstokes.errors import InvalidGridError, ShapeMismatchError


def test_uniform_grid_nodes():
    g = make_grid(2, L=2 * np.pi, N_tan=8, X=4.0, N_vert=5, T=1.0, N_time=4)
    assert np.allclose(g.vert_nodes, [0, 1, 2, 3, 4])
    assert g.tan_nodes[0] == 0.0
    assert g.time_nodes[-1] == 1.0


def test_graded_grid_first_spacing_closed_form():
    # geometric spacing: first gap X (r - 1) / (r^{Nv-1} - 1)
    g = make_grid(3, L=2 * np.pi, N_tan=16, X=2.0, N_vert=5, grading=2.0,
                  T=1.0, N_time=4)
    expected = 2.0 * (2.0 - 1.0) / (2.0 ** 4 - 1.0)
    assert np.isclose(g.vert_nodes[1], expected)
    # direct summation of the geometric series reaches X
    gaps = np.diff(g.vert_nodes)
    assert np.allclose(gaps[1:] / gaps[:-1], 2.0)
    assert np.isclose(g.vert_nodes[-1], 2.0)
    assert np.all(np.diff(g.vert_nodes) > 0)


@pytest.mark.parametrize("kwargs", [
    dict(n=4, L=1, N_tan=8, X=1, N_vert=5, T=1, N_time=4),
    dict(n=2, L=1, N_tan=8, X=1, N_vert=1, T=1, N_time=4),
    dict(n=2, L=-1, N_tan=8, X=1, N_vert=5, T=1, N_time=4),
    dict(n=2, L=1, N_tan=1, X=1, N_vert=5, T=1, N_time=4),
    dict(n=2, L=1, N_tan=8, X=1, N_vert=5, T=0, N_time=4),
])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(InvalidGridError):
        make_grid(**kwargs)


def test_fields_reject_shape_mismatch():
    g = make_grid(2, L=2 * np.pi, N_tan=8, X=1.0, N_vert=5, T=1.0, N_time=4)
    with pytest.raises(ShapeMismatchError):
        VectorField(g, np.zeros((2, 8, 5)), domain="half")  # missing time
    with pytest.raises(ShapeMismatchError):
        VectorField(g, np.zeros((3, 8, 5, 4)), domain="half")  # 3 comps in 2-D
    with pytest.raises(ShapeMismatchError):
        ScalarField(g, np.zeros((8, 5, 4)), domain="whole")  # wrong vert count
    with pytest.raises(ShapeMismatchError):
        BoundaryField(g, np.zeros((8, 4)))  # no component axis


def test_field_data_immutable():
    g = make_grid(2, L=2 * np.pi, N_tan=8, X=1.0, N_vert=5, T=1.0, N_time=4)
    f = ScalarField(g, np.zeros((8, 5, 4)), domain="half")
    with pytest.raises(ValueError):
        f.data[0, 0, 0] = 1.0


def test_besov_index_critical_flag():
    idx = BesovIndex.critical_index(1.0, 2)
    assert idx.critical and np.isclose(idx.q, 2.0)
    assert not BesovIndex(alpha=1.0, q=2.5, n=2).critical
    with pytest.raises(ValueError):
        BesovIndex(alpha=2.5, q=2.0, n=2)
    with pytest.raises(ValueError):
        BesovIndex(alpha=1.0, q=1.0, n=2)


def test_besov_index_force_pair():
    idx = BesovIndex.critical_index(1.0, 2).with_default_force_pair()
    assert 1.0 < idx.p <= idx.q
    assert 0.0 < idx.beta < idx.alpha <= idx.beta + 1.0 < 2.0
    balance = 1 - idx.alpha + idx.beta - (idx.n + 2) * (1 / idx.p - 1 / idx.q)
    assert abs(balance) < 1e-12
    with pytest.raises(ValueError):
        BesovIndex(alpha=1.0, q=2.0, n=2, beta=1.5, p=1.2)


def test_parabolic_scale_identity_and_values():
    g = make_grid(2, L=2 * np.pi, N_tan=16, X=np.pi, N_vert=9, T=1.0,
                  N_time=5)
    x = g.tan_nodes[:, None]
    y = g.vert_nodes[None, :]
    bump = np.exp(-((y - 1.0) ** 2))
    h = VectorField(g, np.stack([np.sin(x) * bump, 0 * x * y]),
                    domain="half", time_dependent=False)
    gb = BoundaryField(g, np.zeros((2, 16, 5)))
    h1, g1 = parabolic_scale(h, gb, 1.0)
    assert np.allclose(h1.data, h.data)
    assert h1.grid.key() == g.key()

    lam = 2.0
    h2, _ = parabolic_scale(h, gb, lam)
    # values at the rescaled nodes are lam * h(lam x)
    x2 = h2.grid.tan_nodes[:, None]
    y2 = h2.grid.vert_nodes[None, :]
    expected = lam * np.sin(lam * x2) * np.exp(-((lam * y2 - 1.0) ** 2))
    assert np.allclose(h2.data[0], expected, atol=1e-13)


def test_parabolic_scale_composition():
    g = make_grid(2, L=2 * np.pi, N_tan=16, X=np.pi, N_vert=9, T=1.0,
                  N_time=5)
    rng = np.random.default_rng(0)
    h = VectorField(g, rng.standard_normal((2, 16, 9)), domain="half",
                    time_dependent=False)
    gb = BoundaryField(g, rng.standard_normal((2, 16, 5)))
    a, b = 1.5, 0.8
    h_ab, g_ab = parabolic_scale(*parabolic_scale(h, gb, a), b)
    h_c, g_c = parabolic_scale(h, gb, a * b)
    assert np.allclose(h_ab.data, h_c.data, atol=1e-10)
    assert np.allclose(g_ab.data, g_c.data, atol=1e-10)
    assert np.allclose(h_ab.grid.L, h_c.grid.L)


def test_parabolic_scale_rejects_nonpositive():
    g = make_grid(2, L=2 * np.pi, N_tan=8, X=1.0, N_vert=5, T=1.0, N_time=4)
    h = VectorField(g, np.zeros((2, 8, 5)), domain="half",
                    time_dependent=False)
    gb = BoundaryField(g, np.zeros((2, 8, 4)))
    with pytest.raises(ValueError):
        parabolic_scale(h, gb, 0.0)


def test_iteration_trace_bookkeeping():
    trace = IterationTrace(data_norm=1.0, beta=0.5, p=1.25)
    trace.add(2.0)
    trace.add(1.9, increment_norm=0.5)
    trace.add(1.85, increment_norm=0.2)
    trace.validate()
    ratios = trace.ratios()
    assert len(ratios) == 1 and np.isclose(ratios[0], 0.4)
    with pytest.raises(ValueError):
        bad = IterationTrace(data_norm=1.0, beta=0.5, p=1.25)
        bad.add(float("nan"))
        bad.validate()
