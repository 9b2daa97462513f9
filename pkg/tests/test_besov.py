import numpy as np
import pytest

from halfstokes.core import (BesovIndex, BoundaryField, VectorField,
                             make_grid, parabolic_scale)
from halfstokes.errors import NormOrderError, ShapeMismatchError
from halfstokes import besov, datagen
from halfstokes import transforms as tr


def grid2(N=32, Nv=17, Nt=9, X=np.pi, T=1.0):
    return make_grid(2, L=2 * np.pi, N_tan=N, X=X, N_vert=Nv, T=T, N_time=Nt)


def test_partition_of_unity_exact():
    g = grid2()
    part = besov.partition_for(g, "boundary")
    ks = np.abs(tr.tan_wavenumbers(g)[0])
    ks = ks[ks > 0]
    total = sum(part.window(j, ks) for j in part.blocks)
    assert np.max(np.abs(total - 1.0)) < 1e-12


def test_lp_norm_single_mode_closed_form():
    g = grid2()
    bf = BoundaryField(g, np.cos(4 * g.tan_nodes)[None, :],
                       time_dependent=False)
    part = besov.partition_for(g, "boundary")
    s, q = 0.6, 2.5
    val = besov.lp_norm(bf, s, q)
    lq = besov.field_lq(bf, q, include_time=False)
    expected = sum((2.0 ** (j * s) * part.window(j, np.array([4.0]))[0]) ** q
                   for j in part.blocks) ** (1.0 / q) * lq
    assert np.isclose(val, expected, rtol=1e-12)


def test_lp_norm_homogeneity_and_zero():
    g = grid2()
    rng = np.random.default_rng(0)
    f = datagen.random_boundary_steady(g, rng)
    v = besov.lp_norm(f, 0.5, 2.0)
    assert np.isclose(besov.lp_norm(3.5 * f, 0.5, 2.0), 3.5 * v)
    zero = BoundaryField(g, np.zeros((1, g.N_tan)), time_dependent=False)
    assert besov.lp_norm(zero, 0.5, 2.0) == 0.0


def test_lp_norm_triangle_inequality_sampled():
    g = grid2()
    rng = np.random.default_rng(1)
    for _ in range(5):
        f = datagen.random_boundary_steady(g, rng)
        h = datagen.random_boundary_steady(g, rng)
        fh = BoundaryField(g, f.data + h.data, time_dependent=False)
        assert besov.lp_norm(fh, 0.7, 2.0) <= \
            besov.lp_norm(f, 0.7, 2.0) + besov.lp_norm(h, 0.7, 2.0) + 1e-12


def test_lp_norm_rejects_bad_orders():
    g = grid2()
    f = BoundaryField(g, np.ones((1, g.N_tan)), time_dependent=False)
    with pytest.raises(NormOrderError):
        besov.lp_norm(f, 7.0, 2.0)
    with pytest.raises(NormOrderError):
        besov.lp_norm(f, 0.5, 1.0)
    with pytest.raises(ShapeMismatchError):
        besov.lp_norm(BoundaryField(g, np.ones((1, g.N_tan, g.N_time))),
                      0.5, 2.0)


def test_negative_order_window():
    g = grid2()
    f = BoundaryField(g, np.cos(2 * g.tan_nodes)[None, :],
                      time_dependent=False)
    v = besov.negative_order_norm(f, -0.3, 2.0)
    assert v > 0
    with pytest.raises(NormOrderError):
        besov.negative_order_norm(f, -0.6, 2.0)
    with pytest.raises(NormOrderError):
        besov.negative_order_norm(f, 0.1, 2.0)


def test_negative_order_single_mode_weight():
    g = grid2()
    f = BoundaryField(g, np.cos(2 * g.tan_nodes)[None, :],
                      time_dependent=False)
    part = besov.partition_for(g, "boundary")
    s, q = -0.4, 3.0
    val = besov.negative_order_norm(f, s, q)
    lq = besov.field_lq(f, q, include_time=False)
    expected = sum((2.0 ** (j * s) * part.window(j, np.array([2.0]))[0]) ** q
                   for j in part.blocks) ** (1.0 / q) * lq
    assert np.isclose(val, expected, rtol=1e-12)


def test_duality_pairing_controlled_by_norms():
    # sampled Hoelder-type check: the pairing is bounded by the product of
    # the norm and the dual-order norm up to the adjacent-block overlap
    g = grid2()
    rng = np.random.default_rng(2)
    s, q = -0.35, 2.0
    qp = q / (q - 1.0)
    for _ in range(20):
        f = datagen.random_boundary_steady(g, rng)
        phi = datagen.random_boundary_steady(g, rng)
        pairing = abs(np.sum(f.data * phi.data) * g.L / g.N_tan)
        bound = besov.lp_norm(f, s, q) * besov.lp_norm(phi, -s, qp)
        assert pairing <= 3.0 * bound


def test_gagliardo_linear_ramp_oracle():
    # f(t) = t on [0, 1], order 1/4, q = 2: exact value sqrt(8/15)
    g = make_grid(2, L=2 * np.pi, N_tan=2, X=1.0, N_vert=2, T=1.0, N_time=33)
    f = BoundaryField(g, np.broadcast_to(g.time_nodes, (1, 2, 33)).copy())
    val = besov.gagliardo_time_norm(f, 0.25, 2.0, spatial_norm="abs")
    assert abs(val - np.sqrt(8.0 / 15.0)) < 0.01 * np.sqrt(8.0 / 15.0)


def test_gagliardo_time_constant_vanishes():
    g = grid2()
    f = BoundaryField(g, np.ones((1, g.N_tan, g.N_time)))
    assert besov.gagliardo_time_norm(f, 0.4, 2.0) == 0.0


def test_gagliardo_scaling_law():
    # replacing f(t) by f(lam t) on the rescaled window multiplies the
    # seminorm by lam^(s2 - 1/q)
    s2, q, lam = 0.35, 2.5, 2.0
    g1 = make_grid(2, L=2 * np.pi, N_tan=2, X=1.0, N_vert=2, T=1.0, N_time=33)
    g2 = make_grid(2, L=2 * np.pi, N_tan=2, X=1.0, N_vert=2, T=1.0 / lam,
                   N_time=33)
    f1 = BoundaryField(g1, np.broadcast_to(np.sin(3 * g1.time_nodes) ** 2,
                                           (1, 2, 33)).copy())
    f2 = BoundaryField(g2, np.broadcast_to(np.sin(3 * lam * g2.time_nodes) ** 2,
                                           (1, 2, 33)).copy())
    v1 = besov.gagliardo_time_norm(f1, s2, q, spatial_norm="abs")
    v2 = besov.gagliardo_time_norm(f2, s2, q, spatial_norm="abs")
    assert np.isclose(v2 / v1, lam ** (s2 - 1.0 / q), rtol=1e-10)


def test_gagliardo_rejects_bad_order():
    g = grid2()
    f = BoundaryField(g, np.ones((1, g.N_tan, g.N_time)))
    with pytest.raises(NormOrderError):
        besov.gagliardo_time_norm(f, 1.2, 2.0)


def test_aniso_separable_factorization():
    # f = a(x) b(t): both mixed norms factor into 1-D pieces
    g = grid2(N=32, Nv=5, Nt=17)
    a_x = np.cos(2 * g.tan_nodes)
    b_t = 1.0 + 0.5 * np.sin(2.0 * g.time_nodes)
    f = BoundaryField(g, (a_x[:, None] * b_t[None, :])[None])
    alpha, q = 0.8, 2.0
    spatial = besov.lq_time_lp_space(f, alpha, q)
    a_field = BoundaryField(g, a_x[None], time_dependent=False)
    norm_a = besov.lp_norm(a_field, alpha, q)
    from halfstokes.numerics import trapezoid_weights
    tw = trapezoid_weights(g.time_nodes)
    norm_b_lq = np.sum(tw * np.abs(b_t) ** q) ** (1.0 / q)
    assert np.isclose(spatial, norm_a * norm_b_lq, rtol=1e-10)

    temporal = besov.gagliardo_time_norm(f, alpha / 2.0, q)
    scalar = BoundaryField(make_grid(2, L=g.L, N_tan=2, X=1.0, N_vert=2,
                                     T=g.T, N_time=g.N_time),
                           np.broadcast_to(b_t, (1, 2, g.N_time)).copy())
    gag_b = besov.gagliardo_time_norm(scalar, alpha / 2.0, q,
                                      spatial_norm="abs")
    norm_a_lq = besov.field_lq(a_field, q, include_time=False)
    assert np.isclose(temporal, gag_b * norm_a_lq, rtol=1e-10)


def test_aniso_norm_refinement_stability():
    mms = datagen.ForcedManufactured()
    vals = []
    for N in (16, 32):
        g = make_grid(2, L=2 * np.pi, N_tan=N, X=2 * np.pi, N_vert=N + 1,
                      T=1.0, N_time=N)
        u = mms.velocity(g)
        vals.append(besov.aniso_norm(u, 1.0, 2.0))
    assert abs(vals[1] - vals[0]) / vals[0] < 0.02


def test_data_norm_m0_reduces_to_h_term():
    g = grid2(Nv=17)
    idx = BesovIndex.critical_index(1.0, 2)
    h = datagen.stream_mode_initial_data(g, k1=1, m=2)
    zero_g = BoundaryField(g, np.zeros((2, g.N_tan, g.N_time)))
    m0 = besov.data_norm_M0(h, zero_g, idx)
    term_h = besov.lp_norm(h, idx.alpha - 2.0 / idx.q, idx.q,
                           extension="solenoidal")
    assert np.isclose(m0, term_h, rtol=1e-12)
    zero_h = VectorField(g, np.zeros((2, g.N_tan, g.N_vert)), domain="half",
                         time_dependent=False)
    assert besov.data_norm_M0(zero_h, zero_g, idx) == 0.0


def test_m0_scaling_invariance_at_critical_index():
    g = grid2(Nv=17, Nt=17)
    idx = BesovIndex.critical_index(1.0, 2)
    h = datagen.stream_mode_initial_data(g, k1=1, m=2)
    gb = datagen.compatible_boundary_data(g, h)
    base = besov.data_norm_M0(h, gb, idx)
    for lam in (0.5, 2.0):
        hs, gs = parabolic_scale(h, gb, lam)
        val = besov.data_norm_M0(hs, gs, idx)
        assert abs(val - base) / base < 0.03


def test_embedding_into_lebesgue():
    # order-(alpha, alpha/2) control of the L^{n+2} norm on a smooth family
    g = grid2(Nv=17, Nt=17)
    rng = np.random.default_rng(3)
    ratios = []
    for _ in range(6):
        f = datagen.random_halfspace_field(g, rng, ncomp=1)
        lq = besov.field_lq(f, float(g.n + 2))
        an = besov.aniso_norm(f, 1.0, 2.0)
        ratios.append(lq / an)
    assert max(ratios) < 10.0 * min(1.0, min(ratios) + 1.0)
    assert np.std(ratios) / np.mean(ratios) < 1.0


def test_gagliardo_vs_lp_time_equivalence_family():
    # fractional time norm against a space-time LP realization on smooth
    # fields: ratio confined to a stable bracket
    g = grid2(N=16, Nv=9, Nt=33)
    rng = np.random.default_rng(4)
    ratios = []
    for _ in range(10):
        f = datagen.random_boundary_field(g, rng, ncomp=1,
                                          time_profile="taper_both")
        gag = besov.gagliardo_time_norm(f, 0.5, 2.0)
        lp_st = besov.aniso_lp_norm(f, 1.0, 2.0)
        ratios.append(gag / lp_st)
    assert max(ratios) / min(ratios) < 8.0


def test_gagliardo_lp_bracket_stable_under_refinement():
    # the fractional-time realizations stay within a fixed bracket whose
    # width does not blow up under refinement
    brackets = []
    for Nt in (17, 33):
        g = make_grid(2, L=2 * np.pi, N_tan=16, X=np.pi, N_vert=9, T=1.0,
                      N_time=Nt)
        rng = np.random.default_rng(11)
        ratios = []
        for _ in range(10):
            f = datagen.random_boundary_field(g, rng, ncomp=1,
                                              time_profile="taper_both")
            gag = besov.gagliardo_time_norm(f, 0.5, 2.0)
            lp_st = besov.aniso_lp_norm(f, 1.0, 2.0)
            ratios.append(gag / lp_st)
        brackets.append(max(ratios) / min(ratios))
    assert brackets[0] < 8.0 and brackets[1] < 8.0
    assert abs(brackets[1] - brackets[0]) / brackets[0] < 0.5
