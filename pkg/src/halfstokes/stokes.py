"""Linear Stokes solver on the half space.

Assembles u = w + grad(phi) + v + V from the data (h, g, F):

* v    -- heat evolution of a solenoidal reflection extension of h,
* V    -- Duhamel integral of the Leray-projected divergence of F,
* phi  -- harmonic correction enforcing the normal boundary condition,
          built directly from Poisson-operator identities (never by
          differencing a computed potential),
* w    -- boundary layer absorbing the remaining tangential boundary data
          via the single-layer heat potential, boundary Riesz transforms and
          the slab Newtonian potential.

In tangential frequency, with beta_j the vertical derivative of the single
layer of the data component G_j and sigma the tangential divergence of the
beta's, the boundary layer reads

    w_i = -2 beta_i + 4 i xi_i S sigma            (tangential),
    w_n = -2 sum_j R'_j beta_j + 4 d/dy S sigma   (normal),

which satisfies the forced heat equation with a harmonic pressure gradient,
is exactly divergence-free at the discrete symbol level, vanishes at t = 0,
and attains (G', 0) on the wall through the double-layer jump relation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (BoundaryField, HalfSpaceGrid, TensorField,
                   VectorField)
from .errors import ShapeMismatchError
from . import besov
from . import potentials as pot
from . import transforms as tr
from .numerics import derivative_matrix


@dataclass
class StokesSolution:
    """Velocity field with its four construction parts and diagnostics."""

    u: VectorField
    v: VectorField
    V: VectorField
    grad_phi: VectorField
    w: VectorField
    G: BoundaryField
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# parts
# ---------------------------------------------------------------------------


def build_v(h: VectorField) -> tuple[VectorField, VectorField]:
    """Heat evolution of the solenoidal extension; returns (half, whole)."""
    h_ext = tr.extend_solenoidal(h)
    v_whole = pot.heat_semigroup(h_ext)
    return tr.restrict_half(v_whole), v_whole


def build_grad_phi(psi: BoundaryField) -> VectorField:
    """Gradient of the harmonic correction with wall values (R' psi, psi).

    The vertical component is the harmonic extension of psi, the tangential
    components are extensions of the boundary Riesz transforms of psi; the
    field is curl-free and divergence-free by construction.
    """
    if psi.ncomp != 1:
        raise ShapeMismatchError("psi must be a scalar boundary field")
    grid = psi.grid
    comps = []
    for j in range(grid.n - 1):
        rj = tr.riesz_apply(psi, j)
        comps.append(pot.poisson_extension(rj).data)
    comps.append(pot.poisson_extension(psi).data)
    return VectorField(grid, np.stack(comps), domain="half",
                       time_dependent=psi.time_dependent)


def build_G(g: BoundaryField, v_wall: BoundaryField,
            V_wall: BoundaryField) -> BoundaryField:
    """Residual tangential boundary data after the v, V and phi corrections;
    the normal component is identically zero."""
    grid = g.grid
    n = grid.n
    psi_data = (g.data[n - 1] - v_wall.data[n - 1] - V_wall.data[n - 1])[None]
    psi = BoundaryField(grid, psi_data)
    comps = []
    for j in range(n - 1):
        rpsi = tr.riesz_apply(psi, j)
        comps.append(g.data[j] - v_wall.data[j] - V_wall.data[j] - rpsi.data[0])
    comps.append(np.zeros_like(comps[0]))
    return BoundaryField(grid, np.stack(comps))


def build_w(G: BoundaryField, tol: float = 1e-10) -> VectorField:
    """Boundary layer with prescribed tangential wall data (G', 0)."""
    grid = G.grid
    n = grid.n
    if G.ncomp != n:
        raise ShapeMismatchError("G must carry n components")
    scale = max(G.max_abs(), 1e-300)
    if np.max(np.abs(G.data[n - 1])) > tol * scale:
        raise ShapeMismatchError("boundary layer requires zero normal data")

    quad = pot.kernel_quadrature(grid)
    nt, nv = grid.N_time, grid.N_vert
    ks = tr.tan_wavenumbers(grid, deriv=True)
    mesh = np.meshgrid(*ks, indexing="ij") if len(ks) > 1 else [ks[0]]
    xi = [m.reshape(-1) for m in mesh]
    lam = np.sqrt(sum(x ** 2 for x in xi))

    D = derivative_matrix(grid.vert_nodes)
    betas = []
    for j in range(n - 1):
        ghat = tr.tan_fft(G.data[j], grid, offset=0).reshape(-1, nt)
        theta = pot.single_layer_modes(ghat, quad, grid)   # (modes, nv, nt)
        betas.append(np.einsum("ab,mbt->mat", D, theta))
    sigma = sum(1j * xi[j][:, None, None] * betas[j] for j in range(n - 1))
    S, dS = pot.strip_newton_modes(sigma, lam, grid.vert_nodes)

    inv_lam = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
    comps = []
    for i in range(n - 1):
        w_i = -2.0 * betas[i] + 4.0 * 1j * xi[i][:, None, None] * S
        comps.append(w_i)
    # -2 sum_j R'_j beta_j = 2 sigma / lam  with the zero-mode convention
    w_n = 2.0 * inv_lam[:, None, None] * sigma + 4.0 * dS
    comps.append(w_n)
    shape = grid.tan_shape + (nv, nt)
    data = np.stack([tr.tan_ifft(c.reshape(shape), grid, 0) for c in comps])
    return VectorField(grid, data, domain="half")


def compat_defect(h: VectorField, g: BoundaryField, index):
    """Defect between the boundary data and the wall trace of the heat
    evolution of (the solenoidal extension of) the initial data.

    Returns (defect field, anisotropic norm of the defect, magnitude of the
    defect at t = 0).  The t = 0 magnitude is the strong-compatibility
    diagnostic.
    """
    h_ext = tr.extend_solenoidal(h)
    d = BoundaryField(g.grid, g.data - pot.heat_trace(h_ext).data)
    s_b = index.alpha - 1.0 / index.q
    norm = besov.aniso_norm(d, s_b, index.q) if s_b > 0 else float("nan")
    d0 = float(np.max(np.abs(d.data[..., 0])))
    return d, norm, d0


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def _zero_like_parts(grid: HalfSpaceGrid):
    shape = (grid.n,) + grid.tan_shape + (grid.N_vert, grid.N_time)
    zero = VectorField(grid, np.zeros(shape), domain="half")
    wall = BoundaryField(grid, np.zeros((grid.n,) + grid.tan_shape
                                        + (grid.N_time,)))
    return zero, wall


def gradient_scale(u: VectorField) -> float:
    """L2 magnitude of all first spatial derivatives (normalizes residuals)."""
    grid = u.grid
    total = 0.0
    for i in range(grid.n):
        comp = u.data[i]
        for a in range(grid.n_tan_axes):
            d = tr.tangential_derivative_array(comp, grid, 0, a)
            total += float(np.mean(d * d))
        dv = tr.vertical_derivative_array(comp, grid, grid.n_tan_axes)
        total += float(np.mean(dv * dv))
    return float(np.sqrt(total))


def solve_stokes(h: VectorField, g: BoundaryField,
                 F: TensorField | None = None, index=None,
                 with_norms: bool = True) -> StokesSolution:
    """Full linear solve; diagnostics cover divergence, boundary and initial
    residuals, the compatibility defect, and (optionally) part norms."""
    grid = h.grid
    if g.grid.key() != grid.key():
        raise ShapeMismatchError("h and g must share a grid")
    if h.time_dependent:
        raise ShapeMismatchError("initial data must be steady")
    if g.ncomp != grid.n:
        raise ShapeMismatchError("boundary data must carry n components")

    try:
        v, v_whole = build_v(h)
        v_wall = tr.trace_boundary(v_whole)
    except Exception as exc:
        raise type(exc)(f"part v: {exc}") from exc

    if F is not None:
        try:
            V_whole = pot.stokes_volume_potential(F)
            V = tr.restrict_half(V_whole)
            V_wall = tr.trace_boundary(V_whole)
        except Exception as exc:
            raise type(exc)(f"part V: {exc}") from exc
    else:
        V, V_wall = _zero_like_parts(grid)

    n = grid.n
    psi = BoundaryField(grid, (g.data[n - 1] - v_wall.data[n - 1]
                               - V_wall.data[n - 1])[None])
    try:
        grad_phi = build_grad_phi(psi)
    except Exception as exc:
        raise type(exc)(f"part grad_phi: {exc}") from exc
    try:
        G = build_G(g, v_wall, V_wall)
        w = build_w(G)
    except Exception as exc:
        raise type(exc)(f"part w: {exc}") from exc

    u = VectorField(grid, v.data + V.data + grad_phi.data + w.data,
                    domain="half")

    diags = {}
    div = tr.divergence(u)
    gscale = max(gradient_scale(u), 1e-300)
    diags["div_residual"] = besov.field_lq(div, 2.0) / gscale
    u_wall = tr.trace_boundary(u)
    bnd = BoundaryField(grid, u_wall.data - g.data)
    gnorm = max(besov.field_lq(g, 2.0), 1e-300)
    diags["boundary_residual"] = besov.field_lq(bnd, 2.0) / gnorm \
        if besov.field_lq(g, 2.0) > 0 else besov.field_lq(bnd, 2.0)
    u0 = VectorField(grid, u.data[..., 0], domain="half", time_dependent=False)
    init = VectorField(grid, u0.data - h.data, domain="half",
                       time_dependent=False)
    h_scale = max(besov.field_lq(h, 2.0), 1e-300)
    diags["initial_residual"] = besov.field_lq(init, 2.0) / h_scale \
        if besov.field_lq(h, 2.0) > 0 else besov.field_lq(init, 2.0)
    if index is not None:
        _, compat_norm, compat_t0 = compat_defect(h, g, index)
        diags["compat_norm"] = compat_norm
        diags["compat_t0"] = compat_t0
        if with_norms:
            alpha, q = index.alpha, index.q
            diags["norms"] = {
                "u": besov.aniso_norm(u, alpha, q),
                "v": besov.aniso_norm(v, alpha, q),
                "V": besov.aniso_norm(V, alpha, q),
                "grad_phi": besov.aniso_norm(grad_phi, alpha, q),
                "w": besov.aniso_norm(w, alpha, q),
            }
    return StokesSolution(u=u, v=v, V=V, grad_phi=grad_phi, w=w, G=G,
                          diagnostics=diags)
