"""Nonlinear solver: fixed-point iteration of linear Stokes solves with the
quadratic self-advection flux, with contraction monitoring.

The first iterate solves with zero force; subsequent iterates feed back the
tensor -u (x) u (its divergence is taken inside the volume potential).  The
iteration stops when the increment norm falls below ``tol`` times the first
iterate's norm; three consecutive non-contracting steps raise
:class:`PicardDivergenceError` (the data are too large for the small-data
regime).
"""

from __future__ import annotations

import numpy as np

from .core import (BoundaryField, IterationTrace, TensorField, VectorField)
from .errors import PicardDivergenceError
from . import besov
from . import stokes as stk
from .numerics import trapezoid_weights


def nonlinear_flux(u: VectorField) -> TensorField:
    """Quadratic flux tensor F[k, i] = -u_k u_i (symmetric)."""
    if not np.all(np.isfinite(u.data)):
        raise ValueError("velocity field contains non-finite values")
    n = u.grid.n
    data = np.stack([np.stack([-u.data[k] * u.data[i] for i in range(n)])
                     for k in range(n)])
    return TensorField(u.grid, data, domain=u.domain,
                       time_dependent=u.time_dependent)


def picard_solve(h: VectorField, g: BoundaryField, index, max_iter: int = 50,
                 tol: float = 1e-8):
    """Iterated Stokes solves with the quadratic flux.

    Returns (velocity, trace).  Requires a critical index; the auxiliary
    force pair (beta, p) is attached (validated) if absent and recorded in
    the trace.
    """
    if not index.critical:
        raise ValueError("the nonlinear solve requires q = (n + 2)/(alpha + 1)")
    if index.beta is None:
        index = index.with_default_force_pair()
    alpha, q = index.alpha, index.q

    M0 = besov.data_norm_M0(h, g, index)
    trace = IterationTrace(data_norm=M0, beta=index.beta, p=index.p)

    sol = stk.solve_stokes(h, g, None, index=index, with_norms=False)
    u = sol.u
    first_norm = besov.aniso_norm(u, alpha, q)
    trace.add(first_norm)
    if first_norm == 0.0:
        trace.converged = True
        trace.stop_reason = "zero data"
        return u, trace

    bad_streak = 0
    for m in range(1, max_iter + 1):
        F = nonlinear_flux(u)
        sol = stk.solve_stokes(h, g, F, index=index, with_norms=False)
        u_next = sol.u
        increment = VectorField(u.grid, u_next.data - u.data, domain="half")
        inc_norm = besov.aniso_norm(increment, alpha, q)
        sol_norm = besov.aniso_norm(u_next, alpha, q)
        trace.add(sol_norm, inc_norm)
        u = u_next
        ratios = trace.ratios()
        if ratios and ratios[-1] >= 1.0:
            bad_streak += 1
        else:
            bad_streak = 0
        if bad_streak >= 3:
            trace.stop_reason = "no contraction for 3 consecutive steps"
            raise PicardDivergenceError(trace.stop_reason, trace=trace)
        if inc_norm <= tol * first_norm:
            trace.converged = True
            trace.stop_reason = f"increment below {tol:g} x first-iterate norm"
            break
    else:
        trace.stop_reason = f"max_iter={max_iter} reached"
    trace.validate()
    return u, trace


# ---------------------------------------------------------------------------
# weak formulation
# ---------------------------------------------------------------------------


def _integral_weights(grid):
    wt_x = grid.L / grid.N_tan
    wv = trapezoid_weights(grid.vert_nodes)
    tw = trapezoid_weights(grid.time_nodes)
    return wt_x, wv, tw


def _validate_test_function(fields, scale, tol=1e-10):
    wall = np.max(np.abs(fields["phi"][:, :, 0, :]))
    if wall > tol * max(scale, 1e-300):
        raise ValueError("test function does not vanish on the wall")
    div = fields["grad"][0][0] + fields["grad"][1][1]
    if np.max(np.abs(div)) > tol * max(scale, 1e-300):
        raise ValueError("test function is not divergence-free")


def weak_form_gap(u: VectorField, h: VectorField, g: BoundaryField,
                  test_function, F: TensorField | None = None,
                  quadratic: bool = False) -> tuple[float, float]:
    """Gap of the weak identity for one test function.

    Left side: -int u . (lap(Phi) + dPhi/dt).  Right side: the flux term
    (int (u x u) : grad Phi when ``quadratic``, else -int F : grad Phi),
    plus int h . Phi(0) and the wall term int g . dPhi/dx_n.  Returns
    (absolute gap, largest term magnitude).
    """
    grid = u.grid
    fields = test_function.evaluate(grid)
    scale = np.max(np.abs(fields["phi"]))
    _validate_test_function(fields, scale)
    wt_x, wv, tw = _integral_weights(grid)

    def volume(expr):
        return float(np.sum(expr * wv[None, :, None] * tw[None, None, :]) * wt_x)

    parabolic = fields["lap_phi"] + fields["dt_phi"]
    lhs = -volume(np.sum(u.data * parabolic, axis=0))
    ref = volume(np.sum(np.abs(u.data) * np.abs(parabolic), axis=0))

    if quadratic:
        flux = sum(u.data[k] * u.data[i] * fields["grad"][k][i]
                   for k in range(grid.n) for i in range(grid.n))
        flux_abs = sum(np.abs(u.data[k] * u.data[i] * fields["grad"][k][i])
                       for k in range(grid.n) for i in range(grid.n))
        flux_term = volume(flux)
    elif F is not None:
        flux = sum(F.data[k, i] * fields["grad"][k][i]
                   for k in range(grid.n) for i in range(grid.n))
        flux_abs = sum(np.abs(F.data[k, i] * fields["grad"][k][i])
                       for k in range(grid.n) for i in range(grid.n))
        flux_term = -volume(flux)
    else:
        flux_term = 0.0
        flux_abs = None
    if flux_abs is not None:
        ref += volume(flux_abs)

    h_term = float(np.sum(h.data * fields["phi0"] * wv[None, None, :]) * wt_x)
    ref += float(np.sum(np.abs(h.data) * np.abs(fields["phi0"])
                        * wv[None, None, :]) * wt_x)
    wall_term = float(np.sum(g.data * fields["wall_dy"] * tw[None, None, :]) * wt_x)
    ref += float(np.sum(np.abs(g.data) * np.abs(fields["wall_dy"])
                        * tw[None, None, :]) * wt_x)
    rhs = flux_term + h_term + wall_term
    return abs(lhs - rhs), max(ref, 1e-300)


def weak_ns_residual(u: VectorField, h: VectorField, g: BoundaryField,
                     test_family) -> float:
    """Max normalized weak-form gap of the quadratic (self-advecting) system
    over the family."""
    worst = 0.0
    for tf in test_family:
        gap, scale = weak_form_gap(u, h, g, tf, quadratic=True)
        worst = max(worst, gap / scale)
    return worst


def weak_stokes_residual(u: VectorField, h: VectorField, g: BoundaryField,
                         F: TensorField | None, test_family) -> float:
    """Max normalized weak-form gap of the linear system over the family."""
    worst = 0.0
    for tf in test_family:
        gap, scale = weak_form_gap(u, h, g, tf, F=F, quadratic=False)
        worst = max(worst, gap / scale)
    return worst
