"""Analytic data families: manufactured solutions, compatible data pairs,
seeded band-limited random samplers, and divergence-free test functions for
the weak formulation.

All generators draw their random coefficients before touching the grid, so
the same seed describes the same continuum object across resolutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .core import (BoundaryField, HalfSpaceGrid, ScalarField, TensorField,
                   VectorField)
from .errors import ShapeMismatchError

# ---------------------------------------------------------------------------
# deterministic analytic families
# ---------------------------------------------------------------------------


def stream_mode_initial_data(grid: HalfSpaceGrid, k1: int = 1, m: int = 1,
                             amplitude: float = 1.0) -> VectorField:
    """Divergence-free initial data from the stream function
    a cos(k1 x1) sin(kappa y): tangential component even in y, normal odd,
    so the reflection extension is exact and band-limited."""
    if grid.n != 2:
        raise ShapeMismatchError("stream-mode data is two-dimensional")
    kx = 2.0 * np.pi * k1 / grid.L
    kap = np.pi * m / grid.X
    x = grid.tan_nodes[:, None]
    y = grid.vert_nodes[None, :]
    u1 = amplitude * kap * np.cos(kx * x) * np.cos(kap * y)
    u2 = amplitude * kx * np.sin(kx * x) * np.sin(kap * y)
    return VectorField(grid, np.stack([u1, u2]), domain="half",
                       time_dependent=False)


def compatible_boundary_data(grid: HalfSpaceGrid, h: VectorField,
                             extra_amplitude: float = 0.3,
                             k_extra: int = 2) -> BoundaryField:
    """Boundary data strongly compatible with ``h``: equals the wall trace of
    h at t = 0 and relaxes toward an independent tangential profile."""
    x = grid.tan_nodes
    t = grid.time_nodes[None, :]
    wall = h.data[:, :, 0]  # (n, N_tan)
    rho = np.exp(-2.0 * t)
    eta = (1.0 - np.exp(-2.0 * t)) * np.exp(-t)
    comps = []
    for i in range(grid.n):
        base = wall[i][:, None] * rho
        comps.append(base)
    extra = extra_amplitude * np.cos(2.0 * np.pi * k_extra * x / grid.L)[:, None] * eta
    comps[0] = comps[0] + extra
    return BoundaryField(grid, np.stack(comps))


@dataclass
class ForcedManufactured:
    """Closed-form velocity with the stress tensor manufactured from its
    Stokes residual (pressure chosen zero); boundary data vanishes and the
    initial data is exactly divergence-free.

    The vertical stream profile y^5 exp(-a y^2) is wall-localized: it decays
    to roundoff well before the truncation height (use X >= 2 pi), so the
    computed solution is not polluted by the finite box, and it vanishes to
    fourth order at the wall, so both the reflection extension of the initial
    data and the zero extension of the stress stay smooth.
    """

    k1: int = 2
    amplitude: float = 1.0
    decay: float = 1.0

    def _profiles(self, grid):
        """phi, phi', phi'', phi''' of phi(y) = A y^5 exp(-a y^2)."""
        a = self.decay
        y = grid.vert_nodes
        p = Polynomial([0.0] * 5 + [0.125])
        derivs = [p]
        for _ in range(3):
            q = derivs[-1]
            derivs.append(q.deriv() - Polynomial([0.0, 2.0 * a]) * q)
        E = np.exp(-a * y ** 2)
        return tuple(d(y) * E for d in derivs)

    @staticmethod
    def _c(t):
        return np.exp(-t) * (1.0 + 2.0 * t)

    @staticmethod
    def _cdot(t):
        return np.exp(-t) * (1.0 - 2.0 * t)

    def velocity(self, grid: HalfSpaceGrid) -> VectorField:
        kx = 2.0 * np.pi * self.k1 / grid.L
        x = grid.tan_nodes[:, None, None]
        t = grid.time_nodes[None, None, :]
        gv, gv1, _, _ = self._profiles(grid)
        gv = gv[None, :, None]
        gv1 = gv1[None, :, None]
        c = self._c(t)
        u1 = self.amplitude * c * np.cos(kx * x) * gv1
        u2 = self.amplitude * c * kx * np.sin(kx * x) * gv
        return VectorField(grid, np.stack([u1, u2]), domain="half")

    def initial_data(self, grid: HalfSpaceGrid) -> VectorField:
        """Initial data as the discrete curl of the sampled stream function,
        exactly solenoidal on every grid (matches the analytic velocity up to
        the sampling-aliasing level)."""
        from . import transforms as trm

        a = self.decay
        kx = 2.0 * np.pi * self.k1 / grid.L
        x = grid.tan_nodes[:, None]
        yw = grid.whole_vert_nodes[None, :]
        p5 = yw ** 5 / 8.0
        psi = self.amplitude * self._c(0.0) * np.cos(kx * x) * p5 \
            * np.exp(-a * yw ** 2)
        psi_f = ScalarField(grid, psi, domain="whole", time_dependent=False)
        gradpsi = trm.spectral_gradient(psi_f)
        u_whole = VectorField(grid, np.stack([gradpsi.data[1], -gradpsi.data[0]]),
                              domain="whole", time_dependent=False)
        return trm.restrict_half(u_whole)

    def boundary_data(self, grid: HalfSpaceGrid) -> BoundaryField:
        shape = (grid.n,) + grid.tan_shape + (grid.N_time,)
        return BoundaryField(grid, np.zeros(shape))

    def stress(self, grid: HalfSpaceGrid) -> TensorField:
        """Tensor whose divergence is du/dt - Lap(u); vanishes at the wall
        and at the top, so the zero extension stays smooth."""
        kx = 2.0 * np.pi * self.k1 / grid.L
        x = grid.tan_nodes[:, None, None]
        t = grid.time_nodes[None, None, :]
        gv, gv1, gv2, gv3 = self._profiles(grid)
        gv, gv1 = gv[None, :, None], gv1[None, :, None]
        gv2, gv3 = gv2[None, :, None], gv3[None, :, None]
        c, cd = self._c(t), self._cdot(t)
        # R_1 = cos(kx x)[cd gv1 - c (gv3 - kx^2 gv1)]
        # R_2 = kx sin(kx x)[cd gv - c (gv2 - kx^2 gv)]
        F11 = self.amplitude * np.sin(kx * x) / kx * (
            cd * gv1 - c * (gv3 - kx ** 2 * gv1))
        F12 = -self.amplitude * np.cos(kx * x) * (
            cd * gv - c * (gv2 - kx ** 2 * gv))
        zeros = np.zeros_like(F11)
        data = np.stack([np.stack([F11, F12]), np.stack([zeros, zeros])])
        return TensorField(grid, data, domain="half")


def harmonic_gradient_solution(grid: HalfSpaceGrid, k1: int = 2,
                               amplitude: float = 1.0):
    """Exact homogeneous Stokes solution u = grad(phi) with a harmonic,
    boundary-driven phi; returns (u exact, h, g)."""
    if grid.n != 2:
        raise ShapeMismatchError("two-dimensional family")
    kx = 2.0 * np.pi * k1 / grid.L
    x = grid.tan_nodes[:, None, None]
    y = grid.vert_nodes[None, :, None]
    t = grid.time_nodes[None, None, :]
    c = amplitude * (1.0 - np.exp(-2.0 * t))  # c(0) = 0, so h = 0
    phi_x = -kx * c * np.sin(kx * x) * np.exp(-kx * y)
    phi_y = -kx * c * np.cos(kx * x) * np.exp(-kx * y)
    u = VectorField(grid, np.stack([phi_x, phi_y]), domain="half")
    h = VectorField(grid, u.data[..., 0], domain="half", time_dependent=False)
    g = BoundaryField(grid, u.data[:, :, 0, :])
    return u, h, g


def gaussian_boundary_pulse(grid: HalfSpaceGrid, width: float = 0.35,
                            center: float | None = None,
                            amplitude: float = 1.0) -> BoundaryField:
    """Scalar boundary pulse exp(-|x - x0|^2 / (4 a)) with a smooth ramp in
    time; spatially well inside the resolvable band for desk-scale grids."""
    if center is None:
        center = grid.L / 2.0
    x = grid.tan_nodes
    t = grid.time_nodes
    prof = sum(np.exp(-((x - center + m * grid.L) ** 2) / (4.0 * width))
               for m in range(-3, 4))  # periodized profile
    ramp = np.sin(np.pi * np.minimum(t / max(t[-1], 1e-300), 1.0)) ** 2
    data = amplitude * prof[:, None] * ramp[None, :]
    return BoundaryField(grid, data[None])


# ---------------------------------------------------------------------------
# seeded random band-limited samplers
# ---------------------------------------------------------------------------


def _time_profile(rng, t, kind: str, n_modes: int = 3):
    T = t[-1]
    if kind == "smooth":
        coef = rng.standard_normal(n_modes + 1)
        out = coef[0] * np.ones_like(t)
        for j in range(1, n_modes + 1):
            out = out + coef[j] * np.cos(np.pi * j * t / T)
        return out
    if kind == "taper0":
        coef = rng.standard_normal(n_modes)
        return sum(c * (1.0 - np.cos(np.pi * (j + 1) * t / T))
                   for j, c in enumerate(coef))
    if kind == "taper_both":
        coef = rng.standard_normal(n_modes)
        return sum(c * np.sin(np.pi * (j + 1) * t / T) ** 2
                   for j, c in enumerate(coef))
    raise ValueError(f"unknown time profile {kind!r}")


def random_boundary_field(grid: HalfSpaceGrid, rng, ncomp: int = 1,
                          kmax: int = 3, time_profile: str = "taper0",
                          zero_normal: bool = False) -> BoundaryField:
    """Band-limited random boundary data with the requested time envelope."""
    x = grid.tan_nodes
    t = grid.time_nodes
    comps = []
    for _ in range(ncomp):
        acc = np.zeros((grid.N_tan, grid.N_time))
        for k in range(1, kmax + 1):
            amp = rng.standard_normal() / k
            phase = rng.uniform(0, 2 * np.pi)
            prof = _time_profile(rng, t, time_profile)
            acc += amp * np.cos(2 * np.pi * k * x / grid.L + phase)[:, None] \
                * prof[None, :]
        comps.append(acc)
    if zero_normal and ncomp == grid.n:
        comps[-1] = np.zeros_like(comps[-1])
    return BoundaryField(grid, np.stack(comps))


def random_divfree_initial(grid: HalfSpaceGrid, rng, kmax: int = 2,
                           mmax: int = 2) -> VectorField:
    """Random solenoidal initial data built from stream-function modes whose
    reflection extension is exact."""
    if grid.n != 2:
        raise ShapeMismatchError("two-dimensional sampler")
    x = grid.tan_nodes[:, None]
    y = grid.vert_nodes[None, :]
    u1 = np.zeros((grid.N_tan, grid.N_vert))
    u2 = np.zeros_like(u1)
    for k in range(1, kmax + 1):
        for m in range(1, mmax + 1):
            amp = rng.standard_normal() / (k + m)
            phase = rng.uniform(0, 2 * np.pi)
            kx = 2 * np.pi * k / grid.L
            kap = np.pi * m / grid.X
            u1 += amp * kap * np.cos(kx * x + phase) * np.cos(kap * y)
            u2 += amp * kx * np.sin(kx * x + phase) * np.sin(kap * y)
    return VectorField(grid, np.stack([u1, u2]), domain="half",
                       time_dependent=False)


def random_whole_field(grid: HalfSpaceGrid, rng, ncomp: int | None = None,
                       kmax: int = 2, mmax: int = 2,
                       time_profile: str = "taper_both") -> VectorField | ScalarField:
    """Random band-limited space-time field on the reflected whole axis."""
    x = grid.tan_nodes[:, None, None]
    y = grid.whole_vert_nodes[None, :, None]
    nc = grid.n if ncomp is None else ncomp
    comps = []
    for _ in range(nc):
        acc = np.zeros((grid.N_tan, grid.n_vert_whole, grid.N_time))
        for k in range(1, kmax + 1):
            for m in range(1, mmax + 1):
                amp = rng.standard_normal() / (k + m)
                phase = rng.uniform(0, 2 * np.pi)
                vphase = rng.uniform(0, 2 * np.pi)
                prof = _time_profile(rng, grid.time_nodes, time_profile)
                acc += amp * np.cos(2 * np.pi * k * x / grid.L + phase) \
                    * np.cos(np.pi * m * y / grid.X + vphase) \
                    * prof[None, None, :]
        comps.append(acc)
    if nc == 1:
        return ScalarField(grid, comps[0], domain="whole")
    return VectorField(grid, np.stack(comps), domain="whole")


def random_divfree_whole(grid: HalfSpaceGrid, rng, kmax: int = 2,
                         mmax: int = 2) -> VectorField:
    """Random solenoidal steady field on the whole reflected axis, as the
    discrete curl of a random band-limited stream function; the normal
    component has a nonzero wall trace in general."""
    from . import transforms as trm

    if grid.n != 2:
        raise ShapeMismatchError("two-dimensional sampler")
    x = grid.tan_nodes[:, None]
    y = grid.whole_vert_nodes[None, :]
    psi = np.zeros((grid.N_tan, grid.n_vert_whole))
    for k in range(1, kmax + 1):
        for m in range(0, mmax + 1):
            amp = rng.standard_normal() / (k + m + 1)
            phase = rng.uniform(0, 2 * np.pi)
            vphase = rng.uniform(0, 2 * np.pi)
            psi += amp * np.cos(2 * np.pi * k * x / grid.L + phase) \
                * np.cos(np.pi * m * y / grid.X + vphase)
    psi_f = ScalarField(grid, psi, domain="whole", time_dependent=False)
    gp = trm.spectral_gradient(psi_f)
    return VectorField(grid, np.stack([gp.data[1], -gp.data[0]]),
                       domain="whole", time_dependent=False)


def random_whole_steady(grid: HalfSpaceGrid, rng, kmax: int = 2,
                        mmax: int = 2) -> VectorField:
    """Random band-limited steady data on the whole reflected axis."""
    x = grid.tan_nodes[:, None]
    y = grid.whole_vert_nodes[None, :]
    comps = []
    for _ in range(grid.n):
        acc = np.zeros((grid.N_tan, grid.n_vert_whole))
        for k in range(1, kmax + 1):
            for m in range(1, mmax + 1):
                amp = rng.standard_normal() / (k + m)
                phase = rng.uniform(0, 2 * np.pi)
                vphase = rng.uniform(0, 2 * np.pi)
                acc += amp * np.cos(2 * np.pi * k * x / grid.L + phase) \
                    * np.cos(np.pi * m * y / grid.X + vphase)
        comps.append(acc)
    return VectorField(grid, np.stack(comps), domain="whole",
                       time_dependent=False)


def random_boundary_steady(grid: HalfSpaceGrid, rng, kmax: int = 3) -> BoundaryField:
    """Random band-limited steady scalar boundary data."""
    x = grid.tan_nodes
    acc = np.zeros(grid.N_tan)
    for k in range(1, kmax + 1):
        acc += (rng.standard_normal() / k) \
            * np.cos(2 * np.pi * k * x / grid.L + rng.uniform(0, 2 * np.pi))
    return BoundaryField(grid, acc[None], time_dependent=False)


def random_halfspace_field(grid: HalfSpaceGrid, rng, ncomp: int | None = None,
                           kmax: int = 2, mmax: int = 2,
                           time_profile: str = "taper_both"):
    """Random band-limited field supported on the half space (vanishes at the
    wall and the top, so the zero extension stays tame)."""
    x = grid.tan_nodes[:, None, None]
    y = grid.vert_nodes[None, :, None]
    nc = grid.n if ncomp is None else ncomp
    comps = []
    for _ in range(nc):
        acc = np.zeros((grid.N_tan, grid.N_vert, grid.N_time))
        for k in range(1, kmax + 1):
            for m in range(1, mmax + 1):
                amp = rng.standard_normal() / (k + m)
                phase = rng.uniform(0, 2 * np.pi)
                prof = _time_profile(rng, grid.time_nodes, time_profile)
                acc += amp * np.cos(2 * np.pi * k * x / grid.L + phase) \
                    * np.sin(np.pi * m * y / grid.X) ** 2 \
                    * prof[None, None, :]
        comps.append(acc)
    if nc == 1:
        return ScalarField(grid, comps[0], domain="half")
    return VectorField(grid, np.stack(comps), domain="half")


# ---------------------------------------------------------------------------
# divergence-free test functions for the weak formulation
# ---------------------------------------------------------------------------


@dataclass
class StreamTestFunction:
    """Φ = (d/dy chi, -d/dx chi) for chi = A trig(k x) P(y) theta(t).

    P and three derivatives vanish appropriately at the wall (P(0) = P'(0) =
    0) and near the top; theta vanishes at the final time.  Divergence-free
    and wall-zero hold identically.
    """

    k: int
    trig: str          # "sin" or "cos"
    theta: str         # "decay2", "decay3", "bump"
    amplitude: float = 1.0

    def _P(self, X):
        # (y/X)^2 (1 - y/X)^3 expressed as a Polynomial in y
        s = Polynomial([0.0, 1.0 / X])
        return (s ** 2) * (1 - s) ** 3

    def _theta(self, t, T):
        s = t / T
        if self.theta == "decay2":
            return (1.0 - s) ** 2
        if self.theta == "decay3":
            return (1.0 - s) ** 3
        if self.theta == "bump":
            return s * (1.0 - s) ** 2
        raise ValueError(self.theta)

    def _theta_dot(self, t, T):
        s = t / T
        if self.theta == "decay2":
            return -2.0 * (1.0 - s) / T
        if self.theta == "decay3":
            return -3.0 * (1.0 - s) ** 2 / T
        if self.theta == "bump":
            return ((1.0 - s) ** 2 - 2.0 * s * (1.0 - s)) / T
        raise ValueError(self.theta)

    def _trigs(self, x, kx):
        if self.trig == "sin":
            return np.sin(kx * x), np.cos(kx * x)
        return np.cos(kx * x), -np.sin(kx * x)

    def evaluate(self, grid: HalfSpaceGrid):
        """Samples of Φ, ∂_tΦ, ΔΦ, ∇Φ and ∂Φ/∂y at the wall.

        Returns a dict of arrays: phi (2, nx, ny, nt), dt_phi, lap_phi,
        grad_phi (2, 2, nx, ny, nt) indexed [deriv, comp], wall_dy (2, nx, nt),
        phi0 (2, nx, ny).
        """
        if grid.n != 2:
            raise ShapeMismatchError("test family is two-dimensional")
        kx = 2.0 * np.pi * self.k / grid.L
        X, T = grid.X, grid.T
        P = self._P(X)
        P1, P2, P3 = P.deriv(1), P.deriv(2), P.deriv(3)
        x = grid.tan_nodes[:, None, None]
        y = grid.vert_nodes[None, :, None]
        t = grid.time_nodes[None, None, :]
        tg, tgp = self._trigs(x, kx)   # trig, trig'
        th = self._theta(t, T)
        thd = self._theta_dot(t, T)
        A = self.amplitude
        Py, P1y, P2y, P3y = P(y), P1(y), P2(y), P3(y)

        phi1 = A * tg * P1y * th
        phi2 = -A * kx * tgp * Py * th
        phi = np.stack([np.broadcast_to(phi1, (grid.N_tan, grid.N_vert,
                                               grid.N_time)).copy(),
                        np.broadcast_to(phi2, (grid.N_tan, grid.N_vert,
                                               grid.N_time)).copy()])
        dt_phi = np.stack([A * tg * P1y * thd * np.ones_like(phi[0]),
                           -A * kx * tgp * Py * thd * np.ones_like(phi[0])])
        lap1 = A * tg * (P3y - kx ** 2 * P1y) * th
        lap2 = -A * kx * tgp * (P2y - kx ** 2 * Py) * th
        lap_phi = np.stack([np.broadcast_to(lap1, phi[0].shape).copy(),
                            np.broadcast_to(lap2, phi[0].shape).copy()])
        d1_phi1 = A * kx * tgp * P1y * th
        d1_phi2 = A * kx ** 2 * tg * Py * th
        dy_phi1 = A * tg * P2y * th
        dy_phi2 = -A * kx * tgp * P1y * th
        grad = np.stack([
            np.stack([np.broadcast_to(d1_phi1, phi[0].shape).copy(),
                      np.broadcast_to(d1_phi2, phi[0].shape).copy()]),
            np.stack([np.broadcast_to(dy_phi1, phi[0].shape).copy(),
                      np.broadcast_to(dy_phi2, phi[0].shape).copy()]),
        ])
        wall_dy = grad[1][:, :, 0, :]
        phi0 = phi[:, :, :, 0]
        return {"phi": phi, "dt_phi": dt_phi, "lap_phi": lap_phi,
                "grad": grad, "wall_dy": wall_dy, "phi0": phi0}


def default_test_family(amplitude: float = 1.0):
    """Six-member divergence-free, wall-zero test family."""
    specs = [(1, "sin", "decay2"), (1, "cos", "decay3"), (2, "sin", "bump"),
             (2, "cos", "decay2"), (3, "sin", "decay3"), (1, "sin", "bump")]
    return [StreamTestFunction(k=k, trig=tr_, theta=th, amplitude=amplitude)
            for k, tr_, th in specs]
