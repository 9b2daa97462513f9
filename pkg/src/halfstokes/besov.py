"""Discrete homogeneous (an)isotropic Besov norms.

Littlewood-Paley sums over smooth dyadic frequency windows realize the
spatial norms; fractional time regularity is realized by the Gagliardo
double integral.  Space-time norms of positive order use the intersection
characterization  max( L^q_t Besov_x , L^q_x Besov_t );  a parabolic
space-time Littlewood-Paley realization is provided for negative orders
(needed by the operator-ratio studies).

Conventions: homogeneous norms ignore the spatial mean (the zero mode);
half-space fields are measured through their even vertical reflection, and
vector components aggregate in l^q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundaryField, Field, HalfSpaceGrid, VectorField
from .errors import NormOrderError, ShapeMismatchError
from .numerics import smooth_step, trapezoid_weights
from . import transforms as tr

# ---------------------------------------------------------------------------
# dyadic partition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicPartition:
    """Smooth dyadic partition of unity on [2^j_min, 2^j_max].

    Interior windows are translates of a fixed smooth bump in log2 frequency;
    the lowest/highest windows absorb the out-of-range tails, so the weights
    sum to one exactly on every nonzero lattice point.
    """

    j_min: int
    j_max: int

    @classmethod
    def for_band(cls, kmin: float, kmax: float) -> "DyadicPartition":
        if not (kmin > 0 and kmax >= kmin):
            raise NormOrderError("empty frequency band")
        j_min = int(np.floor(np.log2(kmin)))
        j_max = int(np.ceil(np.log2(kmax)))
        return cls(j_min, j_max)

    @property
    def blocks(self):
        return range(self.j_min, self.j_max + 1)

    def window(self, j: int, kabs: np.ndarray) -> np.ndarray:
        kabs = np.asarray(kabs)
        w = np.zeros(kabs.shape)
        pos = kabs > 0
        if not np.any(pos):
            return w
        x = np.log2(kabs[pos])
        if self.j_min == self.j_max:
            val = np.ones_like(x)
        elif j == self.j_min:
            val = 1.0 - smooth_step(x - j)
        elif j == self.j_max:
            val = smooth_step(x - j + 1)
        else:
            val = smooth_step(x - j + 1) - smooth_step(x - j)
        w[pos] = val
        return w


_PARTITIONS: dict = {}


def partition_for(grid: HalfSpaceGrid, domain: str) -> DyadicPartition:
    key = (grid.key(), domain)
    part = _PARTITIONS.get(key)
    if part is None:
        ks = tr.tan_wavenumbers(grid)
        if domain != "boundary":
            ks = ks + [tr.vert_wavenumbers(grid)]
        kmin = min(np.min(np.abs(k[np.abs(k) > 0])) for k in ks)
        kmax = float(np.sqrt(sum(np.max(np.abs(k)) ** 2 for k in ks)))
        part = DyadicPartition.for_band(kmin, kmax)
        _PARTITIONS[key] = part
    return part


# ---------------------------------------------------------------------------
# physical quadrature weights
# ---------------------------------------------------------------------------


def _spatial_weight_vectors(grid: HalfSpaceGrid, domain: str):
    w = [np.full(grid.N_tan, grid.L / grid.N_tan) for _ in range(grid.n_tan_axes)]
    if domain == "half":
        w.append(trapezoid_weights(grid.vert_nodes))
    elif domain == "whole":
        h = 2.0 * grid.X / (2 * grid.N_vert - 2)
        wv = np.full(grid.n_vert_whole, h)
        wv[-1] = 0.0  # duplicate +X slot
        w.append(wv)
    return w


def field_lq(field: Field, q: float, include_time: bool = True) -> float:
    """Physical L^q norm over space (x time); components aggregate in l^q."""
    grid = field.grid
    vecs = _spatial_weight_vectors(grid, field.domain)
    data = field.data
    total = np.abs(data) ** q
    sp_axes = tuple(range(field.ncomp_axes, field.ncomp_axes + len(vecs)))
    wfull = np.ones([1] * data.ndim)
    for a, vec in zip(sp_axes, vecs):
        sh = [1] * data.ndim
        sh[a] = len(vec)
        wfull = wfull * vec.reshape(sh)
    total = np.sum(total * wfull, axis=sp_axes)
    if field.ncomp_axes:
        total = np.sum(total, axis=tuple(range(field.ncomp_axes)))
    if field.time_dependent and include_time:
        tw = trapezoid_weights(grid.time_nodes)
        total = np.sum(total * tw, axis=-1)
    return float(total) ** (1.0 / q)


# ---------------------------------------------------------------------------
# spatial Littlewood-Paley norm
# ---------------------------------------------------------------------------

_S_CAP = 4.0


def _check_order(s):
    if abs(s) > _S_CAP:
        raise NormOrderError(f"order {s} outside the resolvable band +-{_S_CAP}")


def _lp_norm_slices(data: np.ndarray, grid: HalfSpaceGrid, domain: str,
                    s: float, q: float, part: DyadicPartition) -> np.ndarray:
    """Littlewood-Paley norm of each trailing-time slice.

    ``data`` has layout (*tan[, vert], extra...) where ``extra`` collects any
    trailing axes (e.g. time); returns an array over the extra axes.
    """
    nsp = grid.n_tan_axes + (0 if domain == "boundary" else 1)
    if domain == "boundary":
        ks = tr.tan_k_vectors(grid, data.ndim, 0)
        modes = np.fft.fftn(data, axes=tuple(range(grid.n_tan_axes)))
    else:
        ks = tr.whole_k_vectors(grid, data.ndim, 0)
        modes = tr.whole_fft(data, grid, offset=0)
    kabs = np.sqrt(sum(k ** 2 for k in ks))
    vecs = _spatial_weight_vectors(grid, "boundary" if domain == "boundary" else "whole")
    if domain != "boundary":
        # block fields come back in fft layout (duplicate already dropped)
        h = 2.0 * grid.X / (2 * grid.N_vert - 2)
        vecs[-1] = np.full(2 * grid.N_vert - 2, h)
    wfull = np.ones([1] * data.ndim)
    for a, vec in enumerate(vecs):
        sh = [1] * data.ndim
        sh[a] = len(vec)
        wfull = wfull * vec.reshape(sh)
    acc = 0.0
    sp_axes = tuple(range(nsp))
    for j in part.blocks:
        chi = part.window(j, kabs)
        if not np.any(chi):
            continue
        block = np.fft.ifftn(modes * chi, axes=sp_axes).real
        lq_q = np.sum(wfull * np.abs(block) ** q, axis=sp_axes)
        acc = acc + 2.0 ** (j * s * q) * lq_q
    return np.asarray(acc) ** (1.0 / q)


def lp_norm(field: Field, s: float, q: float,
            partition: DyadicPartition | None = None,
            extension: str = "even") -> float:
    """Homogeneous spatial Besov norm of order ``s``:
    ``( sum_j 2^{j s q} |block_j f|_{L^q}^q )^{1/q}``.

    Time-dependent fields are not accepted here (use
    :func:`lq_time_lp_space` or :func:`aniso_norm`).  Half-space fields are
    measured through a vertical reflection (``extension``: "even" or
    "solenoidal").
    """
    _check_order(s)
    if q <= 1.0 or not np.isfinite(q):
        raise NormOrderError(f"q must lie in (1, inf), got {q}")
    if field.time_dependent:
        raise ShapeMismatchError("lp_norm expects a single time slice")
    if field.data.size == 0:
        raise ShapeMismatchError("empty field")
    grid = field.grid
    if field.domain == "half":
        field = tr.extend_solenoidal(field) if (
            extension == "solenoidal" and isinstance(field, VectorField)
        ) else tr.extend_even(field)
    domain = field.domain
    part = partition or partition_for(grid, domain)
    acc = 0.0
    for c in range(int(np.prod(field.data.shape[: field.ncomp_axes], dtype=int))):
        comp = field.data.reshape((-1,) + field.data.shape[field.ncomp_axes:])[c]
        acc += float(_lp_norm_slices(comp, grid, domain, s, q, part)) ** q
    return acc ** (1.0 / q)


def lq_time_lp_space(field: Field, s: float, q: float,
                     extension: str = "even") -> float:
    """``L^q`` in time of the order-``s`` spatial Besov norm."""
    _check_order(s)
    if not field.time_dependent:
        raise ShapeMismatchError("field has no time axis")
    grid = field.grid
    work = field
    if field.domain == "half":
        work = tr.extend_solenoidal(field) if (
            extension == "solenoidal" and isinstance(field, VectorField)
        ) else tr.extend_even(field)
    part = partition_for(grid, work.domain)
    flat = work.data.reshape((-1,) + work.data.shape[work.ncomp_axes:])
    per_slice_q = 0.0
    for comp in flat:
        vals = _lp_norm_slices(comp, grid, work.domain, s, q, part)
        per_slice_q = per_slice_q + vals ** q
    tw = trapezoid_weights(grid.time_nodes)
    return float(np.sum(tw * per_slice_q)) ** (1.0 / q)


def negative_order_norm(field: BoundaryField, s: float, q: float) -> float:
    """Boundary Besov norm of negative order within the duality window
    ``-1 + 1/q < s < 0``."""
    if not (-1.0 + 1.0 / q < s < 0.0):
        raise NormOrderError(
            f"order {s} outside the duality window (-1 + 1/q, 0) for q={q}")
    return lp_norm(field, s, q)


# ---------------------------------------------------------------------------
# Gagliardo time seminorm
# ---------------------------------------------------------------------------


def _pair_diff_norms(field: Field, q: float, spatial_norm) -> np.ndarray:
    """Matrix D[i, j] of spatial norms of f(t_i) - f(t_j)."""
    grid = field.grid
    nt = grid.N_time
    data = field.data
    D = np.zeros((nt, nt))
    if spatial_norm == "lq":
        vecs = _spatial_weight_vectors(grid, field.domain)
        wfull = np.ones([1] * (data.ndim - 1))
        for a, vec in enumerate(vecs):
            sh = [1] * (data.ndim - 1)
            sh[field.ncomp_axes + a] = len(vec)
            wfull = wfull * vec.reshape(sh)
        flat_axes = tuple(range(data.ndim - 1))
        for i in range(nt):
            diff = data[..., i + 1:] - data[..., i:i + 1]
            vals = np.sum(wfull[..., np.newaxis] * np.abs(diff) ** q, axis=flat_axes)
            D[i, i + 1:] = vals ** (1.0 / q)
    elif spatial_norm == "abs":
        flat = data.reshape(-1, nt)
        for i in range(nt):
            D[i, i + 1:] = np.max(np.abs(flat[:, i + 1:] - flat[:, i:i + 1]), axis=0)
    elif isinstance(spatial_norm, tuple) and spatial_norm[0] == "besov":
        s_sp = spatial_norm[1]
        work = field
        if field.domain == "half":
            work = tr.extend_even(field)
        part = partition_for(grid, work.domain)
        flat = work.data.reshape((-1,) + work.data.shape[work.ncomp_axes:])
        for i in range(nt):
            diff = flat[..., i + 1:] - flat[..., i:i + 1]
            acc = 0.0
            for comp in diff:
                vals = _lp_norm_slices(comp, grid, work.domain, s_sp, q, part)
                acc = acc + vals ** q
            D[i, i + 1:] = np.asarray(acc) ** (1.0 / q)
    else:
        raise ValueError(f"unknown spatial norm spec {spatial_norm!r}")
    return D + D.T


def gagliardo_time_norm(field: Field, s2: float, q: float,
                        spatial_norm="lq") -> float:
    """Fractional time seminorm of order ``s2`` by the double difference
    quotient integral, with the given spatial norm inside.

    Tensor quadrature over the time grid; the cells touching the diagonal
    use the closed form for piecewise-linear data (slope model), which keeps
    the quadrature convergent for s2 close to 1.
    """
    if not 0.0 < s2 < 1.0:
        raise NormOrderError(f"time order s2 must lie in (0, 1), got {s2}")
    if not field.time_dependent:
        raise ShapeMismatchError("field has no time axis")
    grid = field.grid
    nt = grid.N_time
    dt = grid.dt
    D = _pair_diff_norms(field, q, spatial_norm)
    p = (1.0 - s2) * q  # exponent of |t-s| after inserting the slope model
    slopes = np.array([D[l, l + 1] / dt for l in range(nt - 1)])

    # diagonal cells (both halves of the square)
    diag = 2.0 * np.sum(slopes ** q) * dt ** (p + 1.0) / (p * (p + 1.0))
    # adjacent cells, averaged slope model
    m_eff = 0.5 * (slopes[:-1] + slopes[1:])
    adj = 2.0 * np.sum(m_eff ** q) * dt ** (p + 1.0) * (2.0 ** (p + 1.0) - 2.0) \
        / (p * (p + 1.0))

    # distant cells: 2x2 Gauss with bilinear interpolation of D
    total = diag + adj
    if nt >= 4:
        ncell = nt - 1
        l_idx, k_idx = np.meshgrid(np.arange(ncell), np.arange(ncell), indexing="ij")
        mask = (k_idx - l_idx) >= 2
        if np.any(mask):
            c00 = D[:-1, :-1][mask]
            c01 = D[:-1, 1:][mask]
            c10 = D[1:, :-1][mask]
            c11 = D[1:, 1:][mask]
            sep = (k_idx - l_idx)[mask].astype(float)
            g = 0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)
            cell = np.zeros_like(c00)
            for eta in g:      # position inside the s-interval (index l)
                for xi in g:   # position inside the t-interval (index k)
                    G = (c00 * (1 - eta) * (1 - xi) + c01 * (1 - eta) * xi
                         + c10 * eta * (1 - xi) + c11 * eta * xi)
                    lag = (sep + xi - eta) * dt
                    cell += 0.25 * G ** q / lag ** (1.0 + s2 * q)
            total += 2.0 * np.sum(cell) * dt * dt
    return float(total) ** (1.0 / q)


# ---------------------------------------------------------------------------
# anisotropic space-time norms
# ---------------------------------------------------------------------------


def aniso_norm(field: Field, alpha: float, q: float,
               extension: str = "even") -> float:
    """Space-time norm of positive order ``(alpha, alpha/2)`` as the max of
    the two mixed norms (intersection convention)."""
    if not 0.0 < alpha < 2.0:
        raise NormOrderError(f"alpha must lie in (0, 2), got {alpha}")
    spatial = lq_time_lp_space(field, alpha, q, extension=extension)
    temporal = _time_besov(field, alpha / 2.0, q)
    return max(spatial, temporal)


def _time_besov(field: Field, sigma: float, q: float) -> float:
    if sigma < 1.0:
        return gagliardo_time_norm(field, sigma, q, spatial_norm="lq")
    # one time derivative plus a Gagliardo remainder of order sigma - 1
    dt = field.grid.dt
    data = np.gradient(field.data, dt, axis=-1)
    deriv = type(field)(field.grid, data, domain=field.domain,
                        time_dependent=True) if not isinstance(field, BoundaryField) \
        else BoundaryField(field.grid, data, ncomp=field.ncomp)
    return gagliardo_time_norm(deriv, sigma - 1.0, q, spatial_norm="lq")


def aniso_lp_norm(field: Field, s: float, q: float) -> float:
    """Parabolic space-time Littlewood-Paley norm, valid for any order ``s``.

    Dyadic blocks live on the parabolic modulus (|k|^2 + |eta|)^{1/2} of the
    joint space-time lattice, with the time axis treated as periodic; meant
    for fields that vanish near both ends of the time window.
    """
    _check_order(s)
    if not field.time_dependent:
        raise ShapeMismatchError("space-time norm needs a time axis")
    grid = field.grid
    work = field if field.domain != "half" else tr.extend_even(field)
    nt = grid.N_time
    dt = grid.dt
    eta = 2.0 * np.pi * np.fft.fftfreq(nt, d=dt)
    # flatten components, keep (spatial..., time)
    flat = work.data.reshape((-1,) + work.data.shape[work.ncomp_axes:])
    if work.domain == "boundary":
        ks = tr.tan_k_vectors(grid, flat.ndim - 1, 0)
        vecs = _spatial_weight_vectors(grid, "boundary")
        modes = np.fft.fftn(flat, axes=tuple(range(1, flat.ndim)))
    else:
        flat = tr.whole_to_fft_layout(flat, 1 + grid.n_tan_axes)
        ks = tr.whole_k_vectors(grid, flat.ndim - 1, 0)
        h = 2.0 * grid.X / (2 * grid.N_vert - 2)
        vecs = [np.full(grid.N_tan, grid.L / grid.N_tan)
                for _ in range(grid.n_tan_axes)] + [np.full(2 * grid.N_vert - 2, h)]
        modes = np.fft.fftn(flat, axes=tuple(range(1, flat.ndim)))
    k2 = sum(k ** 2 for k in ks)
    sh = [1] * (len(vecs) + 1)
    sh[-1] = nt
    rho = np.sqrt(k2 + np.abs(eta).reshape(sh))
    kmin = float(np.min(rho[rho > 0]))
    kmax = float(np.max(rho))
    part = DyadicPartition.for_band(kmin, kmax)
    wfull = np.ones([1] * (len(vecs) + 1))
    for a, vec in enumerate(vecs):
        shp = [1] * (len(vecs) + 1)
        shp[a] = len(vec)
        wfull = wfull * vec.reshape(shp)
    wfull = wfull * np.full(nt, dt).reshape(sh)
    acc = 0.0
    sp_axes = tuple(range(1, modes.ndim))
    for j in part.blocks:
        chi = part.window(j, rho)
        block = np.fft.ifftn(modes * chi, axes=sp_axes).real
        lq_q = np.sum(wfull * np.abs(block) ** q)
        acc += 2.0 ** (j * s * q) * lq_q
    return acc ** (1.0 / q)


# ---------------------------------------------------------------------------
# composite data norm
# ---------------------------------------------------------------------------


def data_norm_M0(h: VectorField, g: BoundaryField, index) -> float:
    """Composite size of the data pair: initial-data Besov norm, the
    anisotropic boundary norm of g, and the two mixed norms of the normal
    boundary component."""
    alpha, q = index.alpha, index.q
    term_h = lp_norm(h, alpha - 2.0 / q, q, extension="solenoidal")
    s_b = alpha - 1.0 / q
    if s_b <= 0:
        raise NormOrderError(
            f"boundary order alpha - 1/q = {s_b} <= 0 not supported by the "
            "intersection realization")
    term_g = aniso_norm(g, s_b, q)
    gn = BoundaryField(g.grid, g.data[g.grid.n - 1 : g.grid.n])
    term_gn_time = gagliardo_time_norm(gn, alpha / 2.0, q,
                                       spatial_norm=("besov", -1.0 / q))
    term_gn_space = lq_time_lp_space(gn, s_b, q)
    return term_h + term_g + term_gn_time + term_gn_space
