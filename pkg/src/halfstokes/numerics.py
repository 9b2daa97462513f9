"""Low-level numerical kernels shared across modules.

Contents: finite-difference weights on arbitrary nodes, trapezoid weights,
exact exponential-integrator weights for piecewise-linear data, the closed
form (via the error function) of the time-integrated one-dimensional heat
kernel, and the smooth dyadic transition function used by the
Littlewood-Paley windows.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf, erfcx


def fornberg_weights(x0: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights of the given derivative order at ``x0``.

    Classic recursion valid for arbitrary distinct nodes; returns weights w
    with f^(order)(x0) ~= sum_j w[j] f(nodes[j]).
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if order >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def derivative_matrix(nodes: np.ndarray, stencil: int = 5) -> np.ndarray:
    """Dense first-derivative matrix on arbitrary nodes.

    Uses ``stencil`` nearest nodes per row (one-sided at the ends), which
    gives fourth-order accuracy at the wall for the default width.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    width = min(stencil, n)
    D = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - width // 2, 0), n - width)
        sel = slice(lo, lo + width)
        D[i, sel] = fornberg_weights(nodes[i], nodes[sel], 1)
    return D


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights on (possibly graded) nodes."""
    nodes = np.asarray(nodes, dtype=float)
    w = np.zeros_like(nodes)
    d = np.diff(nodes)
    w[:-1] += d / 2.0
    w[1:] += d / 2.0
    return w


def exp_linear_weights(a, dt):
    """Exact Duhamel weights for exp(-a (t-s)) against piecewise-linear data.

    Returns (E, w_old, w_new) with
        int_0^dt exp(-a (dt - s)) (f0 (1 - s/dt) + f1 s/dt) ds
            = w_old f0 + w_new f1,   E = exp(-a dt).
    Stable for a*dt -> 0 via a series branch.
    """
    a = np.asarray(a, dtype=float)
    x = a * dt
    E = np.exp(-x)
    small = x < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        w_old = np.where(small, 1.0, (1.0 - E * (1.0 + x)) / np.where(small, 1.0, a * x))
        w_new = np.where(small, 1.0, -np.expm1(-x) / np.where(small, 1.0, a) - w_old)
    # series: w_old = dt (1/2 - x/3 + x^2/8), w_new = dt (1/2 - x/6 + x^2/24)
    xs = np.where(small, x, 0.0)
    w_old = np.where(small, dt * (0.5 - xs / 3.0 + xs ** 2 / 8.0), w_old)
    w_new = np.where(small, dt * (0.5 - xs / 6.0 + xs ** 2 / 24.0), w_new)
    return E, w_old, w_new


def heat_layer_cumulative(y, lam, T):
    """``int_0^T (4 pi r)^{-1/2} exp(-y^2/(4r) - lam^2 r) dr`` elementwise.

    This is the mass the single-layer heat kernel at height y deposits over a
    lag window of length T, for one tangential frequency magnitude lam.
    Evaluated through scaled complementary error functions so that it stays
    accurate for large ``lam * y``.
    """
    y, lam, T = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (y, lam, T)))
    out = np.zeros(y.shape)
    pos = T > 0
    if not np.any(pos):
        return out

    yy, ll, tt = y[pos], lam[pos], T[pos]
    sq = np.sqrt(tt)
    p = yy / (2.0 * sq)
    q = ll * sq
    gauss = np.exp(-(p * p + q * q))

    # lam == 0: int = sqrt(T/pi) e^{-p^2} - (y/2) erfc(p)
    zero = ll == 0
    res = np.empty_like(yy)
    if np.any(zero):
        res[zero] = (np.sqrt(tt[zero] / np.pi) * np.exp(-p[zero] ** 2)
                     - 0.5 * yy[zero] * _erfc_stable(p[zero]))
    nz = ~zero
    if np.any(nz):
        pn, qn, gn, lln = p[nz], q[nz], gauss[nz], ll[nz]
        term2 = gn * erfcx(pn + qn)
        diff = pn - qn
        t1 = np.where(diff >= 0,
                      gn * erfcx(np.abs(diff)),
                      2.0 * np.exp(-2.0 * pn * qn) - gn * erfcx(np.abs(diff)))
        res[nz] = (t1 - term2) / (4.0 * lln)
    out[pos] = res
    return out


def _erfc_stable(x):
    return np.exp(-x * x) * erfcx(x)


def heat_wall_cumulative(lam, T):
    """Special case y = 0 of :func:`heat_layer_cumulative`: erf(lam sqrt(T))/(2 lam)."""
    lam = np.asarray(lam, dtype=float)
    T = np.asarray(T, dtype=float)
    out = np.where(lam > 0,
                   erf(lam * np.sqrt(np.maximum(T, 0.0))) / np.where(lam > 0, 2 * lam, 1.0),
                   np.sqrt(np.maximum(T, 0.0) / np.pi))
    return out


def smooth_step(x):
    """C-infinity monotone transition: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    def bump(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out
    a = bump(x)
    b = bump(1.0 - x)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = a / (a + b)
    s[x <= 0] = 0.0
    s[x >= 1] = 1.0
    return s


def lag_convolve(weights, intervals):
    """Causal lag convolution along the last axis.

    ``weights[..., j]`` and ``intervals[..., k]`` both have K entries; the
    result has K + 1 with ``out[..., 0] = 0`` and
    ``out[..., m] = sum_{j+k = m-1} weights[..., j] * intervals[..., k]``.
    FFT-based, exact to roundoff; broadcasts leading axes.
    """
    weights = np.asarray(weights)
    intervals = np.asarray(intervals)
    K = intervals.shape[-1]
    if weights.shape[-1] != K:
        raise ValueError("weights and intervals must share their last length")
    size = 1
    while size < 2 * K:
        size *= 2
    Fw = np.fft.fft(weights, n=size, axis=-1)
    Fv = np.fft.fft(intervals, n=size, axis=-1)
    conv = np.fft.ifft(Fw * Fv, axis=-1)[..., :K]
    shape = np.broadcast_shapes(weights.shape[:-1], intervals.shape[:-1]) + (K + 1,)
    out = np.zeros(shape, dtype=conv.dtype)
    out[..., 1:] = conv
    if np.isrealobj(weights) and np.isrealobj(intervals):
        out = out.real
    return out


def lag_correlate(weights, nodes_series):
    """Adjoint of :func:`lag_convolve` along the last axis.

    Given node values ``z[..., m]`` (K + 1 entries) returns the K interval
    values ``R[..., k] = sum_j weights[..., j] * z[..., k + 1 + j]``.
    """
    weights = np.asarray(weights)
    z = np.asarray(nodes_series)
    K = z.shape[-1] - 1
    if weights.shape[-1] != K:
        raise ValueError("weights must have length K = len(z) - 1")
    size = 1
    while size < 2 * K + 1:
        size *= 2
    # R[k] = sum_j W[j] z[k+1+j] = correlation; realize via convolution with
    # the reversed weights: R[k] = (rev(W) * z)[K + k].
    Fw = np.fft.fft(weights[..., ::-1], n=size, axis=-1)
    Fz = np.fft.fft(z, n=size, axis=-1)
    conv = np.fft.ifft(Fw * Fz, axis=-1)
    out = conv[..., K : 2 * K]
    if np.isrealobj(weights) and np.isrealobj(z):
        out = out.real
    return out
