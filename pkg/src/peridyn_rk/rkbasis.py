"""Cubic B-spline reproducing-kernel shape functions on rectilinear grids.

The shape function attached to node ``k`` is the tensor product

    Psi_k(x) = prod_j phi(|x_j - x_{k,j}| / (2 h_j)),

with ``phi`` the cubic B-spline on ``[0, 1]``.  Its support is ``2 h_j``
along axis ``j``, so at most ``4**d`` shape functions are nonzero at any
point.  The quasi-interpolant uses nodal samples as coefficients; it
reproduces affine functions exactly but is not interpolatory.
"""

import itertools

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_derivative, check_points
from .exceptions import CoverageError

__all__ = [
    "cubic_bspline",
    "shape_value",
    "local_weights",
    "quasi_interpolant",
    "norm_h",
    "cell_gauss_values",
]

# local node offsets relative to floor((x - lower) / h)
_OFFSETS = np.array([-1, 0, 1, 2])


def cubic_bspline(t, derivative=0):
    """Evaluate the cubic B-spline profile ``phi`` or its derivatives.

    Parameters
    ----------
    t : float or array_like
        Nonnegative arguments.
    derivative : {0, 1, 2}
        Derivative order with respect to ``t``.

    Returns
    -------
    float or ndarray

    Raises
    ------
    ValueError
        If any argument is negative.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("cubic_bspline expects nonnegative arguments; pass |t|")
    inner = t_arr <= 0.5
    outer = (t_arr > 0.5) & (t_arr < 1.0)
    out = np.zeros_like(t_arr)
    ti = t_arr[inner]
    to = 1.0 - t_arr[outer]
    if derivative == 0:
        out[inner] = 2.0 / 3.0 - 4.0 * ti**2 + 4.0 * ti**3
        out[outer] = 4.0 / 3.0 * to**3
    elif derivative == 1:
        out[inner] = -8.0 * ti + 12.0 * ti**2
        out[outer] = -4.0 * to**2
    elif derivative == 2:
        out[inner] = -8.0 + 24.0 * ti
        out[outer] = 8.0 * to
    else:
        raise ValueError(f"derivative order {derivative} is not supported (max 2)")
    if np.ndim(t) == 0:
        return float(out)
    return out


def _cardinal(u, order):
    """Cardinal cubic B-spline ``B(u) = phi(|u|/2)`` and its derivatives in ``u``."""
    a = np.abs(u)
    val = cubic_bspline(0.5 * a, order)
    if order == 1:
        val = 0.5 * np.sign(u) * val
    elif order == 2:
        val = 0.25 * val
    return val


def shape_value(grid, k, x, derivative=None):
    """Value or partial derivative of the shape function of node ``k``.

    Parameters
    ----------
    grid : GridSpec
    k : sequence of int
        Node multi-index.
    x : array_like
        One point ``(d,)`` or several points ``(n, d)``.
    derivative : sequence of int, optional
        Partial derivative multi-index of total order at most 2.

    Returns
    -------
    float or ndarray of shape (n,)
    """
    alpha = check_derivative(derivative, grid.dim)
    single = np.ndim(x) == 1
    pts = check_points(x, grid.dim)
    xk = grid.coordinates(np.asarray(k))
    val = np.ones(pts.shape[0])
    for j, (hj, aj) in enumerate(zip(grid.h, alpha)):
        val = val * _cardinal((pts[:, j] - xk[j]) / hj, aj) / hj**aj
    return float(val[0]) if single else val


def local_weights(grid, x, derivative=None):
    """Nonzero shape functions at points ``x``, separated by axis.

    Returns
    -------
    base : ndarray of int, shape (n, d)
        ``floor((x - lower) / h)``; the contributing nodes along axis ``j``
        are ``base[:, j] + (-1, 0, 1, 2)``.
    weights : ndarray, shape (n, d, 4)
        One-dimensional factors (already divided by ``h_j**alpha_j``).
    """
    alpha = check_derivative(derivative, grid.dim)
    pts = check_points(x, grid.dim)
    u = (pts - np.asarray(grid.domain.lower)) / np.asarray(grid.h)
    base = np.floor(u)
    frac = u - base
    weights = np.empty(pts.shape + (4,))
    for j, (hj, aj) in enumerate(zip(grid.h, alpha)):
        weights[:, j, :] = _cardinal(frac[:, j, None] - _OFFSETS[None, :], aj) / hj**aj
    return base.astype(np.int64), weights


def _as_component_array(grid, coeffs):
    arr = np.asarray(coeffs, dtype=float)
    if arr.shape == grid.shape:
        return arr[None], True
    if arr.shape[1:] == grid.shape:
        return arr, False
    raise ValueError(f"coefficients must have shape {grid.shape} or (c, *{grid.shape}), got {arr.shape}")


def quasi_interpolant(grid, coeffs, x, derivative=None):
    """Evaluate ``sum_k Psi_k(x) u_k`` (or a partial derivative of it).

    Parameters
    ----------
    grid : GridSpec
    coeffs : ndarray
        Nodal coefficients over the indexed box, shape ``grid.shape``
        (scalar field) or ``(c, *grid.shape)`` (vector field).
    x : array_like
        Points ``(n, d)``.
    derivative : sequence of int, optional

    Returns
    -------
    ndarray
        Shape ``(n,)`` for scalar coefficients, ``(n, c)`` otherwise.

    Raises
    ------
    CoverageError
        If a contributing node lies outside the indexed box.
    """
    arr, scalar = _as_component_array(grid, coeffs)
    base, w = local_weights(grid, x, derivative)
    idx0 = base - 1 - np.asarray(grid.lo)
    if np.any(idx0 < 0) or np.any(idx0 + 3 >= np.asarray(grid.shape)):
        raise CoverageError("evaluation point's basis stencil leaves the indexed grid region")
    out = np.zeros((base.shape[0], arr.shape[0]))
    for combo in itertools.product(range(4), repeat=grid.dim):
        wt = np.ones(base.shape[0])
        for j, c in enumerate(combo):
            wt = wt * w[:, j, c]
        index = tuple(idx0[:, j] + c for j, c in enumerate(combo))
        out += wt[:, None] * arr[(slice(None),) + index].T
    return out[:, 0] if scalar else out


def _gauss01(order=4):
    g, wg = np.polynomial.legendre.leggauss(order)
    return 0.5 * (g + 1.0), 0.5 * wg


def _window_values(grid, arr, derivative, order):
    """Quasi-interpolant at per-cell Gauss points for every full window of ``arr``.

    ``arr`` has shape ``(c, n_1, ..., n_d)``; the window starting at array
    position ``a`` covers nodes ``a .. a+3`` and the cell between nodes
    ``a+1`` and ``a+2``.
    """
    alpha = check_derivative(derivative, grid.dim)
    g, _ = _gauss01(order)
    mats = []
    for hj, aj in zip(grid.h, alpha):
        mats.append(_cardinal(g[:, None] - _OFFSETS[None, :], aj) / hj**aj)
    d = grid.dim
    win = sliding_window_view(arr, (4,) * d, axis=tuple(range(1, d + 1)))
    letters = "ijk"[:d]
    gl = "pqr"[:d]
    cells = "uvw"[:d]
    subscripts = "z" + cells + letters + "," + ",".join(f"{gl[j]}{letters[j]}" for j in range(d))
    subscripts += "->z" + cells + gl
    return np.einsum(subscripts, win, *mats, optimize=True)


def _gauss_weights(grid, order):
    _, wg = _gauss01(order)
    w = np.ones(())
    for hj in grid.h:
        w = np.multiply.outer(w, wg * hj)
    return w


def norm_h(grid, coeffs):
    """Discrete norm: L2 norm over R^d of the quasi-interpolant.

    Coefficients outside the indexed box are taken as zero.  Integration
    uses 4-point Gauss rules per axis on every grid cell, which is exact for
    the piecewise degree-6 integrand.
    """
    arr, _ = _as_component_array(grid, coeffs)
    pad = [(0, 0)] + [(3, 3)] * grid.dim
    vals = _window_values(grid, np.pad(arr, pad), None, 4)
    w = _gauss_weights(grid, 4)
    d = grid.dim
    total = np.sum(vals * vals * w.reshape((1,) * (d + 1) + w.shape))
    return float(np.sqrt(max(total, 0.0)))


def cell_gauss_values(grid, coeffs, derivative=None, order=4):
    """Quasi-interpolant at Gauss points of every grid cell inside the domain.

    Requires a grid whose upper corner lies on grid lines.

    Returns
    -------
    points : ndarray, shape (n, d)
    values : ndarray, shape (n, c)
    weights : ndarray, shape (n,)
    """
    if not grid.aligned:
        raise ValueError("cell quadrature over the domain requires a grid aligned with the upper corner")
    arr, _ = _as_component_array(grid, coeffs)
    d = grid.dim
    ncell = [u + 1 for u in grid.unknown_hi]
    # window start (array position) for cell c (between nodes c and c+1) is node c-1
    sl = tuple(slice(-1 - lo, -1 - lo + n + 3) for lo, n in zip(grid.lo, ncell))
    vals = _window_values(grid, arr[(slice(None),) + sl], derivative, order)
    g, _ = _gauss01(order)
    axes = []
    for j in range(d):
        start = np.arange(ncell[j]) * grid.h[j] + grid.domain.lower[j]
        axes.append(start[:, None] + g[None, :] * grid.h[j])
    # point layout: cells (u, v, ...) then gauss (p, q, ...), matching vals
    grids = []
    for j in range(d):
        shape = [1] * (2 * d)
        shape[j] = ncell[j]
        shape[d + j] = g.size
        grids.append(np.broadcast_to(axes[j].reshape(shape), tuple(ncell) + (g.size,) * d))
    points = np.stack([gr.reshape(-1) for gr in grids], axis=1)
    w = _gauss_weights(grid, order)
    weights = np.broadcast_to(w.reshape((1,) * d + w.shape), tuple(ncell) + (g.size,) * d).reshape(-1)
    values = vals.reshape(vals.shape[0], -1).T
    return points, values, weights
