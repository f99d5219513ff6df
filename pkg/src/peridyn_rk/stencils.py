"""Offset stencils of the nonlocal operators acting on shape functions.

On a uniform grid, ``Psi_k(x_j + s) = Psi_0(x_j - x_k + s)`` depends on
``k`` only through the offset ``o = j - k``.  Every operator entry is
therefore a function of the offset alone, and is computed once by
scattering the quadrature points of the ball into the ``4**d`` offsets
whose shape functions are nonzero there.

Stencil arrays are centred: array position ``o + R`` holds offset ``o``.
The operator value at node ``j`` of a nodal field ``u`` is the
convolution ``sum_o S(o) u(j - o)``.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .quad import PolarRule, QuadSet
from .rkbasis import _cardinal

__all__ = ["OperatorStencils", "compute_stencils", "navier_stencil", "integration_points"]


@dataclass(frozen=True)
class OperatorStencils:
    """Offset stencils for the bond and divergence operators.

    Attributes
    ----------
    h : tuple of float
        Grid spacing.
    radius : tuple of int
        Half width ``R`` per axis; arrays have ``2R + 1`` entries per axis.
    psi0 : ndarray
        Shape function of the origin node sampled at the offsets.
    bond : ndarray, shape (d, d, ...)
        ``int rho s_i s_c / |s|^2 (Psi_0(o h + s) - Psi_0(o h)) ds``.
    div : ndarray, shape (d, ...)
        ``int rho s_c (Psi_0(o h + s) - Psi_0(o h)) ds``; also the gradient
        stencil, since both have the same integrand.
    bond_moment : ndarray, shape (d, d)
        Rule-consistent ``int rho s_i s_c / |s|^2 ds``.
    """

    h: tuple
    radius: tuple
    psi0: np.ndarray
    bond: np.ndarray
    div: np.ndarray
    bond_moment: np.ndarray

    @property
    def dim(self):
        return len(self.h)


def integration_points(integration, delta, max_points=2_000_000, orthant=False):
    """Yield ``(points, weights)`` blocks of a polar rule or a scaled QuadSet."""
    if isinstance(integration, PolarRule):
        if abs(integration.delta - delta) > 1e-14 * delta:
            raise ValueError("polar rule horizon does not match the kernel horizon")
        yield from integration.chunks(max_points, orthant=orthant)
    elif isinstance(integration, QuadSet):
        yield integration.scaled(delta)
    else:
        raise TypeError(f"unsupported integration rule {type(integration).__name__}")


def stencil_radius(h, delta):
    return tuple(int(math.floor(delta / hj + 1e-10)) + 2 for hj in h)


def compute_stencils(h, kernel, integration, max_points=2_000_000):
    """Bond and divergence stencils for spacing ``h``.

    Parameters
    ----------
    h : sequence of float
        Grid spacing per axis.
    kernel : RadialKernel
        Scaled kernel (its horizon is used).
    integration : PolarRule or QuadSet
        Ball quadrature.  A polar rule built with ``grid_h=h`` integrates the
        piecewise-polynomial shape functions exactly along every ray.

    Returns
    -------
    OperatorStencils
    """
    h = tuple(float(v) for v in h)
    d = len(h)
    R = stencil_radius(h, kernel.delta)
    shape = tuple(2 * r + 1 for r in R)
    strides = np.array([int(np.prod(shape[j + 1 :])) for j in range(d)])
    pairs = [(i, c) for i in range(d) for c in range(i, d)]
    n_comp = len(pairs) + d
    acc = np.zeros((n_comp, int(np.prod(shape))))
    moment = np.zeros((len(pairs),))
    hv = np.asarray(h)
    # polar rules are symmetric under every sign flip: scatter one orthant
    # and reflect the accumulated stencils afterwards
    orthant = isinstance(integration, PolarRule)
    for pts, w in integration_points(integration, kernel.delta, max_points, orthant):
        r = np.linalg.norm(pts, axis=1)
        kw = w * kernel(r)
        comps = np.empty((n_comp, pts.shape[0]))
        inv_r2 = 1.0 / (r * r)
        for p, (i, c) in enumerate(pairs):
            comps[p] = kw * pts[:, i] * pts[:, c] * inv_r2
        for c in range(d):
            comps[len(pairs) + c] = kw * pts[:, c]
        moment += comps[: len(pairs)].sum(axis=1)
        u = pts / hv
        base = np.floor(u)
        frac = u - base
        # offsets o = -base + l with l in (-2, -1, 0, 1); weight B(l + frac)
        w1 = [_cardinal(frac[:, j, None] + np.arange(-2, 2)[None, :], 0) for j in range(d)]
        start = ((-base.astype(np.int64) - 2 + np.asarray(R)) * strides).sum(axis=1)
        for combo in itertools.product(range(4), repeat=d):
            wt = w1[0][:, combo[0]].copy()
            for j in range(1, d):
                wt *= w1[j][:, combo[j]]
            idx = start + int(np.dot(combo, strides))
            for p in range(n_comp):
                acc[p] += np.bincount(idx, weights=comps[p] * wt, minlength=acc.shape[1])

    if orthant:
        acc, moment = _reflect_orthant(acc.reshape((n_comp,) + shape), moment, pairs, d)
        acc = acc.reshape(n_comp, -1)

    psi0 = np.ones(shape)
    for j in range(d):
        o = np.arange(-R[j], R[j] + 1)
        prof = _cardinal(o.astype(float), 0).reshape([-1 if a == j else 1 for a in range(d)])
        psi0 = psi0 * prof
    M = np.zeros((d, d))
    bond = np.zeros((d, d) + shape)
    for p, (i, c) in enumerate(pairs):
        M[i, c] = M[c, i] = moment[p]
        block = acc[p].reshape(shape) - moment[p] * psi0
        bond[i, c] = block
        bond[c, i] = block
    div = acc[len(pairs) :].reshape((d,) + shape)
    return OperatorStencils(h=h, radius=R, psi0=psi0, bond=bond, div=div, bond_moment=M)


def _reflect_orthant(acc, moment, pairs, d):
    """Sum the contributions of all sign-flipped copies of an orthant rule."""
    comp_axes = [(i, c) for i, c in pairs] + [(c,) for c in range(d)]
    full = np.zeros_like(acc)
    mom = np.zeros_like(moment)
    for flips in itertools.product((False, True), repeat=d):
        axes = [j + 1 for j in range(d) if flips[j]]
        block = np.flip(acc, axis=axes) if axes else acc
        for p, ax in enumerate(comp_axes):
            sign = (-1.0) ** sum(flips[a] for a in ax)
            full[p] += sign * block[p]
            if p < len(pairs):
                mom[p] += sign * moment[p]
    return full, mom


def navier_stencil(stencils, bond_coef, state_coef):
    """Combined stencil ``bond_coef * bond + state_coef * (div_i * div_c)``.

    The state part composes the gradient and divergence stencils through
    the interpolated nodal dilatation, which is a full discrete convolution.
    The result has half width ``2R``.
    """
    d = stencils.dim
    R = stencils.radius
    shape = tuple(4 * r + 1 for r in R)
    out = np.zeros((d, d) + shape)
    inner = tuple(slice(r, 3 * r + 1) for r in R)
    for i in range(d):
        for c in range(d):
            comp = signal.fftconvolve(stencils.div[i], stencils.div[c], mode="full")
            out[(i, c)] = state_coef * comp
            out[(i, c) + inner] += bond_coef * stencils.bond[i, c]
    return out
