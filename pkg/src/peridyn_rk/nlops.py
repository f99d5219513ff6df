"""Pointwise evaluation of the nonlocal operators.

All operators accept a *source*: either a smooth callable mapping points
``(n, d)`` to values ``(n, d)`` (vector fields) or ``(n,)`` (scalar
fields), or a :class:`TrialField` (nodal coefficients interpreted through
the quasi-interpolant).  The integration rule decides between the
continuous operators (a :class:`~peridyn_rk.quad.PolarRule`) and the
quasi-discrete operators (a :class:`~peridyn_rk.quad.QuadSet`).

For trial sources the state term is evaluated as ``G(Pi^h(D u))``: the
divergence is sampled at the nodes and interpolated again before the
gradient is applied.  For smooth sources it is ``G(D u)``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_points
from .quad import PolarRule
from .rkbasis import quasi_interpolant
from .stencils import integration_points

__all__ = [
    "Material",
    "TrialField",
    "apply_bond",
    "apply_divergence",
    "dilatation",
    "apply_gradient",
    "apply_navier",
    "local_navier",
]

_SCALING = {2: (16.0, 2.0), 3: (30.0, 3.0)}
# product of query points and quadrature points evaluated at once
_BLOCK = 400_000


@dataclass(frozen=True)
class Material:
    """Isotropic linear elastic material.

    Parameters
    ----------
    lam, mu : float
        Lame parameters.
    dim : int
        Dimension (2 for plane strain, 3).
    allow_lambda_lt_mu : bool
        Accept ``lam < mu``.  The stability analysis assumes ``lam >= mu``.
    """

    lam: float
    mu: float
    dim: int = 2
    allow_lambda_lt_mu: bool = False

    def __post_init__(self):
        if self.dim not in _SCALING:
            raise ValueError(f"material dimension must be 2 or 3, got {self.dim}")
        if not self.mu > 0:
            raise ValueError(f"shear modulus must be positive, got {self.mu}")
        if self.lam < self.mu and not self.allow_lambda_lt_mu:
            raise ValueError(f"lambda={self.lam} < mu={self.mu}: pass allow_lambda_lt_mu=True to accept")

    @classmethod
    def from_engineering(cls, E=1.0, nu=0.4, dim=2, allow_lambda_lt_mu=False):
        """Lame parameters from Young's modulus and Poisson ratio."""
        if not E > 0 or not -1.0 < nu < 0.5:
            raise ValueError(f"need E > 0 and -1 < nu < 0.5, got E={E}, nu={nu}")
        lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        mu = E / (2.0 * (1.0 + nu))
        return cls(lam, mu, dim, allow_lambda_lt_mu)

    @property
    def c_alpha(self):
        return _SCALING[self.dim][0]

    @property
    def c_beta(self):
        return _SCALING[self.dim][1]

    def bond_coefficient(self, m):
        """Factor ``C_alpha mu / m`` of the bond term."""
        return self.c_alpha * self.mu / m

    def state_coefficient(self, m):
        """Factor ``C_beta d (lam - mu) / m**2`` of the composed state term."""
        return self.c_beta * self.dim * (self.lam - self.mu) / m**2


class TrialField:
    """Quasi-interpolant of nodal coefficients on a grid.

    Parameters
    ----------
    grid : GridSpec
    coeffs : ndarray
        Shape ``grid.shape`` (scalar) or ``(c, *grid.shape)``.
    """

    def __init__(self, grid, coeffs):
        self.grid = grid
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def from_function(cls, grid, func):
        """Nodal samples of ``func`` on the whole indexed box."""
        return cls(grid, grid.sample(func))

    @property
    def scalar(self):
        return self.coeffs.shape == self.grid.shape

    def __call__(self, x, derivative=None):
        return quasi_interpolant(self.grid, self.coeffs, x, derivative)


def _check_mode(mode, integration):
    if mode is None:
        return
    expected = "continuous" if isinstance(integration, PolarRule) else "quasi"
    if mode != expected:
        raise ValueError(f"mode {mode!r} does not match the {type(integration).__name__} integration rule")


def _ball_sum(src, x, integration, kernel, weight_fn):
    """``sum_s w rho(|s|) weight_fn(s, src(x+s) - src(x))`` for all query points."""
    dim = kernel.dim
    x = check_points(x, dim)
    n = x.shape[0]
    u0 = np.asarray(src(x), dtype=float)
    total = None
    for pts, w in integration_points(integration, kernel.delta):
        kw = w * kernel(np.linalg.norm(pts, axis=1))
        step = max(1, _BLOCK // max(1, pts.shape[0]))
        parts = []
        for a in range(0, n, step):
            xa = x[a : a + step]
            y = (xa[:, None, :] + pts[None, :, :]).reshape(-1, dim)
            vals = np.asarray(src(y), dtype=float).reshape((xa.shape[0], pts.shape[0]) + u0.shape[1:])
            diff = vals - u0[a : a + step, None]
            parts.append(weight_fn(pts, kw, diff))
        block = np.concatenate(parts, axis=0)
        total = block if total is None else total + block
    return total


def apply_bond(src, x, integration, kernel, mode=None):
    """Bond operator ``sum rho (s s^T / |s|^2)(u(x+s) - u(x))`` at points ``x``.

    Returns an array of shape ``(n, d)``.
    """
    _check_mode(mode, integration)

    def weight(pts, kw, diff):
        unit = pts / np.linalg.norm(pts, axis=1)[:, None]
        coef = np.einsum("nsc,sc->ns", diff, unit) * kw[None, :]
        return np.einsum("ns,si->ni", coef, unit)

    return _ball_sum(src, x, integration, kernel, weight)


def apply_divergence(src, x, integration, kernel, mode=None):
    """Nonlocal divergence ``sum rho s . (u(x+s) - u(x))``; shape ``(n,)``."""
    _check_mode(mode, integration)

    def weight(pts, kw, diff):
        return np.einsum("nsc,sc,s->n", diff, pts, kw)

    return _ball_sum(src, x, integration, kernel, weight)


def dilatation(src, x, integration, kernel, m, mode=None):
    """Nonlocal dilatation ``(d / m) D u``."""
    return kernel.dim / m * apply_divergence(src, x, integration, kernel, mode)


def apply_gradient(theta, x, integration, kernel, mode=None):
    """Nonlocal gradient ``sum rho s (theta(x+s) - theta(x))``; shape ``(n, d)``."""
    _check_mode(mode, integration)

    def weight(pts, kw, diff):
        return np.einsum("ns,sc,s->nc", diff, pts, kw)

    return _ball_sum(theta, x, integration, kernel, weight)


def _nodal_divergence(src, x, integration, kernel):
    """Scalar trial field holding ``D u`` at every node that influences ``x``."""
    grid = src.grid
    reach = kernel.delta + 2.0 * np.asarray(grid.h)
    lower = np.asarray(grid.domain.lower)
    h = np.asarray(grid.h)
    kmin = np.floor((x.min(axis=0) - reach - lower) / h).astype(int) - 1
    kmax = np.ceil((x.max(axis=0) + reach - lower) / h).astype(int) + 1
    kmin = np.maximum(kmin, grid.lo)
    kmax = np.minimum(kmax, grid.hi)
    axes = [np.arange(a, b + 1) for a, b in zip(kmin, kmax)]
    mesh = np.meshgrid(*axes, indexing="ij")
    ks = np.stack([m.ravel() for m in mesh], axis=1)
    values = apply_divergence(src, grid.coordinates(ks), integration, kernel)
    nodal = np.zeros(grid.shape)
    pos = tuple((ks - np.asarray(grid.lo)).T)
    nodal[pos] = values
    return TrialField(grid, nodal)


def apply_navier(src, x, integration, kernel, material, m, mode=None):
    """Peridynamic Navier operator at points ``x``.

    ``(C_alpha mu / m) L^B u + (C_beta d (lam - mu) / m**2) G(D u)``, with
    the divergence interpolated on the grid when ``src`` is a
    :class:`TrialField`.
    """
    _check_mode(mode, integration)
    x = check_points(x, kernel.dim)
    bond = apply_bond(src, x, integration, kernel)
    if isinstance(src, TrialField):
        theta = _nodal_divergence(src, x, integration, kernel)
    else:

        def theta(y):
            return apply_divergence(src, y, integration, kernel)

    state = apply_gradient(theta, x, integration, kernel)
    return material.bond_coefficient(m) * bond + material.state_coefficient(m) * state


def local_navier(hessian, x, material):
    """Local Navier operator ``mu Lap u + (mu + lam) grad div u``.

    Parameters
    ----------
    hessian : callable
        Maps points ``(n, d)`` to second derivatives ``H[n, c, a, b] =
        d_a d_b u_c``.
    x : array_like, shape (n, d)
    material : Material
    """
    x = check_points(x, material.dim)
    H = np.asarray(hessian(x), dtype=float)
    lap = np.einsum("ncaa->nc", H)
    grad_div = np.einsum("naac->nc", H)
    return material.mu * lap + (material.mu + material.lam) * grad_div

