"""Fourier symbols of the nonlocal Navier operator and of its discretizations.

The continuous symbol at a wave vector ``w`` is

    M(w) = (C_alpha mu / m) int rho (s s^T / |s|^2)(1 - cos(s.w)) ds
         + (C_beta d (lam - mu) / m**2) b(w) b(w)^T,
    b(w) = int rho s sin(s.w) ds,

and for an isotropic kernel it splits into a transverse and a longitudinal
part built from three scalar functions ``p, q, b`` of ``delta |w|``.

The lattice symbols of the Galerkin and collocation forms are periodized
sums over ``r in Z^d`` of the continuous symbol at ``(xi + 2 pi r) / h``,
weighted by powers of ``sin(xi_j / 2) / (xi_j + 2 pi r_j)``.  Continuous
forms are summed shell by shell with the slowly decaying constant limit of
the bond part summed in closed form; the quasi-discrete form is summed
exactly by Poisson resummation, since its summands do not decay.

Only two dimensions are supported.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import interpolate, linalg, special

from .exceptions import NonconvergentSumError
from .kernel import RadialKernel, compute_moments, sphere_area

__all__ = [
    "SymbolScalars",
    "SymbolMatrix",
    "scalar_symbols",
    "navier_symbol",
    "local_symbol",
    "lattice_symbol",
    "scan_wavevectors",
    "stability_scan",
    "ScanReport",
    "state_constants",
]

_FORMS = {
    # (bond power, state power, bond prefactor exponent, state prefactor exponent) for d
    "galerkin": lambda d: (8, 12, 8 * d, 8 * d + 4),
    "collocation": lambda d: (4, 8, 4 * d, 4 * d + 4),
    "quasi_collocation": lambda d: (4, 8, 4 * d, 4 * d + 4),
}
_TAYLOR_RADIUS = 0.5
_TAYLOR_TERMS = 14


@dataclass(frozen=True)
class SymbolScalars:
    """Scalar functions ``p``, ``q``, ``b`` evaluated at one or more arguments."""

    p: np.ndarray
    q: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class SymbolMatrix:
    """Symmetric ``d x d`` symbol at a wave vector.

    ``transverse`` and ``longitudinal`` are the quadratic forms of the
    matrix in the directions orthogonal and parallel to the wave vector;
    both are ``nan`` at the zero wave vector.
    """

    matrix: np.ndarray
    xi: np.ndarray
    transverse: float = float("nan")
    longitudinal: float = float("nan")

    @property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def _require_2d(kernel):
    if kernel.dim != 2:
        raise NotImplementedError("symbol computations are implemented for two dimensions")


def _has_closed_form(kernel):
    return kernel.dim == 2 and kernel.family == "inverse_distance" and kernel.power == 1.0


# ---------------------------------------------------------------------------
# scalar functions


def _integral_j0(x, j0, j1):
    """``int_0^x J0`` through Struve functions.

    ``scipy.special.itj0y0`` loses all accuracy above ``x`` of about 20.
    """
    return x * j0 + 0.5 * math.pi * x * (j1 * special.struve(0, x) - j0 * special.struve(1, x))


def _closed_scalars(scale, r):
    """Bessel-function forms for the profile ``scale / t`` in two dimensions."""
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    p = np.empty_like(a)
    q = np.empty_like(a)
    b = np.empty_like(a)
    small = a < _TAYLOR_RADIUS
    if np.any(small):
        x = a[small] / 2.0
        ps = np.zeros_like(x)
        qs = np.zeros_like(x)
        bs = np.zeros_like(x)
        for k in range(_TAYLOR_TERMS):
            fk = math.factorial(k) * math.factorial(k + 1)
            sign = (-1.0) ** k
            if k >= 1:
                ps -= sign * x ** (2 * k) / ((2 * k + 1) * fk)
                qs -= sign * x ** (2 * k) / fk
            bs += sign * x ** (2 * k + 1) / ((2 * k + 3) * fk)
        p[small] = scale * math.pi * ps
        q[small] = scale * math.pi * qs
        b[small] = 2.0 * math.pi * scale * bs
    big = ~small
    if np.any(big):
        x = a[big]
        j0 = special.j0(x)
        j1 = special.j1(x)
        int_j0 = _integral_j0(x, j0, j1)
        p[big] = scale * math.pi * (1.0 - 2.0 / x * (int_j0 - j1))
        q[big] = scale * math.pi * (1.0 - 2.0 * j1 / x)
        b[big] = 2.0 * math.pi * scale / x**2 * (int_j0 - x * j0)
    return p, q, np.sign(r) * b


def _gauss(order):
    return np.polynomial.legendre.leggauss(order)


def _polar_nodes(radius, wavenumber, radial_order=12):
    """Tensor rule on the disc of radius ``radius``: Gauss in ``t``, trapezoid in angle.

    The angular integrands are smooth and periodic, so the trapezoid rule
    converges geometrically once it resolves the oscillation.
    """
    panels = max(2, math.ceil(radius * wavenumber / 2.0))
    x, w = _gauss(radial_order)
    edges = np.linspace(0.0, radius, panels + 1)
    t = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * x[None, :]).ravel()
    wt = ((edges[1:, None] - edges[:-1, None]) / 2 * w[None, :]).ravel()
    n_ang = max(64, 8 * math.ceil(radius * wavenumber))
    phi = 2.0 * math.pi * np.arange(n_ang) / n_ang
    wphi = np.full(n_ang, 2.0 * math.pi / n_ang)
    return t, wt, phi, wphi


def _numeric_scalars(kernel, r):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros((3, r.size))
    for i, ri in enumerate(r):
        t, wt, phi, wphi = _polar_nodes(1.0, abs(ri))
        # rho(t) t, finite for the integrable singular profiles
        radial = kernel.profile(t) * t * wt
        c, s = np.cos(phi), np.sin(phi)
        arg = ri * np.outer(t, s)
        one_minus_cos = 2.0 * np.sin(arg / 2.0) ** 2
        out[0, i] = np.einsum("t,tp,p->", radial, one_minus_cos, c * c * wphi)
        out[1, i] = np.einsum("t,tp,p->", radial, one_minus_cos, s * s * wphi)
        out[2, i] = np.einsum("t,tp,p->", radial * t, np.sin(arg), s * wphi)
    return out


def scalar_symbols(kernel, r, quadset=None, route="auto"):
    """Scalar symbol functions ``p_1, q_1, b_1`` of a unit profile.

    Parameters
    ----------
    kernel : RadialKernel
        Only the unit profile is used.
    r : float or array_like
        Arguments (``delta |xi|`` for a scaled symbol).
    quadset : QuadSet, optional
        Evaluate the quasi-discrete scalars as weighted sums over the point
        set instead of ball integrals.
    route : {"auto", "closed", "numeric"}
        Continuous scalars: Bessel-function forms (inverse-distance profile
        in two dimensions) or tensor quadrature.

    Returns
    -------
    SymbolScalars
    """
    _require_2d(kernel)
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    if quadset is not None:
        pts, w = quadset.points, quadset.weights
        norm = np.linalg.norm(pts, axis=1)
        kw = w * kernel.profile(norm)
        arg = np.multiply.outer(r, pts[:, -1])
        omc = 2.0 * np.sin(arg / 2.0) ** 2
        p = omc @ (kw * pts[:, 0] ** 2 / norm**2)
        q = omc @ (kw * pts[:, -1] ** 2 / norm**2)
        b = np.sin(arg) @ (kw * pts[:, -1])
    elif route == "closed" or (route == "auto" and _has_closed_form(kernel)):
        if not _has_closed_form(kernel):
            raise ValueError("closed forms exist only for the 2D inverse-distance profile")
        p, q, b = _closed_scalars(kernel.coefficients[0], r)
    elif route in ("auto", "numeric"):
        p, q, b = _numeric_scalars(kernel, r).reshape(3, *r.shape)
    else:
        raise ValueError(f"unknown route {route!r}")
    if scalar:
        return SymbolScalars(float(p), float(q), float(b))
    return SymbolScalars(np.asarray(p), np.asarray(q), np.asarray(b))


# ---------------------------------------------------------------------------
# continuous and quasi-discrete symbol matrices


def _coefficients(kernel, material, m):
    if m is None:
        m = compute_moments(kernel).m
    return material.bond_coefficient(m), material.state_coefficient(m)


def state_constants(material, kernel=None):
    """Both candidate constants of the state term, for reporting.

    The operator-derived constant with ``m = d`` is ``C_beta (lam - mu) / d``;
    the alternative form without the ``1/d`` factor gives a small-horizon
    limit that is ``d`` times too stiff in the longitudinal direction.
    The solver always uses the operator-derived coefficient with the
    computed ``m``.

    Returns
    -------
    dict
    """
    kernel = RadialKernel.inverse_distance(1.0, dim=material.dim) if kernel is None else kernel
    d = material.dim
    m = compute_moments(kernel).m
    operator = material.c_beta * (material.lam - material.mu) / d
    return {
        "m": m,
        "state_coefficient": material.state_coefficient(m),
        "operator_constant": operator,
        "alternative_constant": material.c_beta * (material.lam - material.mu),
        "ratio": float(d),
    }


def _decomposed(omega, kernel, bond_coef, state_coef, quadset=None):
    """Bond and state symbol matrices from the scalar functions, shape ``(n, d, d)``."""
    omega = np.atleast_2d(omega)
    d = omega.shape[1]
    norm = np.linalg.norm(omega, axis=1)
    sc = scalar_symbols(kernel, kernel.delta * norm, quadset=quadset)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(norm[:, None] > 0, omega / norm[:, None], 0.0)
    proj = np.einsum("ni,nj->nij", unit, unit)
    eye = np.eye(d)[None]
    dl2 = kernel.delta**2
    bond = bond_coef / dl2 * (sc.p[:, None, None] * (eye - proj) + sc.q[:, None, None] * proj)
    state = state_coef / dl2 * (sc.b**2)[:, None, None] * proj
    zero = norm == 0
    bond[zero] = 0.0
    state[zero] = 0.0
    return bond, state


def _direct_discrete(omega, points, weights, kernel, bond_coef, state_coef):
    """Symbol matrices as weighted sums over scaled quadrature points."""
    omega = np.atleast_2d(omega)
    r = np.linalg.norm(points, axis=1)
    kw = weights * kernel(r)
    arg = omega @ points.T
    omc = 2.0 * np.sin(arg / 2.0) ** 2
    unit = points / r[:, None]
    bond = bond_coef * np.einsum("ns,s,si,sj->nij", omc, kw, unit, unit)
    bvec = np.einsum("ns,s,si->ni", np.sin(arg), kw, points)
    state = state_coef * np.einsum("ni,nj->nij", bvec, bvec)
    return bond, state


def _direct_continuous(omega, kernel, bond_coef, state_coef):
    omega = np.atleast_2d(omega)
    n, d = omega.shape
    bond = np.zeros((n, d, d))
    state = np.zeros((n, d, d))
    for i, w in enumerate(omega):
        t, wt, phi, wphi = _polar_nodes(kernel.delta, float(np.linalg.norm(w)))
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        radial = kernel(t) * t * wt
        arg = np.outer(t, dirs @ w)
        omc = 2.0 * np.sin(arg / 2.0) ** 2
        bond[i] = bond_coef * np.einsum("t,tp,p,pi,pj->ij", radial, omc, wphi, dirs, dirs)
        bvec = np.einsum("t,tp,p,pi->i", radial * t, np.sin(arg), wphi, dirs)
        state[i] = state_coef * np.outer(bvec, bvec)
    return bond, state


def _symbol_matrix(M, xi):
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if norm == 0:
        return SymbolMatrix(M, xi)
    unit = xi / norm
    perp = np.array([-unit[1], unit[0]])
    return SymbolMatrix(M, xi, float(perp @ M @ perp), float(unit @ M @ unit))


def navier_symbol(xi, kernel, material, m=None, quadset=None, route="direct"):
    """Symbol matrix of the continuous or quasi-discrete Navier operator.

    Parameters
    ----------
    xi : array_like, shape (2,)
        Wave vector.
    kernel : RadialKernel
        Scaled kernel (its horizon is used).
    material : Material
    m : float, optional
        Weighted volume; the kernel's computed second moment by default.
    quadset : QuadSet, optional
        Use the quasi-discrete operator.
    route : {"direct", "decomposition"}
        ``"direct"`` integrates (or sums) the matrix definition;
        ``"decomposition"`` assembles it from the scalar functions.

    Returns
    -------
    SymbolMatrix
    """
    _require_2d(kernel)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (kernel.dim,):
        raise ValueError(f"navier_symbol takes one wave vector of shape ({kernel.dim},), got {xi.shape}")
    bond_coef, state_coef = _coefficients(kernel, material, m)
    if not np.any(xi):
        return SymbolMatrix(np.zeros((2, 2)), xi)
    if route == "decomposition":
        bond, state = _decomposed(xi, kernel, bond_coef, state_coef, quadset)
    elif route == "direct":
        if quadset is None:
            bond, state = _direct_continuous(xi, kernel, bond_coef, state_coef)
        else:
            pts, w = quadset.scaled(kernel.delta)
            bond, state = _direct_discrete(xi, pts, w, kernel, bond_coef, state_coef)
    else:
        raise ValueError(f"unknown route {route!r}")
    return _symbol_matrix(bond[0] + state[0], xi)


def local_symbol(xi, material):
    """Symbol ``mu |xi|^2 I + (mu + lam) xi xi^T`` of the local Navier operator."""
    xi = np.asarray(xi, dtype=float)
    return material.mu * (xi @ xi) * np.eye(xi.size) + (material.mu + material.lam) * np.outer(xi, xi)


# ---------------------------------------------------------------------------
# lattice sums


@lru_cache(maxsize=None)
def _bspline(order):
    knots = np.arange(order + 1) - order / 2.0
    return interpolate.BSpline.basis_element(knots, extrapolate=False)


def _bspline_values(order, t):
    vals = _bspline(order)(t)
    return np.nan_to_num(vals, nan=0.0)


def _periodized_power(xi, power):
    """``sum_r (sin(x/2) / (x + 2 pi r))**power`` in closed form."""
    k = np.arange(-(power // 2), power // 2 + 1)
    coef = _bspline_values(power, k.astype(float))
    return 2.0**-power * np.cos(np.multiply.outer(xi, k)) @ coef


def _periodized_phase(xi, shift, power):
    """``sum_r exp(i a (x + 2 pi r)) (sin(x/2) / (x + 2 pi r))**power``.

    Poisson summation turns the sum into finitely many B-spline values:
    ``2**-power * sum_k B(k + a) exp(-i k x)``.
    """
    half = power // 2
    k = np.arange(-half - math.ceil(np.max(np.abs(shift))) - 1, half + math.ceil(np.max(np.abs(shift))) + 2)
    vals = _bspline_values(power, np.add.outer(shift, k.astype(float)))  # (s, k)
    phase = np.exp(-1j * np.multiply.outer(xi, k))  # (n, k)
    return 2.0**-power * phase @ vals.T  # (n, s)


def _weights(xi, r, power):
    """``prod_j (sin(xi_j/2) / (xi_j + 2 pi r_j))**power`` for all pairs, shape ``(n, R)``."""
    arg = xi[:, None, :] + 2.0 * np.pi * r[None, :, :]
    return np.prod((0.5 * np.sinc(arg / (2.0 * np.pi))) ** power, axis=2)


def _shell(n, d):
    if n == 0:
        return np.zeros((1, d), dtype=int)
    rng = range(-n, n + 1)
    return np.array([r for r in itertools.product(rng, repeat=d) if max(abs(v) for v in r) == n], dtype=int)


def _bond_limit(kernel, bond_coef):
    """Large-wavenumber limit ``bond_coef * int rho s s^T / |s|^2`` (isotropic)."""
    d = kernel.dim
    val = sphere_area(d) / d * kernel.radial_integral(d - 1) / kernel.delta**2
    return bond_coef * val * np.eye(d)


def _shell_sums(xi, h, kernel, bond_coef, state_coef, powers, tol, max_shells):
    """Adaptive shell summation of the continuous lattice sums."""
    n_xi, d = xi.shape
    pb, pd = powers
    limit = _bond_limit(kernel, bond_coef)
    base = np.prod(_periodized_power(xi, pb), axis=1)
    bond = base[:, None, None] * limit[None]
    state = np.zeros((n_xi, d, d))
    active = np.arange(n_xi)
    for n in range(max_shells + 1):
        r = _shell(n, d)
        x = xi[active]
        omega = (x[:, None, :] + 2.0 * np.pi * r[None, :, :]) / h
        flat = omega.reshape(-1, d)
        b_mat, s_mat = _decomposed(flat, kernel, bond_coef, state_coef)
        b_mat = (b_mat - limit[None]).reshape(x.shape[0], r.shape[0], d, d)
        s_mat = s_mat.reshape(x.shape[0], r.shape[0], d, d)
        db = np.einsum("nr,nrij->nij", _weights(x, r, pb), b_mat)
        ds = np.einsum("nr,nrij->nij", _weights(x, r, pd), s_mat)
        bond[active] += db
        state[active] += ds
        if n < 2:
            continue
        size = np.linalg.norm(bond[active], axis=(1, 2)) + np.linalg.norm(state[active], axis=(1, 2))
        change = np.linalg.norm(db, axis=(1, 2)) + np.linalg.norm(ds, axis=(1, 2))
        done = change <= tol * np.maximum(size, np.finfo(float).tiny)
        active = active[~done]
        if active.size == 0:
            return bond, state
    raise NonconvergentSumError(
        f"lattice sum not converged after {max_shells} shells at {active.size} wave vectors"
    )


def _poisson_sums(xi, h, kernel, quadset, bond_coef, state_coef, powers):
    """Exact lattice sums of the quasi-discrete symbol by Poisson resummation."""
    pb, pd = powers
    d = xi.shape[1]
    pts, w = quadset.scaled(kernel.delta)
    r = np.linalg.norm(pts, axis=1)
    kw = w * kernel(r)
    unit = pts / r[:, None]
    shift = pts / np.asarray(h)[None, :]  # (s, d)

    base = np.prod(_periodized_power(xi, pb), axis=1)  # (n,)
    phase = np.ones((xi.shape[0], pts.shape[0]), dtype=complex)
    for j in range(d):
        phase *= _periodized_phase(xi[:, j], shift[:, j], pb)
    factor = base[:, None] - phase.real  # sum_r (1 - cos(s.w_r)) W(r)
    bond = bond_coef * np.einsum("ns,s,si,sj->nij", factor, kw, unit, unit)

    # b b^T = 1/2 sum_{s,s'} (cos((s - s').w) - cos((s + s').w)) s s'^T
    diff = (shift[:, None, :] - shift[None, :, :]).reshape(-1, d)
    summ = (shift[:, None, :] + shift[None, :, :]).reshape(-1, d)
    cd = np.ones((xi.shape[0], diff.shape[0]), dtype=complex)
    cs = np.ones_like(cd)
    for j in range(d):
        cd *= _periodized_phase(xi[:, j], diff[:, j], pd)
        cs *= _periodized_phase(xi[:, j], summ[:, j], pd)
    pair = 0.5 * (cd.real - cs.real).reshape(xi.shape[0], pts.shape[0], pts.shape[0])
    ks = kw[:, None] * pts
    state = state_coef * np.einsum("nab,ai,bj->nij", pair, ks, ks)
    return bond, state


def lattice_symbol(
    xi,
    delta,
    h,
    material,
    kernel=None,
    form="collocation",
    quadset=None,
    m=None,
    tol=1e-10,
    max_shells=64,
    truncation="auto",
    part="full",
):
    """Lattice symbol of the Galerkin or collocation form.

    Parameters
    ----------
    xi : array_like, shape (2,) or (n, 2)
        Normalized frequencies in ``(-pi, pi)^2``.
    delta : float
        Horizon.
    h : sequence of float
        Grid spacing.
    material : Material
    kernel : RadialKernel, optional
        Unit profile; rescaled to ``delta``.  Defaults to the unit-moment
        inverse-distance kernel.
    form : {"galerkin", "collocation", "quasi_collocation"}
    quadset : QuadSet
        Required by ``"quasi_collocation"``.
    m : float, optional
        Weighted volume (computed by default).
    tol : float
        Relative size of the last shell at which summation stops.
    max_shells : int
    truncation : {"auto", "shells", "poisson"}
        ``"auto"`` sums continuous forms by shells and the quasi-discrete
        form by Poisson resummation.
    part : {"full", "bond", "state"}
        Restrict the result to one of the two sums.

    Returns
    -------
    SymbolMatrix, or ndarray of shape ``(n, 2, 2)`` for several ``xi``.

    Raises
    ------
    NonconvergentSumError
        Shell summation did not converge within ``max_shells`` shells.
    """
    if form not in _FORMS:
        raise ValueError(f"unknown form {form!r}; expected one of {sorted(_FORMS)}")
    kernel = RadialKernel.inverse_distance(delta) if kernel is None else kernel.with_delta(delta)
    _require_2d(kernel)
    single = np.ndim(xi) == 1
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    h = np.asarray(h, dtype=float)
    d = xi.shape[1]
    pb, pd, eb, ed = _FORMS[form](d)
    bond_coef, state_coef = _coefficients(kernel, material, m)
    quasi = form == "quasi_collocation"
    if quasi and quadset is None:
        raise ValueError("the quasi-discrete collocation form needs a QuadSet")
    if truncation == "auto":
        truncation = "poisson" if quasi else "shells"
    if truncation == "poisson":
        if not quasi:
            raise ValueError("Poisson resummation is implemented for the quasi-discrete form")
        bond, state = _poisson_sums(xi, h, kernel, quadset, bond_coef, state_coef, (pb, pd))
    elif truncation == "shells":
        if quasi:
            bond, state = _quasi_shell_sums(xi, h, kernel, quadset, bond_coef, state_coef, (pb, pd), tol, max_shells)
        else:
            bond, state = _shell_sums(xi, h, kernel, bond_coef, state_coef, (pb, pd), tol, max_shells)
    else:
        raise ValueError(f"unknown truncation {truncation!r}")
    if part not in ("full", "bond", "state"):
        raise ValueError(f"unknown part {part!r}")
    vol = float(np.prod(h))
    total = vol * (2.0**eb * bond * (part != "state") + 2.0**ed * state * (part != "bond"))
    total = 0.5 * (total + np.swapaxes(total, 1, 2))
    if single:
        return _symbol_matrix(total[0], xi[0])
    return total


def _quasi_shell_sums(xi, h, kernel, quadset, bond_coef, state_coef, powers, tol, max_shells):
    """Plain shell summation of the quasi-discrete form (slow: summands do not decay)."""
    n_xi, d = xi.shape
    pb, pd = powers
    pts, w = quadset.scaled(kernel.delta)
    bond = np.zeros((n_xi, d, d))
    state = np.zeros((n_xi, d, d))
    active = np.arange(n_xi)
    for n in range(max_shells + 1):
        r = _shell(n, d)
        x = xi[active]
        omega = ((x[:, None, :] + 2.0 * np.pi * r[None, :, :]) / h).reshape(-1, d)
        b_mat, s_mat = _direct_discrete(omega, pts, w, kernel, bond_coef, state_coef)
        db = np.einsum("nr,nrij->nij", _weights(x, r, pb), b_mat.reshape(x.shape[0], -1, d, d))
        ds = np.einsum("nr,nrij->nij", _weights(x, r, pd), s_mat.reshape(x.shape[0], -1, d, d))
        bond[active] += db
        state[active] += ds
        if n < 2:
            continue
        size = np.linalg.norm(bond[active], axis=(1, 2)) + np.linalg.norm(state[active], axis=(1, 2))
        change = np.linalg.norm(db, axis=(1, 2)) + np.linalg.norm(ds, axis=(1, 2))
        active = active[change > tol * np.maximum(size, np.finfo(float).tiny)]
        if active.size == 0:
            return bond, state
    raise NonconvergentSumError(
        f"lattice sum not converged after {max_shells} shells at {active.size} wave vectors"
    )


# ---------------------------------------------------------------------------
# stability scan


def scan_wavevectors(resolution=33, radial=64, directions=8):
    """Scan points in ``(-pi, pi)^2``.

    Returns
    -------
    grid : ndarray, shape (resolution**2 - 1, 2)
        Uniform grid of interior points without the origin.
    rays : ndarray, shape (radial * directions, 2)
        Log-spaced radii along equally spaced directions.
    """
    axis = np.linspace(-np.pi, np.pi, resolution + 2)[1:-1]
    mesh = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    grid = mesh[np.any(mesh != 0, axis=1)]
    angles = 2.0 * np.pi * np.arange(directions) / directions
    rays = []
    for a in angles:
        u = np.array([np.cos(a), np.sin(a)])
        reach = 0.999 * np.pi / np.max(np.abs(u))
        for rad in np.logspace(-3, np.log10(reach), radial):
            rays.append(rad * u)
    return grid, np.array(rays)


@dataclass
class ScanReport:
    """Result of :func:`stability_scan`.

    ``rows`` hold one record per (pair, wave vector); ``summary`` one
    record per (horizon, spacing) pair.
    """

    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    hypothesis_holds: bool = True
    notes: list = field(default_factory=list)

    @property
    def all_positive(self):
        return all(s["min_eig_S"] > 0 and s["min_eig_C"] > 0 and s["min_eig_Cq"] > 0 for s in self.summary)

    @property
    def generalized_ratio(self):
        """``min c / max c`` over the sweep."""
        cs = [s["c_gen"] for s in self.summary]
        return min(cs) / max(cs)

    def to_csv(self, path=None, header_lines=()):
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        cols = ["delta", "h1", "h2", "sample", "xi1", "xi2", "min_eig_S", "min_eig_C", "min_eig_Cq", "gen_eig"]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([row[c] if isinstance(row[c], str) else repr(float(row[c])) for c in cols])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def stability_scan(pairs, material, kernel=None, quadset=None, eps1=0.25, resolution=33, radial=64):
    """Positivity of the symbols over a wave-vector scan.

    For each ``(delta, h)`` pair and each scanned ``xi`` computes the
    smallest eigenvalues of the continuous symbol at ``xi / h``, of the
    collocation and quasi-discrete collocation lattice symbols, and the
    smallest generalized eigenvalue of the collocation symbol relative to
    the Galerkin symbol.  Violations are reported, never raised.

    Parameters
    ----------
    pairs : sequence of (float, sequence of float)
        Horizons and grid spacings.
    material : Material
    kernel : RadialKernel, optional
        Unit profile (default: unit-moment inverse distance).
    quadset : QuadSet, optional
        Built from ``eps1`` when omitted.

    Returns
    -------
    ScanReport
    """
    from .quad import build_quadset

    unit_kernel = RadialKernel.inverse_distance(1.0) if kernel is None else kernel.with_delta(1.0)
    if quadset is None:
        quadset = build_quadset(eps1, unit_kernel)
    report = ScanReport(hypothesis_holds=material.lam >= material.mu)
    if not report.hypothesis_holds:
        report.notes.append(
            f"lambda={material.lam:.6g} < mu={material.mu:.6g}: the positivity hypothesis lambda >= mu fails"
        )
    grid_xi, ray_xi = scan_wavevectors(resolution, radial)
    xis = np.vstack([grid_xi, ray_xi])
    tags = ["grid"] * len(grid_xi) + ["ray"] * len(ray_xi)
    for delta, h in pairs:
        h = np.asarray(h, dtype=float)
        k = unit_kernel.with_delta(delta)
        bond_coef, state_coef = _coefficients(k, material, None)
        b, s = _decomposed(xis / h, k, bond_coef, state_coef)
        eig_S = np.linalg.eigvalsh(b + s)[:, 0]
        MC = lattice_symbol(xis, delta, h, material, unit_kernel, "collocation")
        MG = lattice_symbol(xis, delta, h, material, unit_kernel, "galerkin")
        MQ = lattice_symbol(xis, delta, h, material, unit_kernel, "quasi_collocation", quadset=quadset)
        eig_C = np.linalg.eigvalsh(MC)[:, 0]
        eig_Q = np.linalg.eigvalsh(MQ)[:, 0]
        gen = np.array([linalg.eigh(c, g, eigvals_only=True)[0] for c, g in zip(MC, MG)])
        for i, xi in enumerate(xis):
            report.rows.append(
                {
                    "delta": delta,
                    "h1": h[0],
                    "h2": h[1],
                    "sample": tags[i],
                    "xi1": xi[0],
                    "xi2": xi[1],
                    "min_eig_S": eig_S[i],
                    "min_eig_C": eig_C[i],
                    "min_eig_Cq": eig_Q[i],
                    "gen_eig": gen[i],
                }
            )
        report.summary.append(
            {
                "delta": delta,
                "h_max": float(h.max()),
                "min_eig_S": float(eig_S.min()),
                "min_eig_C": float(eig_C.min()),
                "min_eig_Cq": float(eig_Q.min()),
                "c_gen": float(gen.min()),
                "n_xi": len(xis),
            }
        )
    return report
