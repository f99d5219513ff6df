"""Radial nonlocal kernels with horizon scaling and their moments.

A kernel is a unit-ball profile ``rho(t)`` on ``[0, 1)`` together with a
horizon ``delta``; the scaled kernel is

    rho_delta(r) = delta**-(d + 2) * rho(r / delta).

Three profile families are available:

``inverse_distance``
    ``c * t**-p`` (``p = 1`` by default; ``p = 1, c = 3/(2 pi)`` in two
    dimensions gives a kernel with unit second moment).
``constant``
    ``c``.
``polynomial``
    ``sum_i a_i t**i``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._validation import check_positive
from .exceptions import KernelError, KernelSingularityError, NonIntegrableKernelError

__all__ = [
    "RadialKernel",
    "KernelMoments",
    "kernel_value",
    "compute_moments",
    "sphere_area",
    "angular_fourth_moments",
]

_FAMILIES = ("inverse_distance", "constant", "polynomial")


def sphere_area(d):
    """Surface measure of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def angular_fourth_moments(d):
    """Matrix of sphere integrals of ``n_i**2 n_j**2``."""
    if d == 1:
        return np.array([[2.0]])
    if d == 2:
        return np.array([[3.0, 1.0], [1.0, 3.0]]) * math.pi / 4.0
    if d == 3:
        return (np.full((3, 3), 1.0) + 2.0 * np.eye(3)) * 4.0 * math.pi / 15.0
    raise ValueError(f"unsupported dimension {d}")


@dataclass(frozen=True)
class RadialKernel:
    """Scaled radial kernel ``rho_delta``.

    Parameters
    ----------
    family : str
        One of ``"inverse_distance"``, ``"constant"``, ``"polynomial"``.
    coefficients : tuple of float
        ``(c,)`` for the first two families, ``(a_0, a_1, ...)`` for
        polynomials.
    delta : float
        Horizon.
    dim : int
        Spatial dimension (2 or 3; 1 is accepted for testing).
    power : float
        Exponent ``p`` of the inverse-distance family.
    """

    family: str = "inverse_distance"
    coefficients: tuple = (3.0 / (2.0 * math.pi),)
    delta: float = 1.0
    dim: int = 2
    power: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}; expected one of {_FAMILIES}")
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coefficients))
        object.__setattr__(self, "coefficients", coeffs)
        check_positive(self.delta, "delta")
        if self.dim not in (1, 2, 3):
            raise KernelError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.family in ("inverse_distance", "constant"):
            if len(coeffs) != 1 or coeffs[0] <= 0:
                raise KernelError(f"{self.family} profile needs one positive coefficient")
            if self.family == "inverse_distance" and self.power < 0:
                raise KernelError("inverse-distance power must be nonnegative")
        else:
            t = np.linspace(0.0, 1.0, 1001)[:-1]
            vals = np.polynomial.polynomial.polyval(t, coeffs)
            if np.any(vals < -1e-14) or np.any(np.diff(vals) > 1e-12):
                raise KernelError("polynomial profile must be nonnegative and nonincreasing on [0, 1)")

    @classmethod
    def inverse_distance(cls, delta, dim=2, scale=None, power=1.0):
        """Inverse-distance kernel; default scale ``3/(2 pi)`` in 2D (unit second moment)."""
        if scale is None:
            scale = 1.0 / (sphere_area(dim) * _monomial_integral(dim + 1 - power))
        return cls("inverse_distance", (scale,), delta, dim, power)

    @property
    def singular(self):
        return self.family == "inverse_distance" and self.power > 0

    def with_delta(self, delta):
        return RadialKernel(self.family, self.coefficients, delta, self.dim, self.power)

    def profile(self, t):
        """Unit profile ``rho(t)``, zero for ``t >= 1``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = (t < 1.0) & (t >= 0.0)
        ti = t[inside]
        if self.family == "inverse_distance":
            with np.errstate(divide="ignore"):
                out[inside] = self.coefficients[0] * ti ** (-self.power)
        elif self.family == "constant":
            out[inside] = self.coefficients[0]
        else:
            out[inside] = np.polynomial.polynomial.polyval(ti, self.coefficients)
        return out

    def __call__(self, r):
        """Scaled kernel ``rho_delta(r)`` (vectorized, no singularity check)."""
        r = np.asarray(r, dtype=float)
        return self.delta ** (-(self.dim + 2)) * self.profile(r / self.delta)

    def radial_integral(self, n):
        """``int_0^1 rho(t) t**n dt`` for the unit profile."""
        if self.family == "inverse_distance":
            return self.coefficients[0] * _monomial_integral(n - self.power)
        if self.family == "constant":
            return self.coefficients[0] * _monomial_integral(n)
        return sum(a * _monomial_integral(n + i) for i, a in enumerate(self.coefficients))


def _monomial_integral(n):
    """``int_0^1 t**n dt``; diverges for ``n <= -1``."""
    if n <= -1:
        raise NonIntegrableKernelError(f"radial integral of t^{n} diverges at the origin")
    return 1.0 / (n + 1.0)


def kernel_value(kernel, r):
    """Scaled kernel value ``delta**-(d+2) rho(r/delta)``.

    Raises
    ------
    KernelSingularityError
        If ``r == 0`` for a singular profile.
    ValueError
        If ``r`` is negative.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("kernel distance must be nonnegative")
    if kernel.singular and np.any(r_arr == 0):
        raise KernelSingularityError("singular kernel profile evaluated at r = 0")
    out = kernel(r_arr)
    return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class KernelMoments:
    """Moments of a scaled kernel.

    Attributes
    ----------
    m : float
        Weighted volume ``int rho_delta |s|^2 ds``.
    M4 : ndarray, shape (d, d)
        ``int rho_delta s_i^2 s_j^2 / |s|^2 ds``.
    M6 : float
        ``int rho_delta |s|^4 ds`` (proportional to ``delta**2``).
    """

    m: float
    M4: np.ndarray
    M6: float


def compute_moments(kernel, numeric=False):
    """Moments of ``kernel``.

    Closed-form radial integrals are used for the built-in families; with
    ``numeric=True`` the radial integrals are instead computed by adaptive
    quadrature (relative tolerance 1e-12), which serves as a cross-check.

    Raises
    ------
    NonIntegrableKernelError
        If the second moment diverges.
    """
    d = kernel.dim
    if numeric:
        radial = lambda n: _numeric_radial(kernel, n)  # noqa: E731
    else:
        radial = kernel.radial_integral
    i2 = radial(d + 1)
    i4 = radial(d + 3)
    m = sphere_area(d) * i2
    if not np.isfinite(m) or m <= 0:
        raise NonIntegrableKernelError("kernel second moment is not finite and positive")
    M4 = i2 * angular_fourth_moments(d)
    M6 = kernel.delta**2 * sphere_area(d) * i4
    return KernelMoments(m=float(m), M4=M4, M6=float(M6))


def _numeric_radial(kernel, n):
    if kernel.family == "inverse_distance" and n - kernel.power <= -1:
        raise NonIntegrableKernelError("radial moment diverges at the origin")
    f = lambda t: float(kernel.profile(np.array(t)) * t**n)  # noqa: E731
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return val
