"""Scikit-learn style front end for the collocation solver."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import assembly
from ._validation import check_points
from .grid import DomainBox, build_grid
from .kernel import RadialKernel
from .nlops import Material
from .quad import build_quadset, polar_rule
from .rkbasis import quasi_interpolant

__all__ = ["RKCollocationSolver"]


class RKCollocationSolver(BaseEstimator):
    """Collocation solver for the peridynamic Navier equation on a box.

    Parameters
    ----------
    h_max : float
        Largest grid spacing.
    delta : float
        Horizon.
    h_hat : tuple of float
        Spacing direction (largest entry 1).
    mode : {"continuous", "quasi"}
        Ball integrals by polar quadrature, or moment-matched point sums.
    epsilon1 : float
        Lattice spacing of the quasi-discrete point set.
    E, nu : float
        Young's modulus and Poisson ratio (plane strain).
    lower, upper : tuple of float
        Domain corners.
    method : {"auto", "explicit", "operator"}
        System representation (see :func:`peridyn_rk.assembly.assemble`).
    allow_thin_layer : bool
        Permit horizons below half the spacing.

    Attributes
    ----------
    grid_ : GridSpec
    coef_ : ndarray, shape (2, *grid_.shape)
        Nodal coefficients, boundary values included.
    report_ : SolveReport
    material_ : Material

    Examples
    --------
    >>> import numpy as np
    >>> solver = RKCollocationSolver(h_max=1/8, delta=1/4)
    >>> zero = lambda x: np.zeros_like(x)
    >>> shift = lambda x: np.ones_like(x)
    >>> solver.fit(zero, shift).predict([[0.5, 0.5]]).round(12)
    array([[1., 1.]])
    """

    def __init__(
        self,
        h_max=1 / 16,
        delta=0.25,
        h_hat=(1.0, 0.5),
        mode="continuous",
        epsilon1=0.25,
        E=1.0,
        nu=0.4,
        lower=(0.0, 0.0),
        upper=(1.0, 1.0),
        method="auto",
        allow_thin_layer=False,
    ):
        self.h_max = h_max
        self.delta = delta
        self.h_hat = h_hat
        self.mode = mode
        self.epsilon1 = epsilon1
        self.E = E
        self.nu = nu
        self.lower = lower
        self.upper = upper
        self.method = method
        self.allow_thin_layer = allow_thin_layer

    def fit(self, rhs, boundary):
        """Assemble and solve ``-L u = rhs`` with ``u = boundary`` on the constrained nodes.

        Parameters
        ----------
        rhs : callable
            Body force, ``(n, 2) -> (n, 2)``.
        boundary : callable
            Prescribed displacement, evaluated at every constrained node.

        Returns
        -------
        self
        """
        if self.mode not in ("continuous", "quasi"):
            raise ValueError(f"mode must be 'continuous' or 'quasi', got {self.mode!r}")
        domain = DomainBox(self.lower, self.upper)
        grid = build_grid(domain, self.h_max, self.h_hat, self.delta, self.allow_thin_layer)
        kernel = RadialKernel.inverse_distance(self.delta, dim=domain.dim)
        material = Material.from_engineering(self.E, self.nu, dim=domain.dim)
        if self.mode == "quasi":
            integration = build_quadset(self.epsilon1, kernel.with_delta(1.0))
        else:
            integration = polar_rule(self.delta, grid.h_min, dim=domain.dim, grid_h=grid.h)
        system = assembly.assemble(grid, kernel, material, integration, rhs, boundary, method=self.method)
        self.coef_, self.report_ = assembly.solve(system)
        self.grid_ = grid
        self.material_ = material
        self.n_dof_ = system.n_dof
        return self

    def predict(self, X):
        """Displacement of the fitted trial field at points ``X`` of shape ``(n, 2)``."""
        check_is_fitted(self, "coef_")
        X = check_points(X, self.grid_.dim, "X")
        return quasi_interpolant(self.grid_, self.coef_, X)

    def score(self, X, y):
        """Negative root-mean-square displacement error at ``X`` against ``y``."""
        pred = self.predict(X)
        y = np.asarray(y, dtype=float).reshape(pred.shape)
        return -float(np.sqrt(np.mean(np.sum((pred - y) ** 2, axis=1))))

    def error(self, exact):
        """``L^2(Omega)`` error of the fitted field against a callable."""
        check_is_fitted(self, "coef_")
        return assembly.l2_error(self.grid_, self.coef_, exact)
