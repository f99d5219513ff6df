"""Manufactured solutions and convergence studies on the unit square.

The manufactured displacement is

    u(x) = (x1**2 (1 - x1)**2 + x2**2 (1 - x2)**2, 0)

with the unit-moment inverse-distance kernel and ``E = 1``, ``nu = 0.4``.
Its local body force follows from symbolic differentiation, and because
``u`` is a quartic the nonlocal body force differs from the local one by
the constant ``(18 lam delta**2 / 5, 0)``.
"""

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import assembly
from .exceptions import LadderError
from .grid import build_grid, unit_square
from .kernel import RadialKernel, compute_moments
from .nlops import Material, TrialField, apply_navier
from .quad import build_quadset, polar_rule
from .rkbasis import norm_h
from .symbols import local_symbol, navier_symbol

__all__ = [
    "ManufacturedCase",
    "ConvergenceEntry",
    "ConvergenceRecord",
    "CosineField",
    "COUPLINGS",
    "exact_u",
    "rhs_local",
    "rhs_nonlocal",
    "nonlocal_shift",
    "coupled_delta",
    "run_convergence",
    "solve_case",
    "truncation_study",
    "validate_ladder",
]

COUPLINGS = ("fixed", "h", "h2", "sqrt", "quasi")


def exact_u(x):
    """Manufactured displacement at points ``x`` of shape ``(n, 2)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2 = x[:, 0], x[:, 1]
    first = x1**2 * (1.0 - x1) ** 2 + x2**2 * (1.0 - x2) ** 2
    return np.stack([first, np.zeros_like(first)], axis=1)


def exact_hessian(x):
    """Second derivatives ``H[n, c, a, b]`` of :func:`exact_u`."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    H = np.zeros((x.shape[0], 2, 2, 2))
    H[:, 0, 0, 0] = 2.0 - 12.0 * x[:, 0] + 12.0 * x[:, 0] ** 2
    H[:, 0, 1, 1] = 2.0 - 12.0 * x[:, 1] + 12.0 * x[:, 1] ** 2
    return H


def rhs_local(x, material):
    """Local body force ``-(mu Lap u + (mu + lam) grad div u)`` of the manufactured solution."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2 = x[:, 0], x[:, 1]
    lam, mu = material.lam, material.mu
    first = 2.0 * lam * (1.0 - 6.0 * x1 + 6.0 * x1**2) + 6.0 * mu * (1.0 - 4.0 * x1 + 4.0 * x1**2 - 2.0 * x2 + 2.0 * x2**2)
    return -np.stack([first, np.zeros_like(first)], axis=1)


def nonlocal_shift(delta, material):
    """Constant ``rhs_nonlocal - rhs_local`` for the manufactured solution."""
    return np.array([-18.0 * material.lam * delta**2 / 5.0, 0.0])


def rhs_nonlocal(x, delta, material, kernel=None, integration=None, closed_form=False):
    """Nonlocal body force ``-L_delta u`` of the manufactured solution.

    By default the operator is applied to ``u`` by polar quadrature, which
    is exact up to roundoff along the rays for this quartic.  With
    ``closed_form=True`` the constant shift of :func:`nonlocal_shift` is
    added to the local force instead.
    """
    if closed_form:
        return rhs_local(x, material) + nonlocal_shift(delta, material)
    kernel = RadialKernel.inverse_distance(delta) if kernel is None else kernel.with_delta(delta)
    if integration is None:
        integration = polar_rule(delta, 2.0 * delta)
    m = compute_moments(kernel).m
    return -apply_navier(exact_u, x, integration, kernel, material, m)


@dataclass
class ManufacturedCase:
    """Manufactured problem: displacement, material and kernel profile."""

    material: Material = field(default_factory=lambda: Material.from_engineering(1.0, 0.4))
    kernel: RadialKernel = field(default_factory=lambda: RadialKernel.inverse_distance(1.0))

    def exact(self, x):
        return exact_u(x)

    def hessian(self, x):
        return exact_hessian(x)

    def f_local(self, x):
        return rhs_local(x, self.material)

    def f_nonlocal(self, x, delta):
        return rhs_local(x, self.material) + nonlocal_shift(delta, self.material)

    def notices(self):
        """Documented departures from the printed formulas."""
        return [
            "local body force uses 6*x1**2 in the lambda term, as symbolic differentiation of u requires",
            "the boundary data are x1**2 (1 - x1)**2 + x2**2 (1 - x2)**2, matching the manufactured u",
        ]


def coupled_delta(coupling, h_max, delta=0.25, m0=2.0):
    """Horizon for a coupling rule at spacing ``h_max``."""
    if coupling == "fixed":
        return float(delta)
    if coupling == "h":
        return float(h_max)
    if coupling == "h2":
        return float(h_max) ** 2
    if coupling == "sqrt":
        return math.sqrt(h_max)
    if coupling == "quasi":
        return float(m0) * h_max
    raise ValueError(f"unknown coupling {coupling!r}; expected one of {COUPLINGS}")


def validate_ladder(ladder, min_points=3):
    """Check that ``ladder`` has at least ``min_points`` entries, each half the previous."""
    ladder = [float(h) for h in ladder]
    if len(ladder) < min_points:
        raise LadderError(f"a ladder needs at least {min_points} spacings, got {len(ladder)}")
    for a, b in zip(ladder, ladder[1:]):
        if not abs(a / b - 2.0) < 1e-9:
            raise LadderError(f"ladder entries must halve: {a} -> {b}")
    return ladder


@dataclass
class ConvergenceEntry:
    h_max: float
    delta: float
    eps1: float
    dofs: int
    l2_error: float
    rate: float
    wall_seconds: float
    exact_error: float = float("nan")
    solver: str = ""
    iterations: int = 0


@dataclass
class ConvergenceRecord:
    """Errors along a ladder with pairwise rates and a least-squares slope."""

    coupling: str
    entries: list = field(default_factory=list)
    reference: str = ""

    @property
    def errors(self):
        return np.array([e.l2_error for e in self.entries])

    @property
    def rates(self):
        return np.array([e.rate for e in self.entries[1:]])

    @property
    def slope(self):
        """Least-squares slope of ``log e`` against ``log h``."""
        h = np.log([e.h_max for e in self.entries])
        err = np.log(self.errors)
        return float(np.polyfit(h, err, 1)[0])

    @property
    def monotone(self):
        err = self.errors
        return bool(np.all(err[1:] < err[:-1]))

    def to_csv(self, path=None, header_lines=(), timing=False):
        """CSV rows ``coupling, h_max, delta, epsilon1, dofs, l2_error, rate, wall_seconds``.

        Wall times are written as ``NA`` unless ``timing`` is set, so that
        repeated runs produce identical files.
        """
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["coupling", "h_max", "delta", "epsilon1", "dofs", "l2_error", "rate", "wall_seconds"])
        for e in self.entries:
            writer.writerow(
                [
                    self.coupling,
                    repr(e.h_max),
                    repr(e.delta),
                    "NA" if math.isnan(e.eps1) else repr(e.eps1),
                    e.dofs,
                    f"{e.l2_error:.12e}",
                    "NA" if math.isnan(e.rate) else f"{e.rate:.6f}",
                    f"{e.wall_seconds:.3f}" if timing else "NA",
                ]
            )
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def solve_case(h_max, delta, case=None, h_hat=(1.0, 0.5), quadset=None, nonlocal_rhs=True, method="auto"):
    """Solve the manufactured problem once.

    Parameters
    ----------
    h_max, delta : float
    case : ManufacturedCase, optional
    h_hat : sequence of float
    quadset : QuadSet, optional
        Use the quasi-discrete operator with this point set.
    nonlocal_rhs : bool
        Use the nonlocal body force (the manufactured ``u`` is then the
        exact nonlocal solution); otherwise the local one.
    method : str
        Assembly method passed to :func:`peridyn_rk.assembly.assemble`.

    Returns
    -------
    grid : GridSpec
    coeffs : ndarray
    report : SolveReport
    """
    case = ManufacturedCase() if case is None else case
    grid = build_grid(unit_square(), h_max, h_hat, delta, allow_thin_layer=True)
    kernel = case.kernel.with_delta(delta)
    if quadset is None:
        integration = polar_rule(delta, grid.h_min, grid_h=grid.h)
    else:
        integration = quadset
    if nonlocal_rhs:
        rhs = lambda x: case.f_nonlocal(x, delta)  # noqa: E731
    else:
        rhs = case.f_local
    system = assembly.assemble(grid, kernel, case.material, integration, rhs, case.exact, method=method)
    coeffs, report = assembly.solve(system)
    return grid, coeffs, report


def run_convergence(coupling, ladder, case=None, delta=0.25, m0=2.0, eps1=0.25, h_hat=(1.0, 0.5), reference_factor=4):
    """Convergence study for one horizon/spacing coupling.

    ``"fixed"`` keeps ``delta`` fixed, uses the nonlocal body force and
    measures errors against a reference solve on a grid ``reference_factor``
    times finer than the finest ladder entry.  All other couplings use the
    local body force and measure errors against the manufactured solution.
    ``"quasi"`` uses ``delta = m0 * h_max`` and the quasi-discrete operator
    with lattice spacing ``eps1``.

    Returns
    -------
    ConvergenceRecord
    """
    if coupling not in COUPLINGS:
        raise ValueError(f"unknown coupling {coupling!r}; expected one of {COUPLINGS}")
    ladder = validate_ladder(ladder)
    case = ManufacturedCase() if case is None else case
    quadset = build_quadset(eps1, case.kernel) if coupling == "quasi" else None
    record = ConvergenceRecord(coupling)

    reference = None
    if coupling == "fixed":
        h_ref = min(ladder) / reference_factor
        ref_grid, ref_coeffs, _ = solve_case(h_ref, delta, case, h_hat)
        reference = TrialField(ref_grid, ref_coeffs)
        record.reference = f"reference solve at h_max={h_ref}"
    else:
        record.reference = "manufactured solution"

    prev = None
    for h in ladder:
        start = time.perf_counter()
        dl = coupled_delta(coupling, h, delta, m0)
        grid, coeffs, report = solve_case(h, dl, case, h_hat, quadset, nonlocal_rhs=coupling == "fixed")
        exact_err = assembly.l2_error(grid, coeffs, case.exact)
        err = assembly.l2_error(grid, coeffs, reference) if reference is not None else exact_err
        rate = math.log2(prev / err) if prev is not None else float("nan")
        record.entries.append(
            ConvergenceEntry(
                h_max=h,
                delta=dl,
                eps1=float(eps1) if coupling == "quasi" else float("nan"),
                dofs=grid.dim * grid.n_unknown,
                l2_error=err,
                rate=rate,
                wall_seconds=time.perf_counter() - start,
                exact_error=exact_err,
                solver=report.method,
                iterations=report.iterations,
            )
        )
        prev = err
    return record


class CosineField:
    """Vector field ``sum_k a_k cos(xi_k . x + phase_k)``.

    Translation-invariant operators act on each term through their symbol,
    which gives exact nonlocal operator values for smooth test fields.
    """

    def __init__(self, amplitudes, wavevectors, phases):
        self.amplitudes = np.atleast_2d(np.asarray(amplitudes, dtype=float))
        self.wavevectors = np.atleast_2d(np.asarray(wavevectors, dtype=float))
        self.phases = np.atleast_1d(np.asarray(phases, dtype=float))

    @classmethod
    def sine_product(cls):
        """``(sin(pi x1) sin(pi x2), sin(pi x1) sin(pi x2))``."""
        amp = np.array([[0.5, 0.5], [-0.5, -0.5]])
        xi = np.pi * np.array([[1.0, -1.0], [1.0, 1.0]])
        return cls(amp, xi, [0.0, 0.0])

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.cos(x @ self.wavevectors.T + self.phases) @ self.amplitudes

    def apply_symbol(self, x, symbol):
        """``-sum_k M(xi_k) a_k cos(xi_k . x + phase_k)`` for a symbol callable ``M``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        mapped = np.array([symbol(xi) @ a for xi, a in zip(self.wavevectors, self.amplitudes)])
        return -np.cos(x @ self.wavevectors.T + self.phases) @ mapped


def _residual_norm(grid, values):
    """``norm_h`` of nodal values on the unknown nodes (zero elsewhere)."""
    box = np.zeros((grid.dim,) + grid.shape)
    box[(slice(None),) + grid.unknown_slices] = values
    return norm_h(grid, box)


def _discrete_residual(field_, h, delta, case, h_hat, integration_for, target_symbol):
    grid = build_grid(unit_square(), h, h_hat, delta, allow_thin_layer=True)
    kernel = case.kernel.with_delta(delta)
    integration = integration_for(grid, kernel)
    _, combined, m = assembly.operator_stencils(grid, kernel, integration, case.material)
    discrete = assembly.apply_at_nodes(grid, combined, grid.sample(field_))
    pts = grid.node_points("unknown")
    target = field_.apply_symbol(pts, lambda xi: target_symbol(xi, kernel, integration, m))
    target = np.moveaxis(target, 1, 0).reshape(discrete.shape)
    return _residual_norm(grid, discrete - target)


def truncation_study(field_=None, delta=0.25, ladder=(1 / 8, 1 / 16, 1 / 32, 1 / 64), case=None, m0=2.0, eps1=0.25, h_hat=(1.0, 0.5)):
    """Consistency residuals of the discrete operators on a smooth field.

    Three residual families are tabulated, each as ``norm_h`` of the nodal
    residual on the nodes inside the domain:

    ``uniform``
        ``L_delta Pi^h u - L_delta u`` at fixed ``delta``.
    ``asymptotic``
        ``L_delta Pi^h u - L_0 u`` with ``delta = h_max``.
    ``quasi``
        ``L_{delta,eps} Pi^h u - L_0 u`` with ``delta = m0 h_max``.

    The exact operator values come from the Fourier symbols applied to the
    plane waves of ``field_``.

    Returns
    -------
    dict
        Maps the family name to a :class:`ConvergenceRecord` whose
        ``l2_error`` column holds the residual norms.
    """
    field_ = CosineField.sine_product() if field_ is None else field_
    case = ManufacturedCase() if case is None else case
    ladder = validate_ladder(ladder)
    mat = case.material
    quadset = build_quadset(eps1, case.kernel)

    def continuous(grid, kernel):
        return polar_rule(kernel.delta, grid.h_min, grid_h=grid.h)

    def quasi(grid, kernel):
        return quadset

    def nonlocal_symbol(xi, kernel, integration, m):
        return navier_symbol(xi, kernel, mat, m, route="decomposition").matrix

    def local(xi, kernel, integration, m):
        return local_symbol(xi, mat)

    studies = {
        "uniform": (lambda h: delta, continuous, nonlocal_symbol, float("nan")),
        "asymptotic": (lambda h: h, continuous, local, float("nan")),
        "quasi": (lambda h: m0 * h, quasi, local, float(eps1)),
    }
    out = {}
    for name, (delta_of, integ, target, eps) in studies.items():
        record = ConvergenceRecord(name, reference="symbol of the target operator")
        prev = None
        for h in ladder:
            start = time.perf_counter()
            dl = delta_of(h)
            res = _discrete_residual(field_, h, dl, case, h_hat, integ, target)
            rate = math.log2(prev / res) if prev is not None else float("nan")
            record.entries.append(
                ConvergenceEntry(h, dl, eps, 0, res, rate, time.perf_counter() - start)
            )
            prev = res
        out[name] = record
    return out
