"""Assembly and solution of the collocation systems.

Unknowns are the nodal coefficients of the unknown nodes, ordered
component-major: row ``c * n_nodes + p`` holds component ``c`` of the
unknown node with lexicographic position ``p``.  Constrained nodes carry
the prescribed boundary values, and their contribution is moved to the
right-hand side.

Two interchangeable representations of the operator are available:

``explicit``
    A sparse matrix built from the bond stencil and the explicit product
    of the sparse gradient and divergence factors.
``operator``
    A matrix-free operator applying the combined stencil by FFT
    convolution.  Used when the explicit matrix would not fit in memory
    (large horizons relative to the spacing).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .exceptions import SingularMatrixError, StagnationError
from .kernel import compute_moments
from .rkbasis import cell_gauss_values
from .stencils import compute_stencils, navier_stencil

__all__ = [
    "SparseSystem",
    "SolveReport",
    "assemble",
    "solve",
    "l2_error",
    "operator_stencils",
    "estimate_nnz",
    "apply_at_nodes",
]

# explicit matrices above this many stored entries use the FFT operator
DEFAULT_MAX_NNZ = 1_000_000


@dataclass
class SolveReport:
    """Outcome of a linear solve.

    Attributes
    ----------
    method : str
        ``"direct"`` or ``"gmres"``.
    residual : float
        Relative residual ``|b - A x| / |b|``.
    iterations : int
        Krylov iterations (0 for the direct path).
    fill : int
        Stored entries of the LU factors (0 for the iterative path).
    wall_seconds : float
    """

    method: str
    residual: float
    iterations: int = 0
    fill: int = 0
    wall_seconds: float = 0.0


@dataclass
class SparseSystem:
    """Collocation system ``A x = b`` over the unknown degrees of freedom.

    Attributes
    ----------
    matrix : sparse matrix or LinearOperator
        Square system operator.
    rhs : ndarray
    grid : GridSpec or None
        Grid of the unknowns; ``None`` for a bare algebraic system.
    boundary : ndarray or None
        Box-shaped nodal coefficients ``(d, *grid.shape)`` holding the
        prescribed constrained values (zero on unknown nodes).
    kind : str
        ``"explicit"`` or ``"operator"``.
    preconditioner : LinearOperator or None
        Approximate inverse used by the iterative path.
    m : float
        Weighted volume used in the operator coefficients.
    """

    matrix: object
    rhs: np.ndarray
    grid: object = None
    boundary: np.ndarray = None
    kind: str = "explicit"
    preconditioner: object = None
    m: float = 1.0
    info: dict = field(default_factory=dict)

    @property
    def n_dof(self):
        return int(self.rhs.shape[0])

    def dof_index(self, node, component):
        """Row of component ``component`` at unknown node multi-index ``node``."""
        pos = np.ravel_multi_index(tuple(k - 1 for k in node), self.grid.unknown_shape)
        return component * self.grid.n_unknown + int(pos)

    def dof_node(self, row):
        """Inverse of :meth:`dof_index`: ``(node multi-index, component)``."""
        component, pos = divmod(int(row), self.grid.n_unknown)
        idx = np.unravel_index(pos, self.grid.unknown_shape)
        return tuple(int(i) + 1 for i in idx), component

    def apply(self, x):
        return self.matrix @ np.asarray(x, dtype=float)

    def to_coo(self, path=None):
        """Coordinate listing ``row col value`` of the matrix, then ``row rhs``.

        Only available for explicit systems.  Returns the text when ``path``
        is None.
        """
        if self.kind != "explicit":
            raise TypeError("coordinate export needs an explicit matrix")
        coo = sparse.coo_matrix(self.matrix)
        order = np.lexsort((coo.col, coo.row))
        lines = [f"# n={self.n_dof} nnz={coo.nnz}"]
        lines += [f"{r} {c} {v:.17g}" for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order])]
        lines.append("# rhs")
        lines += [f"{i} {v:.17g}" for i, v in enumerate(self.rhs)]
        text = "\n".join(lines) + "\n"
        if path is None:
            return text
        with open(path, "w") as fh:
            fh.write(text)
        return None


def _box_strides(shape):
    return np.array([int(np.prod(shape[j + 1 :])) for j in range(len(shape))], dtype=np.int64)


def _unknown_box_flat(grid):
    """Flat box positions of the unknown nodes, in lexicographic order."""
    idx = np.indices(grid.unknown_shape).reshape(grid.dim, -1).T
    pos = idx + np.array([s.start for s in grid.unknown_slices])
    return pos @ _box_strides(grid.shape)


def _offset_entries(block, radius, box_strides):
    """Nonzero entries of a centred stencil as ``(flat offsets, values)``."""
    nz = np.nonzero(block)
    offs = np.stack(nz, axis=1) - np.asarray(radius)
    return offs @ box_strides, block[nz]


def _stencil_matrix(blocks, radius, row_nodes, n_box, box_strides, n_out_comp, n_in_comp):
    """Sparse matrix ``M[(c_out, row), (c_in, col)] = S_{c_out c_in}(row - col)``.

    ``row_nodes`` are box flat positions of the row nodes; columns index the
    whole box, component-major.
    """
    rows, cols, vals = [], [], []
    n_rows = row_nodes.size
    for a in range(n_out_comp):
        for b in range(n_in_comp):
            offs, v = _offset_entries(blocks[a][b], radius, box_strides)
            if offs.size == 0:
                continue
            r = np.repeat(np.arange(n_rows), offs.size)
            c = (row_nodes[:, None] - offs[None, :]).ravel()
            rows.append(r + a * n_rows)
            cols.append(c + b * n_box)
            vals.append(np.tile(v, n_rows))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_out_comp * n_rows, n_in_comp * n_box),
    )


def operator_stencils(grid, kernel, integration, material, m=None):
    """Stencils and combined Navier stencil for a grid.

    Returns
    -------
    stencils : OperatorStencils
    combined : ndarray, shape (d, d, *(4R + 1))
    m : float
    """
    if m is None:
        m = compute_moments(kernel).m
    st = compute_stencils(grid.h, kernel, integration)
    combined = navier_stencil(st, material.bond_coefficient(m), material.state_coefficient(m))
    return st, combined, m


def estimate_nnz(grid):
    """Upper bound for the stored entries of the explicit system matrix."""
    R = grid.stencil_radius
    per_row = grid.dim * int(np.prod([4 * r + 1 for r in R]))
    return grid.dim * grid.n_unknown * per_row


def assemble(
    grid,
    kernel,
    material,
    integration,
    rhs,
    boundary,
    mode=None,
    method="auto",
    max_nnz=DEFAULT_MAX_NNZ,
    m=None,
):
    """Assemble the collocation system ``-r^h L u = r^h f``.

    Parameters
    ----------
    grid : GridSpec
    kernel : RadialKernel
        Scaled kernel; its horizon must match ``grid.delta``.
    material : Material
    integration : PolarRule or QuadSet
        Continuous operators use a polar rule, quasi-discrete operators a
        moment-matched point set.
    rhs : callable
        Body force, maps ``(n, d)`` points to ``(n, d)``.
    boundary : callable or ndarray
        Prescribed values on constrained nodes, as a callable evaluated at
        the nodes or as a box-shaped nodal array ``(d, *grid.shape)``.
    mode : {"continuous", "quasi"}, optional
        Checked against ``integration`` when given.
    method : {"auto", "explicit", "operator"}
        Representation of the system operator.  ``"auto"`` chooses the
        explicit matrix when :func:`estimate_nnz` is below ``max_nnz``.
    m : float, optional
        Weighted volume; defaults to the kernel's computed second moment.

    Returns
    -------
    SparseSystem
    """
    from .nlops import _check_mode

    _check_mode(mode, integration)
    if abs(kernel.delta - grid.delta) > 1e-12 * grid.delta:
        raise ValueError(f"kernel horizon {kernel.delta} differs from grid horizon {grid.delta}")
    if method not in ("auto", "explicit", "operator"):
        raise ValueError(f"unknown assembly method {method!r}")
    d = grid.dim
    st, combined, m = operator_stencils(grid, kernel, integration, material, m)

    if callable(boundary):
        g = grid.sample(boundary)
    else:
        g = np.array(boundary, dtype=float, copy=True)
    if g.shape != (d,) + grid.shape:
        raise ValueError(f"boundary data must have shape {(d,) + grid.shape}, got {g.shape}")
    g[(slice(None),) + grid.unknown_slices] = 0.0
    f = grid.sample(rhs, region="unknown").reshape(d, -1)

    if method == "auto":
        method = "explicit" if estimate_nnz(grid) <= max_nnz else "operator"
    if method == "explicit":
        system = _assemble_explicit(grid, st, material, m, g, f)
    else:
        system = _assemble_operator(grid, combined, g, f)
    system.m = m
    system.info["stencil_radius"] = st.radius
    return system


def _assemble_explicit(grid, st, material, m, g, f):
    d = grid.dim
    shape = grid.shape
    strides = _box_strides(shape)
    n_box = int(np.prod(shape))
    unknown = _unknown_box_flat(grid)
    R = st.radius

    bond = _stencil_matrix(st.bond, R, unknown, n_box, strides, d, d)
    # nodes reached by the gradient stencil from any unknown node
    lo = np.array([s.start for s in grid.unknown_slices]) - np.asarray(R)
    hi = np.array([s.stop for s in grid.unknown_slices]) - 1 + np.asarray(R)
    idx = np.indices(tuple(hi - lo + 1)).reshape(d, -1).T + lo
    theta_nodes = idx @ strides
    grad = _stencil_matrix([[st.div[i]] for i in range(d)], R, unknown, n_box, strides, d, 1)
    grad = grad[:, theta_nodes]
    div = _stencil_matrix([st.div], R, theta_nodes, n_box, strides, 1, d)
    full = material.bond_coefficient(m) * bond + material.state_coefficient(m) * (grad @ div)
    full = full.tocsc()

    cols_unknown = np.concatenate([unknown + c * n_box for c in range(d)])
    mask = np.ones(d * n_box, dtype=bool)
    mask[cols_unknown] = False
    A_u = full[:, cols_unknown]
    A_c = full[:, mask]
    b = f.ravel() + A_c @ g.reshape(-1)[mask]
    matrix = (-A_u).tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    system = SparseSystem(matrix=matrix, rhs=b, grid=grid, boundary=g, kind="explicit")
    system.info["factors"] = {"grad": grad, "div": div, "bond": bond}
    return system


class _FFTOperator(splinalg.LinearOperator):
    """``x -> -(T * x)`` restricted to the unknown nodes, by FFT convolution."""

    def __init__(self, combined, unknown_shape):
        d = combined.shape[0]
        self.d = d
        self.unknown_shape = tuple(unknown_shape)
        self.half = tuple((s - 1) // 2 for s in combined.shape[2:])
        self.fft_shape = tuple(u + 2 * r for u, r in zip(unknown_shape, self.half))
        self.fft_shape = tuple(sfft.next_fast_len(n, real=True) for n in self.fft_shape)
        axes = tuple(range(-d, 0))
        self.axes = axes
        self.symbols = sfft.rfftn(combined, s=self.fft_shape, axes=axes)
        self.window = tuple(slice(r, r + u) for r, u in zip(self.half, unknown_shape))
        n = d * int(np.prod(unknown_shape))
        super().__init__(dtype=np.float64, shape=(n, n))

    def convolve(self, field):
        """Full stencil convolution of ``(d, *shape)`` data, cropped to the unknowns."""
        spectrum = sfft.rfftn(field, s=self.fft_shape, axes=self.axes)
        out = np.einsum("ic...,c...->i...", self.symbols, spectrum)
        res = sfft.irfftn(out, s=self.fft_shape, axes=self.axes)
        return res

    def _matvec(self, x):
        u = np.asarray(x, dtype=float).reshape((self.d,) + self.unknown_shape)
        res = self.convolve(u)
        return -res[(slice(None),) + self.window].reshape(-1)


class _DiagonalSinePreconditioner(splinalg.LinearOperator):
    """Inverse of the diagonal blocks ``-T_ii`` diagonalized by the sine transform.

    Exact for stencils of half width one; otherwise an approximation that
    captures the interior spectrum.
    """

    def __init__(self, combined, unknown_shape):
        d = combined.shape[0]
        self.d = d
        self.unknown_shape = tuple(unknown_shape)
        R = [(s - 1) // 2 for s in combined.shape[2:]]
        inv = []
        for i in range(d):
            sym = np.zeros(unknown_shape)
            block = combined[i, i]
            thetas = [np.pi * np.arange(1, n + 1) / (n + 1) for n in unknown_shape]
            # separable cosine sum over offsets, one axis at a time
            partial = block
            for ax in range(d):
                o = np.arange(-R[ax], R[ax] + 1)
                cos = np.cos(np.outer(o, thetas[ax]))
                partial = np.tensordot(partial, cos, axes=([0], [0]))
            sym = -partial
            small = np.abs(sym) < 1e-14 * np.abs(sym).max()
            sym[small] = 1e-14 * np.abs(sym).max()
            inv.append(1.0 / sym)
        self.inv = np.stack(inv)
        n = d * int(np.prod(unknown_shape))
        super().__init__(dtype=np.float64, shape=(n, n))

    def _matvec(self, x):
        u = np.asarray(x, dtype=float).reshape((self.d,) + self.unknown_shape)
        axes = tuple(range(1, self.d + 1))
        spectrum = sfft.dstn(u, type=1, axes=axes, norm="ortho")
        return sfft.idstn(spectrum * self.inv, type=1, axes=axes, norm="ortho").reshape(-1)


def _box_convolution(combined, grid, coeffs):
    """``sum_o T(o) c(j - o)`` at the unknown nodes for box-shaped data ``c``."""
    d = grid.dim
    half = tuple((s - 1) // 2 for s in combined.shape[2:])
    spectrum_shape = tuple(sfft.next_fast_len(s + 2 * r, real=True) for s, r in zip(grid.shape, half))
    axes = tuple(range(-d, 0))
    sym = sfft.rfftn(combined, s=spectrum_shape, axes=axes)
    spectrum = sfft.rfftn(coeffs, s=spectrum_shape, axes=axes)
    conv = sfft.irfftn(np.einsum("ic...,c...->i...", sym, spectrum), s=spectrum_shape, axes=axes)
    window = tuple(slice(s.start + r, s.stop + r) for s, r in zip(grid.unknown_slices, half))
    return conv[(slice(None),) + window]


def apply_at_nodes(grid, combined, coeffs):
    """Navier operator of the trial field ``coeffs`` at the unknown nodes.

    Parameters
    ----------
    grid : GridSpec
    combined : ndarray
        Combined stencil from :func:`operator_stencils`.
    coeffs : ndarray, shape (d, *grid.shape)

    Returns
    -------
    ndarray, shape (d, *grid.unknown_shape)
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (grid.dim,) + grid.shape:
        raise ValueError(f"coefficients must have shape {(grid.dim,) + grid.shape}")
    return _box_convolution(combined, grid, coeffs)


def _assemble_operator(grid, combined, g, f):
    op = _FFTOperator(combined, grid.unknown_shape)
    b = f.ravel() + _box_convolution(combined, grid, g).reshape(-1)
    precond = _DiagonalSinePreconditioner(combined, grid.unknown_shape)
    return SparseSystem(matrix=op, rhs=b, grid=grid, boundary=g, kind="operator", preconditioner=precond)


def solve(system, method="auto", tol=1e-10, restart=200):
    """Solve an assembled system.

    Parameters
    ----------
    system : SparseSystem
    method : {"auto", "direct", "gmres"}
        ``"auto"`` factorizes explicit matrices and falls back to GMRES when
        the factorization fails for lack of memory; matrix-free systems go
        straight to GMRES.
    tol : float
        Relative residual target of the iterative path (also checked for
        the direct path).
    restart : int
        GMRES restart length.

    Returns
    -------
    coeffs : ndarray
        Box-shaped nodal coefficients ``(d, *grid.shape)`` with the
        constrained values reattached, or the solution vector for a bare
        algebraic system.
    report : SolveReport

    Raises
    ------
    SingularMatrixError
        The direct factorization found an exactly singular matrix.
    StagnationError
        GMRES did not reach ``tol`` within ``10 * n_dof`` iterations.
    """
    start = time.perf_counter()
    b = np.asarray(system.rhs, dtype=float)
    A = system.matrix
    if method == "auto":
        method = "direct" if sparse.issparse(A) else "gmres"
    if method == "direct":
        if not sparse.issparse(A):
            raise TypeError("direct solves need an explicit sparse matrix")
        try:
            x, fill = _direct(A, b)
            report = SolveReport("direct", _relres(A, x, b), fill=fill)
        except MemoryError:
            x, report = _gmres(system, b, tol, restart)
    elif method == "gmres":
        x, report = _gmres(system, b, tol, restart)
    else:
        raise ValueError(f"unknown solve method {method!r}")
    report.wall_seconds = time.perf_counter() - start
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution contains non-finite values")
    if system.grid is None:
        return x, report
    coeffs = np.array(system.boundary, copy=True)
    grid = system.grid
    coeffs[(slice(None),) + grid.unknown_slices] = x.reshape((grid.dim,) + grid.unknown_shape)
    return coeffs, report


def _relres(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - A @ x)
    return float(r / nb) if nb > 0 else float(r)


def _direct(A, b):
    A = sparse.csc_matrix(A)
    if A.shape[0] == 1:
        a = A[0, 0]
        if a == 0:
            raise SingularMatrixError("1x1 system with zero coefficient")
        return np.array([b[0] / a]), 1
    try:
        lu = splinalg.splu(A, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularMatrixError(str(exc)) from exc
    x = lu.solve(b)
    return x, int(lu.L.nnz + lu.U.nnz)


def _gmres(system, b, tol, restart):
    A = system.matrix
    n = b.shape[0]
    if not np.any(b):
        return np.zeros(n), SolveReport("gmres", 0.0)
    cap = 10 * n
    restart = min(restart, n)
    counter = {"it": 0}

    def count(_):
        counter["it"] += 1

    x = np.zeros(n)
    M = system.preconditioner
    nb = np.linalg.norm(b)
    res = _relres(A, x, b)
    # the inner tolerance is on the preconditioned residual, so restart
    # until the true residual meets the target
    while res > tol and counter["it"] < cap:
        before = counter["it"]
        x, _ = splinalg.gmres(
            A,
            b,
            x0=x,
            rtol=tol * 0.5,
            atol=0.0,
            restart=restart,
            maxiter=max(1, math.ceil((cap - counter["it"]) / restart)),
            M=M,
            callback=count,
            callback_type="pr_norm",
        )
        new = float(np.linalg.norm(b - A @ x) / nb)
        if counter["it"] == before or (new >= res and new > tol):
            res = new
            break
        res = new
    if not res <= tol:
        raise StagnationError(f"GMRES stopped at relative residual {res:.3e} after {counter['it']} iterations")
    return x, SolveReport("gmres", res, iterations=counter["it"])


def l2_error(grid, field, exact, order=4):
    """``L^2(Omega)`` distance between the quasi-interpolant of ``field`` and ``exact``.

    Per-cell tensor Gauss quadrature with ``order`` points per axis.
    """
    pts, vals, w = cell_gauss_values(grid, field, None, order)
    ex = np.asarray(exact(pts), dtype=float)
    if ex.ndim == 1:
        ex = ex[:, None]
    sq = np.sum((vals - ex) ** 2, axis=1) * w
    return math.sqrt(math.fsum(sq))
