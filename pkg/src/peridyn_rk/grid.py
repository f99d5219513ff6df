"""Rectilinear Cartesian grids over a box domain and its interaction layer.

Nodes sit at ``x_k = lower + k * h`` for integer multi-indices ``k``.  The
indexed region covers the open domain, the closed interaction layer of
width ``2 * delta`` and an additional margin so that every stencil of the
collocation scheme (bond term and the composed gradient/divergence term)
only references indexed nodes.

Nodal data are stored as dense arrays over the indexed box; array position
``a`` along axis ``j`` corresponds to index ``k_j = lo[j] + a``.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_points, check_positive
from .exceptions import DegenerateDomainError, IndexOutOfRangeError, MarginError

__all__ = [
    "DomainBox",
    "GridSpec",
    "NodeClass",
    "build_grid",
    "classify_node",
    "classify_all",
    "nodes_in_ball",
    "unit_square",
]

_TOL = 1e-10


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned open box ``(lower, upper)``."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper):
            raise DegenerateDomainError("lower and upper corners have different dimensions")
        if not 1 <= len(lower) <= 3:
            raise DegenerateDomainError(f"dimension must be 1, 2 or 3, got {len(lower)}")
        extents = [u - l for l, u in zip(lower, upper)]
        if any(not np.isfinite(e) or e <= 0 for e in extents):
            raise DegenerateDomainError(f"domain extents must be positive, got {extents}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return len(self.lower)

    def distance(self, x):
        """Euclidean distance from points ``x`` (shape ``(n, d)``) to the closed box."""
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lower)
        up = np.asarray(self.upper)
        gap = np.maximum(np.maximum(lo - x, x - up), 0.0)
        return np.sqrt(np.sum(gap * gap, axis=-1))


def unit_square():
    """The domain ``(0, 1)^2`` used by the manufactured-solution studies."""
    return DomainBox((0.0, 0.0), (1.0, 1.0))


class NodeClass(enum.Enum):
    """Role of a grid node in the collocation scheme.

    ``AUXILIARY`` nodes are constrained nodes close enough to the domain
    that the nonlocal divergence is evaluated there for the state term.
    """

    UNKNOWN = 0
    CONSTRAINED = 1
    AUXILIARY = 2

    @property
    def constrained(self):
        return self is not NodeClass.UNKNOWN


@dataclass(frozen=True)
class GridSpec:
    """Immutable description of a rectilinear grid.

    Attributes
    ----------
    domain : DomainBox
        The open solution domain.
    h_max : float
        Largest grid spacing.
    h_hat : tuple of float
        Spacing direction, ``h = h_max * h_hat`` with ``max(h_hat) == 1``.
    delta : float
        Horizon of the nonlocal operator.
    h : tuple of float
        Per-axis spacing.
    lo, hi : tuple of int
        Inclusive multi-index range of the indexed box.
    unknown_hi : tuple of int
        Largest index of a node strictly inside the domain, per axis (the
        smallest is 1).
    stencil_radius : tuple of int
        Per-axis index reach of the bond and divergence stencils.
    aligned : bool
        True when the upper corner lies on a grid line along every axis.
    """

    domain: DomainBox
    h_max: float
    h_hat: tuple
    delta: float
    h: tuple = field(init=False)
    lo: tuple = field(init=False)
    hi: tuple = field(init=False)
    unknown_hi: tuple = field(init=False)
    stencil_radius: tuple = field(init=False)
    aligned: bool = field(init=False)

    def __post_init__(self):
        h = tuple(self.h_max * c for c in self.h_hat)
        ext = [u - l for l, u in zip(self.domain.lower, self.domain.upper)]
        unknown_hi = []
        aligned = True
        for e, hj in zip(ext, h):
            n = e / hj
            if abs(n - round(n)) < _TOL * max(1.0, n):
                unknown_hi.append(int(round(n)) - 1)
            else:
                aligned = False
                unknown_hi.append(int(math.floor(n)))
        radius = tuple(int(math.floor(self.delta / hj + _TOL)) + 2 for hj in h)
        layer = tuple(int(math.ceil(2.0 * self.delta / hj - _TOL)) for hj in h)
        # margin: composed gradient/divergence stencil from any unknown node,
        # and at least the full interaction layer
        margin = tuple(max(2 * r, lay) for r, lay in zip(radius, layer))
        lo = tuple(1 - m for m in margin)
        hi = tuple(u + m for u, m in zip(unknown_hi, margin))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "unknown_hi", tuple(unknown_hi))
        object.__setattr__(self, "stencil_radius", radius)
        object.__setattr__(self, "aligned", aligned)

    @property
    def dim(self):
        return len(self.h)

    @property
    def h_min(self):
        return min(self.h)

    @property
    def shape(self):
        """Number of indexed nodes per axis."""
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def unknown_shape(self):
        return tuple(self.unknown_hi)

    @property
    def n_unknown(self):
        return int(np.prod(self.unknown_shape))

    @property
    def unknown_slices(self):
        """Slices selecting the unknown nodes in a box-shaped nodal array."""
        return tuple(slice(1 - a, u + 1 - a) for a, u in zip(self.lo, self.unknown_hi))

    def axis_indices(self, axis):
        return np.arange(self.lo[axis], self.hi[axis] + 1)

    def axis_coordinates(self, axis):
        """Node coordinates along one axis, computed as index times spacing."""
        return self.domain.lower[axis] + self.axis_indices(axis) * self.h[axis]

    def coordinates(self, k):
        """Coordinates of multi-indices ``k`` (shape ``(n, d)`` or ``(d,)``)."""
        k = np.asarray(k)
        return np.asarray(self.domain.lower) + k * np.asarray(self.h)

    def node_points(self, region="box"):
        """All node coordinates of the box (or of the unknown nodes) as ``(n, d)``.

        Nodes are listed in lexicographic (C) order.
        """
        axes = [self.axis_coordinates(j) for j in range(self.dim)]
        if region == "unknown":
            axes = [a[s] for a, s in zip(axes, self.unknown_slices)]
        elif region != "box":
            raise ValueError(f"unknown region {region!r}")
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def sample(self, func, region="box"):
        """Evaluate a vector field at the nodes and return a nodal array.

        ``func`` maps ``(n, d)`` points to ``(n, c)`` values (or ``(n,)``).
        The result has shape ``(c, *shape)`` (or ``shape`` for scalars).
        """
        pts = self.node_points(region)
        vals = np.asarray(func(pts), dtype=float)
        shape = self.shape if region == "box" else self.unknown_shape
        if vals.ndim == 1:
            return vals.reshape(shape)
        return np.moveaxis(vals, 1, 0).reshape((vals.shape[1],) + shape)

    def in_range(self, k):
        k = np.asarray(k)
        return np.all((k >= np.asarray(self.lo)) & (k <= np.asarray(self.hi)), axis=-1)


def build_grid(domain, h_max, h_hat, delta, allow_thin_layer=False):
    """Construct the grid for a domain, spacing and horizon.

    Parameters
    ----------
    domain : DomainBox
        Open solution domain.
    h_max : float
        Largest grid spacing.
    h_hat : sequence of float
        Spacing direction with largest component exactly 1.
    delta : float
        Horizon.
    allow_thin_layer : bool, default False
        Permit ``delta < h_max / 2``.  The indexed margin always reaches the
        full stencil, so such grids are usable as long as the boundary data
        are defined on the whole indexed box (for instance an exact solution
        extended beyond the layer).

    Returns
    -------
    GridSpec

    Raises
    ------
    MarginError
        If ``delta < h_max / 2`` and ``allow_thin_layer`` is false.
    DegenerateDomainError
        If the domain has a nonpositive extent.
    """
    if not isinstance(domain, DomainBox):
        domain = DomainBox(*domain)
    h_max = check_positive(h_max, "h_max")
    delta = check_positive(delta, "delta")
    h_hat = tuple(float(v) for v in np.atleast_1d(h_hat))
    if len(h_hat) != domain.dim:
        raise ValueError(f"h_hat must have {domain.dim} entries, got {len(h_hat)}")
    if min(h_hat) <= 0 or abs(max(h_hat) - 1.0) > 1e-14:
        raise ValueError(f"h_hat must be positive with maximum component 1, got {h_hat}")
    if delta < 0.5 * h_max * (1.0 - 1e-12) and not allow_thin_layer:
        raise MarginError(
            f"delta={delta} is smaller than h_max/2={0.5 * h_max}: the interaction "
            "layer does not cover the evaluation margin"
        )
    return GridSpec(domain=domain, h_max=h_max, h_hat=h_hat, delta=delta)


def _auxiliary_radius(grid):
    # the tensor-product support of a basis function reaches 2*|h| along
    # the diagonal, so this is the reach of a divergence evaluation
    return grid.delta + 2.0 * float(np.linalg.norm(grid.h))


def classify_node(grid, k):
    """Classify a single node.

    Parameters
    ----------
    grid : GridSpec
    k : sequence of int
        Multi-index inside the indexed range.

    Returns
    -------
    NodeClass
    """
    k = tuple(int(v) for v in k)
    if len(k) != grid.dim or not grid.in_range(k):
        raise IndexOutOfRangeError(f"index {k} outside the indexed range {grid.lo}..{grid.hi}")
    if all(1 <= kj <= uj for kj, uj in zip(k, grid.unknown_hi)):
        return NodeClass.UNKNOWN
    dist = grid.domain.distance(grid.coordinates(k))
    if dist <= _auxiliary_radius(grid) * (1 + 1e-12):
        return NodeClass.AUXILIARY
    return NodeClass.CONSTRAINED


def classify_all(grid):
    """Integer class codes (``NodeClass.value``) for every indexed node."""
    pts = grid.node_points()
    dist = grid.domain.distance(pts).reshape(grid.shape)
    codes = np.full(grid.shape, NodeClass.CONSTRAINED.value, dtype=np.int8)
    codes[dist <= _auxiliary_radius(grid) * (1 + 1e-12)] = NodeClass.AUXILIARY.value
    codes[grid.unknown_slices] = NodeClass.UNKNOWN.value
    return codes


def nodes_in_ball(grid, x, r):
    """Indexed nodes within distance ``r`` of ``x`` (closed ball).

    Returns a list of multi-index tuples in lexicographic order.
    """
    r = check_positive(r, "r")
    x = check_points(x, grid.dim)[0]
    h = np.asarray(grid.h)
    lower = np.asarray(grid.domain.lower)
    kmin = np.maximum(np.ceil((x - r - lower) / h - _TOL).astype(int), grid.lo)
    kmax = np.minimum(np.floor((x + r - lower) / h + _TOL).astype(int), grid.hi)
    if np.any(kmax < kmin):
        return []
    axes = [np.arange(a, b + 1) for a, b in zip(kmin, kmax)]
    mesh = np.meshgrid(*axes, indexing="ij")
    ks = np.stack([m.ravel() for m in mesh], axis=1)
    dist = np.linalg.norm(lower + ks * h - x, axis=1)
    keep = dist <= r * (1 + 1e-12)
    return [tuple(int(v) for v in k) for k in ks[keep]]
