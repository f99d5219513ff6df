"""Ball quadrature for nonlocal integrals.

Two integration rules are provided:

* :class:`PolarRule`, a composite Gauss rule in polar (spherical)
  coordinates over ``B_delta``.  The polar Jacobian cancels the
  inverse-distance singularity, and the rule can be split at the grid lines
  of a rectilinear grid so that piecewise-polynomial integrands (B-spline
  shape functions) are integrated exactly along each ray.
* :class:`QuadSet`, a fixed symmetric lattice point set in the unit ball
  with positive weights matched to the fourth moments of the kernel.  This
  is the rule of the quasi-discrete operators; it is translated rigidly and
  scaled with the horizon.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive
from .exceptions import EmptyPointSetError, InfeasibleConstraintsError, NonPositiveWeightError
from .kernel import angular_fourth_moments

__all__ = [
    "PolarRule",
    "polar_rule",
    "integrate_ball",
    "QuadSet",
    "generate_point_set",
    "augment_points",
    "solve_weights",
    "build_quadset",
]


def _gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _composite(breaks, order):
    """Gauss nodes and weights on consecutive intervals of ``breaks``."""
    g, wg = _gauss(order)
    a = breaks[:-1, None]
    width = np.diff(breaks)[:, None]
    return (a + width * g).ravel(), (width * wg).ravel()


@dataclass(frozen=True)
class PolarRule:
    """Composite Gauss rule on the ball of radius ``delta``.

    Attributes
    ----------
    dim : int
    delta : float
    radial_panels : int
        Number of uniform radial panels.
    radial_order : int
        Gauss points per radial segment.
    angular_panels : int
        Panels over the full azimuthal circle (a multiple of 4).
    angular_order : int
    polar_panels : int
        Panels over ``[0, pi]`` for the polar angle (3D only, even).
    grid_h : tuple of float or None
        When set, every ray is additionally split where it crosses the grid
        lines ``s_j = n h_j``.
    """

    dim: int
    delta: float
    radial_panels: int
    radial_order: int = 4
    angular_panels: int = 16
    angular_order: int = 4
    polar_panels: int = 8
    grid_h: tuple = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("polar rules are defined for d = 2 or 3")
        if min(self.radial_order, self.angular_order) < 2:
            raise ValueError("Gauss orders must be at least 2")
        if self.radial_panels < 1 or self.angular_panels < 4 or self.angular_panels % 4:
            raise ValueError("radial_panels >= 1 and angular_panels a positive multiple of 4 required")
        if self.dim == 3 and (self.polar_panels < 2 or self.polar_panels % 2):
            raise ValueError("polar_panels must be a positive even number")

    def _directions(self):
        """Directions in the open positive orthant and their angular weights."""
        if "dirs" in self._cache:
            return self._cache["dirs"]
        quarter = 0.5 * math.pi
        breaks = np.linspace(0.0, quarter, self.angular_panels // 4 + 1)
        phi, wphi = _composite(breaks, self.angular_order)
        if self.dim == 2:
            dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
            wdir = wphi
        else:
            tb = np.linspace(0.0, quarter, self.polar_panels // 2 + 1)
            theta, wtheta = _composite(tb, self.angular_order)
            st, ct = np.sin(theta), np.cos(theta)
            dirs = np.stack(
                [np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(), np.repeat(ct, phi.size)],
                axis=1,
            )
            wdir = np.outer(wtheta * st, wphi).ravel()
        self._cache["dirs"] = (dirs, wdir)
        return dirs, wdir

    def _radial(self, direction):
        breaks = np.linspace(0.0, self.delta, self.radial_panels + 1)
        if self.grid_h is not None:
            extra = [breaks]
            for nj, hj in zip(direction, self.grid_h):
                if nj > 1e-15:
                    step = hj / nj
                    count = int(math.floor(self.delta / step))
                    if count:
                        extra.append(step * np.arange(1, count + 1))
            breaks = np.unique(np.concatenate(extra))
            keep = np.concatenate([[True], np.diff(breaks) > 1e-13 * self.delta])
            breaks = breaks[keep]
            breaks = breaks[breaks <= self.delta]
            if breaks[-1] < self.delta:
                breaks = np.append(breaks, self.delta)
            else:
                breaks[-1] = self.delta
        r, wr = _composite(breaks, self.radial_order)
        return r, wr * r ** (self.dim - 1)

    @property
    def size(self):
        """Total number of quadrature points."""
        if "size" not in self._cache:
            dirs, _ = self._directions()
            if self.grid_h is None:
                n = dirs.shape[0] * self.radial_panels * self.radial_order
            else:
                n = sum(self._radial(d)[0].size for d in dirs)
            self._cache["size"] = n * 2**self.dim
        return self._cache["size"]

    def chunks(self, max_points=2_000_000, orthant=False):
        """Yield ``(points, weights)`` blocks covering the whole ball.

        Weights include the polar Jacobian.  Each block is closed under all
        coordinate sign flips, so odd moments vanish block by block.  With
        ``orthant=True`` only the points of the open positive orthant are
        produced; the rest of the rule follows by sign flips.
        """
        dirs, wdir = self._directions()
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=self.dim)))
        if orthant:
            signs = signs[:1]
        per_orthant = max(1, max_points // 2**self.dim)
        if self.grid_h is None:
            r, wr = self._radial(dirs[0])
            step = max(1, per_orthant // r.size)
            for start in range(0, dirs.shape[0], step):
                d = dirs[start : start + step]
                pts = (d[:, None, :] * r[None, :, None]).reshape(-1, self.dim)
                w = (wdir[start : start + step, None] * wr[None, :]).ravel()
                yield _reflect(pts, w, signs)
            return
        buf_p, buf_w, count = [], [], 0
        for d, wd in zip(dirs, wdir):
            r, wr = self._radial(d)
            buf_p.append(r[:, None] * d[None, :])
            buf_w.append(wd * wr)
            count += r.size
            if count >= per_orthant:
                yield _reflect(np.concatenate(buf_p), np.concatenate(buf_w), signs)
                buf_p, buf_w, count = [], [], 0
        if buf_p:
            yield _reflect(np.concatenate(buf_p), np.concatenate(buf_w), signs)

    def points_and_weights(self):
        """Materialize the full rule (use :meth:`chunks` for large rules)."""
        parts = list(self.chunks(max_points=np.iinfo(np.int64).max))
        return np.concatenate([p for p, _ in parts]), np.concatenate([w for _, w in parts])


def _reflect(pts, w, signs):
    return (pts[None, :, :] * signs[:, None, :]).reshape(-1, pts.shape[1]), np.tile(w, signs.shape[0])


def polar_rule(delta, h_min, dim=2, grid_h=None, radial_order=4, angular_order=4):
    """Polar rule resolving features of size ``h_min`` on ``B_delta``.

    Radial panels have width at most ``h_min / 2`` and the azimuthal circle
    is split into ``max(16, 4 * ceil(8 delta / h_min))`` panels; each panel
    carries a Gauss rule of the given order.

    Parameters
    ----------
    delta, h_min : float
    dim : int
    grid_h : sequence of float, optional
        Also split every ray at crossings with the grid lines of this
        spacing (exact integration of shape functions along rays).
    """
    delta = check_positive(delta, "delta")
    h_min = check_positive(h_min, "h_min")
    radial = max(1, int(math.ceil(delta / (0.5 * h_min) - 1e-12)))
    angular = max(16, 4 * int(math.ceil(8.0 * delta / h_min - 1e-12)))
    polar = max(8, 2 * int(math.ceil(4.0 * delta / h_min - 1e-12)))
    gh = None if grid_h is None else tuple(float(v) for v in grid_h)
    return PolarRule(dim, delta, radial, radial_order, angular, angular_order, polar, gh)


def integrate_ball(rule, kernel, f):
    """Integrate ``rho_delta(|s|) f(s)`` over the ball with a polar rule.

    ``f`` maps points ``(n, d)`` to values ``(n,)`` or ``(n, c)``.  Partial
    sums per block are combined with compensated summation.
    """
    partial = []
    scalar = True
    for pts, w in rule.chunks():
        vals = np.asarray(f(pts), dtype=float)
        scalar = vals.ndim == 1
        kw = w * kernel(np.linalg.norm(pts, axis=1))
        partial.append(np.atleast_1d(kw @ vals))
    partial = np.array(partial)
    out = np.array([math.fsum(partial[:, i]) for i in range(partial.shape[1])])
    return float(out[0]) if scalar else out


def generate_point_set(eps1, dim=2):
    """Lattice points ``eps1 * k``, ``k != 0``, inside the closed unit ball.

    Points are listed in lexicographic order of ``k``.

    Raises
    ------
    EmptyPointSetError
        If no nonzero lattice point lies in the ball.
    """
    eps1 = check_positive(eps1, "eps1")
    n = int(math.floor(1.0 / eps1 + 1e-9))
    rng = np.arange(-n, n + 1)
    ks = np.array(list(itertools.product(rng, repeat=dim)))
    r2 = np.sum(ks * ks, axis=1) * eps1**2
    keep = (r2 <= 1.0 + 1e-12) & np.any(ks != 0, axis=1)
    if not np.any(keep):
        raise EmptyPointSetError(f"eps1={eps1} leaves no lattice points in the unit ball")
    return eps1 * ks[keep].astype(float)


def augment_points(points, extra):
    """Add points (and their negatives) to a centrally symmetric set.

    Duplicates are dropped; the result keeps the original points first.
    """
    points = np.asarray(points, dtype=float)
    extra = np.atleast_2d(np.asarray(extra, dtype=float))
    if np.any(np.linalg.norm(extra, axis=1) > 1.0 + 1e-12) or np.any(np.all(extra == 0, axis=1)):
        raise ValueError("added points must be nonzero and inside the closed unit ball")
    out = [tuple(p) for p in points]
    seen = {_key(p) for p in points}
    for p in extra:
        for q in (p, -p):
            if _key(q) not in seen:
                seen.add(_key(q))
                out.append(tuple(q))
    return np.array(out)


def _key(p):
    return tuple(np.round(np.asarray(p, dtype=float), 12) + 0.0)


def _group(name, dim):
    """Linear maps (as signed permutations) of a symmetry group."""
    perms = list(itertools.permutations(range(dim))) if name == "full" else [tuple(range(dim))]
    if name == "central":
        signs = [np.ones(dim), -np.ones(dim)]
    else:
        signs = [np.array(s) for s in itertools.product((1.0, -1.0), repeat=dim)]
    return [(p, s) for p in perms for s in signs]


def _orbits(points, group):
    """Orbit labels of ``points`` under ``group``; None if the set is not closed."""
    index = {_key(p): i for i, p in enumerate(points)}
    labels = -np.ones(len(points), dtype=int)
    n_orbits = 0
    for i, p in enumerate(points):
        if labels[i] >= 0:
            continue
        members = set()
        for perm, sign in group:
            q = sign * p[list(perm)]
            j = index.get(_key(q))
            if j is None:
                return None
            members.add(j)
        for j in members:
            labels[j] = n_orbits
        n_orbits += 1
    return labels


@dataclass(frozen=True)
class QuadSet:
    """Symmetric unit-ball quadrature with moment-matched positive weights.

    Attributes
    ----------
    points : ndarray, shape (n, d)
        Points in the unit ball (origin excluded).
    weights : ndarray, shape (n,)
    eps1 : float
        Lattice spacing relative to the horizon.
    symmetry : str
        Group used for the orbit parameterization.
    residual : float
        Largest absolute violation of the moment constraints.
    """

    points: np.ndarray
    weights: np.ndarray
    eps1: float
    symmetry: str
    residual: float

    @property
    def dim(self):
        return self.points.shape[1]

    def scaled(self, delta):
        """Points ``delta * s`` and weights ``delta**d * w`` for horizon ``delta``."""
        return delta * self.points, delta**self.dim * self.weights

    def moment_matrix(self, kernel):
        """Discrete fourth moments ``sum w rho(|s|) s_i^2 s_j^2 / |s|^2`` of the unit profile."""
        r = np.linalg.norm(self.points, axis=1)
        s2 = self.points**2
        kw = self.weights * kernel.profile(r) / r**2
        return np.einsum("n,ni,nj->ij", kw, s2, s2)

    def to_csv(self, path=None, header_lines=()):
        """Write ``s_1..s_d, weight`` rows; returns the text when ``path`` is None."""
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"s{j + 1}" for j in range(self.dim)] + ["weight"])
        for p, w in zip(self.points, self.weights):
            writer.writerow([repr(float(v)) for v in p] + [repr(float(w))])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def solve_weights(points, kernel, eps1=None, symmetry="auto", tol=1e-10):
    """Positive weights matching the fourth moments of a kernel.

    Solves ``min sum_s (w(s) - eps1**d)**2`` subject to

        sum_s w(s) rho(|s|) s_i^2 s_j^2 / |s|^2 = int_{B_1} rho s_i^2 s_j^2 / |s|^2 ds

    for all ``i <= j``, with one unknown per symmetry orbit so that the
    weights inherit the symmetry of the point set.

    Parameters
    ----------
    points : array_like, shape (n, d)
        Centrally symmetric points in the unit ball, origin excluded.
    kernel : RadialKernel
        Only the unit profile is used.
    eps1 : float, optional
        Reference spacing; inferred from the smallest nonzero coordinate
        magnitude when omitted.
    symmetry : {"auto", "full", "sign", "central"}
        Orbit group.  ``"auto"`` picks the largest group (coordinate
        permutations with sign flips, then sign flips, then central
        symmetry) under which the set is closed.
    tol : float
        Required accuracy of every moment constraint.

    Returns
    -------
    QuadSet

    Raises
    ------
    EmptyPointSetError, InfeasibleConstraintsError, NonPositiveWeightError
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise EmptyPointSetError("empty point set")
    d = pts.shape[1]
    if np.any(np.all(pts == 0, axis=1)):
        raise ValueError("the origin cannot be a quadrature point")
    if np.any(np.linalg.norm(pts, axis=1) > 1.0 + 1e-12):
        raise ValueError("quadrature points must lie in the closed unit ball")
    if eps1 is None:
        mags = np.abs(pts[pts != 0])
        eps1 = float(mags.min())
    candidates = ["full", "sign", "central"] if symmetry == "auto" else [symmetry]
    labels = None
    for name in candidates:
        labels = _orbits(pts, _group(name, d))
        if labels is not None:
            symmetry = name
            break
    if labels is None:
        raise ValueError("point set is not centrally symmetric")
    n_orb = labels.max() + 1
    counts = np.bincount(labels, minlength=n_orb).astype(float)

    r = np.linalg.norm(pts, axis=1)
    s2 = pts**2
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    rows = np.array([kernel.profile(r) * s2[:, i] * s2[:, j] / r**2 for i, j in pairs])
    A = np.zeros((len(pairs), n_orb))
    for c in range(n_orb):
        A[:, c] = rows[:, labels == c].sum(axis=1)
    targets = kernel.radial_integral(d + 1) * angular_fourth_moments(d)
    b = np.array([targets[i, j] for i, j in pairs])

    w0 = eps1**d
    scale = 1.0 / np.sqrt(counts)
    B = A * scale[None, :]
    v, *_ = np.linalg.lstsq(B, b - A @ np.full(n_orb, w0), rcond=None)
    w_orb = w0 + scale * v
    residual = float(np.max(np.abs(A @ w_orb - b)))
    if residual > tol:
        raise InfeasibleConstraintsError(
            f"moment constraints cannot be met on this point set (residual {residual:.3e})"
        )
    weights = w_orb[labels]
    if np.any(weights <= 0):
        raise NonPositiveWeightError(
            f"least-squares weights are not all positive (min {weights.min():.3e}); refine eps1"
        )
    return QuadSet(points=pts, weights=weights, eps1=float(eps1), symmetry=symmetry, residual=residual)


def build_quadset(eps1, kernel, dim=None):
    """Lattice point set for ``eps1`` with moment-matched weights."""
    dim = kernel.dim if dim is None else dim
    return solve_weights(generate_point_set(eps1, dim), kernel, eps1=eps1)
