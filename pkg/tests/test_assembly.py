import numpy as np
import pytest
from scipy import sparse

from peridyn_rk import assembly
from peridyn_rk.assembly import SparseSystem, apply_at_nodes, assemble, estimate_nnz, l2_error, operator_stencils, solve
from peridyn_rk.exceptions import SingularMatrixError
from peridyn_rk.grid import build_grid, unit_square
from peridyn_rk.kernel import RadialKernel
from peridyn_rk.nlops import TrialField, apply_navier
from peridyn_rk.quad import build_quadset, polar_rule
from peridyn_rk.stencils import compute_stencils


def _setup(h_max=1 / 8, delta=0.25, quasi=False):
    grid = build_grid(unit_square(), h_max, (1.0, 0.5), delta)
    kernel = RadialKernel.inverse_distance(delta)
    if quasi:
        integ = build_quadset(0.25, RadialKernel.inverse_distance(1.0))
    else:
        integ = polar_rule(delta, grid.h_min, grid_h=grid.h)
    return grid, kernel, integ


def zero(x):
    return np.zeros_like(x)


def test_dimension(material):
    grid, kernel, integ = _setup()
    system = assemble(grid, kernel, material, integ, zero, zero)
    assert system.n_dof == 210
    assert system.matrix.shape == (210, 210)
    assert system.kind == "explicit"


@pytest.mark.parametrize("quasi", [False, True])
def test_stencils_annihilate_constants(quasi):
    grid, kernel, integ = _setup(quasi=quasi)
    st = compute_stencils(grid.h, kernel, integ)
    axes = tuple(range(-grid.dim, 0))
    np.testing.assert_allclose(st.bond.sum(axis=axes), 0, atol=1e-12)
    np.testing.assert_allclose(st.div.sum(axis=axes), 0, atol=1e-12)


def test_constant_field_rows_vanish(material):
    grid, kernel, integ = _setup()
    const = lambda x: np.tile([1.5, -0.5], (len(x), 1))  # noqa: E731
    system = assemble(grid, kernel, material, integ, zero, const)
    interior = np.concatenate([np.full(grid.n_unknown, 1.5), np.full(grid.n_unknown, -0.5)])
    np.testing.assert_allclose(system.apply(interior) - system.rhs, 0, atol=1e-10)


def test_factors_match_combined_stencil(material, rng):
    grid, kernel, integ = _setup()
    system = assemble(grid, kernel, material, integ, zero, zero, method="explicit")
    _, combined, m = operator_stencils(grid, kernel, integ, material)
    coeffs = rng.standard_normal((2,) + grid.shape)
    fac = system.info["factors"]
    d = grid.dim
    # gradient columns only cover nodes reached from the unknowns
    lo = [s.start - r for s, r in zip(grid.unknown_slices, grid.stencil_radius)]
    hi = [s.stop - 1 + r for s, r in zip(grid.unknown_slices, grid.stencil_radius)]
    n_box = int(np.prod(grid.shape))
    full = material.bond_coefficient(m) * fac["bond"] + material.state_coefficient(m) * (fac["grad"] @ fac["div"])
    via_factors = (full @ coeffs.reshape(-1)).reshape(d, *grid.unknown_shape)
    via_stencil = apply_at_nodes(grid, combined, coeffs)
    assert len(lo) == len(hi) == d and full.shape == (d * grid.n_unknown, d * n_box)
    np.testing.assert_allclose(via_factors, via_stencil, atol=1e-10)


def test_stencil_matches_pointwise_operator(material, rng):
    grid, kernel, integ = _setup()
    _, combined, m = operator_stencils(grid, kernel, integ, material)
    coeffs = rng.standard_normal((2,) + grid.shape)
    at_nodes = apply_at_nodes(grid, combined, coeffs)
    pts = grid.node_points("unknown")
    pick = rng.choice(len(pts), 6, replace=False)
    direct = apply_navier(TrialField(grid, coeffs), pts[pick], integ, kernel, material, m)
    np.testing.assert_allclose(direct, at_nodes.reshape(2, -1)[:, pick].T, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("quasi", [False, True])
def test_explicit_and_operator_agree(material, quasi):
    grid, kernel, integ = _setup(1 / 8, 0.25, quasi)
    rhs = lambda x: np.stack([np.sin(x[:, 0]), x[:, 1] ** 2], axis=1)  # noqa: E731
    bnd = lambda x: np.stack([x[:, 0] * x[:, 1], np.cos(x[:, 1])], axis=1)  # noqa: E731
    a = assemble(grid, kernel, material, integ, rhs, bnd, method="explicit")
    b = assemble(grid, kernel, material, integ, rhs, bnd, method="operator")
    assert b.kind == "operator"
    np.testing.assert_allclose(a.rhs, b.rhs, atol=1e-11)
    v = np.random.default_rng(0).standard_normal(a.n_dof)
    np.testing.assert_allclose(a.apply(v), b.apply(v), atol=1e-10)
    ca, ra = solve(a)
    cb, rb = solve(b)
    assert ra.method == "direct" and rb.method == "gmres"
    assert rb.residual <= 1e-10
    np.testing.assert_allclose(ca, cb, atol=1e-9)


def test_linear_solution_reproduced(material):
    grid, kernel, integ = _setup()
    lin = lambda x: np.stack([1 + 2 * x[:, 0] - x[:, 1], 0.5 * x[:, 1]], axis=1)  # noqa: E731
    coeffs, report = solve(assemble(grid, kernel, material, integ, zero, lin))
    assert report.residual <= 1e-10
    assert l2_error(grid, coeffs, lin) < 1e-12


def test_degenerate_systems():
    x, report = solve(SparseSystem(sparse.csr_matrix([[4.0]]), np.array([2.0])))
    assert x[0] == 0.5
    with pytest.raises(SingularMatrixError):
        solve(SparseSystem(sparse.csr_matrix((2, 2)), np.array([1.0, 1.0])))


def test_l2_error_examples():
    grid = build_grid(unit_square(), 1 / 8, (1.0, 1.0), 0.25)
    assert l2_error(grid, np.zeros((2,) + grid.shape), lambda x: np.tile([1.0, 0.0], (len(x), 1))) == pytest.approx(1.0)


def test_coordinate_export_deterministic(material, tmp_path):
    grid, kernel, integ = _setup(1 / 4, 0.25)
    sys_a = assemble(grid, kernel, material, integ, zero, zero)
    sys_b = assemble(grid, kernel, material, integ, zero, zero)
    text = sys_a.to_coo()
    assert text == sys_b.to_coo()
    assert text.startswith(f"# n={sys_a.n_dof}")
    sys_a.to_coo(tmp_path / "a.coo")
    assert (tmp_path / "a.coo").read_text() == text


def test_dof_round_trip(material):
    grid, kernel, integ = _setup(1 / 4, 0.25)
    system = assemble(grid, kernel, material, integ, zero, zero)
    for row in range(system.n_dof):
        node, comp = system.dof_node(row)
        assert system.dof_index(node, comp) == row


def test_quasi_row_support(material):
    # entries of a row stay within 2 delta + 4 h_max of its node
    h, delta = 1 / 8, 0.25
    grid, kernel, integ = _setup(h, delta, quasi=True)
    system = assemble(grid, kernel, material, integ, zero, zero)
    coo = system.matrix.tocoo()
    pts = grid.node_points("unknown")
    n = grid.n_unknown
    dist = np.linalg.norm(pts[coo.row % n] - pts[coo.col % n], axis=1)
    assert dist.max() < 2 * delta + 4 * h


def test_horizon_mismatch(material):
    grid, _, integ = _setup()
    with pytest.raises(ValueError):
        assemble(grid, RadialKernel.inverse_distance(0.3), material, integ, zero, zero)


def test_automatic_method_switch(material):
    grid, kernel, integ = _setup()
    system = assemble(grid, kernel, material, integ, zero, zero, max_nnz=estimate_nnz(grid) - 1)
    assert system.kind == "operator"
    with pytest.raises(TypeError):
        system.to_coo()
    assert assembly.DEFAULT_MAX_NNZ > 0
