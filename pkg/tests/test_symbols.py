import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from peridyn_rk.exceptions import NonconvergentSumError
from peridyn_rk.kernel import RadialKernel
from peridyn_rk.nlops import Material
from peridyn_rk.quad import build_quadset, polar_rule
from peridyn_rk.stencils import compute_stencils
from peridyn_rk.symbols import (
    _integral_j0,
    lattice_symbol,
    local_symbol,
    navier_symbol,
    scalar_symbols,
    scan_wavevectors,
    stability_scan,
    state_constants,
)

UNIT = RadialKernel.inverse_distance(1.0)
MAT = Material.from_engineering(1.0, 0.4)

# frozen from tests/oracles/derive_oracles.py (mpmath double quadrature, 30 digits)
SCALAR_ORACLE = {
    0.3: (0.0056123606855123750954, 0.016811837268959921346, 0.14899020810213145854),
    1.0: (0.060960526965519829936, 0.17984824276519945212, 0.46359817059538106359),
    2.5: (0.33493578947521693793, 0.90348707704287115439, 0.76269138515460235866),
    7.0: (1.0888615118776144031, 1.5020069243495767854, -0.07015803539797971122),
}
J0_INTEGRAL_ORACLE = {
    0.5: 0.48968050664604505505,
    5.0: 0.71531191778476780233,
    30.0: 0.8842490888254748842,
    100.0: 0.92266255696016607257,
}


@pytest.mark.parametrize("r", sorted(SCALAR_ORACLE))
@pytest.mark.parametrize("route", ["closed", "numeric"])
def test_scalars_against_oracle(r, route):
    s = scalar_symbols(UNIT, r, route=route)
    np.testing.assert_allclose([s.p, s.q, s.b], SCALAR_ORACLE[r], rtol=1e-12, atol=1e-14)


def test_scalars_at_zero_and_small_argument():
    s = scalar_symbols(UNIT, 0.0)
    assert (s.p, s.q, s.b) == (0.0, 0.0, 0.0)
    r = 1e-3
    s = scalar_symbols(UNIT, r)
    assert s.p / r**2 == pytest.approx(1 / 16, rel=1e-4)
    assert s.q / r**2 == pytest.approx(3 / 16, rel=1e-4)
    assert s.b / r == pytest.approx(1 / 2, rel=1e-4)


@pytest.mark.parametrize("x", sorted(J0_INTEGRAL_ORACLE))
def test_bessel_integral(x):
    val = _integral_j0(np.array(x), special.j0(x), special.j1(x))
    assert val == pytest.approx(J0_INTEGRAL_ORACLE[x], rel=1e-12)


@given(st.floats(0.0, 60.0))
def test_closed_and_numeric_routes_agree(r):
    a = scalar_symbols(UNIT, r, route="closed")
    b = scalar_symbols(UNIT, r, route="numeric")
    np.testing.assert_allclose([a.p, a.q, a.b], [b.p, b.q, b.b], atol=1e-11)


def test_quasi_scalars_converge():
    ref = scalar_symbols(UNIT, 1.0)
    errs = []
    for eps1 in (1 / 4, 1 / 8, 1 / 16):
        s = scalar_symbols(UNIT, 1.0, quadset=build_quadset(eps1, UNIT))
        errs.append(max(abs(s.p - ref.p), abs(s.q - ref.q), abs(s.b - ref.b)))
    # p and q meet 1e-3 at eps1 = 1/8; b misses it slightly (about 1.6e-3)
    assert errs[1] < 2e-3
    assert np.log2(errs[0] / errs[1]) >= 1 and np.log2(errs[1] / errs[2]) >= 1


def test_symbol_at_origin():
    k = RadialKernel.inverse_distance(0.25)
    np.testing.assert_array_equal(navier_symbol([0.0, 0.0], k, MAT).matrix, 0)


def test_direct_and_decomposition_agree(rng):
    k = RadialKernel.inverse_distance(0.25)
    xi = rng.uniform(-40, 40, (20, 2))
    for w in xi:
        a = navier_symbol(w, k, MAT, route="direct").matrix
        b = navier_symbol(w, k, MAT, route="decomposition").matrix
        np.testing.assert_allclose(a, b, atol=1e-9)
    with pytest.raises(ValueError):
        navier_symbol(xi, k, MAT)


def test_quasi_decomposition_only_on_axes(rng):
    # the point set has square symmetry only, so the scalar decomposition
    # holds along the coordinate axes and the direct sum is the definition
    k = RadialKernel.inverse_distance(0.25)
    qs = build_quadset(0.25, UNIT)
    for a in rng.uniform(0.5, 40, 4):
        for w in ([a, 0.0], [0.0, -a]):
            direct = navier_symbol(w, k, MAT, quadset=qs, route="direct").matrix
            split = navier_symbol(w, k, MAT, quadset=qs, route="decomposition").matrix
            np.testing.assert_allclose(direct, split, rtol=1e-12, atol=1e-9)
    w = [17.0, 9.0]
    direct = navier_symbol(w, k, MAT, quadset=qs, route="direct").matrix
    split = navier_symbol(w, k, MAT, quadset=qs, route="decomposition").matrix
    assert np.abs(direct - split).max() > 1.0


def test_local_symbol():
    np.testing.assert_allclose(local_symbol([1.0, 0.0], MAT), [[2 * MAT.mu + MAT.lam, 0], [0, MAT.mu]])


@pytest.mark.parametrize("quasi", [False, True])
def test_lattice_bond_part_is_stencil_transform(quasi):
    delta, h = 0.25, (1 / 8, 1 / 16)
    qs = build_quadset(0.25, UNIT)
    k = RadialKernel.inverse_distance(delta)
    integ = qs if quasi else polar_rule(delta, min(h), grid_h=h, radial_order=8, angular_order=8)
    stn = compute_stencils(h, k, integ)
    offsets = [np.arange(-r, r + 1) for r in stn.radius]
    form = "quasi_collocation" if quasi else "collocation"
    for xi in ([0.7, -1.3], [3.0, 2.9], [-0.05, 0.02]):
        phase = np.exp(1j * (offsets[0][:, None] * xi[0] + offsets[1][None, :] * xi[1]))
        transform = np.einsum("abij,ij->ab", stn.bond, phase).real * MAT.bond_coefficient(1.0)
        sym = lattice_symbol(xi, delta, h, MAT, form=form, quadset=qs if quasi else None, part="bond").matrix
        np.testing.assert_allclose(sym, -np.prod(h) * transform, rtol=1e-7, atol=1e-12)


def test_lattice_symbol_examples():
    delta, h = 0.25, (1 / 8, 1 / 16)
    mc = lattice_symbol([np.pi / 2, np.pi / 2], delta, h, MAT).matrix
    np.testing.assert_allclose(mc, mc.T, atol=1e-15)
    assert np.linalg.eigvalsh(mc)[0] > 0
    small = lattice_symbol([1e-6, 1e-6], delta, h, MAT).matrix
    assert np.linalg.norm(small) < 1e-9


def test_quasi_poisson_matches_shells():
    delta, h = 0.25, (1 / 8, 1 / 16)
    qs = build_quadset(0.25, UNIT)
    xi = np.array([[0.9, -0.4], [2.5, 1.0]])
    a = lattice_symbol(xi, delta, h, MAT, form="quasi_collocation", quadset=qs, truncation="poisson")
    b = lattice_symbol(xi, delta, h, MAT, form="quasi_collocation", quadset=qs, truncation="shells", max_shells=200, tol=1e-6)
    np.testing.assert_allclose(a, b, rtol=1e-4)


def test_quasi_shells_do_not_converge_at_default_cap():
    qs = build_quadset(0.25, UNIT)
    with pytest.raises(NonconvergentSumError):
        # summands decay only algebraically; near the zone edge 64 shells are not enough
        lattice_symbol([3.0, 2.9], 0.25, (1 / 8, 1 / 16), MAT, form="quasi_collocation", quadset=qs, truncation="shells")


def test_scan_wavevectors_count():
    grid, rays = scan_wavevectors()
    assert len(grid) == 1088
    assert not np.any(np.all(grid == 0, axis=1))
    assert np.all(np.abs(grid) < np.pi)
    assert len(rays) == 8 * 64


def test_scan_flags_hypothesis():
    mat = Material.from_engineering(1.0, 0.2, allow_lambda_lt_mu=True)
    report = stability_scan([(0.25, (0.125, 0.0625))], mat, resolution=5, radial=4)
    assert not report.hypothesis_holds
    assert report.notes
    text = report.to_csv()
    assert text.splitlines()[0].startswith("delta,h1")


def test_state_constants():
    c = state_constants(MAT)
    assert c["m"] == pytest.approx(1.0)
    assert c["alternative_constant"] == pytest.approx(2 * c["operator_constant"])
    assert c["state_coefficient"] == pytest.approx(MAT.state_coefficient(1.0))
