import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from fracflow.catalog import constant_thickness, cylinder, halfcircle, plane, saddle, sine2, tilted_plane, wavy_thickness
from fracflow.discretization import Grid1D, PicardConfig
from fracflow.errors import FracflowError
from fracflow.flowlaw import FluidParams, f_beta
from fracflow.fracture import (
    FractureScenario,
    compare_fracture_solutions,
    fracture_volume,
    make_fracture_scenario,
    original_grid,
    qtilde,
    solve_original,
    solve_reduced_I,
    solve_reduced_II,
    thickness_integrals,
    total_supply,
    well_flux,
)


def lam_average(field):
    """Mean over the thickness of each grid column (trapezoid in s, exact for Q1)."""
    g = field.grid
    W = field.W.reshape(g.nu + 1, g.ns + 1)
    return trapezoid(W, g.s_nodes, axis=1) / 2.0


def test_flat_strip_lambda_average_matches_closed_form_with_unequal_fluxes():
    h, qp, qm = 0.02, 1.5, 0.5
    scn = make_fracture_scenario(plane(), constant_thickness(2 * h), FluidParams(k_f=2.0), qp, qm)
    field = solve_original(scn, original_grid(scn, 200, 8))
    u = field.grid.u_nodes
    a, rho = scn.params.alpha, scn.params.source_density
    exact = a * (rho + (qp + qm) / (2 * h)) * (u - u**2 / 2)
    avg = lam_average(field)
    assert np.max(np.abs(avg - exact)) / np.max(exact) < 1e-3


def test_plane_reduced_models_coincide():
    scn = make_fracture_scenario(tilted_plane(0.7), constant_thickness(0.1), FluidParams(beta=0.5), 2.0, 1.0)
    g = Grid1D.uniform(0, 1, 64)
    r1 = solve_reduced_I(scn, g, PicardConfig(rel_tol=1e-12))
    r2 = solve_reduced_II(scn, g, PicardConfig(rel_tol=1e-12))
    np.testing.assert_allclose(r1.W, r2.W, rtol=1e-10, atol=1e-12)


def test_cylinder_thickness_integrals_match_quadrature_oracle():
    # unit cylinder with inward normal: sqrt|G| = 1 - lam, G^11 = (1 - lam)^-2
    h = 0.2
    scn = make_fracture_scenario(cylinder(), constant_thickness(2 * h), FluidParams())
    u = np.array([0.4, 1.7])
    L11, A, L12, L22 = thickness_integrals(scn, u, 3)
    a_exact = quad(lambda l: 1 - l, -h, h)[0]
    l11_exact = quad(lambda l: 1 / (1 - l), -h, h)[0]
    np.testing.assert_allclose(A, a_exact, rtol=1e-14)
    np.testing.assert_allclose(L11, l11_exact, rtol=1e-4)
    np.testing.assert_allclose(L12, 0.0, atol=1e-15)
    np.testing.assert_allclose(L22, a_exact, rtol=1e-14)
    assert fracture_volume(scn) == pytest.approx(np.pi * a_exact, rel=1e-12)


def test_thickness_integrals_with_forchheimer_match_quadrature_oracle():
    h, beta, Wu = 0.15, 3.0, 2.5
    scn = make_fracture_scenario(cylinder(), constant_thickness(2 * h), FluidParams(beta=beta))
    L11 = thickness_integrals(scn, np.array([1.0]), 7, np.array([Wu]))[0][0]
    oracle = quad(lambda l: f_beta(1.0, beta, abs(Wu) / (1 - l)) / (1 - l), -h, h, epsabs=1e-14)[0]
    assert L11 == pytest.approx(oracle, rel=1e-10)


def test_qtilde_uses_face_metric():
    h, q = 0.1, 3.0
    scn = make_fracture_scenario(cylinder(), constant_thickness(2 * h), FluidParams(), q, q)
    u = np.array([0.5])
    assert qtilde(scn, u, +1)[0] == pytest.approx(q * (1 - h))
    assert qtilde(scn, u, -1)[0] == pytest.approx(q * (1 + h))
    assert qtilde(scn, u, +1, at="center")[0] == pytest.approx(q)


@pytest.mark.parametrize("solver", [solve_original, solve_reduced_I, solve_reduced_II])
def test_discrete_well_flux_balances_supply(solver):
    scn = make_fracture_scenario(sine2(), wavy_thickness(0.2), FluidParams(beta=0.1), 2.0, 1.0)
    field = solver(scn, cfg=PicardConfig(rel_tol=1e-10)) if solver is not solve_original else solver(scn, original_grid(scn, 200, 8))
    assert well_flux(field) == pytest.approx(total_supply(field), rel=1e-9)


def test_total_supply_equals_source_plus_face_fluxes():
    # cylinder: sqrt|G| integrates exactly, so supply = Q + q+ L (1 - h) + q- L (1 + h)
    h, qp, qm = 0.1, 2.0, 1.0
    scn = make_fracture_scenario(cylinder(), constant_thickness(2 * h), FluidParams(Q=1.0), qp, qm)
    field = solve_original(scn, original_grid(scn, 100, 4))
    expected = 1.0 + np.pi * (qp * (1 - h) + qm * (1 + h))
    assert total_supply(field) == pytest.approx(expected, rel=1e-10)


def test_zero_data_gives_zero_pressure():
    scn = make_fracture_scenario(sine2(), wavy_thickness(0.2), FluidParams(Q=0.0, beta=1.0))
    for field in (solve_original(scn, original_grid(scn, 50, 4)), solve_reduced_I(scn), solve_reduced_II(scn)):
        np.testing.assert_array_equal(field.W, 0.0)


def test_thin_halfcircle_profile_increases_from_the_well():
    scn = make_fracture_scenario(halfcircle(), constant_thickness(0.025), FluidParams(beta=0.1), 10.0, 10.0)
    field = solve_original(scn, original_grid(scn, 200, 8))
    line = field.grid.center_line(field.W)
    assert line[0] == 0.0
    assert np.all(np.diff(line) > 0)
    assert field.info["final_residual"] <= 1e-8
    assert field.info["residual_monotone"]


def test_identical_fields_compare_to_zero():
    scn = make_fracture_scenario(tilted_plane(0.0), constant_thickness(0.05), FluidParams(Q=1.0))
    o = solve_original(scn, original_grid(scn, 64, 4))
    r = solve_reduced_II(scn, Grid1D(o.grid.u_nodes))
    c = compare_fracture_solutions(o, r, scn)
    assert c["max_rel_diff_on_line"] < 1e-10
    assert c["l32_W_lambda"] < 1e-10


def test_v_dependent_surface_is_rejected():
    with pytest.raises(FracflowError):
        FractureScenario(saddle(), constant_thickness(0.1), FluidParams())


def test_qtilde_location_validation():
    with pytest.raises(ValueError):
        FractureScenario(plane(), constant_thickness(0.1), FluidParams(), qtilde_at="middle")
