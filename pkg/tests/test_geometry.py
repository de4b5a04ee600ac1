import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fracflow.catalog import CATALOG, cylinder, saddle, sine2, sphere, tilted_plane
from fracflow.errors import DegenerateSurfaceError, DomainError, MetricDegeneracyError
from fracflow.geometry import (
    SurfacePatch,
    detG_quartic,
    eval_quartic,
    fd_jet,
    geometry_at,
    grad_norm_G,
    gram_metric,
    graph_patch,
    normal_frame,
    rigid_motion,
    rotation_y,
    surface_jet,
)

u_s, v_s, lam_s = sp.symbols("u v lam", real=True)

SYMBOLIC = {
    "saddle": (saddle(), sp.Matrix([u_s, v_s, sp.Rational(3, 10) * (u_s**2 - v_s**2) + sp.Rational(1, 5) * v_s * sp.sin(u_s)])),
    "cylinder": (cylinder(), sp.Matrix([sp.cos(u_s), v_s, sp.sin(u_s)])),
    "sphere": (
        sphere(1.5),
        sp.Rational(3, 2) * sp.Matrix([sp.sin(u_s) * sp.cos(v_s), sp.sin(u_s) * sp.sin(v_s), sp.cos(u_s)]),
    ),
    "sine2": (sine2(), sp.Matrix([u_s, v_s, 2 * sp.sin(u_s)])),
    "tilted_plane": (tilted_plane(0.5), sp.Matrix([u_s, v_s, u_s / 2])),
}


def _symbolic_metric(r):
    ru, rv = r.diff(u_s), r.diff(v_s)
    N = ru.cross(rv)
    n = N / sp.sqrt(N.dot(N))
    R = r + lam_s * n
    J = sp.Matrix.hstack(R.diff(u_s), R.diff(v_s), R.diff(lam_s))
    return J.T * J, n


@pytest.mark.parametrize("name", sorted(SYMBOLIC))
def test_hand_coded_jets_match_sympy(name):
    patch, r = SYMBOLIC[name]
    d1, d2 = patch.domain[:2], patch.domain[2:]
    pts = [(d1[0] + f * (d1[1] - d1[0]), d2[0] + g * (d2[1] - d2[0])) for f, g in ((0.3, 0.6), (0.71, 0.2), (0.5, 0.9))]
    exprs = {
        "r": r,
        "r_u": r.diff(u_s),
        "r_v": r.diff(v_s),
        "r_uu": r.diff(u_s, 2),
        "r_uv": r.diff(u_s, v_s),
        "r_vv": r.diff(v_s, 2),
    }
    for a, b in pts:
        for key, e in exprs.items():
            want = np.array(e.subs({u_s: a, v_s: b}).evalf(), float).ravel()
            got = getattr(patch, key)(np.array(a), np.array(b))
            np.testing.assert_allclose(got, want, atol=1e-13, err_msg=f"{name}.{key}")


@pytest.mark.parametrize("name", ["saddle", "sphere", "sine2"])
def test_quartic_coefficients_match_sympy_determinant(name):
    patch, r = SYMBOLIC[name]
    G, _ = _symbolic_metric(r)
    d1, d2 = patch.domain[:2], patch.domain[2:]
    a, b = 0.37 * d1[0] + 0.63 * d1[1], 0.55 * d2[0] + 0.45 * d2[1]
    det = sp.simplify(G.subs({u_s: a, v_s: b}).evalf(30).det())
    poly = sp.Poly(sp.expand(det), lam_s)
    want = [float(poly.coeff_monomial(lam_s**k)) for k in range(5)]
    geo = geometry_at(patch, np.array(a), np.array(b))
    got = detG_quartic(geo.forms, geo.frame)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("name", ["saddle", "sphere", "cylinder"])
def test_curvatures_match_sympy(name):
    patch, r = SYMBOLIC[name]
    ru, rv = r.diff(u_s), r.diff(v_s)
    N = ru.cross(rv)
    n = N / sp.sqrt(N.dot(N))
    E, F, Gm = ru.dot(ru), ru.dot(rv), rv.dot(rv)
    L, M, Nn = r.diff(u_s, 2).dot(n), r.diff(u_s, v_s).dot(n), r.diff(v_s, 2).dot(n)
    K = (L * Nn - M**2) / (E * Gm - F**2)
    H = (E * Nn - 2 * F * M + Gm * L) / (2 * (E * Gm - F**2))
    d1, d2 = patch.domain[:2], patch.domain[2:]
    a, b = 0.42 * d1[0] + 0.58 * d1[1], 0.3 * d2[0] + 0.7 * d2[1]
    geo = geometry_at(patch, np.array(a), np.array(b))
    sub = {u_s: a, v_s: b}
    assert float(geo.forms.K) == pytest.approx(float(K.subs(sub)), rel=1e-12, abs=1e-14)
    assert float(geo.forms.H) == pytest.approx(float(H.subs(sub)), rel=1e-12, abs=1e-14)


def test_sphere_curvatures_are_constant():
    rho = 1.5
    geo = geometry_at(sphere(rho), np.linspace(0.4, 2.7, 9), np.linspace(0.1, 6.0, 9))
    np.testing.assert_allclose(geo.forms.K, 1 / rho**2, rtol=1e-12)
    np.testing.assert_allclose(np.abs(geo.forms.H), 1 / rho, rtol=1e-12)


def test_cylinder_normal_points_to_axis():
    u = np.linspace(0.1, 3.0, 7)
    fr = normal_frame(cylinder(), u, np.zeros_like(u))
    radial = np.stack([np.cos(u), np.zeros_like(u), np.sin(u)], -1)
    np.testing.assert_allclose(fr.n, -radial, atol=1e-14)


def test_cylinder_metric_degenerates_at_the_axis():
    geo = geometry_at(cylinder(), np.array([1.0]), np.array([0.0]))
    c = detG_quartic(geo.forms, geo.frame)
    # offset towards the axis by the radius collapses the u direction
    assert eval_quartic(c, 1.0)[0] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(MetricDegeneracyError) as info:
        geo.metric(np.array([1.0]))
    assert info.value.lam == pytest.approx(1.0)


def test_plane_metric_is_lambda_independent():
    geo = geometry_at(tilted_plane(0.5), np.array([0.3]), np.array([0.1]))
    c = detG_quartic(geo.forms, geo.frame)
    np.testing.assert_allclose(c[0, 1:], 0.0, atol=1e-15)
    assert c[0, 0] == pytest.approx(1.25)


def test_domain_and_degeneracy_errors():
    with pytest.raises(DomainError):
        surface_jet(saddle(), np.array([2.0]), np.array([0.0]))
    z = lambda u, v: np.zeros(np.broadcast(u, v).shape + (3,))
    flat = SurfacePatch(r=z, r_u=z, r_v=z, r_uu=z, r_uv=z, r_vv=z, domain=(0, 1, 0, 1))
    with pytest.raises(DegenerateSurfaceError):
        geometry_at(flat, np.array([0.5]), np.array([0.5]))


def test_finite_difference_jet_agrees():
    patch = saddle()
    u, v = np.array([0.2, -0.4]), np.array([0.3, 0.5])
    exact = surface_jet(patch, u, v)
    approx = fd_jet(patch.r, u, v, step=1e-4)
    for key in ("r_u", "r_v", "r_uu", "r_uv", "r_vv"):
        np.testing.assert_allclose(getattr(approx, key), getattr(exact, key), atol=1e-6)


def test_grad_norm_reduces_to_euclidean_on_plane():
    geo = geometry_at(tilted_plane(0.0), np.array([0.5]), np.array([0.0]))
    met = geo.metric(np.array([0.01]))
    g = np.array([[3.0, -4.0, 12.0]])
    assert grad_norm_G(g, met)[0] == pytest.approx(13.0)


@settings(max_examples=40, deadline=None)
@given(
    theta=st.floats(-3.0, 3.0),
    shift=st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)),
    u=st.floats(-0.9, 0.9),
    v=st.floats(-0.9, 0.9),
    lam=st.floats(-0.2, 0.2),
)
def test_metric_invariant_under_rigid_motion(theta, shift, u, v, lam):
    base = saddle()
    moved = rigid_motion(base, shift, rotation_y(theta))
    a = geometry_at(base, np.array([u]), np.array([v])).metric(np.array([lam]))
    b = geometry_at(moved, np.array([u]), np.array([v])).metric(np.array([lam]))
    np.testing.assert_allclose(b.G, a.G, rtol=1e-11, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(u=st.floats(0.05, 6.2), lam=st.floats(-0.15, 0.15))
def test_quartic_equals_gram_determinant_on_graph(u, lam):
    patch = graph_patch(lambda t: np.sin(t), lambda t: np.cos(t), lambda t: -np.sin(t), (0, 2 * np.pi, -1, 1))
    geo = geometry_at(patch, np.array([u]), np.array([0.0]))
    q = eval_quartic(detG_quartic(geo.forms, geo.frame), lam)[0]
    G = gram_metric(patch, np.array([u]), np.array([0.0]), np.array([lam]))[0]
    assert q == pytest.approx(np.linalg.det(G), rel=1e-10)


def test_catalog_entries_build():
    for name, entry in CATALOG.items():
        p = entry.patch()
        th = entry.thickness(entry.default_H)
        d = p.domain
        u, v = np.array([0.5 * (d[0] + d[1])]), np.array([0.5 * (d[2] + d[3])])
        geometry_at(p, u, v).metric(th.h(u, v))
