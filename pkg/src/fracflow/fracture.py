"""Pressure in an isolated fracture: the full cross-section model and two
thickness-integrated line models.

All solvers work on a v-invariant cross-section ``v = v0``.  The full model
lives on the (u, lam) strip ``|lam| <= h(u)``; the line models on the
barycentric line.  The well sits at the left end ``u = u0`` (W = 0), the
right end is impermeable and ``q_plus``/``q_minus`` are influx densities on
the two faces ``lam = +h`` and ``lam = -h``.

Face fluxes are understood in parameter coordinates: the conormal flux of the
weighted operator per unit parameter length equals ``q sqrt|G|`` on the face.
Integrating the full model across the thickness then gives the line source
``q sqrt(1 + h_u^2) sqrt|G|`` without further approximation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .discretization import (
    BoundaryConditions,
    Grid1D,
    Grid2D,
    NeumannLoad,
    PicardConfig,
    PressureField,
    gauss_legendre,
    picard_solve,
)
from .errors import FracflowError
from .flowlaw import FluidParams, f_beta
from .geometry import PointGeometry, SurfacePatch, ThicknessProfile, geometry_at

GAUSS3 = gauss_legendre(3)


def _as_fn(q):
    if callable(q):
        return q
    c = float(q)
    return lambda u: np.full(np.shape(u), c)


@dataclass(frozen=True)
class FractureScenario:
    patch: SurfacePatch
    thickness: ThicknessProfile
    params: FluidParams
    q_plus: Callable | float = 0.0
    q_minus: Callable | float = 0.0
    u_range: tuple | None = None
    v0: float = 0.0
    qtilde_at: str = "boundary"  # where sqrt|G| in the line source is evaluated: "boundary" or "center"
    name: str = ""

    def __post_init__(self):
        if self.u_range is None:
            object.__setattr__(self, "u_range", tuple(self.patch.domain[:2]))
        if self.qtilde_at not in ("boundary", "center"):
            raise ValueError("qtilde_at must be 'boundary' or 'center'")
        u = np.linspace(*self.u_range, 257)
        v = np.full_like(u, self.v0)
        jet_v = self.patch.r_v(u, v)
        if np.any(np.abs(self.patch.r_uv(u, v)) > 1e-12) or np.any(np.abs(self.patch.r_vv(u, v)) > 1e-12):
            raise FracflowError("fracture cross-section solvers need a v-invariant surface")
        if np.any(np.abs(self.thickness.h_v(u, v)) > 1e-12) or np.any(np.abs(np.diff(jet_v, axis=0)) > 1e-12):
            raise FracflowError("thickness and r_v must not depend on the position along the fracture")

    @property
    def length(self):
        return self.u_range[1] - self.u_range[0]

    def h(self, u):
        return np.asarray(self.thickness.h(u, np.full(np.shape(u), self.v0)), float)

    def h_u(self, u):
        return np.asarray(self.thickness.h_u(u, np.full(np.shape(u), self.v0)), float)

    def geometry(self, u) -> PointGeometry:
        u = np.asarray(u, float)
        return geometry_at(self.patch, u, np.full(u.shape, self.v0), check=False)

    def q(self, side, u):
        return _as_fn(self.q_plus if side > 0 else self.q_minus)(np.asarray(u, float))

    def with_params(self, **changes):
        return replace(self, params=self.params.with_(**changes))


def fracture_volume(scn: FractureScenario, n_panels=400, n_lam=3):
    """Cross-section measure ``int int sqrt|G| dlam du`` (per unit v)."""
    xg, wg = gauss_legendre(5)
    edges = np.linspace(*scn.u_range, n_panels + 1)
    half = 0.5 * np.diff(edges)
    u = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * xg
    return float(np.sum(half[:, None] * wg * thickness_integrals(scn, u, n_lam)[1]))


def make_fracture_scenario(patch, thickness, params=None, q_plus=0.0, q_minus=0.0, **kw):
    """Scenario whose ``params.omega_vol`` is the fracture measure itself."""
    params = params or FluidParams()
    scn = FractureScenario(patch, thickness, params, q_plus, q_minus, **kw)
    return replace(scn, params=params.with_(omega_vol=fracture_volume(scn)))


# -- full cross-section model ------------------------------------------------


def _strip_geometry(scn, points):
    u = points[..., 0]
    lam = points[..., 1]
    metric = scn.geometry(u).metric(lam)
    return metric


def original_coefficient(scn: FractureScenario, points, gradW):
    """``f sqrt|G| diag(G^11, 1)`` at (u, lam) points, W_v = 0."""
    metric = _strip_geometry(scn, points)
    g11 = metric.Ginv[..., 0, 0]
    zeta = np.sqrt(g11 * gradW[..., 0] ** 2 + gradW[..., 1] ** 2)
    w = f_beta(scn.params.alpha, scn.params.beta, zeta) * metric.sqrt_detG
    C = np.zeros(points.shape[:-1] + (2, 2))
    C[..., 0, 0] = w * g11
    C[..., 1, 1] = w
    return C


def _face_load(scn, grid, side):
    bq = grid.boundary_quadrature("top" if side > 0 else "bottom", order=3)
    sign = 1.0 if side > 0 else -1.0

    def g(points):
        u = points[..., 0]
        lam = sign * scn.h(u)
        return scn.q(side, u) * scn.geometry(u).metric(lam).sqrt_detG

    # chord length vs parameter length: q is per unit length along the face
    return NeumannLoad(bq, g)


def original_grid(scn, n_u=400, n_s=16):
    return Grid2D.uniform(scn.u_range[0], scn.u_range[1], n_u, n_s, scn.h)


def solve_original(scn: FractureScenario, grid: Grid2D | None = None, cfg: PicardConfig = PicardConfig()):
    grid = grid or original_grid(scn)
    bcs = BoundaryConditions(
        dirichlet_nodes=grid.side_nodes("well"),
        dirichlet_values=0.0,
        neumann=[_face_load(scn, grid, +1), _face_load(scn, grid, -1)],
    )
    rho = scn.params.source_density
    field = picard_solve(
        grid,
        lambda pts, gW: original_coefficient(scn, pts, gW),
        lambda pts: rho * _strip_geometry(scn, pts).sqrt_detG,
        bcs,
        cfg,
        nonlinear=scn.params.beta > 0,
    )
    field.info["model"] = "original"
    return field


# -- line models ---------------------------------------------------------------


@dataclass
class ReducedCoefficients:
    L11: np.ndarray
    L12: np.ndarray
    L22: np.ndarray
    A: np.ndarray
    qtilde_plus: np.ndarray
    qtilde_minus: np.ndarray


def thickness_integrals(scn, u, n_lam=3, W_u=None):
    """``(L11, A, L12, L22)`` at points ``u`` by Gauss quadrature over [-h, h]."""
    u = np.asarray(u, float)
    xg, wg = gauss_legendre(n_lam)
    geo = scn.geometry(u)
    h = scn.h(u)
    W_u = np.zeros_like(u) if W_u is None else np.asarray(W_u, float)
    L11 = np.zeros_like(u)
    L12 = np.zeros_like(u)
    L22 = np.zeros_like(u)
    A = np.zeros_like(u)
    for x, w in zip(xg, wg):
        metric = geo.metric(x * h)
        gi = metric.Ginv
        zeta = np.sqrt(gi[..., 0, 0]) * np.abs(W_u)
        wf = w * h * metric.sqrt_detG
        fb = f_beta(scn.params.alpha, scn.params.beta, zeta)
        L11 = L11 + wf * fb * gi[..., 0, 0]
        L12 = L12 + wf * fb * gi[..., 0, 1]
        L22 = L22 + wf * fb * gi[..., 1, 1]
        A = A + wf
    return L11, A, L12, L22


def qtilde(scn, u, side, at=None):
    """Line source from face ``side``: ``q sqrt(1 + h_u^2) sqrt|G|``."""
    at = at or scn.qtilde_at
    u = np.asarray(u, float)
    lam = side * scn.h(u) if at == "boundary" else np.zeros_like(u)
    sg = scn.geometry(u).metric(lam).sqrt_detG
    return scn.q(side, u) * np.sqrt(1 + scn.h_u(u) ** 2) * sg


def reduced_coefficients(scn: FractureScenario, u, W_u=None) -> ReducedCoefficients:
    L11, A, L12, L22 = thickness_integrals(scn, u, 3, W_u)
    return ReducedCoefficients(L11, L12, L22, A, qtilde(scn, u, +1), qtilde(scn, u, -1))


def line_grid(scn, n_nodes=400):
    return Grid1D.uniform(scn.u_range[0], scn.u_range[1], n_nodes - 1)


def _solve_line(scn, grid, cfg, coeff, source, tag):
    bcs = BoundaryConditions(dirichlet_nodes=np.array([0]), dirichlet_values=0.0)
    field = picard_solve(grid, coeff, source, bcs, cfg, nonlinear=scn.params.beta > 0)
    field.info["model"] = tag
    return field


def solve_reduced_I(scn: FractureScenario, grid: Grid1D | None = None, cfg: PicardConfig = PicardConfig()):
    grid = grid or line_grid(scn)
    rho = scn.params.source_density

    def coeff(pts, gW):
        return thickness_integrals(scn, pts[..., 0], 3, gW[..., 0])[0]

    def source(pts):
        u = pts[..., 0]
        c = reduced_coefficients(scn, u)
        return rho * c.A + c.qtilde_plus + c.qtilde_minus

    return _solve_line(scn, grid, cfg, coeff, source, "reduced1")


def reduced_II_coefficient(scn, u, W_u):
    geo = scn.geometry(u)
    g11inv = geo.forms.g22 / geo.forms.detg
    sg = np.sqrt(geo.forms.detg)
    zeta = np.sqrt(g11inv) * np.abs(W_u)
    return 2 * scn.h(u) * f_beta(scn.params.alpha, scn.params.beta, zeta) * sg * g11inv


def solve_reduced_II(scn: FractureScenario, grid: Grid1D | None = None, cfg: PicardConfig = PicardConfig()):
    grid = grid or line_grid(scn)
    rho = scn.params.source_density

    def coeff(pts, gW):
        return reduced_II_coefficient(scn, pts[..., 0], gW[..., 0])

    def source(pts):
        u = pts[..., 0]
        sg = np.sqrt(scn.geometry(u).forms.detg)
        return 2 * rho * scn.h(u) * sg + qtilde(scn, u, +1, "center") + qtilde(scn, u, -1, "center")

    return _solve_line(scn, grid, cfg, coeff, source, "reduced2")


def well_flux(field: PressureField):
    """Outflow through the Dirichlet boundary, read off the discrete residual."""
    system = field.info["system"]
    r = system.residual(field.W)
    return float(-np.sum(r[system.dirichlet_nodes]))


def total_supply(field: PressureField):
    return float(np.sum(field.info["system"].F))


# -- comparison ------------------------------------------------------------------


def compare_fracture_solutions(W_orig: PressureField, W_red: PressureField, scn: FractureScenario):
    """Difference measures between the strip solution and a line solution.

    The line solution is extended constantly across the thickness.  Returns
    squared L^{3/2} norms of the tangential gradient difference and of W_lam
    (measure sqrt|G| du dlam), and the maximum relative difference on the
    barycentric line.
    """
    g2, g1 = W_orig.grid, W_red.grid
    if not (np.isclose(g2.u_nodes[0], g1.nodes[0]) and np.isclose(g2.u_nodes[-1], g1.nodes[-1])):
        raise FracflowError("solutions live on different u ranges")
    quad = g2.quadrature(2)
    grad = quad.gradient(W_orig.W)
    u = quad.points[..., 0]
    lam = quad.points[..., 1]
    i, _ = g1.locate(u)
    dred = (W_red.W[i + 1] - W_red.W[i]) / (g1.nodes[i + 1] - g1.nodes[i])
    geo = scn.geometry(u)
    sg = geo.metric(lam).sqrt_detG
    gu = np.sqrt(geo.forms.g22 / geo.forms.detg)
    w = quad.weights * sg
    l32_u = np.sum(w * np.abs(gu * (grad[..., 0] - dred)) ** 1.5) ** (4.0 / 3.0)
    l32_lam = np.sum(w * np.abs(grad[..., 1]) ** 1.5) ** (4.0 / 3.0)
    line = g2.center_line(W_orig.W)
    red_on = g1.interpolate(W_red.W, g2.u_nodes)
    scale = np.max(np.abs(line))
    rel = float(np.max(np.abs(line - red_on)) / scale) if scale > 0 else float(np.max(np.abs(red_on)))
    return {"l32_grad_u_diff": float(l32_u), "l32_W_lambda": float(l32_lam), "max_rel_diff_on_line": rel}
