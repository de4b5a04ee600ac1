"""Monolithic reservoir-fracture solves, diffusive capacity and pseudo-steady state.

Both coupled models share one mesh.  The full model resolves each fracture
strip with Forchheimer elements.  The reduced model keeps the porous mesh
unchanged and replaces each strip by a thickness-integrated line operator on
the strip's center nodes; every face node is tied to the line value
interpolated at its own parameter u, which transmits the porous face fluxes
into the line equation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..discretization import Grid1D, PicardConfig, SparseSystem, assemble_weighted_diffusion, picard_iterate
from ..discretization.assembly import load_vector, stiffness
from ..errors import FracflowError
from ..flowlaw import FluidParams, f_beta
from ..fracture import thickness_integrals
from .mesh import CoupledMesh, build_coupled_mesh
from .scenario import ReservoirScenario

log = logging.getLogger(__name__)


@dataclass
class CoupledSolution:
    """Nodal field on the coupled mesh plus model-specific integrals.

    ``W`` holds a value for every mesh node; in the reduced model strip nodes
    carry the line value of their column.  ``integral_W`` is the integral of
    W over the whole flow domain as seen by the model, and ``omega_vol`` the
    measure used in the source.
    """

    mesh: CoupledMesh
    W: np.ndarray
    model: str
    params: FluidParams
    integral_W: float
    well_flux: float
    info: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)  # per fracture: (u, W along the barycentric line)

    @property
    def omega_vol(self):
        return self.params.omega_vol

    @property
    def mean_pressure(self):
        return self.integral_W / self.params.omega_vol


@dataclass(frozen=True)
class PIReport:
    H: float
    beta: float
    PI_PD: float
    PI_R1: float

    @property
    def rel_error(self):
        return abs(self.PI_PD - self.PI_R1) / self.PI_PD


def _porous_parts(mesh: CoupledMesh, params: FluidParams):
    quad = mesh.quadrature(1)
    por = mesh.region == 0
    qp = mesh.subset(por)
    Kp = stiffness(qp, np.full(qp.weights.shape, params.k_p / params.mu), mesh.n_nodes)
    return quad, por, qp, Kp


def _triangle_integral(mesh, W, mask):
    a = mesh.areas[mask]
    return float(np.sum(a * W[mesh.triangles[mask]].mean(axis=1)))


def _reaction_flux(system: SparseSystem, W):
    r = system.residual(W)
    return float(-np.sum(r[system.dirichlet_nodes]))


def solve_coupled_original(scn: ReservoirScenario, cfg: PicardConfig = PicardConfig(), mesh: CoupledMesh | None = None):
    mesh = mesh or build_coupled_mesh(scn)
    params = scn.params.with_(omega_vol=mesh.porous_area + mesh.fracture_area)
    quad, por, qp, Kp = _porous_parts(mesh, params)
    qf = mesh.subset(~por)
    F = load_vector(quad, np.full(quad.weights.shape, params.source_density), mesh.n_nodes)
    well = mesh.node_tags["well"]

    def build(W):
        K = Kp
        if qf.conn.shape[0]:
            zeta = np.linalg.norm(qf.gradient(W), axis=-1)
            K = Kp + stiffness(qf, f_beta(params.alpha, params.beta, zeta), mesh.n_nodes)
        return SparseSystem(K, F, well, np.zeros(well.size))

    nonlinear = params.beta > 0 and bool(qf.conn.shape[0])
    W, info = picard_iterate(build, mesh.n_nodes, cfg, nonlinear)
    lines = []
    for st in mesh.strips:
        lines.append((st.center_u, W[st.center_nodes]))
    sol = CoupledSolution(
        mesh,
        W,
        "PD",
        params,
        _triangle_integral(mesh, W, np.ones(len(mesh.triangles), bool)),
        _reaction_flux(info["system"], W),
        info,
        lines,
    )
    return sol


def _face_lengths(mesh, ids):
    """Lumped boundary length attached to each node of a polyline."""
    p = mesh.points[ids]
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    out = np.zeros(len(ids))
    out[:-1] += 0.5 * seg
    out[1:] += 0.5 * seg
    return out


def _interp_weights(nodes_u, u):
    """Column indices and weights of piecewise-linear interpolation, clamped at the ends."""
    u = np.clip(u, nodes_u[0], nodes_u[-1])
    k = np.clip(np.searchsorted(nodes_u, u, side="right") - 1, 0, nodes_u.size - 2)
    w = (u - nodes_u[k]) / (nodes_u[k + 1] - nodes_u[k])
    return k, w


def solve_coupled_reduced(scn: ReservoirScenario, cfg: PicardConfig = PicardConfig(), mesh: CoupledMesh | None = None):
    mesh = mesh or build_coupled_mesh(scn)
    n = mesh.n_nodes
    por = mesh.region == 0
    # a face point at parameter u carries the line value at the same u
    ties = {}  # mesh node -> (line nodes, weights)
    lines = []
    for frac, st in zip(scn.fractures, mesh.strips):
        c = st.center_nodes
        n_s = st.nodes.shape[1] - 1
        for j in (0, n_s):
            k, w = _interp_weights(st.center_u, st.u[:, j])
            for node, kk, ww in zip(st.nodes[:, j], k, w):
                ties[int(node)] = ((c[kk], c[kk + 1]), (1.0 - ww, ww))
        if not scn.tip_wall:
            for node in st.porous_tip:
                ties[int(node)] = ((c[-1],), (1.0,))
        lines.append((frac, st, Grid1D(st.center_u)))
    used = set(np.unique(mesh.triangles[por]).tolist()) - set(ties)
    for _, st, _ in lines:
        used.update(st.center_nodes.tolist())
    used = np.array(sorted(used), np.int64)
    compact = np.full(n, -1)
    compact[used] = np.arange(used.size)
    rows, cols, vals = list(used), list(range(used.size)), [1.0] * used.size
    for node, (src, wts) in ties.items():
        for a, b in zip(src, wts):
            rows.append(node)
            cols.append(compact[a])
            vals.append(b)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, used.size))

    line_measure = 0.0
    for frac, st, grid in lines:
        fs = frac.as_fracture_scenario(scn.params)
        q = grid.quadrature(2)
        A = thickness_integrals(fs, q.points[..., 0], 3)[1]
        line_measure += q.integrate(A)
    params = scn.params.with_(omega_vol=mesh.porous_area + line_measure)
    rho = params.source_density
    quad, _, qp, Kp = _porous_parts(mesh, params)
    Fp = load_vector(qp, np.full(qp.weights.shape, rho), n)
    K_base = (P.T @ Kp @ P).tocsr()
    F_base = P.T @ Fp
    well = compact[mesh.node_tags["well"]]
    well = np.unique(well[well >= 0])
    scns = [frac.as_fracture_scenario(params) for frac, _, _ in lines]

    def line_system(W_dofs, k):
        frac, st, grid = lines[k]
        fs = scns[k]
        idx = compact[st.center_nodes]
        Wl = W_dofs[idx] if W_dofs is not None else None
        system = assemble_weighted_diffusion(
            grid,
            lambda pts, gW: thickness_integrals(fs, pts[..., 0], 3, gW[..., 0])[0],
            lambda pts: rho * thickness_integrals(fs, pts[..., 0], 3)[1],
            None,
            W=Wl,
        )
        return idx, system

    def build(W):
        K = K_base
        F = F_base.copy()
        for k in range(len(lines)):
            idx, s = line_system(W, k)
            Kl = s.K.tocoo()
            K = K + sp.csr_matrix((Kl.data, (idx[Kl.row], idx[Kl.col])), shape=K.shape)
            np.add.at(F, idx, s.F)
        return SparseSystem(K.tocsr(), F, well, np.zeros(well.size))

    nonlinear = params.beta > 0 and bool(lines)
    Wd, info = picard_iterate(build, used.size, cfg, nonlinear)
    W = P @ Wd
    integral = _triangle_integral(mesh, W, por)
    out_lines, qbar_max = [], 0.0
    r_p = Kp @ W - Fp
    for (frac, st, grid), fs in zip(lines, scns):
        Wl = Wd[compact[st.center_nodes]]
        for j in range(1, st.nodes.shape[1] - 1):
            W[st.nodes[:, j]] = np.interp(st.u[:, j], st.center_u, Wl)
        q = grid.quadrature(2)
        A = thickness_integrals(fs, q.points[..., 0], 3)[1]
        integral += q.integrate(A * q.values(Wl))
        out_lines.append((st.center_u, Wl))
        # flux leaving the porous medium through each face, per unit length
        n_s = st.nodes.shape[1] - 1
        qbar = 0.0
        for j in (0, n_s):
            ids = st.nodes[:, j]
            qbar = qbar + (-r_p[ids]) / _face_lengths(mesh, ids)
        qbar = 0.5 * qbar[1:]
        h = fs.h(st.center_u[1:])
        qbar_max = max(qbar_max, float(np.max(np.abs(qbar / h))))
    info["qbar_over_h_max"] = qbar_max
    return CoupledSolution(mesh, W, "R1", params, integral, _reaction_flux(info["system"], Wd), info, out_lines)


def diffusive_capacity(sol: CoupledSolution, params: FluidParams | None = None, form="pdd"):
    """``Q / PDD`` with the draw-down measured against the zero well pressure.

    ``form="flux"`` replaces Q by the discrete well outflow.
    """
    params = params or sol.params
    pdd = sol.mean_pressure
    if not pdd > 0:
        raise FracflowError(f"non-positive pressure draw-down {pdd!r}")
    q = params.Q if form == "pdd" else sol.well_flux
    return q / pdd


# -- pseudo-steady state ---------------------------------------------------------


@dataclass(frozen=True)
class PssState:
    """``p(x, t) = W(x) - gamma A t + K`` built from a converged auxiliary solve."""

    solution: CoupledSolution
    gamma: float
    A: float
    K: float = 0.0

    @classmethod
    def from_solution(cls, sol: CoupledSolution, K=0.0):
        return cls(sol, sol.params.gamma, sol.params.source_density, K)


@dataclass(frozen=True)
class PssPressure:
    """Pressure at one instant, stored as the steady field plus a uniform offset."""

    state: PssState
    t: float

    @property
    def offset(self):
        return -self.state.gamma * self.state.A * self.t + self.state.K

    @property
    def values(self):
        return self.state.solution.W + self.offset

    def domain_mean(self):
        return self.state.solution.mean_pressure + self.offset

    def well_mean(self):
        return 0.0 + self.offset

    def pdd(self):
        # the uniform offset cancels identically; use the steady field directly
        return self.state.solution.mean_pressure - 0.0

    def productivity(self):
        return self.state.solution.params.Q / self.pdd()


def pss_reconstruct(state: PssState, t) -> PssPressure:
    return PssPressure(state, float(t))


# -- model difference study ------------------------------------------------------


def porous_gradient_difference(pd: CoupledSolution, r1: CoupledSolution):
    """``||grad(W - W_bar)||^2`` over the porous triangles of the shared mesh."""
    if pd.mesh is not r1.mesh:
        raise FracflowError("solutions must share one mesh")
    mesh = pd.mesh
    qp = mesh.subset(mesh.region == 0)
    g = qp.gradient(pd.W - r1.W)
    return float(np.sum(qp.weights * np.sum(g * g, axis=-1)))


def coupled_difference_study(make_scenario, h_list, cfg: PicardConfig = PicardConfig()):
    """Run both coupled models for each thickness scale in ``h_list``.

    ``make_scenario(h)`` returns the scenario with thickness amplitude h.
    The norm is taken over the whole porous domain (both sides of each
    fracture).  Returns ``(rows, slope)`` with rows of
    ``(h, diff, qbar_over_h_max, PI_PD, PI_R1)``.
    """
    h_list = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be strictly decreasing")
    rows = []
    for h in h_list:
        scn = make_scenario(h)
        mesh = build_coupled_mesh(scn)
        pd = solve_coupled_original(scn, cfg, mesh)
        r1 = solve_coupled_reduced(scn, cfg, mesh)
        rows.append(
            (
                h,
                porous_gradient_difference(pd, r1),
                r1.info["qbar_over_h_max"],
                diffusive_capacity(pd),
                diffusive_capacity(r1),
            )
        )
        log.info("difference study h=%g diff=%.3e", h, rows[-1][1])
    hs = np.log([r[0] for r in rows])
    ds = np.log([r[1] for r in rows])
    slope = float(np.polyfit(hs, ds, 1)[0]) if len(rows) > 1 else float("nan")
    return rows, slope
