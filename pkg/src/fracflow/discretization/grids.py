"""Grids and their quadrature tables.

Every grid exposes ``quadrature(order)`` returning a :class:`Quadrature`
(physical points, weights times Jacobian, basis values and gradients,
connectivity), which is all the generic assembler needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshError


def gauss_legendre(n):
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)


@dataclass
class Quadrature:
    points: np.ndarray  # (E, nq, dim)
    weights: np.ndarray  # (E, nq), includes |det J|
    phi: np.ndarray  # (E, nq, nb)
    dphi: np.ndarray  # (E, nq, nb, dim)
    conn: np.ndarray  # (E, nb)

    def values(self, W):
        return np.einsum("eqa,ea->eq", self.phi, np.asarray(W)[self.conn])

    def gradient(self, W):
        return np.einsum("eqad,ea->eqd", self.dphi, np.asarray(W)[self.conn])

    def integrate(self, vals):
        return float(np.sum(self.weights * vals))


@dataclass
class BoundaryQuadrature:
    """Edge (or point) quadrature on a tagged part of the boundary."""

    points: np.ndarray  # (Ne, nq, dim)
    weights: np.ndarray  # (Ne, nq), includes edge length factor
    phi: np.ndarray  # (Ne, nq, nb)
    conn: np.ndarray  # (Ne, nb)
    normals: np.ndarray | None = None  # (Ne, nq, dim), outward


class Grid1D:
    """Piecewise-linear elements on strictly increasing nodes."""

    dim = 1

    def __init__(self, nodes):
        nodes = np.asarray(nodes, float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise MeshError("Grid1D needs at least 3 nodes (N >= 2 elements)")
        if np.any(np.diff(nodes) <= 0):
            raise MeshError("Grid1D nodes must be strictly increasing")
        self.nodes = nodes
        self.cache: dict = {}

    @classmethod
    def uniform(cls, a, b, n_elements):
        return cls(np.linspace(a, b, int(n_elements) + 1))

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def coords(self):
        return self.nodes[:, None]

    @property
    def conn(self):
        i = np.arange(self.nodes.size - 1)
        return np.stack([i, i + 1], axis=1)

    @property
    def mesh_size(self):
        return float(np.max(np.diff(self.nodes)))

    def quadrature(self, order=2):
        key = ("q", order)
        if key not in self.cache:
            xg, wg = gauss_legendre(order)
            a, b = self.nodes[:-1], self.nodes[1:]
            half = 0.5 * (b - a)
            pts = 0.5 * (a + b)[:, None] + half[:, None] * xg[None, :]
            t = 0.5 * (xg + 1.0)
            phi = np.stack([1 - t, t], axis=-1)[None].repeat(a.size, axis=0)
            dphi = np.stack([-1.0 / (b - a), 1.0 / (b - a)], axis=-1)[:, None, :, None].repeat(order, axis=1)
            self.cache[key] = Quadrature(pts[..., None], half[:, None] * wg[None, :], phi, dphi, self.conn)
        return self.cache[key]

    def locate(self, x):
        """Linear interpolation weights of nodal data at points ``x``."""
        x = np.asarray(x, float)
        i = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.nodes.size - 2)
        t = (x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i])
        return i, t

    def interpolate(self, W, x):
        i, t = self.locate(x)
        W = np.asarray(W)
        return (1 - t) * W[i] + t * W[i + 1]


class Grid2D:
    """Structured Q1 grid on the strip ``u in [u0,u1], lam = s h(u), s in [-1,1]``.

    Nodes live in the (u, lam) parameter plane.  Node ``(i, j)`` has index
    ``i * (ns + 1) + j`` where ``i`` runs along u and ``j`` across the strip.
    """

    dim = 2

    def __init__(self, u_nodes, s_nodes, half_thickness):
        u_nodes = np.asarray(u_nodes, float)
        s_nodes = np.asarray(s_nodes, float)
        if u_nodes.size < 3 or s_nodes.size < 2:
            raise MeshError("Grid2D needs >= 2 elements along u and >= 1 across")
        if np.any(np.diff(u_nodes) <= 0) or np.any(np.diff(s_nodes) <= 0):
            raise MeshError("grid coordinates must be strictly increasing")
        if not (np.isclose(s_nodes[0], -1) and np.isclose(s_nodes[-1], 1)):
            raise MeshError("s-nodes must span [-1, 1]")
        self.u_nodes = u_nodes
        self.s_nodes = s_nodes
        self.h = half_thickness
        hu = np.asarray(half_thickness(u_nodes), float)
        if np.any(hu <= 0):
            raise MeshError("half-thickness must be positive on the grid")
        self.nu = u_nodes.size - 1
        self.ns = s_nodes.size - 1
        U, S = np.meshgrid(u_nodes, s_nodes, indexing="ij")
        self.coords = np.stack([U.ravel(), (S * hu[:, None]).ravel()], axis=1)
        self.cache: dict = {}

    @classmethod
    def uniform(cls, u0, u1, n_u, n_s, half_thickness):
        return cls(np.linspace(u0, u1, n_u + 1), np.linspace(-1.0, 1.0, n_s + 1), half_thickness)

    def index(self, i, j):
        return np.asarray(i) * (self.ns + 1) + np.asarray(j)

    @property
    def n_nodes(self):
        return self.coords.shape[0]

    @property
    def conn(self):
        i, j = np.meshgrid(np.arange(self.nu), np.arange(self.ns), indexing="ij")
        i, j = i.ravel(), j.ravel()
        return np.stack(
            [self.index(i, j), self.index(i + 1, j), self.index(i + 1, j + 1), self.index(i, j + 1)], axis=1
        )

    @property
    def mesh_size(self):
        return float(max(np.max(np.diff(self.u_nodes)), np.max(np.diff(self.coords[:, 1]))))

    def side_nodes(self, side):
        if side == "well":
            return self.index(0, np.arange(self.ns + 1))
        if side == "end":
            return self.index(self.nu, np.arange(self.ns + 1))
        if side == "top":
            return self.index(np.arange(self.nu + 1), self.ns)
        if side == "bottom":
            return self.index(np.arange(self.nu + 1), 0)
        raise KeyError(side)

    def center_line(self, W):
        """Values on lam = 0, linearly interpolated across the strip if needed."""
        W = np.asarray(W).reshape(self.nu + 1, self.ns + 1)
        return np.array([np.interp(0.0, self.s_nodes, row) for row in W])

    def quadrature(self, order=2):
        key = ("q", order)
        if key in self.cache:
            return self.cache[key]
        xg, wg = gauss_legendre(order)
        X, Y = np.meshgrid(xg, xg, indexing="ij")
        xi, eta = X.ravel(), Y.ravel()
        w = np.outer(wg, wg).ravel()
        N = 0.25 * np.stack([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta), (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)], -1)
        dN = 0.25 * np.stack(
            [
                np.stack([-(1 - eta), -(1 - xi)], -1),
                np.stack([(1 - eta), -(1 + xi)], -1),
                np.stack([(1 + eta), (1 + xi)], -1),
                np.stack([-(1 + eta), (1 - xi)], -1),
            ],
            axis=1,
        )  # (nq, 4, 2)
        conn = self.conn
        xe = self.coords[conn]  # (E, 4, 2)
        J = np.einsum("qad,eak->eqkd", dN, xe)  # J[k, d] = d x_k / d xi_d
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        if np.any(det <= 0):
            raise MeshError("non-positive mapped element Jacobian in Grid2D")
        Jinv = np.empty_like(J)
        Jinv[..., 0, 0] = J[..., 1, 1] / det
        Jinv[..., 1, 1] = J[..., 0, 0] / det
        Jinv[..., 0, 1] = -J[..., 0, 1] / det
        Jinv[..., 1, 0] = -J[..., 1, 0] / det
        dphi = np.einsum("qad,eqdk->eqak", dN, Jinv)
        pts = np.einsum("qa,eak->eqk", N, xe)
        q = Quadrature(pts, det * w[None, :], N[None].repeat(conn.shape[0], 0), dphi, conn)
        self.cache[key] = q
        return q

    def boundary_quadrature(self, side, order=2):
        """Quadrature on the chords of a boundary side, with outward normals."""
        key = ("b", side, order)
        if key in self.cache:
            return self.cache[key]
        nodes = self.side_nodes(side)
        # walk the boundary counter-clockwise so the domain lies on the left of
        # every edge; the outward normal is then the right normal
        if side in ("top", "well"):
            nodes = nodes[::-1]
        conn = np.stack([nodes[:-1], nodes[1:]], axis=1)
        xg, wg = gauss_legendre(order)
        t = 0.5 * (xg + 1)
        a = self.coords[conn[:, 0]]
        b = self.coords[conn[:, 1]]
        d = b - a
        length = np.linalg.norm(d, axis=1)
        pts = a[:, None, :] + t[None, :, None] * d[:, None, :]
        phi = np.stack([1 - t, t], -1)[None].repeat(conn.shape[0], 0)
        nrm = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]
        bq = BoundaryQuadrature(pts, 0.5 * length[:, None] * wg[None, :], phi, conn, nrm[:, None, :].repeat(order, 1))
        self.cache[key] = bq
        return bq


@dataclass
class TriMesh:
    """Conforming P1 triangulation with per-triangle region tags.

    ``region`` is 0 in the porous medium and ``k + 1`` inside fracture ``k``.
    ``node_tags`` maps a tag name to an index array of nodes.
    """

    points: np.ndarray
    triangles: np.ndarray
    region: np.ndarray
    node_tags: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    dim: int = 2

    def __post_init__(self):
        self.points = np.asarray(self.points, float)
        self.triangles = np.asarray(self.triangles, np.int64)
        self.region = np.asarray(self.region, np.int64)
        self.cache: dict = {}
        a = self.areas
        if np.any(a <= 0):
            raise MeshError(f"{int(np.sum(a <= 0))} triangles with non-positive area")

    @property
    def n_nodes(self):
        return self.points.shape[0]

    @property
    def coords(self):
        return self.points

    @property
    def conn(self):
        return self.triangles

    @property
    def areas(self):
        p = self.points[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def mesh_size(self):
        p = self.points[self.triangles]
        e = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2)
        return float(e.max())

    def subset(self, mask):
        """Quadrature restricted to triangles selected by ``mask``."""
        q = self.quadrature()
        return Quadrature(q.points[mask], q.weights[mask], q.phi[mask], q.dphi[mask], q.conn[mask])

    def quadrature(self, order=1):
        key = ("q", order)
        if key in self.cache:
            return self.cache[key]
        p = self.points[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        # gradients of barycentric coordinates
        g1 = np.stack([d2[:, 1], -d2[:, 0]], 1) / det[:, None]
        g2 = np.stack([-d1[:, 1], d1[:, 0]], 1) / det[:, None]
        g0 = -g1 - g2
        grads = np.stack([g0, g1, g2], axis=1)  # (E, 3, 2)
        if order == 1:
            bary = np.array([[1 / 3, 1 / 3, 1 / 3]])
            w = np.array([1.0])
        else:
            bary = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
            w = np.full(3, 1 / 3)
        area = 0.5 * det
        pts = np.einsum("qa,eak->eqk", bary, p)
        E = self.triangles.shape[0]
        q = Quadrature(
            pts,
            area[:, None] * w[None, :],
            bary[None].repeat(E, 0),
            grads[:, None, :, :].repeat(bary.shape[0], 1),
            self.triangles,
        )
        self.cache[key] = q
        return q

    def lumped_mass(self, mask=None):
        a = self.areas if mask is None else np.where(mask, self.areas, 0.0)
        m = np.zeros(self.n_nodes)
        np.add.at(m, self.triangles, (a / 3.0)[:, None])
        return m
