"""Galerkin assembly of weighted diffusion operators and their linear solves."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import AssemblyError


@dataclass
class NeumannLoad:
    """Boundary flux density ``g`` (into the domain) on a boundary quadrature."""

    quad: object
    g: Callable  # points (Ne, nq, dim) -> (Ne, nq)


@dataclass
class BoundaryConditions:
    dirichlet_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    dirichlet_values: np.ndarray | float = 0.0
    neumann: list = field(default_factory=list)

    def values(self):
        return np.broadcast_to(np.asarray(self.dirichlet_values, float), self.dirichlet_nodes.shape).copy()


@dataclass
class SparseSystem:
    """``K W = F`` with Dirichlet rows fixed by elimination."""

    K: sp.csr_matrix
    F: np.ndarray
    dirichlet_nodes: np.ndarray
    dirichlet_values: np.ndarray

    @property
    def free(self):
        mask = np.ones(self.F.size, bool)
        mask[self.dirichlet_nodes] = False
        return mask

    def solve(self):
        n = self.F.size
        W = np.zeros(n)
        W[self.dirichlet_nodes] = self.dirichlet_values
        free = self.free
        Kff = self.K[free][:, free].tocsc()
        rhs = self.F[free] - self.K[free][:, ~free] @ W[~free]
        W[free] = spla.spsolve(Kff, rhs)
        if not np.all(np.isfinite(W)):
            raise AssemblyError("linear solve produced non-finite values")
        return W

    def residual(self, W):
        """Full residual ``K W - F``; on Dirichlet rows it is the reaction."""
        return self.K @ W - self.F

    def free_residual_norm(self, W):
        r = self.residual(W)[self.free]
        scale = np.linalg.norm(self.F[self.free])
        return float(np.linalg.norm(r) / scale) if scale > 0 else float(np.linalg.norm(r))


def _check_coeff(C, points):
    if C.ndim == 2:
        bad = ~(C > 0)
    else:
        tr = np.trace(C, axis1=-2, axis2=-1)
        det = np.linalg.det(C) if C.shape[-1] > 1 else C[..., 0, 0]
        bad = ~((tr > 0) & (det > 0))
    if np.any(bad):
        e, q = np.argwhere(bad)[0]
        raise AssemblyError(f"non-positive diffusion coefficient at point {points[e, q]} (element {e})")


def stiffness(quad, C, n_nodes):
    """Sparse matrix of ``int grad phi_a . C grad phi_b``; ``C`` scalar or tensor per point."""
    if C.ndim == 2:
        Ke = np.einsum("eq,eq,eqad,eqbd->eab", quad.weights, C, quad.dphi, quad.dphi, optimize=True)
    else:
        Ke = np.einsum("eq,eqxy,eqax,eqby->eab", quad.weights, C, quad.dphi, quad.dphi, optimize=True)
    conn = quad.conn
    nb = conn.shape[1]
    rows = np.repeat(conn, nb, axis=1).ravel()
    cols = np.tile(conn, (1, nb)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    K.sum_duplicates()
    return K


def load_vector(quad, s, n_nodes):
    Fe = np.einsum("eq,eq,eqa->ea", quad.weights, s, quad.phi)
    F = np.zeros(n_nodes)
    np.add.at(F, quad.conn, Fe)
    return F


def assemble_weighted_diffusion(grid, coeff, source=None, bcs=None, W=None, quad_order=2):
    """System for ``-div(C grad W) = source`` on ``grid``.

    ``coeff(points, gradW)`` returns a positive scalar ``(E, nq)`` or an SPD
    tensor ``(E, nq, d, d)``; ``gradW`` is the gradient of the current iterate
    ``W`` (zeros when ``W`` is None).  ``source(points)`` returns ``(E, nq)``.
    """
    quad = grid.quadrature(quad_order)
    bcs = bcs or BoundaryConditions()
    gradW = quad.gradient(W) if W is not None else np.zeros(quad.points.shape)
    C = np.asarray(coeff(quad.points, gradW), float)
    if C.ndim == 0:
        C = np.full(quad.weights.shape, float(C))
    _check_coeff(C, quad.points)
    K = stiffness(quad, C, grid.n_nodes)
    F = np.zeros(grid.n_nodes)
    if source is not None:
        s = np.broadcast_to(np.asarray(source(quad.points), float), quad.weights.shape)
        F += load_vector(quad, s, grid.n_nodes)
    for load in bcs.neumann:
        g = np.broadcast_to(np.asarray(load.g(load.quad.points), float), load.quad.weights.shape)
        F += load_vector(load.quad, g, grid.n_nodes)
    return SparseSystem(K, F, np.asarray(bcs.dirichlet_nodes, np.int64), bcs.values())


@dataclass
class PressureField:
    """Nodal pressure on a grid plus solver diagnostics."""

    grid: object
    W: np.ndarray
    info: dict = field(default_factory=dict)

    def at_quadrature(self, order=2):
        return self.grid.quadrature(order).values(self.W)

    def gradient(self, order=2):
        return self.grid.quadrature(order).gradient(self.W)


def lp_gradient_norm(field: PressureField, p_exp, weight=None, order=2, quad=None):
    """``(int |grad W|^p w dx)^(1/p)`` by element quadrature.

    ``weight(points)`` gives the volume density (e.g. sqrt|g|); when it is None
    the measure is Euclidean.
    """
    if p_exp < 1:
        raise ValueError("p_exp must be >= 1")
    quad = quad if quad is not None else field.grid.quadrature(order)
    g = quad.gradient(field.W)
    mag = np.linalg.norm(g, axis=-1)
    w = quad.weights if weight is None else quad.weights * weight(quad.points)
    return float(np.sum(w * mag**p_exp) ** (1.0 / p_exp))
