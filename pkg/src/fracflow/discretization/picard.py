"""Lagged-coefficient (Picard) iteration for the Forchheimer nonlinearity."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError
from .assembly import PressureField, assemble_weighted_diffusion

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PicardConfig:
    rel_tol: float = 1e-8
    max_iter: int = 200
    relaxation: float = 1.0
    fallback_relaxation: float = 0.5

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        for w in (self.relaxation, self.fallback_relaxation):
            if not 0 < w <= 1:
                raise ValueError("relaxation must lie in (0, 1]")


def _run(build, W0, cfg, omega, nonlinear):
    W = W0.copy()
    updates, residuals = [], []
    for k in range(1, cfg.max_iter + 1):
        system = build(W)
        if k > 1:
            residuals.append(system.free_residual_norm(W))
        W_new = system.solve()
        W_next = omega * W_new + (1 - omega) * W if k > 1 else W_new
        scale = np.linalg.norm(W_next)
        diff = np.linalg.norm(W_next - W)
        upd = diff / scale if scale > 0 else diff
        updates.append(float(upd))
        W = W_next
        if not nonlinear:
            return W, k, updates, residuals, True, system
        if k > 1 and upd <= cfg.rel_tol:
            return W, k, updates, residuals, True, system
        if not np.isfinite(upd):
            break
    return W, len(updates), updates, residuals, False, system


def picard_iterate(build, n_nodes, cfg: PicardConfig = PicardConfig(), nonlinear=True, W0=None):
    """Iterate ``W <- solve(build(W))`` until the relative update is below tolerance.

    ``build(W)`` must return a SparseSystem assembled with coefficients frozen
    at ``W``.  The first solve starts from ``W0`` (zero by default, i.e. the
    Darcy mobility 1/alpha), so a linear problem finishes after one iteration.
    Returns ``(W, info)``.
    """
    W0 = np.zeros(n_nodes) if W0 is None else np.asarray(W0, float)
    tried = []
    for omega in dict.fromkeys((cfg.relaxation, cfg.fallback_relaxation)):
        W, its, updates, residuals, ok, system = _run(build, W0, cfg, omega, nonlinear)
        tried.append((omega, updates))
        if ok:
            final = build(W) if nonlinear else system
            res = final.free_residual_norm(W)
            # increases below the rounding level of K W are noise, not divergence
            floor = 100 * np.finfo(float).eps * np.linalg.norm(abs(final.K) @ np.abs(W))
            r = np.asarray(residuals[1:])
            mono = bool(np.all((np.diff(r) <= 1e-12 * r[1:]) | (r[1:] <= floor))) if r.size > 1 else True
            if not mono:
                log.warning("Picard residual not monotone after the first step")
            return W, {
                "iterations": its,
                "relaxation": omega,
                "update_history": updates,
                "residual_history": residuals,
                "final_residual": res,
                "residual_monotone": mono,
                "system": system,
                "rebuilt_system": final,
            }
        log.warning("Picard with relaxation %.2f did not converge; retrying", omega)
    raise ConvergenceError(f"Picard iteration failed after {cfg.max_iter} iterations", tried[-1][1])


def picard_solve(grid, coeff_builder, source, bcs, cfg: PicardConfig = PicardConfig(), nonlinear=True, quad_order=2):
    """Picard solve of ``-div(C(grad W) grad W) = source`` on ``grid``."""

    def build(W):
        return assemble_weighted_diffusion(grid, coeff_builder, source, bcs, W=W, quad_order=quad_order)

    W, info = picard_iterate(build, grid.n_nodes, cfg, nonlinear)
    return PressureField(grid, W, info)
