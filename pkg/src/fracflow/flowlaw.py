"""Darcy-Forchheimer closure.

The Forchheimer momentum balance ``alpha v + beta |v| v = -grad p`` is
inverted in closed form as ``v = -f_beta(|grad p|) grad p`` with

    f_beta(zeta) = 2 / (alpha + sqrt(alpha**2 + 4 beta zeta)),

the positive root of ``beta zeta f**2 + alpha f - 1 = 0`` written so that it
stays well conditioned at ``zeta -> 0`` and ``beta -> 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import VariationMetric, grad_norm_G


@dataclass(frozen=True)
class FluidParams:
    """Constitutive and source constants (dimensionless).

    ``alpha`` is the fracture resistivity mu/k_f; when omitted it is taken as
    ``mu / k_f``.  ``omega_vol`` is the total flow-domain measure entering the
    uniform source ``Q / omega_vol``.
    """

    k_p: float = 0.01
    k_f: float = 1.0
    beta: float = 0.0
    Q: float = 1.0
    gamma: float = 1.0
    omega_vol: float = 1.0
    mu: float = 1.0
    alpha: float | None = None

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.mu / self.k_f)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.omega_vol > 0:
            raise ValueError("omega_vol must be positive")
        if self.k_p <= 0 or self.k_f <= 0:
            raise ValueError("permeabilities must be positive")
        if not np.isfinite(self.Q / self.omega_vol):
            raise ValueError("Q / omega_vol must be finite")

    @property
    def source_density(self):
        return self.Q / self.omega_vol

    def with_(self, **changes):
        if "k_f" in changes or "mu" in changes:
            changes.setdefault("alpha", None)
        return replace(self, **changes)


def f_beta(alpha, beta, zeta):
    """Nonlinear mobility; returns values in ``(0, 1/alpha]``."""
    alpha = np.asarray(alpha, float)
    beta = np.asarray(beta, float)
    zeta = np.asarray(zeta, float)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be positive")
    if np.any(beta < 0) or np.any(zeta < 0):
        raise ValueError("beta and zeta must be non-negative")
    out = 2.0 / (alpha + np.sqrt(alpha * alpha + 4.0 * beta * zeta))
    return out if out.ndim else float(out)


def f_beta_prime(alpha, beta, zeta):
    """d f_beta / d zeta (non-positive)."""
    s = np.sqrt(np.asarray(alpha, float) ** 2 + 4.0 * np.asarray(beta, float) * np.asarray(zeta, float))
    return -4.0 * beta / (s * (alpha + s) ** 2)


def velocity(gradW, metric: VariationMetric, params: FluidParams):
    """Contravariant Darcy-Forchheimer velocity ``-f_beta(|grad_G W|_G) G^{-1} dW``."""
    gradW = np.asarray(gradW, float)
    zeta = grad_norm_G(gradW, metric)
    f = f_beta(params.alpha, params.beta, zeta)
    return -np.asarray(f)[..., None] * np.einsum("...ij,...j->...i", metric.Ginv, gradW)


def forchheimer_residual(v, gradW, metric: VariationMetric, params: FluidParams):
    """``alpha v + beta |v|_G v + grad_G W``; zero for an exact velocity."""
    v = np.asarray(v, float)
    vnorm = np.sqrt(np.einsum("...i,...ij,...j->...", v, metric.G, v))
    grad_G = np.einsum("...ij,...j->...i", metric.Ginv, np.asarray(gradW, float))
    return params.alpha * v + params.beta * vnorm[..., None] * v + grad_G


def monotonicity_gap(eta1, eta2, params: FluidParams):
    """Slack in the strong monotonicity inequality of ``eta -> f_beta(|eta|) eta``.

    Returns ``(F(eta1) - F(eta2)).(eta1 - eta2) - 0.5 f_beta(max|eta|) |eta1 - eta2|^2``,
    which is non-negative for every pair.
    """
    e1 = np.asarray(eta1, float)
    e2 = np.asarray(eta2, float)
    n1 = np.linalg.norm(e1, axis=-1)
    n2 = np.linalg.norm(e2, axis=-1)
    a, b = params.alpha, params.beta
    F1 = np.asarray(f_beta(a, b, n1))[..., None] * e1
    F2 = np.asarray(f_beta(a, b, n2))[..., None] * e2
    d = e1 - e2
    lhs = np.einsum("...i,...i->...", F1 - F2, d)
    rhs = 0.5 * np.asarray(f_beta(a, b, np.maximum(n1, n2))) * np.einsum("...i,...i->...", d, d)
    return lhs - rhs
