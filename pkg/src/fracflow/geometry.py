"""Differential geometry of a fracture built as a normal variation of a surface.

The fracture occupies ``R(u, v, lam) = r(u, v) + lam * n(u, v)`` for
``|lam| <= h(u, v)``.  Everything here is vectorised: coordinates may be
scalars or arrays of a common shape ``S`` and vectors come back with shape
``S + (3,)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateSurfaceError, DomainError, MetricDegeneracyError

Vec = Callable[[np.ndarray, np.ndarray], np.ndarray]
Scalar = Callable[[np.ndarray, np.ndarray], np.ndarray]

ORTHO_TOL = 1e-10
DET_REL_TOL = 1e-9


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _vec(*components):
    return np.stack(np.broadcast_arrays(*components), axis=-1).astype(float)


@dataclass(frozen=True)
class SurfacePatch:
    """Analytic barycentric surface with exact first and second derivatives."""

    r: Vec
    r_u: Vec
    r_v: Vec
    r_uu: Vec
    r_uv: Vec
    r_vv: Vec
    domain: tuple[float, float, float, float]
    name: str = ""

    def contains(self, u, v, tol=1e-12):
        u0, u1, v0, v1 = self.domain
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return (u >= u0 - tol) & (u <= u1 + tol) & (v >= v0 - tol) & (v <= v1 + tol)


@dataclass(frozen=True)
class ThicknessProfile:
    """Half-thickness ``h(u, v) > 0``; the fracture is ``2h`` thick."""

    h: Scalar
    h_u: Scalar
    h_v: Scalar

    @classmethod
    def constant(cls, half_thickness):
        if half_thickness <= 0:
            raise ValueError("half-thickness must be positive")
        c = float(half_thickness)
        return cls(
            h=lambda u, v: np.full(np.broadcast(u, v).shape, c),
            h_u=lambda u, v: np.zeros(np.broadcast(u, v).shape),
            h_v=lambda u, v: np.zeros(np.broadcast(u, v).shape),
        )


@dataclass(frozen=True)
class SurfaceJet:
    u: np.ndarray
    v: np.ndarray
    point: np.ndarray
    r_u: np.ndarray
    r_v: np.ndarray
    r_uu: np.ndarray
    r_uv: np.ndarray
    r_vv: np.ndarray


@dataclass(frozen=True)
class FundamentalForms:
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    l: np.ndarray
    m: np.ndarray
    n_c: np.ndarray
    detg: np.ndarray
    K: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class NormalFrame:
    n: np.ndarray
    n_u: np.ndarray
    n_v: np.ndarray


@dataclass(frozen=True)
class VariationMetric:
    G: np.ndarray
    Ginv: np.ndarray
    detG: np.ndarray
    lam: np.ndarray

    @property
    def sqrt_detG(self):
        return np.sqrt(self.detG)


# -- construction helpers --------------------------------------------------


def graph_patch(f, df, d2f, domain, name=""):
    """Cylindrical graph ``r = <u, v, f(u)>``."""

    def zero(u, v):
        return np.zeros(np.broadcast(u, v).shape)

    return SurfacePatch(
        r=lambda u, v: _vec(u, v, f(np.asarray(u, float)) + zero(u, v)),
        r_u=lambda u, v: _vec(1.0, zero(u, v), df(np.asarray(u, float)) + zero(u, v)),
        r_v=lambda u, v: _vec(zero(u, v), 1.0, zero(u, v)),
        r_uu=lambda u, v: _vec(zero(u, v), zero(u, v), d2f(np.asarray(u, float)) + zero(u, v)),
        r_uv=lambda u, v: _vec(zero(u, v), zero(u, v), zero(u, v)),
        r_vv=lambda u, v: _vec(zero(u, v), zero(u, v), zero(u, v)),
        domain=tuple(float(d) for d in domain),
        name=name,
    )


def rigid_motion(patch, offset, rotation, name=None):
    """Return ``offset + rotation @ r`` with derivatives rotated accordingly."""
    A = np.asarray(rotation, float)
    b = np.asarray(offset, float)

    def rot(fn, shift=False):
        if shift:
            return lambda u, v: fn(u, v) @ A.T + b
        return lambda u, v: fn(u, v) @ A.T

    return SurfacePatch(
        r=rot(patch.r, shift=True),
        r_u=rot(patch.r_u),
        r_v=rot(patch.r_v),
        r_uu=rot(patch.r_uu),
        r_uv=rot(patch.r_uv),
        r_vv=rot(patch.r_vv),
        domain=patch.domain,
        name=patch.name if name is None else name,
    )


def rotation_y(theta):
    """Rotation about the y axis in the sign convention used for the fracture sets."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


# -- operations --------------------------------------------------------------


def surface_jet(patch: SurfacePatch, u, v, check=True) -> SurfaceJet:
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    if check and not np.all(patch.contains(u, v)):
        raise DomainError(f"(u, v) outside patch domain {patch.domain}")
    u, v = np.broadcast_arrays(u, v)
    return SurfaceJet(
        u=u,
        v=v,
        point=patch.r(u, v),
        r_u=patch.r_u(u, v),
        r_v=patch.r_v(u, v),
        r_uu=patch.r_uu(u, v),
        r_uv=patch.r_uv(u, v),
        r_vv=patch.r_vv(u, v),
    )


def frame_from_jet(jet: SurfaceJet) -> NormalFrame:
    N = np.cross(jet.r_u, jet.r_v)
    norm = np.linalg.norm(N, axis=-1)
    if np.any(norm <= 0) or not np.all(np.isfinite(norm)):
        raise DegenerateSurfaceError("r_u x r_v vanishes: parametrisation is not an immersion")
    n = N / norm[..., None]
    N_u = np.cross(jet.r_uu, jet.r_v) + np.cross(jet.r_u, jet.r_uv)
    N_v = np.cross(jet.r_uv, jet.r_v) + np.cross(jet.r_u, jet.r_vv)
    # d(N/|N|) = (dN - n <n, dN>) / |N|
    n_u = (N_u - n * _dot(n, N_u)[..., None]) / norm[..., None]
    n_v = (N_v - n * _dot(n, N_v)[..., None]) / norm[..., None]
    return NormalFrame(n=n, n_u=n_u, n_v=n_v)


def normal_frame(patch: SurfacePatch, u, v) -> NormalFrame:
    return frame_from_jet(surface_jet(patch, u, v))


def fundamental_forms(jet: SurfaceJet) -> FundamentalForms:
    g11 = _dot(jet.r_u, jet.r_u)
    g12 = _dot(jet.r_u, jet.r_v)
    g22 = _dot(jet.r_v, jet.r_v)
    detg = g11 * g22 - g12**2
    if np.any(detg <= 0):
        raise DegenerateSurfaceError("first fundamental form is singular")
    n = frame_from_jet(jet).n
    l = _dot(jet.r_uu, n)
    m = _dot(jet.r_uv, n)
    n_c = _dot(jet.r_vv, n)
    K = (l * n_c - m**2) / detg
    H = (g11 * n_c - 2 * g12 * m + g22 * l) / (2 * detg)
    return FundamentalForms(g11, g12, g22, l, m, n_c, detg, K, H)


def metric_at(jet: SurfaceJet, frame: NormalFrame, forms: FundamentalForms, lam) -> VariationMetric:
    """Induced metric of ``R = r + lam n`` at the offset ``lam``."""
    lam = np.broadcast_to(np.asarray(lam, float), forms.g11.shape)
    nu2 = _dot(frame.n_u, frame.n_u)
    nunv = _dot(frame.n_u, frame.n_v)
    nv2 = _dot(frame.n_v, frame.n_v)
    G11 = forms.g11 - 2 * forms.l * lam + nu2 * lam**2
    G12 = forms.g12 - 2 * forms.m * lam + nunv * lam**2
    G22 = forms.g22 - 2 * forms.n_c * lam + nv2 * lam**2
    det = G11 * G22 - G12**2
    bad = ~(det > 0)
    if np.any(bad):
        i = np.argwhere(np.atleast_1d(bad))[0]
        pick = lambda a: float(np.atleast_1d(np.broadcast_to(a, det.shape))[tuple(i)])
        raise MetricDegeneracyError(pick(jet.u), pick(jet.v), pick(lam), pick(det))

    shape = det.shape
    G = np.zeros(shape + (3, 3))
    G[..., 0, 0] = G11
    G[..., 0, 1] = G[..., 1, 0] = G12
    G[..., 1, 1] = G22
    G[..., 2, 2] = 1.0
    Ginv = np.zeros_like(G)
    Ginv[..., 0, 0] = G22 / det
    Ginv[..., 0, 1] = Ginv[..., 1, 0] = -G12 / det
    Ginv[..., 1, 1] = G11 / det
    Ginv[..., 2, 2] = 1.0
    return VariationMetric(G=G, Ginv=Ginv, detG=det, lam=lam)


def detG_quartic(forms: FundamentalForms, frame: NormalFrame) -> np.ndarray:
    """Coefficients ``c0..c4`` of det G as a polynomial in lambda (last axis)."""
    nu2 = _dot(frame.n_u, frame.n_u)
    nunv = _dot(frame.n_u, frame.n_v)
    nv2 = _dot(frame.n_v, frame.n_v)
    g = forms.detg
    c0 = g
    c1 = -4 * forms.H * g
    c2 = 4 * forms.K * g + forms.g11 * nv2 - 2 * forms.g12 * nunv + forms.g22 * nu2
    c3 = -2 * (forms.l * nv2 - 2 * forms.m * nunv + forms.n_c * nu2)
    c4 = nu2 * nv2 - nunv**2
    return np.stack(np.broadcast_arrays(c0, c1, c2, c3, c4), axis=-1)


def eval_quartic(coeffs, lam):
    lam = np.asarray(lam, float)
    return sum(coeffs[..., k] * lam**k for k in range(5))


def grad_norm_G(gradW, metric: VariationMetric):
    """``||grad_G W||_G = sqrt(dW^T G^{-1} dW)`` for covariant partials ``dW``."""
    gradW = np.asarray(gradW, float)
    q = np.einsum("...i,...ij,...j->...", gradW, metric.Ginv, gradW)
    return np.sqrt(np.maximum(q, 0.0))


@dataclass(frozen=True)
class PointGeometry:
    """Jet, frame and forms bundled at a set of (u, v) points."""

    jet: SurfaceJet
    frame: NormalFrame
    forms: FundamentalForms

    def metric(self, lam):
        return metric_at(self.jet, self.frame, self.forms, lam)


def geometry_at(patch, u, v, check=True) -> PointGeometry:
    jet = surface_jet(patch, u, v, check=check)
    return PointGeometry(jet, frame_from_jet(jet), fundamental_forms(jet))


def gram_metric(patch, u, v, lam, step=None):
    """Brute-force metric from ``<R_i, R_j>`` with R differentiated by the jet.

    Uses the exact jet for ``r`` and the frame for ``n``; it never touches the
    coefficient formulas in :func:`metric_at`.
    """
    jet = surface_jet(patch, u, v, check=False)
    fr = frame_from_jet(jet)
    lam = np.asarray(lam, float)[..., None]
    R_u = jet.r_u + lam * fr.n_u
    R_v = jet.r_v + lam * fr.n_v
    R_l = fr.n
    J = np.stack([R_u, R_v, R_l], axis=-1)
    return np.einsum("...ki,...kj->...ij", J, J)


def fd_jet(r: Vec, u, v, step=1e-4):
    """Central finite-difference jet of ``r``; validation only."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    du = step
    r0 = r(u, v)
    ru = (r(u + du, v) - r(u - du, v)) / (2 * du)
    rv = (r(u, v + du) - r(u, v - du)) / (2 * du)
    ruu = (r(u + du, v) - 2 * r0 + r(u - du, v)) / du**2
    rvv = (r(u, v + du) - 2 * r0 + r(u, v - du)) / du**2
    ruv = (r(u + du, v + du) - r(u + du, v - du) - r(u - du, v + du) + r(u - du, v - du)) / (4 * du**2)
    u, v = np.broadcast_arrays(u, v)
    return SurfaceJet(u, v, r0, ru, rv, ruu, ruv, rvv)
