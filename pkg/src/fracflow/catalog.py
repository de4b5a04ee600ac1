"""Named analytic surfaces and thickness profiles used by scenarios and tests."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import SurfacePatch, ThicknessProfile, _vec, graph_patch

TWO_PI = 2.0 * np.pi


def _zeros(u, v):
    return np.zeros(np.broadcast(u, v).shape)


def constant_thickness(full):
    """Thickness ``2h = full``."""
    return ThicknessProfile.constant(0.5 * full)


def wavy_thickness(H, freq=7.0, amp=0.5):
    """Thickness ``2h(u) = H (2 + amp sin(freq u))``."""
    H = float(H)
    if H <= 0 or amp >= 2:
        raise ValueError("wavy thickness needs H > 0 and amp < 2")
    return ThicknessProfile(
        h=lambda u, v: 0.5 * H * (2 + amp * np.sin(freq * np.asarray(u, float))) + _zeros(u, v),
        h_u=lambda u, v: 0.5 * H * amp * freq * np.cos(freq * np.asarray(u, float)) + _zeros(u, v),
        h_v=_zeros,
    )


def plane(domain=(0.0, 1.0, -1.0, 1.0)):
    return tilted_plane(0.0, domain, name="plane")


def tilted_plane(c, domain=(0.0, 1.0, -1.0, 1.0), name=None):
    c = float(c)
    return graph_patch(
        lambda u: c * u, lambda u: c + 0 * u, lambda u: 0 * u, domain, name or f"tilted_plane({c:g})"
    )


def cylinder(domain=(0.0, np.pi, -1.0, 1.0)):
    """Unit cylinder ``<cos u, v, sin u>``; its r_u x r_v normal points inward."""
    return SurfacePatch(
        r=lambda u, v: _vec(np.cos(u), v, np.sin(u)),
        r_u=lambda u, v: _vec(-np.sin(u), _zeros(u, v), np.cos(u)),
        r_v=lambda u, v: _vec(_zeros(u, v), 1.0, _zeros(u, v)),
        r_uu=lambda u, v: _vec(-np.cos(u), _zeros(u, v), -np.sin(u)),
        r_uv=lambda u, v: _vec(_zeros(u, v), _zeros(u, v), _zeros(u, v)),
        r_vv=lambda u, v: _vec(_zeros(u, v), _zeros(u, v), _zeros(u, v)),
        domain=tuple(domain),
        name="cylinder",
    )


def sphere(rho=1.0, domain=(0.3, 2.8, 0.0, TWO_PI)):
    """Sphere of radius ``rho`` in polar (u) / azimuth (v) coordinates."""
    p = float(rho)
    su, cu, sv, cv = np.sin, np.cos, np.sin, np.cos
    return SurfacePatch(
        r=lambda u, v: p * _vec(su(u) * cv(v), su(u) * sv(v), cu(u) + _zeros(u, v)),
        r_u=lambda u, v: p * _vec(cu(u) * cv(v), cu(u) * sv(v), -su(u) + _zeros(u, v)),
        r_v=lambda u, v: p * _vec(-su(u) * sv(v), su(u) * cv(v), _zeros(u, v)),
        r_uu=lambda u, v: p * _vec(-su(u) * cv(v), -su(u) * sv(v), -cu(u) + _zeros(u, v)),
        r_uv=lambda u, v: p * _vec(-cu(u) * sv(v), cu(u) * cv(v), _zeros(u, v)),
        r_vv=lambda u, v: p * _vec(-su(u) * cv(v), -su(u) * sv(v), _zeros(u, v)),
        domain=tuple(domain),
        name=f"sphere({p:g})",
    )


def saddle(a=0.3, b=0.2, domain=(-1.0, 1.0, -1.0, 1.0)):
    """``<u, v, a(u^2 - v^2) + b v sin u>``: a genuinely v-dependent patch."""
    return SurfacePatch(
        r=lambda u, v: _vec(u, v, a * (u**2 - v**2) + b * v * np.sin(u)),
        r_u=lambda u, v: _vec(1.0, _zeros(u, v), 2 * a * u + b * v * np.cos(u)),
        r_v=lambda u, v: _vec(_zeros(u, v), 1.0, -2 * a * v + b * np.sin(u)),
        r_uu=lambda u, v: _vec(_zeros(u, v), _zeros(u, v), 2 * a - b * v * np.sin(u)),
        r_uv=lambda u, v: _vec(_zeros(u, v), _zeros(u, v), b * np.cos(u) + _zeros(u, v)),
        r_vv=lambda u, v: _vec(_zeros(u, v), _zeros(u, v), -2 * a + _zeros(u, v)),
        domain=tuple(domain),
        name="saddle",
    )


def halfcircle():
    """Upper unit half circle ``f = sqrt(1 - u^2)`` on |u| <= sqrt(3)/2."""
    a = np.sqrt(3.0) / 2
    return graph_patch(
        lambda u: np.sqrt(1 - u**2),
        lambda u: -u / np.sqrt(1 - u**2),
        lambda u: -((1 - u**2) ** -1.5),
        (-a, a, -1.0, 1.0),
        "halfcircle",
    )


def sine2():
    """``f = 2 sin u`` on [0, 2 pi]."""
    return graph_patch(lambda u: 2 * np.sin(u), lambda u: 2 * np.cos(u), lambda u: -2 * np.sin(u), (0.0, TWO_PI, -1.0, 1.0), "sine2")


@dataclass(frozen=True)
class GeometryCatalogEntry:
    """``patch()`` builds the surface; ``thickness(H)`` the thickness profile.

    ``H`` is the full thickness for constant profiles and the amplitude for
    wavy ones; ``default_H`` is the value used by the reference examples.
    """

    name: str
    patch: Callable[[], SurfacePatch]
    thickness: Callable[[float], ThicknessProfile]
    default_H: float

    @property
    def domain(self):
        return self.patch().domain


CATALOG = {
    "plane": GeometryCatalogEntry("plane", plane, constant_thickness, 0.05),
    "tilted_plane": GeometryCatalogEntry("tilted_plane", lambda: tilted_plane(0.5), constant_thickness, 0.05),
    "cylinder": GeometryCatalogEntry("cylinder", cylinder, constant_thickness, 0.2),
    "sphere": GeometryCatalogEntry("sphere", lambda: sphere(1.5), constant_thickness, 0.2),
    "saddle": GeometryCatalogEntry("saddle", saddle, constant_thickness, 0.2),
    "halfcircle": GeometryCatalogEntry("halfcircle", halfcircle, constant_thickness, 0.025),
    "sine2": GeometryCatalogEntry("sine2", sine2, lambda H: wavy_thickness(H), 0.2),
}


def catalog_entry(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown geometry {name!r}; known: {sorted(CATALOG)}") from None
