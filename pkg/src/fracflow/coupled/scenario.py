"""Reservoir cross-sections with a well and attached fractures.

Coordinates are the (x, z) plane; the fracture surfaces are v-invariant
along y, so each fracture is the normal offset of a plane curve.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..catalog import wavy_thickness
from ..flowlaw import FluidParams
from ..fracture import FractureScenario
from ..geometry import SurfacePatch, ThicknessProfile, graph_patch, rigid_motion, rotation_y


@dataclass(frozen=True)
class FractureDescriptor:
    patch: SurfacePatch  # already placed (offset + rotation applied)
    thickness: ThicknessProfile
    u_range: tuple[float, float]

    def curve(self, u):
        """Point, unit normal and their u-derivatives of the barycentric curve in (x, z)."""
        u = np.asarray(u, float)
        v = np.zeros_like(u)
        r = self.patch.r(u, v)[..., [0, 2]]
        ru = self.patch.r_u(u, v)[..., [0, 2]]
        return r, ru

    def offset_point(self, u, s):
        """Physical point ``r(u) + s h(u) n(u)`` in (x, z)."""
        u = np.asarray(u, float)
        v = np.zeros_like(u)
        n = np.cross(self.patch.r_u(u, v), self.patch.r_v(u, v))
        n = n / np.linalg.norm(n, axis=-1, keepdims=True)
        lam = np.asarray(s, float) * self.thickness.h(u, v)
        return (self.patch.r(u, v) + lam[..., None] * n)[..., [0, 2]]

    def as_fracture_scenario(self, params):
        return FractureScenario(self.patch, self.thickness, params, 0.0, 0.0, u_range=self.u_range, name="attached")


@dataclass(frozen=True)
class MeshControls:
    n_u: int = 200  # strip elements along each fracture
    n_s: int = 4  # strip elements across the thickness
    h_far: float = 1.0  # target edge length far from the well and fractures
    grading: float = 0.15  # growth of the target edge length with distance
    h_near: float | None = None  # near-field edge length; default: strip spacing along u
    min_angle: float = 25.0
    mouth_size: float | None = None  # edge length at the fracture mouth; None: no mouth grading
    mouth_growth: float = 1.15  # ratio between successive strip columns near the mouth

    def __post_init__(self):
        if self.n_s < 4 or self.n_s % 2:
            raise ValueError("n_s must be even and >= 4")
        if self.n_u < 4:
            raise ValueError("n_u must be >= 4")


@dataclass(frozen=True)
class ReservoirScenario:
    outer: np.ndarray  # (k, 2) polygon vertices, counter-clockwise
    well: np.ndarray  # (m, 2) polygon vertices, counter-clockwise
    fractures: tuple = ()
    params: FluidParams = field(default_factory=FluidParams)
    mesh: MeshControls = field(default_factory=MeshControls)
    name: str = ""
    tip_wall: bool = True  # impermeable fracture tips

    def with_params(self, **changes):
        return replace(self, params=self.params.with_(**changes))

    def with_mesh(self, **changes):
        return replace(self, mesh=replace(self.mesh, **changes))


def rectangle(x0, x1, z0, z1):
    return np.array([[x0, z0], [x1, z0], [x1, z1], [x0, z1]], float)


def rotated_square(side, angle_deg, center=(0.0, 0.0)):
    a = np.deg2rad(angle_deg)
    c, s = np.cos(a), np.sin(a)
    half = 0.5 * side
    base = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
    return base @ np.array([[c, s], [-s, c]]) + np.asarray(center, float)


def circle(radius, n=128, center=(0.0, 0.0)):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.stack([radius * np.cos(t), radius * np.sin(t)], axis=1) + np.asarray(center, float)


def sine_fracture(offset, theta=0.0, H=0.1, amplitude=2.0, length=2 * np.pi):
    """``offset + A(theta) <u, v, amplitude sin u>`` with ``2h = H(2 + 0.5 sin 7u)``."""
    base = graph_patch(
        lambda u: amplitude * np.sin(u),
        lambda u: amplitude * np.cos(u),
        lambda u: -amplitude * np.sin(u),
        (0.0, length, -1.0, 1.0),
        "sine",
    )
    patch = rigid_motion(base, offset, rotation_y(theta))
    return FractureDescriptor(patch, wavy_thickness(H), (0.0, length))


def coupled_ex6(H=0.1, params=None, mesh=None):
    """Rectangle [-10,20]x[-10,10], square well rotated by 60 degrees, one fracture."""
    frac = sine_fracture((0.125, 0.0, np.sqrt(3) / 8), 0.0, H)
    return ReservoirScenario(
        rectangle(-10, 20, -10, 10),
        rotated_square(0.5, 60.0),
        (frac,),
        params or FluidParams(),
        mesh or MeshControls(),
        name=f"coupled_ex6(H={H:g})",
    )


def coupled_ex6_orthogonal(H=0.1, params=None, mesh=None):
    """``coupled_ex6`` with the fracture turned to leave the well face along its normal.

    The sine curve starts with slope 2, i.e. at atan(2) to the x axis, while
    the face normal points at 60 degrees; the extra rotation closes that gap
    so the fracture meets the well at a right angle.
    """
    frac = sine_fracture((0.125, 0.0, np.sqrt(3) / 8), np.pi / 3 - np.arctan(2.0), H)
    return ReservoirScenario(
        rectangle(-10, 20, -10, 10),
        rotated_square(0.5, 60.0),
        (frac,),
        params or FluidParams(),
        mesh or MeshControls(),
        name=f"coupled_ex6_orthogonal(H={H:g})",
    )


def coupled_ex7(H=0.1, params=None, mesh=None):
    """Rectangle [-15,15]x[-10,10], 20 x 0.5 well, three fractures."""
    fr = (
        sine_fracture((0.0, 0.0, 0.25), np.pi / 2, H),
        sine_fracture((-5.0, 0.0, -0.25), 3 * np.pi / 2, H),
        sine_fracture((5.0, 0.0, -0.25), 3 * np.pi / 2, H),
    )
    return ReservoirScenario(
        rectangle(-15, 15, -10, 10),
        rectangle(-10, 10, -0.25, 0.25),
        fr,
        params or FluidParams(),
        mesh or MeshControls(),
        name=f"coupled_ex7(H={H:g})",
    )


def radial_annulus(r_well=0.25, r_out=10.0, n=256, params=None, mesh=None):
    """Circular well in a circular reservoir, no fractures."""
    return ReservoirScenario(
        circle(r_out, n),
        circle(r_well, n // 2),
        (),
        params or FluidParams(),
        mesh or MeshControls(),
        name="radial_annulus",
    )


RESERVOIRS = {"coupled_ex6": coupled_ex6, "coupled_ex6_orthogonal": coupled_ex6_orthogonal, "coupled_ex7": coupled_ex7}
