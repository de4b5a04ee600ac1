"""Conforming triangulation of a reservoir cross-section with fracture strips.

Each fracture becomes a structured strip ``n_u x n_s`` of nodes placed at
``r(u) + s h(u) n(u)``.  Layer ``j`` starts where it leaves the well, so the
first node column lies on the well boundary.  The porous medium is meshed
with Triangle around the hole ``well + strips`` without inserting points on
the hole boundary, so every strip face node is shared with the porous mesh.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import shapely
import triangle
from scipy.optimize import brentq
from shapely.geometry import Polygon

from ..discretization.grids import TriMesh
from ..errors import MeshError
from .scenario import ReservoirScenario


@dataclass
class StripLayout:
    """Node bookkeeping for one fracture strip.

    ``nodes[i, j]`` are global ids of the strip-side nodes (column i along u,
    layer j across).  ``porous_tip`` holds the porous-side copies of the tip
    nodes ``j = 1..n_s-1`` (equal to the strip ones when the tip is open).
    """

    nodes: np.ndarray
    u: np.ndarray
    s: np.ndarray
    porous_tip: np.ndarray
    region: int

    @property
    def center_u(self):
        return self.u[:, self.u.shape[1] // 2]

    @property
    def center_nodes(self):
        return self.nodes[:, self.nodes.shape[1] // 2]


@dataclass
class CoupledMesh(TriMesh):
    strips: list = field(default_factory=list)
    porous_area: float = 0.0
    fracture_area: float = 0.0


def _signed_distance(poly, pts):
    d = shapely.distance(poly.exterior, shapely.points(pts))
    inside = shapely.contains_xy(poly, pts[..., 0], pts[..., 1])
    return np.where(inside, -d, d)


def _exit_parameter(frac, s, well, span=0.5, n=2001):
    """Parameter where layer ``s`` crosses the well boundary, nearest to u0."""
    u0 = frac.u_range[0]
    grid = u0 + np.linspace(-span, span, n)
    phi = _signed_distance(well, frac.offset_point(grid, np.full_like(grid, s)))
    change = np.nonzero((phi[:-1] < 0) & (phi[1:] >= 0))[0]
    if change.size == 0:
        raise MeshError(f"fracture layer s={s:+.3f} does not leave the well near its start")
    k = change[np.argmin(np.abs(grid[change] - u0))]
    f = lambda u: float(_signed_distance(well, frac.offset_point(np.array([u]), np.array([s])))[0])
    return brentq(f, grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _project_on_edge(well_pts, p):
    """(edge index, parameter t) of a point lying on the well polygon."""
    a = well_pts
    b = np.roll(well_pts, -1, axis=0)
    d = b - a
    t = np.clip(np.einsum("ki,ki->k", p - a, d) / np.einsum("ki,ki->k", d, d), 0, 1)
    dist = np.linalg.norm(a + t[:, None] * d - p, axis=1)
    k = int(np.argmin(dist))
    if dist[k] > 1e-8:
        raise MeshError(f"fracture start point {p} is not on the well boundary")
    return k, float(t[k])


def _subdivide(p, q, size):
    n = max(1, int(np.ceil(np.linalg.norm(q - p) / size)))
    t = np.linspace(0, 1, n + 1)[1:-1]
    return [p + ti * (q - p) for ti in t]


def _graded_subdivide(p, q, size_at):
    """Interior points on segment p-q spaced by the local target size."""
    L = np.linalg.norm(q - p)
    t = np.linspace(0.0, 1.0, 513)
    size = size_at(p + t[:, None] * (q - p))
    # number of elements so far as a function of position
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (1 / size[1:] + 1 / size[:-1]) * np.diff(t) * L)])
    n = max(1, int(np.ceil(cum[-1])))
    ti = np.interp(np.linspace(0, cum[-1], n + 1)[1:-1], cum, t)
    return [p + x * (q - p) for x in ti]


def _column_parameters(n_u, first=None, growth=1.15):
    """Column positions t in [0, 1]: uniform, or geometric from ``first`` up to 1/n_u."""
    if first is None or first >= 1.0 / n_u:
        return np.linspace(0.0, 1.0, n_u + 1)
    steps = [first]
    while steps[-1] * growth < 1.0 / n_u:
        steps.append(steps[-1] * growth)
    head = np.cumsum(steps)
    n_rest = max(1, int(np.ceil((1.0 - head[-1]) * n_u)))
    return np.concatenate([[0.0], head, np.linspace(head[-1], 1.0, n_rest + 1)[1:]])


def _strip_points(frac, mc, well):
    n_s = mc.n_s
    s = np.linspace(-1.0, 1.0, n_s + 1)
    u_end = frac.u_range[1]
    ustar = np.array([_exit_parameter(frac, sj, well) for sj in s])
    first = None
    if mc.mouth_size is not None:
        speed = np.linalg.norm(frac.curve(np.array([frac.u_range[0]]))[1][0])
        first = mc.mouth_size / (speed * (u_end - ustar.min()))
    t = _column_parameters(mc.n_u, first, mc.mouth_growth)
    U = ustar[None, :] + (u_end - ustar[None, :]) * t[:, None]
    P = frac.offset_point(U, np.broadcast_to(s, U.shape))
    return s, U, P


def build_coupled_mesh(scn: ReservoirScenario) -> CoupledMesh:
    mc = scn.mesh
    well = Polygon(scn.well)
    outer = Polygon(scn.outer)
    if not outer.contains(well):
        raise MeshError("well must lie strictly inside the reservoir")

    strips = []
    for frac in scn.fractures:
        s, U, P = _strip_points(frac, mc, well)
        body = P[1:].reshape(-1, 2)
        if np.any(shapely.contains_xy(well, body[:, 0], body[:, 1])):
            raise MeshError("fracture strip re-enters the well")
        if not np.all(shapely.contains_xy(outer, body[:, 0], body[:, 1])):
            raise MeshError("fracture strip leaves the reservoir")
        strips.append((s, U, P))

    spacing = [np.median(np.linalg.norm(np.diff(P, axis=0), axis=-1)) for _, _, P in strips]
    h_near = mc.h_near or (min(spacing) if spacing else 0.05 * np.sqrt(well.area))
    hole_parts = [well] + [Polygon(np.vstack([P[:, 0], P[-1, 1:], P[::-1, -1]])) for _, _, P in strips]
    near = shapely.union_all(hole_parts)
    mouths = shapely.union_all([shapely.LineString(P[0]) for _, _, P in strips]) if strips else None

    def size_at(x):
        pts = shapely.points(x)
        size = np.minimum(mc.h_far, h_near + mc.grading * shapely.distance(near, pts))
        if mc.mouth_size is not None and mouths is not None:
            size = np.minimum(size, mc.mouth_size + mc.grading * shapely.distance(mouths, pts))
        return size

    # -- inner loop: well polygon with strip outlines spliced in ---------------
    W = np.asarray(scn.well, float)
    attach = {}
    for k, (s, U, P) in enumerate(strips):
        eb, tb = _project_on_edge(W, P[0, 0])
        et, tt = _project_on_edge(W, P[0, -1])
        if eb != et:
            raise MeshError("fracture start straddles a well corner")
        attach.setdefault(eb, []).append((min(tb, tt), k, tb < tt))

    verts: list = []
    tags: list = []  # ("well",) / ("strip", k, i, j)

    def push(p, tag):
        verts.append(np.asarray(p, float))
        tags.append(tag)

    for e in range(len(W)):
        a, b = W[e], W[(e + 1) % len(W)]
        push(a, ("well",))
        cursor = a
        for _, k, bottom_first in sorted(attach.get(e, [])):
            s, U, P = strips[k]
            n_u, n_s = U.shape[0] - 1, U.shape[1] - 1
            jA, jB = (0, n_s) if bottom_first else (n_s, 0)
            step = 1 if bottom_first else -1
            for p in _graded_subdivide(cursor, P[0, jA], size_at):
                push(p, ("well",))
            push(P[0, jA], ("strip", k, 0, jA))
            for i in range(1, n_u + 1):
                push(P[i, jA], ("strip", k, i, jA))
            for j in range(jA + step, jB, step):
                push(P[n_u, j], ("tip", k, n_u, j))
            for i in range(n_u, 0, -1):
                push(P[i, jB], ("strip", k, i, jB))
            push(P[0, jB], ("strip", k, 0, jB))
            cursor = P[0, jB]
        for p in _graded_subdivide(cursor, b, size_at):
            push(p, ("well",))

    n_inner = len(verts)
    inner = np.array(verts)
    O = np.asarray(scn.outer, float)
    outer_pts = []
    for e in range(len(O)):
        a, b = O[e], O[(e + 1) % len(O)]
        outer_pts.append(a)
        outer_pts.extend(_graded_subdivide(a, b, size_at))
    outer_pts = np.array(outer_pts)
    vertices = np.vstack([inner, outer_pts])
    n_in = vertices.shape[0]
    seg_inner = np.stack([np.arange(n_inner), (np.arange(n_inner) + 1) % n_inner], 1)
    m = outer_pts.shape[0]
    seg_outer = n_inner + np.stack([np.arange(m), (np.arange(m) + 1) % m], 1)
    hole = np.array(well.representative_point().coords)
    pslg = {"vertices": vertices, "segments": np.vstack([seg_inner, seg_outer]), "holes": hole}

    amax = np.sqrt(3) / 4 * mc.h_far**2
    opts = f"pq{mc.min_angle:g}Y"
    tri = triangle.triangulate(pslg, opts + f"a{amax:.12g}")
    for _ in range(12):
        p = tri["vertices"][tri["triangles"]]
        c = p.mean(axis=1)
        target = np.sqrt(3) / 4 * size_at(c) ** 2
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if np.mean(area > 1.5 * target) < 1e-3:
            break
        tri["triangle_max_area"] = np.minimum(target, area)
        tri = triangle.triangulate(tri, "r" + opts + "a")
    pts = tri["vertices"]
    if pts.shape[0] < n_in or not np.allclose(pts[:n_in], vertices, rtol=0, atol=0):
        raise MeshError("Triangle moved or dropped input vertices")
    if "segments" in tri and np.any(np.isin(tri.get("segments", np.zeros((0, 2))), np.arange(n_in), invert=True).all(axis=1)):
        raise MeshError("Triangle inserted Steiner points on the boundary")
    por_tris = tri["triangles"].astype(np.int64)

    # -- strip nodes, triangles, tags ------------------------------------------
    all_pts = [pts]
    n_nodes = pts.shape[0]
    layouts = []
    strip_tris = []
    regions = [np.zeros(len(por_tris), np.int64)]
    tip_of = {}
    for v_id, tag in enumerate(tags):
        if tag[0] in ("strip", "tip"):
            tip_of[tag[1:]] = v_id
    well_nodes = [i for i, t in enumerate(tags) if t[0] == "well"]
    for k, (s, U, P) in enumerate(strips):
        n_u, n_s = U.shape[0] - 1, U.shape[1] - 1
        ids = np.full((n_u + 1, n_s + 1), -1, np.int64)
        for i in range(n_u + 1):
            for j in (0, n_s):
                ids[i, j] = tip_of[(k, i, j)]
        porous_tip = np.array([tip_of[(k, n_u, j)] for j in range(1, n_s)], np.int64)
        extra = []
        for i in range(n_u + 1):
            for j in range(1, n_s):
                if i == n_u and not scn.tip_wall:
                    ids[i, j] = tip_of[(k, i, j)]
                    continue
                ids[i, j] = n_nodes
                extra.append(P[i, j])
                n_nodes += 1
        if extra:
            all_pts.append(np.array(extra))
        a = ids[:-1, :-1].ravel()
        b = ids[1:, :-1].ravel()
        c = ids[1:, 1:].ravel()
        d = ids[:-1, 1:].ravel()
        t = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
        strip_tris.append(t)
        regions.append(np.full(len(t), k + 1, np.int64))
        well_nodes.extend(ids[0].tolist())
        layouts.append(StripLayout(ids, U, s, porous_tip, k + 1))

    points = np.vstack(all_pts)
    triangles = np.vstack([por_tris] + strip_tris)
    region = np.concatenate(regions)
    # orient every triangle counter-clockwise
    p = points[triangles]
    det = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    flip = det < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    node_tags = {
        "well": np.unique(np.array(well_nodes, np.int64)),
        "outer": np.arange(n_inner, n_in, dtype=np.int64),
    }
    mesh = CoupledMesh(points, triangles, region, node_tags, {"h_near": h_near}, strips=layouts)
    a = mesh.areas
    mesh.porous_area = float(np.sum(a[region == 0]))
    mesh.fracture_area = float(np.sum(a[region > 0]))
    return mesh
