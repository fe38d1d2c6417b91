"""Graded conforming triangulation of the two-inclusion domain.

The domain splits into a structured neck band (|x1| <= neck_halfwidth,
between the two circle arcs, tangential spacing proportional to
sqrt(gap) and nz uniform layers across the gap) and an outer annulus
between the "snowman" ring (inclusion arcs + the two vertical band edges)
and the outer circle, meshed by radial spokes from the origin.  Both
blocks share nodes on the band edges, so the global mesh is conforming.
Quadratic (6-node) triangles; midpoints of boundary edges are snapped to
the circles, giving an isoparametric approximation of the curved arcs.

Everything is deterministic for fixed inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Geometry

REGIONS = ("bulk", "neck", "incl1", "incl2")
BOUNDARIES = ("outer", "incl1", "incl2")


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class MeshParams:
    """Mesh resolution knobs.

    nz: element layers across the gap (even keeps a node at (0,0)).
    ct: tangential spacing factor, dx ~ ct*sqrt(gap).
    neck_halfwidth: half-width R of the structured band.
    arc_target: target arc spacing on the inclusion circles outside the band.
    nr: radial element layers in the annulus.
    radial_growth: geometric grading ratio of the radial layers.
    """

    nz: int = 8
    ct: float = 0.35
    neck_halfwidth: float = 0.45
    arc_target: float = 0.12
    nr: int = 16
    radial_growth: float = 1.25
    collar_width: float = 0.03

    def refined(self, factor: float = 2.0) -> "MeshParams":
        return MeshParams(
            nz=int(self.nz * factor),
            ct=self.ct / factor,
            neck_halfwidth=self.neck_halfwidth,
            arc_target=self.arc_target / factor,
            nr=int(self.nr * factor),
            radial_growth=self.radial_growth ** (1 / factor),
            collar_width=self.collar_width / factor,
        )


@dataclass
class Mesh:
    nodes: np.ndarray  # (N, 2)
    tris: np.ndarray  # (nE, 6) corner, corner, corner, mid01, mid12, mid20
    region: np.ndarray  # (nE,) index into REGIONS
    boundary_edges: np.ndarray  # (nB, 3) corner, corner, midpoint
    boundary_tag: np.ndarray  # (nB,) index into BOUNDARIES
    geometry: Geometry | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.tris)

    def boundary_nodes(self, tag: str) -> np.ndarray:
        k = BOUNDARIES.index(tag)
        sel = self.boundary_edges[self.boundary_tag == k]
        return np.unique(sel)

    def elements_in(self, region: str) -> np.ndarray:
        return np.nonzero(self.region == REGIONS.index(region))[0]

    def corner_areas(self) -> np.ndarray:
        p = self.nodes[self.tris[:, :3]]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def validate(self) -> None:
        areas = self.corner_areas()
        if len(areas) == 0 or areas.min() <= 0:
            raise MeshError("non-positive element area")
        # conformity: every corner edge shared by <= 2 elements; boundary
        # edges by exactly one
        counts: dict[tuple[int, int], int] = {}
        for tri in self.tris[:, :3]:
            for a, b in ((0, 1), (1, 2), (2, 0)):
                e = (min(tri[a], tri[b]), max(tri[a], tri[b]))
                counts[e] = counts.get(e, 0) + 1
        if any(c > 2 for c in counts.values()):
            raise MeshError("non-conforming edge (shared by >2 elements)")
        for edge in self.boundary_edges:
            e = (min(edge[0], edge[1]), max(edge[0], edge[1]))
            if counts.get(e) != 1:
                raise MeshError("boundary edge not on the mesh boundary")


# ---------------------------------------------------------------------------
# Node registry
# ---------------------------------------------------------------------------


class _Registry:
    def __init__(self) -> None:
        self.coords: list[tuple[float, float]] = []
        self._index: dict[tuple[float, float], int] = {}

    def add(self, x: float, y: float) -> int:
        key = (round(x, 12), round(y, 12))
        idx = self._index.get(key)
        if idx is None:
            idx = len(self.coords)
            self._index[key] = idx
            self.coords.append((x, y))
        return idx


def _tangential_stations(geom: Geometry, params: MeshParams) -> list[float]:
    """Graded stations on [-R, R] with dx ~ ct * sqrt(gap)."""
    R = params.neck_halfwidth
    xs = [0.0]
    while xs[-1] < R:
        step = params.ct * math.sqrt(geom.gap(xs[-1]))
        xs.append(xs[-1] + step)
    # rescale the last interval so the band edge is hit exactly
    xs = [x * R / xs[-1] for x in xs]
    left = [-x for x in reversed(xs[1:])]
    return left + xs


def generate_mesh(geom: Geometry, params: MeshParams | None = None) -> Mesh:
    params = params or MeshParams()
    if params.nz < 2:
        raise MeshError("nz must be >= 2")
    if geom.eps / params.nz < 1e-12:
        raise MeshError(
            "gap eps too small for the requested layer count; "
            "increase eps or decrease nz (layer thickness underflows)"
        )
    if params.neck_halfwidth >= min(geom.rho1, geom.rho2) * 0.95:
        raise MeshError("neck_halfwidth must stay well inside the inclusion radii")

    reg = _Registry()
    tris: list[tuple[int, int, int]] = []
    region: list[int] = []
    bedges: list[tuple[int, int]] = []
    btags: list[int] = []

    # ---- structured neck band ------------------------------------------
    xs = _tangential_stations(geom, params)
    nz = params.nz
    grid: list[list[int]] = []
    for x in xs:
        lo, hi = geom.gamma2(x), geom.gamma1(x)
        col = [reg.add(x, lo + (hi - lo) * j / nz) for j in range(nz + 1)]
        grid.append(col)
    for k in range(len(xs) - 1):
        for j in range(nz):
            a, b = grid[k][j], grid[k + 1][j]
            c, d = grid[k + 1][j + 1], grid[k][j + 1]
            tris.append((a, b, c))
            tris.append((a, c, d))
            region.extend([REGIONS.index("neck")] * 2)
        bedges.append((grid[k][0], grid[k + 1][0]))
        btags.append(BOUNDARIES.index("incl2"))
        bedges.append((grid[k + 1][nz], grid[k][nz]))
        btags.append(BOUNDARIES.index("incl1"))

    # ---- snowman ring ----------------------------------------------------
    R = params.neck_halfwidth
    ring: list[int] = []
    ring_arc_tag: list[int | None] = []  # tag of the edge starting at ring[i]

    def arc_points(center, rho, a0, a1, tag):
        """Append interior points of the ccw arc from angle a0 to a1."""
        length = (a1 - a0) * rho
        n = max(2, int(math.ceil(length / params.arc_target)))
        for t in range(1, n):
            ang = a0 + (a1 - a0) * t / n
            ring.append(reg.add(center[0] + rho * math.cos(ang), center[1] + rho * math.sin(ang)))
            ring_arc_tag.append(tag)

    c1, c2 = geom.center1, geom.center2
    tag1, tag2 = BOUNDARIES.index("incl1"), BOUNDARIES.index("incl2")

    # start at the bottom-right band corner, go ccw
    right_col = grid[-1]
    left_col = grid[0]
    for j, node in enumerate(right_col):
        ring.append(node)
        ring_arc_tag.append(None)  # band edge: interior interface
    # top arc of circle 1 from (R, gamma1(R)) ccw to (-R, gamma1(-R))
    a0 = math.atan2(geom.gamma1(R) - c1[1], R)
    a1 = math.atan2(geom.gamma1(-R) - c1[1], -R)
    if a1 < a0:
        a1 += 2 * math.pi
    ring_arc_tag[-1] = tag1  # edge from the corner onto the circle
    arc_points(c1, geom.rho1, a0, a1, tag1)
    ring_arc_tag[-1] = tag1  # edge from the last arc point to the left corner
    for j in range(nz, -1, -1):
        ring.append(left_col[j])
        ring_arc_tag.append(None)
    # bottom arc of circle 2 from (-R, gamma2(-R)) ccw to (R, gamma2(R))
    b0 = math.atan2(geom.gamma2(-R) - c2[1], -R)
    b1 = math.atan2(geom.gamma2(R) - c2[1], R)
    if b1 < b0:
        b1 += 2 * math.pi
    ring_arc_tag[-1] = tag2
    arc_points(c2, geom.rho2, b0, b1, tag2)
    ring_arc_tag[-1] = tag2

    # ---- collar: one thin normal-offset layer around the snowman --------
    # Spokes from the origin graze the inclusion circles near the waist
    # corners; extruding one thin layer along the boundary normal first
    # keeps every cell there well-shaped.
    n_ring = len(ring)
    normals: list[tuple[float, float]] = []
    for i, idx in enumerate(ring):
        x, y = reg.coords[idx]
        if abs(abs(x) - R) < 1e-12 and geom.gamma2(R) - 1e-9 <= y <= geom.gamma1(R) + 1e-9:
            n = (1.0, 0.0) if x > 0 else (-1.0, 0.0)
            on_segment = abs(y - geom.gamma1(R)) > 1e-9 and abs(y - geom.gamma2(R)) > 1e-9
        else:
            on_segment = False
            n = None
        if not on_segment:
            # distance to both circle centers decides the arc
            d1 = math.hypot(x - c1[0], y - c1[1])
            d2 = math.hypot(x - c2[0], y - c2[1])
            if abs(d1 - geom.rho1) < abs(d2 - geom.rho2):
                nc = ((x - c1[0]) / d1, (y - c1[1]) / d1)
            else:
                nc = ((x - c2[0]) / d2, (y - c2[1]) / d2)
            if n is not None:  # band corner: average segment and arc normals
                sx, sy = n[0] + nc[0], n[1] + nc[1]
                h = math.hypot(sx, sy)
                n = (sx / h, sy / h)
            else:
                n = nc
        normals.append(n)
    # cap the width so the corner nodes' tilted normals cannot leapfrog the
    # band-edge node spacing (which would fold the collar)
    w_c = min(params.collar_width, geom.gap(R) / params.nz)
    collar_pts = [
        (reg.coords[idx][0] + w_c * n[0], reg.coords[idx][1] + w_c * n[1])
        for idx, n in zip(ring, normals)
    ]

    # collar angles from the origin must be strictly increasing (mod 2 pi)
    angles = [math.atan2(y, x) for x, y in collar_pts]
    base = angles[0]
    unwrapped = []
    for a in angles:
        while a < base - 1e-12:
            a += 2 * math.pi
        unwrapped.append(a)
        base = a
    if unwrapped[-1] - unwrapped[0] >= 2 * math.pi:
        raise MeshError("collar ring is not star-shaped (geometry too extreme)")

    # ---- annulus ----------------------------------------------------------
    nr = params.nr
    g = params.radial_growth
    weights = np.array([g**k for k in range(nr - 1)])
    s = np.concatenate([[0.0], np.cumsum(weights)])
    s /= s[-1]
    layers: list[list[int]] = [list(ring)]
    layers.append([reg.add(x, y) for x, y in collar_pts])
    for k in range(2, nr + 1):
        row = []
        for i, (x, y) in enumerate(collar_pts):
            ox, oy = geom.R0 * math.cos(unwrapped[i]), geom.R0 * math.sin(unwrapped[i])
            t = s[k - 1]
            row.append(reg.add(x + (ox - x) * t, y + (oy - y) * t))
        layers.append(row)
    for k in range(nr):
        for i in range(n_ring):
            i2 = (i + 1) % n_ring
            a, b = layers[k][i], layers[k][i2]
            c, d = layers[k + 1][i2], layers[k + 1][i]
            tris.append((a, b, c))
            tris.append((a, c, d))
            region.extend([REGIONS.index("bulk")] * 2)
    for i in range(n_ring):
        i2 = (i + 1) % n_ring
        bedges.append((layers[nr][i2], layers[nr][i]))
        btags.append(BOUNDARIES.index("outer"))
        tag = ring_arc_tag[i]
        if tag is not None:
            bedges.append((ring[i2], ring[i]))
            btags.append(tag)

    return _finalize(reg, tris, region, bedges, btags, geom)


def add_inclusion_interiors(mesh: Mesh, n_rings: int = 8) -> Mesh:
    """Extend a mesh with fan-triangulated inclusion interiors.

    Used by the large-contrast cross-check; the interior elements carry the
    region tags 'incl1'/'incl2'.
    """
    geom = mesh.geometry
    if geom is None:
        raise MeshError("mesh carries no geometry")
    reg = _Registry()
    for x, y in mesh.nodes:
        reg.add(float(x), float(y))
    tris = [tuple(t[:3]) for t in mesh.tris]
    region = list(mesh.region)
    # inclusion arcs become interior interfaces; only the outer circle stays
    # a domain boundary, but the arc midpoints must stay snapped so the old
    # curved nodes are reused
    keep = mesh.boundary_tag == BOUNDARIES.index("outer")
    bedges = [(int(e[0]), int(e[1])) for e in mesh.boundary_edges[keep]]
    btags = [int(t) for t in mesh.boundary_tag[keep]]
    snap_edges = {
        (min(int(e[0]), int(e[1])), max(int(e[0]), int(e[1]))): int(t)
        for e, t in zip(mesh.boundary_edges, mesh.boundary_tag)
    }

    for tag, center in (("incl1", geom.center1), ("incl2", geom.center2)):
        bnodes = mesh.boundary_nodes(tag)
        # order the circle nodes by angle around the center
        ang = np.arctan2(mesh.nodes[bnodes, 1] - center[1], mesh.nodes[bnodes, 0] - center[0])
        order = np.argsort(ang)
        # keep only corner nodes of the boundary edges (drop midpoints)
        corners = set()
        k = BOUNDARIES.index(tag)
        for e in mesh.boundary_edges[mesh.boundary_tag == k]:
            corners.add(int(e[0]))
            corners.add(int(e[1]))
        loop = [int(n) for n in bnodes[order] if int(n) in corners]
        m = len(loop)
        rings = [loop]
        for k_r in range(1, n_rings):
            t = 1 - k_r / n_rings
            row = []
            for idx in loop:
                x, y = mesh.nodes[idx]
                row.append(reg.add(center[0] + (x - center[0]) * t, center[1] + (y - center[1]) * t))
            rings.append(row)
        center_id = reg.add(center[0], center[1])
        rcode = REGIONS.index(tag)
        for k_r in range(n_rings - 1):
            for i in range(m):
                i2 = (i + 1) % m
                a, b = rings[k_r][i], rings[k_r][i2]
                c, d = rings[k_r + 1][i2], rings[k_r + 1][i]
                tris.append((a, c, b))
                tris.append((a, d, c))
                region.extend([rcode] * 2)
        for i in range(m):
            i2 = (i + 1) % m
            tris.append((rings[-1][i], center_id, rings[-1][i2]))
            region.append(rcode)

    return _finalize(reg, tris, region, bedges, btags, geom, snap_edges)


def _finalize(reg, tris, region, bedges, btags, geom: Geometry,
              snap_edges: dict[tuple[int, int], int] | None = None) -> Mesh:
    """Orient corners ccw, add quadratic midpoints, snap boundary arcs."""
    coords = reg.coords
    btag_by_edge: dict[tuple[int, int], int] = dict(snap_edges or {})
    for (a, b), t in zip(bedges, btags):
        btag_by_edge[(min(a, b), max(a, b))] = t

    def snap(x: float, y: float, tag: int) -> tuple[float, float]:
        name = BOUNDARIES[tag]
        if name == "outer":
            c, rho = (0.0, 0.0), geom.R0
        elif name == "incl1":
            c, rho = geom.center1, geom.rho1
        else:
            c, rho = geom.center2, geom.rho2
        dx, dy = x - c[0], y - c[1]
        d = math.hypot(dx, dy)
        return (c[0] + dx * rho / d, c[1] + dy * rho / d)

    mid_cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        idx = mid_cache.get(key)
        if idx is not None:
            return idx
        xa, ya = coords[a]
        xb, yb = coords[b]
        x, y = (xa + xb) / 2, (ya + yb) / 2
        tag = btag_by_edge.get(key)
        if tag is not None:
            x, y = snap(x, y, tag)
        idx = reg.add(x, y)
        mid_cache[key] = idx
        return idx

    tris6 = []
    for (a, b, c) in tris:
        xa, ya = coords[a]
        xb, yb = coords[b]
        xc, yc = coords[c]
        if (xb - xa) * (yc - ya) - (xc - xa) * (yb - ya) < 0:
            b, c = c, b
        tris6.append((a, b, c, midpoint(a, b), midpoint(b, c), midpoint(c, a)))

    bedges3 = [(a, b, midpoint(a, b)) for a, b in bedges]
    mesh = Mesh(
        nodes=np.array(reg.coords, dtype=float),
        tris=np.array(tris6, dtype=np.int64),
        region=np.array(region, dtype=np.int8),
        boundary_edges=np.array(bedges3, dtype=np.int64),
        boundary_tag=np.array(btags, dtype=np.int8),
        geometry=geom,
    )
    mesh.validate()
    return mesh


# ---------------------------------------------------------------------------
# ASCII export / import
# ---------------------------------------------------------------------------


def write_mesh(mesh: Mesh, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"lamegap-mesh 1 {mesh.n_nodes} {mesh.n_elements} {len(mesh.boundary_edges)}\n")
        for i, (x, y) in enumerate(mesh.nodes):
            fh.write(f"{i} {float(x)!r} {float(y)!r}\n")
        for i, tri in enumerate(mesh.tris):
            ns = " ".join(str(int(n)) for n in tri)
            fh.write(f"{i} {ns} {REGIONS[mesh.region[i]]}\n")
        for i, edge in enumerate(mesh.boundary_edges):
            ns = " ".join(str(int(n)) for n in edge)
            fh.write(f"{i} {ns} {BOUNDARIES[mesh.boundary_tag[i]]}\n")


def read_mesh(path: str) -> Mesh:
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != ["lamegap-mesh", "1"]:
            raise MeshError(f"not a lamegap mesh file: {path}")
        n, ne, nb = (int(v) for v in header[2:5])
        nodes = np.empty((n, 2))
        for _ in range(n):
            parts = fh.readline().split()
            nodes[int(parts[0])] = (float(parts[1]), float(parts[2]))
        tris = np.empty((ne, 6), dtype=np.int64)
        region = np.empty(ne, dtype=np.int8)
        for _ in range(ne):
            parts = fh.readline().split()
            i = int(parts[0])
            tris[i] = [int(v) for v in parts[1:7]]
            region[i] = REGIONS.index(parts[7])
        bedges = np.empty((nb, 3), dtype=np.int64)
        btags = np.empty(nb, dtype=np.int8)
        for _ in range(nb):
            parts = fh.readline().split()
            i = int(parts[0])
            bedges[i] = [int(v) for v in parts[1:4]]
            btags[i] = BOUNDARIES.index(parts[4])
    return Mesh(nodes, tris, region, bedges, btags)
