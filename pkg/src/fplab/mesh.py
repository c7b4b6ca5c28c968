"""Simplicial meshes of balls and boxes in two and three dimensions.

Construction is fully deterministic: ball meshes come from a fixed layered
template (concentric rings in 2D, an octahedral fan in 3D) refined uniformly
with radial projection of new boundary vertices; box meshes come from the
Kuhn subdivision of a tensor grid. Meshes are immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    InvalidBox,
    InvalidRadius,
    RefinementTooDeep,
    SingularElement,
)

MAX_LEVELS = 8
_BOUNDARY_RTOL = 1e-12

_FACTORIAL = {2: 2.0, 3: 6.0}


@dataclass(frozen=True)
class Ball:
    """Ball domain descriptor."""

    center: tuple
    radius: float

    @property
    def dim(self) -> int:
        return len(self.center)

    def boundary_mask(self, vertices: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(vertices - np.asarray(self.center), axis=1)
        return np.abs(r - self.radius) <= _BOUNDARY_RTOL * max(self.radius, 1.0)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class Box:
    """Axis-aligned box domain descriptor."""

    lo: tuple
    hi: tuple

    @property
    def dim(self) -> int:
        return len(self.lo)

    def boundary_mask(self, vertices: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        scale = np.maximum(np.abs(lo), np.maximum(np.abs(hi), 1.0))
        on_lo = np.abs(vertices - lo) <= _BOUNDARY_RTOL * scale
        on_hi = np.abs(vertices - hi) <= _BOUNDARY_RTOL * scale
        return (on_lo | on_hi).any(axis=1)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))


Domain = Union[Ball, Box]


@dataclass(frozen=True)
class SimplicialMesh:
    """Conforming simplicial mesh.

    Attributes
    ----------
    dim : int
        Ambient (and element) dimension, 2 or 3.
    vertices : ndarray, shape (nv, dim)
    elements : ndarray, shape (ne, dim + 1)
        Vertex indices, positively oriented.
    boundary : ndarray of bool, shape (nv,)
        Per-vertex boundary flags (analytic against the domain descriptor
        when one is attached, otherwise as read from file).
    domain : Ball | Box | None
        Descriptor used for boundary detection and refinement projection.
    """

    dim: int
    vertices: np.ndarray
    elements: np.ndarray
    boundary: np.ndarray
    domain: Optional[Domain] = None

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.elements.setflags(write=False)
        self.boundary.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def element_coords(self) -> np.ndarray:
        """Vertex coordinates per element, shape (ne, dim + 1, dim)."""
        return self.vertices[self.elements]

    def volumes(self) -> np.ndarray:
        return signed_volumes(self.vertices, self.elements, self.dim)

    def total_volume(self) -> float:
        return float(self.volumes().sum())


def signed_volumes(vertices: np.ndarray, elements: np.ndarray, dim: int) -> np.ndarray:
    coords = vertices[elements]
    edges = coords[:, 1:, :] - coords[:, :1, :]
    det = np.linalg.det(edges)
    return det / _FACTORIAL[dim]


def _orient_and_build(vertices, elements, dim, domain, boundary=None) -> SimplicialMesh:
    vertices = np.ascontiguousarray(vertices, dtype=float)
    elements = np.ascontiguousarray(elements, dtype=np.int64)
    vols = signed_volumes(vertices, elements, dim)
    flip = vols < 0
    if flip.any():
        elements = elements.copy()
        elements[flip, -2], elements[flip, -1] = (
            elements[flip, -1].copy(),
            elements[flip, -2].copy(),
        )
        vols = signed_volumes(vertices, elements, dim)
    if (vols <= 0).any():
        bad = int(np.argmax(vols <= 0))
        raise SingularElement(f"element {bad} has volume {vols[bad]:.3e}")
    if boundary is None:
        boundary = domain.boundary_mask(vertices)
    boundary = np.ascontiguousarray(boundary, dtype=bool)
    return SimplicialMesh(
        dim=dim, vertices=vertices, elements=elements, boundary=boundary, domain=domain
    )


def _check_levels(levels: int):
    if not isinstance(levels, (int, np.integer)) or levels < 0:
        raise RefinementTooDeep(f"levels must be a non-negative integer, got {levels!r}")
    if levels > MAX_LEVELS:
        raise RefinementTooDeep(f"levels={levels} exceeds the supported depth {MAX_LEVELS}")


def _disk_template(center: np.ndarray, radius: float) -> SimplicialMesh:
    # Two concentric rings: 6 vertices at radius/2, 12 at the boundary.
    # 24 triangles total; the boundary polygon is a regular 12-gon (area 3 r^2).
    verts = [center]
    for k in range(6):
        t = 2 * np.pi * k / 6
        verts.append(center + 0.5 * radius * np.array([np.cos(t), np.sin(t)]))
    for k in range(12):
        t = 2 * np.pi * k / 12
        verts.append(center + radius * np.array([np.cos(t), np.sin(t)]))
    a = [1 + k for k in range(6)]          # inner ring
    b = [7 + k for k in range(12)]         # outer ring
    tris = []
    for k in range(6):
        a0, a1 = a[k], a[(k + 1) % 6]
        b0, b1, b2 = b[2 * k], b[2 * k + 1], b[(2 * k + 2) % 12]
        tris.append((0, a0, a1))
        tris.append((a0, b0, b1))
        tris.append((a0, b1, a1))
        tris.append((a1, b1, b2))
    domain = Ball(center=tuple(center), radius=radius)
    return _orient_and_build(np.array(verts), np.array(tris), 2, domain)


def _ball_template(center: np.ndarray, radius: float) -> SimplicialMesh:
    # Octahedron inscribed in the sphere, fanned through the center: 8 tets.
    verts = [center]
    for axis in range(3):
        for sign in (1.0, -1.0):
            v = center.copy()
            v[axis] += sign * radius
            verts.append(v)
    plus = [1, 3, 5]
    minus = [2, 4, 6]
    tets = []
    for s0 in (0, 1):
        for s1 in (0, 1):
            for s2 in (0, 1):
                i = plus[0] if s0 == 0 else minus[0]
                j = plus[1] if s1 == 0 else minus[1]
                k = plus[2] if s2 == 0 else minus[2]
                tets.append((0, i, j, k))
    domain = Ball(center=tuple(center), radius=radius)
    return _orient_and_build(np.array(verts), np.array(tets), 3, domain)


def build_ball_mesh(center, radius: float, levels: int = 0) -> SimplicialMesh:
    """Mesh a ball by uniform refinement of a fixed layered template.

    New boundary vertices created by refinement are projected onto the
    sphere, so the mesh volume increases monotonically toward the ball
    volume at the standard O(4^-levels) rate.

    Parameters
    ----------
    center : sequence of float
        Ball center; its length fixes the dimension (2 or 3).
    radius : float
        Positive finite radius.
    levels : int
        Number of uniform refinements of the template, at most 8.
    """
    center = np.asarray(center, dtype=float)
    dim = center.shape[0]
    if dim not in (2, 3):
        raise ValueError(f"ball center must have length 2 or 3, got {dim}")
    if not np.isfinite(radius) or radius <= 0:
        raise InvalidRadius(f"radius must be positive and finite, got {radius!r}")
    _check_levels(levels)
    mesh = _disk_template(center, radius) if dim == 2 else _ball_template(center, radius)
    for _ in range(levels):
        mesh = refine_uniform(mesh)
    return mesh


def build_box_mesh(lo, hi, cells_per_axis) -> SimplicialMesh:
    """Kuhn-subdivide a tensor grid on an axis-aligned box.

    Every grid cell is split along the same lo-to-hi diagonal (2 triangles in
    2D, 6 tetrahedra in 3D), which yields a conforming, nonobtuse mesh.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.shape[0]
    if dim not in (2, 3) or hi.shape[0] != dim:
        raise InvalidBox("box bounds must both have length 2 or 3")
    if not (np.isfinite(lo).all() and np.isfinite(hi).all()) or (hi <= lo).any():
        raise InvalidBox(f"box bounds must satisfy lo < hi per axis, got lo={lo}, hi={hi}")
    if np.isscalar(cells_per_axis) or isinstance(cells_per_axis, (int, np.integer)):
        cells = np.full(dim, int(cells_per_axis))
    else:
        cells = np.asarray(cells_per_axis, dtype=int)
    if (cells < 1).any():
        raise InvalidBox(f"cells_per_axis must be >= 1, got {cells}")

    axes = [np.linspace(lo[d], hi[d], cells[d] + 1) for d in range(dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    vertices = np.stack([g.ravel() for g in grids], axis=1)
    shape = cells + 1

    def vid(idx):
        out = idx[0]
        for d in range(1, dim):
            out = out * shape[d] + idx[d]
        return out

    elements = []
    from itertools import permutations, product

    corner_ranges = [range(c) for c in cells]
    perms = list(permutations(range(dim)))
    for corner in product(*corner_ranges):
        corner = np.asarray(corner)
        for perm in perms:
            # path simplex: walk from the cell's lo corner to its hi corner
            idx = corner.copy()
            simplex = [vid(idx)]
            for axis in perm:
                idx = idx.copy()
                idx[axis] += 1
                simplex.append(vid(idx))
            elements.append(simplex)
    domain = Box(lo=tuple(lo), hi=tuple(hi))
    return _orient_and_build(vertices, np.array(elements), dim, domain)


def _mesh_edges(elements: np.ndarray, dim: int):
    from itertools import combinations

    pairs = list(combinations(range(dim + 1), 2))
    e = np.concatenate([elements[:, list(p)] for p in pairs], axis=0)
    e.sort(axis=1)
    return np.unique(e, axis=0)


def boundary_facets(mesh: SimplicialMesh):
    """Facets owned by exactly one element.

    Returns
    -------
    list of (facet, element) pairs; facet is a sorted tuple of vertex ids.
    """
    from itertools import combinations

    count: dict = {}
    owner: dict = {}
    for ei, elem in enumerate(mesh.elements):
        for f in combinations(sorted(elem.tolist()), mesh.dim):
            count[f] = count.get(f, 0) + 1
            owner[f] = ei
    return [(f, owner[f]) for f, c in count.items() if c == 1]


def check_conformity(mesh: SimplicialMesh) -> dict:
    """Validate facet sharing and boundary-flag consistency.

    Every facet must be owned by one element (boundary) or exactly two
    (interior); boundary-facet vertices must carry the boundary flag.
    """
    from itertools import combinations

    count: dict = {}
    for elem in mesh.elements:
        for f in combinations(sorted(elem.tolist()), mesh.dim):
            count[f] = count.get(f, 0) + 1
    over = [f for f, c in count.items() if c > 2]
    boundary = [f for f, c in count.items() if c == 1]
    flag_errors = [
        f for f in boundary if not all(mesh.boundary[v] for v in f)
    ]
    ok = not over and not flag_errors
    return {
        "conforming": ok,
        "num_boundary_facets": len(boundary),
        "overshared_facets": len(over),
        "flag_mismatches": len(flag_errors),
    }


def refine_uniform(mesh: SimplicialMesh) -> SimplicialMesh:
    """Red refinement: split every element by its edge midpoints.

    Midpoints of boundary edges of a ball mesh are projected onto the
    sphere. Triangles yield 4 children; tetrahedra yield 4 corner children
    plus 4 from the inner octahedron, split along its shortest diagonal.
    """
    from itertools import combinations

    dim = mesh.dim
    edges = _mesh_edges(mesh.elements, dim)
    edge_index = {(int(a), int(b)): i for i, (a, b) in enumerate(edges)}
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])

    if isinstance(mesh.domain, Ball):
        bmask = np.zeros(len(edges), dtype=bool)
        for f, _ in boundary_facets(mesh):
            for a, b in combinations(f, 2):
                bmask[edge_index[(a, b)]] = True
        if bmask.any():
            c = np.asarray(mesh.domain.center)
            v = mids[bmask] - c
            norms = np.linalg.norm(v, axis=1, keepdims=True)
            mids[bmask] = c + mesh.domain.radius * v / norms

    nv = mesh.num_vertices
    vertices = np.vstack([mesh.vertices, mids])

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        return nv + edge_index[key]

    children = []
    if dim == 2:
        for t in mesh.elements:
            v0, v1, v2 = (int(x) for x in t)
            m01, m12, m02 = mid(v0, v1), mid(v1, v2), mid(v0, v2)
            children += [
                (v0, m01, m02),
                (v1, m12, m01),
                (v2, m02, m12),
                (m01, m12, m02),
            ]
    else:
        for t in mesh.elements:
            v0, v1, v2, v3 = (int(x) for x in t)
            m01, m02, m03 = mid(v0, v1), mid(v0, v2), mid(v0, v3)
            m12, m13, m23 = mid(v1, v2), mid(v1, v3), mid(v2, v3)
            children += [
                (v0, m01, m02, m03),
                (v1, m01, m12, m13),
                (v2, m02, m12, m23),
                (v3, m03, m13, m23),
            ]
            # inner octahedron: pick the shortest of the three diagonals
            diags = [(m01, m23), (m02, m13), (m03, m12)]
            lengths = [
                float(np.sum((vertices[a] - vertices[b]) ** 2)) for a, b in diags
            ]
            da, db = diags[int(np.argmin(lengths))]
            ring = [m01, m02, m03, m12, m13, m23]
            ring = [m for m in ring if m not in (da, db)]
            # ring holds the 4 equatorial midpoints; connect each adjacent
            # pair (sharing a parent face) to the chosen diagonal
            quads = []
            for i in range(4):
                for j in range(i + 1, 4):
                    a, b = ring[i], ring[j]
                    quads.append((a, b))
            for a, b in quads:
                # adjacent iff the two midpoints share a parent vertex
                ea = _parent_pair(a - nv, edges)
                eb = _parent_pair(b - nv, edges)
                if set(ea) & set(eb):
                    children.append((da, db, a, b))
    children = np.asarray(children, dtype=np.int64)
    return _orient_and_build(vertices, children, dim, mesh.domain)


def _parent_pair(edge_row: int, edges: np.ndarray):
    return int(edges[edge_row, 0]), int(edges[edge_row, 1])


def mesh_quality(mesh: SimplicialMesh) -> dict:
    """Volume extremes, shape regularity, and the acuteness flag.

    The acuteness flag is true iff every element's identity-diffusion
    stiffness block has non-positive off-diagonal entries, which is the
    property the discrete maximum principle needs.
    """
    coords = mesh.element_coords()
    vols = mesh.volumes()
    ne, nloc, dim = coords.shape

    # local P1 gradients: columns of C[1:, :] where C = inverse of [1 | x]
    aug = np.concatenate([np.ones((ne, nloc, 1)), coords], axis=2)
    cinv = np.linalg.inv(aug)
    grads = cinv[:, 1:, :]  # (ne, dim, nloc)

    gram = np.einsum("edi,edj->eij", grads, grads) * vols[:, None, None]
    off = ~np.eye(nloc, dtype=bool)
    max_off = gram[:, off].max()
    scale = np.abs(gram).max()
    acute = bool(max_off <= 1e-12 * scale)

    edges_sq = (
        (coords[:, None, :, :] - coords[:, :, None, :]) ** 2
    ).sum(axis=3)
    longest = np.sqrt(edges_sq.max(axis=(1, 2)))

    # inradius = dim * vol / (sum of facet measures)
    facet_meas = np.zeros(ne)
    from itertools import combinations

    for f in combinations(range(nloc), dim):
        fc = coords[:, list(f), :]
        if dim == 2:
            facet_meas += np.linalg.norm(fc[:, 1] - fc[:, 0], axis=1)
        else:
            cr = np.cross(fc[:, 1] - fc[:, 0], fc[:, 2] - fc[:, 0])
            facet_meas += 0.5 * np.linalg.norm(cr, axis=1)
    inradius = dim * vols / facet_meas

    return {
        "min_volume": float(vols.min()),
        "max_volume": float(vols.max()),
        "total_volume": float(vols.sum()),
        "shape_regularity": float((longest / inradius).max()),
        "max_edge": float(longest.max()),
        "acute": acute,
        "num_vertices": mesh.num_vertices,
        "num_elements": mesh.num_elements,
    }


def write_mesh(mesh: SimplicialMesh, path):
    """Store vertices, elements, boundary flags, and the domain descriptor
    as an uncompressed npz archive."""
    extra = {}
    if isinstance(mesh.domain, Ball):
        extra["domain_kind"] = np.array("ball")
        extra["domain_a"] = np.asarray(mesh.domain.center, dtype=float)
        extra["domain_b"] = np.array([mesh.domain.radius], dtype=float)
    elif isinstance(mesh.domain, Box):
        extra["domain_kind"] = np.array("box")
        extra["domain_a"] = np.asarray(mesh.domain.lo, dtype=float)
        extra["domain_b"] = np.asarray(mesh.domain.hi, dtype=float)
    np.savez(
        path,
        dim=np.array([mesh.dim]),
        vertices=mesh.vertices,
        elements=mesh.elements,
        boundary=mesh.boundary,
        **extra,
    )


def read_mesh(path) -> SimplicialMesh:
    with np.load(path, allow_pickle=False) as data:
        dim = int(data["dim"][0])
        vertices = np.array(data["vertices"], dtype=float)
        elements = np.array(data["elements"], dtype=np.int64)
        boundary = np.array(data["boundary"], dtype=bool)
        domain = None
        if "domain_kind" in data:
            kind = str(data["domain_kind"])
            if kind == "ball":
                domain = Ball(
                    center=tuple(float(c) for c in data["domain_a"]),
                    radius=float(data["domain_b"][0]),
                )
            else:
                domain = Box(
                    lo=tuple(float(c) for c in data["domain_a"]),
                    hi=tuple(float(c) for c in data["domain_b"]),
                )
    return SimplicialMesh(
        dim=dim, vertices=vertices, elements=elements, boundary=boundary, domain=domain
    )
