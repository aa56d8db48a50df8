"""Simplicial meshes of the unit square/cube.

Meshes are immutable after construction: entity tables (faces, edges,
boundary flags, vertex stars) are built eagerly and all arrays are locked.
Cells are stored with positive signed volume; the constructor swaps the two
last vertices of any negatively oriented cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

_EDGE_PAIRS_3D = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


class Mesh:
    """Conforming simplicial mesh with derived entity tables."""

    def __init__(self, vertices, cells, gamma: float | None = None):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        cells = np.ascontiguousarray(cells, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
            raise ValueError("vertices must have shape (nv, 2) or (nv, 3)")
        dim = vertices.shape[1]
        if cells.ndim != 2 or cells.shape[1] != dim + 1:
            raise ValueError(f"cells must have shape (nc, {dim + 1})")
        if cells.min(initial=0) < 0 or cells.max(initial=-1) >= len(vertices):
            raise ValueError("cell indices out of range")

        self.dim = dim
        self.vertices = vertices
        self.cells = cells
        self._orient()
        self._build_entities()
        self._build_geometry()
        if gamma is not None and self.max_shape_ratio > gamma:
            raise ValueError(
                f"shape regularity violated: max h_K/rho_K = "
                f"{self.max_shape_ratio:.3f} > gamma = {gamma}"
            )
        for arr in (self.vertices, self.cells, self.faces, self.face_cells,
                    self.cell_faces, self.edges, self.volumes,
                    self.h_cells, self.rho_cells, self.shape_ratios,
                    self.vertex_on_boundary, self.boundary_faces,
                    self.boundary_edges, self.edge_on_boundary):
            arr.setflags(write=False)

    # -- construction ------------------------------------------------------

    def _signed_volumes(self, cells):
        v = self.vertices[cells]
        mats = v[:, 1:, :] - v[:, :1, :]
        return np.linalg.det(mats) / math.factorial(self.dim)

    def _orient(self):
        vol = self._signed_volumes(self.cells)
        if np.any(vol == 0):
            bad = int(np.flatnonzero(vol == 0)[0])
            raise ValueError(f"degenerate cell {bad} has zero volume")
        flip = vol < 0
        if np.any(flip):
            c = self.cells.copy()
            c[flip, -2], c[flip, -1] = self.cells[flip, -1], self.cells[flip, -2]
            self.cells = c

    def _build_entities(self):
        nc, d = len(self.cells), self.dim
        # faces: local face i is opposite local vertex i
        local_faces = [[j for j in range(d + 1) if j != i] for i in range(d + 1)]
        all_faces = np.concatenate([self.cells[:, lf] for lf in local_faces])
        keys = np.sort(all_faces, axis=1)
        self.faces, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        self.cell_faces = np.ascontiguousarray(inverse.reshape(d + 1, nc).T)

        counts = np.bincount(inverse, minlength=len(self.faces))
        if counts.max() > 2:
            raise ValueError("non-manifold face: shared by more than 2 cells")
        owners = np.tile(np.arange(nc), d + 1)
        order = np.argsort(inverse, kind="stable")
        sorted_faces, sorted_owners = inverse[order], owners[order]
        is_first = np.ones(len(sorted_faces), dtype=bool)
        is_first[1:] = sorted_faces[1:] != sorted_faces[:-1]
        face_cells = np.full((len(self.faces), 2), -1, dtype=np.int64)
        face_cells[sorted_faces[is_first], 0] = sorted_owners[is_first]
        face_cells[sorted_faces[~is_first], 1] = sorted_owners[~is_first]
        self.face_cells = face_cells
        self.boundary_faces = np.flatnonzero(counts == 1)

        # edges (1-simplices); in 2D edges coincide with faces
        if d == 2:
            self.edges = self.faces
            self.cell_edges = self.cell_faces
            self.boundary_edges = self.boundary_faces
        else:
            all_edges = np.concatenate([self.cells[:, p] for p in _EDGE_PAIRS_3D])
            ekeys = np.sort(all_edges, axis=1)
            self.edges, einv = np.unique(ekeys, axis=0, return_inverse=True)
            self.cell_edges = np.ascontiguousarray(einv.ravel().reshape(6, nc).T)
            bf = self.faces[self.boundary_faces]
            bpairs = np.concatenate([bf[:, [0, 1]], bf[:, [0, 2]], bf[:, [1, 2]]])
            self.boundary_edges = np.unique(self._edge_index(np.sort(bpairs, axis=1)))

        self.vertex_on_boundary = np.zeros(len(self.vertices), dtype=bool)
        self.vertex_on_boundary[self.faces[self.boundary_faces].ravel()] = True
        self.edge_on_boundary = np.zeros(len(self.edges), dtype=bool)
        self.edge_on_boundary[self.boundary_edges] = True

        # vertex -> cells star (CSR layout), ascending cell index per vertex
        flat = self.cells.ravel()
        order = np.argsort(flat, kind="stable")
        cell_ids = np.repeat(np.arange(nc), d + 1)[order]
        counts = np.bincount(flat, minlength=len(self.vertices))
        self._star_offsets = np.concatenate([[0], np.cumsum(counts)])
        self._star_cells = cell_ids

    def _edge_index(self, sorted_pairs):
        # self.edges is lex-sorted, so packed keys are strictly increasing
        nv = len(self.vertices)
        packed = self.edges[:, 0] * (nv + 1) + self.edges[:, 1]
        return np.searchsorted(packed, sorted_pairs[:, 0] * (nv + 1) + sorted_pairs[:, 1])

    def _build_geometry(self):
        self.volumes = self._signed_volumes(self.cells)
        v = self.vertices[self.cells]
        pair_idx = list(itertools.combinations(range(self.dim + 1), 2))
        lengths = np.stack(
            [np.linalg.norm(v[:, a] - v[:, b], axis=1) for a, b in pair_idx],
            axis=1,
        )
        self.h_cells = lengths.max(axis=1)
        self.h = float(self.h_cells.max())
        # rho_K = 2 * inradius = 2 d |K| / (sum of face measures)
        face_meas = np.zeros(len(self.cells))
        for i in range(self.dim + 1):
            fverts = v[:, [j for j in range(self.dim + 1) if j != i], :]
            face_meas += _simplex_measure(fverts)
        self.rho_cells = 2.0 * self.dim * self.volumes / face_meas
        self.shape_ratios = self.h_cells / self.rho_cells
        self.max_shape_ratio = float(self.shape_ratios.max())

    # -- queries -----------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def vertex_star(self, v: int) -> np.ndarray:
        """Cells containing vertex v, ascending cell index."""
        return self._star_cells[self._star_offsets[v]:self._star_offsets[v + 1]]

    def cell_neighbor(self, cell: int, local_face: int) -> int:
        """Cell across local face `local_face` of `cell`, or -1 on the boundary."""
        f = self.cell_faces[cell, local_face]
        a, b = self.face_cells[f]
        return int(b if a == cell else a)

    def boundary_cells(self) -> np.ndarray:
        """Cells owning at least one boundary face, ascending."""
        return np.unique(self.face_cells[self.boundary_faces, 0])


def _simplex_measure(verts):
    """Measure of (k-1)-simplices embedded in R^d, verts shape (n, k, d)."""
    e = verts[:, 1:, :] - verts[:, :1, :]
    gram = np.einsum("nik,njk->nij", e, e)
    k = verts.shape[1] - 1
    return np.sqrt(np.abs(np.linalg.det(gram))) / math.factorial(k)


@dataclass
class BoundaryNodeClass:
    """Flat/sharp labels for boundary vertices.

    A boundary vertex is flat when its incident boundary edges span a
    (d-1)-dimensional space, sharp when they span all of R^d.  Sharp
    vertices carry a full-rank set of d boundary edge directions.
    """

    dim: int
    is_boundary: np.ndarray
    is_sharp: np.ndarray
    sharp_edge_dirs: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def flat_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary & ~self.is_sharp)

    @property
    def sharp_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary & self.is_sharp)


def classify_boundary_nodes(m: Mesh) -> BoundaryNodeClass:
    """Label each boundary vertex flat or sharp from its boundary edge span."""
    d = m.dim
    nbr: dict[int, list[int]] = {}
    for a, b in m.edges[m.boundary_edges]:
        nbr.setdefault(int(a), []).append(int(b))
        nbr.setdefault(int(b), []).append(int(a))

    is_sharp = np.zeros(m.num_vertices, dtype=bool)
    sharp_dirs: dict[int, np.ndarray] = {}
    for v in np.flatnonzero(m.vertex_on_boundary):
        v = int(v)
        dirs = m.vertices[sorted(nbr[v])] - m.vertices[v]
        rank = np.linalg.matrix_rank(dirs, tol=1e-10 * np.abs(dirs).max())
        if rank == d:
            is_sharp[v] = True
            sharp_dirs[v] = _independent_subset(dirs, d)
        elif rank != d - 1:
            raise ValueError(
                f"boundary vertex {v}: boundary edges span rank {rank}, "
                f"expected {d - 1} (flat) or {d} (sharp)"
            )
    return BoundaryNodeClass(d, m.vertex_on_boundary.copy(), is_sharp, sharp_dirs)


def _independent_subset(dirs, d):
    chosen: list[np.ndarray] = []
    tol = 1e-10 * np.abs(dirs).max()
    for row in dirs:
        trial = np.array(chosen + [row])
        if np.linalg.matrix_rank(trial, tol=tol) == len(trial):
            chosen.append(row)
            if len(chosen) == d:
                return np.array(chosen)
    raise ValueError("sharp vertex without d independent boundary edges")


# -- generators -------------------------------------------------------------


def generate_unit_square(n: int) -> Mesh:
    """Structured mesh of (0,1)^2 with 2*n^2 right triangles."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    cells = []
    for j in range(n):
        for i in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            cells.append((v00, v10, v11))
            cells.append((v00, v11, v01))
    return Mesh(vertices, np.array(cells))


_KUHN_PERMS = list(itertools.permutations(range(3)))


def generate_unit_cube(n: int) -> Mesh:
    """Structured mesh of (0,1)^3: n^3 subcubes, 6 tetrahedra each (Kuhn split)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    grid = np.stack(np.meshgrid(xs, xs, xs, indexing="ij"), axis=-1)
    vertices = grid.reshape(-1, 3)

    def vid(p):
        return (p[0] * (n + 1) + p[1]) * (n + 1) + p[2]

    cells = []
    unit = np.eye(3, dtype=int)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                base = np.array([i, j, k])
                for perm in _KUHN_PERMS:
                    path = [base]
                    for ax in perm:
                        path.append(path[-1] + unit[ax])
                    cells.append([vid(p) for p in path])
    return Mesh(vertices, np.array(cells))


def refine_uniform(m: Mesh) -> Mesh:
    """Red refinement: each simplex split into 2^d children via edge midpoints."""
    nv = m.num_vertices
    midpoints = 0.5 * (m.vertices[m.edges[:, 0]] + m.vertices[m.edges[:, 1]])
    vertices = np.vstack([m.vertices, midpoints])
    c = m.cells

    if m.dim == 2:
        # cell_faces column i is the edge opposite local vertex i
        m12 = nv + m.cell_edges[:, 0]
        m02 = nv + m.cell_edges[:, 1]
        m01 = nv + m.cell_edges[:, 2]
        children = np.stack([
            np.column_stack([c[:, 0], m01, m02]),
            np.column_stack([m01, c[:, 1], m12]),
            np.column_stack([m02, m12, c[:, 2]]),
            np.column_stack([m01, m12, m02]),
        ], axis=1)
        return Mesh(vertices, children.reshape(-1, 3))

    ce = nv + m.cell_edges  # columns follow _EDGE_PAIRS_3D
    m01, m02, m03, m12, m13, m23 = (ce[:, i] for i in range(6))
    corner = np.stack([
        np.column_stack([c[:, 0], m01, m02, m03]),
        np.column_stack([m01, c[:, 1], m12, m13]),
        np.column_stack([m02, m12, c[:, 2], m23]),
        np.column_stack([m03, m13, m23, c[:, 3]]),
    ], axis=1)
    # octahedron split along the shortest of its three diagonals; argmin
    # tie-break (first index) keeps the choice deterministic
    diag_pairs = [(m01, m23), (m02, m13), (m03, m12)]
    rings = [(m02, m03, m12, m13), (m01, m03, m12, m23), (m01, m02, m13, m23)]
    dlen = np.stack(
        [np.linalg.norm(vertices[a] - vertices[b], axis=1) for a, b in diag_pairs],
        axis=1,
    )
    pick = np.argmin(np.round(dlen / m.h_cells[:, None], 9), axis=1)
    octa = np.empty((len(c), 4, 4), dtype=np.int64)
    for p in range(3):
        rows = pick == p
        if not np.any(rows):
            continue
        da, db = diag_pairs[p][0][rows], diag_pairs[p][1][rows]
        r0, r1, r2, r3 = (r[rows] for r in rings[p])
        for slot, (ea, eb) in enumerate(((r0, r1), (r1, r3), (r3, r2), (r2, r0))):
            octa[rows, slot] = np.column_stack([da, db, ea, eb])
    children = np.concatenate([corner, octa], axis=1)
    return Mesh(vertices, children.reshape(-1, 4))


# -- text I/O ---------------------------------------------------------------


def write_mesh(m: Mesh, path) -> None:
    """Write the text format: 'dim nv nc' header, vertex lines, cell lines."""
    with open(path, "w") as fh:
        fh.write(f"{m.dim} {m.num_vertices} {m.num_cells}\n")
        for v in m.vertices:
            fh.write(" ".join(f"{x:.17g}" for x in v) + "\n")
        for cell in m.cells:
            fh.write(" ".join(str(int(i)) for i in cell) + "\n")


def read_mesh(path) -> Mesh:
    """Read the text format; negatively oriented cells are fixed by a swap."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: malformed header {header!r}")
        dim, nv, nc = (int(x) for x in header)
        vertices = np.array(
            [[float(x) for x in fh.readline().split()] for _ in range(nv)]
        )
        cells = np.array(
            [[int(x) for x in fh.readline().split()] for _ in range(nc)]
        )
    if vertices.shape != (nv, dim) or cells.shape != (nc, dim + 1):
        raise ValueError(f"{path}: body does not match header")
    return Mesh(vertices, cells)
