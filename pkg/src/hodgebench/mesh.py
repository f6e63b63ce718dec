"""Simplicial meshes of the unit square and cube, plus an MSH reader.

Every simplex is stored with strictly increasing vertex indices and every
subsimplex table is deduplicated and sorted lexicographically.  All signs in
the coboundary matrices derive from this single global ordering, which is
what makes d d = 0 hold in exact integer arithmetic with no per-element
orientation bookkeeping.
"""

from __future__ import annotations

import io
from itertools import combinations, permutations
from math import factorial

import numpy as np

from .errors import MeshParseError


class SimplicialMesh:
    """Immutable simplicial mesh of a polyhedral domain in R^2 or R^3.

    Parameters
    ----------
    dim : spatial dimension, 2 or 3.
    vertices : (V, dim) array of coordinates.  Every vertex must be
        referenced by at least one cell.
    cells : (C, dim+1) integer array.  Rows are sorted internally, the cell
        list is deduplicated and sorted lexicographically.
    """

    def __init__(self, dim, vertices, cells):
        dim = int(dim)
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        vertices = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64))
        cells = np.asarray(cells, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != dim:
            raise ValueError(f"vertices must have shape (V, {dim})")
        if cells.ndim != 2 or cells.shape[1] != dim + 1:
            raise ValueError(f"cells must have shape (C, {dim + 1})")
        if cells.shape[0] == 0:
            raise ValueError("mesh must contain at least one cell")
        cells = np.sort(cells, axis=1)
        if np.any(cells[:, 1:] == cells[:, :-1]):
            raise ValueError("degenerate cell: repeated vertex index")
        cells = np.unique(cells, axis=0)
        if cells.min() < 0 or cells.max() >= vertices.shape[0]:
            raise ValueError("cell vertex index out of range")
        referenced = np.zeros(vertices.shape[0], dtype=bool)
        referenced[cells.ravel()] = True
        if not referenced.all():
            raise ValueError("mesh contains vertices not referenced by any cell")

        self._dim = dim
        self._vertices = vertices
        self._vertices.setflags(write=False)
        self._cells = cells
        self._cells.setflags(write=False)

        edge_mats = (vertices[cells[:, 1:]]
                     - vertices[cells[:, :1]])          # (C, dim, dim)
        signed = np.linalg.det(edge_mats) / factorial(dim)
        if np.any(signed == 0.0) or not np.all(np.isfinite(signed)):
            raise ValueError("degenerate cell: zero volume")
        self._signed_volumes = signed
        self._signed_volumes.setflags(write=False)

        self._subsimplices = self._build_subsimplex_tables()
        self._face_ids = {}

    def _build_subsimplex_tables(self):
        tables = []
        n = self._dim
        for k in range(n + 1):
            if k == n:
                tables.append(self._cells)
                continue
            combos = list(combinations(range(n + 1), k + 1))
            stacked = np.concatenate([self._cells[:, c] for c in combos], axis=0)
            tables.append(np.unique(stacked, axis=0))
        for t in tables:
            t.setflags(write=False)
        return tables

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self):
        return self._dim

    @property
    def vertices(self):
        return self._vertices

    @property
    def cells(self):
        return self._cells

    @property
    def num_vertices(self):
        return self._vertices.shape[0]

    @property
    def num_cells(self):
        return self._cells.shape[0]

    def subsimplices(self, k):
        """Global table of k-subsimplices: (N_k, k+1), lexicographically sorted."""
        if not 0 <= k <= self._dim:
            raise ValueError(f"subsimplex degree {k} out of range 0..{self._dim}")
        return self._subsimplices[k]

    def num_subsimplices(self, k):
        return self.subsimplices(k).shape[0]

    def subsimplex_index(self, k):
        """Mapping from a k-subsimplex vertex tuple to its global index."""
        table = self.subsimplices(k)
        return {tuple(row): i for i, row in enumerate(table.tolist())}

    def cell_subsimplex_ids(self, k):
        """Global ids of the k-faces of every cell, (C, binom(dim+1, k+1)).

        Columns follow the lexicographic order of local vertex subsets, so
        column j of degree dim-1 is the face opposite to no particular
        vertex; use ``combinations(range(dim+1), k+1)`` to recover the local
        pattern.
        """
        if k not in self._face_ids:
            lookup = self.subsimplex_index(k)
            combos = list(combinations(range(self._dim + 1), k + 1))
            out = np.empty((self.num_cells, len(combos)), dtype=np.int64)
            cells = self._cells.tolist()
            for ci, cell in enumerate(cells):
                for fi, combo in enumerate(combos):
                    out[ci, fi] = lookup[tuple(cell[j] for j in combo)]
            out.setflags(write=False)
            self._face_ids[k] = out
        return self._face_ids[k]

    def signed_cell_volumes(self):
        """Signed volumes w.r.t. the increasing-index vertex order."""
        return self._signed_volumes

    def cell_volumes(self):
        return np.abs(self._signed_volumes)

    def __repr__(self):
        return (f"<SimplicialMesh dim={self._dim} V={self.num_vertices} "
                f"C={self.num_cells}>")


def build_structured_mesh(dim, cells_per_axis):
    """Deterministic structured mesh of the unit square or cube.

    The square is split into 2 m^2 triangles by one diagonal per grid cell;
    the cube into 6 m^3 tetrahedra by the Kuhn (Freudenthal) subdivision.
    """
    m = int(cells_per_axis)
    if m < 1:
        raise ValueError(f"cells_per_axis must be >= 1, got {cells_per_axis}")
    if dim == 2:
        side = m + 1
        xs = np.arange(side) / m
        xx, yy = np.meshgrid(xs, xs, indexing="xy")
        vertices = np.column_stack([xx.ravel(), yy.ravel()])
        i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
        a = (j * side + i).ravel()
        b = a + 1
        c = a + side
        d = c + 1
        cells = np.concatenate([
            np.column_stack([a, b, d]),
            np.column_stack([a, c, d]),
        ], axis=0)
        return SimplicialMesh(2, vertices, cells)
    if dim == 3:
        side = m + 1
        xs = np.arange(side) / m
        grid = np.arange(side)
        kk, jj, ii = np.meshgrid(grid, grid, grid, indexing="ij")
        vertices = np.column_stack([xs[ii.ravel()], xs[jj.ravel()], xs[kk.ravel()]])

        def vid(ix, iy, iz):
            return (iz * side + iy) * side + ix

        base = np.arange(m)
        bz, by, bx = np.meshgrid(base, base, base, indexing="ij")
        bx, by, bz = bx.ravel(), by.ravel(), bz.ravel()
        cells = []
        steps = np.eye(3, dtype=np.int64)
        for perm in permutations(range(3)):
            p0 = np.stack([bx, by, bz], axis=1)
            p1 = p0 + steps[perm[0]]
            p2 = p1 + steps[perm[1]]
            p3 = p2 + steps[perm[2]]
            tet = np.stack([
                vid(p[:, 0], p[:, 1], p[:, 2]) for p in (p0, p1, p2, p3)
            ], axis=1)
            cells.append(tet)
        return SimplicialMesh(3, vertices, np.concatenate(cells, axis=0))
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def mesh_size(mesh):
    """Largest cell diameter, i.e. the longest edge in the mesh."""
    edges = mesh.subsimplices(1)
    vec = mesh.vertices[edges[:, 1]] - mesh.vertices[edges[:, 0]]
    return float(np.sqrt((vec * vec).sum(axis=1).max()))


# -- MSH reading -------------------------------------------------------------

_SKIPPABLE_SECTIONS = {
    "PhysicalNames", "Entities", "PartitionedEntities", "Periodic",
    "GhostElements", "Parametrizations", "NodeData", "ElementData",
    "ElementNodeData", "InterpolationScheme", "Comments",
}

_TRIANGLE_TYPE = 2
_TET_TYPE = 4


class _LineReader:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def next(self, context):
        if self.pos >= len(self.lines):
            raise MeshParseError(f"unexpected end of file while reading {context}",
                                 lineno=len(self.lines), line="<eof>")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    @property
    def lineno(self):
        return self.pos

    def error(self, message, line=None):
        raise MeshParseError(message, lineno=self.pos, line=line)


def _floats(tokens, reader, line):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        reader.error("malformed numeric field", line=line)


def _ints(tokens, reader, line):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        reader.error("malformed integer field", line=line)


def read_gmsh(stream):
    """Parse an ASCII MSH 2.2 or 4.1 stream into a SimplicialMesh.

    Only first-order simplices of the top dimension present in the file are
    kept; lower-dimensional and unsupported element types are skipped.
    Nodes are renumbered densely in order of ascending tag and unreferenced
    nodes are dropped.
    """
    if isinstance(stream, (bytes, bytearray)):
        raw = bytes(stream)
    elif hasattr(stream, "read"):
        raw = stream.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    else:
        raise TypeError("read_gmsh expects bytes or a readable binary stream")
    text = raw.decode("utf-8", errors="replace")
    lines = [ln.rstrip("\r\n") for ln in io.StringIO(text)]
    reader = _LineReader(lines)

    version = None
    nodes = {}
    triangles = []
    tets = []
    saw_elements = False
    elements_lineno = None

    while reader.pos < len(reader.lines):
        line = reader.next("section header")
        if not line.strip():
            continue
        header = line.strip()
        if not header.startswith("$"):
            reader.error("expected a section header", line=line)
        name = header[1:]
        if name.startswith("End"):
            reader.error("unmatched section end marker", line=line)
        if name == "MeshFormat":
            fmt = reader.next("$MeshFormat").split()
            if len(fmt) != 3:
                reader.error("malformed $MeshFormat record", line=" ".join(fmt))
            version = fmt[0]
            if version not in ("2.2", "4.1"):
                reader.error(f"unsupported MSH version {version}",
                             line=" ".join(fmt))
            if fmt[1] != "0":
                reader.error("binary MSH files are not supported",
                             line=" ".join(fmt))
            _expect_end(reader, "MeshFormat")
        elif name == "Nodes":
            if version is None:
                reader.error("$Nodes before $MeshFormat", line=line)
            if version == "2.2":
                _read_nodes_v2(reader, nodes)
            else:
                _read_nodes_v4(reader, nodes)
        elif name == "Elements":
            if version is None:
                reader.error("$Elements before $MeshFormat", line=line)
            saw_elements = True
            elements_lineno = reader.lineno
            if version == "2.2":
                _read_elements_v2(reader, triangles, tets)
            else:
                _read_elements_v4(reader, triangles, tets)
        elif name in _SKIPPABLE_SECTIONS:
            _skip_section(reader, name)
        else:
            reader.error(f"unknown section header ${name}", line=line)

    if version is None:
        raise MeshParseError("missing $MeshFormat section", lineno=0,
                             line="<empty stream>")
    if tets:
        dim, cells = 3, tets
    elif triangles:
        dim, cells = 2, triangles
    else:
        raise MeshParseError(
            "no top-dimensional elements found",
            lineno=elements_lineno if saw_elements else len(lines),
            line="$Elements" if saw_elements else "<eof>")

    used = sorted({tag for cell in cells for tag in cell})
    missing = [t for t in used if t not in nodes]
    if missing:
        raise MeshParseError(f"element references unknown node tag {missing[0]}",
                             lineno=len(lines), line="<elements>")
    renum = {tag: i for i, tag in enumerate(used)}
    coords = np.array([nodes[tag][:dim] for tag in used])
    cell_array = np.array([[renum[t] for t in cell] for cell in cells],
                          dtype=np.int64)
    return SimplicialMesh(dim, coords, cell_array)


def _expect_end(reader, name):
    line = reader.next(f"$End{name}")
    if line.strip() != f"$End{name}":
        reader.error(f"expected $End{name}", line=line)


def _skip_section(reader, name):
    end = f"$End{name}"
    while True:
        line = reader.next(end)
        if line.strip() == end:
            return


def _read_nodes_v2(reader, nodes):
    count_line = reader.next("$Nodes count")
    (count,) = _ints(count_line.split(), reader, count_line)
    for _ in range(count):
        line = reader.next("node record")
        tokens = line.split()
        if len(tokens) < 4:
            reader.error("node record needs tag and three coordinates", line=line)
        (tag,) = _ints(tokens[:1], reader, line)
        nodes[tag] = _floats(tokens[1:4], reader, line)
    _expect_end(reader, "Nodes")


def _read_nodes_v4(reader, nodes):
    head = reader.next("$Nodes header")
    fields = _ints(head.split(), reader, head)
    if len(fields) != 4:
        reader.error("malformed $Nodes header", line=head)
    num_blocks = fields[0]
    for _ in range(num_blocks):
        block = reader.next("node block header")
        bf = _ints(block.split(), reader, block)
        if len(bf) != 4:
            reader.error("malformed node block header", line=block)
        _, _, parametric, block_count = bf
        if parametric != 0:
            reader.error("parametric node blocks are not supported", line=block)
        tags = []
        for _ in range(block_count):
            line = reader.next("node tag")
            (tag,) = _ints(line.split(), reader, line)
            tags.append(tag)
        for tag in tags:
            line = reader.next("node coordinates")
            xyz = _floats(line.split(), reader, line)
            if len(xyz) < 3:
                reader.error("node coordinates need three components", line=line)
            nodes[tag] = xyz[:3]
    _expect_end(reader, "Nodes")


def _read_elements_v2(reader, triangles, tets):
    count_line = reader.next("$Elements count")
    (count,) = _ints(count_line.split(), reader, count_line)
    for _ in range(count):
        line = reader.next("element record")
        fields = _ints(line.split(), reader, line)
        if len(fields) < 3:
            reader.error("malformed element record", line=line)
        etype, ntags = fields[1], fields[2]
        node_tags = fields[3 + ntags:]
        _collect_element(etype, node_tags, triangles, tets, reader, line)
    _expect_end(reader, "Elements")


def _read_elements_v4(reader, triangles, tets):
    head = reader.next("$Elements header")
    fields = _ints(head.split(), reader, head)
    if len(fields) != 4:
        reader.error("malformed $Elements header", line=head)
    num_blocks = fields[0]
    for _ in range(num_blocks):
        block = reader.next("element block header")
        bf = _ints(block.split(), reader, block)
        if len(bf) != 4:
            reader.error("malformed element block header", line=block)
        _, _, etype, block_count = bf
        for _ in range(block_count):
            line = reader.next("element record")
            fields = _ints(line.split(), reader, line)
            _collect_element(etype, fields[1:], triangles, tets, reader, line)
    _expect_end(reader, "Elements")


def _collect_element(etype, node_tags, triangles, tets, reader, line):
    if etype == _TRIANGLE_TYPE:
        if len(node_tags) != 3:
            reader.error("triangle needs exactly three nodes", line=line)
        triangles.append(tuple(node_tags))
    elif etype == _TET_TYPE:
        if len(node_tags) != 4:
            reader.error("tetrahedron needs exactly four nodes", line=line)
        tets.append(tuple(node_tags))
    # everything else (points, lines, quads, higher order, ...) is skipped
