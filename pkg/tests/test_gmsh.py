import io

import numpy as np
import pytest

from hodgebench import MeshParseError, build_structured_mesh, read_gmsh

MSH22_TWO_TRIANGLES = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 0 1 0
4 1 1 0
$EndNodes
$Elements
2
1 2 2 0 1 1 2 4
2 2 2 0 1 1 4 3
$EndElements
"""

MSH41_TWO_TRIANGLES = """$MeshFormat
4.1 0 8
$EndMeshFormat
$Entities
0 0 1 0
1 0 0 1 1 0 0 0
$EndEntities
$Nodes
1 4 1 4
2 1 0 4
1
2
3
4
0 0 0
1 0 0
0 1 0
1 1 0
$EndNodes
$Elements
1 2 1 2
2 1 2 2
1 1 2 4
2 1 4 3
$EndElements
"""


def _canonical(mesh):
    """Geometry signature invariant under vertex renumbering."""
    coords = np.round(mesh.vertices, 12)
    cells = sorted(
        tuple(sorted(map(tuple, coords[list(cell)]))) for cell in mesh.cells
    )
    return cells


def test_msh22_matches_structured_mesh_up_to_permutation():
    mesh = read_gmsh(MSH22_TWO_TRIANGLES.encode())
    assert mesh.dim == 2
    assert mesh.num_vertices == 4
    assert mesh.num_cells == 2
    assert _canonical(mesh) == _canonical(build_structured_mesh(2, 1))


def test_msh41_matches_msh22():
    mesh = read_gmsh(io.BytesIO(MSH41_TWO_TRIANGLES.encode()))
    assert mesh.num_vertices == 4
    assert mesh.num_cells == 2
    assert _canonical(mesh) == _canonical(read_gmsh(MSH22_TWO_TRIANGLES.encode()))


def test_empty_stream_is_a_parse_error():
    with pytest.raises(MeshParseError):
        read_gmsh(b"")


def test_binary_flag_rejected():
    text = MSH22_TWO_TRIANGLES.replace("2.2 0 8", "2.2 1 8")
    with pytest.raises(MeshParseError, match="binary"):
        read_gmsh(text.encode())


def test_unknown_section_names_line():
    text = MSH22_TWO_TRIANGLES + "$Bogus\n1\n$EndBogus\n"
    with pytest.raises(MeshParseError, match=r"unknown section.*line"):
        read_gmsh(text.encode())


def test_unsupported_version_rejected():
    text = MSH22_TWO_TRIANGLES.replace("2.2 0 8", "3.0 0 8")
    with pytest.raises(MeshParseError):
        read_gmsh(text.encode())


def test_no_top_dimensional_elements():
    text = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
2
1 0 0 0
2 1 0 0
$EndNodes
$Elements
1
1 1 2 0 1 1 2
$EndElements
"""
    with pytest.raises(MeshParseError, match="top-dimensional"):
        read_gmsh(text.encode())


def test_lower_dimensional_elements_skipped():
    text = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 0 1 0
4 1 1 0
$EndNodes
$Elements
5
1 15 2 0 1 1
2 1 2 0 1 1 2
3 1 2 0 1 2 4
4 2 2 0 1 1 2 4
5 2 2 0 1 1 4 3
$EndElements
"""
    mesh = read_gmsh(text.encode())
    assert mesh.dim == 2
    assert mesh.num_cells == 2


def test_tets_take_precedence_over_surface_triangles():
    text = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
10 0 0 0
20 1 0 0
30 0 1 0
40 0 0 1
$EndNodes
$Elements
2
1 2 2 0 1 10 20 30
2 4 2 0 1 10 20 30 40
$EndElements
"""
    mesh = read_gmsh(text.encode())
    assert mesh.dim == 3
    assert mesh.num_cells == 1
    assert mesh.num_vertices == 4


def test_unreferenced_nodes_dropped_and_tags_renumbered_densely():
    text = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
5
7 0 0 0
3 1 0 0
99 0 1 0
12 5 5 0
50 1 1 0
$EndNodes
$Elements
2
1 2 2 0 1 7 3 50
2 2 2 0 1 7 50 99
$EndElements
"""
    mesh = read_gmsh(text.encode())
    assert mesh.num_vertices == 4
    assert mesh.num_cells == 2
    assert not np.any(np.all(mesh.vertices == [5.0, 5.0], axis=1))


def test_truncated_section_is_a_parse_error():
    text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n"
    with pytest.raises(MeshParseError, match="end of file"):
        read_gmsh(text.encode())
