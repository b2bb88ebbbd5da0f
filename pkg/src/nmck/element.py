"""Reference cells, Lagrange DoF layouts, and cone-relative orientations.

DoFs on an entity are laid out relative to the entity's cone, never to
global numbers, because cone order is the one thing preserved across
distribution and reload.  Concretely, every entity gets an ordered vertex
list derived from its cone (an edge's cone *is* its vertex pair; for a
triangle or tetrahedron, position ``i`` holds the vertex opposite cone
member ``i``), and nodes are the equispaced barycentric lattice over that
vertex list, enumerated in descending lexicographic order of the lattice
exponents.

An *orientation* is the integer-encoded symmetry relating a mesh entity's
cone order to a reference entity's: edges have two (0 means the orders
agree, 1 means reversed), triangles have six, encoded ``o = r + 3*s``
with rotation ``r`` in {0,1,2} applied after reflection ``s`` in {0,1}.
Each orientation induces a permutation of the entity's DoF slots.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import (
    NoDofsOnEntity,
    NotAPermutation,
    UnsupportedElement,
)
from .plex import Plex, build_interval_plex, build_tet_plex, build_triangle_plex

__all__ = [
    "ReferenceCell",
    "LagrangeElement",
    "reference_cell",
    "entity_orientation",
    "orientation_compose",
    "dof_permutation",
    "lattice_tuples",
    "cone_vertex_order",
    "entity_node_coords",
    "interpolate",
]


# Vertex-index permutations for each encoded orientation; tau[j] gives the
# image position of reference vertex j.
_EDGE_TAU = {0: (0, 1), 1: (1, 0)}
_TRI_ROT = {0: (0, 1, 2), 1: (1, 2, 0), 2: (2, 0, 1)}
_TRI_REFL = (0, 2, 1)


def _tri_tau(o: int) -> tuple[int, int, int]:
    r, s = o % 3, o // 3
    base = _TRI_REFL if s else (0, 1, 2)
    rot = _TRI_ROT[r]
    return tuple(rot[base[j]] for j in range(3))


def _encode_tau(tau) -> int:
    if len(tau) == 2:
        return 0 if tau == (0, 1) else 1
    if tau in (_TRI_ROT[0], _TRI_ROT[1], _TRI_ROT[2]):
        return tau[0]
    return tau[0] + 3


def entity_orientation(mesh_cone, ref_cone_image) -> int:
    """Orientation carrying the reference cone order to the mesh cone order.

    Both arguments are orderings of the same id set, of length 2 (edges)
    or 3 (triangles); the result is 0 exactly when they agree.
    """
    mesh_cone = tuple(mesh_cone)
    ref_cone_image = tuple(ref_cone_image)
    if len(mesh_cone) not in (2, 3) or len(mesh_cone) != len(ref_cone_image):
        raise NotAPermutation(
            f"cone lengths {len(mesh_cone)} and {len(ref_cone_image)} unsupported"
        )
    if (
        len(set(mesh_cone)) != len(mesh_cone)
        or set(mesh_cone) != set(ref_cone_image)
    ):
        raise NotAPermutation(
            f"{mesh_cone} and {ref_cone_image} are not orderings of one id set"
        )
    tau = tuple(mesh_cone.index(x) for x in ref_cone_image)
    return _encode_tau(tau)


def _decode_tau(entity_dim: int, o: int):
    if entity_dim == 0:
        if o != 0:
            raise ValueError(f"vertices admit only orientation 0, got {o}")
        return (0,)
    if entity_dim == 1:
        if o not in _EDGE_TAU:
            raise ValueError(f"edge orientation must be 0 or 1, got {o}")
        return _EDGE_TAU[o]
    if entity_dim == 2:
        if not 0 <= o < 6:
            raise ValueError(f"triangle orientation must be in 0..5, got {o}")
        return _tri_tau(o)
    raise UnsupportedElement(f"no orientation encoding for dimension {entity_dim}")


def orientation_compose(entity_dim: int, o1: int, o2: int) -> int:
    """Group product of two orientations (apply ``o2``, then ``o1``)."""
    t1 = _decode_tau(entity_dim, o1)
    t2 = _decode_tau(entity_dim, o2)
    return _encode_tau(tuple(t1[t2[j]] for j in range(len(t1))))


def lattice_tuples(nverts: int, degree: int, interior: bool) -> list[tuple[int, ...]]:
    """Barycentric exponent tuples summing to ``degree`` over ``nverts``
    vertices, each entry at least 1 for interior lattices, in descending
    lexicographic order."""
    floor = 1 if interior else 0
    free = degree - floor * nverts
    if free < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(nverts), free):
        t = [floor] * nverts
        for j in combo:
            t[j] += 1
        out.append(tuple(t))
    out.sort(reverse=True)
    return out


@dataclass(frozen=True)
class LagrangeElement:
    """Continuous (P) or discontinuous (DP) Lagrange element of degree 0..4.

    P attaches one DoF to each vertex and the interior lattice to every
    higher entity; DP piles the full lattice onto the cells.
    """

    family: str
    degree: int

    def __post_init__(self):
        if self.family not in ("P", "DP"):
            raise UnsupportedElement(f"unknown element family {self.family!r}")
        if not 0 <= self.degree <= 4:
            raise UnsupportedElement(f"degree {self.degree} out of supported range 0..4")
        if self.family == "P" and self.degree < 1:
            raise UnsupportedElement("continuous Lagrange needs degree >= 1")

    def entity_dof_count(self, entity_dim: int, cell_dim: int) -> int:
        if self.family == "DP":
            if entity_dim != cell_dim:
                return 0
            return len(lattice_tuples(cell_dim + 1, self.degree, interior=False))
        return len(lattice_tuples(entity_dim + 1, self.degree, interior=True))

    def dofs_per_dim(self, cell_dim: int) -> dict[int, int]:
        return {d: self.entity_dof_count(d, cell_dim) for d in range(cell_dim + 1)}

    def entity_lattice(self, entity_dim: int, cell_dim: int) -> list[tuple[int, ...]]:
        if self.family == "DP":
            if entity_dim != cell_dim:
                return []
            return lattice_tuples(cell_dim + 1, self.degree, interior=False)
        return lattice_tuples(entity_dim + 1, self.degree, interior=True)

    def tag(self) -> str:
        return f"{self.family}{self.degree}"

    @classmethod
    def from_tag(cls, tag: str) -> "LagrangeElement":
        fam = "DP" if tag.startswith("DP") else "P"
        return cls(fam, int(tag[len(fam):]))


def dof_permutation(el: LagrangeElement, entity_dim: int, o: int) -> tuple[int, ...]:
    """Permutation sending reference DoF slot ``i`` to physical slot
    ``pi[i]`` within one entity's contiguous chunk, for orientation ``o``.

    For DP the entity is the cell itself and the permutation acts on the
    full lattice; for P it acts on the entity's interior lattice.
    """
    interior = el.family == "P"
    lattice = lattice_tuples(entity_dim + 1, el.degree, interior=interior)
    if not lattice:
        raise NoDofsOnEntity(
            f"{el.tag()} places no DoFs on dimension-{entity_dim} entities"
        )
    if entity_dim >= 3:
        if len(lattice) == 1:
            return (0,)
        raise UnsupportedElement(
            "permutations for multi-DoF tetrahedron interiors are out of scope"
        )
    tau = _decode_tau(entity_dim, o)
    index = {t: i for i, t in enumerate(lattice)}
    pi = []
    for t in lattice:
        moved = [0] * len(t)
        for j, a in enumerate(t):
            moved[tau[j]] = a
        pi.append(index[tuple(moved)])
    return tuple(pi)


@dataclass(frozen=True)
class ReferenceCell:
    """A canonical cell: its topology plus equispaced unit vertex coordinates."""

    shape: str
    plex: Plex
    vertex_coords: np.ndarray

    @property
    def dim(self) -> int:
        return self.plex.dim

    def cell_point(self) -> int:
        return self.plex.cells()[0]

    def entity_nodes(self, el: LagrangeElement) -> dict[int, list[np.ndarray]]:
        """Reference node coordinates per entity, in chunk order."""
        return {
            p: entity_node_coords(self.plex, self.vertex_coords, p, el)
            for p in range(self.plex.npoints)
            if el.entity_dof_count(self.plex.depth_of[p], self.dim) > 0
        }


def reference_cell(shape: str) -> ReferenceCell:
    if shape == "interval":
        plex = build_interval_plex([(0, 1)], 2)
        coords = np.array([[0.0], [1.0]])
    elif shape == "triangle":
        plex = build_triangle_plex([(0, 1, 2)], 3)
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    elif shape == "tetrahedron":
        plex = build_tet_plex([(0, 1, 2, 3)], 4)
        coords = np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        )
    else:
        raise UnsupportedElement(f"unknown reference shape {shape!r}")
    return ReferenceCell(shape=shape, plex=plex, vertex_coords=coords)


def cone_vertex_order(plex: Plex, point: int) -> tuple[int, ...]:
    """Ordered vertex list of an entity, derived from its cone.

    Vertices order themselves; an edge's cone is already its vertex pair;
    for triangles and tetrahedra, position ``i`` is the vertex opposite
    cone member ``i``.  Because cones survive save/load verbatim, every
    rank that sees the entity derives the same list.
    """
    d = plex.depth_of[point]
    if d == 0:
        return (point,)
    if d == 1:
        return plex.cones[point]
    if d == 2:
        edges = plex.cones[point]
        endpoint_sets = [set(plex.cones[e]) for e in edges]
        allv = set().union(*endpoint_sets)
        if len(allv) != 3 or len(edges) != 3:
            raise UnsupportedElement(f"point {point} is not a triangle")
        return tuple((allv - s).pop() for s in endpoint_sets)
    if d == 3:
        faces = plex.cones[point]
        face_sets = []
        for fpt in faces:
            vs = {v for e in plex.cones[fpt] for v in plex.cones[e]}
            face_sets.append(vs)
        allv = set().union(*face_sets)
        if len(allv) != 4 or len(faces) != 4:
            raise UnsupportedElement(f"point {point} is not a tetrahedron")
        return tuple((allv - s).pop() for s in face_sets)
    raise UnsupportedElement(f"no vertex ordering for depth {d}")


def _vertex_rows(plex: Plex) -> dict[int, int]:
    return {v: i for i, v in enumerate(plex.vertices())}


def entity_node_coords(
    plex: Plex, coords: np.ndarray, point: int, el: LagrangeElement
) -> list[np.ndarray]:
    """Physical node coordinates of one entity's DoF chunk, in chunk order.

    ``coords`` holds one row per vertex in ascending local vertex order.
    Node ``t`` of the lattice sits at ``sum_j t[j]/degree * X[j]`` over the
    cone-ordered vertex list (the centroid for degree 0).
    """
    vrow = _vertex_rows(plex)
    order = cone_vertex_order(plex, point)
    lattice = el.entity_lattice(plex.depth_of[point], plex.dim)
    xs = [coords[vrow[v]] for v in order]
    nodes = []
    for t in lattice:
        acc = np.zeros_like(xs[0])
        for j, a in enumerate(t):
            w = (a / el.degree) if el.degree > 0 else 1.0 / len(xs)
            acc = acc + w * xs[j]
        nodes.append(acc)
    return nodes


def interpolate(
    plex: Plex,
    coords: np.ndarray,
    loc_dof: list[int],
    loc_off: list[int],
    el: LagrangeElement,
    f,
) -> np.ndarray:
    """Fill one rank's DoF vector with ``f`` evaluated at the nodes.

    Node placement follows the cone-relative ordering above, so two ranks
    sharing an entity compute bit-identical chunks for it.
    """
    vrow = _vertex_rows(plex)
    total = sum(loc_dof)
    out = np.zeros(total, dtype=np.float64)
    for p in range(plex.npoints):
        nd = loc_dof[p]
        if nd == 0:
            continue
        order = cone_vertex_order(plex, p)
        lattice = el.entity_lattice(plex.depth_of[p], plex.dim)
        if len(lattice) != nd:
            raise UnsupportedElement(
                f"section assigns {nd} DoFs to a depth-{plex.depth_of[p]} point "
                f"but {el.tag()} provides {len(lattice)}"
            )
        xs = [coords[vrow[v]] for v in order]
        off = loc_off[p]
        for k, t in enumerate(lattice):
            acc = np.zeros_like(xs[0])
            for j, a in enumerate(t):
                w = (a / el.degree) if el.degree > 0 else 1.0 / len(xs)
                acc = acc + w * xs[j]
            out[off + k] = f(acc)
    return out
