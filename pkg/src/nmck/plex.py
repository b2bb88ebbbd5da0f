"""Per-rank mesh topology: a ranked DAG of entities with ordered cones.

An entity (cell, face, edge, vertex) is a *point* with a local number.
The *cone* of a point is the ordered list of the points one dimension
below that are directly attached to it; a vertex's cone is empty.  Cone
order is the semantic payload this whole package exists to preserve: it
is what lets DoFs on a shared or reloaded entity be laid out identically
everywhere.

Local point numbering here is always stratified: cells first, then
vertices, then faces, then edges.  A parallel mesh is a list of these
per-rank topologies plus a point-sharing star forest routing each ghost
point to its unique owner, and (once assigned) a global numbering.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    BadDepth,
    ConeOutOfRange,
    CycleDetected,
    InconsistentSF,
    PointOutOfRange,
)
from .starforest import StarForest, sf_broadcast

__all__ = [
    "Plex",
    "GlobalNumbering",
    "ParallelMesh",
    "plex_validate",
    "plex_support",
    "plex_closure",
    "create_point_numbering",
    "build_interval_plex",
    "build_triangle_plex",
    "build_tet_plex",
    "stratum_order_key",
]


@dataclass(frozen=True)
class Plex:
    """One rank's mesh topology.

    ``depth_of[p]`` is the stratum depth of point ``p`` (vertices 0, cells
    ``dim``); ``cones[p]`` is its ordered cone in local numbers.  Instances
    are immutable and hashable, so derived tables can be cached.
    """

    dim: int
    depth_of: tuple[int, ...]
    cones: tuple[tuple[int, ...], ...]

    @property
    def npoints(self) -> int:
        return len(self.depth_of)

    @property
    def cone_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cones)

    def stratum(self, depth: int) -> tuple[int, ...]:
        return _stratum_table(self)[depth]

    def cells(self) -> tuple[int, ...]:
        return self.stratum(self.dim)

    def vertices(self) -> tuple[int, ...]:
        return self.stratum(0)


@lru_cache(maxsize=None)
def _stratum_table(plex: Plex) -> tuple[tuple[int, ...], ...]:
    table: list[list[int]] = [[] for _ in range(plex.dim + 1)]
    for p, d in enumerate(plex.depth_of):
        table[d].append(p)
    return tuple(tuple(s) for s in table)


@lru_cache(maxsize=None)
def _support_table(plex: Plex) -> tuple[tuple[int, ...], ...]:
    table: list[list[int]] = [[] for _ in range(plex.npoints)]
    for p, cone in enumerate(plex.cones):
        for q in cone:
            table[q].append(p)
    return tuple(tuple(sorted(s)) for s in table)


def stratum_order_key(dim: int, depth: int) -> int:
    """Sort key realizing the stratified point order.

    Cells come first, then vertices, then faces, then edges (intermediate
    dimensions in descending order after the vertices).
    """
    if depth == dim:
        return 0
    if depth == 0:
        return 1
    return 1 + (dim - depth)


def plex_validate(plex: Plex) -> None:
    """Check topology invariants; raise a named error on the first violation.

    Cone members must exist (ConeOutOfRange), the cone relation must be
    acyclic (CycleDetected), and each cone edge must drop exactly one
    stratum (BadDepth, which also forces vertices to have empty cones).
    """
    n = plex.npoints
    if len(plex.cones) != n:
        raise ConeOutOfRange(f"{len(plex.cones)} cones for {n} points")
    for p, cone in enumerate(plex.cones):
        for q in cone:
            if not 0 <= q < n:
                raise ConeOutOfRange(f"point {p}: cone member {q} not in [0, {n})")
    # Depth-first cycle check over the cone relation.
    state = [0] * n  # 0 unvisited, 1 on stack, 2 done
    for start in range(n):
        if state[start]:
            continue
        stack = [(start, iter(plex.cones[start]))]
        state[start] = 1
        while stack:
            p, it = stack[-1]
            advanced = False
            for q in it:
                if state[q] == 1:
                    raise CycleDetected(f"cone cycle through points {p} and {q}")
                if state[q] == 0:
                    state[q] = 1
                    stack.append((q, iter(plex.cones[q])))
                    advanced = True
                    break
            if not advanced:
                state[p] = 2
                stack.pop()
    for p, cone in enumerate(plex.cones):
        d = plex.depth_of[p]
        if not 0 <= d <= plex.dim:
            raise BadDepth(f"point {p}: depth {d} not in [0, {plex.dim}]")
        for q in cone:
            if plex.depth_of[q] != d - 1:
                raise BadDepth(
                    f"point {p} (depth {d}): cone member {q} has depth "
                    f"{plex.depth_of[q]}, expected {d - 1}"
                )


def plex_support(plex: Plex, point: int) -> tuple[int, ...]:
    """All points whose cone contains ``point``, sorted ascending."""
    if not 0 <= point < plex.npoints:
        raise PointOutOfRange(f"point {point} not in [0, {plex.npoints})")
    return _support_table(plex)[point]


def plex_closure(plex: Plex, point: int) -> tuple[int, ...]:
    """Transitive cone closure of ``point``, including the point itself.

    Deterministic order: breadth-first by decreasing depth, cone order
    within a level, duplicates removed keeping the first occurrence.
    """
    if not 0 <= point < plex.npoints:
        raise PointOutOfRange(f"point {point} not in [0, {plex.npoints})")
    out = [point]
    seen = {point}
    frontier = [point]
    while frontier:
        nxt = []
        for p in frontier:
            for q in plex.cones[p]:
                if q not in seen:
                    seen.add(q)
                    out.append(q)
                    nxt.append(q)
        frontier = nxt
    return tuple(out)


@dataclass(frozen=True)
class GlobalNumbering:
    """Assignment of global numbers 0..total-1 to the points of a parallel mesh.

    ``loc_g[r][p]`` is the global number of rank ``r``'s local point ``p``;
    ``owned[r][p]`` says whether rank ``r`` owns that point.  Restricted to
    owned points the numbering is a bijection onto ``{0..total-1}``; ghosts
    carry their owner's number.  ``owned_ranges`` records the contiguous
    per-rank global slices when the numbering was generated rank-by-rank
    (None for numberings inherited from elsewhere).
    """

    loc_g: tuple[tuple[int, ...], ...]
    owned: tuple[tuple[bool, ...], ...]
    total: int
    owned_ranges: tuple[tuple[int, int], ...] | None = None

    @property
    def nranks(self) -> int:
        return len(self.loc_g)

    def owner_of_global(self) -> list[int]:
        """Owning rank per global number."""
        owner = [-1] * self.total
        for r, (globs, flags) in enumerate(zip(self.loc_g, self.owned)):
            for g, is_owned in zip(globs, flags):
                if is_owned:
                    owner[g] = r
        return owner

    def owned_counts(self) -> list[int]:
        return [sum(flags) for flags in self.owned]


@dataclass
class ParallelMesh:
    """Per-rank topologies + point-sharing SF + global point numbering.

    ``point_sf`` has one root slot per local point on every rank and one
    leaf entry per ghost point, routed to the owner's local point.  A point
    is owned exactly when it is not a leaf.
    """

    plexes: list[Plex]
    point_sf: StarForest
    numbering: GlobalNumbering

    @property
    def nranks(self) -> int:
        return len(self.plexes)

    def point_counts(self) -> list[int]:
        return [p.npoints for p in self.plexes]


def ownership_from_sf(npoints: list[int], point_sf: StarForest) -> list[list[bool]]:
    """Owned flags per rank: a point is owned iff it is not a leaf."""
    owned = [[True] * n for n in npoints]
    for r in range(point_sf.nranks):
        for i, _ in point_sf.leaves[r]:
            owned[r][i] = False
    return owned


def create_point_numbering(plexes: list[Plex], point_sf: StarForest) -> GlobalNumbering:
    """Assign global numbers: rank 0's owned points get 0..k0-1 in local
    order, rank 1 continues, and so on; ghosts inherit their owner's number
    through a broadcast over the point-sharing SF.
    """
    npoints = [p.npoints for p in plexes]
    owned = ownership_from_sf(npoints, point_sf)
    counts = [sum(flags) for flags in owned]
    offsets = [0]
    for c in counts:
        offsets.append(offsets[-1] + c)
    total = offsets[-1]

    root_data: list[list[int]] = []
    for r, flags in enumerate(owned):
        nums = [-1] * npoints[r]
        g = offsets[r]
        for p, is_owned in enumerate(flags):
            if is_owned:
                nums[p] = g
                g += 1
        root_data.append(nums)

    ghost_vals = sf_broadcast(point_sf, root_data)
    loc_g = [list(nums) for nums in root_data]
    for r in range(len(plexes)):
        for i, val in enumerate(ghost_vals[r]):
            if val is None:
                continue
            if val < 0:
                raise InconsistentSF(
                    f"rank {r}, point {i}: owner slot is itself a ghost"
                )
            loc_g[r][i] = val

    return GlobalNumbering(
        loc_g=tuple(tuple(g) for g in loc_g),
        owned=tuple(tuple(flags) for flags in owned),
        total=total,
        owned_ranges=tuple((offsets[r], offsets[r + 1]) for r in range(len(plexes))),
    )


# --- deterministic builders from cell-vertex lists -------------------------
#
# All meshes are fully interpolated: every intermediate entity is created
# explicitly.  Intermediate entities are numbered in sorted order of their
# vertex tuples, which makes the builders independent of cell input order
# for the entity id assignment.

def build_interval_plex(cells: list[tuple[int, int]], nvertices: int) -> Plex:
    """1D mesh: cells are (left vertex, right vertex) pairs of vertex ids."""
    nc = len(cells)
    voff = nc
    depth_of = [1] * nc + [0] * nvertices
    cones: list[tuple[int, ...]] = [
        (voff + a, voff + b) for (a, b) in cells
    ] + [()] * nvertices
    return Plex(dim=1, depth_of=tuple(depth_of), cones=tuple(cones))


def _edge_ids(pairs: list[tuple[int, int]], offset: int) -> dict[tuple[int, int], int]:
    uniq = sorted(set(pairs))
    return {pair: offset + k for k, pair in enumerate(uniq)}


def build_triangle_plex(cells: list[tuple[int, int, int]], nvertices: int) -> Plex:
    """2D triangle mesh from cell-vertex triples.

    Cell cones list the edge opposite each cell vertex, in cell vertex
    order; edge cones run from the lower-numbered vertex to the higher.
    """
    nc = len(cells)
    voff = nc
    eoff = nc + nvertices
    pairs = []
    for a, b, c in cells:
        pairs += [tuple(sorted((b, c))), tuple(sorted((a, c))), tuple(sorted((a, b)))]
    edge_id = _edge_ids(pairs, eoff)

    depth_of = [2] * nc + [0] * nvertices + [1] * len(edge_id)
    cones: list[tuple[int, ...]] = []
    for a, b, c in cells:
        cones.append(
            (
                edge_id[tuple(sorted((b, c)))],
                edge_id[tuple(sorted((a, c)))],
                edge_id[tuple(sorted((a, b)))],
            )
        )
    cones += [()] * nvertices
    for (u, v), _ in sorted(edge_id.items(), key=lambda kv: kv[1]):
        cones.append((voff + u, voff + v))
    return Plex(dim=2, depth_of=tuple(depth_of), cones=tuple(cones))


def build_tet_plex(cells: list[tuple[int, int, int, int]], nvertices: int) -> Plex:
    """3D tetrahedral mesh from cell-vertex quadruples.

    Cell cones list the face opposite each cell vertex; face cones list the
    edge opposite each face vertex with the face's vertices taken in sorted
    order; edge cones run low vertex to high vertex.
    """
    nc = len(cells)
    voff = nc

    triples = []
    for a, b, c, d in cells:
        triples += [
            tuple(sorted((b, c, d))),
            tuple(sorted((a, c, d))),
            tuple(sorted((a, b, d))),
            tuple(sorted((a, b, c))),
        ]
    uniq_faces = sorted(set(triples))
    foff = nc + nvertices
    face_id = {t: foff + k for k, t in enumerate(uniq_faces)}

    pairs = []
    for x, y, z in uniq_faces:
        pairs += [(y, z), (x, z), (x, y)]
    eoff = foff + len(uniq_faces)
    edge_id = _edge_ids(pairs, eoff)

    depth_of = [3] * nc + [0] * nvertices + [2] * len(uniq_faces) + [1] * len(edge_id)
    cones: list[tuple[int, ...]] = []
    for a, b, c, d in cells:
        cones.append(
            (
                face_id[tuple(sorted((b, c, d)))],
                face_id[tuple(sorted((a, c, d)))],
                face_id[tuple(sorted((a, b, d)))],
                face_id[tuple(sorted((a, b, c)))],
            )
        )
    cones += [()] * nvertices
    for x, y, z in uniq_faces:
        cones.append((edge_id[(y, z)], edge_id[(x, z)], edge_id[(x, y)]))
    for (u, v), _ in sorted(edge_id.items(), key=lambda kv: kv[1]):
        cones.append((voff + u, voff + v))
    return Plex(dim=3, depth_of=tuple(depth_of), cones=tuple(cones))
