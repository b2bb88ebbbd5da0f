"""Load-side mesh distribution in three steps.

Saved topology arrives as a table of cones written in global numbers.
Reconstructing a parallel mesh on M ranks proceeds as

1. a naive split: cells are dealt to ranks in balanced, contiguous chunks
   and every rank instantiates the closure of its cells;
2. a repartition driven by a deterministic partition plan, migrating cells
   (with closure) to their target ranks;
3. overlap growth, adding rings of facet-adjacent neighbor cells past each
   process boundary.

Each step emits the star forest that maps its local points back to the
previous stage (the first stage maps to the balanced chunk slots of the
global number space), so composing the three gives the single map from
final local points to loaded-array slots that the function-space loaders
need.  Cone order is preserved verbatim through every step.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from heapq import heappop, heappush

from .errors import DanglingCone, PlanMismatch, TooFewCells, ZeroRanks
from .plex import GlobalNumbering, ParallelMesh, Plex, stratum_order_key
from .starforest import StarForest

__all__ = [
    "TopologyTable",
    "PartitionPlan",
    "balanced_chunks",
    "chunk_offsets",
    "chunk_slot",
    "naive_topology_split",
    "greedy_bfs_partition",
    "repartition",
    "add_overlap",
    "cell_neighbors",
]


def balanced_chunks(total: int, nranks: int) -> list[int]:
    """Split ``total`` items into ``nranks`` chunk sizes differing by at most
    one, larger chunks first."""
    if nranks < 1:
        raise ZeroRanks("cannot split over zero ranks")
    base, rem = divmod(total, nranks)
    return [base + 1] * rem + [base] * (nranks - rem)


def chunk_offsets(sizes: list[int]) -> list[int]:
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)
    return offs


def chunk_slot(offsets: list[int], index: int) -> tuple[int, int]:
    """(rank, local slot) of a global index under a chunked partition."""
    r = bisect_right(offsets, index) - 1
    return r, index - offsets[r]


@dataclass(frozen=True)
class TopologyTable:
    """Whole-mesh cone data keyed by global number.

    ``cones[g]`` is the ordered cone of entity ``g`` in global numbers and
    ``depths[g]`` its stratum depth.  This is exactly what the checkpoint
    stores for a mesh topology.
    """

    dim: int
    depths: tuple[int, ...]
    cones: tuple[tuple[int, ...], ...]

    @property
    def npoints(self) -> int:
        return len(self.depths)

    def cells(self) -> list[int]:
        return [g for g, d in enumerate(self.depths) if d == self.dim]

    @classmethod
    def from_serial_plex(cls, plex: Plex) -> "TopologyTable":
        return cls(dim=plex.dim, depths=plex.depth_of, cones=plex.cones)

    @classmethod
    def from_parallel(cls, mesh: ParallelMesh) -> "TopologyTable":
        """Glue per-rank cones (translated to global numbers) into one table."""
        total = mesh.numbering.total
        depths: list[int] = [-1] * total
        cones: list[tuple[int, ...] | None] = [None] * total
        for plex, globs in zip(mesh.plexes, mesh.numbering.loc_g):
            for p in range(plex.npoints):
                g = globs[p]
                depths[g] = plex.depth_of[p]
                cones[g] = tuple(globs[q] for q in plex.cones[p])
        if any(c is None for c in cones):
            missing = next(g for g, c in enumerate(cones) if c is None)
            raise DanglingCone(f"no rank provides global point {missing}")
        return cls(dim=mesh.plexes[0].dim, depths=tuple(depths), cones=tuple(cones))

    def closure(self, point: int) -> list[int]:
        out = [point]
        seen = {point}
        frontier = [point]
        while frontier:
            nxt = []
            for g in frontier:
                for q in self.cones[g]:
                    if q not in seen:
                        seen.add(q)
                        out.append(q)
                        nxt.append(q)
            frontier = nxt
        return out

    def validate_cones(self) -> None:
        n = self.npoints
        for g, cone in enumerate(self.cones):
            for q in cone:
                if not 0 <= q < n:
                    raise DanglingCone(
                        f"cone of global point {g} references absent number {q}"
                    )


@dataclass(frozen=True)
class PartitionPlan:
    """Assignment of cells (by global number) to ranks."""

    cells: tuple[tuple[int, ...], ...]
    method: str = "explicit"

    @property
    def nranks(self) -> int:
        return len(self.cells)

    def validate_against(self, all_cells) -> None:
        assigned: list[int] = []
        for part in self.cells:
            assigned.extend(part)
        if sorted(assigned) != sorted(all_cells):
            raise PlanMismatch(
                f"plan covers {len(assigned)} cells, mesh has {len(list(all_cells))}"
            )


def _local_mesh(table: TopologyTable, point_sets: list[list[int]],
                owner: list[int]) -> ParallelMesh:
    """Instantiate per-rank topologies for the given global point sets.

    Local numbering is stratified (cells, vertices, faces, edges) with
    ascending global numbers inside each stratum; cones are relabeled to
    local numbers preserving order.  Ghosts are routed to their owner.
    """
    nranks = len(point_sets)
    loc_g: list[list[int]] = []
    glob2loc: list[dict[int, int]] = []
    plexes: list[Plex] = []
    for pts in point_sets:
        ordered = sorted(pts, key=lambda g: (stratum_order_key(table.dim, table.depths[g]), g))
        g2l = {g: i for i, g in enumerate(ordered)}
        cones = []
        for g in ordered:
            try:
                cones.append(tuple(g2l[q] for q in table.cones[g]))
            except KeyError as exc:
                raise DanglingCone(
                    f"global point {g} needs absent cone member {exc.args[0]}"
                ) from None
        plexes.append(
            Plex(
                dim=table.dim,
                depth_of=tuple(table.depths[g] for g in ordered),
                cones=tuple(cones),
            )
        )
        loc_g.append(ordered)
        glob2loc.append(g2l)

    npoints = [p.npoints for p in plexes]
    owned = [[owner[g] == r for g in loc_g[r]] for r in range(nranks)]
    sf_leaves: list[list] = [[] for _ in range(nranks)]
    for r in range(nranks):
        for i, g in enumerate(loc_g[r]):
            w = owner[g]
            if w != r:
                sf_leaves[r].append((i, (w, glob2loc[w][g])))
    point_sf = StarForest.create(npoints, npoints, sf_leaves)
    numbering = GlobalNumbering(
        loc_g=tuple(tuple(g) for g in loc_g),
        owned=tuple(tuple(f) for f in owned),
        total=table.npoints,
    )
    return ParallelMesh(plexes=plexes, point_sf=point_sf, numbering=numbering)


def _lowest_rank_owner(total: int, point_sets: list[list[int]]) -> list[int]:
    owner = [-1] * total
    for r, pts in enumerate(point_sets):
        for g in pts:
            if owner[g] < 0:
                owner[g] = r
    return owner


def naive_topology_split(table: TopologyTable, nranks: int) -> tuple[ParallelMesh, StarForest]:
    """Step 1: deal cells into balanced contiguous chunks and build each
    rank's mesh from their closures.

    The returned star forest maps every local point to the slot of its
    global number under the balanced chunking of ``0..E-1`` over the ranks.
    """
    table.validate_cones()
    cells = table.cells()
    sizes = balanced_chunks(len(cells), nranks)
    offs = chunk_offsets(sizes)
    point_sets: list[list[int]] = []
    for r in range(nranks):
        pts: dict[int, None] = {}
        for c in cells[offs[r]:offs[r + 1]]:
            for g in table.closure(c):
                pts[g] = None
        point_sets.append(list(pts))
    owner = _lowest_rank_owner(table.npoints, point_sets)
    mesh = _local_mesh(table, point_sets, owner)

    slot_sizes = balanced_chunks(table.npoints, nranks)
    slot_offs = chunk_offsets(slot_sizes)
    leaves = [
        [(i, chunk_slot(slot_offs, g)) for i, g in enumerate(globs)]
        for globs in mesh.numbering.loc_g
    ]
    sf = StarForest.create(slot_sizes, mesh.point_counts(), leaves)
    return mesh, sf


def greedy_bfs_partition(table: TopologyTable, nranks: int) -> PartitionPlan:
    """Deterministic stand-in for a graph partitioner.

    Seeds at the lowest-numbered unassigned cell and grows outward over
    the shared-facet cell adjacency, always absorbing the lowest-numbered
    frontier cell, until the balanced chunk size is reached; then repeats.
    Each part is connected unless the remaining cells force a reseed.
    Balance is by cell count only.
    """
    cells = table.cells()
    if len(cells) < nranks:
        raise TooFewCells(f"{len(cells)} cells cannot fill {nranks} parts")
    neighbors = cell_neighbors(table)

    sizes = balanced_chunks(len(cells), nranks)
    unassigned = set(cells)
    parts: list[list[int]] = []
    for r in range(nranks):
        part: list[int] = []
        frontier: list[int] = []
        while len(part) < sizes[r]:
            if frontier:
                c = heappop(frontier)
                if c not in unassigned:
                    continue
            else:
                c = min(unassigned)
            unassigned.discard(c)
            part.append(c)
            for nb in neighbors[c]:
                if nb in unassigned:
                    heappush(frontier, nb)
        parts.append(part)
    return PartitionPlan(cells=tuple(tuple(p) for p in parts), method="greedy-bfs")


def repartition(mesh: ParallelMesh, plan: PartitionPlan) -> tuple[ParallelMesh, StarForest]:
    """Step 2: migrate cells (with closures) to the ranks the plan assigns.

    The star forest maps each new local point to a previous slot holding
    the same entity: its own previous slot when the point stays on the
    rank, otherwise the previous owner's slot.
    """
    table = TopologyTable.from_parallel(mesh)
    current_cells: list[int] = []
    for plex, globs in zip(mesh.plexes, mesh.numbering.loc_g):
        current_cells.extend(globs[c] for c in plex.cells())
    plan.validate_against(sorted(set(current_cells)))

    point_sets: list[list[int]] = []
    for part in plan.cells:
        pts: dict[int, None] = {}
        for c in part:
            for g in table.closure(c):
                pts[g] = None
        point_sets.append(list(pts))
    owner = _lowest_rank_owner(table.npoints, point_sets)
    new_mesh = _local_mesh(table, point_sets, owner)
    sf = _migration_sf(mesh, new_mesh)
    return new_mesh, sf


def cell_neighbors(table: TopologyTable) -> dict[int, list[int]]:
    """Cell adjacency over shared facets (shared cone members)."""
    facet2cells: dict[int, list[int]] = {}
    for c in table.cells():
        for f in table.cones[c]:
            facet2cells.setdefault(f, []).append(c)
    neighbors: dict[int, list[int]] = {c: [] for c in table.cells()}
    for cs in facet2cells.values():
        for a in cs:
            for b in cs:
                if a != b:
                    neighbors[a].append(b)
    return {c: sorted(set(nbs)) for c, nbs in neighbors.items()}


def add_overlap(mesh: ParallelMesh, layers: int) -> tuple[ParallelMesh, StarForest]:
    """Step 3: grow ``layers`` rings of neighboring (facet-adjacent) cells
    past each process boundary, with closures; ownership is frozen as it
    stood before the overlap was added.  ``layers=0`` returns an identical
    mesh with an identity star forest.
    """
    table = TopologyTable.from_parallel(mesh)
    neighbors = cell_neighbors(table)

    owner = mesh.numbering.owner_of_global()
    point_sets: list[list[int]] = []
    for r in range(mesh.nranks):
        plex = mesh.plexes[r]
        globs = mesh.numbering.loc_g[r]
        owned_flags = mesh.numbering.owned[r]
        cellset = {globs[c] for c in plex.cells() if owned_flags[c]}
        for _ in range(layers):
            ring: set[int] = set()
            for c in cellset:
                for nb in neighbors[c]:
                    if nb not in cellset:
                        ring.add(nb)
            cellset |= ring
        pts: dict[int, None] = {}
        for c in sorted(cellset):
            for g in table.closure(c):
                pts[g] = None
        point_sets.append(list(pts))

    new_mesh = _local_mesh(table, point_sets, owner)
    sf = _migration_sf(mesh, new_mesh)
    return new_mesh, sf


def _migration_sf(old: ParallelMesh, new: ParallelMesh) -> StarForest:
    """Map each new local point to a previous slot for the same entity."""
    old_g2l = [
        {g: i for i, g in enumerate(globs)} for globs in old.numbering.loc_g
    ]
    old_owner = old.numbering.owner_of_global()
    leaves: list[list] = [[] for _ in range(new.nranks)]
    for r in range(new.nranks):
        for i, g in enumerate(new.numbering.loc_g[r]):
            if r < old.nranks and g in old_g2l[r]:
                leaves[r].append((i, (r, old_g2l[r][g])))
            else:
                w = old_owner[g]
                leaves[r].append((i, (w, old_g2l[w][g])))
    return StarForest.create(old.point_counts(), new.point_counts(), leaves)
