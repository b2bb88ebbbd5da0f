"""Discrete function space data: per-point DoF counts and offsets.

A *local section* describes one rank's ghosted DoF vector: for every
local point, how many DoFs sit on it and where its contiguous chunk
starts.  Offsets are the prefix sums of the counts taken in local point
order, so the chunks tile ``0..D_local-1`` exactly.

A *global section* is the ghost-free concatenation over ranks: one entry
per global entity, offsets pointing into the concatenated owned-DoF
vector.  It is what actually gets serialized; entities with zero DoFs are
retained so positions line up with entity counts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .distribute import balanced_chunks, chunk_offsets, chunk_slot
from .errors import InconsistentOwnership, MissingStratum, SizeMismatch
from .plex import GlobalNumbering, Plex
from .starforest import StarForest

__all__ = [
    "LocalSection",
    "GlobalSection",
    "build_local_section",
    "local_to_global_section",
    "global_section_partition",
    "global_section_validate",
]


@dataclass
class LocalSection:
    """Per-rank DoF counts and offsets over local points."""

    loc_dof: list[list[int]]
    loc_off: list[list[int]]

    @property
    def nranks(self) -> int:
        return len(self.loc_dof)

    def ndofs(self, rank: int) -> int:
        return sum(self.loc_dof[rank])

    def ndofs_all(self) -> list[int]:
        return [self.ndofs(r) for r in range(self.nranks)]


@dataclass
class GlobalSection:
    """Concatenated ghost-free section over all global entities.

    ``g[i]``, ``dof[i]`` and ``off[i]`` give the global number, DoF count
    and global-vector offset of the entity stored at position ``i``;
    ``rank_counts[n]`` says how many positions rank ``n`` contributed.
    """

    g: list[int]
    dof: list[int]
    off: list[int]
    rank_counts: list[int]

    @property
    def npoints(self) -> int:
        return len(self.g)

    @property
    def ndofs(self) -> int:
        return sum(self.dof)

    def owned_dof_counts(self) -> list[int]:
        """Total DoFs contributed by each rank."""
        offs = chunk_offsets(self.rank_counts)
        return [
            sum(self.dof[offs[r]:offs[r + 1]]) for r in range(len(self.rank_counts))
        ]


def build_local_section(plexes: list[Plex], dofs_per_dim: dict[int, int]) -> LocalSection:
    """Assign ``dofs_per_dim[depth]`` DoFs to every point of that stratum
    and lay chunks out by prefix sum in local point order."""
    loc_dof: list[list[int]] = []
    loc_off: list[list[int]] = []
    for plex in plexes:
        for d in set(plex.depth_of):
            if d not in dofs_per_dim:
                raise MissingStratum(f"no DoF count given for stratum depth {d}")
        dofs = [dofs_per_dim[d] for d in plex.depth_of]
        offs = []
        run = 0
        for nd in dofs:
            offs.append(run)
            run += nd
        loc_dof.append(dofs)
        loc_off.append(offs)
    return LocalSection(loc_dof=loc_dof, loc_off=loc_off)


def local_to_global_section(ls: LocalSection, numbering: GlobalNumbering) -> GlobalSection:
    """Drop ghost entries and concatenate the owned remainder across ranks.

    Offsets are rebuilt over the owned points of each rank in local order
    and shifted by the cumulative owned-DoF totals of the lower ranks, so
    they index the concatenated global DoF vector.
    """
    if ls.nranks != numbering.nranks:
        raise InconsistentOwnership(
            f"section has {ls.nranks} ranks, numbering has {numbering.nranks}"
        )
    g_out: list[int] = []
    dof_out: list[int] = []
    off_out: list[int] = []
    rank_counts: list[int] = []
    shift = 0
    for r in range(ls.nranks):
        count = 0
        run = shift
        for p, owned in enumerate(numbering.owned[r]):
            if not owned:
                continue
            g_out.append(numbering.loc_g[r][p])
            dof_out.append(ls.loc_dof[r][p])
            off_out.append(run)
            run += ls.loc_dof[r][p]
            count += 1
        rank_counts.append(count)
        shift = run
    seen = [0] * numbering.total
    for g in g_out:
        seen[g] += 1
    if any(c != 1 for c in seen):
        bad = next(g for g, c in enumerate(seen) if c != 1)
        raise InconsistentOwnership(
            f"global point {bad} is owned by {seen[bad]} ranks"
        )
    return GlobalSection(g=g_out, dof=dof_out, off=off_out, rank_counts=rank_counts)


def global_section_validate(gs: GlobalSection) -> None:
    """Check the permutation and chunk-cover invariants."""
    n = gs.npoints
    if sorted(gs.g) != list(range(n)):
        raise InconsistentOwnership("stored global numbers are not a permutation")
    if sum(gs.rank_counts) != n:
        raise SizeMismatch(
            f"rank counts sum to {sum(gs.rank_counts)}, expected {n}"
        )
    ndofs = gs.ndofs
    covered = [False] * ndofs
    for dof, off in zip(gs.dof, gs.off):
        for j in range(off, off + dof):
            if j >= ndofs or covered[j]:
                raise SizeMismatch("DoF chunks do not tile the global vector")
            covered[j] = True
    if not all(covered):
        raise SizeMismatch("DoF chunks do not cover the global vector")


def global_section_partition(
    gs: GlobalSection, nranks: int
) -> tuple[list[tuple[list[int], list[int], list[int]]], StarForest]:
    """Split the section arrays into balanced chunks for ``nranks`` loading
    ranks and build the bijective star forest from chunk positions to the
    slots of the stored global numbers."""
    sizes = balanced_chunks(gs.npoints, nranks)
    offs = chunk_offsets(sizes)
    parts = [
        (
            gs.g[offs[r]:offs[r + 1]],
            gs.dof[offs[r]:offs[r + 1]],
            gs.off[offs[r]:offs[r + 1]],
        )
        for r in range(nranks)
    ]
    slot_offs = chunk_offsets(balanced_chunks(gs.npoints, nranks))
    leaves = [
        [(i, chunk_slot(slot_offs, g)) for i, g in enumerate(part_g)]
        for (part_g, _, _) in parts
    ]
    sf = StarForest.create(sizes, sizes, leaves)
    return parts, sf
