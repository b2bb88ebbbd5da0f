"""Star forests: parallel leaf-to-root maps over a set of logical ranks.

A star forest (SF) relates two index spaces that are both split across
ranks.  Roots live on the target side: rank ``r`` holds root slots
``0..nroots[r]-1``.  Leaves live on the source side: rank ``r`` has a leaf
domain ``0..nleaves[r]-1``, and each *leaf entry* ``(i, (r2, j))`` declares
that local index ``i`` refers to root slot ``j`` on rank ``r2``.  Isolated
leaves (indices with no entry) carry no relation; as a whole an SF is a
total map from its leaf-entry set to its root set.

This one structure implements every index map in the save/load pipeline:
point-sharing between ranks, the assignment of loaded array chunks, and
the composed maps that route saved values onto a freshly loaded mesh.
Values are moved only by :func:`sf_broadcast`, which copies root data out
to leaves; items are opaque Python objects, so one engine serves integer
and float payloads alike.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DuplicateLeaf,
    IncompatibleShape,
    LeafOutOfRange,
    NotBijective,
    RankOutOfRange,
    RootOutOfRange,
    SizeMismatch,
)

__all__ = [
    "StarForest",
    "identity_sf",
    "sf_validate",
    "sf_broadcast",
    "sf_compose",
    "sf_invert_bijective",
]


@dataclass(frozen=True)
class StarForest:
    """Immutable leaf-to-root map across ``nranks`` logical ranks.

    ``leaves[r]`` is a tuple of ``(leaf_index, (remote_rank, root_index))``
    entries sorted by ``leaf_index``; use :meth:`create` to canonicalize.
    Instances are safe to share across threads.
    """

    nranks: int
    nroots: tuple[int, ...]
    nleaves: tuple[int, ...]
    leaves: tuple[tuple[tuple[int, tuple[int, int]], ...], ...]

    @classmethod
    def create(cls, nroots, nleaves, leaves):
        """Build an SF from per-rank lists, sorting leaf entries by index."""
        nroots = tuple(int(n) for n in nroots)
        nleaves = tuple(int(n) for n in nleaves)
        if len(nroots) != len(nleaves) or len(leaves) != len(nroots):
            raise SizeMismatch(
                f"per-rank lists disagree: {len(nroots)} root counts, "
                f"{len(nleaves)} leaf counts, {len(leaves)} leaf lists"
            )
        canon = tuple(
            tuple(sorted((int(i), (int(r2), int(j))) for i, (r2, j) in rank_leaves))
            for rank_leaves in leaves
        )
        return cls(len(nroots), nroots, nleaves, canon)

    @property
    def total_leaves(self) -> int:
        return sum(len(ls) for ls in self.leaves)

    def leaf_map(self, rank: int) -> dict[int, tuple[int, int]]:
        """Leaf index -> (rank, root index) lookup table for one rank."""
        return dict(self.leaves[rank])


def identity_sf(sizes) -> StarForest:
    """SF where every rank's index i maps to its own root slot i."""
    sizes = [int(n) for n in sizes]
    return StarForest.create(
        sizes,
        sizes,
        [[(i, (r, i)) for i in range(n)] for r, n in enumerate(sizes)],
    )


def sf_validate(sf: StarForest) -> None:
    """Check all StarForest invariants, raising a named error on violation.

    Raises RankOutOfRange / RootOutOfRange / LeafOutOfRange / DuplicateLeaf,
    each naming the offending rank and index.
    """
    for r in range(sf.nranks):
        seen = set()
        for i, (r2, j) in sf.leaves[r]:
            if not 0 <= i < sf.nleaves[r]:
                raise LeafOutOfRange(f"rank {r}: leaf index {i} not in [0, {sf.nleaves[r]})")
            if i in seen:
                raise DuplicateLeaf(f"rank {r}: leaf index {i} appears twice")
            seen.add(i)
            if not 0 <= r2 < sf.nranks:
                raise RankOutOfRange(f"rank {r}, leaf {i}: remote rank {r2} not in [0, {sf.nranks})")
            if not 0 <= j < sf.nroots[r2]:
                raise RootOutOfRange(
                    f"rank {r}, leaf {i}: root index {j} not in [0, {sf.nroots[r2]}) on rank {r2}"
                )


def sf_broadcast(sf: StarForest, root_data) -> list[list]:
    """Copy root values out to leaves.

    ``root_data[r]`` must hold one value per root slot of rank ``r``.  The
    result has one entry per leaf-domain index of each rank; positions not
    covered by any leaf entry are left as ``None``.  This runs as a
    deterministic gather-then-scatter, independent of rank scheduling.
    """
    if len(root_data) != sf.nranks:
        raise SizeMismatch(f"expected {sf.nranks} root arrays, got {len(root_data)}")
    for r, data in enumerate(root_data):
        if len(data) != sf.nroots[r]:
            raise SizeMismatch(
                f"rank {r}: root data has length {len(data)}, expected {sf.nroots[r]}"
            )
    out: list[list] = [[None] * n for n in sf.nleaves]
    for r in range(sf.nranks):
        row = out[r]
        for i, (r2, j) in sf.leaves[r]:
            row[i] = root_data[r2][j]
    return out


def sf_compose(f: StarForest, g: StarForest) -> tuple[StarForest, int]:
    """Compose two SFs: ``f`` maps A to B, ``g`` maps B to C; result maps A to C.

    ``f``'s root space must be index-compatible with ``g``'s leaf domain.
    A leaf of ``f`` whose image is not a leaf entry of ``g`` is dropped
    silently; the number of dropped leaves is returned alongside the
    composed forest.
    """
    if f.nranks != g.nranks or f.nroots != g.nleaves:
        raise IncompatibleShape(
            f"root counts {f.nroots} of the first forest do not match "
            f"leaf domains {g.nleaves} of the second"
        )
    gmaps = [g.leaf_map(r) for r in range(g.nranks)]
    dropped = 0
    out_leaves: list[list] = [[] for _ in range(f.nranks)]
    for r in range(f.nranks):
        for i, (r2, j) in f.leaves[r]:
            target = gmaps[r2].get(j)
            if target is None:
                dropped += 1
            else:
                out_leaves[r].append((i, target))
    return StarForest.create(g.nroots, f.nleaves, out_leaves), dropped


def sf_invert_bijective(sf: StarForest) -> StarForest:
    """Invert an SF in which every root has exactly one leaf.

    Roots and leaves swap sides; composing ``sf`` with the result yields
    the identity on ``sf``'s leaf domain.
    """
    hit: list[list] = [[None] * n for n in sf.nroots]
    count = 0
    for r in range(sf.nranks):
        for i, (r2, j) in sf.leaves[r]:
            if hit[r2][j] is not None:
                raise NotBijective(f"root ({r2}, {j}) has more than one leaf")
            hit[r2][j] = (r, i)
            count += 1
    if count != sum(sf.nroots):
        for r2, row in enumerate(hit):
            for j, entry in enumerate(row):
                if entry is None:
                    raise NotBijective(f"root ({r2}, {j}) has no leaf")
    out_leaves: list[list] = [[] for _ in range(sf.nranks)]
    for r2, row in enumerate(hit):
        for j, (r, i) in enumerate(row):
            out_leaves[r2].append((j, (r, i)))
    return StarForest.create(sf.nleaves, sf.nroots, out_leaves)
