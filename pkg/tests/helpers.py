"""Shared randomized generators for the test suite."""

import random

from nmck.starforest import StarForest


def random_sf(
    rng: random.Random,
    nleaves: list[int] | None = None,
    nroots: list[int] | None = None,
    max_ranks: int = 4,
    max_size: int = 12,
    coverage: float = 0.7,
) -> StarForest:
    """A random star forest; leaf and root domains can be pinned for chaining."""
    if nleaves is None and nroots is None:
        nranks = rng.randint(1, max_ranks)
    else:
        nranks = len(nleaves if nleaves is not None else nroots)
    if nleaves is None:
        nleaves = [rng.randint(0, max_size) for _ in range(nranks)]
    if nroots is None:
        nroots = [rng.randint(0, max_size) for _ in range(nranks)]
    target_ranks = [r for r in range(nranks) if nroots[r] > 0]
    leaves = [[] for _ in range(nranks)]
    if target_ranks:
        for r in range(nranks):
            for i in range(nleaves[r]):
                if rng.random() < coverage:
                    r2 = rng.choice(target_ranks)
                    leaves[r].append((i, (r2, rng.randrange(nroots[r2]))))
    return StarForest.create(nroots, nleaves, leaves)


def random_permutation_sf(rng: random.Random, total: int, nranks: int) -> StarForest:
    """A bijective star forest: every root has exactly one leaf."""
    sizes = [0] * nranks
    for _ in range(total):
        sizes[rng.randrange(nranks)] += 1
    root_slots = [(r, j) for r in range(nranks) for j in range(sizes[r])]
    rng.shuffle(root_slots)
    leaves = [[] for _ in range(nranks)]
    k = 0
    for r in range(nranks):
        for i in range(sizes[r]):
            leaves[r].append((i, root_slots[k]))
            k += 1
    return StarForest.create(sizes, sizes, leaves)


def broadcast_oracle(sf: StarForest, root_data):
    """Independent per-leaf table lookup."""
    out = [[None] * n for n in sf.nleaves]
    for r in range(sf.nranks):
        for i, (r2, j) in sf.leaves[r]:
            out[r][i] = root_data[r2][j]
    return out


def compose_oracle(f: StarForest, g: StarForest) -> set:
    """Exhaustive table join: the set of (rank, leaf) -> (rank, root) pairs
    of the functional composition."""
    gmap = {}
    for r in range(g.nranks):
        for i, tgt in g.leaves[r]:
            gmap[(r, i)] = tgt
    out = set()
    for r in range(f.nranks):
        for i, tgt in f.leaves[r]:
            if tgt in gmap:
                out.add(((r, i), gmap[tgt]))
    return out


def sf_as_pairs(sf: StarForest) -> set:
    return {
        ((r, i), tgt) for r in range(sf.nranks) for i, tgt in sf.leaves[r]
    }
