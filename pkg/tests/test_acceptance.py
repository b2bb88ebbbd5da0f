"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside pytest's own pass/fail output.
"""

import itertools
import random
import time

import pytest

import nmck.checkpoint as ckpt
from nmck.checkpoint import CheckpointFile
from nmck.distribute import balanced_chunks, chunk_offsets
from nmck.element import LagrangeElement, dof_permutation, orientation_compose
from nmck.errors import VersionMismatch
from nmck.fieldexpr import parse_field
from nmck.harness import (
    MeshSpec,
    SimComm,
    load_state,
    max_deviation,
    save_loaded_state,
    save_state,
)
from nmck.section import build_local_section, local_to_global_section
from nmck.starforest import (
    identity_sf,
    sf_broadcast,
    sf_compose,
    sf_invert_bijective,
)

from fixtures_threecell import (
    E_TOTAL,
    P4_RANK0_OWNED_DOFS,
    P4_TOTAL_DOFS,
    THREE_RANK_POINT_COUNTS,
    two_rank_mesh,
)
from helpers import broadcast_oracle, compose_oracle, random_permutation_sf, random_sf, sf_as_pairs

RANKS = (1, 2, 3, 4, 7)

SQUARE = MeshSpec("unit-square", 8)
CUBE = MeshSpec("unit-cube", 2)
SQUARE_FIELD = "x^4 - 3*x^2*y + y^4"
CUBE_FIELD = "x + 2*y + 3*z"

SQUARE_ELEMENTS = [LagrangeElement("P", k) for k in (1, 2, 3, 4)] + [
    LagrangeElement("DP", k) for k in (0, 1, 2)
]
CUBE_ELEMENTS = [LagrangeElement("P", 1), LagrangeElement("P", 2)]


def _verdict(number: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def _slot_payload(total, nranks):
    sizes = balanced_chunks(total, nranks)
    offs = chunk_offsets(sizes)
    return [[offs[r] + i for i in range(sizes[r])] for r in range(nranks)]


def test_criterion_1_roundtrip_exactness(tmp_path):
    """Every (N, M) pair, every in-scope element: zero deviation."""
    start = time.perf_counter()
    cases = 0
    try:
        for spec, elements, field_text in (
            (SQUARE, SQUARE_ELEMENTS, SQUARE_FIELD),
            (CUBE, CUBE_ELEMENTS, CUBE_FIELD),
        ):
            fld = parse_field(field_text)
            for el in elements:
                for n in RANKS:
                    path = tmp_path / f"{spec.shape}-{el.tag()}-{n}.nmck"
                    save_state(SimComm(n), spec, el, fld, path)
                    for m in RANKS:
                        loaded = load_state(SimComm(m), path)
                        dev = max_deviation(SimComm(m), loaded, fld)
                        assert dev == 0.0, (spec.shape, el.tag(), n, m, dev)
                        cases += 1
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.1f}s, expected under 60s"
    except AssertionError as exc:
        _verdict(1, False, str(exc))
        raise
    _verdict(
        1,
        True,
        f"{cases} N-to-M round trips, all exactly zero deviation "
        f"({time.perf_counter() - start:.1f}s)",
    )


def test_criterion_2_worked_example_fixture(tmp_path):
    """The three-cell mesh: entity/DoF counts and a 3-rank reload."""
    try:
        mesh = two_rank_mesh()
        assert mesh.numbering.total == E_TOTAL == 15
        el = LagrangeElement("P", 4)
        ls = build_local_section(mesh.plexes, el.dofs_per_dim(2))
        gs = local_to_global_section(ls, mesh.numbering)
        assert gs.ndofs == P4_TOTAL_DOFS == 35
        assert gs.owned_dof_counts()[0] == P4_RANK0_OWNED_DOFS == 20
        assert gs.off[8] == 20  # rank 1's offsets shifted by rank 0's total

        path = tmp_path / "fixture.nmck"
        with CheckpointFile(path, "w") as f:
            ckpt.topology_view(f, "m", mesh)
        with CheckpointFile(path, "r") as f:
            loaded, _ = ckpt.topology_load(f, "m", 3, overlap_layers=1)
        assert loaded.point_counts() == list(THREE_RANK_POINT_COUNTS) == [11, 15, 11]
    except AssertionError as exc:
        _verdict(2, False, str(exc))
        raise
    _verdict(2, True, "E=15, D=35, rank-0 owns 20 DoFs, offset shift 20, "
                      "3-rank reload sees (11, 15, 11) points")


def test_criterion_3_orientation_permutations():
    """Edge permutations, the triangle group law, and the edge involution."""
    try:
        p4 = LagrangeElement("P", 4)
        assert dof_permutation(p4, 1, 0) == (0, 1, 2)
        assert dof_permutation(p4, 1, 1) == (2, 1, 0)
        perms = {o: dof_permutation(p4, 2, o) for o in range(6)}
        assert len(set(perms.values())) == 6
        products = 0
        for o1, o2 in itertools.product(range(6), repeat=2):
            o12 = orientation_compose(2, o1, o2)
            assert tuple(perms[o1][perms[o2][i]] for i in range(3)) == perms[o12]
            products += 1
        assert products == 36
        flip = dof_permutation(p4, 1, 1)
        assert [flip[flip[i]] for i in range(3)] == [0, 1, 2]
    except AssertionError as exc:
        _verdict(3, False, str(exc))
        raise
    _verdict(3, True, "edge permutations [0,1,2]/[2,1,0], 36 triangle group "
                      "products verified, edge reversal is an involution")


def test_criterion_4_star_forest_algebra():
    """Randomized compose/invert/broadcast against independent oracles."""
    rng = random.Random(2024)
    try:
        for _ in range(1000):
            nranks = rng.randint(1, 3)
            a = [rng.randint(0, 8) for _ in range(nranks)]
            b = [rng.randint(0, 8) for _ in range(nranks)]
            c = [rng.randint(0, 8) for _ in range(nranks)]
            f = random_sf(rng, nleaves=a, nroots=b)
            g = random_sf(rng, nleaves=b, nroots=c)
            composed, _ = sf_compose(f, g)
            assert sf_as_pairs(composed) == compose_oracle(f, g)
        for _ in range(1000):
            sf = random_permutation_sf(rng, rng.randint(1, 10), rng.randint(1, 4))
            inv = sf_invert_bijective(sf)
            roundtrip, _ = sf_compose(sf, inv)
            assert roundtrip == identity_sf(sf.nleaves)
        for _ in range(1000):
            sf = random_sf(rng)
            data = [[rng.randrange(10**6) for _ in range(n)] for n in sf.nroots]
            assert sf_broadcast(sf, data) == broadcast_oracle(sf, data)
    except AssertionError as exc:
        _verdict(4, False, str(exc))
        raise
    _verdict(4, True, "3000 randomized instances: composition join, bijective "
                      "inversion, and broadcast lookup all agree")


def test_criterion_5_map_consistency(tmp_path):
    """Composed point map reproduces local global numbers; the DoF map
    reproduces the saved per-entity chunk assignment."""
    checked_points = 0
    checked_chunks = 0
    try:
        for spec, el, field_text in (
            (SQUARE, LagrangeElement("P", 4), SQUARE_FIELD),
            (CUBE, LagrangeElement("P", 2), CUBE_FIELD),
        ):
            fld = parse_field(field_text)
            for n in RANKS:
                path = tmp_path / f"{spec.shape}-{n}.nmck"
                save_state(SimComm(n), spec, el, fld, path)
                with CheckpointFile(path, "r") as f:
                    g_arr = [int(v) for v in f.read_dataset("/topologies/mesh/dms/V/section/g")]
                    dof_arr = [int(v) for v in f.read_dataset("/topologies/mesh/dms/V/section/dof")]
                    off_arr = [int(v) for v in f.read_dataset("/topologies/mesh/dms/V/section/off")]
                    saved_chunk = {
                        g: list(range(off, off + dof))
                        for g, dof, off in zip(g_arr, dof_arr, off_arr)
                    }
                    total_e = len(g_arr)
                    total_d = sum(dof_arr)
                    for m in RANKS:
                        mesh, sf = ckpt.topology_load(f, "mesh", m)
                        got = sf_broadcast(sf, _slot_payload(total_e, m))
                        for r in range(m):
                            assert got[r] == list(mesh.numbering.loc_g[r])
                            checked_points += len(got[r])
                        ls, sf_dofs, _ = ckpt.section_load(f, "mesh", "V", mesh, sf)
                        idx = sf_broadcast(sf_dofs, _slot_payload(total_d, m))
                        for r, plex in enumerate(mesh.plexes):
                            globs = mesh.numbering.loc_g[r]
                            for p in range(plex.npoints):
                                nd = ls.loc_dof[r][p]
                                got_chunk = [
                                    idx[r][ls.loc_off[r][p] + k] for k in range(nd)
                                ]
                                assert got_chunk == saved_chunk[globs[p]]
                                checked_chunks += 1
    except AssertionError as exc:
        _verdict(5, False, str(exc))
        raise
    _verdict(5, True, f"point map verified on {checked_points} local points, "
                      f"DoF chunk map on {checked_chunks} entities")


def test_criterion_6_exact_distribution_reload(tmp_path):
    """Same-rank-count reload restores local numbering; re-save is
    byte-identical."""
    spec = MeshSpec("unit-square", 8)
    el = LagrangeElement("P", 2)
    fld = parse_field("x^2 + y")
    try:
        for nranks in (2, 3, 4):
            first = tmp_path / f"first-{nranks}.nmck"
            second = tmp_path / f"second-{nranks}.nmck"
            saved = save_state(SimComm(nranks), spec, el, fld, first)
            loaded = load_state(SimComm(nranks), first, exact_distribution=True)
            assert loaded.mesh.numbering.loc_g == saved.mesh.numbering.loc_g
            assert loaded.mesh.numbering.owned == saved.mesh.numbering.owned
            save_loaded_state(SimComm(nranks), loaded, second)
            assert first.read_bytes() == second.read_bytes()
    except AssertionError as exc:
        _verdict(6, False, str(exc))
        raise
    _verdict(6, True, "N=M in {2,3,4}: local numbering restored exactly and "
                      "save-load-save is byte-identical")


def test_criterion_7_format_determinism(tmp_path):
    """Double save byte-identical; every dataset is listed; corrupted magic
    is rejected with a container-format error."""
    spec = MeshSpec("unit-square", 2)
    el = LagrangeElement("P", 3)
    fld = parse_field("x^3 - y")
    try:
        a, b = tmp_path / "a.nmck", tmp_path / "b.nmck"
        save_state(SimComm(2), spec, el, fld, a)
        save_state(SimComm(2), spec, el, fld, b)
        assert a.read_bytes() == b.read_bytes()

        with CheckpointFile(a, "r") as f:
            names = f.dataset_names()
            for expect in (
                "/topologies/mesh/cone_sizes",
                "/topologies/mesh/cones",
                "/topologies/mesh/depths",
                "/topologies/mesh/distribution/2/owners",
                "/topologies/mesh/distribution/2/point_counts",
                "/topologies/mesh/distribution/2/points",
                "/topologies/mesh/labels/boundary/1",
                "/topologies/mesh/dms/_coordinates/section/g",
                "/topologies/mesh/dms/_coordinates/vecs/coordinates/values",
                "/topologies/mesh/dms/V/section/g",
                "/topologies/mesh/dms/V/section/dof",
                "/topologies/mesh/dms/V/section/off",
                "/topologies/mesh/dms/V/element",
                "/topologies/mesh/dms/V/vecs/f/values",
            ):
                assert expect in names, expect
            for name in names:
                f.read_dataset(name)  # every listed dataset is readable

        corrupt = tmp_path / "corrupt.nmck"
        data = bytearray(a.read_bytes())
        data[:4] = b"????"
        corrupt.write_bytes(bytes(data))
        with pytest.raises(VersionMismatch):
            CheckpointFile(corrupt, "r")
    except AssertionError as exc:
        _verdict(7, False, str(exc))
        raise
    _verdict(7, True, "double save byte-identical, table of contents complete, "
                      "corrupted magic rejected")


def test_criterion_8_balanced_chunking():
    """Chunk sizes differ by at most one over many random pairs."""
    rng = random.Random(99)
    try:
        for _ in range(10_000):
            total = rng.randint(0, 10**6)
            nranks = rng.randint(1, 512)
            sizes = balanced_chunks(total, nranks)
            assert sum(sizes) == total
            assert max(sizes) - min(sizes) <= 1
            assert sizes == sorted(sizes, reverse=True)
    except AssertionError as exc:
        _verdict(8, False, str(exc))
        raise
    _verdict(8, True, "10^4 random (total, ranks) pairs all split evenly")
