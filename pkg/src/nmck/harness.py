"""Simulated communicator, mesh generation, and the end-to-end workflow.

The communicator stands in for a message-passing runtime: ranks advance
through bulk-synchronous phases, per-rank work can run sequentially or on
threads, and every collective result is collected in rank order, so the
outcome never depends on scheduling.  On top of it sit the save pipeline
(generate a mesh, distribute it over N ranks, interpolate a field, write
the checkpoint) and the load pipeline (rebuild everything on M ranks),
plus the round-trip verification that loaded DoF vectors match a fresh
interpolation bit for bit.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import checkpoint as ckpt
from .checkpoint import CheckpointFile
from .distribute import (
    TopologyTable,
    add_overlap,
    greedy_bfs_partition,
    naive_topology_split,
    repartition,
)
from .element import LagrangeElement, interpolate
from .errors import UnsupportedShape
from .fieldexpr import FieldExpr, parse_field
from .plex import (
    ParallelMesh,
    Plex,
    build_interval_plex,
    build_tet_plex,
    build_triangle_plex,
    create_point_numbering,
    plex_support,
)
from .section import LocalSection, build_local_section, local_to_global_section
from .starforest import StarForest

__all__ = [
    "SimComm",
    "MeshSpec",
    "gen_mesh",
    "boundary_facets",
    "distribute_serial",
    "save_state",
    "save_loaded_state",
    "load_state",
    "LoadedState",
    "max_deviation",
    "run_roundtrip",
    "RoundtripReport",
]

DEFAULT_MESH = "mesh"
DEFAULT_SPACE = "V"
DEFAULT_FUNC = "f"


@dataclass
class SimComm:
    """Deterministic stand-in for a communicator of ``nranks`` processes.

    ``map`` runs one function per rank and returns results in rank order;
    with ``mode="threads"`` the per-rank calls run concurrently, otherwise
    sequentially.  Either way each collective phase produces identical
    results, and the phase counter records that every rank went through
    the same number of collectives.
    """

    nranks: int
    mode: str = "sequential"
    phases: int = field(default=0)

    def map(self, fn, *per_rank):
        self.phases += 1
        args = [tuple(seq[r] for seq in per_rank) for r in range(self.nranks)]
        if self.mode == "threads" and self.nranks > 1:
            with ThreadPoolExecutor(max_workers=self.nranks) as pool:
                futures = [pool.submit(fn, r, *args[r]) for r in range(self.nranks)]
                return [f.result() for f in futures]
        return [fn(r, *args[r]) for r in range(self.nranks)]

    def barrier(self):
        self.phases += 1


@dataclass(frozen=True)
class MeshSpec:
    """Structured mesh request: shape, base resolution, refinement level.

    Each refinement level doubles the number of cells in every direction.
    """

    shape: str
    resolution: int
    refine: int = 0

    def __post_init__(self):
        if self.resolution < 1:
            raise UnsupportedShape(f"resolution must be >= 1, got {self.resolution}")
        if self.shape not in ("interval", "unit-square", "unit-cube"):
            raise UnsupportedShape(f"unknown mesh shape {self.shape!r}")

    @property
    def cells_per_side(self) -> int:
        return self.resolution * (2 ** self.refine)

    @classmethod
    def parse(cls, text: str) -> "MeshSpec":
        parts = text.split(":")
        if not 2 <= len(parts) <= 3:
            raise UnsupportedShape(
                f"mesh spec {text!r} must look like shape:resolution[:refine]"
            )
        return cls(parts[0], int(parts[1]), int(parts[2]) if len(parts) == 3 else 0)


def gen_mesh(spec: MeshSpec) -> tuple[Plex, np.ndarray]:
    """Build a fully interpolated serial mesh and its vertex coordinates."""
    n = spec.cells_per_side
    if spec.shape == "interval":
        plex = build_interval_plex([(i, i + 1) for i in range(n)], n + 1)
        coords = np.array([[i / n] for i in range(n + 1)])
        return plex, coords
    if spec.shape == "unit-square":
        def vid(i, j):
            return j * (n + 1) + i
        cells = []
        for j in range(n):
            for i in range(n):
                v00, v10 = vid(i, j), vid(i + 1, j)
                v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
                cells.append((v00, v10, v11))
                cells.append((v00, v11, v01))
        coords = np.array(
            [[i / n, j / n] for j in range(n + 1) for i in range(n + 1)]
        )
        return build_triangle_plex(cells, (n + 1) ** 2), coords
    if spec.shape == "unit-cube":
        def vid(i, j, k):
            return (k * (n + 1) + j) * (n + 1) + i
        axes = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        cells = []
        for k in range(n):
            for j in range(n):
                for i in range(n):
                    for perm in perms:
                        corner = (i, j, k)
                        tet = [vid(*corner)]
                        for a in perm:
                            corner = tuple(c + d for c, d in zip(corner, axes[a]))
                            tet.append(vid(*corner))
                        cells.append(tuple(tet))
        coords = np.array(
            [
                [i / n, j / n, k / n]
                for k in range(n + 1)
                for j in range(n + 1)
                for i in range(n + 1)
            ]
        )
        return build_tet_plex(cells, (n + 1) ** 3), coords
    raise UnsupportedShape(spec.shape)


def boundary_facets(plex: Plex) -> list[int]:
    """Facets lying on the domain boundary: supported by exactly one cell."""
    return [
        p
        for p in plex.stratum(plex.dim - 1)
        if len(plex_support(plex, p)) == 1
    ]


def distribute_serial(
    serial: Plex, nranks: int, overlap: int = 1
) -> tuple[ParallelMesh, tuple[tuple[int, ...], ...]]:
    """Distribute a serial mesh over ``nranks`` with the load-side pipeline,
    then assign a fresh global numbering.

    Returns the distributed mesh and, per rank, the serial point id of each
    local point (for carrying coordinates and labels over).
    """
    table = TopologyTable.from_serial_plex(serial)
    mesh, _ = naive_topology_split(table, nranks)
    plan = greedy_bfs_partition(table, nranks)
    mesh, _ = repartition(mesh, plan)
    mesh, _ = add_overlap(mesh, overlap)
    serial_ids = mesh.numbering.loc_g
    numbering = create_point_numbering(mesh.plexes, mesh.point_sf)
    return (
        ParallelMesh(plexes=mesh.plexes, point_sf=mesh.point_sf, numbering=numbering),
        serial_ids,
    )


def _local_coords(serial: Plex, coords: np.ndarray, mesh: ParallelMesh, serial_ids):
    """Rows of the serial coordinate table for each rank's local vertices."""
    vertex_row = {v: i for i, v in enumerate(serial.vertices())}
    out = []
    for r, plex in enumerate(mesh.plexes):
        rows = [vertex_row[serial_ids[r][v]] for v in plex.vertices()]
        out.append(coords[rows])
    return out


@dataclass
class SavedState:
    mesh: ParallelMesh
    coords: list[np.ndarray]
    section: LocalSection
    element: LagrangeElement
    vectors: list[np.ndarray]


@dataclass
class LoadedState:
    mesh: ParallelMesh
    sf_points: StarForest
    coords: list[np.ndarray]
    section: LocalSection
    sf_dofs: StarForest
    element: LagrangeElement
    vectors: list[np.ndarray]
    labels: list[dict]


def save_state(
    comm: SimComm,
    spec: MeshSpec,
    element: LagrangeElement,
    fld: FieldExpr,
    path,
    mesh_name: str = DEFAULT_MESH,
    space_name: str = DEFAULT_SPACE,
    func_name: str = DEFAULT_FUNC,
    overlap: int = 1,
) -> SavedState:
    """Generate, distribute over ``comm.nranks``, interpolate, and save.

    Writes topology, the saving distribution, a boundary label, the
    coordinates, the section, and the DoF vector, in that fixed order.
    """
    serial, serial_coords = gen_mesh(spec)
    mesh, serial_ids = distribute_serial(serial, comm.nranks, overlap=overlap)
    coords = _local_coords(serial, serial_coords, mesh, serial_ids)

    boundary = set(boundary_facets(serial))
    local_labels = []
    for r, plex in enumerate(mesh.plexes):
        pts = [p for p in range(plex.npoints) if serial_ids[r][p] in boundary]
        local_labels.append({"boundary": {1: pts}})
    labels = ckpt.labels_from_local(mesh, local_labels)

    ls = build_local_section(mesh.plexes, element.dofs_per_dim(serial.dim))
    vectors = comm.map(
        lambda r, plex, c: interpolate(plex, c, ls.loc_dof[r], ls.loc_off[r], element, fld),
        mesh.plexes,
        coords,
    )
    gs = local_to_global_section(ls, mesh.numbering)

    with CheckpointFile(path, "w") as f:
        ckpt.topology_view(f, mesh_name, mesh)
        ckpt.distribution_view(f, mesh_name, mesh)
        ckpt.labels_view(f, mesh_name, labels)
        ckpt.coordinates_view(f, mesh_name, mesh, coords)
        ckpt.section_view(f, mesh_name, space_name, gs, element)
        ckpt.local_vector_view(f, mesh_name, space_name, func_name, mesh, ls, gs, vectors)
    comm.barrier()
    return SavedState(mesh=mesh, coords=coords, section=ls, element=element, vectors=vectors)


def save_loaded_state(
    comm: SimComm,
    loaded: "LoadedState",
    path,
    mesh_name: str = DEFAULT_MESH,
    space_name: str = DEFAULT_SPACE,
    func_name: str = DEFAULT_FUNC,
) -> None:
    """Re-save previously loaded state, writing datasets in the same order
    as :func:`save_state`; with an exact-distribution reload this produces
    a byte-identical file."""
    mesh = loaded.mesh
    labels = ckpt.labels_from_local(mesh, loaded.labels)
    gs = local_to_global_section(loaded.section, mesh.numbering)
    with CheckpointFile(path, "w") as f:
        ckpt.topology_view(f, mesh_name, mesh)
        ckpt.distribution_view(f, mesh_name, mesh)
        ckpt.labels_view(f, mesh_name, labels)
        ckpt.coordinates_view(f, mesh_name, mesh, loaded.coords)
        ckpt.section_view(f, mesh_name, space_name, gs, loaded.element)
        ckpt.local_vector_view(
            f, mesh_name, space_name, func_name, mesh, loaded.section, gs,
            loaded.vectors,
        )
    comm.barrier()


def load_state(
    comm: SimComm,
    path,
    mesh_name: str = DEFAULT_MESH,
    space_name: str = DEFAULT_SPACE,
    func_name: str = DEFAULT_FUNC,
    exact_distribution: bool = False,
    overlap: int = 1,
) -> LoadedState:
    """Reload mesh, coordinates, section, labels, and DoF vector on
    ``comm.nranks`` ranks."""
    plan_source = "saved-distribution" if exact_distribution else "partition"
    with CheckpointFile(path, "r") as f:
        mesh, sf_points = ckpt.topology_load(
            f, mesh_name, comm.nranks, overlap_layers=overlap, plan_source=plan_source
        )
        coords = ckpt.coordinates_load(f, mesh_name, mesh, sf_points)
        ls, sf_dofs, element = ckpt.section_load(f, mesh_name, space_name, mesh, sf_points)
        vectors = ckpt.local_vector_load(f, mesh_name, space_name, func_name, ls, sf_dofs)
        labels = ckpt.labels_load(f, mesh_name, mesh)
    comm.barrier()
    return LoadedState(
        mesh=mesh,
        sf_points=sf_points,
        coords=coords,
        section=ls,
        sf_dofs=sf_dofs,
        element=element,
        vectors=vectors,
        labels=labels,
    )


def max_deviation(comm: SimComm, loaded: LoadedState, fld: FieldExpr) -> float:
    """Largest |loaded - freshly interpolated| over all ranks and DoFs."""
    def one(r, plex, c):
        fresh = interpolate(
            plex, c, loaded.section.loc_dof[r], loaded.section.loc_off[r],
            loaded.element, fld,
        )
        diff = np.abs(loaded.vectors[r] - fresh)
        return float(diff.max()) if diff.size else 0.0

    devs = comm.map(one, loaded.mesh.plexes, loaded.coords)
    return max(devs) if devs else 0.0


@dataclass
class RoundtripReport:
    spec: MeshSpec
    element: LagrangeElement
    field_source: str
    save_ranks: int
    load_ranks: int
    max_deviation: float
    entity_count: int
    dof_count: int
    point_counts: list[int]
    timings: dict[str, float]

    @property
    def ok(self) -> bool:
        return self.max_deviation == 0.0

    def lines(self) -> list[str]:
        out = [
            f"mesh={self.spec.shape}:{self.spec.resolution}:{self.spec.refine}",
            f"element={self.element.tag()}",
            f"field={self.field_source}",
            f"save_ranks={self.save_ranks}",
            f"load_ranks={self.load_ranks}",
            f"entities={self.entity_count}",
            f"dofs={self.dof_count}",
            f"loaded_points={','.join(str(c) for c in self.point_counts)}",
            f"max_deviation={self.max_deviation!r}",
        ]
        out += [f"time_{k}={v:.6f}" for k, v in self.timings.items()]
        out.append(f"ok={int(self.ok)}")
        return out


def run_roundtrip(
    spec: MeshSpec,
    element: LagrangeElement,
    field_text: str,
    save_ranks: int,
    load_ranks: int,
    path,
    mode: str = "sequential",
    exact_distribution: bool = False,
) -> RoundtripReport:
    """Save on N simulated ranks, load on M, and compare DoF values against
    a fresh interpolation on the loaded mesh (copy semantics: the expected
    deviation is exactly zero)."""
    fld = parse_field(field_text)
    timings = {}

    t0 = time.perf_counter()
    save_comm = SimComm(save_ranks, mode)
    save_state(save_comm, spec, element, fld, path)
    timings["save"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    load_comm = SimComm(load_ranks, mode)
    loaded = load_state(load_comm, path, exact_distribution=exact_distribution)
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    dev = max_deviation(load_comm, loaded, fld)
    timings["verify"] = time.perf_counter() - t0

    return RoundtripReport(
        spec=spec,
        element=element,
        field_source=field_text,
        save_ranks=save_ranks,
        load_ranks=load_ranks,
        max_deviation=dev,
        entity_count=loaded.mesh.numbering.total,
        dof_count=sum(loaded.sf_dofs.nroots),
        point_counts=loaded.mesh.point_counts(),
        timings=timings,
    )
