"""Versioned binary container and the save/load operation pairs.

The container is deliberately plain: little-endian, a 16-byte header
(magic ``NMCK``, u32 version, u64 table-of-contents offset), raw i64/f64
datasets back to back, and a trailing table of contents of named, shaped
entries.  Writing the same state twice produces byte-identical files.

On top of it sit the paired operations: ``topology_view/load``,
``labels_view/load``, ``section_view/load``, ``*_vector_view/load``,
``coordinates_view/load`` and ``distribution_view/load``.  Saving always
happens in terms of global numbers; loading rebuilds the parallel state
on any rank count by composing star forests, and float payloads are never
transformed, so reload equality is exact equality.

Dataset naming, rooted under ``/topologies/{mesh}``:

* ``cone_sizes``, ``cones``, ``depths``: topology, indexed by global number
* ``labels/{name}/{value}``: sorted global numbers per label stratum
* ``distribution/{N}/owners|point_counts|points``: saved distribution
* ``dms/{space}/section/{g|dof|off}``, ``dms/{space}/element``: sections
* ``dms/{space}/vecs/{vec}/values``: DoF vectors
"""

from __future__ import annotations

import struct

import numpy as np

from .distribute import (
    TopologyTable,
    add_overlap,
    balanced_chunks,
    chunk_offsets,
    chunk_slot,
    greedy_bfs_partition,
    naive_topology_split,
    repartition,
)
from .element import LagrangeElement
from .errors import (
    DuplicateMeshName,
    DuplicateSpaceName,
    ElementMismatch,
    InconsistentSF,
    IoFailure,
    MissingDataset,
    RankCountMismatch,
    SizeMismatch,
    VersionMismatch,
)
from .plex import GlobalNumbering, ParallelMesh, Plex
from .section import (
    GlobalSection,
    LocalSection,
    global_section_partition,
    global_section_validate,
)
from .starforest import StarForest, sf_broadcast, sf_compose, sf_invert_bijective

__all__ = [
    "CheckpointFile",
    "topology_view",
    "topology_load",
    "distribution_view",
    "distribution_load",
    "labels_view",
    "labels_load",
    "labels_from_local",
    "section_view",
    "section_load",
    "global_vector_view",
    "local_vector_view",
    "global_vector_load",
    "local_vector_load",
    "coordinates_view",
    "coordinates_load",
    "COORDINATES_SPACE",
]

_MAGIC = b"NMCK"
_VERSION = 1
_TYPE_I64 = 0
_TYPE_F64 = 1
_LAYOUT_FULL = 0
_FAMILY_CODES = {"P": 0, "DP": 1}
_FAMILY_NAMES = {v: k for k, v in _FAMILY_CODES.items()}

COORDINATES_SPACE = "_coordinates"
COORDINATES_VEC = "coordinates"


class CheckpointFile:
    """A single-file container of named i64/f64 datasets.

    Open with mode ``"w"`` to create (contents are buffered and flushed on
    close, so the bytes are a pure function of the write sequence) or
    ``"r"`` to read.  Usable as a context manager.
    """

    def __init__(self, path, mode: str = "r"):
        if mode not in ("r", "w"):
            raise ValueError(f"mode must be 'r' or 'w', got {mode!r}")
        self.path = str(path)
        self.mode = mode
        self._datasets: dict[str, np.ndarray] = {}
        self._toc: dict[str, tuple[int, tuple[int, ...], int, int]] = {}
        self._buf: bytes | None = None
        self._closed = False
        if mode == "r":
            self._open_read()

    # -- lifecycle ---------------------------------------------------------

    def _open_read(self):
        try:
            with open(self.path, "rb") as fh:
                self._buf = fh.read()
        except OSError as exc:
            raise IoFailure(f"cannot read {self.path}: {exc}") from exc
        buf = self._buf
        if len(buf) < 16 or buf[:4] != _MAGIC:
            raise VersionMismatch(f"{self.path} is not a checkpoint container")
        version, toc_off = struct.unpack_from("<IQ", buf, 4)
        if version != _VERSION:
            raise VersionMismatch(
                f"{self.path} has container version {version}, expected {_VERSION}"
            )
        if toc_off + 4 > len(buf):
            raise VersionMismatch(f"{self.path} has a truncated table of contents")
        (count,) = struct.unpack_from("<I", buf, toc_off)
        pos = toc_off + 4
        try:
            for _ in range(count):
                (nlen,) = struct.unpack_from("<H", buf, pos)
                pos += 2
                name = buf[pos:pos + nlen].decode("utf-8")
                pos += nlen
                typ, ndim = struct.unpack_from("<BB", buf, pos)
                pos += 2
                dims = struct.unpack_from(f"<{ndim}Q", buf, pos)
                pos += 8 * ndim
                off, nbytes = struct.unpack_from("<QQ", buf, pos)
                pos += 16
                self._toc[name] = (typ, tuple(dims), off, nbytes)
        except (struct.error, UnicodeDecodeError) as exc:
            raise VersionMismatch(f"{self.path} has a corrupt table of contents") from exc

    def close(self):
        if self._closed:
            return
        self._closed = True
        if self.mode != "w":
            return
        chunks = [b""]
        pos = 16
        toc_entries = []
        for name, arr in self._datasets.items():
            raw = arr.tobytes()
            typ = _TYPE_F64 if arr.dtype == np.float64 else _TYPE_I64
            toc_entries.append((name, typ, arr.shape, pos, len(raw)))
            chunks.append(raw)
            pos += len(raw)
        toc = [struct.pack("<I", len(toc_entries))]
        for name, typ, shape, off, nbytes in toc_entries:
            enc = name.encode("utf-8")
            toc.append(struct.pack("<H", len(enc)))
            toc.append(enc)
            toc.append(struct.pack("<BB", typ, len(shape)))
            toc.append(struct.pack(f"<{len(shape)}Q", *shape))
            toc.append(struct.pack("<QQ", off, nbytes))
        chunks[0] = _MAGIC + struct.pack("<IQ", _VERSION, pos)
        try:
            with open(self.path, "wb") as fh:
                fh.write(b"".join(chunks))
                fh.write(b"".join(toc))
        except OSError as exc:
            raise IoFailure(f"cannot write {self.path}: {exc}") from exc

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    # -- datasets ----------------------------------------------------------

    def write_dataset(self, name: str, array) -> None:
        if self.mode != "w":
            raise IoFailure(f"{self.path} is open read-only")
        if name in self._datasets:
            raise ValueError(f"dataset {name!r} written twice")
        arr = np.asarray(array)
        if arr.dtype == np.float64:
            pass
        elif np.issubdtype(arr.dtype, np.integer) or arr.size == 0:
            arr = arr.astype(np.int64)
        else:
            raise ValueError(f"dataset {name!r} must be integer or float64")
        self._datasets[name] = np.ascontiguousarray(arr)

    def has_dataset(self, name: str) -> bool:
        if self.mode == "w":
            return name in self._datasets
        return name in self._toc

    def dataset_names(self) -> list[str]:
        if self.mode == "w":
            return list(self._datasets)
        return list(self._toc)

    def dataset_shape(self, name: str) -> tuple[int, ...]:
        if self.mode == "w":
            return self._datasets[name].shape
        self._require(name)
        return self._toc[name][1]

    def _require(self, name: str):
        if name not in self._toc:
            raise MissingDataset(f"{self.path} has no dataset {name!r}")

    def read_dataset(self, name: str) -> np.ndarray:
        if self.mode == "w":
            if name not in self._datasets:
                raise MissingDataset(f"no dataset {name!r} written yet")
            return self._datasets[name]
        self._require(name)
        typ, dims, off, nbytes = self._toc[name]
        dtype = np.float64 if typ == _TYPE_F64 else np.int64
        arr = np.frombuffer(self._buf, dtype=dtype, count=nbytes // 8, offset=off)
        return arr.reshape(dims)


def _topo_prefix(mesh_name: str) -> str:
    return f"/topologies/{mesh_name}"


def _space_prefix(mesh_name: str, space_name: str) -> str:
    return f"{_topo_prefix(mesh_name)}/dms/{space_name}"


# --- topology ---------------------------------------------------------------

def topology_view(file: CheckpointFile, mesh_name: str, mesh: ParallelMesh) -> None:
    """Save the mesh topology: each rank contributes the cones of its owned
    entities, written in global numbers and indexed by global number."""
    prefix = _topo_prefix(mesh_name)
    if file.has_dataset(f"{prefix}/cone_sizes"):
        raise DuplicateMeshName(f"mesh {mesh_name!r} already saved")
    total = mesh.numbering.total
    depths = [-1] * total
    cones: list[tuple[int, ...] | None] = [None] * total
    for plex, globs, owned in zip(
        mesh.plexes, mesh.numbering.loc_g, mesh.numbering.owned
    ):
        for p in range(plex.npoints):
            if not owned[p]:
                continue
            g = globs[p]
            depths[g] = plex.depth_of[p]
            cones[g] = tuple(globs[q] for q in plex.cones[p])
    if any(c is None for c in cones):
        missing = next(g for g, c in enumerate(cones) if c is None)
        raise InconsistentSF(f"global point {missing} has no owner contribution")
    flat = [q for cone in cones for q in cone]
    file.write_dataset(f"{prefix}/cone_sizes", [len(c) for c in cones])
    file.write_dataset(f"{prefix}/cones", flat)
    file.write_dataset(f"{prefix}/depths", depths)


def _read_topology_table(file: CheckpointFile, mesh_name: str) -> TopologyTable:
    prefix = _topo_prefix(mesh_name)
    sizes = file.read_dataset(f"{prefix}/cone_sizes")
    flat = file.read_dataset(f"{prefix}/cones")
    depths = file.read_dataset(f"{prefix}/depths")
    cones = []
    pos = 0
    for s in sizes:
        cones.append(tuple(int(q) for q in flat[pos:pos + s]))
        pos += int(s)
    return TopologyTable(
        dim=int(depths.max()) if len(depths) else 0,
        depths=tuple(int(d) for d in depths),
        cones=tuple(cones),
    )


def topology_load(
    file: CheckpointFile,
    mesh_name: str,
    nranks: int,
    overlap_layers: int = 1,
    plan_source: str = "partition",
) -> tuple[ParallelMesh, StarForest]:
    """Reconstruct the mesh on ``nranks`` ranks.

    With ``plan_source="partition"`` this runs the three-step pipeline
    (naive split, deterministic repartition, overlap growth) and returns
    the composed star forest from final local points to the loaded-chunk
    slots of the global number space.  With ``plan_source="saved-distribution"``
    the stored rank-wise distribution is replayed instead (rank counts
    must match).
    """
    if plan_source == "saved-distribution":
        return distribution_load(file, mesh_name, nranks)
    if plan_source != "partition":
        raise ValueError(f"unknown plan source {plan_source!r}")
    table = _read_topology_table(file, mesh_name)
    mesh00, sf00 = naive_topology_split(table, nranks)
    plan = greedy_bfs_partition(table, nranks)
    mesh0, sf0 = repartition(mesh00, plan)
    mesh_final, sf_ov = add_overlap(mesh0, overlap_layers)
    inner, _ = sf_compose(sf_ov, sf0)
    composed, _ = sf_compose(inner, sf00)
    return mesh_final, composed


# --- saved distribution -------------------------------------------------------

def distribution_view(file: CheckpointFile, mesh_name: str, mesh: ParallelMesh) -> None:
    """Record the saving distribution: owner rank per global point and each
    rank's local point order (as global numbers)."""
    prefix = f"{_topo_prefix(mesh_name)}/distribution/{mesh.nranks}"
    if file.has_dataset(f"{prefix}/owners"):
        raise DuplicateMeshName(f"distribution for mesh {mesh_name!r} already saved")
    file.write_dataset(f"{prefix}/owners", mesh.numbering.owner_of_global())
    file.write_dataset(f"{prefix}/point_counts", mesh.point_counts())
    flat = [g for globs in mesh.numbering.loc_g for g in globs]
    file.write_dataset(f"{prefix}/points", flat)


def _find_saved_nranks(file: CheckpointFile, mesh_name: str) -> int:
    marker = f"{_topo_prefix(mesh_name)}/distribution/"
    for name in file.dataset_names():
        if name.startswith(marker) and name.endswith("/owners"):
            return int(name[len(marker):].split("/")[0])
    raise MissingDataset(f"no saved distribution for mesh {mesh_name!r}")


def distribution_load(
    file: CheckpointFile, mesh_name: str, nranks: int
) -> tuple[ParallelMesh, StarForest]:
    """Replay the exact saved distribution (requires matching rank count).

    Every rank gets back precisely the points it saved, in the saved local
    order, so a following save is byte-identical to the original.
    """
    saved_n = _find_saved_nranks(file, mesh_name)
    if nranks != saved_n:
        raise RankCountMismatch(
            f"checkpoint was saved from {saved_n} ranks, cannot replay on {nranks}"
        )
    table = _read_topology_table(file, mesh_name)
    prefix = f"{_topo_prefix(mesh_name)}/distribution/{saved_n}"
    owners = [int(w) for w in file.read_dataset(f"{prefix}/owners")]
    counts = [int(c) for c in file.read_dataset(f"{prefix}/point_counts")]
    flat = [int(g) for g in file.read_dataset(f"{prefix}/points")]
    offs = chunk_offsets(counts)
    loc_g = [flat[offs[r]:offs[r + 1]] for r in range(saved_n)]

    glob2loc = [{g: i for i, g in enumerate(globs)} for globs in loc_g]
    plexes = []
    for globs, g2l in zip(loc_g, glob2loc):
        plexes.append(
            Plex(
                dim=table.dim,
                depth_of=tuple(table.depths[g] for g in globs),
                cones=tuple(
                    tuple(g2l[q] for q in table.cones[g]) for g in globs
                ),
            )
        )
    npoints = [p.npoints for p in plexes]
    owned = [
        tuple(owners[g] == r for g in globs) for r, globs in enumerate(loc_g)
    ]
    sf_leaves: list[list] = [[] for _ in range(saved_n)]
    for r, globs in enumerate(loc_g):
        for i, g in enumerate(globs):
            w = owners[g]
            if w != r:
                sf_leaves[r].append((i, (w, glob2loc[w][g])))
    point_sf = StarForest.create(npoints, npoints, sf_leaves)
    numbering = GlobalNumbering(
        loc_g=tuple(tuple(g) for g in loc_g),
        owned=tuple(owned),
        total=table.npoints,
    )
    mesh = ParallelMesh(plexes=plexes, point_sf=point_sf, numbering=numbering)

    slot_offs = chunk_offsets(balanced_chunks(table.npoints, nranks))
    leaves = [
        [(i, chunk_slot(slot_offs, g)) for i, g in enumerate(globs)]
        for globs in loc_g
    ]
    sf = StarForest.create(balanced_chunks(table.npoints, nranks), npoints, leaves)
    return mesh, sf


# --- labels -----------------------------------------------------------------

def labels_from_local(mesh: ParallelMesh, per_rank_labels) -> dict[str, dict[int, set[int]]]:
    """Union per-rank local label points into global-number label sets."""
    out: dict[str, dict[int, set[int]]] = {}
    for r, labels in enumerate(per_rank_labels):
        globs = mesh.numbering.loc_g[r]
        for name, strata in labels.items():
            for value, points in strata.items():
                out.setdefault(name, {}).setdefault(int(value), set()).update(
                    globs[p] for p in points
                )
    return out


def labels_view(file: CheckpointFile, mesh_name: str, labels) -> None:
    """Store each label stratum as a sorted sequence of global numbers."""
    base = f"{_topo_prefix(mesh_name)}/labels"
    for name in sorted(labels):
        for value in sorted(labels[name]):
            file.write_dataset(
                f"{base}/{name}/{value}", sorted(labels[name][value])
            )


def labels_load(
    file: CheckpointFile, mesh_name: str, mesh: ParallelMesh
) -> list[dict[str, dict[int, list[int]]]]:
    """Restrict saved labels to each rank's visible points, translated to
    local numbers."""
    base = f"{_topo_prefix(mesh_name)}/labels/"
    entries = []
    for ds in file.dataset_names():
        if ds.startswith(base):
            rel = ds[len(base):].rsplit("/", 1)
            entries.append((rel[0], int(rel[1]), ds))
    out: list[dict[str, dict[int, list[int]]]] = []
    for r in range(mesh.nranks):
        g2l = {g: i for i, g in enumerate(mesh.numbering.loc_g[r])}
        rank_labels: dict[str, dict[int, list[int]]] = {}
        for name, value, ds in entries:
            pts = [g2l[int(g)] for g in file.read_dataset(ds) if int(g) in g2l]
            rank_labels.setdefault(name, {})[value] = sorted(pts)
        out.append(rank_labels)
    return out


# --- sections ----------------------------------------------------------------

def section_view(
    file: CheckpointFile,
    mesh_name: str,
    space_name: str,
    gs: GlobalSection,
    element: LagrangeElement,
) -> None:
    """Save the concatenated section arrays plus the element tag."""
    prefix = _space_prefix(mesh_name, space_name)
    if file.has_dataset(f"{prefix}/section/g"):
        raise DuplicateSpaceName(f"space {space_name!r} already saved")
    global_section_validate(gs)
    # layout 0 = uncompressed (zero-DoF entities retained); other values
    # are reserved for a future compressed layout
    file.write_dataset(f"{prefix}/section/layout", [_LAYOUT_FULL])
    file.write_dataset(f"{prefix}/section/g", gs.g)
    file.write_dataset(f"{prefix}/section/dof", gs.dof)
    file.write_dataset(f"{prefix}/section/off", gs.off)
    file.write_dataset(
        f"{prefix}/element", [_FAMILY_CODES[element.family], element.degree]
    )


def _read_element(file: CheckpointFile, mesh_name: str, space_name: str) -> LagrangeElement:
    code, degree = file.read_dataset(f"{_space_prefix(mesh_name, space_name)}/element")
    return LagrangeElement(_FAMILY_NAMES[int(code)], int(degree))


def section_load(
    file: CheckpointFile,
    mesh_name: str,
    space_name: str,
    mesh: ParallelMesh,
    sf_points_to_slots: StarForest,
    element: LagrangeElement | None = None,
) -> tuple[LocalSection, StarForest, LagrangeElement]:
    """Rebuild the local section on a loaded mesh and derive the DoF map.

    The stored arrays are split into balanced chunks; the chunk positions
    are tied back to global numbers bijectively, inverted, and composed
    with the mesh's point-to-slot forest.  Broadcasting the DoF counts
    through that composition gives every rank its local counts; offsets
    are their prefix sums; broadcasting the stored offsets then yields,
    per DoF, its index in the saved global vector, which is finally tied
    to the vector's own balanced chunking.

    Returns the local section, the star forest from local DoFs to loaded
    vector chunk slots, and the stored element.
    """
    stored = _read_element(file, mesh_name, space_name)
    if element is not None and element != stored:
        raise ElementMismatch(
            f"space {space_name!r} stores {stored.tag()}, requested {element.tag()}"
        )
    prefix = _space_prefix(mesh_name, space_name)
    layout = int(file.read_dataset(f"{prefix}/section/layout")[0])
    if layout != _LAYOUT_FULL:
        raise VersionMismatch(f"unsupported section layout {layout}")
    g_arr = [int(v) for v in file.read_dataset(f"{prefix}/section/g")]
    dof_arr = [int(v) for v in file.read_dataset(f"{prefix}/section/dof")]
    off_arr = [int(v) for v in file.read_dataset(f"{prefix}/section/off")]
    nranks = mesh.nranks
    gs = GlobalSection(
        g=g_arr, dof=dof_arr, off=off_arr,
        rank_counts=balanced_chunks(len(g_arr), nranks),
    )
    parts, sf_chunks_to_slots = global_section_partition(gs, nranks)

    sf_slots_to_chunks = sf_invert_bijective(sf_chunks_to_slots)
    sf_points_to_chunks, _ = sf_compose(sf_points_to_slots, sf_slots_to_chunks)

    dof_parts = [part_dof for (_, part_dof, _) in parts]
    off_parts = [part_off for (_, _, part_off) in parts]
    loc_dof = sf_broadcast(sf_points_to_chunks, dof_parts)
    goff = sf_broadcast(sf_points_to_chunks, off_parts)
    for r in range(nranks):
        if any(v is None for v in loc_dof[r]):
            raise InconsistentSF(f"rank {r}: a local point received no DoF count")

    loc_off = []
    for dofs in loc_dof:
        offs = []
        run = 0
        for nd in dofs:
            offs.append(run)
            run += nd
        loc_off.append(offs)
    ls = LocalSection(loc_dof=loc_dof, loc_off=loc_off)

    ndofs_total = sum(dof_arr)
    vec_sizes = balanced_chunks(ndofs_total, nranks)
    vec_offs = chunk_offsets(vec_sizes)
    leaves: list[list] = [[] for _ in range(nranks)]
    for r in range(nranks):
        for p, nd in enumerate(loc_dof[r]):
            base_local = loc_off[r][p]
            base_global = goff[r][p]
            for k in range(nd):
                leaves[r].append(
                    (base_local + k, chunk_slot(vec_offs, base_global + k))
                )
    sf_dofs = StarForest.create(vec_sizes, ls.ndofs_all(), leaves)
    return ls, sf_dofs, stored


# --- vectors -----------------------------------------------------------------

def global_vector_view(
    file: CheckpointFile,
    mesh_name: str,
    space_name: str,
    vec_name: str,
    gs: GlobalSection,
    owned_slices,
) -> None:
    """Concatenate per-rank owned-DoF slices into the stored global vector."""
    counts = gs.owned_dof_counts()
    if len(owned_slices) != len(counts):
        raise SizeMismatch(
            f"{len(owned_slices)} slices for {len(counts)} saving ranks"
        )
    for r, (sl, expect) in enumerate(zip(owned_slices, counts)):
        if len(sl) != expect:
            raise SizeMismatch(
                f"rank {r}: vector slice has {len(sl)} values, owns {expect} DoFs"
            )
    name = f"{_space_prefix(mesh_name, space_name)}/vecs/{vec_name}/values"
    if file.has_dataset(name):
        raise DuplicateSpaceName(f"vector {vec_name!r} already saved")
    values = np.concatenate(
        [np.asarray(sl, dtype=np.float64) for sl in owned_slices]
    ) if owned_slices else np.zeros(0)
    file.write_dataset(name, values)


def local_vector_view(
    file: CheckpointFile,
    mesh_name: str,
    space_name: str,
    vec_name: str,
    mesh: ParallelMesh,
    ls: LocalSection,
    gs: GlobalSection,
    local_vectors,
) -> None:
    """Drop each rank's ghost chunks and save the remainder as the global
    vector."""
    slices = []
    for r in range(mesh.nranks):
        vec = np.asarray(local_vectors[r], dtype=np.float64)
        if len(vec) != ls.ndofs(r):
            raise SizeMismatch(
                f"rank {r}: local vector has {len(vec)} values, section has {ls.ndofs(r)}"
            )
        keep = []
        for p, owned in enumerate(mesh.numbering.owned[r]):
            if owned and ls.loc_dof[r][p]:
                off = ls.loc_off[r][p]
                keep.append(vec[off:off + ls.loc_dof[r][p]])
        slices.append(np.concatenate(keep) if keep else np.zeros(0))
    global_vector_view(file, mesh_name, space_name, vec_name, gs, slices)


def _read_vector(file: CheckpointFile, mesh_name, space_name, vec_name) -> np.ndarray:
    return file.read_dataset(
        f"{_space_prefix(mesh_name, space_name)}/vecs/{vec_name}/values"
    )


def local_vector_load(
    file: CheckpointFile,
    mesh_name: str,
    space_name: str,
    vec_name: str,
    ls: LocalSection,
    sf_dofs: StarForest,
) -> list[np.ndarray]:
    """Fill each rank's ghosted local vector straight from the stored values.

    Values are copied, never recomputed: every local DoF receives the bits
    of its saved counterpart through the DoF star forest.
    """
    values = _read_vector(file, mesh_name, space_name, vec_name)
    if len(values) != sum(sf_dofs.nroots):
        raise SizeMismatch(
            f"vector {vec_name!r} has {len(values)} values, section expects "
            f"{sum(sf_dofs.nroots)}"
        )
    offs = chunk_offsets(list(sf_dofs.nroots))
    parts = [values[offs[r]:offs[r + 1]] for r in range(sf_dofs.nranks)]
    moved = sf_broadcast(sf_dofs, parts)
    out = []
    for r, vals in enumerate(moved):
        if any(v is None for v in vals):
            raise InconsistentSF(f"rank {r}: a local DoF received no value")
        out.append(np.array(vals, dtype=np.float64))
    return out


def global_vector_load(
    file: CheckpointFile,
    mesh_name: str,
    space_name: str,
    vec_name: str,
    mesh: ParallelMesh,
    ls: LocalSection,
    sf_dofs: StarForest,
) -> list[np.ndarray]:
    """Owned-only view: the local load with each rank's ghost chunks dropped."""
    local = local_vector_load(file, mesh_name, space_name, vec_name, ls, sf_dofs)
    out = []
    for r in range(mesh.nranks):
        keep = []
        for p, owned in enumerate(mesh.numbering.owned[r]):
            if owned and ls.loc_dof[r][p]:
                off = ls.loc_off[r][p]
                keep.append(local[r][off:off + ls.loc_dof[r][p]])
        out.append(np.concatenate(keep) if keep else np.zeros(0))
    return out


# --- coordinates ---------------------------------------------------------------

def coordinates_view(
    file: CheckpointFile, mesh_name: str, mesh: ParallelMesh, coords
) -> None:
    """Save vertex coordinates as a vector-valued nodal function on the
    vertices, through the ordinary section + vector path."""
    from .section import build_local_section, local_to_global_section

    gdim = int(np.asarray(coords[0]).shape[1])
    dofs_per_dim = {d: (gdim if d == 0 else 0) for d in range(mesh.plexes[0].dim + 1)}
    ls = build_local_section(mesh.plexes, dofs_per_dim)
    vectors = []
    for r, plex in enumerate(mesh.plexes):
        vec = np.zeros(ls.ndofs(r), dtype=np.float64)
        for row, v in enumerate(plex.vertices()):
            off = ls.loc_off[r][v]
            vec[off:off + gdim] = np.asarray(coords[r])[row]
        vectors.append(vec)
    gs = local_to_global_section(ls, mesh.numbering)
    section_view(file, mesh_name, COORDINATES_SPACE, gs, LagrangeElement("P", 1))
    local_vector_view(
        file, mesh_name, COORDINATES_SPACE, COORDINATES_VEC, mesh, ls, gs, vectors
    )


def coordinates_load(
    file: CheckpointFile,
    mesh_name: str,
    mesh: ParallelMesh,
    sf_points_to_slots: StarForest,
) -> list[np.ndarray]:
    """Per-rank vertex coordinates, one row per local vertex."""
    ls, sf_dofs, _ = section_load(
        file, mesh_name, COORDINATES_SPACE, mesh, sf_points_to_slots
    )
    vectors = local_vector_load(
        file, mesh_name, COORDINATES_SPACE, COORDINATES_VEC, ls, sf_dofs
    )
    out = []
    for r, plex in enumerate(mesh.plexes):
        verts = plex.vertices()
        gdim = ls.loc_dof[r][verts[0]] if verts else 0
        rows = np.zeros((len(verts), gdim), dtype=np.float64)
        for row, v in enumerate(verts):
            off = ls.loc_off[r][v]
            rows[row] = vectors[r][off:off + gdim]
        out.append(rows)
    return out
