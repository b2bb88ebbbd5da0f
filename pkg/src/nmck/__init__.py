"""N-to-M checkpointing for distributed unstructured finite-element meshes.

Save a mesh, function space, and function from N simulated ranks; reload
and reconstruct them on M ranks by composing star-forest maps keyed to
the saved global numbering, with DoF layouts tied to entity cones so the
reloaded values land on the right nodes bit for bit.
"""

from .checkpoint import (
    CheckpointFile,
    coordinates_load,
    coordinates_view,
    distribution_load,
    distribution_view,
    global_vector_load,
    global_vector_view,
    labels_load,
    labels_view,
    local_vector_load,
    local_vector_view,
    section_load,
    section_view,
    topology_load,
    topology_view,
)
from .distribute import (
    PartitionPlan,
    TopologyTable,
    add_overlap,
    balanced_chunks,
    greedy_bfs_partition,
    naive_topology_split,
    repartition,
)
from .element import (
    LagrangeElement,
    ReferenceCell,
    dof_permutation,
    entity_orientation,
    interpolate,
    orientation_compose,
    reference_cell,
)
from .errors import NmckError
from .fieldexpr import FieldExpr, parse_field
from .harness import (
    LoadedState,
    MeshSpec,
    RoundtripReport,
    SimComm,
    gen_mesh,
    load_state,
    run_roundtrip,
    save_state,
)
from .plex import (
    GlobalNumbering,
    ParallelMesh,
    Plex,
    create_point_numbering,
    plex_closure,
    plex_support,
    plex_validate,
)
from .section import (
    GlobalSection,
    LocalSection,
    build_local_section,
    global_section_partition,
    local_to_global_section,
)
from .starforest import (
    StarForest,
    identity_sf,
    sf_broadcast,
    sf_compose,
    sf_invert_bijective,
    sf_validate,
)

__version__ = "0.1.0"
