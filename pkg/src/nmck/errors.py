"""Exception hierarchy for the whole package.

Every error raised by library code derives from :class:`NmckError`, so
callers (and the CLI) can distinguish our failures from genuine bugs.
"""


class NmckError(Exception):
    """Base class for all errors raised by this package."""


# --- star forests ---------------------------------------------------------

class RankOutOfRange(NmckError):
    """A leaf points at a rank that does not exist."""


class RootOutOfRange(NmckError):
    """A leaf points at a root slot beyond the target rank's root count."""


class LeafOutOfRange(NmckError):
    """A leaf index lies outside its rank's leaf domain."""


class DuplicateLeaf(NmckError):
    """Two leaf entries on one rank share the same leaf index."""


class SizeMismatch(NmckError):
    """An array length disagrees with the size the operation requires."""


class IncompatibleShape(NmckError):
    """Two star forests cannot be composed: root/leaf domains disagree."""


class NotBijective(NmckError):
    """Inversion requested for a star forest with a root that has 0 or >1 leaves."""


# --- mesh topology --------------------------------------------------------

class BadDepth(NmckError):
    """A cone member's stratum depth is not exactly one below its parent's."""


class CycleDetected(NmckError):
    """The cone relation contains a cycle."""


class ConeOutOfRange(NmckError):
    """A cone references a point outside the local point range."""


class PointOutOfRange(NmckError):
    """A queried point is outside the local point range."""


class InconsistentSF(NmckError):
    """The point-sharing star forest routes a ghost to another ghost."""


# --- load-side distribution -----------------------------------------------

class ZeroRanks(NmckError):
    """A rank count of zero was requested."""


class DanglingCone(NmckError):
    """Saved cone data references a global number that does not exist."""


class PlanMismatch(NmckError):
    """A partition plan does not cover exactly the current cells."""


class TooFewCells(NmckError):
    """The mesh has fewer cells than the requested number of parts."""


# --- sections ---------------------------------------------------------------

class MissingStratum(NmckError):
    """No DoF count was supplied for a stratum present in the mesh."""


class InconsistentOwnership(NmckError):
    """Point ownership does not partition the global number set."""


# --- elements ----------------------------------------------------------------

class NotAPermutation(NmckError):
    """Two cone orderings are not rearrangements of the same id set."""


class NoDofsOnEntity(NmckError):
    """A DoF permutation was requested for an entity carrying no DoFs."""


class UnsupportedElement(NmckError):
    """The element family/degree/cell combination is outside scope."""


# --- checkpoint container ---------------------------------------------------

class IoFailure(NmckError):
    """An underlying file operation failed."""


class VersionMismatch(NmckError):
    """The file is not a recognized container (bad magic or version)."""


class MissingDataset(NmckError):
    """A requested dataset is absent from the file."""


class DuplicateMeshName(NmckError):
    """A mesh with this name was already written to the file."""


class DuplicateSpaceName(NmckError):
    """A function space with this name was already written to the file."""


class ElementMismatch(NmckError):
    """The stored element tag disagrees with the one requested."""


class RankCountMismatch(NmckError):
    """Exact-distribution reload requested with a different rank count."""


# --- harness ----------------------------------------------------------------

class UnsupportedShape(NmckError):
    """The mesh generator does not know this cell shape."""


class FieldSyntaxError(NmckError):
    """A field expression could not be parsed."""
