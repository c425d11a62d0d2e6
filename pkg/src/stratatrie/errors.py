"""Exception types shared across the package."""


class StratatrieError(Exception):
    """Base class for all package-specific errors."""


class StructureError(StratatrieError):
    """A trie-table structural invariant was violated.

    Carries the offending node id in ``node_id`` when one is known.
    """

    def __init__(self, message: str, node_id: int | None = None):
        if node_id is not None:
            message = f"{message} (node {node_id})"
        super().__init__(message)
        self.node_id = node_id


class OrderingError(StratatrieError):
    """Organisms were inserted out of ascending generation order."""


class RetentionViolation(StratatrieError):
    """A retention policy resurrected a previously dropped rank."""

    def __init__(self, g: int, g_later: int, rank: int):
        super().__init__(
            f"rank {rank} dropped at generation {g} but retained at {g_later}"
        )
        self.g = g
        self.g_later = g_later
        self.rank = rank


class CodecError(StratatrieError):
    """Genome encoding or decoding failed."""


class FormatError(StratatrieError):
    """A phylogeny or corpus file was malformed."""
