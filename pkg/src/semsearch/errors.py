"""Exception hierarchy shared by all semsearch modules."""

from __future__ import annotations


class SemsearchError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVector(SemsearchError):
    """A vector with (near-)zero norm where a direction is required."""


class DimMismatch(SemsearchError):
    """Operands or index/query dimensions disagree."""


class DuplicateId(SemsearchError):
    """A document id was added twice to the same index."""


class IndexFrozen(SemsearchError):
    """Mutation attempted on a frozen index."""


class IndexNotFrozen(SemsearchError):
    """Search attempted before the index was frozen."""


class NotTrained(SemsearchError):
    """IVF operation requires a trained coarse quantizer."""


class TooFewVectors(SemsearchError):
    """Fewer training vectors than requested clusters."""


class CapacityExceeded(SemsearchError):
    """Graph index received more items than its declared capacity."""


class InvalidParam(SemsearchError):
    """A structural parameter is out of its legal range."""


class EmptyQuery(SemsearchError):
    """A multi-vector query with no vectors."""


class BackendMissing(SemsearchError):
    """The requested search backend has not been built on this engine."""


class MissingJudgment(SemsearchError):
    """A query has no relevance judgment."""


class KMismatch(SemsearchError):
    """Oracle result list is shorter than the k being evaluated."""


class EmptyResults(SemsearchError):
    """A statistic was requested over an empty result collection."""


class BadMagic(SemsearchError):
    """File does not start with the expected magic bytes."""


class TruncatedFile(SemsearchError):
    """File size disagrees with its header."""


class VersionUnsupported(SemsearchError):
    """File format version not understood by this build."""


class RowOutOfRange(SemsearchError):
    """Catalog row index points outside the embedding matrix."""


class ChecksumMismatch(SemsearchError):
    """Snapshot body does not match its recorded checksum."""


class TypeMismatch(SemsearchError):
    """Snapshot holds a different index type than requested."""


class ConfigError(SemsearchError):
    """Run configuration is malformed (unknown keys, bad types, bad values)."""


class EmbedderError(SemsearchError):
    """The remote embedding service failed or answered off-contract."""
