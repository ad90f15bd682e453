"""Exception hierarchy shared across the toolkit.

Every error raised on purpose derives from SzzError so callers (and the CLI)
can distinguish domain failures from genuine bugs.
"""


class SzzError(Exception):
    """Base class for all toolkit errors."""


# --- repository history ---------------------------------------------------

class UnreadableSource(SzzError):
    """The history source path does not exist or is not a supported format."""


class BackendUnavailable(SzzError):
    """The version-control tool needed to read a repository is missing."""


class CorruptHistory(SzzError):
    """Parent cycles, dangling parent ids, or hunks that do not replay."""


class UnknownCommit(SzzError):
    """A commit id that is not part of the loaded history."""


class FileAbsentAtCommit(SzzError):
    """Snapshot request for a path that does not exist at that commit."""


# --- blame / variants -----------------------------------------------------

class EmptySkipFile(SzzError):
    """Skip-list file could not be read."""


class UnknownVariant(SzzError):
    """Variant id outside the closed B/AG/L/R/X enumeration."""


# --- commit-sets / datasets -----------------------------------------------

class CorruptDataset(SzzError):
    """Link dataset violates its schema or its commit-set consistency rules."""


class CommitNotInSet(SzzError):
    """Feature extraction asked about a commit outside the given commit-set."""


# --- pull-request provider -------------------------------------------------

class ProviderUnreachable(SzzError):
    """Provider endpoint failed, or replay cache has no recorded response."""


class RateLimited(ProviderUnreachable):
    """Provider asked us to back off (HTTP 429)."""


# --- evaluation -------------------------------------------------------------

class MismatchedFixingSet(SzzError):
    """Scored prediction belongs to a different fixing set than the truth link."""


class CoverageGap(SzzError):
    """Evaluation input lacks a prediction for some link in the dataset."""


class PerspectiveViolation(SzzError):
    """Dataset does not satisfy the chosen evaluation perspective's precondition."""


# --- classifier --------------------------------------------------------------

class MissingProvenance(SzzError):
    """Labeling asked for candidate provenance that was never computed."""


class InsufficientMinority(SzzError):
    """Too few minority rows for the requested resampling strategy."""


class DegenerateData(SzzError):
    """Training or diagnostics input with fewer classes/rows than required."""


class TooFewRows(SzzError):
    """Cross-validation cannot build the requested splits from these rows."""
