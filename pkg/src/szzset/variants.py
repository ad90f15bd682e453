"""The five detection variants built on the blame engine.

B traces every deleted or modified line in plain mode. AG traces in graph
mode and skips blank/comment target lines. L and R reduce the AG candidate
set to a single commit: L keeps the candidate with the largest diff, R the
most recently committed one; both break ties toward the lexicographically
smallest id so reruns are stable. X is plain tracing with an exclusion list
of commits treated as transparent (an empty list makes X identical to B).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .blame import (
    DEFAULT_REFACTORING_THRESHOLD,
    MODE_GRAPH,
    MODE_PLAIN,
    MODE_SKIP,
    blame_lines,
)
from .errors import UnknownVariant
from .history import CommitId, RepositoryHistory
from .lineclass import LineClass


class Variant(Enum):
    B = "B"
    AG = "AG"
    L = "L"
    R = "R"
    X = "X"


ALL_VARIANTS = (Variant.B, Variant.AG, Variant.L, Variant.R, Variant.X)

AG_IGNORED_CLASSES = frozenset({LineClass.BLANK, LineClass.COMMENT})

# what "largest" means for L: the candidate commit's own diff size, or the
# number of traced lines that resolved to it
L_SIZE_CANDIDATE_LINES = "candidate_lines"
L_SIZE_TRACED_LINES = "traced_lines"

# what "most recent" means for R
TS_COMMITTER = "committer"
TS_AUTHOR = "author"


def parse_variant(name: str | Variant) -> Variant:
    if isinstance(name, Variant):
        return name
    try:
        return Variant(name.upper())
    except ValueError:
        raise UnknownVariant(name) from None


@dataclass(frozen=True)
class CandidateReport:
    fixing_commit: CommitId
    variant: Variant
    candidates: frozenset[CommitId]
    touch_counts: dict[CommitId, int] = field(default_factory=dict)


def run_variant(
    history: RepositoryHistory,
    fixing_commit: CommitId,
    variant: str | Variant,
    skip_list: frozenset[CommitId] = frozenset(),
    refactoring_threshold: int = DEFAULT_REFACTORING_THRESHOLD,
    l_size: str = L_SIZE_CANDIDATE_LINES,
    timestamp_source: str = TS_COMMITTER,
) -> CandidateReport:
    """Candidate fix-inducing commits for one fixing commit."""
    variant = parse_variant(variant)
    if variant is Variant.B:
        result = blame_lines(history, fixing_commit, MODE_PLAIN)
    elif variant is Variant.X:
        result = blame_lines(history, fixing_commit, MODE_SKIP, skip_list=skip_list)
    else:  # AG and its two reductions
        result = blame_lines(
            history,
            fixing_commit,
            MODE_GRAPH,
            ignore_classes=AG_IGNORED_CLASSES,
            refactoring_threshold=refactoring_threshold,
        )
    counts = dict(result.touch_counts())
    candidates = frozenset(counts)

    if variant in (Variant.B, Variant.AG, Variant.X):
        return CandidateReport(fixing_commit, variant, candidates, counts)

    if not candidates:
        return CandidateReport(fixing_commit, variant, frozenset(), {})

    if variant is Variant.L:
        if l_size == L_SIZE_CANDIDATE_LINES:
            size = {c: history.commit(c).changed_lines() for c in candidates}
        elif l_size == L_SIZE_TRACED_LINES:
            size = counts
        else:
            raise ValueError(f"unknown L size measure {l_size!r}")
        winner = min(candidates, key=lambda c: (-size[c], c))
    else:  # Variant.R
        if timestamp_source == TS_COMMITTER:
            ts = {c: history.commit(c).committer_timestamp for c in candidates}
        elif timestamp_source == TS_AUTHOR:
            ts = {c: history.commit(c).author_timestamp for c in candidates}
        else:
            raise ValueError(f"unknown timestamp source {timestamp_source!r}")
        winner = min(candidates, key=lambda c: (-ts[c], c))

    return CandidateReport(
        fixing_commit, variant, frozenset({winner}), {winner: counts[winner]}
    )
