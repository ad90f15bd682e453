"""Per-commit features describing a commit's role inside its commit-set.

Three raw sizes (added lines, deleted lines, touched files), their shares
of the whole set, the commit's normalized time position, and whether any
of its paths is also touched by a sibling commit. Everything is derivable
from the history alone, so the same extractor serves training, scoring,
and filtering.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..commitsets import CommitSet
from ..errors import CommitNotInSet
from ..history import CommitId, RepositoryHistory

FEATURE_NAMES = (
    "Addition",
    "Deletion",
    "Files",
    "CS Addition",
    "CS Deletion",
    "CS Files",
    "Order",
    "CS Shared Files",
)


@dataclass(frozen=True)
class FeatureVector:
    addition: int
    deletion: int
    files: int
    cs_addition: float
    cs_deletion: float
    cs_files: float
    order: float
    cs_shared_files: int

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.addition,
                self.deletion,
                self.files,
                self.cs_addition,
                self.cs_deletion,
                self.cs_files,
                self.order,
                self.cs_shared_files,
            ],
            dtype=float,
        )


def _sizes(history: RepositoryHistory, commit_id: CommitId) -> tuple[int, int, int]:
    c = history.commit(commit_id)
    addition = sum(len(h.new_lines) for fc in c.changes for h in fc.hunks)
    deletion = sum(len(h.old_lines) for fc in c.changes for h in fc.hunks)
    return addition, deletion, len(c.changes)


def extract_features(
    history: RepositoryHistory, commit_set: CommitSet, commit_id: CommitId
) -> FeatureVector:
    """Features of one commit relative to its enclosing set.

    Shares divide by the set total and fall back to 0 when the total is 0.
    Order ranks commits by committer timestamp (ties broken by id) and maps
    the rank to [0, 1]; a singleton set has order 0.
    """
    if commit_id not in commit_set.commits:
        raise CommitNotInSet(f"{commit_id} not in {commit_set.id}")
    addition, deletion, files = _sizes(history, commit_id)
    totals = [0, 0, 0]
    for member in commit_set.commits:
        for slot, value in enumerate(_sizes(history, member)):
            totals[slot] += value

    def share(value: int, total: int) -> float:
        return value / total if total else 0.0

    ordered = sorted(
        commit_set.commits,
        key=lambda c: (history.commit(c).committer_timestamp, c),
    )
    n = len(ordered)
    order = ordered.index(commit_id) / (n - 1) if n > 1 else 0.0

    own_paths = history.commit(commit_id).touched_paths()
    shared = any(
        not own_paths.isdisjoint(history.commit(other).touched_paths())
        for other in commit_set.commits
        if other != commit_id
    )
    return FeatureVector(
        addition=addition,
        deletion=deletion,
        files=files,
        cs_addition=share(addition, totals[0]),
        cs_deletion=share(deletion, totals[1]),
        cs_files=share(files, totals[2]),
        order=order,
        cs_shared_files=int(shared),
    )


def feature_matrix(
    history: RepositoryHistory, pairs: list[tuple[CommitSet, CommitId]]
) -> np.ndarray:
    if not pairs:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.stack([extract_features(history, cs, c).as_array() for cs, c in pairs])


def features_to_csv(matrix: np.ndarray) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(FEATURE_NAMES)
    for row in matrix:
        writer.writerow([repr(float(v)) for v in row])
    return out.getvalue()
