"""Immutable repository-history model.

A history is a DAG of commits; each commit carries the diff against its
*first* parent only. Merge diffs against further parents are out of scope:
every traversal in the toolkit (snapshot replay, blame walks) follows the
first-parent chain, which is also how the diffs were produced.

Hunk coordinate conventions (all 1-based):

* ``old_start`` points into the pre-image file. For a pure insertion
  (``old_lines`` empty) it names the old line *before which* the new lines
  land; ``len(old)+1`` appends at end of file.
* ``new_start`` points into the post-image file. For a pure deletion
  (``new_lines`` empty) it names the new line before which the removed block
  used to sit.

Two backends produce these objects: a synthetic JSON fixture loader (below)
and the git adapter in :mod:`szzset.gitbackend`. Snapshots for synthetic
histories are computed by replaying hunks from the root and are memoized;
a backend may inject its own snapshot function instead.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import (
    CorruptHistory,
    FileAbsentAtCommit,
    UnknownCommit,
    UnreadableSource,
)

CommitId = str

KIND_ADDED = "added"
KIND_DELETED = "deleted"
KIND_MODIFIED = "modified"
KIND_RENAMED = "renamed"
CHANGE_KINDS = frozenset({KIND_ADDED, KIND_DELETED, KIND_MODIFIED, KIND_RENAMED})


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_lines: tuple[str, ...]
    new_start: int
    new_lines: tuple[str, ...]

    def validate(self) -> None:
        if not self.old_lines and not self.new_lines:
            raise CorruptHistory("hunk with both sides empty")
        if self.old_start < 1 or self.new_start < 1:
            raise CorruptHistory("hunk starts are 1-based")


@dataclass(frozen=True)
class FileChange:
    path_before: str | None
    path_after: str | None
    kind: str
    hunks: tuple[Hunk, ...] = ()
    is_binary: bool = False

    def validate(self) -> None:
        if self.kind not in CHANGE_KINDS:
            raise CorruptHistory(f"unknown change kind {self.kind!r}")
        if self.kind == KIND_ADDED and (self.path_before is not None or not self.path_after):
            raise CorruptHistory("added change must have only path_after")
        if self.kind == KIND_DELETED and (self.path_after is not None or not self.path_before):
            raise CorruptHistory("deleted change must have only path_before")
        if self.kind == KIND_RENAMED and (
            not self.path_before or not self.path_after or self.path_before == self.path_after
        ):
            raise CorruptHistory("renamed change needs two distinct paths")
        if self.kind == KIND_MODIFIED and (
            not self.path_before or self.path_before != self.path_after
        ):
            raise CorruptHistory("modified change needs one path on both sides")
        if self.is_binary and self.hunks:
            raise CorruptHistory("binary change cannot carry hunks")
        last_end = 0
        for h in self.hunks:
            h.validate()
            # hunks must be ordered and non-overlapping in old coordinates;
            # equal old_starts (two inserts at one point) are ambiguous too
            if h.old_start <= last_end:
                raise CorruptHistory("hunks overlap or are unordered")
            last_end = h.old_start + max(len(h.old_lines), 1) - 1

    def source_path(self) -> str | None:
        return self.path_before if self.path_before is not None else self.path_after

    def target_path(self) -> str | None:
        return self.path_after if self.path_after is not None else self.path_before


@dataclass(frozen=True)
class Commit:
    id: CommitId
    parents: tuple[CommitId, ...]
    author_timestamp: int
    committer_timestamp: int
    message: str = ""
    changes: tuple[FileChange, ...] = ()

    def changed_lines(self) -> int:
        """Total diff size: old plus new line counts over all hunks."""
        return sum(len(h.old_lines) + len(h.new_lines) for fc in self.changes for h in fc.hunks)

    def touched_paths(self) -> frozenset[str]:
        return frozenset(
            fc.target_path() for fc in self.changes if fc.target_path() is not None
        )


SnapshotFn = Callable[[CommitId, str], tuple[str, ...]]


def apply_hunks(old: Sequence[str], hunks: Iterable[Hunk], *, where: str = "") -> tuple[str, ...]:
    """Replay hunks over the pre-image; mismatching old_lines raise CorruptHistory."""
    out: list[str] = []
    pos = 1
    for h in sorted(hunks, key=lambda h: h.old_start):
        if h.old_start < pos:
            raise CorruptHistory(f"overlapping hunks {where}")
        out.extend(old[pos - 1 : h.old_start - 1])
        actual = tuple(old[h.old_start - 1 : h.old_start - 1 + len(h.old_lines)])
        if actual != h.old_lines:
            raise CorruptHistory(f"hunk pre-image does not match file content {where}")
        out.extend(h.new_lines)
        pos = h.old_start + len(h.old_lines)
    if pos - 1 > len(old):
        raise CorruptHistory(f"hunk past end of file {where}")
    out.extend(old[pos - 1 :])
    return tuple(out)


def _apply_change(state: dict[str, tuple[str, ...]], fc: FileChange, where: str) -> None:
    if fc.is_binary:
        # binary payloads carry no line semantics; replay tracks text files only
        return
    if fc.kind == KIND_ADDED:
        if fc.path_after in state:
            raise CorruptHistory(f"{where}: adds existing file {fc.path_after}")
        state[fc.path_after] = apply_hunks((), fc.hunks, where=where)
    elif fc.kind == KIND_DELETED:
        if fc.path_before not in state:
            raise CorruptHistory(f"{where}: deletes missing file {fc.path_before}")
        del state[fc.path_before]
    elif fc.kind == KIND_RENAMED:
        if fc.path_before not in state:
            raise CorruptHistory(f"{where}: renames missing file {fc.path_before}")
        if fc.path_after in state:
            raise CorruptHistory(f"{where}: rename target exists {fc.path_after}")
        content = state.pop(fc.path_before)
        state[fc.path_after] = apply_hunks(content, fc.hunks, where=where)
    else:  # modified
        if fc.path_after not in state:
            raise CorruptHistory(f"{where}: modifies missing file {fc.path_after}")
        state[fc.path_after] = apply_hunks(state[fc.path_after], fc.hunks, where=where)


class RepositoryHistory:
    """Fully materialized commit DAG with snapshot access.

    ``snapshot_fn``, when given, overrides the built-in replay (the git
    backend reads file contents from the object store instead).
    """

    def __init__(self, commits: Sequence[Commit], snapshot_fn: SnapshotFn | None = None):
        self.commits: dict[CommitId, Commit] = {}
        for c in commits:
            if c.id in self.commits:
                raise CorruptHistory(f"duplicate commit id {c.id}")
            for fc in c.changes:
                fc.validate()
            self.commits[c.id] = c
        for c in self.commits.values():
            for p in c.parents:
                if p not in self.commits:
                    raise CorruptHistory(f"{c.id}: dangling parent {p}")
        self.topo_order: list[CommitId] = self._topo_sort()
        self._snapshot_fn = snapshot_fn
        self._states: dict[CommitId, dict[str, tuple[str, ...]]] = {}
        self._by_target_path: dict[CommitId, dict[str, FileChange]] = {}
        self._ancestors: dict[CommitId, frozenset[CommitId]] = {}

    def _topo_sort(self) -> list[CommitId]:
        children: dict[CommitId, list[CommitId]] = {cid: [] for cid in self.commits}
        pending = {cid: len(c.parents) for cid, c in self.commits.items()}
        ready = [
            (c.committer_timestamp, cid)
            for cid, c in self.commits.items()
            if not c.parents
        ]
        heapq.heapify(ready)
        for cid, c in self.commits.items():
            for p in c.parents:
                children[p].append(cid)
        order: list[CommitId] = []
        while ready:
            _, cid = heapq.heappop(ready)
            order.append(cid)
            for child in children[cid]:
                pending[child] -= 1
                if pending[child] == 0:
                    heapq.heappush(ready, (self.commits[child].committer_timestamp, child))
        if len(order) != len(self.commits):
            raise CorruptHistory("parent cycle in history")
        return order

    # --- accessors ---------------------------------------------------------

    def commit(self, commit_id: CommitId) -> Commit:
        try:
            return self.commits[commit_id]
        except KeyError:
            raise UnknownCommit(commit_id) from None

    def first_parent(self, commit_id: CommitId) -> CommitId | None:
        parents = self.commit(commit_id).parents
        return parents[0] if parents else None

    def ancestors(self, commit_id: CommitId) -> frozenset[CommitId]:
        """Proper ancestors: transitive closure over *all* parent edges."""
        cached = self._ancestors.get(commit_id)
        if cached is not None:
            return cached
        seen: set[CommitId] = set()
        stack = list(self.commit(commit_id).parents)
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.commits[cur].parents)
        result = frozenset(seen)
        self._ancestors[commit_id] = result
        return result

    def change_for_target_path(self, commit_id: CommitId, path: str) -> FileChange | None:
        """The commit's change whose post-image path is ``path``, if any."""
        index = self._by_target_path.get(commit_id)
        if index is None:
            index = {
                fc.path_after: fc
                for fc in self.commit(commit_id).changes
                if fc.path_after is not None
            }
            self._by_target_path[commit_id] = index
        return index.get(path)

    # --- snapshots ----------------------------------------------------------

    def snapshot(self, commit_id: CommitId, path: str) -> tuple[str, ...]:
        self.commit(commit_id)
        if self._snapshot_fn is not None:
            return self._snapshot_fn(commit_id, path)
        state = self._replay_state(commit_id)
        try:
            return state[path]
        except KeyError:
            raise FileAbsentAtCommit(f"{path} at {commit_id}") from None

    def file_exists(self, commit_id: CommitId, path: str) -> bool:
        try:
            self.snapshot(commit_id, path)
        except FileAbsentAtCommit:
            return False
        return True

    def _replay_state(self, commit_id: CommitId) -> dict[str, tuple[str, ...]]:
        chain: list[CommitId] = []
        cur: CommitId | None = commit_id
        while cur is not None and cur not in self._states:
            chain.append(cur)
            parents = self.commits[cur].parents
            cur = parents[0] if parents else None
        for cid in reversed(chain):
            c = self.commits[cid]
            base = self._states[c.parents[0]] if c.parents else {}
            state = dict(base)
            for fc in c.changes:
                _apply_change(state, fc, where=cid)
            self._states[cid] = state
        return self._states[commit_id]


# --- synthetic fixture IO ----------------------------------------------------


def _hunk_from_json(obj: dict) -> Hunk:
    return Hunk(
        old_start=int(obj["old_start"]),
        old_lines=tuple(obj.get("old_lines", ())),
        new_start=int(obj["new_start"]),
        new_lines=tuple(obj.get("new_lines", ())),
    )


def _change_from_json(obj: dict) -> FileChange:
    before = obj.get("path_before")
    after = obj.get("path_after")
    if obj["kind"] == KIND_MODIFIED:
        # accept fixtures that name the path on one side only
        before = before if before is not None else after
        after = after if after is not None else before
    return FileChange(
        path_before=before,
        path_after=after,
        kind=obj["kind"],
        hunks=tuple(_hunk_from_json(h) for h in obj.get("hunks", ())),
        is_binary=bool(obj.get("is_binary", False)),
    )


def history_from_json(data) -> RepositoryHistory:
    if not isinstance(data, list):
        raise CorruptHistory("fixture must be a list of commits")
    commits = []
    for obj in data:
        try:
            commits.append(
                Commit(
                    id=str(obj["id"]),
                    parents=tuple(obj.get("parents", ())),
                    author_timestamp=int(obj.get("author_ts", obj.get("committer_ts", 0))),
                    committer_timestamp=int(obj["committer_ts"]),
                    message=obj.get("message", ""),
                    changes=tuple(_change_from_json(ch) for ch in obj.get("changes", ())),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptHistory(f"malformed fixture commit: {exc}") from exc
    return RepositoryHistory(commits)


def history_to_json(history: RepositoryHistory) -> list[dict]:
    out = []
    for cid in history.topo_order:
        c = history.commits[cid]
        out.append(
            {
                "id": c.id,
                "parents": list(c.parents),
                "author_ts": c.author_timestamp,
                "committer_ts": c.committer_timestamp,
                "message": c.message,
                "changes": [
                    {
                        "path_before": fc.path_before,
                        "path_after": fc.path_after,
                        "kind": fc.kind,
                        "is_binary": fc.is_binary,
                        "hunks": [
                            {
                                "old_start": h.old_start,
                                "old_lines": list(h.old_lines),
                                "new_start": h.new_start,
                                "new_lines": list(h.new_lines),
                            }
                            for h in fc.hunks
                        ],
                    }
                    for fc in c.changes
                ],
            }
        )
    return out


def load_history(source: str | Path) -> RepositoryHistory:
    """Load a history from a fixture file (.json) or a git repository directory."""
    path = Path(source)
    if path.is_file() and path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise UnreadableSource(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise CorruptHistory(f"{path}: {exc}") from exc
        return history_from_json(data)
    if path.is_dir():
        from . import gitbackend

        return gitbackend.load_git_history(path)
    raise UnreadableSource(f"{source}: not a fixture file or repository directory")
