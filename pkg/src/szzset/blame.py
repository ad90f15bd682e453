"""Line-origin tracing over repository histories.

Three modes:

* ``plain``: a line's origin is the nearest first-parent ancestor whose diff
  added or last modified it.
* ``skip``: like plain, but commits named in a skip list are transparent.
  Tracing continues through them at the nearest pre-image position, so the
  output never contains a skipped commit; a line the skipped commit itself
  introduced becomes untraceable.
* ``graph``: like plain, but a whitespace-only change to a line is an
  identity edge (the walk continues into the older spelling), and any commit
  flagged by the refactoring detector is traversed through like a skipped
  one. Callers usually also drop blank and comment target lines in this mode.

Traversal is first-parent only, matching how the diffs were produced. Lines
whose walk ends without finding a toucher (binary payloads, content imported
without a recorded diff) come back as untraceable, represented by ``None``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptySkipFile, FileAbsentAtCommit
from .history import KIND_ADDED, CommitId, FileChange, Hunk, RepositoryHistory
from .lineclass import LineClass, classify_lines

MODE_PLAIN = "plain"
MODE_SKIP = "skip"
MODE_GRAPH = "graph"
MODES = (MODE_PLAIN, MODE_SKIP, MODE_GRAPH)

DEFAULT_REFACTORING_THRESHOLD = 150


@dataclass(frozen=True)
class LineRef:
    """A concrete line: position and text in one commit's snapshot."""

    commit: CommitId
    path: str
    line_no: int
    text: str


@dataclass
class BlameResult:
    fixing_commit: CommitId
    mode: str
    origin_map: dict[LineRef, CommitId | None] = field(default_factory=dict)

    def origins(self) -> frozenset[CommitId]:
        return frozenset(o for o in self.origin_map.values() if o is not None)

    def touch_counts(self) -> Counter:
        return Counter(o for o in self.origin_map.values() if o is not None)


def parse_skip_file(path: str | Path) -> frozenset[CommitId]:
    """One revision per line; blank lines and ``#`` comments are dropped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise EmptySkipFile(f"{path}: {exc}") from exc
    revs = []
    for line in text.splitlines():
        rev = line.partition("#")[0].strip()
        if rev:
            revs.append(rev)
    return frozenset(revs)


def detect_refactoring(
    history: RepositoryHistory,
    commit_id: CommitId,
    threshold: int = DEFAULT_REFACTORING_THRESHOLD,
) -> bool:
    """True when any single file's diff exceeds ``threshold`` changed lines."""
    for fc in history.commit(commit_id).changes:
        size = sum(len(h.old_lines) + len(h.new_lines) for h in fc.hunks)
        if size > threshold:
            return True
    return False


def _squash_ws(text: str) -> str:
    return "".join(text.split())


def _locate(fc: FileChange, ln: int):
    """Place post-image line ``ln`` relative to the change's hunks.

    Returns ``("hit", hunk, offset)`` when the commit wrote that line, else
    ``("pass", pre_ln, None)`` with the same line's pre-image position.
    """
    cum = 0
    for hk in fc.hunks:
        n = len(hk.new_lines)
        if n and hk.new_start <= ln < hk.new_start + n:
            return ("hit", hk, ln - hk.new_start)
        if hk.new_start + n - 1 < ln:
            cum += n - len(hk.old_lines)
        else:
            break
    return ("pass", ln - cum, None)


def _ws_identity_index(hunk: Hunk, offset: int) -> int | None:
    """Old-side index whose text differs from the new line only in whitespace."""
    cur = _squash_ws(hunk.new_lines[offset])
    if offset < len(hunk.old_lines) and _squash_ws(hunk.old_lines[offset]) == cur:
        return offset
    for j, old in enumerate(hunk.old_lines):
        if _squash_ws(old) == cur:
            return j
    return None


def _trace(
    history: RepositoryHistory,
    commit: CommitId,
    path: str,
    ln: int,
    mode: str,
    skip: frozenset[CommitId],
    threshold: int,
    refactoring_cache: dict[CommitId, bool],
) -> CommitId | None:
    c, p = commit, path
    while True:
        fc = history.change_for_target_path(c, p)
        hit: Hunk | None = None
        offset = 0
        pre_path, pre_ln = p, ln
        if fc is not None:
            if fc.is_binary:
                return None
            where, a, b = _locate(fc, ln)
            if where == "hit":
                hit, offset = a, b
            elif fc.kind == KIND_ADDED:
                return None  # line claims to predate the file's creation
            else:
                pre_ln = a
                pre_path = fc.path_before if fc.path_before is not None else p
                if pre_ln < 1:
                    return None
        parent = history.first_parent(c)
        if hit is None:
            if parent is None:
                return None  # reached the root without a toucher
            c, p, ln = parent, pre_path, pre_ln
            continue

        # commit c wrote this line
        if mode == MODE_SKIP:
            transparent = c in skip
        elif mode == MODE_GRAPH:
            transparent = _refactoring(history, c, threshold, refactoring_cache)
        else:
            transparent = False

        if mode == MODE_GRAPH and not transparent and hit.old_lines:
            j = _ws_identity_index(hit, offset)
            if j is not None:
                if parent is None:
                    return None
                c = parent
                p = fc.path_before if fc.path_before is not None else p
                ln = hit.old_start + j
                continue

        if not transparent:
            return c
        if parent is None or fc.kind == KIND_ADDED:
            return None  # nothing exists before the transparent creation
        p_next = fc.path_before if fc.path_before is not None else p
        if hit.old_lines:
            ln_next = hit.old_start + min(offset, len(hit.old_lines) - 1)
        else:
            # pure insertion by a transparent commit: fall back to the
            # nearest surviving pre-image line
            try:
                snap = history.snapshot(parent, p_next)
            except FileAbsentAtCommit:
                return None
            if not snap:
                return None
            ln_next = min(max(hit.old_start - 1, 1), len(snap))
        c, p, ln = parent, p_next, ln_next


def _refactoring(history, commit_id, threshold, cache) -> bool:
    flag = cache.get(commit_id)
    if flag is None:
        flag = detect_refactoring(history, commit_id, threshold)
        cache[commit_id] = flag
    return flag


def blame_lines(
    history: RepositoryHistory,
    fixing_commit: CommitId,
    mode: str = MODE_PLAIN,
    skip_list: frozenset[CommitId] = frozenset(),
    ignore_classes: frozenset[LineClass] = frozenset(),
    refactoring_threshold: int = DEFAULT_REFACTORING_THRESHOLD,
) -> BlameResult:
    """Trace every line the fixing commit deleted or modified to its origin.

    Target lines are the old sides of the fixing commit's hunks, positioned
    in the first parent's snapshot; lines whose class is in
    ``ignore_classes`` are not traced at all.
    """
    if mode not in MODES:
        raise ValueError(f"unknown blame mode {mode!r}")
    fixing = history.commit(fixing_commit)
    result = BlameResult(fixing_commit=fixing_commit, mode=mode)
    parent = history.first_parent(fixing_commit)
    if parent is None:
        return result  # a root commit deletes nothing
    refactoring_cache: dict[CommitId, bool] = {}
    class_cache: dict[str, list[LineClass]] = {}
    for fc in fixing.changes:
        if fc.is_binary or fc.kind == KIND_ADDED:
            continue
        src = fc.path_before if fc.path_before is not None else fc.path_after
        classes: list[LineClass] | None = None
        if ignore_classes:
            classes = class_cache.get(src)
            if classes is None:
                classes = classify_lines(history.snapshot(parent, src), src)
                class_cache[src] = classes
        for hk in fc.hunks:
            for i, text in enumerate(hk.old_lines):
                ln = hk.old_start + i
                if classes is not None and ln - 1 < len(classes):
                    if classes[ln - 1] in ignore_classes:
                        continue
                ref = LineRef(commit=parent, path=src, line_no=ln, text=text)
                result.origin_map[ref] = _trace(
                    history,
                    parent,
                    src,
                    ln,
                    mode,
                    skip_list,
                    refactoring_threshold,
                    refactoring_cache,
                )
    return result
