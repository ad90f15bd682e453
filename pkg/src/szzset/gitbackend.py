"""Adapter that materializes a RepositoryHistory from a git repository.

This is the only module that talks to the version-control tool. Everything
is read through the command-line interface: commit metadata in one batched
log call, then one zero-context diff per commit against its first parent
(root commits diff against the empty tree), and snapshots straight from the
object store on demand. Rename detection is delegated to git at the usual
50% similarity.

The walk starts at HEAD; unreachable branches are not part of the loaded
history.
"""

from __future__ import annotations

import re
import shutil
import subprocess
from functools import lru_cache
from pathlib import Path

from .errors import (
    BackendUnavailable,
    CorruptHistory,
    FileAbsentAtCommit,
    UnknownCommit,
    UnreadableSource,
)
from .history import (
    KIND_ADDED,
    KIND_DELETED,
    KIND_MODIFIED,
    KIND_RENAMED,
    Commit,
    FileChange,
    Hunk,
    RepositoryHistory,
)

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_RECORD_SEP = "\x1e"
_FIELD_SEP = "\x1f"


def _git(repo: Path, *args: str, check: bool = True) -> str:
    exe = shutil.which("git")
    if exe is None:
        raise BackendUnavailable("git executable not found on PATH")
    proc = subprocess.run(
        [exe, "-C", str(repo), "-c", "core.quotepath=false", *args],
        capture_output=True,
        text=True,
    )
    if check and proc.returncode != 0:
        raise CorruptHistory(f"git {' '.join(args[:2])} failed: {proc.stderr.strip()}")
    return proc.stdout


def _unquote(path: str) -> str:
    if path.startswith('"') and path.endswith('"'):
        return path[1:-1].encode("latin-1", "backslashreplace").decode("unicode_escape")
    return path


def _strip_prefix(path: str) -> str | None:
    path = path.rstrip("\t").strip()
    if path == "/dev/null":
        return None
    if path.startswith(("a/", "b/")):
        path = path[2:]
    return _unquote(path)


def parse_unified_diff(text: str) -> list[FileChange]:
    """Parse ``git diff -U0`` output into FileChange records."""
    changes: list[FileChange] = []
    lines = text.splitlines()
    i = 0
    n = len(lines)
    while i < n:
        if not lines[i].startswith("diff --git "):
            i += 1
            continue
        header = lines[i]
        i += 1
        kind = KIND_MODIFIED
        before: str | None = None
        after: str | None = None
        is_binary = False
        hunks: list[Hunk] = []
        while i < n and not lines[i].startswith("diff --git "):
            line = lines[i]
            if line.startswith("new file mode"):
                kind = KIND_ADDED
            elif line.startswith("deleted file mode"):
                kind = KIND_DELETED
            elif line.startswith("rename from "):
                kind = KIND_RENAMED
                before = _unquote(line[len("rename from ") :])
            elif line.startswith("rename to "):
                after = _unquote(line[len("rename to ") :])
            elif line.startswith("--- "):
                before = _strip_prefix(line[4:])
            elif line.startswith("+++ "):
                after = _strip_prefix(line[4:])
            elif line.startswith("Binary files ") and line.endswith(" differ"):
                is_binary = True
                inner = line[len("Binary files ") : -len(" differ")]
                parts = inner.split(" and ")
                if len(parts) == 2:
                    if before is None:
                        before = _strip_prefix(parts[0])
                    if after is None:
                        after = _strip_prefix(parts[1])
            elif line == "GIT binary patch":
                is_binary = True
            elif _HUNK_RE.match(line):
                m = _HUNK_RE.match(line)
                old_start, old_count = int(m.group(1)), int(m.group(2) or "1")
                new_start, new_count = int(m.group(3)), int(m.group(4) or "1")
                i += 1
                old_lines: list[str] = []
                new_lines: list[str] = []
                while i < n:
                    body = lines[i]
                    if body.startswith("-"):
                        old_lines.append(body[1:])
                    elif body.startswith("+"):
                        new_lines.append(body[1:])
                    elif body.startswith("\\"):
                        pass  # "no newline at end of file"
                    else:
                        break
                    i += 1
                # zero-count sides anchor on the neighboring line; normalize
                # to "before this 1-based position"
                if old_count == 0:
                    old_start += 1
                if new_count == 0:
                    new_start += 1
                hunks.append(Hunk(old_start, tuple(old_lines), new_start, tuple(new_lines)))
                continue
            i += 1
        if before is None and after is None and not is_binary:
            # header-only records (mode changes, pure renames handled above)
            before = after = _fallback_paths(header)
        if kind == KIND_ADDED:
            before = None
        if kind == KIND_DELETED:
            after = None
        if kind == KIND_MODIFIED and (before is None or after is None):
            before = before if before is not None else after
            after = after if after is not None else before
        changes.append(
            FileChange(
                path_before=before,
                path_after=after,
                kind=kind,
                hunks=tuple(hunks),
                is_binary=is_binary,
            )
        )
    return changes


def _fallback_paths(header: str) -> str | None:
    # "diff --git a/X b/X"; ambiguous for exotic names, good enough for the rest
    rest = header[len("diff --git ") :]
    parts = rest.split(" b/", 1)
    if len(parts) == 2 and parts[0].startswith("a/"):
        return _unquote(parts[0][2:])
    return None


def load_git_history(repo: str | Path) -> RepositoryHistory:
    repo = Path(repo)
    if not repo.is_dir():
        raise UnreadableSource(f"{repo}: not a directory")
    probe = subprocess.run(
        [shutil.which("git") or "git", "-C", str(repo), "rev-parse", "--git-dir"],
        capture_output=True,
        text=True,
    )
    if probe.returncode != 0:
        raise UnreadableSource(f"{repo}: not a git repository")

    log = _git(
        repo,
        "log",
        "--topo-order",
        "--reverse",
        f"--format=%H{_FIELD_SEP}%P{_FIELD_SEP}%at{_FIELD_SEP}%ct{_FIELD_SEP}%B{_RECORD_SEP}",
        "HEAD",
    )
    empty_tree = _git(repo, "hash-object", "-t", "tree", "--stdin").strip()

    commits: list[Commit] = []
    for record in log.split(_RECORD_SEP):
        record = record.strip("\n")
        if not record.strip():
            continue
        cid, parents, at, ct, message = record.split(_FIELD_SEP, 4)
        cid = cid.strip()
        parent_ids = tuple(parents.split()) if parents.strip() else ()
        base = parent_ids[0] if parent_ids else empty_tree
        diff_text = _git(
            repo,
            "diff",
            "--no-color",
            "--no-ext-diff",
            "--unified=0",
            "--find-renames=50%",
            base,
            cid,
        )
        commits.append(
            Commit(
                id=cid,
                parents=parent_ids,
                author_timestamp=int(at),
                committer_timestamp=int(ct),
                message=message,
                changes=tuple(parse_unified_diff(diff_text)),
            )
        )

    @lru_cache(maxsize=4096)
    def snapshot(commit_id: str, path: str) -> tuple[str, ...]:
        proc = subprocess.run(
            [
                shutil.which("git") or "git",
                "-C",
                str(repo),
                "-c",
                "core.quotepath=false",
                "show",
                f"{commit_id}:{path}",
            ],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            err = proc.stderr.lower()
            if "invalid object name" in err or "bad revision" in err:
                raise UnknownCommit(commit_id)
            raise FileAbsentAtCommit(f"{path} at {commit_id}")
        return tuple(proc.stdout.splitlines())

    return RepositoryHistory(commits, snapshot_fn=snapshot)
