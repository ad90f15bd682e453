"""Synthetic histories: builders, a seeded random generator, benchmark corpora.

Everything here is deterministic given the seed, so fixtures can be rebuilt
on the fly by tests and scripts instead of being checked in. Diffs are
derived from before/after file contents with difflib, which guarantees the
hunks replay exactly.
"""

from __future__ import annotations

import difflib
import random
from dataclasses import dataclass

from .commitsets import CommitSet, CommitSetIndex, LinkDataset, LinkRecord
from .ingest import CommitLevelLink
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

Lines = tuple[str, ...]


def diff_hunks(old, new) -> tuple[Hunk, ...]:
    sm = difflib.SequenceMatcher(a=list(old), b=list(new), autojunk=False)
    hunks = []
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            continue
        hunks.append(
            Hunk(
                old_start=i1 + 1,
                old_lines=tuple(old[i1:i2]),
                new_start=j1 + 1,
                new_lines=tuple(new[j1:j2]),
            )
        )
    return tuple(hunks)


def added(path: str, lines) -> FileChange:
    return FileChange(
        path_before=None,
        path_after=path,
        kind=KIND_ADDED,
        hunks=(Hunk(1, (), 1, tuple(lines)),) if lines else (),
    )


def deleted(path: str, old_lines) -> FileChange:
    return FileChange(
        path_before=path,
        path_after=None,
        kind=KIND_DELETED,
        hunks=(Hunk(1, tuple(old_lines), 1, ()),) if old_lines else (),
    )


def modified(path: str, old, new) -> FileChange:
    return FileChange(
        path_before=path,
        path_after=path,
        kind=KIND_MODIFIED,
        hunks=diff_hunks(old, new),
    )


def renamed(path_before: str, path_after: str, old, new=None) -> FileChange:
    return FileChange(
        path_before=path_before,
        path_after=path_after,
        kind=KIND_RENAMED,
        hunks=diff_hunks(old, new) if new is not None else (),
    )


class HistoryBuilder:
    """Grows a linear history while tracking live file contents."""

    def __init__(self, start_ts: int = 1_600_000_000):
        self.commits: list[Commit] = []
        self.state: dict[str, Lines] = {}
        self.ts = start_ts

    def tick(self, step: int = 60) -> int:
        self.ts += step
        return self.ts

    def commit(self, cid: str, changes, message: str = "", parents=None) -> str:
        if parents is None:
            parents = (self.commits[-1].id,) if self.commits else ()
        ts = self.tick()
        self.commits.append(
            Commit(
                id=cid,
                parents=tuple(parents),
                author_timestamp=ts - 5,
                committer_timestamp=ts,
                message=message,
                changes=tuple(changes),
            )
        )
        for fc in changes:
            if fc.kind == KIND_ADDED:
                self.state[fc.path_after] = tuple(
                    line for h in fc.hunks for line in h.new_lines
                )
            elif fc.kind == KIND_DELETED:
                self.state.pop(fc.path_before, None)
            else:
                old = self.state.pop(fc.path_before)
                new = list(old)
                for h in sorted(fc.hunks, key=lambda h: -h.old_start):
                    new[h.old_start - 1 : h.old_start - 1 + len(h.old_lines)] = list(
                        h.new_lines
                    )
                self.state[fc.path_after] = tuple(new)
        return cid

    def add(self, cid: str, path: str, lines) -> str:
        return self.commit(cid, [added(path, tuple(lines))])

    def edit(self, cid: str, path: str, new_lines) -> str:
        return self.commit(cid, [modified(path, self.state[path], tuple(new_lines))])

    def replace(self, cid: str, path: str, start: int, count: int, repl) -> str:
        """Swap ``count`` lines from 1-based ``start`` for ``repl``."""
        old = self.state[path]
        new = old[: start - 1] + tuple(repl) + old[start - 1 + count :]
        return self.edit(cid, path, new)

    def build(self) -> RepositoryHistory:
        return RepositoryHistory(list(self.commits))


# --- canonical demo ------------------------------------------------------------


@dataclass
class DemoFixture:
    history: RepositoryHistory
    dataset: LinkDataset


def two_origin_demo() -> DemoFixture:
    """Linear seven-commit history whose fix traces to three older commits.

    The fix (c6, in set CS3) rewrites three lines of app.c that were last
    written by c1, c3 and c4, so plain tracing yields {c1, c3, c4}; at set
    granularity that aggregates to {CS1, CS2}. c7 belongs to no set and is
    what virtual resolution is for.
    """
    b = HistoryBuilder()
    b.add(
        "c1",
        "app.c",
        (
            "int shared_total(int n) {",
            "  int acc = n;",
            "  acc += 2;",
            "  return acc;",
            "}",
        ),
    )
    b.add("c2", "util.c", ("int helper(void) {", "  return 7;", "}"))
    b.replace("c3", "app.c", 2, 1, ("  int acc = n + 1;",))
    b.replace("c4", "app.c", 3, 1, ("  acc += 3;",))
    b.add("c5", "notes.txt", ("release checklist",))
    b.replace(
        "c6",
        "app.c",
        1,
        3,
        (
            "int shared_total(int n, int base) {",
            "  int acc = base + n;",
            "  acc += 4;",
        ),
    )
    b.replace("c7", "notes.txt", 1, 1, ("release checklist v2",))
    history = b.build()
    index = CommitSetIndex(
        [
            CommitSet("CS1", ("c1", "c2")),
            CommitSet("CS2", ("c3", "c4")),
            CommitSet("CS3", ("c5", "c6")),
        ]
    )
    records = [LinkRecord(bug_id="bug1", fixing_set="CS3", inducing_sets=("CS2",))]
    return DemoFixture(history=history, dataset=LinkDataset(records=records, index=index))


# --- seeded random histories ----------------------------------------------------


_EXTS = ("c", "py", "txt")


def _gen_line(rng: random.Random, ext: str, counter: list[int]) -> str:
    counter[0] += 1
    n = counter[0]
    roll = rng.random()
    if roll < 0.05:
        return ""
    if roll < 0.18:
        if ext == "c":
            return f"// note {n}"
        if ext == "py":
            return f"# note {n}"
        return f"note {n}"
    if roll < 0.23:
        # deliberate duplicate-looking content to stress positional tracing
        return "int tmp = 0;" if ext == "c" else "tmp = 0"
    indent = " " * (2 * rng.randint(0, 2))
    return f"{indent}v{n} = {rng.randint(0, 999)};"


def random_history(
    seed: int,
    max_commits: int = 12,
    max_files: int = 5,
    max_file_lines: int = 60,
) -> RepositoryHistory:
    """Linear history with seeded random adds, edits, deletes and renames."""
    rng = random.Random(seed)
    counter = [0]
    b = HistoryBuilder(start_ts=1_500_000_000 + rng.randint(0, 10_000))
    seq = [0]

    def new_path() -> str:
        seq[0] += 1
        return f"f{seq[0]}.{rng.choice(_EXTS)}"

    def gen_lines(ext: str, k: int) -> tuple[str, ...]:
        return tuple(_gen_line(rng, ext, counter) for _ in range(k))

    n_commits = rng.randint(2, max_commits)
    for i in range(n_commits):
        cid = f"c{i:02d}"
        changes = []
        touched: set[str] = set()
        for _ in range(rng.randint(1, 3)):
            live = [p for p in b.state if p not in touched]
            can_add = len(b.state) < max_files
            roll = rng.random()
            if not b.state or (can_add and roll < 0.3):
                path = new_path()
                ext = path.rsplit(".", 1)[-1]
                lines = gen_lines(ext, rng.randint(1, 8))
                changes.append(added(path, lines))
                touched.add(path)
            elif live and roll < 0.36 and len(b.state) > 1:
                path = rng.choice(sorted(live))
                changes.append(deleted(path, b.state[path]))
                touched.add(path)
            elif live and roll < 0.43:
                path = rng.choice(sorted(live))
                target = new_path()
                old = b.state[path]
                new = old if rng.random() < 0.5 else _edit_lines(
                    rng, old, counter, target, max_file_lines
                )
                changes.append(renamed(path, target, old, new))
                touched.update({path, target})
            elif live:
                path = rng.choice(sorted(live))
                ext = path.rsplit(".", 1)[-1]
                old = b.state[path]
                new = _edit_lines(rng, old, counter, path, max_file_lines)
                if new == old:
                    continue
                changes.append(modified(path, old, new))
                touched.add(path)
        if not changes:
            path = new_path() if len(b.state) < max_files else sorted(b.state)[0]
            if path in b.state:
                old = b.state[path]
                new = old + gen_lines(path.rsplit(".", 1)[-1], 1)
                changes.append(modified(path, old, new[:max_file_lines]))
            else:
                changes.append(added(path, gen_lines(path.rsplit(".", 1)[-1], 2)))
        b.commit(cid, changes)
    return b.build()


def _edit_lines(rng, old, counter, path, max_file_lines) -> tuple[str, ...]:
    ext = path.rsplit(".", 1)[-1]
    lines = list(old)
    op = rng.random()
    if not lines or (op < 0.35 and len(lines) < max_file_lines):
        pos = rng.randint(0, len(lines))
        lines[pos:pos] = [_gen_line(rng, ext, counter) for _ in range(rng.randint(1, 3))]
    elif op < 0.6 and len(lines) > 1:
        start = rng.randrange(len(lines))
        k = min(rng.randint(1, 3), len(lines) - start)
        del lines[start : start + k]
    else:
        start = rng.randrange(len(lines))
        k = min(rng.randint(1, 3), len(lines) - start)
        if rng.random() < 0.15:
            # whitespace-only rewrite, interesting for graph mode
            lines[start : start + k] = [
                "  " + l.strip() if l.strip() else l for l in lines[start : start + k]
            ]
        else:
            lines[start : start + k] = [
                _gen_line(rng, ext, counter) for _ in range(rng.randint(1, 3))
            ]
    return tuple(lines[:max_file_lines])


# --- benchmark corpus ------------------------------------------------------------


@dataclass
class Benchmark:
    history: RepositoryHistory
    dataset: LinkDataset


def make_benchmark(seed: int = 7, n_links: int = 12) -> Benchmark:
    """Ground-truthed corpus with a mix of clean, noisy and unlinkable links.

    Every fifth link is special (ghost fix, extrinsic bug, disjoint files,
    or an all-noise fix); the rest pair inducing edits with a fix whose
    commits split into genuine and off-target ones.
    """
    rng = random.Random(seed)
    b = HistoryBuilder(start_ts=1_550_000_000)
    sets: list[CommitSet] = []
    records: list[LinkRecord] = []
    seq = [0]

    def cid() -> str:
        seq[0] += 1
        return f"m{seq[0]:03d}"

    def code(k: int, tag: str) -> tuple[str, ...]:
        out = []
        for j in range(k):
            if j == 0:
                out.append(f"// {tag}")
            else:
                out.append(f"int {tag}_{j} = {rng.randint(0, 99)};")
        return tuple(out)

    for k in range(n_links):
        path = f"mod{k}.c"
        base = b.add(cid(), path, code(8, f"m{k}"))
        special = ("ghost", "extrinsic", "nofiles", "allbad")[k % 4] if k % 5 == 4 else None

        i1 = b.replace(cid(), path, 3, 1, (f"int m{k}_bug = -1;",))
        i2 = b.replace(cid(), path, 6, 1, (f"int m{k}_bug2 = -2;",))
        inducing = CommitSet(f"IS{k}", (i1, i2))
        if special != "extrinsic":
            # an extrinsic bug has no in-repo inducing set; the edits above
            # stay unassigned and surface as virtual candidates
            sets.append(inducing)

        noise = None
        if rng.random() < 0.6:
            noise = b.replace(cid(), path, 8, 1, (f"int m{k}_noise = 9;",))

        fix_commits: list[str] = []
        if special == "ghost":
            g = b.commit(cid(), [modified(path, b.state[path], b.state[path] + (f"int m{k}_guard = 1;",))])
            fix_commits = [g]
        elif special == "nofiles":
            other = f"other{k}.c"
            b.add(cid(), other, code(4, f"o{k}"))
            f1 = b.replace(cid(), other, 2, 1, (f"int o{k}_fix = 3;",))
            fix_commits = [f1]
        elif special == "allbad":
            target_line = 1 if noise is None else 8
            f1 = b.replace(cid(), path, target_line, 1, (f"int m{k}_wrong = 5;",))
            fix_commits = [f1]
        else:
            good = b.replace(cid(), path, 3, 1, (f"int m{k}_fixed = 1;",))
            fix_commits.append(good)
            if rng.random() < 0.7:
                bad_line = 8 if noise is not None else 1
                bad = b.replace(cid(), path, bad_line, 1, (f"int m{k}_extra = 2;",))
                fix_commits.append(bad)
            if rng.random() < 0.4:
                good2 = b.replace(cid(), path, 6, 1, (f"int m{k}_fixed2 = 2;",))
                fix_commits.append(good2)

        fixing = CommitSet(f"FS{k}", tuple(fix_commits))
        sets.append(fixing)
        inducing_ids = () if special == "extrinsic" else (inducing.id,)
        records.append(LinkRecord(bug_id=f"bug{k}", fixing_set=fixing.id, inducing_sets=inducing_ids))

    index = CommitSetIndex(sets)
    return Benchmark(history=b.build(), dataset=LinkDataset(records=records, index=index))


ADAPTATION_TOTAL = 1930
ADAPTATION_SURVIVORS = 145
ADAPTATION_DISCARDS = {
    "missing_repository": 100,
    "missing_pull_request": 1680,
    "fork_ambiguous": 5,
}


def make_adaptation_fixture() -> tuple[list[CommitLevelLink], dict[str, dict]]:
    """1,930 commit-level links plus recorded responses that resolve them.

    145 links survive; the rest split into 100 missing repositories, 1,680
    missing pull requests, and 5 fork ambiguities. Failures alternate sides:
    even-indexed missing-pull-request rows fail on the inducing commit (the
    fixing commit is then never queried), odd ones on the fixing commit, and
    the last two fork rows are ambiguous on the fixing side only.
    """
    links: list[CommitLevelLink] = []
    cache: dict[str, dict] = {}

    def found(*pulls) -> dict:
        return {"repository_found": True, "pull_requests": list(pulls)}

    def pr(number: int, *commits: str) -> dict:
        return {"number": number, "commits": list(commits)}

    for k in range(ADAPTATION_SURVIVORS):
        repo = f"org/alive{k}"
        fix, ind = f"{repo}-f0", f"{repo}-i0"
        links.append(CommitLevelLink(repo, fix, ind))
        cache[f"{repo}@{ind}"] = found(pr(1, ind, f"{repo}-i1"))
        cache[f"{repo}@{fix}"] = found(pr(2, fix))

    for k in range(ADAPTATION_DISCARDS["missing_repository"]):
        repo = f"org/norepo{k}"
        fix, ind = f"{repo}-f0", f"{repo}-i0"
        links.append(CommitLevelLink(repo, fix, ind))
        gone = {"repository_found": False, "pull_requests": []}
        cache[f"{repo}@{ind}"] = gone
        cache[f"{repo}@{fix}"] = gone

    for k in range(ADAPTATION_DISCARDS["missing_pull_request"]):
        repo = f"org/nopr{k}"
        fix, ind = f"{repo}-f0", f"{repo}-i0"
        links.append(CommitLevelLink(repo, fix, ind))
        if k % 2 == 0:
            cache[f"{repo}@{ind}"] = found()
        else:
            cache[f"{repo}@{ind}"] = found(pr(1, ind))
            cache[f"{repo}@{fix}"] = found()

    for k in range(ADAPTATION_DISCARDS["fork_ambiguous"]):
        repo = f"org/fork{k}"
        fix, ind = f"{repo}-f0", f"{repo}-i0"
        links.append(CommitLevelLink(repo, fix, ind))
        if k < 3:
            cache[f"{repo}@{ind}"] = found(pr(1, ind), pr(1, ind, f"{repo}-x"))
        else:
            cache[f"{repo}@{ind}"] = found(pr(1, ind))
            cache[f"{repo}@{fix}"] = found(pr(1, fix), pr(1, fix, f"{repo}-x"))
    return links, cache
