"""Commit-set granularity: grouping commits, aggregating candidates, datasets.

A commit-set is the unit a reviewer accepts in one go (a pull request or a
patch series). Histories that were rebased before landing keep each set's
commits contiguous, but nothing here relies on that. Commits outside every
known set resolve to a virtual singleton set named ``virtual:<commit id>``,
so downstream arithmetic never loses candidates.

The ground-truth dataset format is JSONL, one link per line::

    {"bug_id": "...",
     "fixing": {"set_id": "...", "commits": ["..."]},
     "inducing": [{"set_id": "...", "commits": ["..."]}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import CorruptDataset
from .history import CommitId, RepositoryHistory
from .variants import (
    DEFAULT_REFACTORING_THRESHOLD,
    CandidateReport,
    Variant,
    parse_variant,
    run_variant,
)

VIRTUAL_PREFIX = "virtual:"


@dataclass(frozen=True)
class CommitSet:
    id: str
    commits: tuple[CommitId, ...]
    virtual: bool = False


def virtual_set(commit_id: CommitId) -> CommitSet:
    return CommitSet(id=VIRTUAL_PREFIX + commit_id, commits=(commit_id,), virtual=True)


class CommitSetIndex:
    """All known real commit-sets; each commit belongs to at most one."""

    def __init__(self, sets: Iterable[CommitSet] = ()):
        self.sets: dict[str, CommitSet] = {}
        self.by_commit: dict[CommitId, str] = {}
        for cs in sets:
            self.add(cs)

    def add(self, cs: CommitSet) -> None:
        if cs.virtual or cs.id.startswith(VIRTUAL_PREFIX):
            raise CorruptDataset(f"virtual set {cs.id} cannot be indexed")
        existing = self.sets.get(cs.id)
        if existing is not None:
            if existing.commits != cs.commits:
                raise CorruptDataset(f"set {cs.id} declared twice with different commits")
            return
        for c in cs.commits:
            owner = self.by_commit.get(c)
            if owner is not None and owner != cs.id:
                raise CorruptDataset(f"commit {c} belongs to both {owner} and {cs.id}")
        self.sets[cs.id] = cs
        for c in cs.commits:
            self.by_commit[c] = cs.id

    def get(self, set_id: str) -> CommitSet:
        try:
            return self.sets[set_id]
        except KeyError:
            raise CorruptDataset(f"unknown commit-set {set_id}") from None


def resolve_set(index: CommitSetIndex, commit_id: CommitId) -> CommitSet:
    """The real set owning the commit, or a virtual singleton."""
    owner = index.by_commit.get(commit_id)
    if owner is None:
        return virtual_set(commit_id)
    return index.sets[owner]


@dataclass(frozen=True)
class LinkRecord:
    """One ground-truth link: a bug, its fixing set, its inducing sets."""

    bug_id: str
    fixing_set: str
    inducing_sets: tuple[str, ...]


@dataclass
class LinkDataset:
    records: list[LinkRecord]
    index: CommitSetIndex

    def record(self, bug_id: str) -> LinkRecord:
        for rec in self.records:
            if rec.bug_id == bug_id:
                return rec
        raise CorruptDataset(f"unknown bug id {bug_id}")


@dataclass
class AggregatedCandidates:
    """Per-link variant output at commit-set granularity.

    ``contributing`` keeps provenance: for every candidate set, which
    (input commit, candidate commit) pairs produced it.
    """

    fixing_set: str
    variant: Variant
    candidate_sets: frozenset[str] = frozenset()
    contributing: dict[str, set[tuple[CommitId, CommitId]]] = field(default_factory=dict)

    def sets_contributed_by(self, input_commit: CommitId) -> frozenset[str]:
        return frozenset(
            sid
            for sid, pairs in self.contributing.items()
            if any(ic == input_commit for ic, _ in pairs)
        )


def aggregate(
    history: RepositoryHistory,
    index: CommitSetIndex,
    fixing_set: CommitSet,
    variant: str | Variant,
    skip_list: frozenset[CommitId] = frozenset(),
    input_filter: Callable[[CommitId], bool] | None = None,
    refactoring_threshold: int = DEFAULT_REFACTORING_THRESHOLD,
) -> AggregatedCandidates:
    """Union the variant's candidates over the set's commits, as sets.

    ``input_filter`` drops fixing commits before any tracing happens, so
    aggregating with a filter equals aggregating the filtered subset.
    """
    variant = parse_variant(variant)
    out = AggregatedCandidates(fixing_set=fixing_set.id, variant=variant)
    contributing: dict[str, set[tuple[CommitId, CommitId]]] = {}
    for commit_id in fixing_set.commits:
        if input_filter is not None and not input_filter(commit_id):
            continue
        report: CandidateReport = run_variant(
            history,
            commit_id,
            variant,
            skip_list=skip_list,
            refactoring_threshold=refactoring_threshold,
        )
        for cand in report.candidates:
            cs = resolve_set(index, cand)
            contributing.setdefault(cs.id, set()).add((commit_id, cand))
    out.candidate_sets = frozenset(contributing)
    out.contributing = contributing
    return out


# --- dataset IO ----------------------------------------------------------------


def _set_from_json(obj, index: CommitSetIndex, where: str) -> str:
    try:
        cs = CommitSet(id=str(obj["set_id"]), commits=tuple(obj["commits"]))
    except (KeyError, TypeError) as exc:
        raise CorruptDataset(f"{where}: malformed commit-set: {exc}") from exc
    if not cs.commits:
        raise CorruptDataset(f"{where}: empty commit-set {cs.id}")
    index.add(cs)
    return cs.id


def load_dataset(path: str | Path) -> LinkDataset:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CorruptDataset(f"{path}: {exc}") from exc
    return dataset_from_jsonl(text, where=str(path))


def dataset_from_jsonl(text: str, where: str = "<memory>") -> LinkDataset:
    index = CommitSetIndex()
    records: list[LinkRecord] = []
    seen_bugs: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        spot = f"{where}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptDataset(f"{spot}: {exc}") from exc
        try:
            bug_id = str(obj["bug_id"])
            fixing = obj["fixing"]
            inducing = obj["inducing"]
        except (KeyError, TypeError) as exc:
            raise CorruptDataset(f"{spot}: missing field: {exc}") from exc
        if bug_id in seen_bugs:
            raise CorruptDataset(f"{spot}: duplicate bug id {bug_id}")
        seen_bugs.add(bug_id)
        fixing_id = _set_from_json(fixing, index, spot)
        inducing_ids = tuple(_set_from_json(o, index, spot) for o in inducing)
        records.append(LinkRecord(bug_id, fixing_id, inducing_ids))
    return LinkDataset(records=records, index=index)


def dataset_to_jsonl(dataset: LinkDataset) -> str:
    lines = []
    for rec in dataset.records:
        fixing = dataset.index.get(rec.fixing_set)
        obj = {
            "bug_id": rec.bug_id,
            "fixing": {"set_id": fixing.id, "commits": list(fixing.commits)},
            "inducing": [
                {
                    "set_id": sid,
                    "commits": list(dataset.index.get(sid).commits),
                }
                for sid in rec.inducing_sets
            ],
        }
        lines.append(json.dumps(obj, sort_keys=True))
    return "\n".join(lines) + "\n" if lines else ""


def save_dataset(dataset: LinkDataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_jsonl(dataset))
