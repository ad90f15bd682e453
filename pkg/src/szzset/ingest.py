"""Building set-granularity link datasets from commit-level bug/fix pairs.

A commit-level link names one repository, one fixing commit, and one
inducing commit. Adaptation resolves each commit to its enclosing pull
request through a provider client, keeps the link only when both sides
resolve, and tallies every discard by its failure class. The inducing
commit resolves first; the first failure wins, so each input row lands in
exactly one bucket and len(records) + sum(tally) == len(links).

The provider answers a (repository, commit) query with::

    {"repository_found": true,
     "pull_requests": [{"number": 2, "commits": ["c3", "c4"]}]}

Responses are keyed "<repository>@<commit>" in a JSON cache file, so every
adaptation run can be replayed offline from recorded responses.
"""

from __future__ import annotations

import csv
import io
import json
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .commitsets import CommitSet, CommitSetIndex, LinkDataset, LinkRecord
from .errors import CorruptDataset, ProviderUnreachable, RateLimited
from .history import CommitId, RepositoryHistory

RESOLVED = "resolved"
MISSING_REPOSITORY = "missing_repository"
MISSING_PULL_REQUEST = "missing_pull_request"
FORK_AMBIGUOUS = "fork_ambiguous"

DISCARD_STATUSES = (MISSING_REPOSITORY, MISSING_PULL_REQUEST, FORK_AMBIGUOUS)

LINK_COLUMNS = ("repository", "fixing_commit", "inducing_commit")


@dataclass(frozen=True)
class CommitLevelLink:
    repository: str
    fixing_commit: CommitId
    inducing_commit: CommitId

    def __post_init__(self):
        if not (self.repository and self.fixing_commit and self.inducing_commit):
            raise CorruptDataset("commit-level link fields must be non-empty")


def load_commit_links(path: str | Path) -> list[CommitLevelLink]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CorruptDataset(f"{path}: {exc}") from exc
    return commit_links_from_csv(text, where=str(path))


def commit_links_from_csv(text: str, where: str = "<memory>") -> list[CommitLevelLink]:
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in LINK_COLUMNS if c not in (reader.fieldnames or ())]
    if missing:
        raise CorruptDataset(f"{where}: missing columns {', '.join(missing)}")
    links = []
    for row_no, row in enumerate(reader, start=2):
        values = [(row.get(c) or "").strip() for c in LINK_COLUMNS]
        if not all(values):
            raise CorruptDataset(f"{where}:{row_no}: empty field")
        links.append(CommitLevelLink(*values))
    return links


def commit_links_to_csv(links: list[CommitLevelLink]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(LINK_COLUMNS)
    for link in links:
        writer.writerow([link.repository, link.fixing_commit, link.inducing_commit])
    return out.getvalue()


# --- pull-request providers ------------------------------------------------


def _cache_key(repository: str, commit_id: CommitId) -> str:
    return f"{repository}@{commit_id}"


class RecordedResponseProvider:
    """Replays recorded responses; never goes online."""

    def __init__(self, responses: Mapping[str, dict]):
        self.responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> RecordedResponseProvider:
        try:
            return cls(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderUnreachable(f"response cache {path}: {exc}") from exc

    def query(self, repository: str, commit_id: CommitId) -> dict:
        key = _cache_key(repository, commit_id)
        try:
            return self.responses[key]
        except KeyError:
            raise ProviderUnreachable(f"no recorded response for {key}") from None


class HttpProvider:
    """POSTs {"repository", "commit"} as JSON and records every response."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self.recorded: dict[str, dict] = {}

    def query(self, repository: str, commit_id: CommitId) -> dict:
        key = _cache_key(repository, commit_id)
        if key in self.recorded:
            return self.recorded[key]
        body = json.dumps({"repository": repository, "commit": commit_id}).encode()
        request = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode())
        except urllib.error.HTTPError as exc:
            if exc.code == 429:
                raise RateLimited(f"{self.endpoint}: rate limited, retry later") from exc
            raise ProviderUnreachable(f"{self.endpoint}: HTTP {exc.code}") from exc
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise ProviderUnreachable(f"{self.endpoint}: {exc}") from exc
        self.recorded[key] = payload
        return payload

    def save_cache(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.recorded, sort_keys=True, indent=2) + "\n")


# --- adaptation --------------------------------------------------------------


@dataclass(frozen=True)
class Resolution:
    """Outcome of mapping one commit to its enclosing pull request."""

    status: str
    set_id: str | None = None
    commits: tuple[CommitId, ...] = ()


def resolve_commit_to_set(provider, repository: str, commit_id: CommitId) -> Resolution:
    """Resolve one commit to the unique pull request that contains it.

    A commit surfacing under two or more distinct pull requests cannot be
    assigned a canonical set: forks restart the pull-request counter, so the
    number alone does not identify an owner. Those resolve as ambiguous.
    """
    response = provider.query(repository, commit_id)
    if not response.get("repository_found", False):
        return Resolution(MISSING_REPOSITORY)
    try:
        distinct = {
            (p["number"], tuple(p["commits"]))
            for p in response.get("pull_requests") or []
        }
    except (KeyError, TypeError) as exc:
        raise CorruptDataset(
            f"malformed provider response for {_cache_key(repository, commit_id)}"
        ) from exc
    if not distinct:
        return Resolution(MISSING_PULL_REQUEST)
    if len(distinct) > 1:
        return Resolution(FORK_AMBIGUOUS)
    number, commits = next(iter(distinct))
    return Resolution(RESOLVED, set_id=f"{repository}#{number}", commits=commits)


def adapt_commit_links(
    links: list[CommitLevelLink], provider
) -> tuple[LinkDataset, dict[str, int]]:
    """Lift commit-level links to set granularity, tallying every discard.

    Each surviving row becomes one record whose bug id is synthesized as
    "<repository>:<fixing commit>" (with an ordinal suffix if several rows
    share a fixing commit), so output size plus tally always equals input
    size.
    """
    index = CommitSetIndex()
    records: list[LinkRecord] = []
    tally = {status: 0 for status in DISCARD_STATUSES}
    used_bug_ids: set[str] = set()
    for link in links:
        inducing = resolve_commit_to_set(provider, link.repository, link.inducing_commit)
        if inducing.status != RESOLVED:
            tally[inducing.status] += 1
            continue
        fixing = resolve_commit_to_set(provider, link.repository, link.fixing_commit)
        if fixing.status != RESOLVED:
            tally[fixing.status] += 1
            continue
        index.add(CommitSet(inducing.set_id, inducing.commits))
        index.add(CommitSet(fixing.set_id, fixing.commits))
        bug_id = f"{link.repository}:{link.fixing_commit}"
        ordinal = 2
        while bug_id in used_bug_ids:
            bug_id = f"{link.repository}:{link.fixing_commit}:{ordinal}"
            ordinal += 1
        used_bug_ids.add(bug_id)
        records.append(LinkRecord(bug_id, fixing.set_id, (inducing.set_id,)))
    return LinkDataset(records=records, index=index), tally


# --- linkability -------------------------------------------------------------


@dataclass(frozen=True)
class LinkabilityFlags:
    ghost_fix: bool
    extrinsic: bool
    no_shared_files: bool

    def linkable(self) -> bool:
        return not (self.ghost_fix or self.extrinsic or self.no_shared_files)


def compute_linkability(
    history: RepositoryHistory, index: CommitSetIndex, record: LinkRecord
) -> LinkabilityFlags:
    """Flag the structural reasons a link can never be retrieved by tracing.

    ghost_fix: the fixing set only ever added lines, so there is nothing to
    blame. extrinsic: no inducing set exists. no_shared_files: the two sides
    touch disjoint paths (post-change paths, pre-change for deletions).
    Extrinsic links skip the shared-file comparison; there is no inducing
    side, and the flag stays False rather than marking a vacuous disjointness.
    """
    fixing = index.get(record.fixing_set)
    fix_commits = [history.commit(c) for c in fixing.commits]
    ghost_fix = all(
        not h.old_lines for c in fix_commits for fc in c.changes for h in fc.hunks
    )
    if not record.inducing_sets:
        return LinkabilityFlags(ghost_fix=ghost_fix, extrinsic=True, no_shared_files=False)
    fix_paths: set[str] = set()
    for c in fix_commits:
        fix_paths |= c.touched_paths()
    inducing_paths: set[str] = set()
    for sid in record.inducing_sets:
        for cid in index.get(sid).commits:
            inducing_paths |= history.commit(cid).touched_paths()
    return LinkabilityFlags(
        ghost_fix=ghost_fix,
        extrinsic=False,
        no_shared_files=fix_paths.isdisjoint(inducing_paths),
    )


def dataset_linkability(
    history: RepositoryHistory, dataset: LinkDataset
) -> dict[str, LinkabilityFlags]:
    return {
        rec.bug_id: compute_linkability(history, dataset.index, rec)
        for rec in dataset.records
    }
