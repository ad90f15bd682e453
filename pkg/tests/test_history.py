import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szzset.errors import (
    CorruptHistory,
    FileAbsentAtCommit,
    UnknownCommit,
    UnreadableSource,
)
from szzset.history import (
    Commit,
    FileChange,
    Hunk,
    RepositoryHistory,
    apply_hunks,
    history_from_json,
    history_to_json,
    load_history,
)
from szzset.synthetic import HistoryBuilder, added, modified, random_history

from .oracles import bfs_ancestors, replay_snapshot


def test_topo_order_linear(demo):
    assert demo.history.topo_order == ["c1", "c2", "c3", "c4", "c5", "c6", "c7"]


def test_snapshot_matches_unmemoized_replay(demo):
    h = demo.history
    for cid in h.topo_order:
        for path in ("app.c", "util.c", "notes.txt"):
            expected = replay_snapshot(h, cid, path)
            if expected is None:
                with pytest.raises(FileAbsentAtCommit):
                    h.snapshot(cid, path)
            else:
                assert h.snapshot(cid, path) == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_snapshot_replay_agreement_random(seed):
    h = random_history(seed)
    tip = h.topo_order[-1]
    paths = {p for c in h.commits.values() for p in c.touched_paths()}
    for path in sorted(paths):
        expected = replay_snapshot(h, tip, path)
        if expected is None:
            with pytest.raises(FileAbsentAtCommit):
                h.snapshot(tip, path)
        else:
            assert h.snapshot(tip, path) == expected


def _merge_history():
    # c1 <- c2 (edits f) <- m ; c1 <- c3 (edits g) <- m (second parent)
    c1 = Commit("c1", (), 10, 10, changes=(added("f.c", ("a;", "b;")), added("g.c", ("x;",))))
    c2 = Commit("c2", ("c1",), 20, 20, changes=(modified("f.c", ("a;", "b;"), ("a2;", "b;")),))
    c3 = Commit("c3", ("c1",), 30, 30, changes=(modified("g.c", ("x;",), ("x3;",)),))
    m = Commit(
        "m",
        ("c2", "c3"),
        40,
        40,
        # the merge's recorded diff is against its first parent c2
        changes=(modified("g.c", ("x;",), ("x3;",)),),
    )
    return RepositoryHistory([c1, c2, c3, m])


def test_merge_snapshot_follows_first_parent_plus_own_diff():
    h = _merge_history()
    assert h.snapshot("m", "f.c") == ("a2;", "b;")
    assert h.snapshot("m", "g.c") == ("x3;",)


def test_ancestors_match_bfs_over_all_parents():
    h = _merge_history()
    assert h.ancestors("m") == bfs_ancestors(h, "m") == frozenset({"c1", "c2", "c3"})
    assert h.ancestors("c1") == frozenset()


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_ancestors_match_bfs_random(seed):
    h = random_history(seed)
    tip = h.topo_order[-1]
    assert h.ancestors(tip) == bfs_ancestors(h, tip)


def test_duplicate_commit_id_rejected():
    c = Commit("c1", (), 1, 1)
    with pytest.raises(CorruptHistory):
        RepositoryHistory([c, c])


def test_dangling_parent_rejected():
    with pytest.raises(CorruptHistory, match="dangling"):
        RepositoryHistory([Commit("c1", ("nope",), 1, 1)])


def test_parent_cycle_rejected():
    a = Commit("a", ("b",), 1, 1)
    b = Commit("b", ("a",), 2, 2)
    with pytest.raises(CorruptHistory, match="cycle"):
        RepositoryHistory([a, b])


def test_overlapping_hunks_rejected():
    fc = FileChange(
        path_before="f.c",
        path_after="f.c",
        kind="modified",
        hunks=(Hunk(1, ("a;", "b;"), 1, ("x;",)), Hunk(2, ("b;",), 2, ("y;",))),
    )
    with pytest.raises(CorruptHistory, match="overlap"):
        RepositoryHistory([Commit("c1", (), 1, 1, changes=(fc,))])


def test_empty_hunk_rejected():
    with pytest.raises(CorruptHistory):
        Hunk(1, (), 1, ()).validate()


def test_added_change_shape_enforced():
    with pytest.raises(CorruptHistory):
        FileChange(path_before="old", path_after="new", kind="added").validate()


def test_mismatched_preimage_detected_on_replay():
    c1 = Commit("c1", (), 1, 1, changes=(added("f.c", ("a;",)),))
    bad = Commit(
        "c2",
        ("c1",),
        2,
        2,
        changes=(
            FileChange(
                path_before="f.c",
                path_after="f.c",
                kind="modified",
                hunks=(Hunk(1, ("different;",), 1, ("x;",)),),
            ),
        ),
    )
    h = RepositoryHistory([c1, bad])
    with pytest.raises(CorruptHistory, match="pre-image"):
        h.snapshot("c2", "f.c")


def test_apply_hunks_insertion_convention():
    # old_start of a pure insertion names the old line it lands before
    old = ("l1", "l2")
    out = apply_hunks(old, [Hunk(2, (), 2, ("new",))])
    assert out == ("l1", "new", "l2")
    assert apply_hunks(old, [Hunk(3, (), 3, ("tail",))]) == ("l1", "l2", "tail")


def test_unknown_commit_and_absent_file(demo):
    with pytest.raises(UnknownCommit):
        demo.history.snapshot("missing", "app.c")
    with pytest.raises(FileAbsentAtCommit):
        demo.history.snapshot("c1", "util.c")


def test_fixture_json_round_trip(tmp_path, demo):
    data = history_to_json(demo.history)
    path = tmp_path / "hist.json"
    path.write_text(json.dumps(data))
    h2 = load_history(path)
    assert h2.topo_order == demo.history.topo_order
    assert h2.snapshot("c6", "app.c") == demo.history.snapshot("c6", "app.c")


def test_loader_normalizes_single_sided_modified_path():
    h = history_from_json(
        [
            {
                "id": "c1",
                "parents": [],
                "committer_ts": 1,
                "changes": [
                    {
                        "path_after": "f.c",
                        "kind": "added",
                        "hunks": [{"old_start": 1, "new_start": 1, "new_lines": ["a;"]}],
                    }
                ],
            },
            {
                "id": "c2",
                "parents": ["c1"],
                "committer_ts": 2,
                "changes": [
                    {
                        "path_after": "f.c",
                        "kind": "modified",
                        "hunks": [
                            {
                                "old_start": 1,
                                "old_lines": ["a;"],
                                "new_start": 1,
                                "new_lines": ["b;"],
                            }
                        ],
                    }
                ],
            },
        ]
    )
    assert h.commits["c2"].changes[0].path_before == "f.c"


def test_missing_source_rejected(tmp_path):
    with pytest.raises(UnreadableSource):
        load_history(tmp_path / "nothing.json")


def test_builder_state_agrees_with_replay():
    b = HistoryBuilder()
    b.add("c1", "f.py", ("x = 1", "y = 2"))
    b.replace("c2", "f.py", 1, 1, ("x = 10", "x2 = 11"))
    h = b.build()
    assert h.snapshot("c2", "f.py") == b.state["f.py"]
