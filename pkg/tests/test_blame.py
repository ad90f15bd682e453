import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szzset.blame import (
    MODE_GRAPH,
    MODE_PLAIN,
    MODE_SKIP,
    LineRef,
    blame_lines,
    detect_refactoring,
    parse_skip_file,
)
from szzset.errors import EmptySkipFile
from szzset.history import Commit, FileChange, Hunk, RepositoryHistory
from szzset.lineclass import LineClass
from szzset.synthetic import HistoryBuilder, added, modified, random_history, renamed

from .oracles import expected_plain_origins


def _reindent_history():
    """c1 adds a line, c2 only re-indents it, c3 deletes it."""
    b = HistoryBuilder()
    b.add("c1", "m.c", ("int keep = 1;", "int target = 2;", "int tail = 3;"))
    b.replace("c2", "m.c", 2, 1, ("    int target = 2;",))
    b.replace("c3", "m.c", 2, 1, ())
    return b.build()


def test_plain_blames_the_reindent():
    h = _reindent_history()
    result = blame_lines(h, "c3", MODE_PLAIN)
    assert result.origins() == {"c2"}
    ref = next(iter(result.origin_map))
    assert ref == LineRef("c2", "m.c", 2, "    int target = 2;")


def test_graph_sees_through_whitespace_change():
    h = _reindent_history()
    assert blame_lines(h, "c3", MODE_GRAPH).origins() == {"c1"}


def test_skip_traverses_listed_commit():
    h = _reindent_history()
    result = blame_lines(h, "c3", MODE_SKIP, skip_list=frozenset({"c2"}))
    assert result.origins() == {"c1"}
    assert "c2" not in result.origins()


def test_skip_with_empty_list_equals_plain():
    h = _reindent_history()
    plain = blame_lines(h, "c3", MODE_PLAIN)
    skip = blame_lines(h, "c3", MODE_SKIP, skip_list=frozenset())
    assert plain.origin_map == skip.origin_map


def test_line_introduced_by_skipped_commit_is_untraceable():
    b = HistoryBuilder()
    b.add("c1", "m.c", ("int a = 1;",))
    b.replace("c2", "m.c", 1, 1, ("int a = 2;",))  # rewrites the only line
    b.replace("c3", "m.c", 1, 1, ())
    h = b.build()
    result = blame_lines(h, "c3", MODE_SKIP, skip_list=frozenset({"c2", "c1"}))
    assert result.origins() == frozenset()
    assert list(result.origin_map.values()) == [None]


def test_skip_file_added_by_skipped_commit_untraceable():
    b = HistoryBuilder()
    b.add("c1", "m.c", ("int a = 1;",))
    b.replace("c2", "m.c", 1, 1, ())
    h = b.build()
    # c1 created the file; skipping it leaves nothing older to blame
    result = blame_lines(h, "c2", MODE_SKIP, skip_list=frozenset({"c1"}))
    assert list(result.origin_map.values()) == [None]


def test_positional_shift_through_insertions_and_deletions():
    b = HistoryBuilder()
    b.add("c1", "m.c", tuple(f"int l{i} = {i};" for i in range(1, 6)))
    # c2 inserts two lines at the top: everything below shifts down by 2
    b.replace("c2", "m.c", 1, 0, ("int top1 = 0;", "int top2 = 0;"))
    # c3 rewrites what is now line 6 (originally line 4)
    b.replace("c3", "m.c", 6, 1, ("int l4 = 40;",))
    # c4 deletes the two inserted lines again: shifts back up
    b.replace("c4", "m.c", 1, 2, ())
    # the fix deletes lines 3 and 4 (originally l3 from c1, l4 from c3)
    b.replace("c5", "m.c", 3, 2, ())
    h = b.build()
    result = blame_lines(h, "c5", MODE_PLAIN)
    by_line = {ref.line_no: origin for ref, origin in result.origin_map.items()}
    assert by_line == {3: "c1", 4: "c3"}


def test_rename_is_traced_through():
    b = HistoryBuilder()
    b.add("c1", "old.c", ("int x = 1;", "int y = 2;"))
    content = b.state["old.c"]
    b.commit("c2", [renamed("old.c", "new.c", content, content)])
    b.replace("c3", "new.c", 2, 1, ())
    h = b.build()
    assert blame_lines(h, "c3", MODE_PLAIN).origins() == {"c1"}


def test_binary_changes_are_ignored_and_untraceable():
    c1 = Commit(
        "c1",
        (),
        1,
        1,
        changes=(
            added("f.c", ("int a = 1;",)),
            FileChange(path_before=None, path_after="img.png", kind="added", is_binary=True),
        ),
    )
    c2 = Commit(
        "c2",
        ("c1",),
        2,
        2,
        changes=(
            FileChange(
                path_before="img.png", path_after="img.png", kind="modified", is_binary=True
            ),
            modified("f.c", ("int a = 1;",), ()),
        ),
    )
    h = RepositoryHistory([c1, c2])
    result = blame_lines(h, "c2", MODE_PLAIN)
    # only the text deletion is a target; the binary change contributes none
    assert len(result.origin_map) == 1
    assert result.origins() == {"c1"}


def test_root_fix_has_no_targets():
    c1 = Commit("c1", (), 1, 1, changes=(added("f.c", ("a;",)),))
    h = RepositoryHistory([c1])
    assert blame_lines(h, "c1", MODE_PLAIN).origin_map == {}


def test_graph_ignores_blank_and_comment_targets():
    b = HistoryBuilder()
    b.add("c1", "m.c", ("// banner", "", "int real = 1;", "int gone = 2;"))
    # deletes the banner, the blank line and the last line; keeps "int real"
    b.replace("c2", "m.c", 1, 4, ("int real = 1;",))
    h = b.build()
    plain = blame_lines(h, "c2", MODE_PLAIN)
    assert sorted(ref.text for ref in plain.origin_map) == [
        "",
        "// banner",
        "int gone = 2;",
    ]
    ignored = frozenset({LineClass.BLANK, LineClass.COMMENT})
    result = blame_lines(h, "c2", MODE_GRAPH, ignore_classes=ignored)
    assert [ref.text for ref in result.origin_map] == ["int gone = 2;"]


def test_refactoring_threshold_is_per_file():
    big = tuple(f"int r{i} = {i};" for i in range(80))
    b = HistoryBuilder()
    b.add("c1", "m.c", big)
    b.edit("c2", "m.c", tuple(f"int r{i} = {i + 1};" for i in range(80)))  # 160 changed lines
    h = b.build()
    assert detect_refactoring(h, "c2", threshold=150)
    assert not detect_refactoring(h, "c2", threshold=160)
    assert not detect_refactoring(h, "c1", threshold=150)


def test_graph_traverses_refactoring_commits():
    lines = tuple(f"int v{i} = {i};" for i in range(90))
    b = HistoryBuilder()
    b.add("c1", "m.c", lines)
    # rewrite every line: 180 changed lines in one file, over the threshold
    b.edit("c2", "m.c", tuple(f"int v{i} = {i * 2};" for i in range(90)))
    b.replace("c3", "m.c", 5, 1, ())
    h = b.build()
    graph = blame_lines(h, "c3", MODE_GRAPH)
    assert graph.origins() == {"c1"}
    plain = blame_lines(h, "c3", MODE_PLAIN)
    assert plain.origins() == {"c2"}


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=50_000))
def test_plain_origins_match_last_writer_oracle(seed):
    h = random_history(seed)
    for fixing in h.topo_order[1:]:
        got = blame_lines(h, fixing, MODE_PLAIN).origins()
        assert got == expected_plain_origins(h, fixing)


def test_parse_skip_file(tmp_path):
    f = tmp_path / "skip.txt"
    f.write_text("# header\n\nabc123  # trailing note\n def456\n")
    assert parse_skip_file(f) == {"abc123", "def456"}
    with pytest.raises(EmptySkipFile):
        parse_skip_file(tmp_path / "missing.txt")
