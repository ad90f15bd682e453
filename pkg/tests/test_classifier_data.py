"""Feature extraction, linker labeling, and class rebalancing."""

from __future__ import annotations

import numpy as np
import pytest

from szzset.classifier import (
    BAD,
    EXCLUDED,
    FEATURE_NAMES,
    GOOD,
    SCHEME_ALL_VARIANTS,
    SCHEME_SINGLE,
    SamplerSpec,
    extract_features,
    feature_matrix,
    features_to_csv,
    label_all_variants,
    label_commits,
    label_single,
    resample,
    training_rows,
)
from szzset.commitsets import AggregatedCandidates, CommitSet, aggregate
from szzset.errors import CommitNotInSet, InsufficientMinority, MissingProvenance
from szzset.synthetic import HistoryBuilder, added, make_benchmark, modified, two_origin_demo
from szzset.variants import ALL_VARIANTS, Variant


# --- features --------------------------------------------------------------------


def _four_commit_set():
    """t3 adds 5 lines and deletes 2 across 2 files; set adds 20 in total."""
    b = HistoryBuilder()
    b.add("t0", "a.c", ("a1", "a2", "a3"))
    b.add("t1", "c.c", tuple(f"c{i}" for i in range(7)))
    b.add("t2", "d.c", ("d1", "d2", "d3"))
    b.commit(
        "t3",
        [
            modified("a.c", ("a1", "a2", "a3"), ("a1", "x1", "x2", "x3", "x4")),
            added("b.c", ("b1",)),
        ],
    )
    b.add("t4", "e.c", tuple(f"e{i}" for i in range(5)))
    cs = CommitSet("S", ("t1", "t2", "t3", "t4"))
    return b.build(), cs


def test_feature_example_counts_shares_and_order():
    history, cs = _four_commit_set()
    fv = extract_features(history, cs, "t3")
    assert (fv.addition, fv.deletion, fv.files) == (5, 2, 2)
    assert fv.cs_addition == pytest.approx(5 / 20)
    assert fv.cs_deletion == pytest.approx(1.0)
    assert fv.cs_files == pytest.approx(2 / 5)
    assert fv.order == pytest.approx(2 / 3)
    assert fv.cs_shared_files == 0


def test_feature_order_spans_unit_interval():
    history, cs = _four_commit_set()
    orders = [extract_features(history, cs, c).order for c in cs.commits]
    assert orders == pytest.approx([0.0, 1 / 3, 2 / 3, 1.0])


def test_demo_fixture_features():
    demo = two_origin_demo()
    cs = demo.dataset.index.get("CS3")
    c5 = extract_features(demo.history, cs, "c5")
    assert (c5.addition, c5.deletion, c5.files) == (1, 0, 1)
    assert c5.cs_addition == pytest.approx(0.25)
    assert c5.cs_deletion == 0.0
    assert c5.cs_files == pytest.approx(0.5)
    assert c5.order == 0.0
    assert c5.cs_shared_files == 0
    c6 = extract_features(demo.history, cs, "c6")
    assert (c6.addition, c6.deletion, c6.files) == (3, 3, 1)
    assert c6.cs_addition == pytest.approx(0.75)
    assert c6.cs_deletion == pytest.approx(1.0)
    assert c6.order == 1.0


def test_singleton_set_order_and_shares():
    b = HistoryBuilder()
    b.add("s1", "f.c", ("one", "two"))
    history = b.build()
    fv = extract_features(history, CommitSet("S", ("s1",)), "s1")
    assert fv.order == 0.0
    assert fv.cs_addition == 1.0
    assert fv.cs_files == 1.0
    assert fv.cs_shared_files == 0


def test_zero_total_share_falls_back_to_zero():
    b = HistoryBuilder()
    b.add("base", "g.c", ("l1", "l2", "l3"))
    b.replace("d1", "g.c", 1, 1, ())
    b.replace("d2", "g.c", 1, 1, ())
    history = b.build()
    cs = CommitSet("D", ("d1", "d2"))
    fv = extract_features(history, cs, "d1")
    assert fv.addition == 0
    assert fv.cs_addition == 0.0
    assert fv.cs_deletion == pytest.approx(0.5)


def test_shared_files_detected_between_siblings():
    b = HistoryBuilder()
    b.add("w1", "h.c", ("l1", "l2"))
    b.replace("w2", "h.c", 1, 1, ("l1b",))
    history = b.build()
    cs = CommitSet("W", ("w1", "w2"))
    assert extract_features(history, cs, "w1").cs_shared_files == 1
    assert extract_features(history, cs, "w2").cs_shared_files == 1


def test_commit_outside_set_rejected():
    demo = two_origin_demo()
    cs = demo.dataset.index.get("CS3")
    with pytest.raises(CommitNotInSet):
        extract_features(demo.history, cs, "c1")


def test_feature_matrix_and_csv_header():
    demo = two_origin_demo()
    cs = demo.dataset.index.get("CS3")
    matrix = feature_matrix(demo.history, [(cs, "c5"), (cs, "c6")])
    assert matrix.shape == (2, 8)
    text = features_to_csv(matrix)
    assert text.splitlines()[0] == ",".join(FEATURE_NAMES)
    assert len(text.splitlines()) == 3
    assert feature_matrix(demo.history, []).shape == (0, 8)


def test_benchmark_feature_invariants():
    bench = make_benchmark()
    for rec in bench.dataset.records:
        cs = bench.dataset.index.get(rec.fixing_set)
        rows = [extract_features(bench.history, cs, c) for c in cs.commits]
        for fv in rows:
            assert 0.0 <= fv.cs_addition <= 1.0
            assert 0.0 <= fv.cs_deletion <= 1.0
            assert 0.0 <= fv.cs_files <= 1.0
            assert 0.0 <= fv.order <= 1.0
            assert fv.cs_shared_files in (0, 1)
        if any(fv.addition for fv in rows):
            assert sum(fv.cs_addition for fv in rows) == pytest.approx(1.0)
        if len(rows) > 1:
            assert sorted(fv.order for fv in rows) == pytest.approx(
                [i / (len(rows) - 1) for i in range(len(rows))]
            )


# --- labeling --------------------------------------------------------------------


def _demo_outputs(variant):
    demo = two_origin_demo()
    cs = demo.dataset.index.get("CS3")
    return demo, {"bug1": aggregate(demo.history, demo.dataset.index, cs, variant)}


def test_label_single_plain_tracing():
    demo, outputs = _demo_outputs(Variant.B)
    labels = label_single(demo.dataset, outputs, Variant.B)
    assert labels[("bug1", "c5")] == BAD
    assert labels[("bug1", "c6")] == GOOD


def test_label_single_largest_candidate_misses():
    # the largest candidate of c6 is c1, whose set is not the true one
    demo, outputs = _demo_outputs(Variant.L)
    labels = label_single(demo.dataset, outputs, Variant.L)
    assert labels[("bug1", "c6")] == BAD
    assert labels[("bug1", "c5")] == BAD


def test_label_single_most_recent_hits():
    demo, outputs = _demo_outputs(Variant.R)
    labels = label_single(demo.dataset, outputs, Variant.R)
    assert labels[("bug1", "c6")] == GOOD


def _demo_provenance():
    demo = two_origin_demo()
    cs = demo.dataset.index.get("CS3")
    provenance = {
        v: {"bug1": aggregate(demo.history, demo.dataset.index, cs, v)}
        for v in ALL_VARIANTS
    }
    return demo, provenance


def test_label_all_variants_excludes_disagreement():
    demo, provenance = _demo_provenance()
    labels = label_all_variants(demo.dataset, provenance)
    assert labels[("bug1", "c5")] == BAD
    assert labels[("bug1", "c6")] == EXCLUDED


def test_label_commits_dispatch():
    demo, provenance = _demo_provenance()
    single = label_commits(demo.dataset, provenance, SCHEME_SINGLE, variant=Variant.B)
    assert single[("bug1", "c6")] == GOOD
    both = label_commits(demo.dataset, provenance, SCHEME_ALL_VARIANTS)
    assert both[("bug1", "c6")] == EXCLUDED
    with pytest.raises(ValueError):
        label_commits(demo.dataset, provenance, SCHEME_SINGLE)
    with pytest.raises(ValueError):
        label_commits(demo.dataset, provenance, "majority")


def test_label_commits_missing_variant_provenance():
    demo, provenance = _demo_provenance()
    del provenance[Variant.AG]
    with pytest.raises(MissingProvenance):
        label_commits(demo.dataset, provenance, SCHEME_ALL_VARIANTS)
    with pytest.raises(MissingProvenance):
        label_commits(demo.dataset, provenance, SCHEME_SINGLE, variant=Variant.AG)


def test_label_single_missing_link_output():
    demo, outputs = _demo_outputs(Variant.B)
    with pytest.raises(MissingProvenance):
        label_single(demo.dataset, {}, Variant.B)
    stripped = AggregatedCandidates(
        fixing_set="CS3",
        variant=Variant.B,
        candidate_sets=outputs["bug1"].candidate_sets,
        contributing={},
    )
    with pytest.raises(MissingProvenance):
        label_single(demo.dataset, {"bug1": stripped}, Variant.B)


def test_training_rows_drop_excluded():
    demo, provenance = _demo_provenance()
    labels = label_all_variants(demo.dataset, provenance)
    X, y, keys = training_rows(demo.history, demo.dataset, labels)
    assert keys == [("bug1", "c5")]
    assert X.shape == (1, 8)
    assert y.tolist() == [0.0]


def test_training_rows_single_variant():
    demo, outputs = _demo_outputs(Variant.B)
    labels = label_single(demo.dataset, outputs, Variant.B)
    X, y, keys = training_rows(demo.history, demo.dataset, labels)
    assert keys == [("bug1", "c5"), ("bug1", "c6")]
    assert y.tolist() == [0.0, 1.0]
    assert X[1][0] == 3.0  # c6 adds three lines


def test_training_rows_empty_labels():
    demo, _ = _demo_outputs(Variant.B)
    X, y, keys = training_rows(demo.history, demo.dataset, {})
    assert X.shape == (0, 8)
    assert len(y) == 0 and keys == []


def test_benchmark_labels_cover_every_fixing_commit():
    bench = make_benchmark(n_links=20)
    outputs = {
        rec.bug_id: aggregate(
            bench.history, bench.dataset.index, bench.dataset.index.get(rec.fixing_set), Variant.B
        )
        for rec in bench.dataset.records
    }
    labels = label_single(bench.dataset, outputs, Variant.B)
    expected = sum(
        len(bench.dataset.index.get(rec.fixing_set).commits)
        for rec in bench.dataset.records
    )
    assert len(labels) == expected
    values = set(labels.values())
    assert values <= {GOOD, BAD}
    assert GOOD in values and BAD in values
    # the all-noise fix never touches inducing lines
    allbad = bench.dataset.record("bug19")
    for commit_id in bench.dataset.index.get(allbad.fixing_set).commits:
        assert labels[("bug19", commit_id)] == BAD


# --- sampling --------------------------------------------------------------------


def _imbalanced(n_major=10, n_minor=2, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_major + n_minor, 3))
    y = np.array([0.0] * n_major + [1.0] * n_minor)
    return X, y


def test_sampler_none_is_identity():
    X, y = _imbalanced()
    X2, y2 = resample(X, y, SamplerSpec())
    assert X2 is X and y2 is y


def test_balanced_input_unchanged():
    X, y = _imbalanced(n_major=4, n_minor=4)
    for kind in ("random_over", "random_under", "smote"):
        X2, y2 = resample(X, y, SamplerSpec(kind=kind))
        assert np.array_equal(X2, X) and np.array_equal(y2, y)


def test_oversampling_balances_with_copies():
    X, y = _imbalanced()
    X2, y2 = resample(X, y, SamplerSpec(kind="random_over", seed=1))
    assert (y2 == 0).sum() == 10 and (y2 == 1).sum() == 10
    assert np.array_equal(X2[: len(X)], X)
    minority_rows = X[y == 1]
    for row in X2[len(X):]:
        assert any(np.array_equal(row, m) for m in minority_rows)


def test_undersampling_keeps_subset_in_order():
    X, y = _imbalanced()
    X2, y2 = resample(X, y, SamplerSpec(kind="random_under", seed=1))
    assert (y2 == 0).sum() == 2 and (y2 == 1).sum() == 2
    positions = [
        next(i for i in range(len(X)) if np.array_equal(X[i], row)) for row in X2
    ]
    assert positions == sorted(positions)
    assert all(y[i] == y2[j] for j, i in enumerate(positions))


def test_smote_synthesizes_on_segments():
    X = np.array([[0.0, 0.0], [1.0, 1.0]] + [[10.0 + j, 20.0] for j in range(6)])
    y = np.array([1.0, 1.0] + [0.0] * 6)
    X2, y2 = resample(X, y, SamplerSpec(kind="smote", k_neighbors=1, seed=3))
    assert (y2 == 1).sum() == 6 and (y2 == 0).sum() == 6
    for row in X2[len(X):]:
        # with both minority points on y = x, every interpolate stays there
        assert abs(row[0] - row[1]) <= 1e-9
        assert -1e-9 <= row[0] <= 1.0 + 1e-9


def test_smote_respects_k_neighbors_cap():
    X, y = _imbalanced(n_major=9, n_minor=3, seed=4)
    X2, y2 = resample(X, y, SamplerSpec(kind="smote", k_neighbors=50, seed=4))
    assert (y2 == 1).sum() == 9


def test_insufficient_minority():
    X = np.zeros((4, 2))
    with pytest.raises(InsufficientMinority):
        resample(X, np.array([0.0, 0.0, 0.0, 1.0]), SamplerSpec(kind="smote"))
    with pytest.raises(InsufficientMinority):
        resample(X, np.zeros(4), SamplerSpec(kind="random_over"))
    with pytest.raises(InsufficientMinority):
        resample(X, np.zeros(4), SamplerSpec(kind="random_under"))


def test_sampler_determinism():
    X, y = _imbalanced(n_major=20, n_minor=5, seed=9)
    a = resample(X, y, SamplerSpec(kind="smote", seed=11))
    b = resample(X, y, SamplerSpec(kind="smote", seed=11))
    c = resample(X, y, SamplerSpec(kind="smote", seed=12))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert not np.array_equal(a[0], c[0])


def test_sampler_spec_validation():
    with pytest.raises(ValueError):
        SamplerSpec(kind="bootstrap")
    with pytest.raises(ValueError):
        SamplerSpec(k_neighbors=0)
