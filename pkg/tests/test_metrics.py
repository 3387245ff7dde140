import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontrank.data import LabelMatrix
from frontrank.errors import UndefinedMetricError, ValidationError
from frontrank.metrics import (
    dcg_at_k,
    front_relevance_profile,
    make_bridge_benchmark,
    mq_uniq_rel,
    mq_uniq_rel_many,
    ndcg_at_k,
    ndcg_curve,
    run_query_pair_experiment,
    sample_query_pairs,
)
from frontrank.pareto import non_dominated_sort


def bits(s: str):
    return np.array([int(c) for c in s], dtype=np.uint8)


class TestMqUniqRel:
    def test_disjoint_queries_full_cover(self):
        assert mq_uniq_rel(bits("1100"), [bits("1000"), bits("0100")]) == 1.0

    def test_missing_unique_relation_zeroes_score(self):
        assert mq_uniq_rel(bits("1000"), [bits("1000"), bits("0100")]) == 0.0

    def test_overlapping_queries_with_unique_parts(self):
        assert mq_uniq_rel(bits("1110"), [bits("1100"), bits("0110")]) == 1.0

    def test_partial_cover_fraction(self):
        # covers one unique label per query but only 2 of 3 union labels
        assert mq_uniq_rel(bits("1010"), [bits("1000"), bits("0010"), ]) == 1.0
        assert mq_uniq_rel(
            bits("1010"), [bits("1100"), bits("0010")]
        ) == pytest.approx(2.0 / 3.0)

    def test_no_labels_at_all_is_undefined(self):
        with pytest.raises(UndefinedMetricError):
            mq_uniq_rel(bits("1000"), [bits("0000"), bits("0000")])

    def test_score_is_one_iff_covers_union_with_unique_relations(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            c = rng.integers(2, 6)
            ell = rng.integers(0, 2, size=c).astype(np.uint8)
            q = rng.integers(0, 2, size=(2, c)).astype(np.uint8)
            if not q.any():
                continue
            score = mq_uniq_rel(ell, list(q))
            beta = q.any(axis=0)
            shared = q.sum(axis=0) > 1
            unique = q.astype(bool) & ~shared[None, :]
            has_unique = all(
                bool((ell.astype(bool) & unique[i]).any()) for i in range(2)
            )
            covers = bool(np.all(ell[beta] == 1))
            assert (score == 1.0) == (covers and has_unique)

    @given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=2**30))
    @settings(max_examples=60, deadline=None)
    def test_symmetric_under_query_permutation(self, t, seed):
        rng = np.random.default_rng(seed)
        c = 6
        ell = rng.integers(0, 2, size=c).astype(np.uint8)
        queries = [rng.integers(0, 2, size=c).astype(np.uint8) for _ in range(t)]
        if not np.any(np.array(queries)):
            return
        base = mq_uniq_rel(ell, queries)
        for perm in itertools.islice(itertools.permutations(queries), 6):
            assert mq_uniq_rel(ell, list(perm)) == base

    def test_range(self):
        rng = np.random.default_rng(1)
        labels = rng.integers(0, 2, size=(200, 5)).astype(np.uint8)
        q = rng.integers(0, 2, size=(2, 5)).astype(np.uint8)
        q[0, 0] = 1  # make beta nonempty
        rels = mq_uniq_rel_many(labels, q)
        assert np.all((rels == 0) | ((rels > 0) & (rels <= 1)))


class TestDcgNdcg:
    def test_all_ones_k3(self):
        assert dcg_at_k([1, 1, 1], 3) == pytest.approx(1 + 1 + 1 / np.log2(3))
        assert dcg_at_k([1, 1, 1], 3) == pytest.approx(2.6309, abs=1e-4)

    def test_all_zero(self):
        assert dcg_at_k([0, 0, 0], 3) == 0.0

    def test_k1_is_first_relevance(self):
        assert dcg_at_k([0.7, 1.0], 1) == 0.7

    def test_k_validation(self):
        with pytest.raises(ValidationError):
            dcg_at_k([1.0], 0)
        with pytest.raises(ValidationError):
            dcg_at_k([1.0], 2)

    def test_ndcg_perfect_run_is_one(self):
        assert ndcg_at_k([1] * 10, 10) == pytest.approx(1.0)

    def test_ndcg_zero_run(self):
        assert ndcg_at_k([0] * 5, 5) == 0.0

    def test_ndcg_single_hit_at_top(self):
        assert ndcg_at_k([1, 0, 0], 3) == pytest.approx(0.3801, abs=1e-4)

    def test_curve_matches_pointwise(self):
        rels = [1.0, 0.0, 0.5, 0.25, 1.0]
        curve = ndcg_curve(rels, 5)
        for k in range(1, 6):
            assert curve[k - 1] == pytest.approx(ndcg_at_k(rels, k))

    @given(st.lists(st.floats(min_value=0, max_value=1, width=32), min_size=2, max_size=12))
    @settings(max_examples=60, deadline=None)
    def test_descending_order_maximizes_ndcg(self, rels):
        k = len(rels)
        best = ndcg_at_k(sorted(rels, reverse=True), k)
        rng = np.random.default_rng(0)
        for _ in range(5):
            shuffled = list(rels)
            rng.shuffle(shuffled)
            assert ndcg_at_k(shuffled, k) <= best + 1e-12


class TestQueryPairSampling:
    def test_pairs_have_min_covering_items(self, bridge_benchmark):
        ds, labels = bridge_benchmark
        batch = sample_query_pairs(labels, count=25, rng_seed=0)
        lab = labels.labels.astype(bool)
        for a, b in batch.pairs:
            rels = mq_uniq_rel_many(lab, lab[[a, b]])
            rels[[a, b]] = 0
            assert np.count_nonzero(rels) >= 5

    def test_unviable_labels_raise(self):
        labels = LabelMatrix(np.tile(bits("10"), (20, 1)))  # one class only
        with pytest.raises(ValidationError, match="viable"):
            sample_query_pairs(labels, count=5, rng_seed=0, max_tries=500)

    def test_deterministic(self, bridge_benchmark):
        _, labels = bridge_benchmark
        b1 = sample_query_pairs(labels, count=10, rng_seed=7)
        b2 = sample_query_pairs(labels, count=10, rng_seed=7)
        assert b1.pairs == b2.pairs


class TestFrontProfile:
    def test_three_point_front_interpolates(self):
        pts = np.array([(0.1, 0.9), (0.5, 0.5), (0.9, 0.1)])
        layering = non_dominated_sort(pts)
        rels = np.array([0.0, 1.0, 0.0])
        curves, grid = front_relevance_profile(
            [layering], [pts[:, 0]], [rels], n_fronts=1, grid_size=5
        )
        assert curves[0].tolist() == [0.0, 0.5, 1.0, 0.5, 0.0]

    def test_constant_relevance_gives_constant_curves(self):
        rng = np.random.default_rng(2)
        pts = rng.random((30, 2))
        layering = non_dominated_sort(pts)
        rels = np.full(30, 0.375)
        curves, _ = front_relevance_profile(
            [layering], [pts[:, 0]], [rels], n_fronts=3, grid_size=11
        )
        for depth in range(min(3, layering.n_fronts)):
            assert np.allclose(curves[depth], 0.375)

    def test_singleton_front_constant(self):
        pts = np.array([(0.1, 0.1), (0.5, 0.5), (0.9, 0.9)])  # chain: 3 fronts
        layering = non_dominated_sort(pts)
        rels = np.array([0.25, 0.5, 1.0])
        curves, _ = front_relevance_profile(
            [layering], [pts[:, 0]], [rels], n_fronts=3, grid_size=4
        )
        assert np.allclose(curves[0], 0.25)
        assert np.allclose(curves[2], 1.0)

    def test_missing_front_is_nan(self):
        pts = np.array([(0.0, 1.0), (1.0, 0.0)])
        layering = non_dominated_sort(pts)  # single front
        curves, _ = front_relevance_profile(
            [layering], [pts[:, 0]], [np.ones(2)], n_fronts=3, grid_size=4
        )
        assert np.all(np.isnan(curves[1]))


class TestExperiment:
    def test_single_pair_single_model_matches_direct_ndcg(
        self, bridge_benchmark, bridge_model
    ):
        from frontrank.data import QuerySet
        from frontrank.engine import mq_avg_retrieve

        ds, labels = bridge_benchmark
        from frontrank.metrics import QueryPairBatch

        pair = sample_query_pairs(labels, count=1, rng_seed=3).pairs[0]
        batch = QueryPairBatch(pairs=(pair,), rng_seed=3)
        report = run_query_pair_experiment(
            ds, labels, [bridge_model], batch, methods=("mq_avg",), k_max=10
        )
        result = mq_avg_retrieve(ds, bridge_model, QuerySet(pair), k=10)
        lab = labels.labels.astype(bool)
        rels = mq_uniq_rel_many(lab, lab[list(pair)])[result.indices()]
        assert report.ndcg["mq_avg"][9] == pytest.approx(ndcg_at_k(rels, 10))

    def test_three_methods_three_curves(self, bridge_benchmark, bridge_model):
        ds, labels = bridge_benchmark
        batch = sample_query_pairs(labels, count=4, rng_seed=4)
        report = run_query_pair_experiment(
            ds, labels, [bridge_model], batch, k_max=15
        )
        assert set(report.ndcg) == {"pfm", "mq_avg", "mq_max"}
        assert all(len(v) == 15 for v in report.ndcg.values())
        assert all(0.0 <= x <= 1.0 for v in report.ndcg.values() for x in v)

    def test_report_rows_long_format(self, bridge_benchmark, bridge_model):
        ds, labels = bridge_benchmark
        batch = sample_query_pairs(labels, count=2, rng_seed=5)
        report = run_query_pair_experiment(ds, labels, [bridge_model], batch, k_max=5)
        rows = report.ndcg_rows()
        assert len(rows) == 3 * 5  # one row per (method, k)
        assert set(rows[0]) == {"method", "k", "ndcg", "std"}

    def test_empty_batch_rejected(self, bridge_benchmark, bridge_model):
        from frontrank.metrics import QueryPairBatch

        ds, labels = bridge_benchmark
        with pytest.raises(ValidationError, match="empty"):
            run_query_pair_experiment(
                ds, labels, [bridge_model], QueryPairBatch(pairs=(), rng_seed=0)
            )


class TestBridgeBenchmark:
    def test_shapes_and_labels(self):
        ds, labels = make_bridge_benchmark(
            n_core=10, n_bridge=5, n_distractor=4, m=8, seed=1
        )
        assert ds.n == 29 and ds.m == 8
        assert labels.n == 29 and labels.n_classes == 3
        bridge_rows = [i for i, x in enumerate(ds.item_ids) if x.startswith("ab")]
        assert all(labels.labels[i].tolist() == [1, 1, 0] for i in bridge_rows)

    def test_deterministic(self):
        a, _ = make_bridge_benchmark(seed=9)
        b, _ = make_bridge_benchmark(seed=9)
        assert np.array_equal(a.features, b.features)
