import itertools
import math

import numpy as np
import pytest

from softshape import (
    adjusted_rand_index,
    agreement_matrix,
    calinski_harabasz,
    consensus_groups,
    silhouette,
    validate_dataset,
)

from helpers import brute_force_ari


def euclid(a, b):
    return float(np.linalg.norm(a - b))


def dataset_from_rows(rows):
    return validate_dataset([(f"s{i}", row) for i, row in enumerate(rows)])


def silhouette_oracle(dmat, labels):
    """Direct per-point formula evaluation."""
    n = len(labels)
    scores = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            scores.append(0.0)
            continue
        a = sum(dmat[i][j] for j in own) / len(own)
        b = min(
            sum(dmat[i][j] for j in range(n) if labels[j] == other)
            / sum(1 for j in range(n) if labels[j] == other)
            for other in set(labels)
            if other != labels[i]
        )
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return sum(scores) / n


class TestSilhouette:
    def test_separated_duplicate_clusters(self):
        rows = [[0.0, 0.0]] * 3 + [[100.0, 100.0]] * 3
        labels = [0, 0, 0, 1, 1, 1]
        score = silhouette(dataset_from_rows(rows), labels, euclid)
        assert score > 0.99

    def test_swapped_symmetric_layout_negative(self):
        # two tight pairs, each point labelled into the other pair's cluster
        rows = [[0.0, 0.0], [0.1, 0.0], [10.0, 0.0], [10.1, 0.0]]
        labels = [1, 1, 0, 0]
        swapped = [0, 1, 1, 0]
        assert silhouette(dataset_from_rows(rows), labels, euclid) > 0.9
        assert silhouette(dataset_from_rows(rows), swapped, euclid) < 0.0

    def test_one_dimensional_toy_matches_direct_formula(self):
        rows = [[0.0, 0.0], [0.1, 0.0], [10.0, 0.0], [10.1, 0.0]]
        labels = [0, 0, 1, 1]
        ds = dataset_from_rows(rows)
        dmat = [[euclid(np.asarray(a), np.asarray(b)) for b in rows] for a in rows]
        expected = silhouette_oracle(dmat, labels)
        assert expected == pytest.approx(0.9899997499937498, abs=1e-12)
        assert silhouette(ds, labels, euclid) == pytest.approx(expected, abs=1e-12)

    def test_singletons_score_zero(self):
        rows = [[0.0, 0.0], [5.0, 5.0], [5.1, 5.0]]
        score = silhouette(dataset_from_rows(rows), [0, 1, 1], euclid)
        dmat = [[euclid(np.asarray(a), np.asarray(b)) for b in rows] for a in rows]
        assert score == pytest.approx(silhouette_oracle(dmat, [0, 1, 1]), abs=1e-12)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(0)
        rows = rng.normal(size=(8, 5))
        labels = [0, 0, 1, 1, 2, 2, 0, 1]
        ds = dataset_from_rows(rows)
        base = silhouette(ds, labels, euclid)
        for scale in (0.001, 7.3, 10000.0):
            scaled = silhouette(ds, labels, lambda a, b: scale * euclid(a, b))
            assert scaled == pytest.approx(base, abs=1e-12)

    def test_bounds_under_metric_distances(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = int(rng.integers(4, 12))
            rows = rng.normal(size=(n, 4))
            labels = rng.integers(0, 3, size=n)
            if len(set(labels.tolist())) < 2:
                labels[0] = (labels[0] + 1) % 3
            score = silhouette(dataset_from_rows(rows), labels.tolist(), euclid)
            assert -1.0 <= score <= 1.0

    def test_precomputed_matrix_equivalent(self):
        rng = np.random.default_rng(2)
        rows = rng.normal(size=(6, 4))
        labels = [0, 1, 0, 1, 0, 1]
        ds = dataset_from_rows(rows)
        dmat = np.array([[euclid(a, b) for b in rows] for a in rows])
        assert silhouette(ds, labels, dmat) == silhouette(ds, labels, euclid)

    def test_single_cluster_rejected(self):
        with pytest.raises(ValueError, match="two clusters"):
            silhouette(dataset_from_rows([[0.0, 1.0], [1.0, 0.0]]), [0, 0], euclid)


class TestCalinskiHarabasz:
    def test_tight_separated_clusters_large_and_matches_oracle(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(5, 4)) * 0.01
        b = rng.normal(size=(5, 4)) * 0.01 + 50.0
        rows = np.vstack([a, b])
        labels = [0] * 5 + [1] * 5
        ds = dataset_from_rows(rows)
        value = calinski_harabasz(ds, labels)
        assert value > 100.0

        overall = rows.mean(axis=0)
        between = sum(
            5 * float(np.dot(part.mean(axis=0) - overall, part.mean(axis=0) - overall))
            for part in (rows[:5], rows[5:])
        )
        within = sum(
            float(((part - part.mean(axis=0)) ** 2).sum()) for part in (rows[:5], rows[5:])
        )
        expected = (between / 1) / (within / 8)
        assert value == pytest.approx(expected, rel=1e-12)

    def test_structured_beats_random(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(6, 3))
        b = rng.normal(size=(6, 3)) + 8.0
        rows = np.vstack([a, b])
        ds = dataset_from_rows(rows)
        structured = calinski_harabasz(ds, [0] * 6 + [1] * 6)
        for seed in range(5):
            shuffled = np.random.default_rng(seed).permutation([0] * 6 + [1] * 6)
            assert structured >= calinski_harabasz(ds, shuffled.tolist())

    def test_zero_within_dispersion_is_infinite(self):
        rows = [[0.0, 0.0], [0.0, 0.0], [9.0, 9.0], [9.0, 9.0], [5.0, 1.0]]
        labels = [0, 0, 1, 1, 2]
        assert calinski_harabasz(dataset_from_rows(rows), labels) == math.inf

    def test_domain_errors(self):
        ds = dataset_from_rows([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]])
        with pytest.raises(ValueError, match="2 <= k < n"):
            calinski_harabasz(ds, [0, 0, 0])
        with pytest.raises(ValueError, match="2 <= k < n"):
            calinski_harabasz(ds, [0, 1, 2])


class TestAdjustedRandIndex:
    def test_identical_labelings(self):
        assert adjusted_rand_index([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0

    def test_permutation_invariance(self):
        assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_hand_derived_case_exact(self):
        assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5

    def test_symmetry_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(2, 25))
            a = rng.integers(0, 4, size=n).tolist()
            b = rng.integers(0, 3, size=n).tolist()
            assert adjusted_rand_index(a, b) == adjusted_rand_index(b, a)

    def test_matches_brute_force_pair_counting(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(2, 31))
            a = rng.integers(0, 5, size=n).tolist()
            b = rng.integers(0, 4, size=n).tolist()
            assert adjusted_rand_index(a, b) == pytest.approx(
                brute_force_ari(a, b), abs=1e-12
            )

    def test_never_exceeds_one(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(2, 20))
            a = rng.integers(0, 6, size=n).tolist()
            b = rng.integers(0, 6, size=n).tolist()
            assert adjusted_rand_index(a, b) <= 1.0

    def test_random_labelings_center_on_zero(self):
        rng = np.random.default_rng(8)
        values = []
        for _ in range(1000):
            a = rng.integers(0, 3, size=30).tolist()
            b = rng.integers(0, 3, size=30).tolist()
            values.append(adjusted_rand_index(a, b))
        assert abs(float(np.mean(values))) < 0.02

    def test_one_iff_equal_up_to_permutation(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            n = int(rng.integers(2, 13))
            a = rng.integers(0, 3, size=n).tolist()
            # same partition, relabelled
            mapping = {lab: (lab + 1) % 3 for lab in range(3)}
            b = [mapping[lab] for lab in a]
            assert adjusted_rand_index(a, b) == 1.0
            # conversely: ari == 1 implies some label bijection maps a to b
            c = rng.integers(0, 3, size=n).tolist()
            if adjusted_rand_index(a, c) == 1.0:
                found = any(
                    all(
                        perm_map.get(x) == y
                        for x, y in zip(a, c)
                    )
                    for perm in itertools.permutations(sorted(set(c) | set(a)))
                    for perm_map in [dict(zip(sorted(set(a) | set(c)), perm))]
                )
                assert found

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="differ"):
            adjusted_rand_index([0, 1], [0, 1, 2])

    def test_too_small_rejected(self):
        with pytest.raises(ValueError, match="two items"):
            adjusted_rand_index([0], [0])

    def test_degenerate_trivial_partitions(self):
        assert adjusted_rand_index([0, 0, 0], [1, 1, 1]) == 1.0


def make_labels(diagonal, off_cells):
    """Build two label vectors realising the given contingency layout."""
    labels_a = []
    labels_b = []
    ids = []
    counter = 0
    for j, count in enumerate(diagonal):
        for _ in range(count):
            labels_a.append(j)
            labels_b.append(j)
            ids.append(f"s{counter:03d}")
            counter += 1
    for (x, y), count in off_cells.items():
        for _ in range(count):
            labels_a.append(x)
            labels_b.append(y)
            ids.append(f"s{counter:03d}")
            counter += 1
    return labels_a, labels_b, ids


class TestAgreementMatrix:
    def test_identical_three_cluster_labelings(self):
        labels = [0, 0, 1, 1, 2, 2]
        ids = [f"s{i}" for i in range(6)]
        report = agreement_matrix(labels, labels, ids)
        np.testing.assert_array_equal(report.contingency, 2 * np.eye(3, dtype=int))
        assert report.ari == 1.0
        assert report.outliers == ()
        assert set(report.consensus) == {(0, 0), (1, 1), (2, 2)}

    def test_single_defection_single_outlier(self):
        labels_a = [0, 0, 0, 1, 1, 1]
        labels_b = [0, 0, 1, 1, 1, 1]  # s2 moved across
        ids = [f"s{i}" for i in range(6)]
        report = agreement_matrix(labels_a, labels_b, ids)
        assert report.outliers == ("s2",)
        assert int(report.contingency.sum()) == 6

    def test_entries_sum_to_n_and_removal_decrements_one_cell(self):
        rng = np.random.default_rng(10)
        labels_a = rng.integers(0, 3, size=20).tolist()
        labels_b = rng.integers(0, 3, size=20).tolist()
        ids = [f"s{i}" for i in range(20)]
        full = agreement_matrix(labels_a, labels_b, ids)
        assert int(full.contingency.sum()) == 20
        reduced = agreement_matrix(labels_a[1:], labels_b[1:], ids[1:])
        delta = full.contingency - reduced.contingency
        assert int(delta.sum()) == 1
        assert int((delta != 0).sum()) == 1

    def test_caption_shaped_shares_round_to_reported_percentages(self):
        # diagonal 27/8/10 plus 3 mismatched series over n = 48
        labels_a, labels_b, ids = make_labels(
            [27, 8, 10], {(0, 1): 1, (1, 2): 1, (2, 0): 1}
        )
        report = agreement_matrix(labels_a, labels_b, ids)
        assert int(report.contingency.sum()) == 48
        assert set(report.consensus) == {(0, 0), (1, 1), (2, 2)}
        by_cell = dict(zip(report.consensus, report.shares))
        rounded = {
            cell: round(100 * share) for cell, share in by_cell.items()
        }
        assert rounded == {(0, 0): 56, (1, 1): 17, (2, 2): 21}
        assert len(report.outliers) == 3
        assert sum(report.shares) <= 1.0

    def test_spec_shaped_consensus_groups_ordering(self):
        # diagonal 27/8/9 with 3 outliers: groups come back 27, 9, 8
        labels_a, labels_b, ids = make_labels(
            [27, 8, 9], {(0, 1): 1, (1, 2): 1, (2, 0): 1}
        )
        report = agreement_matrix(labels_a, labels_b, ids)
        groups = consensus_groups(report)
        assert [len(g[2]) for g in groups] == [27, 9, 8]
        assert [g[0] for g in groups] == [0, 2, 1]
        assert len(report.outliers) == 3
        for _, _, members in groups:
            assert list(members) == sorted(members)

    def test_empty_cells_never_matched(self):
        labels_a = [0, 0, 1, 1]
        labels_b = [0, 0, 1, 1]
        report = agreement_matrix(labels_a, labels_b, [f"s{i}" for i in range(4)])
        assert (0, 1) not in report.consensus
        assert all(report.contingency[x, y] > 0 for x, y in report.consensus)

    def test_greedy_tie_breaks_lowest_pair(self):
        labels_a = [0, 0, 1, 1]
        labels_b = [1, 1, 0, 0]
        report = agreement_matrix(labels_a, labels_b, [f"s{i}" for i in range(4)])
        assert report.consensus[0] == (0, 1)

    def test_diagonal_groups_in_size_order(self):
        labels_a = [0] * 5 + [1] * 2 + [2] * 3
        labels_b = labels_a
        report = agreement_matrix(labels_a, labels_b, [f"s{i}" for i in range(10)])
        groups = consensus_groups(report)
        assert [len(g[2]) for g in groups] == [5, 3, 2]
