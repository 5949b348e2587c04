from __future__ import annotations

import numpy as np
import pytest

from ciet.data import (CATEGORICAL, NUMERIC, CsvConfig, Group, GroupCounts, distribution_filter,
                       group_counts, load_csv, one_hot_encode, stratified_split, uplift_rate,
                       write_csv)
from ciet.errors import DataError, EmptyGroupError, ParameterError, SchemaError

from conftest import make_ds, random_trial


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


BASIC_CONFIG = CsvConfig(group_column="grp", outcome_column="y",
                         group_map={"t": "treatment", "c": "control"})


class TestLoadCsv:
    def test_four_line_readback(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,grp,y\n1,t,1\n2,c,0\n3,t,0\n4,c,1\n")
        ds = load_csv(p, BASIC_CONFIG)
        assert ds.n_rows == 4
        assert ds.feature_names == ("a",)
        assert ds.feature_kinds == (NUMERIC,)
        assert ds.counts() == GroupCounts(n_t=2, n_c=2, y_t=1, y_c=1)
        assert list(ds.x[:, 0]) == [1.0, 2.0, 3.0, 4.0]

    def test_row_order_preserved(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,grp,y\n9,t,1\n1,c,0\n5,t,0\n")
        ds = load_csv(p, BASIC_CONFIG)
        assert list(ds.x[:, 0]) == [9.0, 1.0, 5.0]

    def test_missing_column_is_schema_error(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,y\n1,0\n")
        with pytest.raises(SchemaError):
            load_csv(p, BASIC_CONFIG)

    def test_unmappable_group_names_line(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,grp,y\n1,t,1\n2,zzz,0\n")
        with pytest.raises(DataError, match=":3:"):
            load_csv(p, BASIC_CONFIG)

    def test_unmappable_outcome_names_line(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,grp,y\n1,t,5\n")
        with pytest.raises(DataError, match=":2:"):
            load_csv(p, BASIC_CONFIG)

    def test_group_default_catches_rest(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,grp,y\n1,v,1\n2,x,0\n3,v,0\n")
        cfg = CsvConfig(group_column="grp", outcome_column="y",
                        group_map={"v": "control"}, group_default="treatment")
        ds = load_csv(p, cfg)
        assert ds.counts().n_t == 1 and ds.counts().n_c == 2

    def test_kind_inference_and_missing(self, tmp_path):
        p = write(tmp_path / "d.csv", "a,b,grp,y\n1.5,red,t,1\n?,blue,c,0\n2.5,red,t,0\n")
        ds = load_csv(p, BASIC_CONFIG)
        assert ds.feature_kinds == (NUMERIC, CATEGORICAL)
        assert np.isnan(ds.x[1, 0])
        assert ds.categories[1] == ("blue", "red")

    def test_round_trip(self, tmp_path):
        src = write(tmp_path / "d.csv",
                    "a,b,grp,y\n1.25,red,t,1\n,blue,c,0\n-3.5,red,c,1\n0.125,green,t,0\n")
        ds = load_csv(src, BASIC_CONFIG)
        back = tmp_path / "back.csv"
        write_csv(ds, back, group_column="grp", outcome_column="y",
                  treatment_label="t", control_label="c")
        ds2 = load_csv(back, BASIC_CONFIG)
        assert ds.feature_names == ds2.feature_names
        assert ds.feature_kinds == ds2.feature_kinds
        assert ds.categories == ds2.categories
        assert np.array_equal(ds.x, ds2.x, equal_nan=True)
        assert np.array_equal(ds.treated, ds2.treated)
        assert np.array_equal(ds.outcome, ds2.outcome)


class TestOneHot:
    def test_two_value_column(self, tmp_path):
        p = write(tmp_path / "d.csv", "c,grp,y\na,t,1\nb,c,0\na,t,0\n")
        ds = one_hot_encode(load_csv(p, BASIC_CONFIG))
        assert ds.feature_names == ("c=a", "c=b")
        assert list(ds.x[:, 0]) == [1.0, 0.0, 1.0]
        assert list(ds.x[:, 1]) == [0.0, 1.0, 0.0]

    def test_no_categorical_is_identity(self):
        ds = make_ds([[1.0], [2.0]], [True, False], [1, 0])
        assert one_hot_encode(ds) is ds

    def test_idempotent(self, tmp_path):
        p = write(tmp_path / "d.csv", "c,n,grp,y\na,1,t,1\nb,2,c,0\n")
        once = one_hot_encode(load_csv(p, BASIC_CONFIG))
        twice = one_hot_encode(once)
        assert twice.feature_names == once.feature_names
        assert np.array_equal(twice.x, once.x)

    def test_missing_gets_all_zeros(self, tmp_path):
        p = write(tmp_path / "d.csv", "c,grp,y\na,t,1\n?,c,0\nb,t,0\n")
        ds = one_hot_encode(load_csv(p, BASIC_CONFIG))
        assert list(ds.x[1]) == [0.0, 0.0]


class TestDistributionFilter:
    def test_identical_distribution_retained(self, rng):
        x = np.tile(rng.normal(size=50), 2)
        treated = np.array([True] * 50 + [False] * 50)
        ds = make_ds(x, treated, np.zeros(100))
        out = distribution_filter(ds, 0.25)
        assert out.feature_names == ds.feature_names

    def test_one_group_only_removed(self):
        x = np.array([1.0, 2.0, 3.0, np.nan, np.nan, np.nan])
        treated = np.array([True, True, True, False, False, False])
        ds = make_ds(x, treated, np.zeros(6))
        out = distribution_filter(ds, 0.25)
        assert out.feature_names == ()
        assert out.n_rows == 6

    def test_threshold_one_removes_nothing(self, rng):
        ds = random_trial(rng, 80, 3)
        out = distribution_filter(ds, 1.0)
        assert out.feature_names == ds.feature_names

    def test_bad_threshold(self, rng):
        ds = random_trial(rng, 10, 1)
        with pytest.raises(ParameterError):
            distribution_filter(ds, 0.0)

    def test_categorical_shift_removed(self, tmp_path):
        rows = ["x,grp,y"]
        rows += ["a,t,0"] * 40 + ["b,t,0"] * 10
        rows += ["a,c,0"] * 10 + ["b,c,0"] * 40
        p = write(tmp_path / "d.csv", "\n".join(rows) + "\n")
        ds = load_csv(p, BASIC_CONFIG)
        # TV distance = 0.5*(|.8-.2| + |.2-.8|) = 0.6 > 0.25
        assert distribution_filter(ds, 0.25).feature_names == ()
        assert distribution_filter(ds, 0.65).feature_names == ("x",)


class TestGroupCounts:
    def test_empty(self):
        ds = make_ds(np.empty((0, 1)), [], [])
        assert group_counts(ds) == GroupCounts(0, 0, 0, 0)

    def test_six_row_hand_count(self):
        treated = [True, True, False, False, True, False]
        outcome = [1, 0, 1, 0, 1, 1]
        ds = make_ds(np.arange(6), treated, outcome)
        expected = GroupCounts(
            n_t=sum(treated),
            n_c=sum(not t for t in treated),
            y_t=sum(o for t, o in zip(treated, outcome) if t),
            y_c=sum(o for t, o in zip(treated, outcome) if not t),
        )
        assert group_counts(ds) == expected == GroupCounts(3, 3, 2, 2)

    def test_partition_sums(self, rng):
        for _ in range(20):
            ds = random_trial(rng, int(rng.integers(10, 80)), 2)
            mask = rng.random(ds.n_rows) < 0.5
            total = group_counts(ds)
            assert group_counts(ds.subset(mask)) + group_counts(ds.subset(~mask)) == total

    def test_invalid_counts_rejected(self):
        with pytest.raises(ValueError):
            GroupCounts(n_t=1, n_c=0, y_t=2, y_c=0)


class TestUpliftRate:
    def test_simple(self):
        assert uplift_rate(GroupCounts(10, 10, 6, 5)) == pytest.approx(0.1)

    def test_direct_evaluation(self):
        assert uplift_rate(GroupCounts(50, 50, 30, 20)) == pytest.approx(0.2)

    def test_empty_group_errors(self):
        with pytest.raises(EmptyGroupError):
            uplift_rate(GroupCounts(5, 0, 2, 0))


class TestStratifiedSplit:
    def test_partition_and_rates(self, rng):
        ds = random_trial(rng, 400, 2, p_t=0.5, p_y=0.45)
        first, second = stratified_split(ds, 0.5, seed=3)
        assert first.n_rows + second.n_rows == ds.n_rows
        c1, c2 = first.counts(), second.counts()
        assert abs(c1.n_t - c2.n_t) <= 1
        assert abs(c1.y_t - c2.y_t) <= 1
        assert abs(c1.y_c - c2.y_c) <= 1

    def test_deterministic(self, rng):
        ds = random_trial(rng, 100, 1)
        a1, _ = stratified_split(ds, 0.5, seed=9)
        a2, _ = stratified_split(ds, 0.5, seed=9)
        assert np.array_equal(a1.x, a2.x)

    def test_bad_fraction(self, rng):
        with pytest.raises(ParameterError):
            stratified_split(random_trial(rng, 10, 1), 1.5, seed=0)


def test_dataset_row_and_observation(rng):
    ds = random_trial(rng, 5, 2)
    obs = ds.row(0)
    assert obs.group in (Group.TREATMENT, Group.CONTROL)
    assert obs.outcome in (0, 1)
    assert obs.features.shape == (2,)


def test_dataset_immutable(rng):
    ds = random_trial(rng, 5, 1)
    with pytest.raises(ValueError):
        ds.x[0, 0] = 99.0
