from __future__ import annotations

import numpy as np
import pytest

from ciet.criteria import CriterionKind
from ciet.data import GroupCounts, group_counts, uplift_rate
from ciet.errors import ParameterError
from ciet.splitting import Direction, SplitConstraints
from ciet.tree import (Condition, Rule, TreeConfig, covers, covers_mask, learn_rule,
                       rule_statistics)

from conftest import make_ds, random_trial

LOOSE = SplitConstraints(min_samples=2, min_recall=0.0)


def planted_30():
    """One feature carries all uplift below 0.5; the rest is flat noise."""
    rng = np.random.default_rng(5)
    x_signal = np.concatenate([rng.uniform(0, 0.5, 16), rng.uniform(0.6, 1.0, 14)])
    x_noise = rng.normal(size=30)
    treated = np.tile([True, False], 15)
    outcome = np.zeros(30, dtype=np.uint8)
    outcome[(x_signal <= 0.5) & treated] = 1  # strong uplift pocket
    outcome[(x_signal > 0.5)] = (rng.random(14) < 0.3).astype(np.uint8)
    return make_ds(np.column_stack([x_signal, x_noise]), treated, outcome,
                   names=("signal", "noise"))


class TestLearnRule:
    def test_planted_signal_found(self):
        ds = planted_30()
        rule = learn_rule(ds, TreeConfig(criterion=CriterionKind.LG, max_depth=3,
                                         cost=0.01, constraints=LOOSE))
        assert rule is not None
        assert rule.conditions[0].feature == "signal"
        covered = ds.subset(covers_mask(rule, ds))
        censored = ds.subset(~covers_mask(rule, ds))
        assert uplift_rate(group_counts(covered)) > uplift_rate(group_counts(censored))

    def test_zero_uplift_gives_none(self):
        # treatment and control mirror each other exactly at every value
        x = np.repeat(np.arange(10.0), 2)
        treated = np.tile([True, False], 10)
        outcome = np.repeat((np.arange(10) % 3 == 0).astype(np.uint8), 2)
        ds = make_ds(x, treated, outcome)
        cfg = TreeConfig(criterion=CriterionKind.LG, cost=0.01, constraints=LOOSE)
        assert learn_rule(ds, cfg) is None

    def test_depth_bound(self, rng):
        cfg = TreeConfig(criterion=CriterionKind.LG, max_depth=2, cost=0.0,
                         constraints=SplitConstraints(min_samples=2, min_recall=0.0))
        for _ in range(10):
            ds = random_trial(rng, 120, 3, distinct=6)
            rule = learn_rule(ds, cfg)
            if rule is not None:
                assert len(rule.conditions) <= 2

    def test_step_gains_strictly_increase_beyond_cost(self, rng):
        cfg = TreeConfig(criterion=CriterionKind.LGR, max_depth=3, cost=0.01,
                         constraints=SplitConstraints(min_samples=5, min_recall=0.0))
        seen_multi = 0
        for _ in range(40):
            ds = random_trial(rng, 150, 3, distinct=8)
            rule = learn_rule(ds, cfg)
            if rule is None:
                continue
            gains = rule.step_gains
            assert len(gains) == len(rule.conditions)
            for prev, nxt in zip(gains, gains[1:]):
                assert nxt > prev + cfg.cost
            seen_multi += len(gains) > 1
        assert seen_multi > 0

    def test_group_empty_stop(self):
        # after the first condition the control group empties
        x = np.array([1, 1, 1, 2, 2, 2, 3, 3], dtype=float)
        treated = np.array([1, 1, 1, 0, 0, 0, 1, 0], dtype=bool)
        outcome = np.array([1, 1, 1, 0, 0, 0, 0, 1], dtype=np.uint8)
        ds = make_ds(x, treated, outcome)
        cfg = TreeConfig(criterion=CriterionKind.LG, max_depth=3, cost=0.0,
                         constraints=SplitConstraints(min_samples=1, min_recall=0.0))
        rule = learn_rule(ds, cfg)
        if rule is not None:
            covered = ds.subset(covers_mask(rule, ds))
            counts = group_counts(covered)
            # induction never returns a covered set it could not keep refining
            assert len(rule.conditions) <= 3
            assert counts.n > 0

    def test_covered_sets_nest(self, rng):
        cfg = TreeConfig(criterion=CriterionKind.LGR, max_depth=3, cost=0.0,
                         constraints=SplitConstraints(min_samples=5, min_recall=0.0))
        for _ in range(20):
            ds = random_trial(rng, 150, 3, distinct=8)
            rule = learn_rule(ds, cfg)
            if rule is None or len(rule.conditions) < 2:
                continue
            prev = np.ones(ds.n_rows, dtype=bool)
            for k in range(1, len(rule.conditions) + 1):
                prefix = Rule(conditions=rule.conditions[:k], criterion=rule.criterion)
                cur = covers_mask(prefix, ds)
                assert not np.any(cur & ~prev)
                prev = cur

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            TreeConfig(max_depth=0)
        with pytest.raises(ParameterError):
            TreeConfig(criterion=CriterionKind.KL)
        with pytest.raises(ParameterError):
            TreeConfig(gain_baseline="nonsense")
        with pytest.raises(ParameterError):
            TreeConfig(recall_scope="nonsense")


class TestCovers:
    names = ("x", "y")

    def obs(self, ds, i):
        return ds.row(i)

    def test_empty_conditions_cover_everything(self):
        ds = make_ds([[1.0, 2.0]], [True], [0], names=self.names)
        rule = Rule(conditions=(), criterion=CriterionKind.LG)
        assert covers(rule, ds.row(0), self.names)

    def test_single_predicate(self):
        ds = make_ds([[3.0, 0.0]], [True], [0], names=self.names)
        rule = Rule(conditions=(Condition("x", Direction.LE, 2.0),),
                    criterion=CriterionKind.LG)
        assert not covers(rule, ds.row(0), self.names)

    def test_conjunction(self):
        ds = make_ds([[1.0, 7.0]], [True], [0], names=self.names)
        rule = Rule(conditions=(Condition("x", Direction.LE, 2.0),
                                Condition("y", Direction.GT, 5.0)),
                    criterion=CriterionKind.LG)
        assert covers(rule, ds.row(0), self.names)

    def test_missing_value_not_covered(self):
        ds = make_ds([[np.nan, 7.0]], [True], [0], names=self.names)
        rule = Rule(conditions=(Condition("x", Direction.LE, 2.0),),
                    criterion=CriterionKind.LG)
        assert not covers(rule, ds.row(0), self.names)
        assert not covers_mask(rule, ds)[0]


class TestRuleStatistics:
    def test_rule_covering_all(self, rng):
        ds = random_trial(rng, 40, 1)
        rule = rule_statistics(Rule(conditions=(), criterion=CriterionKind.LG), ds)
        assert rule.net_gain == 0.0
        assert rule.recall_treatment == 1.0
        assert rule.recall_control == 1.0
        assert rule.stats_rule == rule.stats_before == ds.counts()

    def test_hand_recount(self):
        x = np.array([1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                      11, 12, 13, 14, 15, 16, 17, 18, 19, 20], dtype=float)
        treated = np.array([1, 1, 0, 0, 1, 0, 1, 0, 1, 0,
                            1, 0, 1, 0, 1, 0, 1, 0, 1, 0], dtype=bool)
        outcome = np.array([1, 0, 1, 0, 1, 0, 0, 1, 1, 0,
                            0, 0, 1, 0, 0, 1, 0, 0, 1, 0], dtype=np.uint8)
        ds = make_ds(x, treated, outcome)
        rule = Rule(conditions=(Condition("f0", Direction.LE, 10.5),),
                    criterion=CriterionKind.LG)
        got = rule_statistics(rule, ds)
        mask = x <= 10.5
        expected_rule = GroupCounts(
            n_t=int(treated[mask].sum()), n_c=int((~treated[mask]).sum()),
            y_t=int(outcome[mask & treated].sum()), y_c=int(outcome[mask & ~treated].sum()))
        assert got.stats_before == ds.counts()
        assert got.stats_rule == expected_rule
        child_rate = expected_rule.y_t / expected_rule.n_t - expected_rule.y_c / expected_rule.n_c
        parent = ds.counts()
        parent_rate = parent.y_t / parent.n_t - parent.y_c / parent.n_c
        assert got.net_gain == pytest.approx((child_rate - parent_rate) * expected_rule.n)
        assert got.recall_treatment == expected_rule.y_t / parent.y_t
        assert got.recall_control == expected_rule.y_c / parent.y_c

    def test_empty_covered_set(self, rng):
        ds = random_trial(rng, 20, 1, distinct=4)
        rule = Rule(conditions=(Condition("f0", Direction.GT, 99.0),),
                    criterion=CriterionKind.LG)
        got = rule_statistics(rule, ds)
        assert got.stats_rule == GroupCounts(0, 0, 0, 0)
        assert got.net_gain == 0.0

    def test_render(self):
        rule = Rule(conditions=(Condition("x", Direction.LE, 2.0),
                                Condition("y", Direction.GT, 5.0)),
                    criterion=CriterionKind.LG,
                    stats_rule=GroupCounts(10, 10, 8, 2), net_gain=3.5)
        text = rule.render()
        assert text.startswith("IF x <= 2 AND y > 5 THEN uplift = 0.6")
        assert "net_gain = 3.5" in text
