"""Top-down induction of one single-branch tree, yielding one IF-THEN rule.

Each round scans every feature for its best restricted one-sided split and
accepts the overall best only if its gain beats the running maximum by more
than `cost`. Induction then continues on the covered branch; the uncovered
rows are censored and, at the ensemble level, become the pool for the next
tree. The conjunction of accepted conditions is the rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .criteria import CriterionKind, SplitContext, lift_gain
from .data import Dataset, GroupCounts, Observation, group_counts
from .errors import ParameterError
from .splitting import Direction, SplitConstraints, best_split

PARENT_BASELINE = "parent"
ROOT_BASELINE = "root"

TREE_RECALL = "tree"
NODE_RECALL = "node"


@dataclass(frozen=True)
class Condition:
    feature: str
    direction: Direction
    threshold: float

    def holds(self, value: float) -> bool:
        if math.isnan(value):
            return False
        return value <= self.threshold if self.direction is Direction.LE else value > self.threshold

    def render(self) -> str:
        return f"{self.feature} {self.direction.value} {self.threshold:g}"


@dataclass(frozen=True)
class Rule:
    """A conjunctive uplift rule with its training coverage statistics.

    stats_before describes the pool the rule was induced on, stats_rule the
    covered subset; step_gains records the accepted gain at each depth.
    """

    conditions: tuple[Condition, ...]
    criterion: CriterionKind
    step_gains: tuple[float, ...] = ()
    stats_before: GroupCounts = GroupCounts()
    stats_rule: GroupCounts = GroupCounts()
    net_gain: float = 0.0
    recall_treatment: float = 0.0
    recall_control: float = 0.0

    @property
    def uplift(self) -> float:
        """Training uplift rate of the covered subset (0 when a group is empty)."""
        s = self.stats_rule
        if s.n_t == 0 or s.n_c == 0:
            return 0.0
        return s.y_t / s.n_t - s.y_c / s.n_c

    def render(self) -> str:
        body = " AND ".join(c.render() for c in self.conditions) or "TRUE"
        return f"IF {body} THEN uplift = {self.uplift:.6g}, net_gain = {self.net_gain:.6g}"


@dataclass(frozen=True)
class TreeConfig:
    """Induction settings for one single-branch tree.

    gain_baseline picks the reference rates the per-depth gain is measured
    against: the current pool ("parent") or the tree's starting pool ("root").
    recall_scope likewise anchors the min_recall bound to the current pool
    ("node") or the starting pool ("tree"); the tree anchor matches the
    rule-level recall the reports show and keeps deep refinements from
    shrinking below the bound multiplicatively.
    """

    criterion: CriterionKind = CriterionKind.LG
    max_depth: int = 3
    cost: float = 0.01
    constraints: SplitConstraints = field(default_factory=SplitConstraints)
    gain_baseline: str = PARENT_BASELINE
    recall_scope: str = TREE_RECALL

    def __post_init__(self):
        if self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1")
        if not self.criterion.single_branch:
            raise ParameterError(f"{self.criterion} cannot grow a single-branch tree")
        if self.gain_baseline not in (PARENT_BASELINE, ROOT_BASELINE):
            raise ParameterError(f"unknown gain baseline {self.gain_baseline!r}")
        if self.recall_scope not in (TREE_RECALL, NODE_RECALL):
            raise ParameterError(f"unknown recall scope {self.recall_scope!r}")


def condition_mask(condition: Condition, dataset: Dataset) -> np.ndarray:
    col = dataset.column(condition.feature)
    if condition.direction is Direction.LE:
        return col <= condition.threshold
    return col > condition.threshold


def covers_mask(rule: Rule, dataset: Dataset) -> np.ndarray:
    """Boolean mask of rows covered by the rule (missing values never match)."""
    mask = np.ones(dataset.n_rows, dtype=bool)
    for cond in rule.conditions:
        mask &= condition_mask(cond, dataset)
    return mask


def covers(rule: Rule, observation: Observation, feature_names: tuple[str, ...]) -> bool:
    """True iff every condition of the rule holds for the observation."""
    for cond in rule.conditions:
        value = observation.features[feature_names.index(cond.feature)]
        if not cond.holds(float(value)):
            return False
    return True


def rule_statistics(rule: Rule, rows: Dataset) -> Rule:
    """Recompute a rule's coverage statistics against its induction pool."""
    before = group_counts(rows)
    covered = group_counts(rows.subset(covers_mask(rule, rows)))
    if covered.n_t > 0 and covered.n_c > 0 and before.n_t > 0 and before.n_c > 0:
        net = lift_gain(SplitContext(parent_counts=before, child_counts=covered))
    else:
        net = 0.0
    return replace(
        rule,
        stats_before=before,
        stats_rule=covered,
        net_gain=net,
        recall_treatment=covered.y_t / before.y_t if before.y_t > 0 else 0.0,
        recall_control=covered.y_c / before.y_c if before.y_c > 0 else 0.0,
    )


def learn_rule(rows: Dataset, config: TreeConfig) -> Rule | None:
    """Induce one single-branch tree on `rows` and return its rule.

    Stops when the depth bound is hit, a group empties, or no feature's best
    split beats the running maximum gain by more than `cost`. Returns None if
    no condition was ever accepted.
    """
    start_counts = group_counts(rows)
    baseline = start_counts if config.gain_baseline == ROOT_BASELINE else None
    recall_base = start_counts if config.recall_scope == TREE_RECALL else None
    pool = rows
    conditions: list[Condition] = []
    gains: list[float] = []
    max_gain = 0.0
    for _ in range(config.max_depth):
        counts = group_counts(pool)
        if counts.n_t == 0 or counts.n_c == 0:
            break
        cand = best_split(pool, config.criterion, config.constraints,
                          baseline_counts=baseline, recall_counts=recall_base)
        if cand is None or not cand.gain > max_gain + config.cost:
            break
        cond = Condition(cand.feature, cand.direction, cand.threshold)
        conditions.append(cond)
        gains.append(cand.gain)
        max_gain = cand.gain
        pool = pool.subset(condition_mask(cond, pool))
    if not conditions:
        return None
    rule = Rule(conditions=tuple(conditions), criterion=config.criterion,
                step_gains=tuple(gains))
    return rule_statistics(rule, rows)
