"""Best single-branch split selection for one feature.

For every candidate threshold v the scan scores two one-sided branches, the
rows with feature <= v and the rows with feature > v, against the node being
split. Candidates that violate the sample-size, recall, or minimum-gain
restrictions are suppressed. The winner is the highest-gain (direction,
threshold) pair; on equal maxima the <= direction wins, and within a
direction the smaller threshold wins.

Rows whose value is missing for the feature take no part in the scan; they can
never be covered by a condition on that feature and are counted on the
censored side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .criteria import CriterionKind
from .data import Dataset, Group, GroupCounts, group_counts, uplift_rate
from .errors import EmptyGroupError, ParameterError


class Direction(enum.Enum):
    LE = "<="
    GT = ">"


@dataclass(frozen=True)
class SplitConstraints:
    """Pre-pruning restrictions applied to every candidate branch.

    min_samples bounds the kept branch's total row count, min_recall the
    fraction of the node's treated responders the branch retains, and
    min_delta the criterion gain itself. With both_group_recall the recall
    bound also applies to control-group responders.
    """

    min_samples: int = 50
    min_recall: float = 0.1
    min_delta: float = 0.0
    max_bins: int = 256
    both_group_recall: bool = False

    def __post_init__(self):
        if self.min_samples < 1:
            raise ParameterError("min_samples must be >= 1")
        if not 0.0 <= self.min_recall <= 1.0:
            raise ParameterError("min_recall must be in [0, 1]")
        if self.max_bins < 2:
            raise ParameterError("max_bins must be >= 2")


@dataclass(frozen=True)
class SplitCandidate:
    """A scored one-sided split: keep rows on `direction` of `threshold`."""

    feature: str
    direction: Direction
    threshold: float
    gain: float
    kept_counts: GroupCounts
    censored_counts: GroupCounts


def candidate_thresholds(values: np.ndarray, max_bins: int = 256) -> np.ndarray:
    """Thresholds to scan for a feature with the given sorted distinct values.

    Up to max_bins distinct values the scan is exact: the midpoints of each
    adjacent pair. Beyond that, thresholds fall back to max_bins-1 quantile
    edges of the distinct values, deduplicated and strictly inside the range.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size >= 2 and not np.all(np.diff(values) > 0):
        raise ParameterError("values must be sorted ascending and distinct")
    if values.size < 2:
        return np.empty(0)
    if values.size <= max_bins:
        return (values[:-1] + values[1:]) / 2.0
    qs = np.quantile(values, np.arange(1, max_bins) / max_bins)
    qs = np.unique(qs[(qs > values[0]) & (qs < values[-1])])
    return qs


def recall_of(child: GroupCounts, parent: GroupCounts, group: Group = Group.TREATMENT) -> float:
    """Fraction of the parent's positive-outcome rows, per group, the child retains."""
    if group is Group.TREATMENT:
        y_child, y_parent = child.y_t, parent.y_t
    else:
        y_child, y_parent = child.y_c, parent.y_c
    if y_parent == 0:
        raise EmptyGroupError(f"parent has no {group.value} responders")
    return y_child / y_parent


def _branch_gains(criterion: CriterionKind, n_t, n_c, y_t, y_c, base_rate_diff: float):
    """Vectorized single-branch gain for arrays of candidate child counts."""
    with np.errstate(divide="ignore", invalid="ignore"):
        rate_diff = y_t / n_t - y_c / n_c
        if criterion is CriterionKind.LG:
            return (rate_diff - base_rate_diff) * (n_t + n_c)
        return rate_diff / base_rate_diff


def best_split_for_feature(rows: Dataset, feature: str, criterion: CriterionKind,
                           constraints: SplitConstraints,
                           baseline_counts: GroupCounts | None = None,
                           recall_counts: GroupCounts | None = None) -> SplitCandidate | None:
    """Scan one feature for the best restricted single-branch split.

    `baseline_counts` supplies the reference rates the gain is measured
    against and `recall_counts` the responder totals the recall bound is
    measured against; both default to the node itself (deeper tree levels pass
    the tree's starting pool instead). Returns None when no candidate survives
    the restrictions (including the degenerate cases: constant feature, a
    group empty in the node, or non-positive node uplift under the ratio
    criterion).
    """
    if not criterion.single_branch:
        raise ParameterError(f"{criterion} is not a single-branch criterion")
    parent = group_counts(rows)
    if parent.n_t == 0 or parent.n_c == 0:
        return None
    base = baseline_counts if baseline_counts is not None else parent
    recall_base = recall_counts if recall_counts is not None else parent
    base_rate_diff = uplift_rate(base)
    if criterion is CriterionKind.LGR and base_rate_diff <= 0.0:
        return None

    col = rows.column(feature)
    valid = ~np.isnan(col)
    vals = col[valid]
    if vals.size == 0:
        return None
    thresholds = candidate_thresholds(np.unique(vals), constraints.max_bins)
    if thresholds.size == 0:
        return None

    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    st = rows.treated[valid][order]
    sy = rows.outcome[valid][order].astype(np.int64)
    cum_n = np.arange(1, sv.size + 1, dtype=np.int64)
    cum_nt = np.cumsum(st)
    cum_yt = np.cumsum(st * sy)
    cum_y = np.cumsum(sy)

    pos = np.searchsorted(sv, thresholds, side="right")
    nt_le = cum_nt[pos - 1]
    n_le = cum_n[pos - 1]
    yt_le = cum_yt[pos - 1]
    y_le = cum_y[pos - 1]
    nc_le = n_le - nt_le
    yc_le = y_le - yt_le
    nt_gt, nc_gt = cum_nt[-1] - nt_le, (cum_n[-1] - cum_nt[-1]) - nc_le
    yt_gt, yc_gt = cum_yt[-1] - yt_le, (cum_y[-1] - cum_yt[-1]) - yc_le

    best: tuple[float, Direction, int, GroupCounts] | None = None
    for direction, nt, nc, yt, yc in ((Direction.LE, nt_le, nc_le, yt_le, yc_le),
                                      (Direction.GT, nt_gt, nc_gt, yt_gt, yc_gt)):
        gains = _branch_gains(criterion, nt, nc, yt, yc, base_rate_diff)
        ok = (nt > 0) & (nc > 0) & (nt + nc >= constraints.min_samples)
        if recall_base.y_t > 0:
            ok &= (yt / recall_base.y_t) >= constraints.min_recall
        else:
            ok &= False
        if constraints.both_group_recall:
            ok &= ((yc / recall_base.y_c) >= constraints.min_recall) if recall_base.y_c > 0 else False
        ok &= np.isfinite(gains) & (gains >= constraints.min_delta)
        if not ok.any():
            continue
        gains = np.where(ok, gains, -np.inf)
        i = int(np.argmax(gains))
        if best is None or gains[i] > best[0]:
            counts = GroupCounts(int(nt[i]), int(nc[i]), int(yt[i]), int(yc[i]))
            best = (float(gains[i]), direction, i, counts)

    if best is None:
        return None
    gain, direction, i, kept = best
    return SplitCandidate(feature=feature, direction=direction,
                          threshold=float(thresholds[i]), gain=gain,
                          kept_counts=kept, censored_counts=parent - kept)


def best_split(rows: Dataset, criterion: CriterionKind, constraints: SplitConstraints,
               baseline_counts: GroupCounts | None = None,
               recall_counts: GroupCounts | None = None,
               features: tuple[str, ...] | None = None) -> SplitCandidate | None:
    """Best restricted split over all features; name order breaks gain ties."""
    names = sorted(features if features is not None else rows.feature_names)
    best_cand = None
    for name in names:
        cand = best_split_for_feature(rows, name, criterion, constraints,
                                      baseline_counts, recall_counts)
        if cand is not None and (best_cand is None or cand.gain > best_cand.gain):
            best_cand = cand
    return best_cand
