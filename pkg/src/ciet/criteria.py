"""Divergence measures and split-gain computations.

Two families live here. The single-branch criteria (lift gain and lift gain
ratio) score one covered branch against the node it came from. The binary-tree
criteria (Kullback-Leibler and squared Euclidean divergence between the two
groups' outcome distributions) score a full two-child partition through the
weighted conditional-gain scheme.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .data import GroupCounts, uplift_rate
from .errors import EmptyGroupError, IneligibleSplitError, ZeroParentUpliftError

KL_CLAMP_EPS = 1e-9


class CriterionKind(enum.Enum):
    LG = "lg"    # lift gain (single-branch)
    LGR = "lgr"  # lift gain ratio (single-branch)
    KL = "kl"    # Kullback-Leibler divergence (binary baseline)
    ED = "ed"    # squared Euclidean distance (binary baseline)

    @property
    def single_branch(self) -> bool:
        return self in (CriterionKind.LG, CriterionKind.LGR)


@dataclass(frozen=True)
class SplitContext:
    """Counts for one candidate branch and for the node being split."""

    parent_counts: GroupCounts
    child_counts: GroupCounts

    def __post_init__(self):
        c, p = self.child_counts, self.parent_counts
        if not (c.n_t <= p.n_t and c.n_c <= p.n_c and c.y_t <= p.y_t and c.y_c <= p.y_c):
            raise ValueError("child counts exceed parent counts")


def lift_gain(ctx: SplitContext) -> float:
    """Excess responder difference of the branch over its expectation at parent rates.

    Equals branch size times (branch uplift rate - parent uplift rate); zero
    when the branch merely mirrors the parent.
    """
    child_rate = uplift_rate(ctx.child_counts)
    parent_rate = uplift_rate(ctx.parent_counts)
    return (child_rate - parent_rate) * ctx.child_counts.n


def lift_gain_ratio(ctx: SplitContext) -> float:
    """Branch uplift rate normalized by the parent's uplift rate."""
    parent_rate = uplift_rate(ctx.parent_counts)
    if parent_rate == 0.0:
        raise ZeroParentUpliftError("parent uplift is zero; ratio undefined")
    return uplift_rate(ctx.child_counts) / parent_rate


def kl_divergence(p_t: float, p_c: float) -> float:
    """KL divergence between two Bernoulli distributions, treatment vs control.

    The reference probability is clamped away from 0 and 1 so boundary cases
    stay finite; 0*log(0/x) is taken as 0 and identical distributions score
    exactly 0 even at the boundary.
    """
    if p_t == p_c:
        return 0.0
    q = min(max(p_c, KL_CLAMP_EPS), 1.0 - KL_CLAMP_EPS)
    out = 0.0
    if p_t > 0.0:
        out += p_t * math.log(p_t / q)
    if p_t < 1.0:
        out += (1.0 - p_t) * math.log((1.0 - p_t) / (1.0 - q))
    return out


def euclid_divergence(p_t: float, p_c: float) -> float:
    """Squared Euclidean distance between two Bernoulli distributions: 2*(p_t-p_c)^2."""
    d = p_t - p_c
    return 2.0 * d * d


_DIVERGENCES = {CriterionKind.KL: kl_divergence, CriterionKind.ED: euclid_divergence}


def conditional_gain(divergence: CriterionKind, parent: GroupCounts,
                     left: GroupCounts, right: GroupCounts) -> float:
    """Size-weighted child divergence minus the parent divergence for a binary split."""
    if divergence not in _DIVERGENCES:
        raise ValueError(f"{divergence} is not a binary-tree divergence")
    if left + right != parent:
        raise IneligibleSplitError("children do not partition the parent")
    d = _DIVERGENCES[divergence]
    try:
        total = 0.0
        for side in (left, right):
            w = side.n / parent.n
            total += w * d(side.y_t / side.n_t, side.y_c / side.n_c)
        return total - d(parent.y_t / parent.n_t, parent.y_c / parent.n_c)
    except ZeroDivisionError:
        raise EmptyGroupError("a child is empty in one group") from None
