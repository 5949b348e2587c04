"""Uplift curve, AUUC, Qini curve and Qini coefficient.

Observations are ranked by predicted uplift, largest first, and cumulative
group statistics are accumulated over the top-t prefix. Ties in score are
ordered by a pseudo-random permutation drawn from an evaluation seed; scalar
metrics average over several tie-break seeds (default 11) to de-bias models
that emit piecewise-constant scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .data import Group
from .errors import DegenerateNormalizerError, ParameterError

DEFAULT_TIE_SEEDS = 11


@dataclass(frozen=True)
class ScoredOutcome:
    score: float
    group: Group
    outcome: int


@dataclass(frozen=True)
class CurvePoint:
    t: int
    value: float


def as_arrays(scored: Iterable[ScoredOutcome]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    scored = list(scored)
    scores = np.array([s.score for s in scored], dtype=np.float64)
    treated = np.array([s.group is Group.TREATMENT for s in scored], dtype=bool)
    outcomes = np.array([s.outcome for s in scored], dtype=np.int64)
    return scores, treated, outcomes


def _tie_order(scores: np.ndarray, seed: int) -> np.ndarray:
    """Indices sorting scores descending; equal scores in seeded random order."""
    tie_key = np.random.default_rng(seed).permutation(scores.size)
    return np.lexsort((tie_key, -scores))


def _prefix_counts(scores, treated, outcomes, seed):
    order = _tie_order(np.asarray(scores, dtype=np.float64), seed)
    st = np.asarray(treated, dtype=bool)[order]
    sy = np.asarray(outcomes, dtype=np.int64)[order]
    n_t = np.cumsum(st)
    n_c = np.arange(1, st.size + 1, dtype=np.int64) - n_t
    y_t = np.cumsum(st * sy)
    y_c = np.cumsum(sy) - y_t
    return n_t, n_c, y_t, y_c


def uplift_curve_values(scores, treated, outcomes, seed: int = 0) -> np.ndarray:
    """Cumulative uplift statistic f(t) for t = 0..N as a dense array.

    f(t) = (Y_t^T/N_t^T - Y_t^C/N_t^C) (N_t^T + N_t^C); prefixes where either
    group is still empty contribute 0.
    """
    n_t, n_c, y_t, y_c = _prefix_counts(scores, treated, outcomes, seed)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (y_t / n_t - y_c / n_c) * (n_t + n_c)
    f = np.where((n_t == 0) | (n_c == 0), 0.0, f)
    return np.concatenate([[0.0], f])


def qini_curve_values(scores, treated, outcomes, seed: int = 0) -> np.ndarray:
    """Cumulative Qini statistic g(t) = Y_t^T - Y_t^C N_t^T / N_t^C for t = 0..N.

    While the control prefix is empty the correction term is taken as 0, so
    g(t) = Y_t^T there.
    """
    n_t, n_c, y_t, y_c = _prefix_counts(scores, treated, outcomes, seed)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = y_t - y_c * n_t / n_c
    g = np.where(n_c == 0, y_t.astype(np.float64), g)
    return np.concatenate([[0.0], g])


def _points(values: np.ndarray) -> list[CurvePoint]:
    return [CurvePoint(t, float(v)) for t, v in enumerate(values)]


def uplift_curve(scored: Sequence[ScoredOutcome], seed: int = 0) -> list[CurvePoint]:
    return _points(uplift_curve_values(*as_arrays(scored), seed=seed))


def qini_curve(scored: Sequence[ScoredOutcome], seed: int = 0) -> list[CurvePoint]:
    return _points(qini_curve_values(*as_arrays(scored), seed=seed))


def auuc(curve: Sequence[CurvePoint]) -> float:
    """Trapezoidal area of a curve over t, divided by N (the final t).

    The result is in per-observation units, comparable across sample sizes;
    feed percentile-sampled points for the conventional binned variant.
    """
    if not curve:
        raise ParameterError("empty curve")
    ts = np.array([p.t for p in curve], dtype=np.float64)
    vs = np.array([p.value for p in curve], dtype=np.float64)
    if ts[-1] <= 0:
        raise ParameterError("curve must end at t > 0")
    return float(np.trapezoid(vs, ts) / ts[-1])


def percentile_points(values: np.ndarray, bins: int = 100) -> list[CurvePoint]:
    """Sample a dense t = 0..N curve at ~bins evenly spaced prefix counts."""
    n = values.size - 1
    ts = np.unique(np.round(np.linspace(0.0, n, bins + 1)).astype(np.int64))
    return [CurvePoint(int(t), float(values[t])) for t in ts]


def optimal_scores(treated, outcomes) -> np.ndarray:
    """Oracle ranking proxy: outcome for treated rows, 1 - outcome for control."""
    treated = np.asarray(treated, dtype=bool)
    outcomes = np.asarray(outcomes, dtype=np.float64)
    return np.where(treated, outcomes, 1.0 - outcomes)


def auuc_score(scores, treated, outcomes, bins: int = 100, seed: int = 0,
               tie_seeds: int = DEFAULT_TIE_SEEDS) -> float:
    """Percentile-binned AUUC averaged over the tie-break seeds."""
    vals = [auuc(percentile_points(uplift_curve_values(scores, treated, outcomes, seed=s), bins))
            for s in range(seed, seed + tie_seeds)]
    return float(np.mean(vals))


def _qini_single(scores, treated, outcomes, seed: int) -> float:
    g = qini_curve_values(scores, treated, outcomes, seed=seed)
    g_opt = qini_curve_values(optimal_scores(treated, outcomes), treated, outcomes, seed=seed)
    n = g.size - 1
    area = float(np.trapezoid(g, dx=1.0))
    area_random = n * g[-1] / 2.0
    area_optimal = float(np.trapezoid(g_opt, dx=1.0))
    denom = area_optimal - area_random
    if denom == 0.0:
        raise DegenerateNormalizerError("optimal targeting equals random targeting")
    return (area - area_random) / denom


def qini_coefficient_from_arrays(scores, treated, outcomes, seed: int = 0,
                                 tie_seeds: int = DEFAULT_TIE_SEEDS) -> float:
    """Qini area over the random diagonal, normalized by the optimal curve's.

    Averaged over tie-break seeds; exactly 1.0 when the scores already induce
    the oracle ordering.
    """
    vals = [_qini_single(scores, treated, outcomes, s) for s in range(seed, seed + tie_seeds)]
    return float(np.mean(vals))


def qini_coefficient(scored: Sequence[ScoredOutcome], seed: int = 0,
                     tie_seeds: int = DEFAULT_TIE_SEEDS) -> float:
    return qini_coefficient_from_arrays(*as_arrays(scored), seed=seed, tie_seeds=tie_seeds)


def curve_table(scores, treated, outcomes, bins: int = 100, seed: int = 0,
                tie_seeds: int = DEFAULT_TIE_SEEDS) -> dict[str, np.ndarray]:
    """Percentile-sampled evaluation curves, averaged over tie-break seeds.

    Columns: t, fraction, f (uplift curve), g (Qini curve), random_f (straight
    line to f's endpoint), optimal_g (Qini curve under oracle ranking).
    """
    n = np.asarray(scores).size
    f_acc = g_acc = opt_acc = None
    for s in range(seed, seed + tie_seeds):
        f = uplift_curve_values(scores, treated, outcomes, seed=s)
        g = qini_curve_values(scores, treated, outcomes, seed=s)
        o = qini_curve_values(optimal_scores(treated, outcomes), treated, outcomes, seed=s)
        f_acc = f if f_acc is None else f_acc + f
        g_acc = g if g_acc is None else g_acc + g
        opt_acc = o if opt_acc is None else opt_acc + o
    f_avg, g_avg, opt_avg = f_acc / tie_seeds, g_acc / tie_seeds, opt_acc / tie_seeds
    ts = np.array([p.t for p in percentile_points(f_avg, bins)], dtype=np.int64)
    frac = ts / n if n else ts.astype(np.float64)
    return {
        "t": ts,
        "fraction": frac,
        "f": f_avg[ts],
        "g": g_avg[ts],
        "random_f": frac * f_avg[-1],
        "optimal_g": opt_avg[ts],
    }
