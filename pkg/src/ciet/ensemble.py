"""Sequential covering: learn a rule, remove its covered rows, repeat.

The resulting model is an ordered set of disjointly-trained rules plus a
fallback uplift estimate from the residual pool. Scoring is first-match by
default: an observation receives the training uplift rate of the first rule
covering it, or the fallback when none does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import CriterionKind
from .data import Dataset, GroupCounts, Observation, group_counts, uplift_rate
from .errors import EmptyGroupError, ModelFormatError, ParameterError, SchemaError
from .splitting import Direction, SplitConstraints
from .tree import Condition, Rule, TreeConfig, covers, covers_mask, learn_rule

FORMAT_NAME = "ciet-model"
FORMAT_VERSION = 1

FIRST_MATCH = "first"
MAX_MATCH = "max"


@dataclass(frozen=True)
class RuleSetModel:
    rules: tuple[Rule, ...]
    default_uplift: float
    config: TreeConfig
    rule_count: int
    feature_names: tuple[str, ...]


def learn_rule_set(dataset: Dataset, config: TreeConfig, rule_count: int = 3) -> RuleSetModel:
    """Induce up to rule_count rules, shrinking the pool after each one.

    Stops early when no further rule can be accepted. The fallback uplift is
    the residual pool's rate, or 0 when a group there is empty.
    """
    if rule_count < 1:
        raise ParameterError("rule_count must be >= 1")
    pool = dataset
    rules: list[Rule] = []
    while len(rules) < rule_count:
        rule = learn_rule(pool, config)
        if rule is None:
            break
        rules.append(rule)
        pool = pool.subset(~covers_mask(rule, pool))
    try:
        default = uplift_rate(group_counts(pool))
    except EmptyGroupError:
        default = 0.0
    return RuleSetModel(rules=tuple(rules), default_uplift=default, config=config,
                        rule_count=rule_count, feature_names=dataset.feature_names)


def _check_schema(model: RuleSetModel, dataset: Dataset) -> None:
    missing = set(model.feature_names) - set(dataset.feature_names)
    if missing:
        raise SchemaError(f"dataset lacks model features: {sorted(missing)}")


def predict_uplift(model: RuleSetModel, observation: Observation,
                   match: str = FIRST_MATCH) -> float:
    """Predicted uplift for one observation under the model's matching policy."""
    chosen = None
    for rule in model.rules:
        if covers(rule, observation, model.feature_names):
            if match == FIRST_MATCH:
                return rule.uplift
            if chosen is None or rule.uplift > chosen:
                chosen = rule.uplift
    return model.default_uplift if chosen is None else chosen


def predict_dataset(model: RuleSetModel, dataset: Dataset,
                    match: str = FIRST_MATCH) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized scoring: (uplift scores, index of the matched rule or -1)."""
    if match not in (FIRST_MATCH, MAX_MATCH):
        raise ParameterError(f"unknown match policy {match!r}")
    _check_schema(model, dataset)
    scores = np.full(dataset.n_rows, model.default_uplift)
    matched = np.full(dataset.n_rows, -1, dtype=np.int64)
    if match == FIRST_MATCH:
        for i in range(len(model.rules) - 1, -1, -1):
            m = covers_mask(model.rules[i], dataset)
            scores[m] = model.rules[i].uplift
            matched[m] = i
    else:
        best = np.full(dataset.n_rows, -np.inf)
        for i, rule in enumerate(model.rules):
            m = covers_mask(rule, dataset) & (rule.uplift > best)
            best[m] = rule.uplift
            matched[m] = i
        hit = matched >= 0
        scores[hit] = best[hit]
    return scores, matched


def _counts_doc(c: GroupCounts) -> dict:
    return {"n_t": c.n_t, "n_c": c.n_c, "y_t": c.y_t, "y_c": c.y_c}


def _counts_from_doc(doc: dict) -> GroupCounts:
    try:
        return GroupCounts(int(doc["n_t"]), int(doc["n_c"]), int(doc["y_t"]), int(doc["y_c"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad counts block: {exc}") from None


def _threshold_doc(t: float) -> dict:
    # 12 significant decimal digits for the human-readable field; the hex
    # form restores the exact value on import.
    return {"decimal": format(t, ".12g"), "hex": float(t).hex()}


def export_model(model: RuleSetModel) -> dict:
    """Serialize a rule-set model to a plain JSON-compatible document."""
    cons = model.config.constraints
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": "rule-set",
        "criterion": model.config.criterion.value,
        "feature_names": list(model.feature_names),
        "config": {
            "max_depth": model.config.max_depth,
            "cost": model.config.cost,
            "gain_baseline": model.config.gain_baseline,
            "recall_scope": model.config.recall_scope,
            "min_samples": cons.min_samples,
            "min_recall": cons.min_recall,
            "min_delta": cons.min_delta,
            "max_bins": cons.max_bins,
            "both_group_recall": cons.both_group_recall,
        },
        "rule_count": model.rule_count,
        "default_uplift": model.default_uplift,
        "rules": [
            {
                "conditions": [
                    {"feature": c.feature, "direction": c.direction.value,
                     "threshold": _threshold_doc(c.threshold)}
                    for c in rule.conditions
                ],
                "step_gains": list(rule.step_gains),
                "stats_before": _counts_doc(rule.stats_before),
                "stats_rule": _counts_doc(rule.stats_rule),
                "net_gain": rule.net_gain,
                "recall_treatment": rule.recall_treatment,
                "recall_control": rule.recall_control,
            }
            for rule in model.rules
        ],
    }


def _threshold_from_doc(doc) -> float:
    if isinstance(doc, dict) and "hex" in doc:
        value = float.fromhex(doc["hex"])
        check = float(doc.get("decimal", value))
        if not math.isclose(check, value, rel_tol=1e-9, abs_tol=1e-12):
            raise ModelFormatError(f"threshold fields disagree: {doc}")
    else:
        value = float(doc["decimal"] if isinstance(doc, dict) else doc)
    if not math.isfinite(value):
        raise ModelFormatError(f"non-finite threshold {doc!r}")
    return value


def import_model(doc: dict) -> RuleSetModel:
    """Rebuild a rule-set model from its document, validating invariants."""
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a model document")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    if doc.get("kind") != "rule-set":
        raise ModelFormatError(f"not a rule-set document: kind={doc.get('kind')!r}")
    try:
        criterion = CriterionKind(doc["criterion"])
        cfg = doc["config"]
        config = TreeConfig(
            criterion=criterion,
            max_depth=int(cfg["max_depth"]),
            cost=float(cfg["cost"]),
            gain_baseline=cfg["gain_baseline"],
            recall_scope=cfg["recall_scope"],
            constraints=SplitConstraints(
                min_samples=int(cfg["min_samples"]),
                min_recall=float(cfg["min_recall"]),
                min_delta=float(cfg["min_delta"]),
                max_bins=int(cfg["max_bins"]),
                both_group_recall=bool(cfg["both_group_recall"]),
            ),
        )
        rules = []
        for rd in doc["rules"]:
            conditions = tuple(
                Condition(cd["feature"], Direction(cd["direction"]),
                          _threshold_from_doc(cd["threshold"]))
                for cd in rd["conditions"]
            )
            rule = Rule(
                conditions=conditions,
                criterion=criterion,
                step_gains=tuple(float(g) for g in rd["step_gains"]),
                stats_before=_counts_from_doc(rd["stats_before"]),
                stats_rule=_counts_from_doc(rd["stats_rule"]),
                net_gain=float(rd["net_gain"]),
                recall_treatment=float(rd["recall_treatment"]),
                recall_control=float(rd["recall_control"]),
            )
            s, b = rule.stats_rule, rule.stats_before
            if s.n_t > b.n_t or s.n_c > b.n_c or s.y_t > b.y_t or s.y_c > b.y_c:
                raise ModelFormatError("rule covers more rows than its pool")
            rules.append(rule)
        model = RuleSetModel(
            rules=tuple(rules),
            default_uplift=float(doc["default_uplift"]),
            config=config,
            rule_count=int(doc["rule_count"]),
            feature_names=tuple(doc["feature_names"]),
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, ParameterError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from None
    if len(model.rules) > model.rule_count:
        raise ModelFormatError("more rules than rule_count allows")
    return model
