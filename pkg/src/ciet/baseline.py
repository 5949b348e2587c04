"""Reference binary uplift decision trees (KL / squared Euclidean criteria).

Construction is the classic greedy one: at each node pick the feature and
threshold maximizing the size-weighted divergence gain between the groups'
outcome distributions, recurse into both children. Threshold enumeration,
min_samples and min_delta semantics match the single-branch trees so the
splitting criterion is the only differing factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criteria import KL_CLAMP_EPS, CriterionKind
from .data import Dataset, GroupCounts, Observation, group_counts, uplift_rate
from .errors import EmptyGroupError, ModelFormatError, ParameterError, SchemaError
from .splitting import SplitConstraints, candidate_thresholds

from .ensemble import FORMAT_NAME, FORMAT_VERSION, _counts_doc, _counts_from_doc, \
    _threshold_doc, _threshold_from_doc


@dataclass(frozen=True)
class BinaryNode:
    """Internal node (feature set) or leaf (feature None) of a binary uplift tree."""

    counts: GroupCounts
    uplift: float
    feature: str | None = None
    threshold: float = float("nan")
    missing_left: bool = True
    left: "BinaryNode | None" = None
    right: "BinaryNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def leaves(self) -> list["BinaryNode"]:
        if self.is_leaf:
            return [self]
        return self.left.leaves() + self.right.leaves()

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass(frozen=True)
class BaselineTreeModel:
    root: BinaryNode
    divergence: CriterionKind
    max_depth: int
    constraints: SplitConstraints
    feature_names: tuple[str, ...]


def _kl_array(p_t: np.ndarray, p_c: np.ndarray) -> np.ndarray:
    q = np.clip(p_c, KL_CLAMP_EPS, 1.0 - KL_CLAMP_EPS)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p_t > 0.0, p_t * np.log(np.where(p_t > 0.0, p_t, 1.0) / q), 0.0)
        b = np.where(p_t < 1.0,
                     (1.0 - p_t) * np.log(np.where(p_t < 1.0, 1.0 - p_t, 1.0) / (1.0 - q)),
                     0.0)
    return np.where(p_t == p_c, 0.0, a + b)


def _ed_array(p_t: np.ndarray, p_c: np.ndarray) -> np.ndarray:
    d = p_t - p_c
    return 2.0 * d * d


_DIV_ARRAYS = {CriterionKind.KL: _kl_array, CriterionKind.ED: _ed_array}


@dataclass(frozen=True)
class _BinarySplit:
    feature: str
    threshold: float
    gain: float


def _best_binary_split(rows: Dataset, divergence: CriterionKind,
                       constraints: SplitConstraints) -> _BinarySplit | None:
    parent = group_counts(rows)
    div = _DIV_ARRAYS[divergence]
    parent_d = float(div(np.array([parent.y_t / parent.n_t]),
                         np.array([parent.y_c / parent.n_c]))[0])
    best: _BinarySplit | None = None
    for feature in sorted(rows.feature_names):
        col = rows.column(feature)
        valid = ~np.isnan(col)
        vals = col[valid]
        if vals.size == 0:
            continue
        thresholds = candidate_thresholds(np.unique(vals), constraints.max_bins)
        if thresholds.size == 0:
            continue
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        st = rows.treated[valid][order]
        sy = rows.outcome[valid][order].astype(np.int64)
        pos = np.searchsorted(sv, thresholds, side="right")
        nt_l = np.cumsum(st)[pos - 1]
        n_l = pos
        yt_l = np.cumsum(st * sy)[pos - 1]
        y_l = np.cumsum(sy)[pos - 1]
        nc_l = n_l - nt_l
        yc_l = y_l - yt_l
        nt_r = int(st.sum()) - nt_l
        nc_r = (sv.size - int(st.sum())) - nc_l
        yt_r = int((st * sy).sum()) - yt_l
        yc_r = int(sy.sum()) - int((st * sy).sum()) - yc_l

        ok = (nt_l > 0) & (nc_l > 0) & (nt_r > 0) & (nc_r > 0)
        ok &= (nt_l + nc_l >= constraints.min_samples) & (nt_r + nc_r >= constraints.min_samples)
        if not ok.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            d_l = div(yt_l / nt_l, yc_l / nc_l)
            d_r = div(yt_r / nt_r, yc_r / nc_r)
            n = sv.size
            gains = ((nt_l + nc_l) / n) * d_l + ((nt_r + nc_r) / n) * d_r - parent_d
        gains = np.where(ok & np.isfinite(gains), gains, -np.inf)
        i = int(np.argmax(gains))
        if gains[i] > constraints.min_delta and (best is None or gains[i] > best.gain):
            best = _BinarySplit(feature, float(thresholds[i]), float(gains[i]))
    return best


def _grow(rows: Dataset, divergence: CriterionKind, constraints: SplitConstraints,
          depth_left: int) -> BinaryNode:
    counts = group_counts(rows)
    uplift = uplift_rate(counts)
    if depth_left == 0:
        return BinaryNode(counts, uplift)
    split = _best_binary_split(rows, divergence, constraints)
    if split is None:
        return BinaryNode(counts, uplift)
    col = rows.column(split.feature)
    left = col <= split.threshold
    right = col > split.threshold
    missing = ~(left | right)
    missing_left = int(left.sum()) >= int(right.sum())
    if missing.any():
        if missing_left:
            left |= missing
        else:
            right |= missing
    return BinaryNode(
        counts, uplift, feature=split.feature, threshold=split.threshold,
        missing_left=missing_left,
        left=_grow(rows.subset(left), divergence, constraints, depth_left - 1),
        right=_grow(rows.subset(right), divergence, constraints, depth_left - 1),
    )


def learn_baseline_tree(dataset: Dataset, divergence: CriterionKind,
                        constraints: SplitConstraints, max_depth: int = 3) -> BinaryNode:
    """Grow a binary uplift tree by greedy divergence-gain maximization.

    Recursion stops at max_depth, when no candidate keeps min_samples rows and
    both groups nonempty in each child, or when the best gain is <= min_delta.
    Only min_samples / min_delta / max_bins of the constraints apply here;
    recall bounds are specific to single-branch search.
    """
    if divergence not in _DIV_ARRAYS:
        raise ParameterError(f"{divergence} is not a binary-tree divergence")
    if max_depth < 0:
        raise ParameterError("max_depth must be >= 0")
    counts = group_counts(dataset)
    if counts.n_t == 0 or counts.n_c == 0:
        raise EmptyGroupError("baseline tree needs both groups at the root")
    return _grow(dataset, divergence, constraints, max_depth)


def train_baseline(dataset: Dataset, divergence: CriterionKind,
                   constraints: SplitConstraints | None = None,
                   max_depth: int = 3) -> BaselineTreeModel:
    constraints = constraints if constraints is not None else SplitConstraints()
    root = learn_baseline_tree(dataset, divergence, constraints, max_depth)
    return BaselineTreeModel(root=root, divergence=divergence, max_depth=max_depth,
                             constraints=constraints, feature_names=dataset.feature_names)


def predict_baseline(tree: BinaryNode, observation: Observation,
                     feature_names: tuple[str, ...]) -> float:
    """Route one observation to its leaf and return that leaf's uplift."""
    node = tree
    while not node.is_leaf:
        value = float(observation.features[feature_names.index(node.feature)])
        if np.isnan(value):
            node = node.left if node.missing_left else node.right
        elif value <= node.threshold:
            node = node.left
        else:
            node = node.right
    return node.uplift


def predict_baseline_dataset(model: BaselineTreeModel, dataset: Dataset) -> np.ndarray:
    missing_feats = set(model.feature_names) - set(dataset.feature_names)
    if missing_feats:
        raise SchemaError(f"dataset lacks model features: {sorted(missing_feats)}")
    out = np.empty(dataset.n_rows)

    def fill(node: BinaryNode, mask: np.ndarray) -> None:
        if node.is_leaf:
            out[mask] = node.uplift
            return
        col = dataset.column(node.feature)
        left = mask & (col <= node.threshold)
        right = mask & (col > node.threshold)
        missing = mask & ~(col <= node.threshold) & ~(col > node.threshold)
        if node.missing_left:
            left |= missing
        else:
            right |= missing
        fill(node.left, left)
        fill(node.right, right)

    fill(model.root, np.ones(dataset.n_rows, dtype=bool))
    return out


def _node_doc(node: BinaryNode) -> dict:
    doc = {"counts": _counts_doc(node.counts), "uplift": node.uplift}
    if not node.is_leaf:
        doc.update({
            "feature": node.feature,
            "threshold": _threshold_doc(node.threshold),
            "missing_left": node.missing_left,
            "left": _node_doc(node.left),
            "right": _node_doc(node.right),
        })
    return doc


def _node_from_doc(doc: dict) -> BinaryNode:
    try:
        counts = _counts_from_doc(doc["counts"])
        uplift = float(doc["uplift"])
        if "feature" not in doc:
            return BinaryNode(counts, uplift)
        left = _node_from_doc(doc["left"])
        right = _node_from_doc(doc["right"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed tree node: {exc}") from None
    if left.counts + right.counts != counts:
        raise ModelFormatError("children do not partition the node")
    return BinaryNode(counts, uplift, feature=str(doc["feature"]),
                      threshold=_threshold_from_doc(doc["threshold"]),
                      missing_left=bool(doc["missing_left"]), left=left, right=right)


def export_baseline(model: BaselineTreeModel) -> dict:
    cons = model.constraints
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": "binary-tree",
        "criterion": model.divergence.value,
        "feature_names": list(model.feature_names),
        "config": {
            "max_depth": model.max_depth,
            "min_samples": cons.min_samples,
            "min_delta": cons.min_delta,
            "max_bins": cons.max_bins,
        },
        "tree": _node_doc(model.root),
    }


def import_baseline(doc: dict) -> BaselineTreeModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a model document")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    if doc.get("kind") != "binary-tree":
        raise ModelFormatError(f"not a binary-tree document: kind={doc.get('kind')!r}")
    try:
        cfg = doc["config"]
        return BaselineTreeModel(
            root=_node_from_doc(doc["tree"]),
            divergence=CriterionKind(doc["criterion"]),
            max_depth=int(cfg["max_depth"]),
            constraints=SplitConstraints(min_samples=int(cfg["min_samples"]),
                                         min_delta=float(cfg["min_delta"]),
                                         max_bins=int(cfg["max_bins"])),
            feature_names=tuple(doc["feature_names"]),
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, ParameterError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from None
