"""Single-branch ensemble trees for uplift modeling.

Learns small sets of disjoint IF-THEN uplift rules from randomized-trial data
by greedy lift-gain maximization, alongside classic binary uplift trees for
comparison, and evaluates models with uplift curves, AUUC and the Qini
coefficient.
"""

from .baseline import (BaselineTreeModel, BinaryNode, export_baseline, import_baseline,
                       learn_baseline_tree, predict_baseline, predict_baseline_dataset,
                       train_baseline)
from .criteria import (CriterionKind, SplitContext, conditional_gain, euclid_divergence,
                       kl_divergence, lift_gain, lift_gain_ratio)
from .data import (CsvConfig, Dataset, Group, GroupCounts, Observation, distribution_filter,
                   group_counts, load_csv, one_hot_encode, stratified_split, uplift_rate,
                   write_csv)
from .ensemble import (RuleSetModel, export_model, import_model, learn_rule_set,
                       predict_dataset, predict_uplift)
from .metrics import (CurvePoint, ScoredOutcome, auuc, auuc_score, curve_table, optimal_scores,
                      percentile_points, qini_coefficient, qini_coefficient_from_arrays,
                      qini_curve, qini_curve_values, uplift_curve, uplift_curve_values)
from .splitting import (Direction, SplitCandidate, SplitConstraints, best_split,
                        best_split_for_feature, candidate_thresholds, recall_of)
from .synth import SynthSpec, generate, reference_spec
from .tree import (Condition, Rule, TreeConfig, covers, covers_mask, learn_rule,
                   rule_statistics)

__version__ = "0.1.0"
