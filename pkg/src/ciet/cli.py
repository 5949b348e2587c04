"""Command-line surface: generate, train, eval, score.

Exit codes: 0 success, 2 usage/parameter error, 3 data error, 4 schema or
model-document error. A flat key=value config file can preseed any flag of
the chosen subcommand; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import _svg
from .baseline import (BaselineTreeModel, export_baseline, import_baseline,
                       predict_baseline_dataset, train_baseline)
from .criteria import CriterionKind
from .data import (CsvConfig, Dataset, distribution_filter, load_csv, one_hot_encode,
                   stratified_split, write_csv)
from .ensemble import RuleSetModel, export_model, import_model, learn_rule_set, predict_dataset
from .errors import (DataError, DegenerateNormalizerError, EmptyGroupError, ModelFormatError,
                     ParameterError, SchemaError)
from .metrics import auuc, curve_table, percentile_points, qini_coefficient_from_arrays, CurvePoint
from .synth import SynthSpec, generate, reference_spec
from .tree import TreeConfig
from .splitting import SplitConstraints

MODEL_KINDS = ("ciet-lg", "ciet-lgr", "kl", "ed")
PRESETS = {"reference": reference_spec}


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group-column", default="group")
    p.add_argument("--outcome-column", default="outcome")
    p.add_argument("--treatment-value", action="append",
                   help="group-column value mapped to the treatment arm (repeatable)")
    p.add_argument("--control-value", action="append",
                   help="group-column value mapped to the control arm (repeatable)")
    p.add_argument("--group-default", choices=("treatment", "control"),
                   help="arm for group values not listed explicitly")
    p.add_argument("--outcome-one", action="append",
                   help="outcome-column value mapped to 1 (repeatable)")
    p.add_argument("--outcome-zero", action="append",
                   help="outcome-column value mapped to 0 (repeatable)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--filter-threshold", type=float, default=None,
                   help="drop features with a larger between-group distribution difference")
    p.add_argument("--one-hot", action="store_true",
                   help="one-hot encode categorical features after filtering")


def _add_train_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--rule-count", type=int, default=3)
    p.add_argument("--min-samples", type=int, default=50)
    p.add_argument("--min-recall", type=float, default=0.1)
    p.add_argument("--cost", type=float, default=0.01)
    p.add_argument("--min-delta", type=float, default=0.0)
    p.add_argument("--max-bins", type=int, default=256)
    p.add_argument("--gain-baseline", choices=("parent", "root"), default="parent")
    p.add_argument("--recall-scope", choices=("tree", "node"), default="tree")


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split", type=float, default=None,
                   help="stratified first-part fraction, e.g. 0.5")
    p.add_argument("--stratify", default="group,outcome",
                   help="comma list of stratification keys (group, outcome)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="ciet",
                                     description="Single-branch ensemble trees for uplift modeling")
    subs = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    g = subs.add_parser("generate", help="write a synthetic randomized-trial CSV")
    g.add_argument("--config", default=None)
    g.add_argument("--preset", choices=sorted(PRESETS), default=None)
    g.add_argument("--n-treatment", type=int, default=3000)
    g.add_argument("--n-control", type=int, default=3000)
    g.add_argument("--n-informative", type=int, default=6)
    g.add_argument("--n-irrelevant", type=int, default=2)
    g.add_argument("--n-uplift", type=int, default=2)
    g.add_argument("--n-mix", type=int, default=1)
    g.add_argument("--base-response", type=float, default=0.5)
    g.add_argument("--treatment-lift", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    commands["generate"] = g

    t = subs.add_parser("train", help="train a model and write its document")
    t.add_argument("--config", default=None)
    t.add_argument("--data", required=True)
    t.add_argument("--model-kind", choices=MODEL_KINDS, required=True)
    t.add_argument("-o", "--output", required=True)
    _add_train_config_flags(t)
    _add_ingest_flags(t)
    _add_split_flags(t)
    t.add_argument("--split-part", choices=("train", "test"), default="train",
                   help="which part to train on when --split is given")
    commands["train"] = t

    e = subs.add_parser("eval", help="report AUUC and Qini for one or more models")
    e.add_argument("--config", default=None)
    e.add_argument("--model", action="append", required=True,
                   help="model document path (repeatable)")
    e.add_argument("--data", required=True)
    e.add_argument("--bins", type=int, default=100)
    e.add_argument("--tie-seeds", type=int, default=11)
    e.add_argument("--curves-out", default=None,
                   help="directory for per-model curve CSVs and an overlay SVG")
    _add_ingest_flags(e)
    _add_split_flags(e)
    commands["eval"] = e

    s = subs.add_parser("score", help="write per-row predicted uplift")
    s.add_argument("--config", default=None)
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--match", choices=("first", "max"), default="first")
    _add_ingest_flags(s)
    commands["score"] = s
    return parser, commands


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(sub: argparse.ArgumentParser, config: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in config.items():
        if key not in actions:
            raise ParameterError(f"unknown config key {key!r}")
        action = actions[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [v.strip() for v in raw.split(",")]
        elif action.type is not None:
            defaults[key] = action.type(raw)
        else:
            defaults[key] = raw
    sub.set_defaults(**defaults)


def _csv_config(args) -> CsvConfig:
    group_map = {}
    for v in args.treatment_value or ["treatment"]:
        group_map[v] = "treatment"
    for v in args.control_value or ["control"]:
        group_map[v] = "control"
    outcome_map = {}
    for v in args.outcome_one or ["1"]:
        outcome_map[v] = 1
    for v in args.outcome_zero or ["0"]:
        outcome_map[v] = 0
    return CsvConfig(group_column=args.group_column, outcome_column=args.outcome_column,
                     group_map=group_map, group_default=args.group_default,
                     outcome_map=outcome_map, delimiter=args.delimiter)


def _load_dataset(args) -> Dataset:
    ds = load_csv(args.data, _csv_config(args))
    if args.filter_threshold is not None:
        ds = distribution_filter(ds, args.filter_threshold)
    if args.one_hot:
        ds = one_hot_encode(ds)
    return ds


def _split_part(ds: Dataset, args, part: str) -> Dataset:
    keys = tuple(k.strip() for k in args.stratify.split(",") if k.strip())
    bad = set(keys) - {"group", "outcome"}
    if bad:
        raise ParameterError(f"cannot stratify on {sorted(bad)}")
    first, second = stratified_split(ds, args.split, args.seed, by=keys)
    return first if part == "train" else second


def _tree_config(args, criterion: CriterionKind) -> TreeConfig:
    return TreeConfig(criterion=criterion, max_depth=args.max_depth, cost=args.cost,
                      gain_baseline=args.gain_baseline, recall_scope=args.recall_scope,
                      constraints=SplitConstraints(min_samples=args.min_samples,
                                                   min_recall=args.min_recall,
                                                   min_delta=args.min_delta,
                                                   max_bins=args.max_bins))


def rule_table(model: RuleSetModel) -> str:
    """Per-rule statistics table: one column per rule, layout of the rule reports."""
    if not model.rules:
        return "(no rules accepted)"
    depth = max(len(r.conditions) for r in model.rules)
    headers = ["rule number"] + [f'"{i + 1}"' for i in range(len(model.rules))]
    rows = [headers]
    for d in range(depth):
        line = ["node logic"]
        for r in model.rules:
            line.append(r.conditions[d].render() if d < len(r.conditions) else "null")
        rows.append(line)
    fields = [
        ("N_before", lambda r: str(r.stats_before.n)),
        ("N_before^T", lambda r: str(r.stats_before.n_t)),
        ("N_before^C", lambda r: str(r.stats_before.n_c)),
        ("N_rule", lambda r: str(r.stats_rule.n)),
        ("N_rule^T", lambda r: str(r.stats_rule.n_t)),
        ("N_rule^C", lambda r: str(r.stats_rule.n_c)),
        ("net gain", lambda r: f"{r.net_gain:.2f}"),
        ("recall_treatment", lambda r: f"{100 * r.recall_treatment:.2f}%"),
        ("recall_control", lambda r: f"{100 * r.recall_control:.2f}%"),
    ]
    for name, fn in fields:
        rows.append([name] + [fn(r) for r in model.rules])
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                     for row in rows)


def baseline_table(model: BaselineTreeModel) -> str:
    lines = [f"binary uplift tree: criterion={model.divergence.value}, "
             f"depth={model.root.depth()}, leaves={len(model.root.leaves())}"]
    for i, leaf in enumerate(model.root.leaves(), 1):
        c = leaf.counts
        lines.append(f"  leaf {i}: n_t={c.n_t} n_c={c.n_c} y_t={c.y_t} y_c={c.y_c} "
                     f"uplift={leaf.uplift:.4f}")
    return "\n".join(lines)


def cmd_generate(args) -> int:
    if args.preset is not None:
        spec = PRESETS[args.preset](args.seed)
    else:
        spec = SynthSpec(n_treatment=args.n_treatment, n_control=args.n_control,
                         n_informative=args.n_informative, n_irrelevant=args.n_irrelevant,
                         n_uplift=args.n_uplift, n_mix=args.n_mix,
                         base_response=args.base_response, treatment_lift=args.treatment_lift,
                         seed=args.seed)
    ds = generate(spec)
    write_csv(ds, args.output)
    print(f"wrote {ds.n_rows} rows x {ds.n_features} features to {args.output}")
    return 0


def cmd_train(args) -> int:
    ds = _load_dataset(args)
    if args.split is not None:
        ds = _split_part(ds, args, args.split_part)
    counts = ds.counts()
    if counts.n_t == 0 or counts.n_c == 0:
        raise EmptyGroupError("training data must contain both treatment and control rows")
    if args.model_kind in ("ciet-lg", "ciet-lgr"):
        criterion = CriterionKind.LG if args.model_kind == "ciet-lg" else CriterionKind.LGR
        model = learn_rule_set(ds, _tree_config(args, criterion), rule_count=args.rule_count)
        doc = export_model(model)
        print(rule_table(model))
    else:
        divergence = CriterionKind.KL if args.model_kind == "kl" else CriterionKind.ED
        model = train_baseline(ds, divergence, max_depth=args.max_depth,
                               constraints=SplitConstraints(min_samples=args.min_samples,
                                                            min_recall=args.min_recall,
                                                            min_delta=args.min_delta,
                                                            max_bins=args.max_bins))
        doc = export_baseline(model)
        print(baseline_table(model))
    Path(args.output).write_text(json.dumps(doc, indent=2), encoding="utf-8")
    print(f"model written to {args.output}")
    return 0


def _load_model(path: str):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: not a model document")
    if doc.get("kind") == "rule-set":
        return import_model(doc)
    return import_baseline(doc)


def _model_scores(model, ds: Dataset) -> np.ndarray:
    if isinstance(model, RuleSetModel):
        return predict_dataset(model, ds)[0]
    return predict_baseline_dataset(model, ds)


def _write_table_csv(path: Path, table: dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        keys = list(table)
        writer.writerow(keys)
        for i in range(len(table["t"])):
            writer.writerow([int(table["t"][i])] + [repr(float(table[k][i])) for k in keys[1:]])


def cmd_eval(args) -> int:
    ds = _load_dataset(args)
    parts: list[tuple[str, Dataset]]
    if args.split is not None:
        keys = tuple(k.strip() for k in args.stratify.split(",") if k.strip())
        train, test = stratified_split(ds, args.split, args.seed, by=keys)
        parts = [("train", train), ("test", test)]
    else:
        parts = [("all", ds)]
    models = [(Path(p).stem, _load_model(p)) for p in args.model]
    out_dir = Path(args.curves_out) if args.curves_out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    header = f"{'model':<16}{'part':<8}{'AUUC':>12}{'AUUC_norm':>12}{'Qini':>10}"
    print(header)
    print("-" * len(header))
    for part_name, part in parts:
        svg_series = []
        for name, model in models:
            scores = _model_scores(model, part)
            table = curve_table(scores, part.treated, part.outcome, bins=args.bins,
                                seed=args.seed, tie_seeds=args.tie_seeds)
            points = [CurvePoint(int(t), float(v)) for t, v in zip(table["t"], table["f"])]
            auuc_val = auuc(points)
            qini = qini_coefficient_from_arrays(scores, part.treated, part.outcome,
                                                seed=args.seed, tie_seeds=args.tie_seeds)
            print(f"{name:<16}{part_name:<8}{auuc_val:>12.3f}"
                  f"{auuc_val / part.n_rows:>12.6f}{qini:>10.3f}")
            if out_dir is not None:
                _write_table_csv(out_dir / f"{name}-{part_name}.csv", table)
                svg_series.append(_svg.Series(name, [float(t) for t in table["t"]],
                                              [float(v) for v in table["f"]]))
        if out_dir is not None and svg_series:
            n = part.n_rows
            end = svg_series[0].ys[-1]
            svg_series.append(_svg.Series("random", [0.0, float(n)], [0.0, end], dashed=True))
            svg = _svg.line_plot(svg_series, title=f"uplift curves ({part_name})",
                                 x_label="top-t observations", y_label="cumulative uplift f(t)")
            (out_dir / f"curves-{part_name}.svg").write_text(svg, encoding="utf-8")
    return 0


def cmd_score(args) -> int:
    model = _load_model(args.model)
    ds = _load_dataset(args)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "rule", "uplift"])
        if isinstance(model, RuleSetModel):
            scores, matched = predict_dataset(model, ds, match=args.match)
            for i in range(ds.n_rows):
                rule = "none" if matched[i] < 0 else str(int(matched[i]) + 1)
                writer.writerow([i, rule, repr(float(scores[i]))])
        else:
            scores = predict_baseline_dataset(model, ds)
            for i in range(ds.n_rows):
                writer.writerow([i, "none", repr(float(scores[i]))])
    print(f"wrote {ds.n_rows} scores to {args.output}")
    return 0


_HANDLERS = {"generate": cmd_generate, "train": cmd_train, "eval": cmd_eval, "score": cmd_score}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                parser.error("--config needs a path")
            command = next((a for a in argv if not a.startswith("-")), None)
            if command in commands:
                _apply_config(commands[command], parse_config_file(argv[i + 1]))
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, EmptyGroupError, DegenerateNormalizerError, FileNotFoundError,
            OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (SchemaError, ModelFormatError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
