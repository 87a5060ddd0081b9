"""Command-line surface: calibrate, fuse, compare, prep data, simulate.

Every command is deterministic given its flags and seed; machine-readable
outputs are byte-identical across repeated runs.  Exit codes: 0 success,
1 internal error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
import traceback
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import benchmark, dataset, formats, fusion, metrics, weighting
from .core import DEFAULT_LABELS, LabelSpace, LogitBundle, ProbabilityMatrix, align_bundles, gold_labels
from .errors import ConfigError, CoverageError, PpxfuseError
from .probability import PerplexityReport, perplexity, probabilities_from_logits

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "PPXFUSE_SEED"
DEFAULT_SEED = 42

_MODEL_FILE_RE = re.compile(r"[A-Za-z0-9._-]+$")

STRATEGY_DISPLAY = {
    "inverse_perplexity": "Inverse Perplexity Weighting",
    "accuracy": "Accuracy Based Weighting",
    "mean": "Mean Ensemble",
    "majority": "Majority Voting",
}


def resolve_seed(flag_value: int | None) -> int:
    """Flag wins over the PPXFUSE_SEED environment variable over the default."""
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(SEED_ENV_VAR)
    if env_value is None:
        return DEFAULT_SEED
    try:
        return int(env_value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_value!r}") from None


def _label_space(args: argparse.Namespace) -> LabelSpace:
    return LabelSpace(tuple(args.labels))


def _parse_logits_pair(value: str) -> tuple[str, str]:
    manifest, sep, rows = value.partition(",")
    if not sep or not manifest or not rows:
        raise ConfigError(
            f"--logits expects 'manifest.json,rows.jsonl', got {value!r}"
        )
    return manifest, rows


def _load_aligned(args: argparse.Namespace) -> tuple[list[LogitBundle], list[ProbabilityMatrix]]:
    pairs = [_parse_logits_pair(value) for value in args.logits]
    bundles = [formats.read_logits(manifest, rows) for manifest, rows in pairs]
    space = _label_space(args)
    for bundle in bundles:
        if bundle.label_space.labels != space.labels:
            raise ConfigError(
                f"bundle {bundle.model_name!r} label order {bundle.label_space.labels} "
                f"does not match --labels {space.labels}"
            )
    aligned, dropped = align_bundles(bundles)
    if dropped:
        logger.info("dropped %d ids during alignment", len(dropped))
    return aligned, [probabilities_from_logits(bundle) for bundle in aligned]


def _calibration_ids(matrices: Sequence[ProbabilityMatrix], gold: dict[str, int]) -> list[str]:
    ids = sorted(set(matrices[0].ids) & gold.keys())
    if not ids:
        raise CoverageError("calibration corpus shares no labeled ids with the bundles")
    return ids


def _perplexity_reports(
    matrices: Sequence[ProbabilityMatrix], gold: dict[str, int], ids: Sequence[str]
) -> list[PerplexityReport]:
    return [perplexity(matrix.subset(ids), gold) for matrix in matrices]


def _model_accuracies(
    matrices: Sequence[ProbabilityMatrix], gold: dict[str, int], ids: Sequence[str]
) -> list[tuple[str, float]]:
    out = []
    for matrix in matrices:
        sub = matrix.subset(ids)
        gold_vector = np.array([gold[example_id] for example_id in sub.ids])
        out.append((matrix.model_name, float((sub.values.argmax(axis=1) == gold_vector).mean())))
    return out


def _strategy_result(
    strategy: str,
    matrices: Sequence[ProbabilityMatrix],
    calibration_gold: dict[str, int] | None,
) -> tuple[fusion.FusionResult, weighting.WeightVector | None, dict]:
    """Fuse under one strategy, calibrating weights when the strategy needs them."""
    if strategy in ("ppx", "acc"):
        if calibration_gold is None:
            raise ConfigError(f"--strategy {strategy} needs --calibration or --weights")
        ids = _calibration_ids(matrices, calibration_gold)
        if strategy == "ppx":
            reports = _perplexity_reports(matrices, calibration_gold, ids)
            weights = weighting.inverse_perplexity_weights(reports)
            diagnostics = {"perplexities": {r.model_name: r.perplexity for r in reports}}
        else:
            accuracies = _model_accuracies(matrices, calibration_gold, ids)
            weights = weighting.accuracy_weights(accuracies)
            diagnostics = {"accuracies": dict(accuracies)}
        return fusion.weighted_soft_vote(matrices, weights), weights, diagnostics
    if strategy == "mean":
        return fusion.mean_ensemble(matrices), None, {}
    if strategy == "majority":
        return fusion.majority_vote(matrices), None, {}
    raise ConfigError(f"unknown strategy {strategy!r}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_perplexity(args: argparse.Namespace) -> int:
    _, matrices = _load_aligned(args)
    gold = gold_labels(formats.read_corpus(args.gold, _label_space(args)), _label_space(args))
    lines = []
    for matrix in matrices:
        report = perplexity(matrix, gold)
        lines.append(
            formats.dumps(
                {
                    "model_name": report.model_name,
                    "perplexity": report.perplexity,
                    "n_examples": report.n_examples,
                    "mean_nll": report.mean_nll,
                }
            )
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    if args.weights and args.strategy:
        raise ConfigError("pass either --weights or --strategy, not both")
    _, matrices = _load_aligned(args)
    space = _label_space(args)

    if args.weights:
        weights, _ = formats.read_weight_report(args.weights)
        result = fusion.weighted_soft_vote(matrices, weights)
        computed = None
        diagnostics = {}
    else:
        strategy = args.strategy or "ppx"
        calibration_gold = None
        if args.calibration:
            calibration_gold = gold_labels(formats.read_corpus(args.calibration, space), space)
        result, computed, diagnostics = _strategy_result(strategy, matrices, calibration_gold)

    out = Path(args.out)
    formats.write_predictions(result, out)
    if computed is not None:
        weights_path = out.with_suffix(".weights.json")
        formats.write_weight_report(
            computed,
            weights_path,
            perplexities=diagnostics.get("perplexities"),
            accuracies=diagnostics.get("accuracies"),
        )
        logger.info("weight report written to %s", weights_path)
    print(f"wrote {len(result)} predictions ({result.strategy.value}) to {out}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    _, matrices = _load_aligned(args)
    space = _label_space(args)
    calibration_gold = gold_labels(formats.read_corpus(args.calibration, space), space)
    eval_gold = gold_labels(formats.read_corpus(args.gold, space), space)

    rows = []
    table_rows = []
    for strategy in ("ppx", "acc", "mean", "majority"):
        result, _, _ = _strategy_result(strategy, matrices, calibration_gold)
        report = metrics.evaluate(result, eval_gold, space)
        key = {
            "ppx": "inverse_perplexity",
            "acc": "accuracy",
            "mean": "mean",
            "majority": "majority",
        }[strategy]
        rows.append(
            {
                "strategy": key,
                "micro_f1": report.micro_f1,
                "macro_f1": report.macro_f1,
                "accuracy": report.accuracy,
            }
        )
        table_rows.append((STRATEGY_DISPLAY[key], report.micro_f1, report.macro_f1))

    formats.write_json({"n_models": len(matrices), "strategies": rows}, args.out)
    print(metrics.format_comparison_table(table_rows))
    return 0


def cmd_balance(args: argparse.Namespace) -> int:
    space = _label_space(args)
    records = formats.read_corpus(args.corpus, space)
    if args.plan:
        plan = formats.read_balance_plan(args.plan, default_seed=resolve_seed(args.seed))
    else:
        plan = dataset.BalancePlan(seed=resolve_seed(args.seed))
    kept = dataset.balance(records, plan)
    formats.write_corpus(kept, args.out, space)
    print(f"balanced {len(records)} -> {len(kept)} records across "
          f"{len({record.language for record in records})} languages")
    return 0


def cmd_batch_plan(args: argparse.Namespace) -> int:
    space = _label_space(args)
    records = formats.read_corpus(args.corpus, space)
    plan = dataset.plan_batches(records, args.batch_size)
    formats.write_batch_plan(plan, args.out)
    print(f"planned {len(plan.batches)} batches of size {plan.batch_size}; "
          f"padding_waste={plan.padding_waste:.6f}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    space = _label_space(args)
    predictions = formats.read_predictions(args.predictions, space)
    gold = gold_labels(formats.read_corpus(args.gold, space), space)
    report = metrics.evaluate(predictions, gold, space)
    if args.out:
        formats.write_json(metrics.report_to_dict(report), args.out)
    print(f"n={report.n_examples} accuracy={report.accuracy:.4f} "
          f"micro_f1={report.micro_f1:.4f} macro_f1={report.macro_f1:.4f}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    specs, n_examples, prior, seed, space = benchmark.read_sim_spec(args.spec)
    if args.seed is not None:
        seed = args.seed
    corpus, bundles = benchmark.simulate(specs, n_examples, prior, seed, space)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    formats.write_corpus(corpus, out_dir / "corpus.jsonl", space)
    for bundle in bundles:
        if not _MODEL_FILE_RE.match(bundle.model_name):
            raise ConfigError(
                f"model name {bundle.model_name!r} is not usable as a file name"
            )
        formats.write_logits(
            bundle,
            out_dir / f"{bundle.model_name}.manifest.json",
            out_dir / f"{bundle.model_name}.rows.jsonl",
            source_checkpoint=f"synthetic seed={seed}",
        )
    print(f"simulated {n_examples} examples x {len(bundles)} models -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--labels", nargs="+", default=list(DEFAULT_LABELS), metavar="LABEL",
        help="ordered class names (default: %(default)s)",
    )
    common.add_argument(
        "--seed", type=int, default=None,
        help=f"random seed (default: ${SEED_ENV_VAR} or {DEFAULT_SEED})",
    )
    common.add_argument("--quiet", action="store_true", help="suppress progress logging")

    parser = argparse.ArgumentParser(
        prog="ppxfuse",
        description="Perplexity-weighted ensemble fusion for classifier outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perplexity", parents=[common],
                       help="per-model perplexity on a labeled corpus")
    p.add_argument("--logits", action="append", required=True, metavar="MANIFEST,ROWS")
    p.add_argument("--gold", required=True, help="labeled JSONL corpus")
    p.add_argument("--out", default=None, help="write reports here instead of stdout")
    p.set_defaults(func=cmd_perplexity)

    p = sub.add_parser("fuse", parents=[common], help="fuse bundles into predictions")
    p.add_argument("--logits", action="append", required=True, metavar="MANIFEST,ROWS")
    p.add_argument("--strategy", choices=["ppx", "acc", "mean", "majority"], default=None,
                   help="weighting strategy (default: ppx)")
    p.add_argument("--weights", default=None, help="precomputed weight report JSON")
    p.add_argument("--calibration", default=None, help="labeled corpus for weight calibration")
    p.add_argument("--out", required=True, help="predictions JSONL path")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("compare", parents=[common],
                       help="run all four strategies and tabulate micro/macro F1")
    p.add_argument("--logits", action="append", required=True, metavar="MANIFEST,ROWS")
    p.add_argument("--calibration", required=True, help="labeled corpus for weighting")
    p.add_argument("--gold", required=True, help="labeled corpus for evaluation")
    p.add_argument("--out", required=True, help="comparison report JSON path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("balance", parents=[common], help="cap overrepresented languages")
    p.add_argument("--corpus", required=True)
    p.add_argument("--plan", default=None, help="balance plan JSON (caps + seed)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("batch-plan", parents=[common],
                       help="length-sorted batch plan minimizing padding")
    p.add_argument("--corpus", required=True)
    p.add_argument("--batch-size", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_batch_plan)

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against gold")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", default=None, help="evaluation report JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", parents=[common],
                       help="generate synthetic gold corpus + logit bundles")
    p.add_argument("--spec", required=True, help="simulator spec JSON")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(logging.ERROR if args.quiet else logging.INFO)
    config = {key: value for key, value in sorted(vars(args).items()) if key != "func"}
    try:
        # emitted every run; --quiet gates it via the log level, not the call
        logger.info("resolved config: %s", formats.dumps(config))
        return args.func(args)
    except PpxfuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # internal error: keep the traceback for debugging
        traceback.print_exc()
        return 1
