"""Command-line entry point: `synthbench generate` and `synthbench evaluate`.

Orchestrates the full pipeline: load -> drop missing -> seeded split ->
fit/sample (or ingest an external synthetic table) -> three-dimensional
evaluation -> scenario scoring -> deterministic reports.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys

from . import data, generators, privacy, resemblance, scoring, utility
from .errors import SynthBenchError

DEFAULT_SEED = 42
DEFAULT_TRAIN_FRACTION = 0.7


def derive_seed(global_seed: int, stage: str) -> int:
    """Fan one global seed out to independent, reproducible per-stage seeds."""
    digest = hashlib.sha256(f"{global_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _default_seed() -> int:
    env = os.environ.get("SYNTHBENCH_SEED")
    return int(env) if env else DEFAULT_SEED


def _add_common(parser):
    parser.add_argument("--real", required=True, help="real dataset CSV")
    parser.add_argument("--schema", help="optional JSON schema sidecar")
    parser.add_argument("--rows", type=int, default=generators.DEFAULT_SAMPLE_ROWS,
                        help="synthetic rows to generate (default 5000)")
    parser.add_argument("--train-fraction", type=float,
                        default=DEFAULT_TRAIN_FRACTION,
                        help="fraction of real rows used for fitting (default 0.7)")
    parser.add_argument("--seed", type=int, default=_default_seed(),
                        help="global seed (env SYNTHBENCH_SEED overrides the default)")
    parser.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthbench",
        description="Generate synthetic tabular data and evaluate it along "
                    "resemblance, utility, and privacy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="fit a generator and write a synthetic CSV")
    _add_common(gen)
    gen.add_argument("--gen", required=True, choices=["gm", "gc"],
                     help="generator to fit")

    ev = sub.add_parser("evaluate", help="run the full three-dimension benchmark")
    _add_common(ev)
    ev.add_argument("--gen", action="append", dest="gens", default=None,
                    metavar="GEN",
                    help="generator: gm, gc, or external:<path> (repeatable; "
                         "default gm and gc)")
    ev.add_argument("--target", help="target column (overrides schema sidecar)")
    ev.add_argument("--scenario", default="balanced",
                    choices=sorted(scoring.SCENARIOS),
                    help="built-in scenario weights (default balanced)")
    ev.add_argument("--weights", help="custom weights r,u,p (overrides --scenario)")
    ev.add_argument("--format", default="both", choices=["json", "md", "both"],
                    help="report formats to write (default both)")
    return parser


def _load_real(args) -> data.Table:
    schema = data.load_schema_sidecar(args.schema) if args.schema else None
    with open(args.real, "rb") as fh:
        table = data.load_table(fh, schema=schema)
    return data.drop_missing(table)


def _prepared_split(args):
    table = _load_real(args)
    return table, data.split(table, args.train_fraction, derive_seed(args.seed, "split"))


def cmd_generate(args) -> int:
    table, (train, _) = _prepared_split(args)
    fit = generators.fit_gm if args.gen == "gm" else generators.fit_gc
    sample = generators.sample_gm if args.gen == "gm" else generators.sample_gc
    model = fit(train)
    synthetic = sample(model, args.rows, derive_seed(args.seed, f"sample:{args.gen}"))
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"synthetic_{args.gen}.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data.serialize_csv(synthetic))
    generators.save_model(model, os.path.join(args.out, f"model_{args.gen}.json"))
    print(f"wrote {csv_path} ({synthetic.n_rows} rows)")
    return 0


def _make_synthetic(gen: str, train: data.Table, rows: int, seed: int) -> data.Table:
    if gen == "gm":
        return generators.sample_gm(generators.fit_gm(train), rows,
                                    derive_seed(seed, "sample:gm"))
    if gen == "gc":
        return generators.sample_gc(generators.fit_gc(train), rows,
                                    derive_seed(seed, "sample:gc"))
    if gen.startswith("external:"):
        return generators.load_external_synthetic(gen.split(":", 1)[1], train.schema)
    raise SynthBenchError(f"unknown generator {gen!r}")


def _gen_label(gen: str) -> str:
    if gen.startswith("external:"):
        base = os.path.splitext(os.path.basename(gen.split(":", 1)[1]))[0]
        return f"external_{base}"
    return gen


def _parse_weights(args) -> scoring.ScenarioWeights:
    if args.weights:
        parts = [float(x) for x in args.weights.split(",")]
        if len(parts) != 3:
            raise scoring.InvalidWeights("expected three weights r,u,p")
        return scoring.ScenarioWeights(*parts)
    return scoring.scenario_weights(args.scenario)


def cmd_evaluate(args) -> int:
    weights = _parse_weights(args)
    gens = args.gens or ["gm", "gc"]
    table, (train, holdout) = _prepared_split(args)
    target = args.target or table.schema.target
    if target is None:
        raise SynthBenchError("no target column: pass --target or set it in the schema")
    if target not in table.schema.names:
        raise SynthBenchError(f"target {target!r} is not a column")
    summary = data.summarize(
        data.Table(data.Schema(table.schema.columns, target=target), table.rows)
    )
    os.makedirs(args.out, exist_ok=True)

    reports = []
    for gen in gens:
        label = _gen_label(gen)
        stage = f"generate ({label})"
        try:
            synthetic = _make_synthetic(gen, train, args.rows, args.seed)
            if not gen.startswith("external:"):
                with open(os.path.join(args.out, f"synthetic_{label}.csv"),
                          "w", encoding="utf-8", newline="") as fh:
                    fh.write(data.serialize_csv(synthetic))
            stage = f"resemblance ({label})"
            res = resemblance.resemblance_report(train, synthetic)
            stage = f"utility ({label})"
            uti = utility.tstr_trtr(train, holdout, synthetic, target,
                                    derive_seed(args.seed, f"utility:{label}"))
            stage = f"privacy ({label})"
            pri = privacy.privacy_report(
                train, holdout, synthetic,
                privacy.MiaConfig(seed=derive_seed(args.seed, f"mia:{label}")),
            )
            stage = f"report ({label})"
            report = scoring.EvaluationReport(
                dataset_id=os.path.basename(args.real),
                generator=label,
                seed=args.seed,
                resemblance=res,
                utility=uti,
                privacy=pri,
                summary=summary,
            )
            with open(os.path.join(args.out, f"report_{label}.json"), "wb") as fh:
                fh.write(scoring.emit_report(report, "json"))
            if args.format in ("md", "both"):
                with open(os.path.join(args.out, f"report_{label}.md"), "wb") as fh:
                    fh.write(scoring.emit_report(report, "markdown"))
            reports.append(report)
        except SynthBenchError as exc:
            raise SynthBenchError(f"{stage}: {exc}") from exc

    aggregates = scoring.aggregate(reports)
    scores = scoring.dimension_scores(aggregates)
    recommendation = scoring.scenario_rank(scores, weights)
    with open(os.path.join(args.out, "recommendation.json"), "wb") as fh:
        fh.write(scoring.emit_report(recommendation, "json"))

    for report in reports:
        s = scores[report.generator]
        print(
            f"{report.generator}: resemblance={s.resemblance_score:.3f} "
            f"utility={s.utility_score:.3f} privacy={s.privacy_score:.3f} "
            f"mia={report.privacy.mia.score}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        return cmd_evaluate(args)
    except (SynthBenchError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
