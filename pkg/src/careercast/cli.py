"""Command-line pipeline: ingest, embed and cluster, forecast, evaluate.

Artifacts live under the output directory with fixed names and carry the
SHA-256 of what they were built from, so a stage refuses inputs from a
different run. Exit codes: 0 success, 1 usage or configuration error,
2 data or artifact error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import artifacts
from .autoencoder import Autoencoder, ae_train, flatten_batch
from .baselines import last_value_predict, linear_fit, linear_predict, mlp_baseline_train
from .checks import gradcheck_suite
from .clustering import ClusterModel, select_k
from .config import MODEL_NAMES, PipelineConfig, load_config, with_overrides
from .errors import (
    ArtifactError,
    CareerCastError,
    ConfigError,
    IngestError,
    NumericError,
    RankDeficiencyError,
    UndefinedMetricError,
)
from .evaluation import evaluate, export_curves, export_scatter
from .forecaster import Forecaster, forecaster_train
from .ingest import INPUT_AGES, TARGET_AGES, ingest_csv
from .nn import unwrap_doc, wrap_doc
from .schema import default_schema, load_schema
from .synth import default_specs, write_csv as write_synth_csv

DATASET = "dataset.json"
AUTOENCODER = "autoencoder.json"
CLUSTERS = "clusters.json"
FORECASTER = "forecaster.json"
FORECASTER_STANDARD = "forecaster_standard.json"
REPORTS = "reports"
PREDICTIONS = "predictions.csv"

KIND_EMBEDDER = "career-embedder"
KIND_FORECASTER = "trend-forecaster"
CLUSTERS_FORMAT = "careercast-clusters"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _path(cfg: PipelineConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def _report_path(cfg: PipelineConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, REPORTS, name)


def _ensure_dirs(cfg: PipelineConfig) -> None:
    os.makedirs(os.path.join(cfg.out_dir, REPORTS), exist_ok=True)


def _config_from(args, **extra) -> PipelineConfig:
    config_path = getattr(args, "config", None)
    cfg = load_config(config_path) if config_path else PipelineConfig()
    cfg = with_overrides(
        cfg,
        seed=getattr(args, "seed", None),
        out_dir=getattr(args, "out", None),
        **extra,
    )
    return cfg.validate()


def _schema_for(cfg: PipelineConfig):
    if cfg.schema_json:
        return load_schema(cfg.schema_json)
    return default_schema()


def _result_doc(result) -> dict:
    return {
        "stopped_epoch": result.stopped_epoch,
        "best_epoch": result.best_epoch,
        "best_val_loss": float(result.best_val_loss),
    }


def _load_dataset(cfg: PipelineConfig):
    path = _path(cfg, DATASET)
    try:
        doc = artifacts.read_json(path)
    except ArtifactError as exc:
        raise ArtifactError(f"{exc}; run the ingest command first") from None
    dataset, summary = artifacts.dataset_from_doc(doc)
    return dataset, summary, artifacts.file_hash(path)


def _load_stage1(cfg: PipelineConfig, dataset_hash: str):
    ae_path = _path(cfg, AUTOENCODER)
    cl_path = _path(cfg, CLUSTERS)
    try:
        ae_doc = artifacts.read_json(ae_path)
        cl_doc = artifacts.read_json(cl_path)
    except ArtifactError as exc:
        raise ArtifactError(f"{exc}; run the stage1 command first") from None
    model_doc, ae_meta = unwrap_doc(ae_doc, KIND_EMBEDDER)
    if ae_meta.get("dataset_sha256") != dataset_hash:
        raise ArtifactError(
            "autoencoder artifact was trained on a different dataset "
            "(hash mismatch); rerun stage1"
        )
    if cl_doc.get("format") != CLUSTERS_FORMAT or cl_doc.get("version") != 1:
        raise ArtifactError(f"{cl_path}: not a cluster artifact this build can read")
    cl_meta = cl_doc.get("meta", {})
    if cl_meta.get("dataset_sha256") != dataset_hash:
        raise ArtifactError(
            "cluster artifact was built from a different dataset "
            "(hash mismatch); rerun stage1"
        )
    if cl_meta.get("autoencoder_sha256") != artifacts.file_hash(ae_path):
        raise ArtifactError(
            "cluster artifact does not match the stored autoencoder "
            "(hash mismatch); rerun stage1"
        )
    ae = Autoencoder.from_doc(model_doc)
    clusters = ClusterModel.from_doc(cl_doc["clusters"])
    return ae, clusters, artifacts.file_hash(cl_path)


def _load_forecaster(cfg: PipelineConfig, dataset_hash: str, standard: bool):
    name = FORECASTER_STANDARD if standard else FORECASTER
    hint = "stage2 --standard" if standard else "stage2"
    path = _path(cfg, name)
    try:
        doc = artifacts.read_json(path)
    except ArtifactError as exc:
        raise ArtifactError(f"{exc}; run the {hint} command first") from None
    model_doc, meta = unwrap_doc(doc, KIND_FORECASTER)
    if meta.get("dataset_sha256") != dataset_hash:
        raise ArtifactError(
            f"{name} was trained on a different dataset (hash mismatch); "
            f"rerun {hint}"
        )
    return Forecaster.from_doc(model_doc), meta


def _train_arrays(dataset):
    blocks = np.stack([s.input for s in dataset.train])
    targets = np.stack([s.target for s in dataset.train])
    return blocks, targets


def cmd_synth(args) -> int:
    cfg = _config_from(args)
    _ensure_dirs(cfg)
    if args.stars < 1 or args.regulars < 1:
        raise ConfigError("player counts must be at least 1")
    if args.noise < 0:
        raise ConfigError(f"noise must be non-negative, got {args.noise}")
    specs = default_specs(args.stars, args.regulars, args.noise)
    path = args.csv or _path(cfg, "synthetic.csv")
    n_rows = write_synth_csv(path, specs, seed=cfg.seed, schema=_schema_for(cfg))
    n_players = sum(s.count for s in specs)
    print(f"wrote {n_rows} season rows for {n_players} players to {path}")
    artifacts.write_run_info(
        cfg.out_dir, "synth", cfg.seed, {os.path.basename(path): artifacts.file_hash(path)}
    )
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = _config_from(
        args,
        input_csv=getattr(args, "input", None),
        schema_json=getattr(args, "schema", None),
        test_fraction=getattr(args, "test_fraction", None),
    )
    if not cfg.input_csv:
        raise ConfigError("no input CSV; pass --input or set input_csv in the config")
    _ensure_dirs(cfg)
    schema = _schema_for(cfg)
    try:
        dataset, summary = ingest_csv(
            cfg.input_csv, schema, cfg.test_fraction, cfg.seed
        )
    except FileNotFoundError:
        raise IngestError(f"input CSV not found: {cfg.input_csv}") from None
    digest = artifacts.write_json(
        _path(cfg, DATASET), artifacts.dataset_to_doc(dataset, summary)
    )
    print(f"parsed {summary['rows_parsed']} season rows")
    print(
        f"kept {summary['players_kept']} of {summary['players_total']} players "
        f"({summary['train_players']} train / {summary['test_players']} test)"
    )
    print(
        f"dropped: {summary['dropped_too_few_seasons']} with too few seasons, "
        f"{summary['dropped_unobserved_targets']} without observed targets"
    )
    if summary["dropped_constant_features"]:
        print(
            "constant features dropped from inputs: "
            + ", ".join(summary["dropped_constant_features"])
        )
    artifacts.write_run_info(cfg.out_dir, "ingest", cfg.seed, {DATASET: digest})
    return EXIT_OK


def cmd_stage1(args) -> int:
    cfg = _config_from(args)
    _ensure_dirs(cfg)
    dataset, _, dataset_hash = _load_dataset(cfg)
    flat = flatten_batch(np.stack([s.input for s in dataset.train]))
    ae, result = ae_train(flat, seed=cfg.seed, config=cfg.train_config("autoencoder"))
    embeddings = ae.encode(flat)
    lo, hi = cfg.k_range
    clusters = select_k(
        embeddings,
        player_ids=[s.player_id for s in dataset.train],
        k_range=range(lo, hi + 1),
        restarts=cfg.kmeans_restarts,
        seed=cfg.seed,
    )
    ae_hash = artifacts.write_json(
        _path(cfg, AUTOENCODER),
        wrap_doc(
            KIND_EMBEDDER,
            ae.to_doc(),
            meta={
                "dataset_sha256": dataset_hash,
                "seed": cfg.seed,
                "train": _result_doc(result),
            },
        ),
    )
    cl_hash = artifacts.write_json(
        _path(cfg, CLUSTERS),
        {
            "format": CLUSTERS_FORMAT,
            "version": 1,
            "meta": {
                "dataset_sha256": dataset_hash,
                "autoencoder_sha256": ae_hash,
                "seed": cfg.seed,
            },
            "clusters": clusters.to_doc(),
        },
    )
    artifacts.write_csv_table(
        _report_path(cfg, "silhouette.csv"),
        ("k", "silhouette", "selected"),
        [
            (k, score, 1 if k == clusters.k else 0)
            for k, score in sorted(clusters.silhouette_by_k.items())
        ],
    )
    print(
        f"autoencoder stopped at epoch {result.stopped_epoch} "
        f"(best {result.best_epoch}, val loss {result.best_val_loss:.6f})"
    )
    print(
        f"selected K={clusters.k} "
        f"(silhouette {clusters.silhouette_by_k[clusters.k]:.4f})"
    )
    artifacts.write_run_info(
        cfg.out_dir, "stage1", cfg.seed, {AUTOENCODER: ae_hash, CLUSTERS: cl_hash}
    )
    return EXIT_OK


def cmd_stage2(args) -> int:
    cfg = _config_from(args)
    _ensure_dirs(cfg)
    dataset, _, dataset_hash = _load_dataset(cfg)
    blocks, targets = _train_arrays(dataset)
    train_cfg = cfg.train_config("forecaster")
    meta = {"dataset_sha256": dataset_hash, "seed": cfg.seed}
    if args.standard:
        model, result = forecaster_train(
            blocks, targets, k=0, seed=cfg.seed, config=train_cfg
        )
        meta["k"] = 0
        out_name = FORECASTER_STANDARD
    else:
        ae, clusters, clusters_hash = _load_stage1(cfg, dataset_hash)
        assignments = clusters.train_assignments
        if tuple(clusters.train_player_ids) != tuple(
            s.player_id for s in dataset.train
        ):
            # stored assignment order cannot be trusted; recompute from scratch
            flat = flatten_batch(blocks)
            assignments = clusters.assign(ae.encode(flat))
        model, result = forecaster_train(
            blocks,
            targets,
            assignments=assignments,
            k=clusters.k,
            seed=cfg.seed,
            config=train_cfg,
        )
        meta["clusters_sha256"] = clusters_hash
        meta["k"] = clusters.k
        out_name = FORECASTER
    meta["train"] = _result_doc(result)
    digest = artifacts.write_json(
        _path(cfg, out_name), wrap_doc(KIND_FORECASTER, model.to_doc(), meta=meta)
    )
    label = "standard" if args.standard else "cluster-conditioned"
    print(
        f"trained {label} forecaster: stopped at epoch {result.stopped_epoch} "
        f"(best {result.best_epoch}, val loss {result.best_val_loss:.6f})"
    )
    artifacts.write_run_info(cfg.out_dir, "stage2", cfg.seed, {out_name: digest})
    return EXIT_OK


def _predict_fns(cfg: PipelineConfig, dataset, dataset_hash: str, models):
    """One prediction closure per requested model name."""
    schema = dataset.schema
    blocks, targets = _train_arrays(dataset)
    flat_train = flatten_batch(blocks)
    fns = {}
    for name in models:
        if name == "proposed":
            ae, clusters, clusters_hash = _load_stage1(cfg, dataset_hash)
            model, meta = _load_forecaster(cfg, dataset_hash, standard=False)
            if meta.get("clusters_sha256") != clusters_hash:
                raise ArtifactError(
                    "forecaster was trained against different clusters "
                    "(hash mismatch); rerun stage2"
                )

            def proposed(seqs, ae=ae, clusters=clusters, model=model):
                b = np.stack([s.input for s in seqs])
                asg = clusters.assign(ae.encode(flatten_batch(b)))
                return model.predict_batch(b, asg)

            fns[name] = proposed
        elif name == "standard_lstm":
            model, _ = _load_forecaster(cfg, dataset_hash, standard=True)
            fns[name] = lambda seqs, model=model: model.predict_batch(
                np.stack([s.input for s in seqs])
            )
        elif name == "last_value":
            fns[name] = lambda seqs: last_value_predict(seqs, schema.target_index)
        elif name in ("linear", "ridge"):
            lam = cfg.linear_lambda if name == "linear" else cfg.ridge_lambda
            model = linear_fit(flat_train, targets, lam)
            fns[name] = lambda seqs, model=model: linear_predict(
                model, flatten_batch(np.stack([s.input for s in seqs]))
            )
        elif name == "mlp":
            model, _ = mlp_baseline_train(
                flat_train, targets, seed=cfg.seed, config=cfg.train_config("forecaster")
            )
            fns[name] = lambda seqs, model=model: model.forward(
                flatten_batch(np.stack([s.input for s in seqs])), train=False
            )
        else:
            raise ConfigError(f"unknown model {name!r}")
    return fns


def _fmt_r2(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def cmd_evaluate(args) -> int:
    cfg = _config_from(args)
    models = tuple(args.models) if args.models else tuple(cfg.models)
    unknown = [m for m in models if m not in MODEL_NAMES]
    if unknown:
        raise ConfigError(f"unknown model(s) {unknown}; choose from {list(MODEL_NAMES)}")
    _ensure_dirs(cfg)
    dataset, _, dataset_hash = _load_dataset(cfg)
    fns = _predict_fns(cfg, dataset, dataset_hash, models)

    comparison_rows = []
    category_rows = []
    summary = {}
    for name in models:
        train_report = evaluate(name, fns[name], dataset.train)
        test_report = evaluate(name, fns[name], dataset.test)
        comparison_rows.append(
            (
                name,
                train_report.overall.mae,
                train_report.overall.r2 if train_report.overall.r2 is not None else "",
                test_report.overall.mae,
                test_report.overall.r2 if test_report.overall.r2 is not None else "",
                train_report.overall.n,
                test_report.overall.n,
            )
        )
        for split, report in (("train", train_report), ("test", test_report)):
            for cat, block in sorted(report.per_category.items()):
                category_rows.append(
                    (
                        name,
                        split,
                        cat,
                        block.mae,
                        block.r2 if block.r2 is not None else "",
                        block.n,
                    )
                )
        for by in ("player", "category"):
            cols, rows = export_curves(test_report, by=by)
            artifacts.write_csv_table(
                _report_path(cfg, f"{name}_curves_{by}.csv"), cols, rows
            )
        cols, rows = export_scatter(test_report)
        artifacts.write_csv_table(_report_path(cfg, f"{name}_scatter.csv"), cols, rows)
        summary[name] = {"train": train_report.to_doc(), "test": test_report.to_doc()}
        print(
            f"{name:<14} train MAE {train_report.overall.mae:6.3f} "
            f"R2 {_fmt_r2(train_report.overall.r2):>7}   "
            f"test MAE {test_report.overall.mae:6.3f} "
            f"R2 {_fmt_r2(test_report.overall.r2):>7}"
        )

    artifacts.write_csv_table(
        _report_path(cfg, "comparison.csv"),
        ("model", "train_mae", "train_r2", "test_mae", "test_r2", "n_train", "n_test"),
        comparison_rows,
    )
    artifacts.write_csv_table(
        _report_path(cfg, "per_category.csv"),
        ("model", "split", "category", "mae", "r2", "n"),
        category_rows,
    )
    eval_hash = artifacts.write_json(
        _report_path(cfg, "evaluation.json"), {"models": summary}
    )
    artifacts.write_run_info(
        cfg.out_dir, "evaluate", cfg.seed, {"reports/evaluation.json": eval_hash}
    )
    return EXIT_OK


def _parse_rows_csv(path, schema):
    """Read a 7-row block of raw feature values in age order."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise IngestError(f"row file not found: {path}") from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"{path}: file is empty")
        missing = [n for n in schema.names if n not in reader.fieldnames]
        if missing:
            raise IngestError(
                f"{path}: header lacks feature column(s): {', '.join(missing)}"
            )
        rows = list(reader)
    if len(rows) != len(INPUT_AGES):
        raise IngestError(
            f"{path}: expected {len(INPUT_AGES)} rows (ages "
            f"{INPUT_AGES[0]}-{INPUT_AGES[-1]}), got {len(rows)}"
        )
    matrix = np.empty((len(rows), schema.n_features))
    for i, row in enumerate(rows):
        for j, name in enumerate(schema.names):
            try:
                matrix[i, j] = float(row[name])
            except (TypeError, ValueError):
                raise IngestError(
                    f"{path}: row {i + 2}: column {name!r} is not a number "
                    f"({row[name]!r})"
                ) from None
    return matrix


def _upsert_predictions(path, series: str, predicted) -> None:
    """Rewrite the predictions table with this series' rows replaced."""
    table = {}
    if os.path.exists(path):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["series", "age", "predicted"]:
                raise ArtifactError(f"{path}: unexpected predictions file format")
            for row in reader:
                table[(row[0], int(row[1]))] = row[2]
    for age, value in zip(TARGET_AGES, predicted):
        table[(series, age)] = repr(float(value))
    rows = [(s, a, v) for (s, a), v in sorted(table.items())]
    artifacts.write_csv_table(path, ("series", "age", "predicted"), rows)


def cmd_predict(args) -> int:
    cfg = _config_from(args)
    if bool(args.player) == bool(args.rows):
        raise ConfigError("pass exactly one of --player or --rows")
    _ensure_dirs(cfg)
    dataset, _, dataset_hash = _load_dataset(cfg)
    ae, clusters, clusters_hash = _load_stage1(cfg, dataset_hash)
    model, meta = _load_forecaster(cfg, dataset_hash, standard=False)
    if meta.get("clusters_sha256") != clusters_hash:
        raise ArtifactError(
            "forecaster was trained against different clusters (hash mismatch); "
            "rerun stage2"
        )

    if args.player:
        matches = [
            s for s in (*dataset.train, *dataset.test) if s.player_id == args.player
        ]
        if not matches:
            raise ArtifactError(
                f"player {args.player!r} not found in the dataset artifact"
            )
        block = matches[0].input
        series = args.player
    else:
        raw = _parse_rows_csv(args.rows, dataset.schema)
        keep = [
            j
            for j, name in enumerate(dataset.schema.names)
            if name in set(dataset.norm_stats.names)
        ]
        block = dataset.norm_stats.apply(raw[:, keep])
        series = f"file:{os.path.basename(args.rows)}"

    cluster = int(clusters.assign(ae.encode(flatten_batch(block[None])))[0])
    predicted = model.predict(block, cluster)
    for age, value in zip(TARGET_AGES, predicted):
        print(f"age {age}: {value:+.2f} BPM")
    pred_path = _report_path(cfg, PREDICTIONS)
    _upsert_predictions(pred_path, series, predicted)
    artifacts.write_run_info(
        cfg.out_dir,
        "predict",
        cfg.seed,
        {f"reports/{PREDICTIONS}": artifacts.file_hash(pred_path)},
    )
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    if args.seeds < 1:
        raise ConfigError(f"--seeds must be at least 1, got {args.seeds}")
    rows = gradcheck_suite(n_seeds=args.seeds)
    failed = [r for r in rows if not r["ok"]]
    for r in rows:
        status = "ok" if r["ok"] else "FAIL"
        print(
            f"{r['name']:<12} max_rel_err {r['max_error']:.3e} "
            f"(threshold {r['threshold']:.0e}) {status}"
        )
    if failed:
        print(
            f"gradient check failed for: {', '.join(r['name'] for r in failed)}",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--config", default=argparse.SUPPRESS, help="JSON config file"
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="root random seed"
    )
    common.add_argument(
        "--out", default=argparse.SUPPRESS, help="artifact output directory"
    )

    parser = _Parser(
        prog="careercast",
        parents=[common],
        description="Career-trend forecasting pipeline over player season data.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic season CSV")
    p.add_argument("--stars", type=int, default=30, help="players in the high archetype")
    p.add_argument("--regulars", type=int, default=170, help="players in the low archetype")
    p.add_argument("--noise", type=float, default=1.0, help="season noise level")
    p.add_argument("--csv", help="output CSV path (default <out>/synthetic.csv)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=[common], help="build the train/test dataset")
    p.add_argument("--input", help="season CSV to ingest")
    p.add_argument("--schema", help="feature schema JSON (default: built-in)")
    p.add_argument("--test-fraction", type=float, dest="test_fraction")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser(
        "stage1", parents=[common], help="train the embedder and cluster careers"
    )
    p.set_defaults(func=cmd_stage1)

    p = sub.add_parser("stage2", parents=[common], help="train the forecaster")
    p.add_argument(
        "--standard",
        action="store_true",
        help="train the cluster-free variant instead",
    )
    p.set_defaults(func=cmd_stage2)

    p = sub.add_parser("evaluate", parents=[common], help="score models on the split")
    p.add_argument(
        "--models",
        nargs="+",
        metavar="NAME",
        help=f"subset of {', '.join(MODEL_NAMES)}",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", parents=[common], help="three-season outlook")
    p.add_argument("--player", help="player_id present in the dataset artifact")
    p.add_argument("--rows", help="CSV with one raw feature row per input age")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gradcheck", parents=[common], help="audit backward passes")
    p.add_argument("--seeds", type=int, default=20, help="seeded draws per config")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, RankDeficiencyError, UndefinedMetricError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CareerCastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
