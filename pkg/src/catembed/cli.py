"""Command-line entry point (``catembed``).

One INI file configures a run. Sections mirror the config objects:
``[synthetic]``, ``[data]``, ``[embedding_dims]``, ``[benchmark]``, ``[nn]``
and ``[analysis]``. ``--seed``, ``--out-dir`` and ``--data`` override the file.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import sys
import typing
from pathlib import Path

from .harness import (ANALYSIS_FLAGS, AnalysisConfig, BenchmarkConfig, SyntheticConfig,
                      export_embeddings, generate_synthetic, prepare_splits, run_analysis,
                      run_benchmark, train_embedding_source, write_dataset_csv, write_report)
from .net import TrainConfig, load_checkpoint, save_checkpoint
from .tabular import DEFAULT_COLUMN_MAP, ingest_csv, load_dataset, save_dataset

log = logging.getLogger("catembed")


class ConfigError(ValueError):
    pass


def _coerce(raw: str, hint, name: str):
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    text = raw.strip()
    if origin is typing.Union or (origin is not None and type(None) in args):
        if text.lower() in ("none", ""):
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(raw, inner[0], name)
    if origin is tuple or hint is tuple:
        inner = args[0] if args else str
        return tuple(_coerce(p, inner, name) for p in text.split(",") if p.strip())
    if hint is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if hint in (int, float, str):
        try:
            return hint(text)
        except ValueError:
            raise ConfigError(f"{name}: expected {hint.__name__}, got {raw!r}") from None
    raise ConfigError(f"{name}: unsupported option type")


def _section_kwargs(parser: configparser.ConfigParser, section: str, cls,
                    skip: tuple[str, ...] = ()) -> dict:
    if not parser.has_section(section):
        return {}
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)} - set(skip)
    out = {}
    for key, raw in parser.items(section):
        if key not in names:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        out[key] = _coerce(raw, hints[key], f"[{section}] {key}")
    return out


def load_config(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    if path:
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
    return parser


def synthetic_config(parser, seed=None) -> SyntheticConfig:
    kw = _section_kwargs(parser, "synthetic", SyntheticConfig)
    if seed is not None:
        kw["seed"] = seed
    return SyntheticConfig(**kw)


def benchmark_config(parser, seed=None) -> BenchmarkConfig:
    kw = _section_kwargs(parser, "benchmark", BenchmarkConfig, skip=("nn", "native"))
    kw["nn"] = TrainConfig(**_section_kwargs(parser, "nn", TrainConfig))
    if parser.has_section("native"):
        native = dict(BenchmarkConfig().native)
        native.update({k: v.strip() for k, v in parser.items("native")})
        kw["native"] = native
    if seed is not None:
        kw["seed"] = seed
    return BenchmarkConfig(**kw)


def analysis_config(parser, seed=None, flags=None) -> AnalysisConfig:
    kw = _section_kwargs(parser, "analysis", AnalysisConfig)
    if flags is not None:
        kw["flags"] = tuple(flags)
    if seed is not None:
        kw["seed"] = seed
    return AnalysisConfig(**kw)


def _data_path(args, parser) -> str:
    if args.data:
        return args.data
    if parser.has_option("data", "path"):
        return parser.get("data", "path")
    raise ConfigError("no dataset given (use --data or [data] path)")


def _load_data(args, parser):
    path = _data_path(args, parser)
    if path.endswith(".npz"):
        return load_dataset(path)
    cmap = {role: parser.get("data", role) if parser.has_option("data", role) else col
            for role, col in DEFAULT_COLUMN_MAP.items()}
    cmap = {k: (None if v.strip().lower() in ("", "none") else v) for k, v in cmap.items()}
    dims = ({k: int(v) for k, v in parser.items("embedding_dims")}
            if parser.has_section("embedding_dims") else None)
    return ingest_csv(path, cmap, dims)


def _out_dir(args, parser) -> Path:
    out = args.out_dir or (parser.get("run", "out_dir") if parser.has_option("run", "out_dir")
                           else "out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# -- subcommands -------------------------------------------------------------------

def cmd_synth(args, parser) -> int:
    cfg = synthetic_config(parser, args.seed)
    data, truth = generate_synthetic(cfg)
    out = _out_dir(args, parser)
    path = out / ("dataset.csv" if args.format == "csv" else "dataset.npz")
    if args.format == "csv":
        write_dataset_csv(data, path)
    else:
        save_dataset(data, path)
    (out / "truth.json").write_text(json.dumps(truth.to_dict(), indent=2) + "\n")
    print(f"wrote {len(data)} rows to {path} (Bayes MAPE floor {truth.bayes_floor:.4f})")
    return 0


def cmd_ingest(args, parser) -> int:
    data = _load_data(args, parser)
    out = _out_dir(args, parser) / "dataset.npz"
    save_dataset(data, out)
    print(f"ingested {len(data)} rows, features {data.schema.names} -> {out}")
    return 0


def cmd_train(args, parser) -> int:
    cfg = benchmark_config(parser, args.seed)
    data = _load_data(args, parser)
    train, _ = prepare_splits(cfg, data)
    ensemble = train_embedding_source(cfg, train)
    path = _out_dir(args, parser) / "checkpoint.npz"
    save_checkpoint(ensemble, data.schema, path)
    print(f"trained {len(ensemble.networks)} networks on {len(train)} rows -> {path}")
    return 0


def cmd_benchmark(args, parser) -> int:
    cfg = benchmark_config(parser, args.seed)
    data = _load_data(args, parser)
    report = run_benchmark(cfg, data)
    jpath, tpath = write_report(report, _out_dir(args, parser))
    print(report.render_table(), end="")
    print(f"report: {jpath}, {tpath}")
    return 0


def cmd_analyze(args, parser) -> int:
    ensemble, schema = load_checkpoint(args.checkpoint)
    cfg = analysis_config(parser, args.seed, args.flags)
    data = _load_data(args, parser)
    if data.schema.to_dict() != schema.to_dict():
        raise ConfigError("dataset schema differs from the checkpoint schema")
    bundle = run_analysis(ensemble, data, cfg, _out_dir(args, parser))
    for f in bundle.files:
        print(f)
    return 0


def cmd_export(args, parser) -> int:
    ensemble, schema = load_checkpoint(args.checkpoint)
    paths = export_embeddings(ensemble, schema, _out_dir(args, parser), args.source)
    print(f"wrote {len(paths)} embedding files and manifest.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catembed", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--seed", type=int, help="override every configured seed")
        sp.add_argument("--out-dir", help="output directory")
        if data:
            sp.add_argument("--data", help="CSV file or .npz dataset cache")

    sp = sub.add_parser("synth", help="write a synthetic dataset")
    common(sp, data=False)
    sp.add_argument("--format", choices=("npz", "csv"), default="npz")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("ingest", help="convert a CSV into a dataset cache")
    common(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("train", help="train the embedding ensemble on the training split")
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("benchmark", help="with/without embedding comparison")
    common(sp)
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("analyze", help="embedding-space analyses of a checkpoint")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--flags", nargs="*", choices=ANALYSIS_FLAGS)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("export-embeddings", help="write per-feature embedding CSVs")
    common(sp, data=False)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--source", choices=("first", "mean"), default="first")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        parser = load_config(args.config)
        return args.func(args, parser)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"catembed {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
