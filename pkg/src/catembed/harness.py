"""Experiment plumbing: synthetic data, the benchmark protocol, analysis bundles.

The benchmark trains one embed-mode ensemble on the training split and
evaluates every requested method twice: on its native representation and on
the embedded features taken from that ensemble.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import json
import logging
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import geometry
from .knn import KDTreeIndex, fit_knn, predict_knn
from .net import (Ensemble, EmbeddingMatrix, TrainConfig, embed_dataset,
                  export_embedding_csvs, train_ensemble)
from .numerics import mardia, pca
from .tabular import (Dataset, EvalReport, FeatureSchema, TargetTransform,
                      dataset_from_labels, mape, one_hot_matrix, sparsify, split)
from .trees import TreeConfig, fit_gbt, fit_random_forest, predict_forest, predict_gbt

log = logging.getLogger(__name__)

METHODS = ("knn", "random_forest", "gbt", "nn")
REPRESENTATIONS = ("integer", "one_hot", "embedded")
NATIVE_REPRESENTATION = {
    "knn": "one_hot",
    "random_forest": "integer",
    "gbt": "integer",
    "nn": "one_hot",
}
ANALYSIS_FLAGS = ("tsne", "scatter", "pc-density", "pc-sales", "cross-corr", "schoenberg")

# Rossmann state codes, used as labels for the synthetic state feature.
STATE_CODES = ("BE", "BW", "BY", "HB", "HE", "HH", "NW", "RP", "SH", "SN", "ST", "TH")

# Shapes of the fixed calendar effects (multiplied by the configured magnitudes).
DOW_PROFILE = np.array([0.55, 0.2, 0.05, 0.0, 0.15, -0.05, -0.9])
DAY_PROFILE = np.array([np.exp(-(d - 1) / 3.0) - 1.0 / 3 for d in range(1, 32)])
MONTH_PROFILE = np.cos(2 * np.pi * (np.arange(1, 13) - 12) / 12.0)


# -- synthetic data --------------------------------------------------------------

@dataclass
class SyntheticConfig:
    """Store-by-day generator with latent store factors.

    The store latent vector ``z`` enters as a level term ``store_level * mean(z)``
    and through interactions: ``z[0]`` scales the weekday profile, ``z[1]``
    the promo effect, ``z[2]`` the month profile (cycling for larger
    ``latent_dim``). Without the interactions a store would only act through
    one scalar and its latent plane could not be recovered.
    """

    n_stores: int = 100
    latent_dim: int = 2
    n_states: int = 12
    n_rows: int = 50_000
    sigma: float = 0.15
    base_level: float = 8.7
    store_level: float = 0.3
    interaction: float = 0.25
    dow_effect: float = 0.3
    day_effect: float = 0.05
    month_effect: float = 0.1
    year_trend: float = 0.03
    promo_effect: float = 0.2
    promo_rate: float = 0.4
    state_effect: float = 0.05
    start: str = "2013-01-01"
    end: str = "2015-07-31"
    seed: int = 0
    floor_draws: int = 1_000_000

    def __post_init__(self):
        for name in ("n_stores", "latent_dim", "n_states", "n_rows", "floor_draws"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.n_states > self.n_stores:
            raise ValueError("more states than stores")
        if self.n_states > len(STATE_CODES):
            raise ValueError(f"at most {len(STATE_CODES)} states")
        if not 0 <= self.promo_rate <= 1:
            raise ValueError("promo_rate must lie in [0, 1]")


@dataclass
class SyntheticTruth:
    latent: np.ndarray  # (n_stores, latent_dim), row = store code
    store_state: np.ndarray  # state code per store code
    log_mean: np.ndarray  # noise-free log sales per row
    bayes_floor: float
    config: SyntheticConfig

    def to_dict(self) -> dict:
        return {
            "latent": self.latent.tolist(),
            "store_state": self.store_state.tolist(),
            "bayes_floor": self.bayes_floor,
            "config": dataclasses.asdict(self.config),
        }


def bayes_mape_floor(sigma: float, draws: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo estimate of ``E|1 - exp(eps - sigma^2/2)|`` for ``eps ~ N(0, sigma^2)``."""
    if sigma == 0:
        return 0.0
    eps = np.random.default_rng(seed).normal(0.0, sigma, size=draws)
    return float(np.mean(np.abs(1.0 - np.exp(eps - sigma ** 2 / 2))))


def generate_synthetic(cfg: SyntheticConfig | None = None) -> tuple[Dataset, SyntheticTruth]:
    cfg = cfg or SyntheticConfig()
    rng = np.random.default_rng(cfg.seed)
    start = np.datetime64(cfg.start, "D")
    n_days = int((np.datetime64(cfg.end, "D") - start).astype(int)) + 1
    grid = cfg.n_stores * n_days
    if cfg.n_rows > grid:
        raise ValueError(f"n_rows={cfg.n_rows} exceeds the {grid} distinct store-days")

    latent = rng.normal(size=(cfg.n_stores, cfg.latent_dim))
    store_state = rng.permutation(np.arange(cfg.n_stores) % cfg.n_states)
    state_offset = rng.normal(0.0, cfg.state_effect, size=cfg.n_states)

    cells = np.sort(rng.choice(grid, size=cfg.n_rows, replace=False))
    day_idx, store = np.divmod(cells, cfg.n_stores)
    dates = start + day_idx.astype("timedelta64[D]")
    pydates = dates.astype(_dt.date)
    dow = np.array([d.isoweekday() for d in pydates])
    dom = np.array([d.day for d in pydates])
    month = np.array([d.month for d in pydates])
    year = np.array([d.year for d in pydates])
    promo = (rng.random(cfg.n_rows) < cfg.promo_rate).astype(np.int64)

    z = latent[store]
    modifiers = [DOW_PROFILE[dow - 1], promo - cfg.promo_rate, MONTH_PROFILE[month - 1]]
    mu = (cfg.base_level
          + cfg.store_level * z.mean(axis=1) * np.sqrt(cfg.latent_dim)
          + state_offset[store_state[store]]
          + cfg.dow_effect * DOW_PROFILE[dow - 1]
          + cfg.day_effect * DAY_PROFILE[dom - 1]
          + cfg.month_effect * MONTH_PROFILE[month - 1]
          + cfg.year_trend * (year - 2014)
          + cfg.promo_effect * promo)
    for k in range(cfg.latent_dim):
        mu = mu + cfg.interaction * z[:, k] * modifiers[k % len(modifiers)]
    noise = rng.normal(0.0, cfg.sigma, size=cfg.n_rows) if cfg.sigma > 0 else 0.0
    sales = np.maximum(np.exp(mu + noise), 1.0)

    columns = {
        "store": [str(s + 1) for s in store],
        "day_of_week": [str(v) for v in dow],
        "day": [str(v) for v in dom],
        "month": [str(v) for v in month],
        "year": [str(v) for v in year],
        "promo": [str(v) for v in promo],
        "state": [STATE_CODES[store_state[s]] for s in store],
    }
    data = dataset_from_labels(columns, sales, dates)
    # store codes follow numeric label order, i.e. code = store index, as long
    # as every store occurs; remap the truth otherwise
    present = np.array([int(l) - 1 for l in data.schema.labels[0]])
    floor = bayes_mape_floor(cfg.sigma, cfg.floor_draws, cfg.seed + 1)
    truth = SyntheticTruth(latent[present], store_state[present], mu, floor, cfg)
    return data, truth


def write_dataset_csv(d: Dataset, path) -> None:
    """Rossmann-shaped CSV (Store, Date, Sales, Promo, State) readable by ``ingest_csv``."""
    if d.dates is None:
        raise ValueError("writing a CSV needs dates")
    names = d.schema.names
    lab = d.schema.labels
    has_state = "state" in names
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Store", "Date", "Sales", "Promo"] + (["State"] if has_state else []))
        si, pi = names.index("store"), names.index("promo")
        ti = names.index("state") if has_state else None
        for x, y, day in zip(d.X, d.y, d.dates):
            row = [lab[si][x[si]], str(day), repr(float(y)), lab[pi][x[pi]]]
            if has_state:
                row.append(lab[ti][x[ti]])
            w.writerow(row)


# -- benchmark -------------------------------------------------------------------

class BenchmarkError(RuntimeError):
    def __init__(self, step: str, cause: BaseException):
        super().__init__(f"benchmark step {step!r} failed: {cause}")
        self.step = step


@dataclass
class BenchmarkConfig:
    split_mode: str = "shuffled"
    test_fraction: float = 0.1
    sparsify: int | None = 200_000
    methods: tuple[str, ...] = METHODS
    native: dict = field(default_factory=lambda: dict(NATIVE_REPRESENTATION))
    embedding_source: str = "first"  # or "mean" over ensemble members
    seed: int = 0
    nn: TrainConfig = field(default_factory=TrainConfig)
    knn_neighbors: int = 10
    knn_p: float = 1.0
    knn_index: str = "brute"
    rf_trees: int = 200
    rf_max_depth: int | None = 35
    rf_min_samples_split: int = 2
    rf_min_samples_leaf: int = 1
    gbt_rounds: int = 3000
    gbt_eta: float = 0.02
    gbt_max_depth: int | None = 10
    gbt_subsample: float = 0.7
    gbt_colsample: float = 0.7

    def __post_init__(self):
        self.methods = tuple(self.methods)
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")
        for m, rep in self.native.items():
            if rep not in ("integer", "one_hot"):
                raise ValueError(f"{m}: native representation must be integer or one_hot")
        if self.nn.input_mode != "embed":
            raise ValueError("the embedding source must be an embed-mode network")
        if self.embedding_source not in ("first", "mean"):
            raise ValueError("embedding_source must be 'first' or 'mean'")
        if self.split_mode not in ("shuffled", "temporal"):
            raise ValueError(f"unknown split mode {self.split_mode!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["methods"] = list(self.methods)
        d["nn"]["hidden_sizes"] = list(self.nn.hidden_sizes)
        return d


@dataclass
class BenchmarkReport:
    results: list[EvalReport]
    config: dict
    version: str
    n_train: int
    n_test: int
    timing: dict = field(default_factory=dict)  # non-deterministic fields live here

    def get(self, method: str, with_embeddings: bool) -> EvalReport:
        for r in self.results:
            if r.method == method and r.with_embeddings == with_embeddings:
                return r
        raise KeyError((method, with_embeddings))

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "version": self.version,
            "config": self.config,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "results": [dataclasses.asdict(r) for r in self.results],
        }
        if include_timing:
            d["timing"] = self.timing
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def render_table(self) -> str:
        methods = list(dict.fromkeys(r.method for r in self.results))
        lines = [f"split={self.config['split_mode']}  train={self.n_train}  test={self.n_test}",
                 f"{'method':<14}{'without EE':>12}{'with EE':>12}"]
        for m in methods:
            a, b = self.get(m, False), self.get(m, True)
            lines.append(f"{m:<14}{a.mape:>12.4f}{b.mape:>12.4f}")
        return "\n".join(lines) + "\n"


def version_stamp() -> str:
    from . import __version__
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _features(rep: str, X, schema: FeatureSchema, embs) -> np.ndarray:
    if rep == "integer":
        return np.asarray(X, dtype=np.float64)
    if rep == "one_hot":
        return one_hot_matrix(X, schema.cardinalities)
    return embed_dataset(X, embs)


def _fit_predict(method: str, cfg: BenchmarkConfig, F_train, y_train, F_test) -> np.ndarray:
    """Baselines learn ``log(sales)`` and predict ``exp`` of their output."""
    target = np.log(y_train)
    if method == "knn":
        model = fit_knn(F_train, target, cfg.knn_neighbors, cfg.knn_p)
        if cfg.knn_index == "kd_tree":
            out = KDTreeIndex(model).predict(F_test)
        else:
            out = predict_knn(model, F_test)
    elif method == "random_forest":
        tc = TreeConfig(max_depth=cfg.rf_max_depth, min_samples_split=cfg.rf_min_samples_split,
                        min_samples_leaf=cfg.rf_min_samples_leaf)
        out = predict_forest(fit_random_forest(F_train, target, tc, cfg.rf_trees, cfg.seed),
                             F_test)
    elif method == "gbt":
        tc = TreeConfig(max_depth=cfg.gbt_max_depth)
        model = fit_gbt(F_train, target, tc, cfg.gbt_rounds, cfg.gbt_eta, cfg.seed,
                        cfg.gbt_subsample, cfg.gbt_colsample)
        out = predict_gbt(model, F_test)
    else:
        raise ValueError(method)
    return np.exp(out)


def _step(name: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except BenchmarkError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the step name
        raise BenchmarkError(name, exc) from exc


def prepare_splits(cfg: BenchmarkConfig, data: Dataset) -> tuple[Dataset, Dataset]:
    train, test = _step("split", split, data, cfg.split_mode, cfg.test_fraction, cfg.seed)
    if cfg.sparsify is not None:
        if len(train) > cfg.sparsify:
            train = _step("sparsify", sparsify, train, cfg.sparsify, cfg.seed)
        else:
            log.info("training split has %d <= %d rows; sparsify skipped",
                     len(train), cfg.sparsify)
    return train, test


def train_embedding_source(cfg: BenchmarkConfig, train: Dataset) -> Ensemble:
    """The embed-mode ensemble of the protocol; sees training rows only."""
    transform = TargetTransform.fit(train.y)
    nn_cfg = dataclasses.replace(cfg.nn, seed=cfg.seed)
    return _step("train_nn", train_ensemble, nn_cfg, train.schema, train, transform)


def run_benchmark(cfg: BenchmarkConfig, data: Dataset) -> BenchmarkReport:
    t_all = time.perf_counter()
    timing = {"started": _dt.datetime.now().isoformat(timespec="seconds"), "seconds": {}}
    train, test = prepare_splits(cfg, data)
    t0 = time.perf_counter()
    ensemble = train_embedding_source(cfg, train)
    timing["seconds"]["nn/embedded"] = time.perf_counter() - t0
    embs = ensemble.embeddings(cfg.embedding_source)
    schema = data.schema

    results = []
    for method in cfg.methods:
        for with_ee in (False, True):
            rep = "embedded" if with_ee else cfg.native.get(method, NATIVE_REPRESENTATION[method])
            key = f"{method}/{rep}"
            t0 = time.perf_counter()
            if method == "nn" and with_ee:
                pred = ensemble.predict(test.X)
                seconds = timing["seconds"]["nn/embedded"] + time.perf_counter() - t0
            elif method == "nn":
                if rep != "one_hot":
                    raise BenchmarkError(key, ValueError("the network baseline is one-hot"))
                oh_cfg = dataclasses.replace(cfg.nn, seed=cfg.seed, input_mode="one_hot")
                oh = _step(key, train_ensemble, oh_cfg, schema, train, ensemble.transform)
                pred = oh.predict(test.X)
                seconds = time.perf_counter() - t0
            else:
                F_train = _step(key, _features, rep, train.X, schema, embs)
                F_test = _step(key, _features, rep, test.X, schema, embs)
                pred = _step(key, _fit_predict, method, cfg, F_train, train.y, F_test)
                seconds = time.perf_counter() - t0
            timing["seconds"][key] = seconds
            score = _step(key, mape, pred, test.y)
            if not np.isfinite(score):
                raise BenchmarkError(key, ValueError("non-finite MAPE"))
            results.append(EvalReport(method, score, with_ee, cfg.split_mode, cfg.seed,
                                      {"representation": rep}))
            log.info("%-24s MAPE %.4f  (%.1fs)", key, score, seconds)
    timing["seconds"]["total"] = time.perf_counter() - t_all
    return BenchmarkReport(results, cfg.to_dict(), version_stamp(), len(train), len(test),
                           timing)


def write_report(report: BenchmarkReport, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath, tpath = out_dir / "report.json", out_dir / "report.txt"
    jpath.write_text(report.to_json() + "\n")
    tpath.write_text(report.render_table())
    return jpath, tpath


# -- analysis --------------------------------------------------------------------

@dataclass
class AnalysisConfig:
    flags: tuple[str, ...] = ()
    tsne_feature: str = "state"
    scatter_feature: str = "store"
    scatter_pairs: int = 10_000
    metric_complement: int = 1000
    metric_scale: str = "scaled"  # or "sales"
    pc_feature: str = "store"
    schoenberg_feature: str = "state"
    schoenberg_lambdas: tuple[float, ...] = geometry.DEFAULT_SCHOENBERG_LAMBDAS
    embedding_source: str = "first"
    seed: int = 0
    svg: bool = True

    def __post_init__(self):
        self.flags = tuple(self.flags)
        unknown = set(self.flags) - set(ANALYSIS_FLAGS)
        if unknown:
            raise ValueError(f"unknown analysis flags {sorted(unknown)}")
        if self.metric_scale not in ("scaled", "sales"):
            raise ValueError("metric_scale must be 'scaled' or 'sales'")


@dataclass
class AnalysisBundle:
    files: list[Path]
    summary: dict


def _metric(ensemble: Ensemble, data: Dataset, feature: int, cfg: AnalysisConfig):
    f = ensemble.predict_scaled if cfg.metric_scale == "scaled" else ensemble.predict
    m = data.schema.cardinalities[feature]
    metric = geometry.estimate_metric(f, data.X, feature, m, cfg.metric_complement, cfg.seed)
    metric.labels = data.schema.labels[feature]
    return metric


def _mean_sales(data: Dataset, feature: int) -> np.ndarray:
    m = data.schema.cardinalities[feature]
    codes = data.X[:, feature]
    totals = np.bincount(codes, weights=data.y, minlength=m)
    counts = np.bincount(codes, minlength=m)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, totals / np.maximum(counts, 1), np.nan)


def run_analysis(ensemble: Ensemble, data: Dataset, cfg: AnalysisConfig, out_dir) -> AnalysisBundle:
    """Write one data file per flag plus ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    schema = data.schema
    embs = ensemble.embeddings(cfg.embedding_source)
    files: list[Path] = []
    summary: dict = {"flags": list(cfg.flags)}

    def run(flag, fn):
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - re-raised with the flag name
            raise RuntimeError(f"analysis {flag!r} failed: {exc}") from exc

    def do_tsne():
        i = schema.index(cfg.tsne_feature)
        Y = geometry.tsne(embs[i].weights, geometry.TsneConfig(seed=cfg.seed))
        labels = schema.labels[i]
        path = out / f"tsne_{cfg.tsne_feature}.csv"
        geometry.write_csv(path, ["x", "y", "label"],
                           [(float(a), float(b), l) for (a, b), l in zip(Y, labels)])
        files.append(path)
        if cfg.svg:
            svg = out / f"tsne_{cfg.tsne_feature}.svg"
            geometry.write_svg_scatter(svg, Y[:, 0], Y[:, 1], labels=labels,
                                       title=f"t-SNE of {cfg.tsne_feature} embeddings")
            files.append(svg)
        summary["tsne"] = {"feature": cfg.tsne_feature, "points": int(Y.shape[0])}

    def do_scatter():
        i = schema.index(cfg.scatter_feature)
        metric = _metric(ensemble, data, i, cfg)
        rows = geometry.embedding_metric_scatter(embs[i].weights, metric, cfg.scatter_pairs,
                                                 cfg.seed)
        path = out / f"scatter_{cfg.scatter_feature}.csv"
        geometry.write_csv(path, ["p", "q", "embedding_distance", "metric_distance"],
                           [(int(p), int(q), e, d) for p, q, e, d in rows])
        files.append(path)
        if cfg.svg:
            svg = out / f"scatter_{cfg.scatter_feature}.svg"
            geometry.write_svg_scatter(svg, rows[:, 3], rows[:, 2],
                                       title=f"{cfg.scatter_feature}: embedding vs metric distance")
            files.append(svg)
        corr = float(np.corrcoef(rows[:, 2], rows[:, 3])[0, 1]) if len(rows) > 2 else float("nan")
        summary["scatter"] = {"feature": cfg.scatter_feature, "pairs": int(len(rows)),
                              "pearson": corr}

    def do_pc_density():
        i = schema.index(cfg.pc_feature)
        w = embs[i].weights
        top_k = min(4, w.shape[1])
        report = geometry.pc_density_report(w, top_k=top_k)
        path = out / f"pc_density_{cfg.pc_feature}.csv"
        rows = []
        for c in report:
            for lo, hi, mass in zip(c.bin_edges[:-1], c.bin_edges[1:], c.bin_mass):
                rows.append((c.component, lo, hi, mass))
        geometry.write_csv(path, ["component", "bin_low", "bin_high", "mass"], rows)
        files.append(path)
        entry = {"feature": cfg.pc_feature, "components": [
            {"component": c.component, "mu": c.mu, "sigma": c.sigma,
             "k2": None if c.normality is None else c.normality.statistic,
             "p_value": None if c.normality is None else c.normality.p_value}
            for c in report]}
        scores = pca(w).project(w, top_k)
        try:
            skew, kurt = mardia(scores)
            entry["mardia"] = {"skew": skew.statistic, "skew_p": skew.p_value,
                               "kurtosis_z": kurt.statistic, "kurtosis_p": kurt.p_value}
        except ValueError as exc:
            entry["mardia"] = {"error": str(exc)}
        summary["pc_density"] = entry

    def do_pc_sales():
        i = schema.index(cfg.pc_feature)
        w = embs[i].weights
        res = pca(w)
        rng = np.random.default_rng(cfg.seed)
        directions = {"pc1": res.components[:, 0]}
        if w.shape[1] > 1:
            directions["pc2"] = res.components[:, 1]
        for r in range(2):
            directions[f"random{r + 1}"] = rng.normal(size=w.shape[1])
        sales = _mean_sales(data, i)
        rows = []
        for name, u in directions.items():
            for cat, proj, s in geometry.sales_along_direction(w, u, sales):
                rows.append((name, schema.labels[i][int(cat)], proj, s))
        path = out / f"pc_sales_{cfg.pc_feature}.csv"
        geometry.write_csv(path, ["direction", "label", "projection", "mean_sales"], rows)
        files.append(path)
        summary["pc_sales"] = {"feature": cfg.pc_feature, "directions": list(directions)}

    def do_cross_corr():
        report = geometry.cross_subspace_correlation(embs, data.X)
        rows = [(schema.names[a], schema.names[b], v["canonical"], v["max_abs_pearson"])
                for (a, b), v in sorted(report.pairs.items())]
        path = out / "cross_correlation.csv"
        geometry.write_csv(path, ["feature_a", "feature_b", "canonical", "max_abs_pearson"], rows)
        files.append(path)
        summary["cross_corr"] = {"max_canonical": report.max_canonical}

    def do_schoenberg():
        i = schema.index(cfg.schoenberg_feature)
        metric = _metric(ensemble, data, i, cfg)
        checks = geometry.schoenberg_sweep(metric, cfg.schoenberg_lambdas)
        rows = [(c.lam, c.min_eigenvalue, int(c.is_positive_definite)) for c in checks]
        path = out / f"schoenberg_{cfg.schoenberg_feature}.csv"
        geometry.write_csv(path, ["lambda", "min_eigenvalue", "positive_definite"], rows)
        files.append(path)
        summary["schoenberg"] = {"feature": cfg.schoenberg_feature,
                                 "checks": [{"lambda": l, "min_eigenvalue": e,
                                             "positive_definite": bool(p)}
                                            for l, e, p in rows]}

    dispatch = {"tsne": do_tsne, "scatter": do_scatter, "pc-density": do_pc_density,
                "pc-sales": do_pc_sales, "cross-corr": do_cross_corr,
                "schoenberg": do_schoenberg}
    for flag in cfg.flags:
        run(flag, dispatch[flag])
    spath = out / "summary.json"
    spath.write_text(json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")
    files.append(spath)
    return AnalysisBundle(files, summary)


def export_embeddings(ensemble: Ensemble, schema: FeatureSchema, directory,
                      source: str = "first") -> list[Path]:
    """Per-feature embedding CSVs plus ``manifest.csv``."""
    embs: Sequence[EmbeddingMatrix] = ensemble.embeddings(source)
    return export_embedding_csvs(embs, schema, directory)
