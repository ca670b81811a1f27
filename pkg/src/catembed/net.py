"""Entity-embedding network in plain numpy.

Each categorical feature is looked up in its own weight matrix (equivalently,
one-hot times that matrix), the looked-up rows are concatenated, passed
through ReLU dense layers and a single sigmoid unit. Training minimises the
mean squared error against ``log(sales) / log(sale_max)`` with Adam.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .tabular import Dataset, FeatureSchema, TargetTransform, one_hot_matrix

INPUT_MODES = ("embed", "one_hot", "one_hot_extra_dense")
CHECKPOINT_VERSION = 1
EMBED_INIT_SCALE = 0.05


class UnseenCategoryError(KeyError):
    pass


@dataclass
class EmbeddingMatrix:
    feature: int
    weights: np.ndarray  # (m_i, D_i); row a is the vector of category a

    @property
    def cardinality(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def embed_lookup(e: EmbeddingMatrix, category: int, unseen: str = "error") -> np.ndarray:
    """Row ``category`` of the embedding matrix.

    ``unseen="mean"`` returns the mean of all rows for out-of-range codes
    instead of raising.
    """
    if 0 <= category < e.cardinality:
        return e.weights[category].copy()
    if unseen == "mean":
        return e.weights.mean(axis=0)
    raise UnseenCategoryError(
        f"category {category} not in [0, {e.cardinality}) for feature {e.feature}"
    )


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Network:
    """Parameters and architecture of one embedding network.

    ``params`` maps names to arrays: ``emb{i}`` for embedding matrices (embed
    mode), ``W_extra``/``b_extra`` for the dense layer replacing embeddings in
    ``one_hot_extra_dense`` mode, ``W{l}``/``b{l}`` for hidden layers and
    ``W_out``/``b_out`` for the sigmoid unit.
    """

    def __init__(self, cardinalities: Sequence[int], embedding_dims: Sequence[int],
                 hidden_sizes: Sequence[int] = (1000, 500), input_mode: str = "embed",
                 params: dict | None = None, seed: int = 0, unseen: str = "error"):
        if input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}")
        if len(cardinalities) != len(embedding_dims):
            raise ValueError("one embedding dim per feature is required")
        self.cardinalities = [int(m) for m in cardinalities]
        self.embedding_dims = [int(d) for d in embedding_dims]
        self.hidden_sizes = [int(h) for h in hidden_sizes]
        self.input_mode = input_mode
        self.unseen = unseen
        self.history: list[float] = []
        self.params = params if params is not None else self._init_params(seed)
        self._check_shapes()

    @classmethod
    def from_schema(cls, schema: FeatureSchema, **kw) -> "Network":
        return cls(schema.cardinalities, schema.embedding_dims, **kw)

    @property
    def input_width(self) -> int:
        if self.input_mode == "embed":
            return sum(self.embedding_dims)
        if self.input_mode == "one_hot":
            return sum(self.cardinalities)
        return sum(self.embedding_dims)

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        if self.input_mode == "embed":
            for i, (m, d) in enumerate(zip(self.cardinalities, self.embedding_dims)):
                shapes[f"emb{i}"] = (m, d)
        elif self.input_mode == "one_hot_extra_dense":
            shapes["W_extra"] = (sum(self.cardinalities), sum(self.embedding_dims))
            shapes["b_extra"] = (sum(self.embedding_dims),)
        width = self.input_width
        for l, h in enumerate(self.hidden_sizes, start=1):
            shapes[f"W{l}"] = (width, h)
            shapes[f"b{l}"] = (h,)
            width = h
        shapes["W_out"] = (width, 1)
        shapes["b_out"] = (1,)
        return shapes

    def _init_params(self, seed: int) -> dict:
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in self.param_shapes().items():
            if name.startswith("emb"):
                params[name] = rng.uniform(-EMBED_INIT_SCALE, EMBED_INIT_SCALE, size=shape)
            elif name.startswith("W"):
                params[name] = _glorot(rng, *shape)
            else:
                params[name] = np.zeros(shape)
        return params

    def _check_shapes(self):
        expected = self.param_shapes()
        if set(expected) != set(self.params):
            raise ValueError(
                f"parameter names {sorted(self.params)} do not match {sorted(expected)}"
            )
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(f"{name}: shape {self.params[name].shape}, expected {shape}")

    def copy(self) -> "Network":
        return Network(self.cardinalities, self.embedding_dims, self.hidden_sizes,
                       self.input_mode, {k: v.copy() for k, v in self.params.items()},
                       unseen=self.unseen)

    def embeddings(self) -> list[EmbeddingMatrix]:
        return extract_embeddings(self)


def _check_codes(X, cardinalities, unseen: str):
    X = np.asarray(X, dtype=np.int64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != len(cardinalities):
        raise ValueError(f"expected {len(cardinalities)} features, got {X.shape[1]}")
    card = np.asarray(cardinalities)
    bad = (X < 0) | (X >= card)
    if np.any(bad) and unseen != "mean":
        r, c = np.argwhere(bad)[0]
        raise UnseenCategoryError(
            f"row {r}: category {X[r, c]} not in [0, {card[c]}) for feature {c}"
        )
    return X, bad


def _input_layer(net: Network, X):
    X, bad = _check_codes(X, net.cardinalities, net.unseen)
    if net.input_mode == "embed":
        blocks = []
        for i in range(X.shape[1]):
            w = net.params[f"emb{i}"]
            col = X[:, i]
            if bad[:, i].any():
                rows = w[np.where(bad[:, i], 0, col)]
                rows[bad[:, i]] = w.mean(axis=0)
                blocks.append(rows)
            else:
                blocks.append(w[col])
        return X, np.concatenate(blocks, axis=1)
    if bad.any():
        raise UnseenCategoryError("unseen categories are not supported in one-hot modes")
    return X, one_hot_matrix(X, net.cardinalities)


def _forward_cache(net: Network, X):
    X, h = _input_layer(net, X)
    p = net.params
    cache = {"X": X, "h0": h, "z": [], "h": [h]}
    if net.input_mode == "one_hot_extra_dense":
        z = h @ p["W_extra"] + p["b_extra"]
        h = np.maximum(z, 0.0)
        cache["z"].append(z)
        cache["h"].append(h)
    for l in range(1, len(net.hidden_sizes) + 1):
        z = h @ p[f"W{l}"] + p[f"b{l}"]
        h = np.maximum(z, 0.0)
        cache["z"].append(z)
        cache["h"].append(h)
    out = expit(h @ p["W_out"] + p["b_out"])[:, 0]
    cache["out"] = out
    return out, cache


def forward(net: Network, X) -> np.ndarray:
    """Sigmoid-scale outputs for a batch of integer code rows."""
    out, _ = _forward_cache(net, X)
    return out


def loss(net: Network, X, t) -> float:
    out = forward(net, X)
    return float(np.mean((out - np.asarray(t, dtype=np.float64)) ** 2))


def backward(net: Network, X, t) -> tuple[float, dict]:
    """Batch-mean squared error and its gradient for every parameter."""
    t = np.asarray(t, dtype=np.float64).ravel()
    out, cache = _forward_cache(net, X)
    n = out.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    if t.shape != (n,):
        raise ValueError("one target per row is required")
    p = net.params
    diff = out - t
    grads: dict[str, np.ndarray] = {}
    # d loss / d logit through the sigmoid
    delta = (2.0 / n) * diff * out * (1.0 - out)
    delta = delta[:, None]
    hs, zs = cache["h"], cache["z"]
    grads["W_out"] = hs[-1].T @ delta
    grads["b_out"] = delta.sum(axis=0)
    dh = delta @ p["W_out"].T
    names = [f"{l}" for l in range(1, len(net.hidden_sizes) + 1)]
    if net.input_mode == "one_hot_extra_dense":
        names = ["_extra"] + names
    for k in range(len(names) - 1, -1, -1):
        dz = dh * (zs[k] > 0)
        grads[f"W{names[k]}"] = hs[k].T @ dz
        grads[f"b{names[k]}"] = dz.sum(axis=0)
        dh = dz @ p[f"W{names[k]}"].T
    if net.input_mode == "embed":
        X = cache["X"]
        start = 0
        for i, d in enumerate(net.embedding_dims):
            g = np.zeros_like(p[f"emb{i}"])
            block = dh[:, start:start + d]
            codes = X[:, i]
            valid = (codes >= 0) & (codes < net.cardinalities[i])
            np.add.at(g, codes[valid], block[valid])
            if not valid.all():
                g += block[~valid].sum(axis=0) / g.shape[0]
            grads[f"emb{i}"] = g
            start += d
    return float(np.mean(diff ** 2)), grads


class Adam:
    """Adam with bias correction; moments mirror the parameter dict."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict, grads: dict) -> None:
        for k, g in grads.items():
            if k not in params:
                raise ValueError(f"gradient for unknown parameter {k!r}")
            if np.shape(g) != np.shape(params[k]):
                raise ValueError(
                    f"{k}: gradient shape {np.shape(g)} != parameter shape {np.shape(params[k])}"
                )
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[k] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def adam_step(state: Adam, params: dict, grads: dict) -> tuple[dict, Adam]:
    state.step(params, grads)
    return params, state


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 128
    seed: int = 0
    ensemble_size: int = 5
    hidden_sizes: tuple[int, ...] = (1000, 500)
    learning_rate: float = 1e-3
    input_mode: str = "embed"
    unseen: str = "error"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.ensemble_size < 1:
            raise ValueError("epochs, batch_size and ensemble_size must be >= 1")
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}")
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)


def train_arrays(cfg: TrainConfig, cardinalities, embedding_dims, X, t,
                 seed: int | None = None) -> Network:
    """Mini-batch Adam on transformed targets ``t``.

    ``net.history`` holds the full-data loss at initialisation followed by the
    mean batch loss of every epoch.
    """
    X = np.asarray(X, dtype=np.int64)
    t = np.asarray(t, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    seed = cfg.seed if seed is None else seed
    net = Network(cardinalities, embedding_dims, cfg.hidden_sizes, cfg.input_mode,
                  seed=seed, unseen=cfg.unseen)
    opt = Adam(lr=cfg.learning_rate)
    shuffle_rng = np.random.default_rng([seed, 1])
    net.history.append(loss(net, X, t))
    n = X.shape[0]
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            batch_loss, grads = backward(net, X[idx], t[idx])
            opt.step(net.params, grads)
            total += batch_loss * idx.size
        net.history.append(total / n)
    return net


def train(cfg: TrainConfig, schema: FeatureSchema, train_set: Dataset,
          transform: TargetTransform, seed: int | None = None) -> Network:
    return train_arrays(cfg, schema.cardinalities, schema.embedding_dims, train_set.X,
                        transform.transform(train_set.y), seed=seed)


@dataclass
class Ensemble:
    """Networks trained with seeds ``seed, seed+1, ...``; averages sigmoid outputs."""

    networks: list[Network]
    transform: TargetTransform
    seeds: list[int] = field(default_factory=list)

    def predict_scaled(self, X) -> np.ndarray:
        return np.mean([forward(n, X) for n in self.networks], axis=0)

    def member_predictions(self, X) -> np.ndarray:
        return np.stack([self.transform.inverse_transform(forward(n, X))
                         for n in self.networks])

    def predict(self, X) -> np.ndarray:
        return self.transform.inverse_transform(self.predict_scaled(X))

    def embeddings(self, source: str = "first") -> list[EmbeddingMatrix]:
        """Embeddings of the first member, or the element-wise member mean."""
        if source == "first":
            return extract_embeddings(self.networks[0])
        if source == "mean":
            per = [extract_embeddings(n) for n in self.networks]
            return [EmbeddingMatrix(i, np.mean([p[i].weights for p in per], axis=0))
                    for i in range(len(per[0]))]
        raise ValueError("source must be 'first' or 'mean'")


def train_ensemble(cfg: TrainConfig, schema: FeatureSchema, train_set: Dataset,
                   transform: TargetTransform, seeds: Sequence[int] | None = None) -> Ensemble:
    if seeds is None:
        seeds = [cfg.seed + k for k in range(cfg.ensemble_size)]
    nets = [train(cfg, schema, train_set, transform, seed=s) for s in seeds]
    return Ensemble(nets, transform, list(seeds))


def ensemble_train_predict(cfg: TrainConfig, schema: FeatureSchema, train_set: Dataset,
                           test_set: Dataset, transform: TargetTransform,
                           seeds: Sequence[int] | None = None) -> np.ndarray:
    """Sales-scale predictions: inverse transform of the mean member output."""
    return train_ensemble(cfg, schema, train_set, transform, seeds).predict(test_set.X)


def extract_embeddings(net: Network) -> list[EmbeddingMatrix]:
    if net.input_mode != "embed":
        raise ValueError(f"no embedding layers in {net.input_mode!r} mode")
    return [EmbeddingMatrix(i, net.params[f"emb{i}"].copy())
            for i in range(len(net.cardinalities))]


def embed_dataset(d, embs: Sequence[EmbeddingMatrix], unseen: str = "error") -> np.ndarray:
    """Concatenated embedding rows for every sample (a Dataset or a code matrix)."""
    X = d.X if isinstance(d, Dataset) else np.asarray(d, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != len(embs):
        raise ValueError(f"expected {len(embs)} feature columns")
    if isinstance(d, Dataset):
        for e, m in zip(embs, d.schema.cardinalities):
            if e.cardinality != m:
                raise ValueError(
                    f"feature {e.feature}: embedding has {e.cardinality} rows, schema {m}"
                )
    cols = []
    for i, e in enumerate(embs):
        codes = X[:, i]
        bad = (codes < 0) | (codes >= e.cardinality)
        if bad.any():
            if unseen != "mean":
                raise UnseenCategoryError(f"feature {i}: category out of range")
            rows = e.weights[np.where(bad, 0, codes)]
            rows[bad] = e.weights.mean(axis=0)
            cols.append(rows)
        else:
            cols.append(e.weights[codes])
    return np.concatenate(cols, axis=1)


def block_diagonal(embs: Sequence[EmbeddingMatrix]) -> np.ndarray:
    """The fixed one-hot -> embedding matrix with the embedding blocks on its diagonal."""
    rows = sum(e.cardinality for e in embs)
    cols = sum(e.dim for e in embs)
    out = np.zeros((rows, cols))
    r = c = 0
    for e in embs:
        out[r:r + e.cardinality, c:c + e.dim] = e.weights
        r += e.cardinality
        c += e.dim
    return out


def as_one_hot_network(net: Network) -> Network:
    """One-hot-mode network with the embeddings folded into the first dense layer."""
    embs = extract_embeddings(net)
    bd = block_diagonal(embs)
    params = {k: v.copy() for k, v in net.params.items() if not k.startswith("emb")}
    first = "W1" if net.hidden_sizes else "W_out"
    params[first] = bd @ net.params[first]
    return Network(net.cardinalities, net.embedding_dims, net.hidden_sizes, "one_hot",
                   params)


@dataclass
class GradCheckResult:
    max_rel_error: float
    n_checked: int
    n_flagged: int
    worst_param: str | None = None


def _relu_signs(net: Network, X) -> list[np.ndarray]:
    _, cache = _forward_cache(net, X)
    return [np.sign(z) for z in cache["z"]]


def grad_check(net: Network, X, t, h: float = 1e-5, floor: float = 1e-8) -> GradCheckResult:
    """Compare backprop gradients to central differences for every parameter entry.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``. Entries whose
    perturbation changes the ReLU sign pattern (a kink lies within ``+-h``, or
    a pre-activation sits exactly at 0) are flagged and left out of the max.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    _, grads = backward(net, X, t)
    base_signs = _relu_signs(net, X)
    worst, worst_name, checked, flagged = 0.0, None, 0, 0
    for name, p in net.params.items():
        flat = p.reshape(-1)
        gflat = grads[name].reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            lp = loss(net, X, t)
            sp = _relu_signs(net, X)
            flat[k] = orig - h
            lm = loss(net, X, t)
            sm = _relu_signs(net, X)
            flat[k] = orig
            if any(not (np.array_equal(a, b) and np.array_equal(a, c))
                   for a, b, c in zip(base_signs, sp, sm)):
                flagged += 1
                continue
            num = (lp - lm) / (2 * h)
            ana = gflat[k]
            err = abs(ana - num) / max(abs(ana), abs(num), floor)
            checked += 1
            if err > worst:
                worst, worst_name = err, f"{name}[{k}]"
    return GradCheckResult(worst, checked, flagged, worst_name)


# -- files -------------------------------------------------------------------

def export_embedding_csvs(embs: Sequence[EmbeddingMatrix], schema: FeatureSchema,
                          directory) -> list[Path]:
    """One CSV per feature plus ``manifest.csv``; values written with full precision."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    manifest = directory / "manifest.csv"
    try:
        with open(manifest, "w", newline="") as mf:
            mw = csv.writer(mf)
            mw.writerow(["feature", "file", "rows", "cols"])
            for e in embs:
                name = schema.features[e.feature].name
                path = directory / f"{name}.csv"
                with open(path, "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["category_label"] + [f"e_{b}" for b in range(e.dim)])
                    for label, row in zip(schema.labels[e.feature], e.weights):
                        w.writerow([label] + [repr(float(v)) for v in row])
                mw.writerow([name, path.name, e.cardinality, e.dim])
                paths.append(path)
    except OSError as exc:
        raise OSError(f"failed writing embeddings under {directory}: {exc}") from exc
    return paths


def import_embedding_csvs(directory, schema: FeatureSchema) -> list[EmbeddingMatrix]:
    directory = Path(directory)
    with open(directory / "manifest.csv", newline="") as mf:
        entries = list(csv.DictReader(mf))
    embs = []
    for entry in entries:
        i = schema.index(entry["feature"])
        with open(directory / entry["file"], newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        by_label = {r[0]: [float(v) for v in r[1:]] for r in rows}
        w = np.array([by_label[l] for l in schema.labels[i]], dtype=np.float64)
        if w.shape != (int(entry["rows"]), int(entry["cols"])):
            raise ValueError(f"{entry['file']}: shape {w.shape} disagrees with manifest")
        embs.append(EmbeddingMatrix(i, w))
    return embs


def save_checkpoint(ensemble: Ensemble, schema: FeatureSchema, path) -> None:
    """Versioned ``.npz`` blob: a JSON manifest of shapes plus every parameter."""
    manifest = {
        "format": "catembed-checkpoint",
        "version": CHECKPOINT_VERSION,
        "schema": schema.to_dict(),
        "sale_max": ensemble.transform.sale_max,
        "seeds": ensemble.seeds,
        "networks": [
            {"input_mode": n.input_mode, "hidden_sizes": n.hidden_sizes,
             "shapes": {k: list(v.shape) for k, v in n.params.items()}}
            for n in ensemble.networks
        ],
    }
    arrays = {f"net{j}/{k}": v for j, n in enumerate(ensemble.networks)
              for k, v in n.params.items()}
    with open(path, "wb") as fh:
        np.savez(fh, manifest=np.array(json.dumps(manifest)), **arrays)


def load_checkpoint(path) -> tuple[Ensemble, FeatureSchema]:
    with np.load(path, allow_pickle=False) as z:
        manifest = json.loads(str(z["manifest"]))
        if manifest.get("format") != "catembed-checkpoint":
            raise ValueError(f"{os.fspath(path)}: not a checkpoint")
        if manifest.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {manifest.get('version')}")
        schema = FeatureSchema.from_dict(manifest["schema"])
        nets = []
        for j, spec in enumerate(manifest["networks"]):
            params = {k: z[f"net{j}/{k}"] for k in spec["shapes"]}
            nets.append(Network(schema.cardinalities, schema.embedding_dims,
                                spec["hidden_sizes"], spec["input_mode"], params))
    return Ensemble(nets, TargetTransform(manifest["sale_max"]), manifest["seeds"]), schema


# -- estimator ---------------------------------------------------------------

class EntityEmbeddingRegressor(TransformerMixin, RegressorMixin, BaseEstimator):
    """Estimator wrapper: fit on integer codes and positive sales.

    ``predict`` returns sales; ``transform`` returns the learned embedded
    features, so the fitted model can feed other regressors.
    """

    def __init__(self, cardinalities=None, embedding_dims=None, hidden_sizes=(1000, 500),
                 epochs=10, batch_size=128, learning_rate=1e-3, ensemble_size=5,
                 input_mode="embed", embedding_source="first", unseen="error",
                 random_state=0):
        self.cardinalities = cardinalities
        self.embedding_dims = embedding_dims
        self.hidden_sizes = hidden_sizes
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.ensemble_size = ensemble_size
        self.input_mode = input_mode
        self.embedding_source = embedding_source
        self.unseen = unseen
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.int64, y_numeric=True)
        card = (np.asarray(self.cardinalities) if self.cardinalities is not None
                else X.max(axis=0) + 1)
        dims = (np.asarray(self.embedding_dims) if self.embedding_dims is not None
                else np.clip(card - 1, 1, None))
        self.cardinalities_ = [int(m) for m in card]
        self.embedding_dims_ = [int(d) for d in dims]
        self.transform_ = TargetTransform.fit(y)
        cfg = TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                          seed=self.random_state, ensemble_size=self.ensemble_size,
                          hidden_sizes=tuple(self.hidden_sizes),
                          learning_rate=self.learning_rate, input_mode=self.input_mode,
                          unseen=self.unseen)
        t = self.transform_.transform(y)
        seeds = [self.random_state + k for k in range(self.ensemble_size)]
        nets = [train_arrays(cfg, self.cardinalities_, self.embedding_dims_, X, t, seed=s)
                for s in seeds]
        self.ensemble_ = Ensemble(nets, self.transform_, seeds)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "ensemble_")
        X = check_array(X, dtype=np.int64)
        return self.ensemble_.predict(X)

    def transform(self, X):
        check_is_fitted(self, "ensemble_")
        X = check_array(X, dtype=np.int64)
        return embed_dataset(X, self.ensemble_.embeddings(self.embedding_source),
                             unseen=self.unseen)

    def embeddings(self):
        check_is_fitted(self, "ensemble_")
        return self.ensemble_.embeddings(self.embedding_source)
