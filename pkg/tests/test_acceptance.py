"""Acceptance criteria 1-12.

Every criterion records one PASS/FAIL line; ``conftest.py`` prints them in
the terminal summary. ``python tests/test_acceptance.py`` runs the same
checks without pytest and prints the lines directly.
"""
from __future__ import annotations

import dataclasses
import itertools
import os
import time

import numpy as np
import pytest
from scipy.spatial import procrustes

from catembed.geometry import (TsneConfig, estimate_metric, nearest_neighbor_purity,
                               schoenberg_check, tsne)
from catembed.harness import (BenchmarkConfig, SyntheticConfig, generate_synthetic,
                              prepare_splits, run_benchmark, train_embedding_source)
from catembed.knn import KDTreeIndex, fit_knn, predict_knn
from catembed.net import (Network, TrainConfig, as_one_hot_network, forward, grad_check,
                          train_arrays)
from catembed.numerics import dagostino_k2, pca
from catembed.trees import (TreeConfig, best_split, cost_complexity, fit_gbt,
                            fit_random_forest, grow_tree, predict_forest, predict_gbt, prune)

RESULTS: list[tuple[int, bool, str]] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    RESULTS.append((criterion, bool(ok), detail))
    print(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {criterion}: {detail}"


# -- oracles -------------------------------------------------------------------

def brute_split(X, y):
    """Every midpoint of every feature; lowest (j, s) among minimal SSE."""
    best = None
    cands = []
    for j in range(X.shape[1]):
        vals = np.unique(X[:, j])
        for a, b in zip(vals[:-1], vals[1:]):
            s = a + (b - a) * 0.5
            if s >= b:
                s = a
            mask = X[:, j] <= s
            yl, yr = y[mask], y[~mask]
            sse = np.sum((yl - yl.mean()) ** 2) + np.sum((yr - yr.mean()) ** 2)
            cands.append((sse, j, s))
    if not cands:
        return None
    m = min(c[0] for c in cands)
    tied = [c for c in cands if c[0] <= m + 1e-12 * max(1.0, m)]
    best = min(tied, key=lambda c: (c[1], c[2]))
    return best[1], best[2], best[0]


def subtree_costs(tree, X, y, node, idx):
    """All prunings of the subtree at ``node``: list of (sse, leaves)."""
    yi = y[idx]
    here = (float(np.sum((yi - yi.mean()) ** 2)) if idx.size else 0.0, 1)
    if tree.is_leaf(node):
        return [here]
    go = X[idx, tree.feature[node]] <= tree.threshold[node]
    lefts = subtree_costs(tree, X, y, tree.left[node], idx[go])
    rights = subtree_costs(tree, X, y, tree.right[node], idx[~go])
    return [here] + [(a + b, la + lb) for (a, la), (b, lb) in itertools.product(lefts, rights)]


def char_poly_min_root(K):
    """Smallest real root of det(K - t I) via Faddeev-LeVerrier coefficients."""
    n = K.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(K)
    for k in range(1, n + 1):
        M = K @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(K @ M) / k)
    roots = np.roots(coeffs)
    return float(np.min(roots.real))


# -- criteria ------------------------------------------------------------------

def test_criterion_01_gradient_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    card, dims = [5, 8, 4], [2, 3, 3]
    net = Network(card, dims, hidden_sizes=(16, 8), seed=3)
    X = np.column_stack([rng.integers(0, m, size=24) for m in card])
    t = rng.uniform(0.1, 0.9, size=24)
    res = grad_check(net, X, t, h=1e-5)
    elapsed = time.perf_counter() - t0
    total = sum(p.size for p in net.params.values())
    ok = res.max_rel_error < 1e-4 and res.n_checked + res.n_flagged == total and elapsed < 60
    record(1, ok, f"max rel err {res.max_rel_error:.2e} over {res.n_checked} params "
                  f"({res.n_flagged} at ReLU kinks), {elapsed:.1f}s")


def test_criterion_02_one_hot_equivalence():
    rng = np.random.default_rng(12)
    card = [100, 7, 31, 12, 3, 2, 12]
    dims = [10, 6, 10, 6, 2, 1, 6]
    net = Network(card, dims, hidden_sizes=(1000, 500), seed=5)
    for k in range(len(card)):  # move away from the tiny initial scale
        net.params[f"emb{k}"] = rng.normal(size=net.params[f"emb{k}"].shape)
    X = np.column_stack([rng.integers(0, m, size=1000) for m in card])
    diff = float(np.max(np.abs(forward(net, X) - forward(as_one_hot_network(net), X))))
    record(2, diff < 1e-10, f"max |embed - one-hot| = {diff:.2e} over 1000 samples")


def test_criterion_03_tree_oracle():
    rng = np.random.default_rng(13)
    mismatches = 0
    worst = 0.0
    for inst in range(200):
        n = int(rng.integers(2, 201))
        if inst % 2:
            X = rng.integers(0, 6, size=(n, 5)).astype(float)
        else:
            X = rng.normal(size=(n, 5))
        y = rng.normal(size=n) if inst % 3 else rng.integers(0, 3, size=n).astype(float)
        got, want = best_split(X, y), brute_split(X, y)
        if want is not None and not want[2] < np.sum((y - y.mean()) ** 2) * (1 - 1e-12):
            want = None
        if got is None or want is None:
            mismatches += got is not want
            continue
        if got[:2] != want[:2]:
            mismatches += 1
        worst = max(worst, abs(got[2] - want[2]))
    ok = mismatches == 0 and worst <= 1e-12
    record(3, ok, f"{mismatches} (j, s) mismatches in 200 instances, max SSE diff {worst:.1e}")


def test_criterion_04_pruning_optimality():
    rng = np.random.default_rng(14)
    failures, checked = 0, 0
    for inst in range(60):
        X = rng.normal(size=(40, 3))
        y = np.sin(2 * X[:, 0]) + 0.3 * rng.normal(size=40)
        tree = grow_tree(X, y, TreeConfig(max_depth=3))
        if tree.n_nodes > 15:
            continue
        costs = subtree_costs(tree, X, y, 0, np.arange(40))
        for alpha in (0.01, 0.1, 1.0):
            best = min(sse + alpha * leaves for sse, leaves in costs)
            got = cost_complexity(prune(tree, alpha, X, y), alpha, X, y)
            checked += 1
            failures += not got <= best + 1e-9 * max(1.0, best)
    record(4, failures == 0 and checked >= 150,
           f"{failures} suboptimal prunings over {checked} (tree, alpha) cases")


def test_criterion_05_ensemble_identities():
    rng = np.random.default_rng(15)
    X = rng.normal(size=(300, 4))
    y = X[:, 0] - 2 * X[:, 1] ** 2 + 0.1 * rng.normal(size=300)
    Q = rng.normal(size=(200, 4))
    forest = fit_random_forest(X, y, TreeConfig(max_depth=6), n_trees=12, seed=1)
    d_forest = float(np.max(np.abs(predict_forest(forest, Q)
                                   - np.mean([t.predict(Q) for t in forest.trees], axis=0))))
    gbt = fit_gbt(X, y, TreeConfig(max_depth=3), rounds=40, shrinkage=0.3, seed=2,
                  row_subsample=0.7, col_subsample=0.75)
    manual = gbt.base_score + gbt.shrinkage * np.sum([t.predict(Q) for t in gbt.trees], axis=0)
    d_gbt = float(np.max(np.abs(predict_gbt(gbt, Q) - manual)))
    Xd = rng.normal(size=(100, 3))
    yd = rng.normal(size=100)
    final = {}
    fit_gbt(Xd, yd, TreeConfig(max_depth=None), rounds=3, shrinkage=1.0,
            callback=lambda k, f: final.update(f=f.copy()))
    resid = float(np.max(np.abs(yd - final["f"])))
    ok = d_forest <= 1e-12 and d_gbt <= 1e-12 and resid < 1e-9
    record(5, ok, f"forest {d_forest:.1e}, gbt {d_gbt:.1e}, nu=1 residual {resid:.1e}")


def test_criterion_06_knn_oracle():
    rng = np.random.default_rng(16)
    F = np.round(rng.normal(size=(4000, 6)), 1)  # rounding creates distance ties
    y = rng.normal(size=4000)
    Q = np.round(rng.normal(size=(1000, 6)), 1)
    Q[:50] = F[rng.integers(0, 4000, size=50)]  # exact hits
    ok = True
    for p in (1.0, 2.0):
        m = fit_knn(F, y, k=10, p=p)
        ok &= bool(np.array_equal(KDTreeIndex(m).predict(Q), predict_knn(m, Q)))
    record(6, ok, "kd-tree == brute force on 1000 queries for p in {1, 2}")


def _toy_model(rng, k):
    card = [int(rng.integers(3, 7)), int(rng.integers(2, 5)), int(rng.integers(2, 5))]
    X = np.column_stack([rng.integers(0, m, size=120) for m in card])
    t = rng.uniform(0.2, 0.8, size=120)
    cfg = TrainConfig(epochs=2, batch_size=32, hidden_sizes=(8,))
    net = train_arrays(cfg, card, [2, 1, 1], X, t, seed=k)
    return net, card, X


def test_criterion_07_metric_axioms():
    rng = np.random.default_rng(17)
    sym_bad = tri_bad = zero_bad = 0
    worst_tri = 0.0
    for k in range(100):
        net, card, X = _toy_model(rng, k)
        metric = estimate_metric(lambda Z: forward(net, Z), X, 0, card[0], n_complement=60,
                                 seed=k)
        d = metric.distances
        sym_bad += not np.array_equal(d, d.T)
        tol = 1e-12 * max(float(d.max()), 1e-300)
        excess = d[:, None, :] - d[:, :, None] - d.T[None, :, :]  # d_pr - d_pq - d_qr
        worst_tri = max(worst_tri, float(excess.max()))
        tri_bad += bool(np.any(excess > tol))
        blind = net.copy()
        blind.params["emb0"][:] = blind.params["emb0"][0]
        z = estimate_metric(lambda Z: forward(blind, Z), X, 0, card[0], n_complement=60,
                            seed=k).distances
        zero_bad += bool(np.any(z != 0))
    ok = sym_bad == 0 and tri_bad == 0 and zero_bad == 0
    record(7, ok, f"100 models: asymmetric {sym_bad}, triangle violations {tri_bad} "
                  f"(max excess {worst_tri:.1e}), nonzero blind metrics {zero_bad}")


def test_criterion_08_schoenberg():
    x = np.array([0.0, 0.4, 1.1, 1.5, 2.7, 3.0])
    line = np.abs(x[:, None] - x[None, :])
    good = schoenberg_check(line, lam=1.0)
    good_oracle = char_poly_min_root(np.exp(-line))
    hub = np.full((6, 6), 0.1)
    hub[0, :] = hub[:, 0] = 0.9
    np.fill_diagonal(hub, 1.0)
    bad = schoenberg_check(-np.log(hub), lam=1.0)
    bad_oracle = char_poly_min_root(hub)
    closed = 1.2 - np.sqrt(16.36) / 2  # hub/leaf eigenvector (x, 1, ..., 1)
    ok = (good.is_positive_definite and abs(good.min_eigenvalue - good_oracle) < 1e-9
          and not bad.is_positive_definite and abs(bad.min_eigenvalue - bad_oracle) < 1e-9
          and abs(bad_oracle - closed) < 1e-9)
    record(8, ok, f"line metric min eig {good.min_eigenvalue:.6f} (oracle {good_oracle:.6f}); "
                  f"engineered min eig {bad.min_eigenvalue:.6f} (oracle {bad_oracle:.6f})")


def test_criterion_09_statistical_calibration():
    rejections = sum(dagostino_k2(np.random.default_rng(s).normal(size=500)).p_value < 0.05
                     for s in range(1000))
    fpr = rejections / 1000
    strong = sum(dagostino_k2(np.random.default_rng(10_000 + s).exponential(size=500)).p_value
                 < 1e-3 for s in range(1000))
    ok = 0.03 <= fpr <= 0.07 and strong >= 990
    record(9, ok, f"gaussian false-positive rate {fpr:.3f}; exponential rejected at p<0.001 "
                  f"in {strong}/1000 seeds")


def test_criterion_10_tsne():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20)
    X = np.vstack([rng.normal(0, 1, (30, 10)), rng.normal(20, 1, (30, 10))])
    labels = np.repeat([0, 1], 30)
    cfg = TsneConfig(perplexity=10, learning_rate=10.0, seed=0)
    Y, trace = tsne(X, cfg, return_kl=True)
    Y_default = tsne(X, TsneConfig(perplexity=10, seed=0))
    kl = np.array([v for it, v in trace if it >= cfg.exaggeration_iters])
    rises = int(np.sum(np.diff(kl) > 0))
    purity = min(nearest_neighbor_purity(Y, labels), nearest_neighbor_purity(Y_default, labels))
    elapsed = time.perf_counter() - t0
    ok = purity == 1.0 and rises == 0 and elapsed < 30
    record(10, ok, f"purity {purity:.3f}; {rises} KL increases after exaggeration "
                   f"(KL {kl[0]:.3f} -> {kl[-1]:.3f}); {elapsed:.1f}s")


# -- desk-scale benchmark ------------------------------------------------------------

DESK_SYNTH = SyntheticConfig(n_stores=100, n_rows=50_000, sigma=0.15, seed=0)
DESK_NN = TrainConfig(hidden_sizes=(256, 128), epochs=10, batch_size=128, ensemble_size=5)
DESK_BENCH = BenchmarkConfig(nn=DESK_NN, seed=0, rf_trees=30, gbt_rounds=300, gbt_eta=0.02)


@pytest.fixture(scope="module")
def desk_data():
    return generate_synthetic(DESK_SYNTH)


@pytest.mark.slow
def test_criterion_11_desk_benchmark(desk_data):
    data, truth = desk_data
    t0 = time.perf_counter()
    shuffled = run_benchmark(DESK_BENCH, data)
    temporal = run_benchmark(dataclasses.replace(DESK_BENCH, split_mode="temporal",
                                                 methods=("nn",)), data)
    elapsed = time.perf_counter() - t0
    parts = []
    ok_a = True
    for m in ("knn", "random_forest", "gbt"):
        a, b = shuffled.get(m, False).mape, shuffled.get(m, True).mape
        ok_a &= b <= a
        parts.append(f"{m} {a:.4f}->{b:.4f}")
    nn_ee = shuffled.get("nn", True).mape
    ok_b = nn_ee <= 1.3 * truth.bayes_floor
    t_oh, t_ee = temporal.get("nn", False).mape, temporal.get("nn", True).mape
    ok_c = t_ee <= t_oh
    ok = ok_a and ok_b and ok_c and elapsed < 600
    record(11, ok, f"(a) {', '.join(parts)}; (b) NN {nn_ee:.4f} vs 1.3*floor "
                   f"{1.3 * truth.bayes_floor:.4f}; (c) temporal NN one-hot {t_oh:.4f} "
                   f"vs EE {t_ee:.4f}; {elapsed:.0f}s")


def test_criterion_12_embedding_structure(desk_data):
    data, truth = desk_data
    cfg = dataclasses.replace(DESK_BENCH, nn=dataclasses.replace(DESK_NN, ensemble_size=1))
    train, _ = prepare_splits(cfg, data)
    ensemble = train_embedding_source(cfg, train)
    store = ensemble.embeddings("first")[data.schema.index("store")].weights
    plane = pca(store).project(store, 2)
    _, _, disparity = procrustes(truth.latent, plane)
    r = float(np.sqrt(1 - disparity))
    record(12, r > 0.8, f"Procrustes correlation of store PCA plane vs latent plane {r:.3f}")


@pytest.mark.skipif(not os.environ.get("CATEMBED_ROSSMANN_CSV"),
                    reason="criterion 13 needs user-supplied Rossmann data")
def test_criterion_13_full_reproduction():  # optional, not gated
    from catembed.tabular import ingest_csv
    data = ingest_csv(os.environ["CATEMBED_ROSSMANN_CSV"])
    report = run_benchmark(BenchmarkConfig(), data)
    print(report.render_table())


if __name__ == "__main__":
    fixtures = {"desk_data": None}
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_criterion_") or name.endswith("13_full_reproduction"):
            continue
        kwargs = {}
        if "desk_data" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
            if fixtures["desk_data"] is None:
                fixtures["desk_data"] = generate_synthetic(DESK_SYNTH)
            kwargs["desk_data"] = fixtures["desk_data"]
        try:
            fn(**kwargs)
        except AssertionError:
            pass
    failed = [c for c, ok, _ in RESULTS if not ok]
    print(f"{len(RESULTS) - len(failed)}/{len(RESULTS)} criteria passed")
    raise SystemExit(1 if failed else 0)
