import numpy as np
import pytest
from sklearn.base import clone

from catembed.net import (Adam, EmbeddingMatrix, Ensemble, EntityEmbeddingRegressor, Network,
                          TrainConfig, UnseenCategoryError, adam_step, as_one_hot_network,
                          backward, block_diagonal, embed_dataset, embed_lookup,
                          export_embedding_csvs, extract_embeddings, forward, grad_check,
                          import_embedding_csvs, load_checkpoint, loss, save_checkpoint,
                          train_arrays, train_ensemble)
from catembed.tabular import Dataset, FeatureSchema, TargetTransform, one_hot, one_hot_matrix

CARD = [5, 8, 4]
DIMS = [2, 3, 3]


def _codes(rng, n, card=CARD):
    return np.column_stack([rng.integers(0, m, size=n) for m in card])


def test_lookup_equals_one_hot_product():
    rng = np.random.default_rng(0)
    e = EmbeddingMatrix(0, rng.normal(size=(6, 3)))
    for a in range(6):
        np.testing.assert_array_equal(embed_lookup(e, a), one_hot(a, 6) @ e.weights)
    with pytest.raises(UnseenCategoryError):
        embed_lookup(e, 6)
    np.testing.assert_allclose(embed_lookup(e, 9, unseen="mean"), e.weights.mean(axis=0))


def test_param_shapes_and_init():
    net = Network(CARD, DIMS, hidden_sizes=(16, 8), seed=1)
    shapes = net.param_shapes()
    assert shapes["emb1"] == (8, 3)
    assert shapes["W1"] == (8, 16) and shapes["W2"] == (16, 8) and shapes["W_out"] == (8, 1)
    assert np.all(np.abs(net.params["emb0"]) <= 0.05)
    assert np.all(net.params["b1"] == 0)
    limit = np.sqrt(6 / (8 + 16))
    assert np.all(np.abs(net.params["W1"]) <= limit)
    oh = Network(CARD, DIMS, hidden_sizes=(16,), input_mode="one_hot")
    assert oh.param_shapes()["W1"] == (17, 16)
    extra = Network(CARD, DIMS, hidden_sizes=(16,), input_mode="one_hot_extra_dense")
    assert extra.param_shapes()["W_extra"] == (17, 8)
    with pytest.raises(ValueError):
        Network(CARD, [2, 3], hidden_sizes=(4,))


@pytest.mark.parametrize("mode", ["embed", "one_hot", "one_hot_extra_dense"])
@pytest.mark.parametrize("hidden", [(), (6,), (16, 8)])
def test_gradients_match_finite_differences(mode, hidden):
    rng = np.random.default_rng(2)
    net = Network(CARD, DIMS, hidden_sizes=hidden, input_mode=mode, seed=3)
    X = _codes(rng, 20)
    t = rng.uniform(0.1, 0.9, size=20)
    res = grad_check(net, X, t)
    assert res.max_rel_error < 1e-4
    assert res.n_checked > 0


def test_sigmoid_output_and_loss():
    rng = np.random.default_rng(4)
    net = Network(CARD, DIMS, hidden_sizes=(8,), seed=0)
    X = _codes(rng, 50)
    out = forward(net, X)
    assert out.shape == (50,) and np.all((out > 0) & (out < 1))
    t = rng.uniform(size=50)
    assert loss(net, X, t) == pytest.approx(np.mean((out - t) ** 2))
    value, grads = backward(net, X, t)
    assert value == pytest.approx(loss(net, X, t))
    assert set(grads) == set(net.params)


def test_embed_equals_one_hot_with_block_diagonal():
    rng = np.random.default_rng(5)
    net = Network(CARD, DIMS, hidden_sizes=(7, 5), seed=2)
    X = _codes(rng, 100)
    folded = as_one_hot_network(net)
    np.testing.assert_allclose(forward(folded, X), forward(net, X), atol=1e-12)
    embs = extract_embeddings(net)
    np.testing.assert_allclose(one_hot_matrix(X, CARD) @ block_diagonal(embs),
                               embed_dataset(X, embs), atol=1e-15)
    bare = Network(CARD, DIMS, hidden_sizes=(), seed=2)
    np.testing.assert_allclose(forward(as_one_hot_network(bare), X), forward(bare, X),
                               atol=1e-12)


def test_adam_matches_hand_computation():
    params = {"w": np.array([1.0])}
    opt = Adam(lr=0.1)
    expected = [0.900000002, 0.8654394181165108, 0.8109953836811554]
    for g, want in zip([0.5, -0.2, 0.3], expected):
        params, opt = adam_step(opt, params, {"w": np.array([g])})
        assert params["w"][0] == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        opt.step(params, {"w": np.ones(2)})
    with pytest.raises(ValueError):
        opt.step(params, {"v": np.ones(1)})


def test_training_is_deterministic_and_learns():
    rng = np.random.default_rng(6)
    X = _codes(rng, 60)
    t = 0.3 + 0.1 * X[:, 0] / 4 + 0.2 * (X[:, 2] % 2)
    cfg = TrainConfig(epochs=30, batch_size=16, hidden_sizes=(32,), learning_rate=1e-2)
    a = train_arrays(cfg, CARD, DIMS, X, t, seed=7)
    b = train_arrays(cfg, CARD, DIMS, X, t, seed=7)
    for k in a.params:
        np.testing.assert_array_equal(a.params[k], b.params[k])
    assert len(a.history) == 31
    assert a.history[-1] < 0.05 * a.history[0]
    assert loss(a, X, t) < 1e-3


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(input_mode="dense")


def _toy_dataset(rng, n=80):
    schema = FeatureSchema.from_cardinalities(["store", "promo", "state"], CARD,
                                              embedding_dims=DIMS)
    X = _codes(rng, n)
    y = np.exp(5 + 0.5 * X[:, 0] / 4 + 0.3 * X[:, 2] / 3 + 0.01 * rng.normal(size=n))
    return Dataset(schema, X, y)


def test_ensemble_averages_sigmoid_outputs():
    rng = np.random.default_rng(8)
    data = _toy_dataset(rng)
    transform = TargetTransform.fit(data.y)
    ens = train_ensemble(TrainConfig(epochs=2, ensemble_size=3, hidden_sizes=(8,)),
                         data.schema, data, transform)
    assert ens.seeds == [0, 1, 2]
    scaled = np.mean([forward(n, data.X) for n in ens.networks], axis=0)
    np.testing.assert_allclose(ens.predict(data.X), transform.inverse_transform(scaled))
    mean = ens.embeddings("mean")[0].weights
    np.testing.assert_allclose(mean, np.mean([n.params["emb0"] for n in ens.networks], axis=0))
    with pytest.raises(ValueError):
        ens.embeddings("median")


def test_checkpoint_and_csv_round_trips(tmp_path):
    rng = np.random.default_rng(9)
    data = _toy_dataset(rng)
    ens = train_ensemble(TrainConfig(epochs=1, ensemble_size=2, hidden_sizes=(8,)),
                         data.schema, data, TargetTransform.fit(data.y))
    path = tmp_path / "ck.npz"
    save_checkpoint(ens, data.schema, path)
    back, schema = load_checkpoint(path)
    assert schema == data.schema
    np.testing.assert_array_equal(back.predict(data.X), ens.predict(data.X))

    embs = ens.embeddings()
    files = export_embedding_csvs(embs, data.schema, tmp_path / "emb")
    assert [f.name for f in files] == ["store.csv", "promo.csv", "state.csv"]
    again = import_embedding_csvs(tmp_path / "emb", data.schema)
    for e, f in zip(embs, again):
        np.testing.assert_array_equal(e.weights, f.weights)


def test_unseen_categories():
    rng = np.random.default_rng(10)
    net = Network(CARD, DIMS, hidden_sizes=(4,), seed=0)
    X = _codes(rng, 3)
    X[0, 0] = 5
    with pytest.raises(UnseenCategoryError):
        forward(net, X)
    lenient = Network(CARD, DIMS, hidden_sizes=(4,), params=net.params, unseen="mean")
    assert np.all(np.isfinite(forward(lenient, X)))
    embs = extract_embeddings(net)
    rows = embed_dataset(X, embs, unseen="mean")
    np.testing.assert_allclose(rows[0, :2], embs[0].weights.mean(axis=0))
    with pytest.raises(ValueError):
        extract_embeddings(Network(CARD, DIMS, hidden_sizes=(4,), input_mode="one_hot"))


def test_estimator_api():
    rng = np.random.default_rng(11)
    data = _toy_dataset(rng)
    est = EntityEmbeddingRegressor(cardinalities=CARD, embedding_dims=DIMS, hidden_sizes=(8,),
                                   epochs=2, ensemble_size=1)
    assert clone(est).get_params() == est.get_params()
    est.fit(data.X, data.y)
    pred = est.predict(data.X)
    assert pred.shape == (80,) and np.all(pred > 0)
    assert est.transform(data.X).shape == (80, sum(DIMS))
    assert isinstance(est.ensemble_, Ensemble)
