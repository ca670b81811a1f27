import json

import numpy as np
import pytest

from catembed.cli import ConfigError, _coerce, benchmark_config, load_config, main
from catembed.tabular import load_dataset

CONFIG = """
[synthetic]
n_stores = 15
n_rows = 1500
floor_draws = 10000

[benchmark]
sparsify = none
methods = knn,random_forest
rf_trees = 2
rf_max_depth = 5

[nn]
epochs = 1
ensemble_size = 1
hidden_sizes = 8,4

[native]
knn = integer

[analysis]
metric_complement = 20
scatter_pairs = 30
svg = no
"""


@pytest.fixture
def ini(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(CONFIG)
    return str(path)


def test_coerce():
    from typing import Optional
    assert _coerce("none", Optional[int], "x") is None
    assert _coerce("7", Optional[int], "x") == 7
    assert _coerce("1, 2", tuple[int, ...], "x") == (1, 2)
    assert _coerce("off", bool, "x") is False
    with pytest.raises(ConfigError):
        _coerce("maybe", bool, "x")
    with pytest.raises(ConfigError):
        _coerce("abc", float, "x")


def test_config_sections(ini):
    cfg = benchmark_config(load_config(ini), seed=4)
    assert cfg.methods == ("knn", "random_forest")
    assert cfg.sparsify is None and cfg.seed == 4
    assert cfg.nn.hidden_sizes == (8, 4)
    assert cfg.native["knn"] == "integer" and cfg.native["nn"] == "one_hot"


def test_pipeline(ini, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["synth", "--config", ini, "--out-dir", str(out), "--format", "csv"]) == 0
    assert json.loads((out / "truth.json").read_text())["config"]["n_stores"] == 15
    csv_path = str(out / "dataset.csv")
    assert main(["ingest", "--config", ini, "--data", csv_path, "--out-dir", str(out)]) == 0
    data = load_dataset(out / "dataset.npz")
    assert len(data) == 1500
    npz = str(out / "dataset.npz")

    assert main(["train", "--config", ini, "--data", npz, "--out-dir", str(out)]) == 0
    ck = str(out / "checkpoint.npz")
    assert main(["benchmark", "--config", ini, "--data", npz, "--out-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert [r["method"] for r in report["results"]] == ["knn"] * 2 + ["random_forest"] * 2
    assert report["results"][0]["extra"]["representation"] == "integer"

    ana = tmp_path / "ana"
    assert main(["analyze", "--config", ini, "--data", npz, "--checkpoint", ck,
                 "--out-dir", str(ana), "--flags", "scatter", "cross-corr"]) == 0
    assert sorted(p.name for p in ana.iterdir()) == ["cross_correlation.csv",
                                                     "scatter_store.csv", "summary.json"]
    emb = tmp_path / "emb"
    assert main(["export-embeddings", "--checkpoint", ck, "--out-dir", str(emb),
                 "--source", "mean"]) == 0
    assert (emb / "manifest.csv").exists() and len(list(emb.glob("*.csv"))) == 8
    assert "knn" in capsys.readouterr().out


def test_seed_override_changes_data(ini, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["synth", "--config", ini, "--out-dir", str(a)]) == 0
    assert main(["synth", "--config", ini, "--out-dir", str(b), "--seed", "9"]) == 0
    assert not np.array_equal(load_dataset(a / "dataset.npz").y,
                              load_dataset(b / "dataset.npz").y)


def test_errors_return_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[benchmark]\nno_such_key = 1\n")
    assert main(["benchmark", "--config", str(bad), "--data", "x.npz"]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["benchmark", "--out-dir", str(tmp_path)]) == 2
    assert main(["ingest", "--data", str(tmp_path / "missing.csv"),
                 "--out-dir", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        main(["analyze", "--flags", "umap", "--checkpoint", "c.npz"])
