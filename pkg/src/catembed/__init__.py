"""Entity embeddings for categorical tabular data, with tree, KNN and geometry tooling."""

__version__ = "0.1.0"

from .tabular import (Dataset, EvalReport, FeatureSchema, FeatureSpec, TargetTransform,
                      ingest_csv, load_dataset, mape, save_dataset, sparsify, split)
from .net import (Ensemble, EntityEmbeddingRegressor, Network, TrainConfig, train,
                  train_ensemble)
from .trees import CARTRegressor, GBTRegressor, RandomForestRegressor
from .knn import KNNRegressor
from .numerics import PCA, jacobi_eigh, pca
from .harness import (BenchmarkConfig, SyntheticConfig, generate_synthetic, run_analysis,
                      run_benchmark)

__all__ = [
    "Dataset", "EvalReport", "FeatureSchema", "FeatureSpec", "TargetTransform",
    "ingest_csv", "load_dataset", "mape", "save_dataset", "sparsify", "split",
    "Ensemble", "EntityEmbeddingRegressor", "Network", "TrainConfig", "train",
    "train_ensemble", "CARTRegressor", "GBTRegressor", "RandomForestRegressor",
    "KNNRegressor", "PCA", "jacobi_eigh", "pca", "BenchmarkConfig", "SyntheticConfig",
    "generate_synthetic", "run_analysis", "run_benchmark",
]
