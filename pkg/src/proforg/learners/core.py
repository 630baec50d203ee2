"""One fit/predict surface over forests, boosted trees and MLPs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .mlp import MLPModel, Network, fit_mlp, mse_gradient
from .trees import BoostedModel, ForestModel, TreeEnsemble, fit_boosted, fit_forest

KINDS = ("forest", "gbt", "mlp")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RegressorSpec:
    kind: str = "forest"
    # forest
    n_trees: int = 100
    max_depth: int = 0  # 0 = unlimited
    min_leaf: int = 1
    bootstrap: bool = True
    # gbt
    n_rounds: int = 100
    learning_rate: float = 0.1
    gbt_max_depth: int = 3
    # mlp
    hidden_layers: tuple = (128, 128)
    step_size: float = 1e-3
    momentum: float = 0.9
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown regressor kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        for name in ("n_trees", "min_leaf", "n_rounds", "gbt_max_depth", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 (0 means unlimited)")
        if not self.hidden_layers or min(self.hidden_layers) < 1:
            raise ValueError("hidden_layers must list positive widths")
        if not 0 < self.learning_rate <= 1:
            raise ValueError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if not 0 < self.step_size <= 1:
            raise ValueError(f"step_size must lie in (0, 1], got {self.step_size}")

    def with_seed(self, seed: int) -> "RegressorSpec":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {X.shape}")
        if len(y) == 0:
            raise ValueError("empty dataset")
        if len(X) != len(y):
            raise ValueError(f"{len(X)} feature rows but {len(y)} targets")
        if not np.all(np.isfinite(y)):
            raise ValueError("targets must be finite")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_rows(cls, rows) -> "Dataset":
        rows = list(rows)
        if not rows:
            raise ValueError("empty dataset")
        return cls(np.stack([np.asarray(x, dtype=np.float64) for x, _ in rows]),
                   np.asarray([t for _, t in rows], dtype=np.float64))


@dataclass(frozen=True)
class TrainedRegressor:
    spec: RegressorSpec
    model: object = field(repr=False)
    n_train: int
    dim: int

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise ValueError(f"model expects {self.dim} features, got {X.shape[1]}")
        return self.model.predict(X)


def fit(spec: RegressorSpec, data: Dataset) -> TrainedRegressor:
    if not isinstance(data, Dataset):
        data = Dataset(*data)
    if spec.kind == "forest":
        model = fit_forest(data.X, data.y, spec.n_trees, spec.max_depth, spec.min_leaf,
                           spec.bootstrap, spec.seed)
    elif spec.kind == "gbt":
        model = fit_boosted(data.X, data.y, spec.n_rounds, spec.learning_rate,
                            spec.gbt_max_depth, spec.min_leaf)
    else:
        model = fit_mlp(data.X, data.y, spec.hidden_layers, spec.step_size, spec.momentum,
                        spec.epochs, spec.batch_size, spec.seed)
    return TrainedRegressor(spec, model, len(data), data.dim)


def refit_all(spec: RegressorSpec, full_history: Dataset) -> TrainedRegressor:
    """Retrain from scratch on everything seen so far; online updates are full refits."""
    return fit(spec, full_history)


def predict(model: TrainedRegressor, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes a single feature vector; use model.predict for batches")
    return float(model.predict(x)[0])


def mlp_gradient(model, X, y) -> np.ndarray:
    """Analytic gradient of the batch mean squared error w.r.t. all MLP parameters."""
    net = model
    if isinstance(model, TrainedRegressor):
        net = model.model
    if isinstance(net, MLPModel):
        net = net.net
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.sizes[0]:
        raise ValueError(f"batch must have shape (n, {net.sizes[0]})")
    return mse_gradient(net, X, np.asarray(y, dtype=np.float64))[1]


def save_model(path, model: TrainedRegressor) -> None:
    arrays = {}
    inner = model.model
    if isinstance(inner, (ForestModel, BoostedModel)):
        for name, arr in inner.trees.arrays().items():
            arrays[f"trees_{name}"] = arr
        if isinstance(inner, BoostedModel):
            arrays["base"] = np.asarray(inner.base)
    else:
        for k, p in enumerate(inner.net.params()):
            arrays[f"param_{k}"] = p
    spec = asdict(model.spec)
    meta = {"format_version": FORMAT_VERSION, "spec": spec, "n_train": model.n_train,
            "dim": model.dim}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.asarray(json.dumps(meta, sort_keys=True)), **arrays)


def load_model(path) -> TrainedRegressor:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {meta.get('format_version')}")
        spec = RegressorSpec(**meta["spec"])
        if spec.kind in ("forest", "gbt"):
            trees = TreeEnsemble(*(z[f"trees_{name}"] for name in
                                   ("roots", "feature", "threshold", "left", "right", "value")))
            model = (ForestModel(trees) if spec.kind == "forest"
                     else BoostedModel(float(z["base"]), trees))
        else:
            n_params = 2 * (len(spec.hidden_layers) + 1)
            params = [z[f"param_{k}"] for k in range(n_params)]
            model = MLPModel(Network(params[0::2], params[1::2]))
    return TrainedRegressor(spec, model, meta["n_train"], meta["dim"])
