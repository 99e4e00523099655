"""
Multiclass linear classifier with a softmax link

Training minimizes the summed cross-entropy plus an L2 penalty on the weights
(the bias is not penalized) with L-BFGS-B, starting from zero weights, so the
fit is deterministic.
"""
import json
import logging
import struct
import zlib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from readability_wmd.domain_types import ClassProbabilities, FeatureVector
from readability_wmd.errors import ClassifierError, FeatureError, ModelFormatError, ModelVersionError
from readability_wmd.features import Scaler, feature_matrix, fit_scaler
from readability_wmd.utils import PathLike

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"RDWMDMDL"
MODEL_VERSION = 1
_HEADER = struct.Struct("<8sBI")


class Hyperparameters(BaseModel):
    """The `classifier` section of the run config"""

    l2: float = Field(1.0, ge=0.0, description="L2 regularization strength")
    max_iter: int = Field(1000, ge=1, description="Optimizer iteration cap")
    tol: float = Field(1e-8, gt=0.0, description="Projected gradient tolerance")


class ProbabilisticModel(BaseModel):
    """Trained linear model emitting a probability simplex per document"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    class_labels: List[int] = Field(..., description="Levels, easiest to hardest")
    feature_names: List[str]
    scaler: Scaler
    weights: np.ndarray = Field(..., description="K x (d + 1) matrix, bias in the last column")
    hyper: Hyperparameters = Field(default_factory=Hyperparameters)
    seed: int = 0
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def hardest_label(self) -> int:
        return self.class_labels[-1]


def _check_inputs(features: Sequence[FeatureVector]) -> np.ndarray:
    try:
        return feature_matrix(features)
    except FeatureError as exc:
        raise ClassifierError(str(exc)) from exc


def _objective(
    theta: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float, k: int
) -> Tuple[float, np.ndarray]:
    n, d = x.shape
    w = theta.reshape(k, d + 1)
    scores = x @ w[:, :d].T + w[:, d]
    log_norm = logsumexp(scores, axis=1)
    loss = float(np.sum(log_norm - scores[np.arange(n), y]))
    loss += 0.5 * l2 * float(np.sum(w[:, :d] ** 2))

    probs = np.exp(scores - log_norm[:, None])
    probs[np.arange(n), y] -= 1.0
    grad = np.empty_like(w)
    grad[:, :d] = probs.T @ x + l2 * w[:, :d]
    grad[:, d] = probs.sum(axis=0)
    return loss, grad.ravel()


def train(
    features: Sequence[FeatureVector],
    labels: Sequence[int],
    hyper: Hyperparameters = Hyperparameters(),
    seed: int = 0,
    class_labels: Optional[Sequence[int]] = None,
) -> ProbabilisticModel:
    """
    Train the softmax classifier

    Args:
        features (Sequence[FeatureVector]): Raw feature vectors, standardized internally
        labels (Sequence[int]): Gold level per vector
        hyper (Hyperparameters): Regularization and stopping settings
        seed (int): Recorded in model metadata; the fit itself starts from zeros
        class_labels (Optional[Sequence[int]]): Full level scale; defaults to the
            sorted distinct labels

    Returns:
        ProbabilisticModel: Trained model

    Raises:
        ClassifierError: fewer than 2 classes, non-finite values, length mismatch
    """
    if len(features) != len(labels):
        raise ClassifierError(f"{len(features)} feature vectors but {len(labels)} labels")
    raw = _check_inputs(features)
    if not np.all(np.isfinite(raw)):
        raise ClassifierError("non-finite feature values")
    present = sorted(set(labels))
    if len(present) < 2:
        raise ClassifierError(f"training needs at least 2 classes, got {present}")
    classes = sorted(class_labels) if class_labels is not None else present
    unknown = set(present) - set(classes)
    if unknown:
        raise ClassifierError(f"labels {sorted(unknown)} outside class labels {classes}")

    scaler = fit_scaler(features)
    x = scaler.transform_matrix(raw)
    y = np.array([classes.index(label) for label in labels], dtype=np.int64)
    k, d = len(classes), x.shape[1]

    result = minimize(
        _objective,
        np.zeros(k * (d + 1)),
        args=(x, y, hyper.l2, k),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": hyper.max_iter, "gtol": hyper.tol},
    )
    if not result.success:
        logger.warning(f"Classifier training stopped before convergence: {result.message}")
    weights = result.x.reshape(k, d + 1)
    train_accuracy = float(np.mean(np.argmax(x @ weights[:, :d].T + weights[:, d], axis=1) == y))
    logger.info(f"Trained {k}-class model on {len(y)} documents, training accuracy {train_accuracy:.3f}")

    return ProbabilisticModel(
        class_labels=list(classes),
        feature_names=list(features[0].names),
        scaler=scaler,
        weights=weights,
        hyper=hyper,
        seed=seed,
        metadata={
            "iterations": int(result.nit),
            "converged": bool(result.success),
            "train_accuracy": train_accuracy,
            "n_train": len(y),
        },
    )


def _check_arity(model: ProbabilisticModel, fv: FeatureVector) -> None:
    if len(fv.values) != len(model.feature_names):
        raise ClassifierError(
            f"arity mismatch: {len(fv.values)} features, model expects {len(model.feature_names)}"
        )
    if fv.names != model.feature_names:
        raise ClassifierError(f"feature order of {fv.doc_id!r} differs from the model's")


def predict_proba_matrix(model: ProbabilisticModel, raw: np.ndarray) -> np.ndarray:
    """Class probabilities for each row of a raw feature matrix"""
    d = len(model.feature_names)
    x = model.scaler.transform_matrix(np.atleast_2d(raw))
    scores = x @ model.weights[:, :d].T + model.weights[:, d]
    return softmax(scores, axis=1)


def predict_proba(model: ProbabilisticModel, fv: FeatureVector) -> ClassProbabilities:
    """
    Probability simplex over the model's classes

    Args:
        model (ProbabilisticModel): Trained model
        fv (FeatureVector): Raw features in model order

    Returns:
        ClassProbabilities: Aligned with model.class_labels
    """
    _check_arity(model, fv)
    probs = predict_proba_matrix(model, np.asarray(fv.values, dtype=np.float64))[0]
    return ClassProbabilities(probs=probs.tolist(), labels=list(model.class_labels), doc_id=fv.doc_id)


def argmax_level(probs: ClassProbabilities) -> int:
    """Most probable level; ties go to the easier class"""
    best = max(probs.probs)
    return probs.labels[probs.probs.index(best)]


def predict(model: ProbabilisticModel, fv: FeatureVector) -> int:
    """Argmax of predict_proba, ties broken toward the easier class"""
    return argmax_level(predict_proba(model, fv))


def _model_header(model: ProbabilisticModel) -> Dict[str, Any]:
    return {
        "class_labels": model.class_labels,
        "feature_names": model.feature_names,
        "scaler_names": model.scaler.names,
        "hyper": model.hyper.model_dump(),
        "seed": model.seed,
        "metadata": model.metadata,
        "weights_shape": list(model.weights.shape),
    }


def save_model(model: ProbabilisticModel, path: PathLike) -> None:
    """
    Write the model container

    Layout: magic, version byte, header length, canonical JSON header, float64
    little-endian payload (scaler means, scaler stddevs, weights), CRC32 of
    everything before it.
    """
    header = json.dumps(_model_header(model), sort_keys=True).encode("utf-8")
    payload = b"".join(
        np.asarray(array, dtype="<f8").tobytes()
        for array in (model.scaler.means, model.scaler.stddevs, model.weights)
    )
    body = _HEADER.pack(MODEL_MAGIC, MODEL_VERSION, len(header)) + header + payload
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def load_model(path: PathLike) -> ProbabilisticModel:
    """
    Read a model container written by save_model

    Raises:
        ModelVersionError: unsupported format version
        ModelFormatError: bad magic, truncation or checksum mismatch
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 4:
        raise ModelFormatError(f"{path}: file too short to be a model")
    magic, version, header_len = _HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    if version != MODEL_VERSION:
        raise ModelVersionError(f"{path}: format version {version}, expected {MODEL_VERSION}")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise ModelFormatError(f"{path}: checksum mismatch (corrupt or truncated file)")

    try:
        header = json.loads(body[_HEADER.size : _HEADER.size + header_len].decode("utf-8"))
        k, cols = header["weights_shape"]
        d = len(header["feature_names"])
        payload = np.frombuffer(body[_HEADER.size + header_len :], dtype="<f8")
        if payload.size != 2 * d + k * cols:
            raise ModelFormatError(f"{path}: payload size does not match header")
        scaler = Scaler(
            names=header["scaler_names"],
            means=payload[:d].tolist(),
            stddevs=payload[d : 2 * d].tolist(),
        )
        return ProbabilisticModel(
            class_labels=header["class_labels"],
            feature_names=header["feature_names"],
            scaler=scaler,
            weights=payload[2 * d :].reshape(k, cols).astype(np.float64),
            hyper=Hyperparameters(**header["hyper"]),
            seed=header["seed"],
            metadata=header["metadata"],
        )
    except (KeyError, ValueError, UnicodeDecodeError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: unreadable header ({exc})") from exc
