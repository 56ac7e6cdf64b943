"""CSV ingestion with standardization, and lossless JSON model persistence.

Features are standardized with the sample standard deviation (divisor
``n - 1``). Reals in model files are written with Python's shortest
round-trip ``repr``, so loading reproduces every float bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .dataset import Dataset
from .errors import LabelError, ParseError, SchemaError, ShapeError
from .kernel import KernelSpec
from .loss import Task
from .solver import FitConfig, FittedModel

SCHEMA_VERSION = 1
FORMAT_NAME = "rkhsel-model"


def _parse_float(cell: str, row: int, col: int, path) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"{path}: row {row}, column {col}: not a number: {cell!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"{path}: row {row}, column {col}: non-finite value {cell!r}")
    return value


def read_matrix(path) -> Tuple[List[str], np.ndarray]:
    """Read a numeric CSV with a header row.

    Row numbers in error messages count the header as row 1; columns are
    1-based.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = []
    for r, cells in enumerate(rows[1:], start=2):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        if len(cells) != len(header):
            raise ParseError(f"{path}: row {r}: expected {len(header)} columns, got {len(cells)}")
        body.append([_parse_float(c.strip(), r, j + 1, path) for j, c in enumerate(cells)])
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return header, data


def _read_labels(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    for r, cells in enumerate(rows, start=1):
        if len(cells) != 1:
            raise ParseError(f"{path}: row {r}: expected one column, got {len(cells)}")
    start = 0
    try:
        float(rows[0][0])
    except ValueError:
        start = 1  # header
    return np.array([_parse_float(rows[i][0].strip(), i + 1, 1, path)
                     for i in range(start, len(rows))])


def standardize(raw: np.ndarray, names: Optional[List[str]] = None):
    """Center each column and divide by its sample standard deviation.

    Constant columns keep scale 1 and trigger a warning.
    """
    raw = np.asarray(raw, dtype=float)
    mean = raw.mean(axis=0)
    scale = raw.std(axis=0, ddof=1) if raw.shape[0] > 1 else np.zeros(raw.shape[1])
    constant = ~(scale > 0)
    if np.any(constant):
        which = np.flatnonzero(constant)
        labels = [names[m] for m in which] if names else [str(m) for m in which]
        warnings.warn(f"constant feature columns left unscaled: {', '.join(labels)}",
                      RuntimeWarning, stacklevel=2)
        scale = np.where(constant, 1.0, scale)
    return (raw - mean) / scale, mean, scale


def read_dataset(features_path, labels_path, task, standardize_features: bool = True) -> Dataset:
    """Load a features CSV (with header) and a one-column labels CSV.

    Classification labels may be given as ``{-1, +1}`` or ``{0, 1}``; zeros
    are mapped to ``-1``.
    """
    task = Task.parse(task)
    names, raw = read_matrix(features_path)
    y = _read_labels(labels_path)
    if raw.shape[0] != y.shape[0]:
        raise ShapeError(f"features have {raw.shape[0]} rows but labels have {y.shape[0]}")
    if task is Task.CLASSIFICATION:
        values = set(np.unique(y).tolist())
        if values <= {-1.0, 1.0}:
            pass
        elif values <= {0.0, 1.0}:
            y = np.where(y == 0.0, -1.0, 1.0)
        else:
            raise LabelError(f"classification labels must be in {{-1, 1}} or {{0, 1}}, "
                             f"got {sorted(values)[:5]}")
    if standardize_features:
        X, mean, scale = standardize(raw, names)
    else:
        X, mean, scale = raw, np.zeros(raw.shape[1]), np.ones(raw.shape[1])
    return Dataset(X, y, task, names, mean, scale)


def write_matrix(path, X: np.ndarray, header: List[str]) -> None:
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def write_dataset(features_path, labels_path, data: Dataset) -> None:
    write_matrix(features_path, data.X, data.feature_names)
    write_matrix(labels_path, data.y.reshape(-1, 1), ["y"])


def _floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).reshape(-1)]


def model_to_dict(model: FittedModel) -> dict:
    cfg = model.config
    return {
        "format": FORMAT_NAME,
        "version": SCHEMA_VERSION,
        "task": model.task.value,
        "sigma": float(model.spec.sigma),
        "bound": float(model.spec.bound),
        "lambda": _floats(model.spec.lam),
        "alpha": _floats(model.alpha),
        "train_X": [_floats(r) for r in model.train_X],
        "y_center": float(model.y_center),
        "weights": _floats(model.weights),
        "feature_names": list(model.feature_names),
        "mean": _floats(model.mean) if model.mean is not None else None,
        "scale": _floats(model.scale) if model.scale is not None else None,
        "trace": _floats(model.trace),
        "converged": bool(model.converged),
        "n_iter": int(model.n_iter),
        "exp_clamped": bool(model.exp_clamped),
        "config": {
            "gamma1": float(cfg.gamma1),
            "gamma2": float(cfg.gamma2),
            "bound": float(cfg.bound),
            "cut_obj": float(cfg.cut_obj),
            "cut_lambda": float(cfg.cut_lambda),
            "max_outer": int(cfg.max_outer),
            "newton_backtracks": int(cfg.newton_backtracks),
            "select_threshold": float(cfg.select_threshold),
            "coord_tol": float(cfg.coord_tol),
            "polish": bool(cfg.polish),
            "bandwidth": cfg.bandwidth,
        },
    }


def model_from_dict(doc: dict) -> FittedModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise SchemaError("not a model file")
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported model schema version {doc.get('version')!r}; "
                          f"expected {SCHEMA_VERSION}")
    try:
        config = FitConfig(**doc["config"])
        spec = KernelSpec(np.array(doc["lambda"], dtype=float), doc["sigma"], doc["bound"])
        p = spec.p
        train_X = np.array(doc["train_X"], dtype=float).reshape(-1, p)
        alpha = np.array(doc["alpha"], dtype=float)
        if alpha.shape[0] != train_X.shape[0]:
            raise SchemaError("alpha length does not match training rows")
        return FittedModel(
            spec=spec,
            alpha=alpha,
            train_X=train_X,
            task=Task.parse(doc["task"]),
            y_center=float(doc["y_center"]),
            weights=np.array(doc["weights"], dtype=float),
            trace=[float(v) for v in doc["trace"]],
            config=config,
            converged=bool(doc["converged"]),
            n_iter=int(doc["n_iter"]),
            exp_clamped=bool(doc["exp_clamped"]),
            feature_names=list(doc["feature_names"]),
            mean=None if doc["mean"] is None else np.array(doc["mean"], dtype=float),
            scale=None if doc["scale"] is None else np.array(doc["scale"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed model document: {exc}") from exc


def save_model(model: FittedModel, path, extra: Optional[dict] = None) -> None:
    """Write ``model`` as versioned JSON; ``extra`` is stored under ``"extra"``."""
    doc = model_to_dict(model)
    if extra is not None:
        doc["extra"] = extra
    text = json.dumps(doc, allow_nan=False)
    Path(path).write_text(text + "\n")


def load_model(path) -> FittedModel:
    """Read a model written by :func:`save_model`."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    return model_from_dict(doc)
