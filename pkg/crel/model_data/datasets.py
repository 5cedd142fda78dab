"""
Dataset container, CSV loading and the empirical CDF.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from crel.core.exceptions import SchemaError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    n x p observations, optionally carrying a GLM response and design.

    GLM datasets keep ``obs`` as the column stack [y, x1..xd] so every
    estimating function sees one row per observation.
    """
    obs: np.ndarray
    response: Optional[np.ndarray] = None
    design: Optional[np.ndarray] = None

    def __post_init__(self):
        obs = np.array(self.obs, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.ndim != 2 or obs.shape[0] == 0:
            raise SchemaError("obs must be a non-empty n x p matrix", {"shape": list(obs.shape)})
        if not np.all(np.isfinite(obs)):
            raise SchemaError("obs contains non-finite entries")
        if (self.response is None) != (self.design is None):
            raise SchemaError("response and design must be given together")
        obs.setflags(write=False)
        object.__setattr__(self, "obs", obs)
        if self.response is not None:
            y = np.array(self.response, dtype=float).ravel()
            X = np.array(self.design, dtype=float)
            if X.ndim == 1:
                X = X[:, None]
            if y.shape[0] != obs.shape[0] or X.shape[0] != obs.shape[0]:
                raise SchemaError("response/design length does not match obs")
            if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
                raise SchemaError("response/design contain non-finite entries")
            y.setflags(write=False)
            X.setflags(write=False)
            object.__setattr__(self, "response", y)
            object.__setattr__(self, "design", X)

    @classmethod
    def from_glm(cls, response, design) -> "Dataset":
        y = np.asarray(response, dtype=float).ravel()
        X = np.asarray(design, dtype=float)
        return cls(obs=np.column_stack([y, X]), response=y, design=X)

    @property
    def n(self) -> int:
        return self.obs.shape[0]

    @property
    def p(self) -> int:
        return self.obs.shape[1]

    @property
    def is_glm(self) -> bool:
        return self.response is not None

    def univariate(self) -> np.ndarray:
        """The single observation column; SchemaError for multivariate data."""
        if self.p != 1:
            raise SchemaError("univariate data required", {"columns": self.p})
        return self.obs[:, 0]

    def take(self, index) -> "Dataset":
        """Row subset or permutation."""
        index = np.asarray(index)
        if self.is_glm:
            return Dataset(obs=self.obs[index], response=self.response[index],
                           design=self.design[index])
        return Dataset(obs=self.obs[index])


def ecdf(data: Dataset, t: float) -> float:
    """F_n(t) = #{x_i <= t} / n, right-continuous."""
    x = data.univariate()
    return float(np.count_nonzero(x <= t)) / x.size


def load_dataset(path: Union[str, Path]) -> Dataset:
    """
    Load a CSV file with a header row.

    Files with a ``y`` column plus ``x1..xd`` columns become GLM datasets;
    anything else is read as an n x p observation matrix.

    Args:
        path: CSV file path

    Returns:
        Dataset

    Raises:
        SchemaError: If the file cannot be parsed or holds non-numeric values
    """
    try:
        frame = pd.read_csv(path)
    except Exception as e:
        raise SchemaError(f"Cannot read dataset: {str(e)}", {"path": str(path)})
    if frame.empty:
        raise SchemaError("Dataset file has no rows", {"path": str(path)})
    try:
        frame = frame.apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as e:
        raise SchemaError(f"Non-numeric value in dataset: {str(e)}", {"path": str(path)})

    x_cols = sorted((c for c in frame.columns if str(c).startswith("x") and str(c)[1:].isdigit()),
                    key=lambda c: int(str(c)[1:]))
    if "y" in frame.columns and x_cols:
        logger.debug(f"Loaded GLM dataset {path}: n={len(frame)}, d={len(x_cols)}")
        return Dataset.from_glm(frame["y"].to_numpy(), frame[x_cols].to_numpy())
    logger.debug(f"Loaded dataset {path}: n={len(frame)}, p={frame.shape[1]}")
    return Dataset(obs=frame.to_numpy(dtype=float))


def save_dataset(data: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset in the format ``load_dataset`` reads."""
    if data.is_glm:
        frame = pd.DataFrame(data.design, columns=[f"x{j + 1}" for j in range(data.design.shape[1])])
        frame.insert(0, "y", data.response)
    else:
        names = ["x"] if data.p == 1 else [f"v{j + 1}" for j in range(data.p)]
        frame = pd.DataFrame(data.obs, columns=names)
    frame.to_csv(path, index=False)
