"""
Request helpers shared by the routers.
"""

from typing import List, Tuple

import numpy as np

from crel.core.exceptions import SchemaError
from crel.core.models import PsiSpec
from crel.estimating.functions import EstimatingFunction
from crel.estimating.registry import psi_from_name
from crel.model_data.datasets import Dataset


def resolve(rows: List[List[float]], spec: PsiSpec) -> Tuple[Dataset, EstimatingFunction]:
    """
    Dataset and bound estimating function for a request body.

    GLM estimating functions read the first column as the response and the
    remaining columns as the design.
    """
    psi = psi_from_name(spec.name, spec.tuning)
    obs = np.asarray(rows, dtype=float)
    if psi.requires_glm:
        if obs.ndim != 2 or obs.shape[1] < 2:
            raise SchemaError("GLM data rows are [y, x1, ..., xd]")
        data = Dataset.from_glm(obs[:, 0], obs[:, 1:])
    else:
        data = Dataset(obs=obs)
    return data, psi.bind(data)
