"""Datasets, parametric models, priors and data generating processes."""

from .datasets import Dataset, ecdf, load_dataset, save_dataset
from .generators import (
    generate_laplace,
    generate_normal,
    generate_exponential,
    generate_design,
    generate_contaminated_poisson,
)
from .models import (
    ParametricModel,
    UnivariateModel,
    LaplaceModel,
    NormalModel,
    ExponentialMeanModel,
    PoissonRegressionModel,
    Prior,
    FlatPrior,
    NormalPrior,
    parse_prior,
    ExponentialFamilyModel,
    ExponentialFamily,
    NormalFamily,
    FAMILIES,
)

__all__ = [
    "Dataset", "ecdf", "load_dataset", "save_dataset",
    "generate_laplace", "generate_normal", "generate_exponential", "generate_design",
    "generate_contaminated_poisson",
    "ParametricModel", "UnivariateModel", "LaplaceModel", "NormalModel", "ExponentialMeanModel",
    "PoissonRegressionModel", "Prior", "FlatPrior", "NormalPrior", "parse_prior",
    "ExponentialFamilyModel", "ExponentialFamily", "NormalFamily", "FAMILIES",
]
