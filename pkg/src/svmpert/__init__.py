"""Closed-form adversarial perturbations for linear SVMs.

Generates sample (sAP), class-universal (cuAP) and universal (uAP)
perturbations against binary and Crammer-Singer multiclass linear models,
with independent numeric oracles and fooling-rate analysis tools.
"""

from svmpert.models import (
    BinaryLinearModel,
    MulticlassLinearModel,
    Dataset,
    ClassProportions,
    predict_binary,
    predict_multi,
    margin_binary,
    pair_boundary_distance,
)
from svmpert.perturb import (
    Perturbation,
    sap_binary,
    cuap_binary,
    uap_binary,
    nearest_boundary_index,
    sap_multi,
    cuap_multi,
    uap_multi,
    polar_cone_member,
)

__version__ = "0.1.0"
