"""From-scratch learners: CART forests, polynomial regression, one-vs-rest
multi-label classification, and k-fold evaluation."""

from riskgrid.learn.evaluate import (
    EvalEntry,
    EvalReport,
    LearnerSpec,
    accuracy_at_half,
    cross_validate,
    r_squared,
    subset_accuracy,
)
from riskgrid.learn.forest import RandomForest, fit_forest, predict_proba
from riskgrid.learn.linreg import (
    LinearModel,
    fit_linreg,
    monomial_exponents,
    polynomial_features,
)
from riskgrid.learn.ovr import OvRModel, fit_ovr, membership_matrix, predict_ovr
from riskgrid.learn.tree import DecisionTree, ForestParams, fit_tree

__all__ = [
    "DecisionTree",
    "EvalEntry",
    "EvalReport",
    "ForestParams",
    "LearnerSpec",
    "LinearModel",
    "OvRModel",
    "RandomForest",
    "accuracy_at_half",
    "cross_validate",
    "fit_forest",
    "fit_linreg",
    "fit_ovr",
    "fit_tree",
    "membership_matrix",
    "monomial_exponents",
    "polynomial_features",
    "predict_ovr",
    "predict_proba",
    "r_squared",
    "subset_accuracy",
]
