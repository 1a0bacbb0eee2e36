"""Scikit-learn estimator facade over the sparse parity recovery pipeline."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import recovery
from .fourier import Restriction, enumerate_parities
from .validation import check_encodings, check_values


class SparseFourierRegressor(BaseEstimator, RegressorMixin):
    """Sparse low-degree parity regression on {-1, +1} design points.

    fit solves argmin_x ||y - A x||^2 + lam * ||x||_1 over the parity
    dictionary of degree <= degree built from the training encodings, then
    keeps the `sparsity` absolutely largest coefficients as the model.

    Parameters
    ----------
    degree : maximum parity degree of the dictionary.
    sparsity : number of recovered terms kept after the solve.
    lam : L1 penalty of the unnormalized lasso objective.
    tol, max_iter : coordinate-descent stopping controls.

    Attributes
    ----------
    expansion_ : the fitted sparse expansion.
    solution_ : full lasso solution with solver diagnostics.
    parities_ : dictionary column order used for the solve.
    n_features_in_ : encoding dimension seen during fit.
    """

    def __init__(self, degree=2, sparsity=10, lam=1.0, tol=1e-8, max_iter=10000):
        self.degree = degree
        self.sparsity = sparsity
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X = check_encodings(X)
        y = check_values(y, expected=X.shape[0])
        n = X.shape[1]
        if not 0 <= self.degree <= n:
            raise ValueError(f"degree must lie in [0, {n}], got {self.degree}")
        if self.sparsity < 1:
            raise ValueError("sparsity must be at least 1")
        self.parities_ = enumerate_parities(n, self.degree)
        matrix = recovery.build_sampling_matrix(X, self.parities_)
        self.solution_ = recovery.lasso_solve(matrix, y, self.lam, self.tol, self.max_iter)
        self.expansion_ = recovery.truncate_top_s(self.solution_, self.parities_, self.sparsity, n)
        self.n_features_in_ = n
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "expansion_")
        X = check_encodings(X, n=self.n_features_in_)
        return self.expansion_.evaluate_batch(X)

    def minimize(self) -> tuple[Restriction, float]:
        """Minimizing assignment of the fitted surrogate over its support variables."""
        check_is_fitted(self, "expansion_")
        return recovery.minimize_over_support(self.expansion_)
