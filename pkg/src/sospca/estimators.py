"""scikit-learn style wrappers.

Inputs follow the scikit-learn layout ``(n_samples, n_features)``; internally
the package stores data as ``features x samples`` so arrays are transposed.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .certificate import CertificateParams, build_exact_moment
from .datagen import DataMatrix, empirical_covariance, normalize_rows
from .exceptions import DegenerateRowError, ParameterError
from .experiments import brute_force_kmax, diagonal_thresholding
from .verifier import detect, verify


def _validate_samples(X, min_samples: int = 1, min_features: int = 2) -> np.ndarray:
    return check_array(X, dtype=np.float64, ensure_min_samples=min_samples, ensure_min_features=min_features)


def _validate_k(k, p: int) -> int:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= p:
        raise ParameterError(f"k must be an integer in [1, {p}], got {k!r}")
    return int(k)


class RowNormalizer(TransformerMixin, BaseEstimator):
    """Rescale every feature (column) to squared norm ``n_samples``."""

    def fit(self, X, y=None):
        X = _validate_samples(X, min_features=1)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _validate_samples(X, min_features=1)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return normalize_rows(DataMatrix(X.T)).X.T.copy()


class DiagonalThresholding(SelectorMixin, BaseEstimator):
    """Keep the k features with the largest empirical variance."""

    def __init__(self, k: int = 3):
        self.k = k

    def fit(self, X, y=None):
        X = _validate_samples(X, min_features=1)
        self.n_features_in_ = X.shape[1]
        k = _validate_k(self.k, X.shape[1])
        self.support_ = diagonal_thresholding(X.T, k)
        self.variances_ = (X * X).mean(axis=0)
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.support_] = True
        return mask


class SoS4Certifier(BaseEstimator):
    """Build and verify the degree-4 certificate for a data set.

    ``fit`` row-normalizes the features, constructs the certificate and runs the
    feasibility checks.  ``predict`` returns the detector label (``"Hv"`` or
    ``"H0"``) for the fitted data, which requires a feasible certificate.
    """

    def __init__(self, k: int = 3, gamma: float = 1.0, lam: float = 1.0, psd_mode: str = "auto",
                 tol: float = 1e-8, normalize: bool = True):
        self.k = k
        self.gamma = gamma
        self.lam = lam
        self.psd_mode = psd_mode
        self.tol = tol
        self.normalize = normalize

    def fit(self, X, y=None):
        X = _validate_samples(X, min_features=3)
        self.n_features_in_ = X.shape[1]
        k = _validate_k(self.k, X.shape[1])
        data = DataMatrix(X.T)
        if self.normalize:
            data = normalize_rows(data)
        elif not np.allclose(np.einsum("ij,ij->i", data.X, data.X), data.n, rtol=1e-12):
            raise DegenerateRowError("features must have squared norm n_samples when normalize=False")
        else:
            data = DataMatrix(data.X, True)
        self.certificate_ = build_exact_moment(data, CertificateParams(k, self.gamma))
        self.sigma_hat_ = empirical_covariance(data)
        self.report_ = verify(self.certificate_, self.sigma_hat_, k, psd_mode=self.psd_mode, tol=self.tol, X=data.X)
        self.objective_ = self.report_.objective
        self.feasible_ = self.report_.feasible
        return self

    def score(self, X=None, y=None) -> float:
        """Objective value of the fitted certificate."""
        check_is_fitted(self, "report_")
        return self.objective_

    def predict(self, X=None) -> str:
        check_is_fitted(self, "report_")
        return detect(self.report_, self.k, self.lam)


class BruteForceSparsePCA(BaseEstimator):
    """Exhaustive k-sparse top eigenvector of the empirical covariance (small problems only)."""

    def __init__(self, k: int = 3, discrete: bool = False):
        self.k = k
        self.discrete = discrete

    def fit(self, X, y=None):
        X = _validate_samples(X, min_features=1)
        self.n_features_in_ = X.shape[1]
        k = _validate_k(self.k, X.shape[1])
        sigma = X.T @ X / X.shape[0]
        res = brute_force_kmax(sigma, k, self.discrete)
        self.value_ = res.value
        self.support_ = np.array(res.support)
        sub = sigma[np.ix_(self.support_, self.support_)]
        comp = np.zeros(X.shape[1])
        if self.discrete:
            comp[self.support_] = np.array(res.signs) / np.sqrt(k)
        else:
            w, V = np.linalg.eigh(sub)
            comp[self.support_] = V[:, -1]
        self.components_ = comp[None, :]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = _validate_samples(X, min_features=1)
        return X @ self.components_.T
