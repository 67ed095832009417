"""scikit-learn compatible front ends.

:class:`MatrixFactorization` wraps :func:`gauge_lab.factorization.solve` as a
transformer in the style of ``sklearn.decomposition.NMF``;
:class:`ExactNeighbors` mirrors the ``kneighbors`` API of
``sklearn.neighbors.NearestNeighbors`` with the id tie-break used throughout
this package.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .factorization import FactorizationProblem, SolverConfig, objective, solve
from .ranking import METRICS, distances


class MatrixFactorization(TransformerMixin, BaseEstimator):
    """Low-rank factorization ``X ~ W H^T`` with optional unit-norm item rows.

    Parameters
    ----------
    n_components : int, default=2
        Rank ``k``.
    lam : float, default=0.0
        Weight of the ``||W H^T||_F^2`` penalty.
    mode : {"unconstrained", "sphere_retraction", "sphere_loss_normalized"}
        How (and whether) the item factors are kept on the unit sphere.
    max_iter, step_size, tol_grad, tol_obj
        Passed to :class:`~gauge_lab.factorization.SolverConfig`.
    random_state : int, default=0
        Seed of the initialization.

    Attributes
    ----------
    user_factors_ : ndarray, shape (n_samples, n_components)
        ``W`` for the training matrix.
    item_factors_ : ndarray, shape (n_features, n_components)
        ``H``; its rows are unit-norm in the sphere modes.
    components_ : ndarray, shape (n_components, n_features)
        ``H^T``, for parity with scikit-learn decompositions.
    objective_ : float
    n_iter_ : int
    converged_ : bool
    solution_ : FactorizationSolution
    """

    def __init__(
        self,
        n_components=2,
        lam=0.0,
        mode="unconstrained",
        max_iter=50_000,
        step_size=1e-2,
        tol_grad=1e-8,
        tol_obj=1e-12,
        random_state=0,
    ):
        self.n_components = n_components
        self.lam = lam
        self.mode = mode
        self.max_iter = max_iter
        self.step_size = step_size
        self.tol_grad = tol_grad
        self.tol_obj = tol_obj
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        problem = FactorizationProblem(X, self.n_components, self.lam)
        config = SolverConfig(
            mode=self.mode,
            seed=self.random_state,
            max_iters=self.max_iter,
            step_size=self.step_size,
            tol_grad=self.tol_grad,
            tol_obj=self.tol_obj,
        )
        sol = solve(problem, config)
        self.solution_ = sol
        self.user_factors_ = sol.A_hat
        self.item_factors_ = sol.B_hat
        self.components_ = sol.B_hat.T
        self.objective_ = sol.objective_value
        self.n_iter_ = sol.iterations
        self.converged_ = sol.converged
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).user_factors_

    def transform(self, X):
        """User factors for new rows with the item factors held fixed.

        Minimizes the same loss row by row; the minimizer is
        ``X H (H^T H)^{-1} / (1 + lam)``.
        """
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        H = self.item_factors_
        W = np.linalg.lstsq(H, X.T, rcond=None)[0].T
        return W / (1.0 + self.lam)

    def inverse_transform(self, W):
        check_is_fitted(self)
        return np.asarray(W, dtype=np.float64) @ self.components_

    def score(self, X, y=None):
        """Negative loss of ``X`` against its own transform (higher is better)."""
        X = check_array(X, dtype=np.float64)
        problem = FactorizationProblem(X, self.n_components, self.lam)
        return -objective(problem, self.transform(X), self.item_factors_)


class ExactNeighbors(BaseEstimator):
    """Brute-force neighbour search; ties break by ascending training index."""

    def __init__(self, n_neighbors=5, metric="cosine"):
        self.n_neighbors = n_neighbors
        self.metric = metric

    def fit(self, X, y=None):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        self._fit_X = check_array(X, dtype=np.float64)
        self.n_samples_fit_ = self._fit_X.shape[0]
        self.n_features_in_ = self._fit_X.shape[1]
        return self

    def kneighbors(self, X=None, n_neighbors=None, return_distance=True):
        """Like ``NearestNeighbors.kneighbors``; ``X=None`` queries the training
        points against each other, excluding each point itself."""
        check_is_fitted(self, "_fit_X")
        k = self.n_neighbors if n_neighbors is None else n_neighbors
        exclude_self = X is None
        Q = self._fit_X if exclude_self else check_array(X, dtype=np.float64)
        limit = self.n_samples_fit_ - int(exclude_self)
        if not 1 <= k <= limit:
            raise ValueError(f"n_neighbors must lie in [1, {limit}], got {k}")
        ind = np.empty((Q.shape[0], k), dtype=np.intp)
        dist = np.empty((Q.shape[0], k))
        for qi, q in enumerate(Q):
            dq = distances(q, self._fit_X, self.metric)
            if exclude_self:
                dq[qi] = np.inf
            order = np.argsort(dq, kind="stable")[:k]
            ind[qi] = order
            dist[qi] = dq[order]
        return (dist, ind) if return_distance else ind
