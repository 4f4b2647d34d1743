"""scikit-learn style estimator facade over the certified partition pipeline.

``GraphonKWayPartition`` is a clusterer: ``fit`` takes the n x n kernel
matrix of a step graphon and produces per-cell labels (0..k-1 for the k
certified sets, -1 for cells left out of every set), so the pipeline
composes with sklearn model selection and pipelines via the usual
``get_params`` / ``set_params`` / ``fit_predict`` surface.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .graphon import new_graphon
from .pipeline import k_way_partition


class GraphonKWayPartition(ClusterMixin, BaseEstimator):
    """Certified k-way spectral partitioning of a step-graphon kernel.

    Parameters
    ----------
    k : int
        Number of disjoint low-expansion sets to produce.
    seed : int
        Base seed for the randomized grid shifts (deterministic output).
    max_tries : int
        Shift retry budget before falling back to the best-mass shift.
    slack : float
        Accepted shortfall below the k - 1/4 retained-mass threshold.
    require_connected : bool
        Reject kernels whose positive-weight cell graph is disconnected.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
        Set index per cell; -1 for cells in no returned set.
    sets_ : tuple of CellSet
        The k certified disjoint sets.
    expansions_ : tuple of float
        Expansion h(A_i) of each set.
    h_alg_ : float
        max_i h(A_i), certified <= upper_bound_.
    lambda_discrete_, lambda_graphon_ : float
        k-th eigenvalue of the step space and its graphon-level cap.
    upper_bound_ : float
        sqrt(8000) * k^3.5 * sqrt(lambda_discrete_).
    result_ : PartitionResult
        Full provenance (shift, retries, stage certificates).
    """

    def __init__(self, k=2, seed=0, max_tries=64, slack=0.0, require_connected=True):
        self.k = k
        self.seed = seed
        self.max_tries = max_tries
        self.slack = slack
        self.require_connected = require_connected

    def fit(self, X, y=None):
        """Validate the kernel and run the certified pipeline."""
        X = np.asarray(X, dtype=float)
        W = new_graphon(X, require_connected=self.require_connected)
        result = k_way_partition(
            W, self.k, self.seed, max_tries=self.max_tries, slack=self.slack
        )
        labels = np.full(W.n, -1, dtype=int)
        for idx, A in enumerate(result.sets):
            labels[A.indices] = idx
        self.graphon_ = W
        self.result_ = result
        self.labels_ = labels
        self.sets_ = result.sets
        self.expansions_ = result.expansions
        self.h_alg_ = result.h_alg
        self.lambda_discrete_ = result.lambda_discrete
        self.lambda_graphon_ = result.lambda_graphon
        self.upper_bound_ = result.upper_bound
        self.n_features_in_ = W.n
        return self
