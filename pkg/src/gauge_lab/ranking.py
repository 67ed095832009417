"""Exact brute-force k-nearest-neighbour search under cosine and Euclidean distance.

Ties in distance are broken by ascending candidate id under both metrics, so on
unit-norm data the two metrics produce identical ordered neighbour lists, not
merely identical sets.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._validation import check_embeddings, check_unit_rows, check_vector
from .exceptions import DimensionError, DomainError
from .gauge import GaugeMatrix

__all__ = [
    "METRICS",
    "NeighborList",
    "EquivalenceResult",
    "knn",
    "distances",
    "ranking_equivalence_check",
    "gauge_ranking_sensitivity",
    "write_neighbors_jsonl",
]

METRICS = ("cosine", "euclidean")


@dataclass(frozen=True)
class NeighborList:
    """Neighbours of one query, ascending by distance."""

    query_id: int | None
    ids: tuple
    distances: tuple
    metric: str = "cosine"

    @property
    def neighbors(self):
        return list(zip(self.ids, self.distances))

    def to_dict(self):
        return {
            "query_id": self.query_id,
            "metric": self.metric,
            "neighbors": [[int(i), float(d)] for i, d in self.neighbors],
        }


def distances(query, candidates, metric):
    """Distances from ``query`` to every row of ``candidates``."""
    if metric == "cosine":
        qn = np.linalg.norm(query)
        cn = np.linalg.norm(candidates, axis=1)
        if qn == 0.0:
            raise DomainError("query is the zero vector; cosine distance is undefined")
        zero = np.flatnonzero(cn == 0.0)
        if zero.size:
            raise DomainError(f"candidate {int(zero[0])} is the zero vector; cosine distance is undefined")
        sim = np.clip((candidates @ query) / (cn * qn), -1.0, 1.0)
        return 1.0 - sim
    if metric == "euclidean":
        diff = candidates - query
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")


def knn(query, candidates, k, metric="cosine", query_id=None, exclude_self=False):
    """The ``k`` nearest rows of ``candidates`` to ``query``.

    Parameters
    ----------
    query : array-like, shape (d,)
    candidates : array-like, shape (n, d)
    k : int
        Number of neighbours, ``1 <= k <= `` number of eligible candidates.
    metric : {"cosine", "euclidean"}
    query_id : int, optional
        Recorded on the result. With ``exclude_self=True`` the candidate with
        this index is skipped.
    """
    query = check_vector(query, "query")
    candidates = check_embeddings(candidates, "candidates")
    if candidates.shape[1] != query.size:
        raise DimensionError(f"query has dim {query.size}, candidates have dim {candidates.shape[1]}")
    ids = np.arange(candidates.shape[0])
    if exclude_self:
        if query_id is None:
            raise ValueError("exclude_self requires query_id")
        keep = ids != query_id
        ids = ids[keep]
        candidates = candidates[keep]
    if int(k) != k or not 1 <= k <= ids.size:
        raise ValueError(f"k must be an integer in [1, {ids.size}], got {k!r}")
    dist = distances(query, candidates, metric)
    # stable sort on ids that are already ascending breaks ties by id
    order = np.argsort(dist, kind="stable")[: int(k)]
    return NeighborList(
        query_id=query_id,
        ids=tuple(int(i) for i in ids[order]),
        distances=tuple(float(d) for d in dist[order]),
        metric=metric,
    )


@dataclass(frozen=True)
class EquivalenceResult:
    identical: bool
    first_divergence: tuple | None = None

    def __bool__(self):
        return self.identical


def ranking_equivalence_check(queries, candidates, k, raw=False, atol=1e-9):
    """Compare cosine and Euclidean k-NN lists for every query.

    On unit-norm rows the lists coincide exactly. Non-unit rows are rejected
    unless ``raw=True``, in which case divergences are reported instead.

    Returns
    -------
    EquivalenceResult
        ``first_divergence`` is ``(query_id, rank)`` of the first mismatch.
    """
    queries = check_embeddings(queries, "queries")
    candidates = check_embeddings(candidates, "candidates")
    if not raw:
        check_unit_rows(queries, atol, "queries")
        check_unit_rows(candidates, atol, "candidates")
    for qi, q in enumerate(queries):
        cos = knn(q, candidates, k, "cosine", query_id=qi).ids
        euc = knn(q, candidates, k, "euclidean", query_id=qi).ids
        if cos != euc:
            rank = next(r for r, (a, b) in enumerate(zip(cos, euc)) if a != b)
            return EquivalenceResult(False, (qi, rank))
    return EquivalenceResult(True)


def _topk_sets(U, k):
    """Top-``k`` cosine neighbour sets of each unit row of ``U`` among the others."""
    S = U @ U.T
    D = 1.0 - np.clip(S, -1.0, 1.0)
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    return [frozenset(row.tolist()) for row in order]


def gauge_ranking_sensitivity(candidates, D_samples, k, seed=0, max_queries=None):
    """Mean Jaccard overlap of cosine top-``k`` sets before and after each gauge.

    Every item serves as a query against all other items. The reference lists
    come from the post-hoc normalized rows ``pi(b_j)``; each sampled gauge ``D``
    is compared via ``pi(D^{-1} b_j)``. A value of 1.0 means no gauge in
    ``D_samples`` changed any neighbourhood.

    ``max_queries`` restricts the average to a seeded random subset of queries.
    """
    B = check_embeddings(candidates, "candidates", min_rows=2)
    D_samples = list(D_samples)
    if not D_samples:
        raise ValueError("need at least one gauge sample")
    n = B.shape[0]
    if int(k) != k or not 1 <= k <= n - 1:
        raise ValueError(f"k must be an integer in [1, {n - 1}], got {k!r}")
    norms = np.linalg.norm(B, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DomainError(f"candidate {int(zero[0])} is the zero vector")

    queries = np.arange(n)
    if max_queries is not None and max_queries < n:
        queries = np.sort(np.random.default_rng(seed).choice(n, size=max_queries, replace=False))

    def normalized(X):
        return X / np.linalg.norm(X, axis=1, keepdims=True)

    reference = _topk_sets(normalized(B), int(k))
    total = 0.0
    for D in D_samples:
        if not isinstance(D, GaugeMatrix):
            D = GaugeMatrix(D)
        if D.k != B.shape[1]:
            raise DimensionError(f"gauge has k={D.k}, candidates have dim {B.shape[1]}")
        gauged = _topk_sets(normalized(B / D.diagonal), int(k))
        total += float(np.mean([len(reference[q] & gauged[q]) / len(reference[q] | gauged[q]) for q in queries]))
    return total / len(D_samples)


def write_neighbors_jsonl(neighbor_lists, fh):
    """One JSON object per line: ``{query_id, metric, neighbors: [[id, distance], ...]}``."""
    for nl in neighbor_lists:
        fh.write(json.dumps(nl.to_dict()) + "\n")
