"""The positive diagonal gauge group and its action on factor matrices.

A gauge ``D = diag(d_1, ..., d_k)`` with every ``d_i > 0`` acts on a
factorization ``A_hat @ B_hat.T`` by ``(A_hat D, B_hat D^{-1})``, which leaves the
product untouched but rescales embedding axes anisotropically. The helpers here
measure that invariance, its failure to commute with L2 normalization, and the
fact that the orbit leaves the unit sphere.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_embeddings,
    check_nonzero,
    check_same_dim,
    check_unit_rows,
    check_vector,
)
from .exceptions import DimensionError, DomainError
from .geometry import cosine_similarity

__all__ = [
    "GaugeMatrix",
    "apply_gauge",
    "product_invariance_gap",
    "normalize",
    "commutation_gap",
    "cosine_under_gauge",
    "sphere_feasibility_violation",
    "sample_gauges",
    "FIG3_PAIR",
    "FIG3_GAUGES",
    "gauge_demo_table",
]

#: Default log-uniform sampling range for gauge diagonals.
DEFAULT_GAUGE_RANGE = (1e-3, 1e3)


@dataclass(frozen=True, eq=False)
class GaugeMatrix:
    """Positive diagonal matrix ``diag(d_1, ..., d_k)``.

    Only the diagonal is stored. Construction rejects non-positive or
    non-finite entries.
    """

    diagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=np.float64).reshape(-1)
        if d.size == 0:
            raise DimensionError("gauge must have k >= 1")
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            raise DomainError(f"gauge diagonal must be finite and strictly positive, got {d}")
        d.setflags(write=False)
        object.__setattr__(self, "diagonal", d)

    @property
    def k(self):
        return self.diagonal.size

    @classmethod
    def identity(cls, k):
        return cls(np.ones(k))

    @classmethod
    def scalar(cls, c, k):
        return cls(np.full(k, float(c)))

    @classmethod
    def sample(cls, k, rng, low=DEFAULT_GAUGE_RANGE[0], high=DEFAULT_GAUGE_RANGE[1]):
        """Draw each ``d_i`` log-uniformly from ``[low, high]`` using ``rng``."""
        if not 0.0 < low <= high:
            raise ValueError(f"need 0 < low <= high, got ({low}, {high})")
        return cls(np.exp(rng.uniform(np.log(low), np.log(high), size=k)))

    def inverse(self):
        return GaugeMatrix(1.0 / self.diagonal)

    def as_matrix(self):
        return np.diag(self.diagonal)

    def max_deviation(self):
        """``max_i |d_i - 1|``; zero exactly for the identity."""
        return float(np.max(np.abs(self.diagonal - 1.0)))

    def is_identity(self):
        return bool(np.all(self.diagonal == 1.0))

    def __matmul__(self, other):
        if isinstance(other, GaugeMatrix):
            if other.k != self.k:
                raise DimensionError(f"gauge dims differ: {self.k} vs {other.k}")
            return GaugeMatrix(self.diagonal * other.diagonal)
        return NotImplemented

    def __repr__(self):
        return f"GaugeMatrix({np.array2string(self.diagonal, precision=6)})"


def sample_gauges(k, n, seed, low=DEFAULT_GAUGE_RANGE[0], high=DEFAULT_GAUGE_RANGE[1]):
    """``n`` log-uniform gauges from a generator seeded with ``seed``."""
    rng = np.random.default_rng(seed)
    return [GaugeMatrix.sample(k, rng, low, high) for _ in range(n)]


def _check_k(k, D, what="E"):
    if k != D.k:
        raise DimensionError(f"{what} has k={k} columns but the gauge has k={D.k}")


def apply_gauge(E, D, side="right_D"):
    """Right-multiply the rows of ``E`` by ``D`` (``side="right_D"``) or ``D^{-1}``.

    ``apply_gauge(A_hat, D)`` and ``apply_gauge(B_hat, D, "right_D_inverse")``
    together form the gauge-transformed factor pair.
    """
    E = check_embeddings(E, "E")
    _check_k(E.shape[1], D)
    if side == "right_D":
        return E * D.diagonal
    if side == "right_D_inverse":
        return E / D.diagonal
    raise ValueError(f"side must be 'right_D' or 'right_D_inverse', got {side!r}")


def product_invariance_gap(A_hat, B_hat, D):
    """Frobenius norm of ``A_hat B_hat^T - (A_hat D)(B_hat D^{-1})^T``."""
    A_hat = check_embeddings(A_hat, "A_hat")
    B_hat = check_embeddings(B_hat, "B_hat")
    if A_hat.shape[1] != B_hat.shape[1]:
        raise DimensionError(f"factor ranks differ: {A_hat.shape[1]} vs {B_hat.shape[1]}")
    _check_k(A_hat.shape[1], D, "A_hat")
    P = A_hat @ B_hat.T
    P_gauged = apply_gauge(A_hat, D) @ apply_gauge(B_hat, D, "right_D_inverse").T
    return float(np.linalg.norm(P - P_gauged))


def normalize(v):
    """L2 projection ``v / ||v||`` onto the unit sphere."""
    v = check_vector(v, "v")
    return v / check_nonzero(v, "v")


def commutation_gap(v, D, directional=False):
    """How far normalization fails to commute with the gauge at ``v``.

    By default returns ``||pi(D v) - D pi(v)||`` with ``pi`` the L2 projection and
    the right-hand side left un-normalized. With ``directional=True`` returns
    ``||pi(D v) - pi(v)||`` instead, i.e. how far ``D`` turns the direction of
    ``v``; this is the part that cosine similarity sees.
    """
    v = check_vector(v, "v")
    _check_k(v.size, D, "v")
    Dv = D.diagonal * v
    check_nonzero(v, "v")
    check_nonzero(Dv, "D v")
    if directional:
        return float(np.linalg.norm(normalize(Dv) - normalize(v)))
    return float(np.linalg.norm(normalize(Dv) - D.diagonal * normalize(v)))


def cosine_under_gauge(b1, b2, D):
    """``cosine_similarity(D b1, D b2)``."""
    b1 = check_vector(b1, "b1")
    b2 = check_vector(b2, "b2")
    check_same_dim(b1, b2)
    _check_k(b1.size, D, "b1")
    return cosine_similarity(D.diagonal * b1, D.diagonal * b2)


def sphere_feasibility_violation(B, D, atol=1e-9):
    """``max_j | ||D^{-1} b_j|| - 1 |`` over the unit rows ``b_j`` of ``B``.

    Measures how far the gauge-transformed item factors leave the sphere. It is
    zero for the identity, and otherwise only when every row has no weight on
    the axes where ``d_i != 1``.

    Each transformed norm is compared with the row's own computed norm (1 up to
    ``atol``) so that the identity gives exactly 0 rather than rounding noise.
    """
    B = check_embeddings(B, "B")
    _check_k(B.shape[1], D, "B")
    norms = check_unit_rows(B, atol, "B")
    moved = np.linalg.norm(B / D.diagonal, axis=1)
    return float(np.max(np.abs(moved - norms)))


# Two planar embeddings at 38 and 38 + arccos(0.952) degrees. Their cosine is
# 0.952 and both the stretch diag(2, 0.5) and the squeeze diag(0.3, 3.3) pull
# them together (cosines ~0.987 and ~0.9985).
_FIG3_A = np.radians(38.0)
_FIG3_B = _FIG3_A + np.arccos(0.952)
FIG3_PAIR = (
    np.array([np.cos(_FIG3_A), np.sin(_FIG3_A)]),
    np.array([np.cos(_FIG3_B), np.sin(_FIG3_B)]),
)
FIG3_GAUGES = (
    ("identity", GaugeMatrix([1.0, 1.0])),
    ("diag(2,0.5)", GaugeMatrix([2.0, 0.5])),
    ("diag(0.3,3.3)", GaugeMatrix([0.3, 3.3])),
)


def gauge_demo_table(pair=FIG3_PAIR, gauges=FIG3_GAUGES):
    """Rows ``(label, d1, d2, cosine, inner_product)`` for each gauge.

    ``cosine`` is the similarity of ``D b1`` and ``D b2``; ``inner_product`` is the
    model score ``<b1 D, b2 D^{-1}>``, which the gauge leaves unchanged.
    """
    b1, b2 = (check_vector(b, "b") for b in pair)
    rows = []
    for label, D in gauges:
        score = float(np.dot(D.diagonal * b1, b2 / D.diagonal))
        rows.append((label, *D.diagonal.tolist(), cosine_under_gauge(b1, b2, D), score))
    return rows
