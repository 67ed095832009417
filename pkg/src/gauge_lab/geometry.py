"""Exact metrics on R^d and on the unit sphere.

Vectors are 1-d float64 arrays. Operations that are only defined on the sphere
(`geodesic_distance`, `equivalence_gap`) validate unit norm to within
``UNIT_ATOL``; pass ``renormalize=True`` through :func:`unit_vector` to project
instead.
"""

import math

import numpy as np

from ._validation import (
    check_angle,
    check_nonzero,
    check_same_dim,
    check_vector,
    clamp_unit_interval,
    unit_vector,
)
from .exceptions import DomainError

__all__ = [
    "unit_vector",
    "cosine_similarity",
    "cosine_distance",
    "squared_euclidean",
    "geodesic_distance",
    "chord_length",
    "cosine_taylor_approx",
    "equivalence_gap",
    "equivalence_curve",
    "cosine_similarity_matrix",
    "unit_at_degrees",
]


def cosine_similarity(x, y):
    """Cosine of the angle between two nonzero vectors, in [-1, 1]."""
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    check_same_dim(x, y)
    nx = check_nonzero(x, "x")
    ny = check_nonzero(y, "y")
    return clamp_unit_interval(np.dot(x, y) / (nx * ny))


def cosine_distance(x, y):
    """``1 - cosine_similarity(x, y)``, in [0, 2]."""
    return 1.0 - cosine_similarity(x, y)


def squared_euclidean(x, y):
    """``||x - y||^2``."""
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    check_same_dim(x, y)
    diff = x - y
    return float(np.dot(diff, diff))


def geodesic_distance(x, y):
    """Great-circle distance ``arccos(<x, y>)`` between two unit vectors, in [0, pi].

    Evaluated as ``2 atan2(||x - y||, ||x + y||)``, which equals the arccos form
    on the sphere but stays accurate near 0 and pi (``acos`` of a dot product
    one ulp below 1 is already ~1e-8).
    """
    x = unit_vector(x, name="x")
    y = unit_vector(y, name="y")
    check_same_dim(x, y)
    return 2.0 * math.atan2(np.linalg.norm(x - y), np.linalg.norm(x + y))


def chord_length(theta):
    """Straight-line distance ``2 sin(theta/2)`` between unit vectors at angle ``theta``."""
    theta = check_angle(theta)
    return 2.0 * math.sin(theta / 2.0)


def cosine_taylor_approx(theta, order=4):
    """Truncated Taylor series of ``1 - cos(theta)`` around 0.

    ``order=2`` gives ``theta**2 / 2``; ``order=4`` adds ``-theta**4 / 24``.
    """
    theta = check_angle(theta)
    if order == 2:
        return theta**2 / 2.0
    if order == 4:
        return theta**2 / 2.0 - theta**4 / 24.0
    raise ValueError(f"unsupported Taylor order {order!r}; expected 2 or 4")


def equivalence_gap(x, y):
    """``| d_C(x, y) - 0.5 * ||x - y||^2 |`` for unit vectors ``x`` and ``y``.

    Identically zero on the sphere up to rounding; exposed so the identity can be
    checked numerically.
    """
    x = unit_vector(x, name="x")
    y = unit_vector(y, name="y")
    return abs(cosine_distance(x, y) - 0.5 * squared_euclidean(x, y))


def unit_at_degrees(deg):
    """The point ``(cos t, sin t)`` of the unit circle for ``t`` in degrees, ``0 <= t <= 180``.

    Arguments are reduced to the first quadrant before conversion to radians so
    that 0, 90 and 180 degrees map to exact coordinates.
    """
    deg = float(deg)
    if not 0.0 <= deg <= 180.0:
        raise DomainError(f"angle must lie in [0, 180] degrees, got {deg!r}")
    if deg <= 90.0:
        c = math.sin(math.radians(90.0 - deg))
        s = math.sin(math.radians(deg))
    else:
        c = -math.sin(math.radians(deg - 90.0))
        s = math.sin(math.radians(180.0 - deg))
    return np.array([c, s])


def equivalence_curve(samples):
    """Sweep the angle between two unit vectors over [0, 180] degrees.

    Returns
    -------
    ndarray, shape (samples, 3)
        Columns ``theta_deg, cosine_distance, half_squared_euclidean``, both
        distances evaluated on the actual pair ``(1, 0)``, ``(cos t, sin t)``.
    """
    if int(samples) != samples or samples < 2:
        raise ValueError(f"samples must be an integer >= 2, got {samples!r}")
    samples = int(samples)
    origin = np.array([1.0, 0.0])
    rows = np.empty((samples, 3))
    for i in range(samples):
        deg = 180.0 * i / (samples - 1)
        y = unit_at_degrees(deg)
        rows[i] = (deg, cosine_distance(origin, y), 0.5 * squared_euclidean(origin, y))
    return rows


def cosine_similarity_matrix(X, Y=None):
    """Pairwise cosine similarities between the rows of ``X`` and ``Y``.

    Zero rows raise :class:`DomainError` naming the offending row.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    nx = np.linalg.norm(X, axis=1)
    ny = nx if Y is X else np.linalg.norm(Y, axis=1)
    for name, norms in (("X", nx), ("Y", ny)):
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DomainError(f"{name} row {int(zero[0])} is the zero vector")
    S = (X / nx[:, None]) @ (Y / ny[:, None]).T
    return clamp_unit_interval(S)
