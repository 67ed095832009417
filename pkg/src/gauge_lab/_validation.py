"""Input validation helpers shared by the public operations.

Vectors and embedding matrices are plain float64 numpy arrays; these helpers
enforce the invariants (finite, correct rank, unit norm where required) at the
API boundary so the numerical code can stay free of checks.
"""

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionError, DomainError

#: Tolerance on | ||x|| - 1 | for a vector to count as a point of the unit sphere.
UNIT_ATOL = 1e-12

#: Cosine / arccos arguments may overshoot [-1, 1] by at most this much.
CLAMP_ATOL = 1e-12


def check_vector(x, name="x"):
    """Return ``x`` as a finite 1-d float64 array with at least one component."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must have dim >= 1")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite components")
    return arr


def check_same_dim(x, y):
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")


def check_nonzero(x, name="x"):
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise DomainError(f"{name} is the zero vector; direction is undefined")
    return norm


def check_embeddings(E, name="E", min_rows=1):
    """Return ``E`` as a finite 2-d float64 array (rows are embeddings)."""
    try:
        arr = check_array(E, dtype=np.float64, ensure_min_samples=min_rows, ensure_all_finite=True)
    except ValueError as exc:
        if "NaN" in str(exc) or "infinity" in str(exc):
            raise DomainError(f"{name}: {exc}") from exc
        raise DimensionError(f"{name}: {exc}") from exc
    return arr


def unit_vector(x, renormalize=False, atol=UNIT_ATOL, name="x"):
    """Validate (or project) ``x`` as a point of the unit sphere.

    Parameters
    ----------
    x : array-like, shape (d,)
    renormalize : bool, default=False
        If True, divide by the norm instead of rejecting a non-unit input.
    atol : float
        Strict-mode tolerance on ``| ||x|| - 1 |``.
    """
    arr = check_vector(x, name)
    norm = np.linalg.norm(arr)
    if renormalize:
        if norm == 0.0:
            raise DomainError(f"{name} is the zero vector; cannot normalize")
        return arr / norm
    if abs(norm - 1.0) > atol:
        raise DomainError(f"{name} is not unit-norm (||{name}|| = {norm!r}, tolerance {atol})")
    return arr


def check_unit_rows(E, atol, name="E"):
    """Raise :class:`DomainError` unless every row of ``E`` has norm 1 within ``atol``."""
    norms = np.linalg.norm(E, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > atol)
    if bad.size:
        j = int(bad[0])
        raise DomainError(
            f"{name} row {j} is not unit-norm (norm {norms[j]!r}, tolerance {atol}); "
            "normalize the rows first"
        )
    return norms


def clamp_unit_interval(c, atol=CLAMP_ATOL):
    """Clamp a cosine value into [-1, 1], tolerating only rounding-sized excursions."""
    c = np.asarray(c, dtype=np.float64)
    over = np.abs(c) - 1.0
    if np.any(over > atol):
        raise DomainError(f"cosine argument outside [-1, 1] by {float(np.max(over))!r}")
    out = np.clip(c, -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def check_angle(theta):
    theta = float(theta)
    if not np.isfinite(theta) or theta < 0.0 or theta > np.pi:
        raise DomainError(f"angle must lie in [0, pi], got {theta!r}")
    return theta
