"""Seeded synthetic data.

All generators use numpy's ``default_rng`` (PCG64, a documented 64-bit
permuted congruential generator) so a seed fully determines the output.
"""

from dataclasses import asdict, dataclass

import numpy as np

__all__ = ["SyntheticSpec", "generate_interactions", "generate_unit_cloud", "STANDARD_FIXTURE"]


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape, rank, noise level and seed of a synthetic interaction matrix."""

    m: int
    n: int
    true_rank: int
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("m", "n", "true_rank"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.true_rank > min(self.m, self.n):
            raise ValueError(f"true_rank={self.true_rank} exceeds min(m, n)={min(self.m, self.n)}")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be finite and >= 0, got {self.noise_sigma}")

    def to_dict(self):
        return asdict(self)


#: m=32 users, n=48 items, rank 4, noise 0.01, seed 7.
STANDARD_FIXTURE = SyntheticSpec(m=32, n=48, true_rank=4, noise_sigma=0.01, seed=7)


def generate_interactions(spec):
    """``A = U V^T + sigma E`` with i.i.d. standard normal ``U``, ``V`` and ``E``.

    Draw order is ``U`` (m x r), ``V`` (n x r), then ``E`` (m x n).
    """
    rng = np.random.default_rng(spec.seed)
    U = rng.standard_normal((spec.m, spec.true_rank))
    V = rng.standard_normal((spec.n, spec.true_rank))
    E = rng.standard_normal((spec.m, spec.n))
    return U @ V.T + spec.noise_sigma * E


def generate_unit_cloud(n, d, seed):
    """``n`` points drawn uniformly from the unit sphere in ``R^d``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    norms = np.linalg.norm(X, axis=1)
    # a zero draw has probability zero, but redraw rather than divide by it
    while np.any(norms == 0.0):
        bad = norms == 0.0
        X[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(X, axis=1)
    return X / norms[:, None]
