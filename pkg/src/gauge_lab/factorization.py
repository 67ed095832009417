"""Matrix factorization under the product-regularized least-squares loss.

The loss is ``||A - A_hat B_hat^T||_F^2 + lam * ||A_hat B_hat^T||_F^2``. It depends
on the factors only through their product, so every solution comes with a whole
orbit ``(A_hat D, B_hat D^{-1})`` of equally good ones. :func:`solve` trains
either without constraints or with every item row ``b_j`` held on the unit
sphere, which removes that orbit.

Three modes are available:

``"unconstrained"``
    Plain gradient descent on both factors.
``"sphere_retraction"``
    Riemannian gradient descent: the item gradient is projected onto the
    tangent space of the sphere, a step is taken, and each item row is divided
    by its norm again.
``"sphere_loss_normalized"``
    The loss is evaluated on ``V / ||V||`` (row-wise) for free parameters ``V``;
    the chain rule keeps the item gradient tangent to the sphere.

All modes use backtracking (Armijo) line search, so accepted iterates never
increase the loss.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_embeddings
from .exceptions import DimensionError, DivergenceError
from .gauge import apply_gauge
from .geometry import cosine_similarity_matrix

__all__ = [
    "MODES",
    "FactorizationProblem",
    "SolverConfig",
    "FactorizationSolution",
    "OrbitProbe",
    "objective",
    "objective_gradient",
    "gradient_check",
    "solve",
    "gauge_orbit_probe",
]

_logger = logging.getLogger(__name__)

MODES = ("unconstrained", "sphere_retraction", "sphere_loss_normalized")

_ARMIJO = 1e-4
_MIN_STEP = 1e-30
_MAX_STEP = 1e6


@dataclass(frozen=True, eq=False)
class FactorizationProblem:
    """Interaction matrix ``A`` (m x n), target rank ``k`` and weight ``lam``."""

    A: np.ndarray
    k: int
    lam: float = 0.0

    def __post_init__(self):
        A = check_embeddings(self.A, "A")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"rank k must be a positive integer, got {self.k!r}")
        if self.k > min(A.shape):
            raise ValueError(f"rank k={self.k} exceeds min(m, n)={min(A.shape)}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class SolverConfig:
    """Optimizer settings.

    ``step_size`` is the initial line-search step; it grows after accepted
    steps and shrinks on rejections. ``constrain_users`` also keeps the rows of
    ``A_hat`` on the sphere in the two sphere modes.
    """

    mode: str = "unconstrained"
    seed: int = 0
    max_iters: int = 50_000
    step_size: float = 1e-2
    tol_grad: float = 1e-8
    tol_obj: float = 1e-12
    constrain_users: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        for name in ("step_size", "tol_grad", "tol_obj"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive real, got {value!r}")

    @property
    def sphere(self):
        return self.mode != "unconstrained"


@dataclass(frozen=True, eq=False)
class FactorizationSolution:
    A_hat: np.ndarray
    B_hat: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    mode: str = "unconstrained"
    seed: int = 0
    k: int = 0
    lam: float = 0.0
    status: str = ""
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "mode": self.mode,
            "seed": self.seed,
            "k": self.k,
            "lambda": self.lam,
            "objective": self.objective_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "status": self.status,
            "A_hat": self.A_hat.tolist(),
            "B_hat": self.B_hat.tolist(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc):
        return cls(
            A_hat=np.asarray(doc["A_hat"], dtype=np.float64),
            B_hat=np.asarray(doc["B_hat"], dtype=np.float64),
            objective_value=float(doc["objective"]),
            iterations=int(doc["iterations"]),
            converged=bool(doc.get("converged", False)),
            mode=doc["mode"],
            seed=int(doc["seed"]),
            k=int(doc["k"]),
            lam=float(doc["lambda"]),
            status=doc.get("status", ""),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _check_factors(problem, A_hat, B_hat):
    A_hat = np.asarray(A_hat, dtype=np.float64)
    B_hat = np.asarray(B_hat, dtype=np.float64)
    m, n = problem.shape
    if A_hat.ndim != 2 or B_hat.ndim != 2:
        raise DimensionError("factors must be 2-d arrays")
    if A_hat.shape[0] != m or B_hat.shape[0] != n or A_hat.shape[1] != B_hat.shape[1]:
        raise DimensionError(
            f"factor shapes {A_hat.shape} and {B_hat.shape} do not fit A of shape {(m, n)}"
        )
    return A_hat, B_hat


def _loss(A, lam, P):
    # overflow becomes inf, which the solver treats as a rejected step
    with np.errstate(over="ignore", invalid="ignore"):
        R = A - P
        return float(np.sum(R * R) + lam * np.sum(P * P))


def objective(problem, A_hat, B_hat):
    """``||A - A_hat B_hat^T||_F^2 + lam ||A_hat B_hat^T||_F^2``."""
    A_hat, B_hat = _check_factors(problem, A_hat, B_hat)
    return _loss(problem.A, problem.lam, A_hat @ B_hat.T)


def _product_grad(A, lam, P):
    # d loss / d P
    return 2.0 * ((1.0 + lam) * P - A)


def objective_gradient(problem, A_hat, B_hat):
    """Euclidean gradients ``(dL/dA_hat, dL/dB_hat)`` of :func:`objective`."""
    A_hat, B_hat = _check_factors(problem, A_hat, B_hat)
    G = _product_grad(problem.A, problem.lam, A_hat @ B_hat.T)
    return G @ B_hat, G.T @ A_hat


def _numeric_gradient(f, X, eps):
    g = np.empty_like(X)
    it = np.nditer(X, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = X[idx]
        X[idx] = orig + eps
        fp = f()
        X[idx] = orig - eps
        fm = f()
        X[idx] = orig
        g[idx] = (fp - fm) / (2.0 * eps)
    return g


def gradient_check(problem, A_hat, B_hat, epsilon=1e-6):
    """Largest discrepancy between the analytic gradient and central differences.

    Each entry contributes ``|g_analytic - g_numeric| / max(1, |g_analytic|, |g_numeric|)``,
    i.e. a relative error that falls back to absolute error for small gradients.
    """
    if not 0.0 < epsilon <= 1e-3:
        raise ValueError(f"epsilon must lie in (0, 1e-3], got {epsilon!r}")
    A_hat, B_hat = _check_factors(problem, A_hat, B_hat)
    A_hat = A_hat.copy()
    B_hat = B_hat.copy()
    gA, gB = objective_gradient(problem, A_hat, B_hat)

    def f():
        return objective(problem, A_hat, B_hat)

    worst = 0.0
    for analytic, X in ((gA, A_hat), (gB, B_hat)):
        numeric = _numeric_gradient(f, X, epsilon)
        scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
        if analytic.size:
            worst = max(worst, float(np.max(np.abs(analytic - numeric) / scale)))
    return worst


def _row_normalize(X):
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _tangent(U, G):
    """Project the rows of ``G`` onto the tangent spaces at the unit rows of ``U``."""
    return G - np.sum(G * U, axis=1, keepdims=True) * U


class _Parameterization:
    """Maps free parameters ``(X, Y)`` to factors and back-propagates gradients."""

    def __init__(self, problem, config, rng):
        self.A = problem.A
        self.lam = problem.lam
        self.mode = config.mode
        self.users_on_sphere = config.sphere and config.constrain_users
        self.rng = rng
        self.k = problem.k

    def factors(self, X, Y):
        if self.mode == "sphere_loss_normalized":
            B = _row_normalize(Y)
            A = _row_normalize(X) if self.users_on_sphere else X
            return A, B
        return X, Y

    def value(self, X, Y):
        A_hat, B_hat = self.factors(X, Y)
        return _loss(self.A, self.lam, A_hat @ B_hat.T)

    def gradient(self, X, Y):
        """Search direction (negated) for each block; tangent where constrained."""
        A_hat, B_hat = self.factors(X, Y)
        G = _product_grad(self.A, self.lam, A_hat @ B_hat.T)
        gA = G @ B_hat
        gB = G.T @ A_hat
        if self.mode == "sphere_retraction":
            gB = _tangent(B_hat, gB)
            if self.users_on_sphere:
                gA = _tangent(A_hat, gA)
        elif self.mode == "sphere_loss_normalized":
            gB = _tangent(B_hat, gB) / np.linalg.norm(Y, axis=1, keepdims=True)
            if self.users_on_sphere:
                gA = _tangent(A_hat, gA) / np.linalg.norm(X, axis=1, keepdims=True)
        return gA, gB

    def _reseed_zero_rows(self, Z, what, iteration):
        zero = np.linalg.norm(Z, axis=1) == 0.0
        if np.any(zero):
            for j in np.flatnonzero(zero):
                _logger.warning("iteration %d: %s row %d collapsed to zero; re-seeding", iteration, what, j)
            Z[zero] = self.rng.standard_normal((int(zero.sum()), self.k)) / np.sqrt(self.k)
        return Z

    def retract(self, X, Y, iteration):
        if self.mode == "unconstrained":
            return X, Y
        Y = self._reseed_zero_rows(Y, "item", iteration)
        if self.users_on_sphere:
            X = self._reseed_zero_rows(X, "user", iteration)
        if self.mode == "sphere_retraction":
            Y = _row_normalize(Y)
            if self.users_on_sphere:
                X = _row_normalize(X)
        return X, Y


def _initialize(problem, config, rng):
    m, n = problem.shape
    k = problem.k
    X = rng.standard_normal((m, k)) / np.sqrt(k)
    Y = rng.standard_normal((n, k)) / np.sqrt(k)
    if config.sphere:
        Y = _row_normalize(Y)
        if config.constrain_users:
            X = _row_normalize(X)
    return X, Y


def solve(problem, config=None, callback=None):
    """Minimize the factorization loss in the mode selected by ``config``.

    Parameters
    ----------
    problem : FactorizationProblem
    config : SolverConfig, optional
    callback : callable, optional
        Called as ``callback(iteration, A_hat, B_hat, value)`` after every
        accepted step.

    Returns
    -------
    FactorizationSolution
        ``status`` is one of ``"grad_tol"``, ``"obj_tol"``, ``"max_iters"`` or
        ``"line_search"`` (no step of any size decreased the loss).

    Raises
    ------
    DivergenceError
        If the loss is non-finite at the starting point or only non-finite
        trial points can be found.
    """
    config = config or SolverConfig()
    rng = np.random.default_rng(config.seed)
    param = _Parameterization(problem, config, rng)
    X, Y = _initialize(problem, config, rng)

    f = param.value(X, Y)
    if not np.isfinite(f):
        raise DivergenceError("non-finite objective at iteration 0", iteration=0)

    step = config.step_size
    status = "max_iters"
    iteration = 0
    history = [f]
    while iteration < config.max_iters:
        gX, gY = param.gradient(X, Y)
        gnorm2 = float(np.sum(gX * gX) + np.sum(gY * gY))
        if np.sqrt(gnorm2) < config.tol_grad:
            status = "grad_tol"
            break

        saw_finite = False
        while True:
            Xt, Yt = param.retract(X - step * gX, Y - step * gY, iteration + 1)
            ft = param.value(Xt, Yt)
            if np.isfinite(ft):
                saw_finite = True
                if ft <= f - _ARMIJO * step * gnorm2:
                    break
            step *= 0.5
            if step < _MIN_STEP:
                break
        if step < _MIN_STEP:
            if not saw_finite:
                raise DivergenceError(
                    f"non-finite objective at iteration {iteration + 1}", iteration=iteration + 1
                )
            status = "line_search"
            break

        iteration += 1
        decrease = f - ft
        X, Y, f_old, f = Xt, Yt, f, ft
        history.append(f)
        if callback is not None:
            callback(iteration, *param.factors(X, Y), f)
        if f == 0.0 or decrease <= config.tol_obj * f_old:
            status = "obj_tol"
            break
        step = min(step * 2.0, _MAX_STEP)

    A_hat, B_hat = param.factors(X, Y)
    A_hat = np.array(A_hat)
    B_hat = np.array(B_hat)
    value = objective(problem, A_hat, B_hat)
    if not np.isfinite(value):
        raise DivergenceError(f"non-finite objective at iteration {iteration}", iteration=iteration)
    return FactorizationSolution(
        A_hat=A_hat,
        B_hat=B_hat,
        objective_value=value,
        iterations=iteration,
        converged=status in ("grad_tol", "obj_tol"),
        mode=config.mode,
        seed=config.seed,
        k=problem.k,
        lam=problem.lam,
        status=status,
        history=history,
    )


@dataclass(frozen=True)
class OrbitProbe:
    """What moving a solution along its gauge orbit changes.

    ``objective_delta`` should vanish for every gauge; ``max_row_norm_violation``
    is the largest change of an item row norm, i.e. how far ``B_hat D^{-1}``
    leaves the sphere when ``B_hat`` was on it; ``cosine_max_shift`` is the
    largest change in item-item cosine.
    """

    objective_delta: float
    max_row_norm_violation: float
    cosine_max_shift: float


def _pair_indices(n, max_pairs, seed):
    iu, ju = np.triu_indices(n, k=1)
    if max_pairs is not None and iu.size > max_pairs:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(iu.size, size=max_pairs, replace=False))
        iu, ju = iu[pick], ju[pick]
    return iu, ju


def gauge_orbit_probe(problem, solution, D, max_pairs=None, seed=0):
    """Evaluate ``solution`` at ``(A_hat D, B_hat D^{-1})``.

    Parameters
    ----------
    problem : FactorizationProblem
        The problem ``solution`` was fitted to (needed to re-evaluate the loss).
    solution : FactorizationSolution
    D : GaugeMatrix
    max_pairs : int, optional
        Sample at most this many item pairs (seeded by ``seed``) for the cosine
        shift instead of using all of them.
    """
    A_hat, B_hat = _check_factors(problem, solution.A_hat, solution.B_hat)
    if D.k != A_hat.shape[1]:
        raise DimensionError(f"gauge has k={D.k} but the solution has k={A_hat.shape[1]}")
    base = objective(problem, A_hat, B_hat)
    A_g = apply_gauge(A_hat, D, "right_D")
    B_g = apply_gauge(B_hat, D, "right_D_inverse")
    delta = abs(objective(problem, A_g, B_g) - base)
    # measured against each row's own norm, which is 1 for sphere-mode solutions
    violation = float(np.max(np.abs(np.linalg.norm(B_g, axis=1) - np.linalg.norm(B_hat, axis=1))))

    shift = 0.0
    if B_hat.shape[0] >= 2:
        iu, ju = _pair_indices(B_hat.shape[0], max_pairs, seed)
        before = cosine_similarity_matrix(B_hat)[iu, ju]
        after = cosine_similarity_matrix(B_g)[iu, ju]
        shift = float(np.max(np.abs(after - before)))
    return OrbitProbe(objective_delta=delta, max_row_norm_violation=violation, cosine_max_shift=shift)
