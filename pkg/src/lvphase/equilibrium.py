"""Solve the linear equilibrium system and classify feasibility.

The equilibrium abundance vector solves ``(I - A/(alpha sqrt n)) x = r``
(``r = 1`` in the homogeneous case).  One level of unfolding splits every
solution exactly as

    ``x_k = r_k + z_k / alpha + R_k / alpha**2``

with ``z = (A/sqrt n) r`` (i.i.d. Gaussian row sums for r = 1) and
``R = (A/sqrt n)^2 x`` the resolvent remainder.  The solver stores the split
and checks it; campaigns use the strict-positivity of ``x`` as the
feasibility flag.

A trial is *degenerate* when the largest singular value of
``A/(alpha sqrt n)`` is >= 1 - 1e-6; such trials raise
:class:`~lvphase.errors.DegenerateTrialError` and are counted (never
silently dropped) by the campaign layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ensembles import GrowthVector
from .errors import ConfigurationError, DegenerateTrialError, NonConvergenceError, SolveError

GUARD_DELTA = 1e-6           # degenerate iff guard_sigma >= 1 - GUARD_DELTA
RESIDUAL_RTOL = 1e-8         # solve residual certificate, relative to ||r||
_CROSSCHECK_MAX_N = 512      # both remainder formulas compared up to this size
_POWER_START_KEY = 0xD1B54A32D192ED03  # fixed Philox key for the start subspace


@dataclass(frozen=True)
class AlphaRule:
    """How to resolve the scaling alpha from the dimension n.

    mode:
        ``kappa_sqrt_log``       alpha = parameter * sqrt(log n)
        ``absolute``             alpha = parameter
        ``critical``             alpha = sqrt(2 log n)
        ``multiple_of_critical`` alpha = parameter * sqrt(2 log n)
    """

    mode: str
    parameter: float = math.nan

    _MODES = ("kappa_sqrt_log", "absolute", "critical", "multiple_of_critical")

    def __post_init__(self):
        if self.mode not in self._MODES:
            raise ConfigurationError(f"unknown alpha rule {self.mode!r}; expected {self._MODES}")
        if self.mode != "critical" and not math.isfinite(self.parameter):
            raise ConfigurationError(f"alpha rule {self.mode!r} needs a finite parameter")

    def resolve(self, n: int) -> float:
        if n < 2:
            raise ConfigurationError(f"alpha rules need n >= 2, got {n}")
        if self.mode == "kappa_sqrt_log":
            alpha = self.parameter * math.sqrt(math.log(n))
        elif self.mode == "absolute":
            alpha = self.parameter
        elif self.mode == "critical":
            alpha = math.sqrt(2.0 * math.log(n))
        else:
            alpha = self.parameter * math.sqrt(2.0 * math.log(n))
        if not alpha > 0.0:
            raise ConfigurationError(f"resolved alpha must be > 0, got {alpha}")
        return alpha


@dataclass
class EquilibriumSolution:
    """Solved abundance vector with its exact first-order split and diagnostics."""

    x: np.ndarray          # abundances
    z: np.ndarray          # (A/sqrt n) r  -- Gaussian first-order term
    r_resid: np.ndarray    # remainder R with x = r + z/alpha + R/alpha^2
    alpha: float
    min_x: float
    max_x: float
    feasible: bool
    guard_sigma: float     # largest singular value of A/(alpha sqrt n)
    residual: float        # achieved ||(I - A/(alpha sqrt n)) x - r||

    @property
    def n(self) -> int:
        return self.x.size


def is_feasible(x: np.ndarray) -> bool:
    """True iff every component is strictly positive (exact zeros count as infeasible)."""
    x = np.asarray(x)
    if x.size == 0:
        raise ConfigurationError("feasibility of an empty vector is undefined")
    return bool(np.min(x) > 0.0)


def _start_block(n: int, block_size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=_POWER_START_KEY))
    v, _ = np.linalg.qr(rng.standard_normal((n, block_size)))
    return v


def largest_singular_value(
    M: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 10_000,
    block_size: int = 4,
    early_stop_at: float | None = None,
) -> float:
    """Largest singular value of M by power iteration on M^T M.

    Runs the iteration on a small orthonormal subspace (``block_size``
    columns, Rayleigh-Ritz estimate; ``block_size=1`` is the classic single
    vector iteration) and stops when the top Ritz value's relative change
    drops below `tol`.  The estimate converges to the true value from below.

    If `early_stop_at` is given, returns as soon as the running lower bound
    reaches it (used by the degeneracy guard, where crossing the threshold
    is all that matters).

    Raises :class:`NonConvergenceError` (carrying the last iterate) when
    `max_iter` is exceeded.
    """
    if tol <= 0.0:
        raise ConfigurationError(f"tol must be > 0, got {tol}")
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    b = max(1, min(block_size, n))
    V = _start_block(n, b)
    est = 0.0
    for it in range(1, max_iter + 1):
        W = M @ V
        B = W.T @ W                     # V^T (M^T M) V, b x b
        new = math.sqrt(max(float(np.linalg.eigvalsh(B)[-1]), 0.0))
        if new == 0.0:
            return 0.0                  # start subspace in the kernel; generically M == 0
        if early_stop_at is not None and new >= early_stop_at:
            return new
        if abs(new - est) <= tol * new:
            return new
        est = new
        V, _ = np.linalg.qr(M.T @ W)    # next subspace iterate, re-orthonormalized
    raise NonConvergenceError(est, max_iter)


def _as_growth_array(r, n: int) -> np.ndarray:
    if r is None:
        return np.ones(n)
    if isinstance(r, GrowthVector):
        r = r.values
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (n,):
        raise ConfigurationError(f"growth vector has shape {r.shape}, expected ({n},)")
    return r


def solve_equilibrium(
    A: np.ndarray,
    alpha: float,
    r: GrowthVector | np.ndarray | None = None,
    guard_tol: float = 2e-3,
    guard_max_iter: int = 500,
) -> EquilibriumSolution:
    """Solve (I - A/(alpha sqrt n)) x = r by dense LU with partial pivoting.

    The degeneracy guard runs first; a near-singular system raises
    :class:`DegenerateTrialError`.  The solve carries a residual certificate
    (``<= 1e-8 ||r||``, with one refinement step reusing the LU factors if
    needed) and populates the exact z / remainder split.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {A.shape}")
    if not alpha > 0.0:
        raise ConfigurationError(f"alpha must be > 0, got {alpha}")
    n = A.shape[0]
    rvec = _as_growth_array(r, n)

    # The guard runs on A itself and scales the estimate (s is homogeneous),
    # avoiding a full matrix copy in the campaign hot path.  The Rayleigh
    # estimate is a lower bound, so crossing the threshold certifies
    # degeneracy immediately; on the valid side a loose estimate landing
    # near 1 is re-run tightly before trusting the classification.
    scale = 1.0 / (alpha * math.sqrt(n))
    threshold = 1.0 - GUARD_DELTA
    guard_sigma = scale * largest_singular_value(
        A, tol=guard_tol, max_iter=guard_max_iter, early_stop_at=threshold / scale
    )
    if 0.9 <= guard_sigma < threshold:
        guard_sigma = scale * largest_singular_value(
            A, tol=1e-5, max_iter=20 * guard_max_iter, block_size=8,
            early_stop_at=threshold / scale,
        )
    if guard_sigma >= threshold:
        raise DegenerateTrialError(guard_sigma)

    system = A * (-scale)
    system[np.diag_indices(n)] += 1.0   # I - A/(alpha sqrt n)
    lu, piv = scipy.linalg.lu_factor(system, overwrite_a=True, check_finite=False)
    x = scipy.linalg.lu_solve((lu, piv), rvec, check_finite=False)

    norm_r = float(np.linalg.norm(rvec))
    resid_vec = rvec - x + scale * (A @ x)
    residual = float(np.linalg.norm(resid_vec))
    if residual > RESIDUAL_RTOL * norm_r:
        x = x + scipy.linalg.lu_solve((lu, piv), resid_vec, check_finite=False)
        resid_vec = rvec - x + scale * (A @ x)
        residual = float(np.linalg.norm(resid_vec))
        if residual > RESIDUAL_RTOL * norm_r:
            raise SolveError(
                f"residual {residual:.3e} exceeds {RESIDUAL_RTOL:.0e} * ||r|| after refinement"
            )

    z = (A @ rvec) / math.sqrt(n)
    r_resid = alpha * alpha * (x - rvec - z / alpha)
    if n <= _CROSSCHECK_MAX_N:
        direct = (A @ (A @ x)) / n
        err = float(np.max(np.abs(r_resid - direct)))
        if err > 1e-8 * (1.0 + float(np.max(np.abs(direct)))):
            raise SolveError(f"remainder cross-check failed: max deviation {err:.3e}")

    min_x = float(x.min())
    max_x = float(x.max())
    return EquilibriumSolution(
        x=x,
        z=z,
        r_resid=r_resid,
        alpha=float(alpha),
        min_x=min_x,
        max_x=max_x,
        feasible=min_x > 0.0,
        guard_sigma=guard_sigma,
        residual=residual,
    )


def decompose(A: np.ndarray, alpha: float, r=None) -> tuple[np.ndarray, np.ndarray]:
    """Exact split terms (z, R) computed independently of the stored ones.

    z = (A/sqrt n) r and R = (A/sqrt n)^2 Q r, the remainder formed directly
    from the solved x = Q r by two matrix-vector products.  Propagates the
    degenerate-trial error of the underlying solve.
    """
    sol = solve_equilibrium(A, alpha, r)
    A = np.asarray(A, dtype=np.float64)
    return sol.z, (A @ (A @ sol.x)) / sol.n
