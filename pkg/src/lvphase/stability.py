"""Jacobian spectrum analysis and direct integration of the Lotka-Volterra dynamics.

At a feasible equilibrium x* the community dynamics

    dx_k/dt = x_k (r_k - x_k + (1/(alpha sqrt n)) sum_l A_kl x_l)

have Jacobian ``J(x*) = diag(x*) (-I + A/(alpha sqrt n))``.  Stability holds
when every eigenvalue of J has negative real part; the spectrum clusters
around the points -x_k, and the instance quantity

    rho_plus = sqrt(2 log n) * sigma_r / (alpha * r_min)

(reducing to sqrt(2 log n)/alpha in the homogeneous case) controls both the
eigenvalue matching distance and the margin max Re(lambda) <= -(1 - rho_plus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import GrowthVector, vector_stats
from .equilibrium import _as_growth_array, largest_singular_value
from .errors import ConfigurationError, DivergenceError, IntegrationError

BLOWUP_LIMIT = 1e12
NEGATIVE_TOL = 1e-12
_EIG_CHUNK = 256


@dataclass
class StabilityReport:
    """Spectrum of J(x) with the distances entering the stability statement."""

    eigenvalues: np.ndarray   # n complex numbers, conjugate-closed
    max_re: float             # max over the spectrum of Re(lambda)
    match_dist: float         # max_lambda min_k |lambda + x_k|
    rho_plus: float           # instance value sqrt(2 log n) sigma_r / (alpha r_min)
    stable: bool              # max_re < 0


@dataclass
class Trajectory:
    """Time grid and recorded states of one integrated trajectory."""

    times: np.ndarray         # increasing, shape (m,)
    states: np.ndarray        # shape (m, n), componentwise >= 0


def jacobian(x: np.ndarray, A: np.ndarray, alpha: float) -> np.ndarray:
    """diag(x) (-I + A/(alpha sqrt n)); row k scales linearly in x_k."""
    x = np.asarray(x, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    n = x.size
    if A.shape != (n, n):
        raise ConfigurationError(f"matrix shape {A.shape} does not match x of length {n}")
    if not alpha > 0.0:
        raise ConfigurationError(f"alpha must be > 0, got {alpha}")
    J = A * (1.0 / (alpha * math.sqrt(n)))
    J[np.diag_indices(n)] -= 1.0
    J *= x[:, None]
    return J


def spectrum(
    M: np.ndarray,
    verify: bool = False,
    verify_rtol: float = 1e-6,
    max_dim: int = 4000,
) -> np.ndarray:
    """All eigenvalues of a real square matrix (dense QR algorithm).

    With ``verify=True`` the eigenvectors are computed as well and each pair
    must satisfy ||Mv - lambda v|| <= rtol * ||M|| * ||v||.  Non-convergence
    of the eigensolver raises, never returns partial output.  `max_dim`
    guards against accidentally submitting an O(n^3) job far beyond desk
    scale; raise it explicitly for bigger runs.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > max_dim:
        raise ConfigurationError(
            f"matrix dimension {M.shape[0]} exceeds max_dim={max_dim}; pass a larger max_dim"
        )
    if not np.all(np.isfinite(M)):
        raise ConfigurationError("matrix entries must be finite")
    try:
        if not verify:
            return np.linalg.eigvals(M)
        w, v = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver did not converge: {exc}") from exc
    norm = np.linalg.norm(M, ord="fro")
    resid = np.linalg.norm(M @ v - v * w[None, :], axis=0)
    bad = resid > verify_rtol * norm * np.linalg.norm(v, axis=0)
    if np.any(bad):
        raise np.linalg.LinAlgError(
            f"{int(bad.sum())} eigenpairs failed the residual check (worst {resid.max():.3e})"
        )
    return w


def eigenvalue_match_distance(eigenvalues: np.ndarray, x: np.ndarray) -> float:
    """max over eigenvalues of the distance to the nearest -x_k (exhaustive min)."""
    lam = np.asarray(eigenvalues, dtype=np.complex128)
    x = np.asarray(x, dtype=np.float64)
    worst = 0.0
    for i in range(0, lam.size, _EIG_CHUNK):
        chunk = lam[i : i + _EIG_CHUNK]
        d = np.abs(chunk[:, None] + x[None, :]).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def rho_plus(n: int, alpha: float, r: GrowthVector | np.ndarray | None = None) -> float:
    """Instance surrogate sqrt(2 log n) sigma_r / (alpha r_min) (homogeneous: sqrt(2 log n)/alpha)."""
    if r is None:
        return math.sqrt(2.0 * math.log(n)) / alpha
    if not isinstance(r, GrowthVector):
        r = GrowthVector(np.asarray(r, dtype=np.float64))
    r_min, _, sigma_r = vector_stats(r)
    return math.sqrt(2.0 * math.log(n)) * sigma_r / (alpha * r_min)


def stability_metrics(
    x: np.ndarray,
    A: np.ndarray,
    alpha: float,
    r: GrowthVector | np.ndarray | None = None,
    max_dim: int = 4000,
) -> StabilityReport:
    """Spectrum of J(x) plus the matching distance, stability flag and rho_plus."""
    x = np.asarray(x, dtype=np.float64)
    eig = spectrum(jacobian(x, A, alpha), max_dim=max_dim)
    max_re = float(eig.real.max())
    return StabilityReport(
        eigenvalues=eig,
        max_re=max_re,
        match_dist=eigenvalue_match_distance(eig, x),
        rho_plus=rho_plus(x.size, alpha, r),
        stable=max_re < 0.0,
    )


def perturbation_norm_bound(x: np.ndarray, A: np.ndarray, alpha: float) -> float:
    """||diag(x) A/(alpha sqrt n)||, the Bauer-Fike radius around the -x_k."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    E = np.asarray(A, dtype=np.float64) * (x[:, None] / (alpha * math.sqrt(n)))
    return largest_singular_value(E, tol=1e-6, max_iter=20_000, block_size=8)


def lv_field(x: np.ndarray, A: np.ndarray, alpha: float, rvec: np.ndarray) -> np.ndarray:
    """Right-hand side x * (r - x + A x / (alpha sqrt n))."""
    n = x.size
    return x * (rvec - x + (A @ x) / (alpha * math.sqrt(n)))


def lv_integrate(
    A: np.ndarray,
    alpha: float,
    r: GrowthVector | np.ndarray | None,
    x0: np.ndarray,
    t_end: float = 50.0,
    dt: float = 1e-2,
    stride: int = 1,
) -> Trajectory:
    """Fixed-step classical RK4 integration of the Lotka-Volterra field.

    States are recorded every `stride` steps (plus the final step).  The
    dynamics preserve the positive orthant; floating-point undershoots in
    (-1e-12, 0) are clamped to 0, anything more negative raises
    :class:`IntegrationError`, and any component beyond 1e12 in magnitude
    raises :class:`DivergenceError` carrying the blow-up time.
    """
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x0, dtype=np.float64).copy()
    n = x.size
    if A.shape != (n, n):
        raise ConfigurationError(f"matrix shape {A.shape} does not match x0 of length {n}")
    if np.any(x <= 0.0):
        raise ConfigurationError("initial abundances must be componentwise > 0")
    if not (dt > 0.0 and t_end > 0.0):
        raise ConfigurationError("dt and t_end must be > 0")
    if stride < 1:
        raise ConfigurationError(f"stride must be >= 1, got {stride}")
    rvec = _as_growth_array(r, n)

    nsteps = max(1, int(round(t_end / dt)))
    times = [0.0]
    states = [x.copy()]
    for step in range(1, nsteps + 1):
        k1 = lv_field(x, A, alpha, rvec)
        k2 = lv_field(x + 0.5 * dt * k1, A, alpha, rvec)
        k3 = lv_field(x + 0.5 * dt * k2, A, alpha, rvec)
        k4 = lv_field(x + dt * k3, A, alpha, rvec)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        t = step * dt
        worst = float(np.max(np.abs(x)))
        if not np.isfinite(worst) or worst > BLOWUP_LIMIT:
            raise DivergenceError(t, worst)
        low = float(x.min())
        if low < 0.0:
            if low <= -NEGATIVE_TOL:
                raise IntegrationError(t, f"negative abundance {low:.3e} at t={t:.6g}")
            np.clip(x, 0.0, None, out=x)
        if step % stride == 0 or step == nsteps:
            times.append(t)
            states.append(x.copy())
    return Trajectory(times=np.asarray(times), states=np.asarray(states))


def perturbed_state(x: np.ndarray, magnitude: float, rng: np.random.Generator) -> np.ndarray:
    """x * (1 + magnitude * u) with u uniform in [-1, 1]^n, kept positive."""
    x = np.asarray(x, dtype=np.float64)
    u = rng.uniform(-1.0, 1.0, size=x.size)
    out = x * (1.0 + magnitude * u)
    if np.any(out <= 0.0):
        raise ConfigurationError("perturbation magnitude too large: state left the orthant")
    return out
