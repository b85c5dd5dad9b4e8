"""Gaussian-state linear algebra: stability, Lyapunov steady states and
two-mode logarithmic negativity.

Quadratures are ordered (x_1, y_1, x_2, y_2, ...) and the covariance
matrix follows V_ij = <u_i u_j + u_j u_i>/2, so the vacuum has V = I/2.
Nothing in this module knows about the cavity-magnomechanical model.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, InvalidInputError, InvalidStateError, UnstableSystemError


@dataclass(frozen=True)
class Settings:
    """Numerical tolerances. The defaults are the contract values."""

    residual_tol: float = 1e-10
    physicality_slack: float = 1e-9
    clamp_tol: float = 1e-9
    symmetry_tol: float = 1e-12


DEFAULT_SETTINGS = Settings()


@dataclass(frozen=True)
class StabilityReport:
    is_hurwitz: bool
    max_real_part: float
    spectrum: tuple[complex, ...] = field(repr=False)


@dataclass(frozen=True)
class TwoModeBlock:
    """2x2 blocks of a two-mode covariance matrix [[V1, V12], [V12^T, V2]]."""

    V1: np.ndarray
    V2: np.ndarray
    V12: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.V1, self.V12], [self.V12.T, self.V2]])

    @classmethod
    def from_matrix(cls, V0) -> "TwoModeBlock":
        V0 = _as_square(V0, "V0")
        if V0.shape != (4, 4):
            raise InvalidInputError(f"two-mode CM must be 4x4, got {V0.shape}")
        return cls(V0[:2, :2].copy(), V0[2:, 2:].copy(), V0[:2, 2:].copy())


def _as_square(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def is_hurwitz(A) -> StabilityReport:
    """Eigenvalue test for asymptotic stability of u' = A u."""
    A = _as_square(A, "A")
    spectrum = np.linalg.eigvals(A)
    max_re = float(np.max(spectrum.real))
    return StabilityReport(max_re < 0.0, max_re, tuple(complex(z) for z in spectrum))


def lyapunov_residual(A, V, D) -> float:
    """Relative Frobenius residual of A V + V A^T + D = 0."""
    R = A @ V + V @ A.T + D
    scale = np.linalg.norm(D)
    if scale == 0.0:
        scale = max(np.linalg.norm(A) * np.linalg.norm(V), np.finfo(float).tiny)
        if np.linalg.norm(V) == 0.0:
            return float(np.linalg.norm(R))
    return float(np.linalg.norm(R) / scale)


def _check_pair(A, D, settings: Settings):
    A = _as_square(A, "A")
    D = _as_square(D, "D")
    if A.shape != D.shape:
        raise InvalidInputError(f"A {A.shape} and D {D.shape} differ in dimension")
    scale = max(np.abs(D).max(), np.finfo(float).tiny)
    if np.abs(D - D.T).max() > settings.symmetry_tol * scale:
        raise InvalidInputError("D must be symmetric")
    if np.linalg.eigvalsh(D).min() < -settings.physicality_slack * scale:
        raise InvalidInputError("D must be positive semidefinite")
    report = is_hurwitz(A)
    if not report.is_hurwitz:
        raise UnstableSystemError(report)
    return A, D


def solve_lyapunov(A, D, settings: Settings = DEFAULT_SETTINGS) -> np.ndarray:
    """Steady-state covariance V solving A V + V A^T = -D.

    The equation is vectorized column-major into
    (I (x) A + A (x) I) vec(V) = -vec(D) and solved densely, which is
    exact to round-off for the 8x8 systems used here. One step of
    iterative refinement is applied if the residual misses the target.

    Raises
    ------
    UnstableSystemError
        If A is not Hurwitz; the exception carries the StabilityReport.
    """
    A, D = _check_pair(A, D, settings)
    return _solve_kronecker(A, D, settings)


def _solve_kronecker(A: np.ndarray, D: np.ndarray, settings: Settings) -> np.ndarray:
    """Kronecker solve for an already validated (A, D) pair."""
    n = A.shape[0]
    eye = np.eye(n)
    # I (x) A + A (x) I, built by broadcasting
    K = (eye[:, None, :, None] * A[None, :, None, :] + A[:, None, :, None] * eye[None, :, None, :]).reshape(n * n, n * n)
    rhs = -D.reshape(-1, order="F")
    x = np.linalg.solve(K, rhs)
    V = x.reshape(n, n, order="F")
    V = 0.5 * (V + V.T)
    if lyapunov_residual(A, V, D) >= settings.residual_tol:
        R = A @ V + V @ A.T + D
        dx = np.linalg.solve(K, -R.reshape(-1, order="F"))
        V = V + dx.reshape(n, n, order="F")
        V = 0.5 * (V + V.T)
        res = lyapunov_residual(A, V, D)
        if res >= settings.residual_tol:
            raise ConvergenceError(f"Lyapunov residual {res:.2e} above {settings.residual_tol:.0e}")
    return V


def solve_lyapunov_by_integration(
    A, D, tol: float = 1e-12, max_steps: int = 500_000, settings: Settings = DEFAULT_SETTINGS
) -> np.ndarray:
    """Steady state of dV/dt = A V + V A^T + D reached by time integration from V = 0.

    Integration proceeds in windows of growing length until the relative
    derivative norm ||dV/dt||_F / ||D||_F drops below ``tol``. Time is
    rescaled by ||A||_F so the same defaults work for any frequency unit.
    Explicit Runge-Kutta steps leave the equilibrium fixed, so the limit
    is the exact steady state up to round-off.
    """
    A, D = _check_pair(A, D, settings)
    n = A.shape[0]
    d_norm = np.linalg.norm(D)
    if d_norm == 0.0:
        return np.zeros((n, n))
    rate = np.linalg.norm(A)
    As, Ds = A / rate, D / rate

    def rhs(_t, v):
        V = v.reshape(n, n)
        return (As @ V + V @ As.T + Ds).ravel()

    v = np.zeros(n * n)
    window = 10.0
    steps = 0
    while True:
        sol = solve_ivp(rhs, (0.0, window), v, method="DOP853", rtol=1e-12, atol=1e-15 * d_norm / rate)
        if not sol.success:
            raise ConvergenceError(f"integrator failed: {sol.message}")
        steps += sol.t.size - 1
        v = sol.y[:, -1]
        V = v.reshape(n, n)
        deriv = np.linalg.norm(A @ V + V @ A.T + D) / d_norm
        if deriv < tol:
            break
        if steps > max_steps:
            raise ConvergenceError(
                f"no convergence after {steps} steps (derivative norm {deriv:.2e})"
            )
        window = min(2.0 * window, 1e4)
    return 0.5 * (V + V.T)


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic spectrum (ascending, one value per mode)."""
    V = _as_square(V, "V")
    if V.shape[0] % 2:
        raise InvalidInputError("covariance matrix must have even dimension")
    n_modes = V.shape[0] // 2
    nu = np.abs(np.linalg.eigvals(1j * symplectic_form(n_modes) @ V))
    return np.sort(nu)[::2]


def is_physical(V, settings: Settings = DEFAULT_SETTINGS) -> bool:
    V = _as_square(V, "V")
    scale = max(np.abs(V).max(), np.finfo(float).tiny)
    if np.abs(V - V.T).max() > settings.symmetry_tol * scale:
        return False
    return bool(symplectic_eigenvalues(V).min() >= 0.5 - settings.physicality_slack)


def two_mode_block(V, mode_i: int, mode_j: int) -> TwoModeBlock:
    """Reduced covariance matrix of modes ``mode_i`` and ``mode_j`` (0-based),
    keeping the order (x_i, y_i, x_j, y_j)."""
    V = _as_square(V, "V")
    n_modes = V.shape[0] // 2
    for m in (mode_i, mode_j):
        if not isinstance(m, (int, np.integer)) or not 0 <= m < n_modes:
            raise InvalidInputError(f"mode index {m!r} out of range for {n_modes} modes")
    if mode_i == mode_j:
        raise InvalidInputError("mode indices must differ")
    idx = [2 * mode_i, 2 * mode_i + 1, 2 * mode_j, 2 * mode_j + 1]
    return TwoModeBlock.from_matrix(V[np.ix_(idx, idx)])


def log_negativity(block: TwoModeBlock, settings: Settings = DEFAULT_SETTINGS) -> tuple[float, float]:
    """Logarithmic negativity of a two-mode Gaussian state.

    Returns ``(E_N, nu_minus)`` with E_N = max(0, -ln 2 nu_minus), where
    nu_minus is the smaller symplectic eigenvalue of the partially
    transposed state. In closed form

        nu_minus^2 = (S - sqrt(S^2 - 4 det V0)) / 2,
        S = det V1 + det V2 - 2 det V12,

    the minus sign on det V12 being the partial transpose. The closed
    form is used to reject non-physical input; the value itself comes
    from the spectrum of i Omega V0^PT, because the square root loses
    half the digits when the two symplectic eigenvalues coincide.
    """
    if not isinstance(block, TwoModeBlock):
        block = TwoModeBlock.from_matrix(block)
    sigma = np.linalg.det(block.V1) + np.linalg.det(block.V2) - 2.0 * np.linalg.det(block.V12)
    disc = sigma * sigma - 4.0 * np.linalg.det(block.matrix)
    if disc < -settings.clamp_tol:
        raise InvalidStateError(f"non-physical two-mode CM (discriminant {disc:.3e})")
    if sigma - np.sqrt(max(disc, 0.0)) <= 0.0:
        raise InvalidStateError("non-physical two-mode CM (nu_minus^2 <= 0)")
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    transposed = flip @ block.matrix @ flip
    nu_minus = float(np.min(np.abs(np.linalg.eigvals(1j * symplectic_form(2) @ transposed))))
    return max(0.0, -float(np.log(2.0 * nu_minus))), nu_minus
