"""Cavity-magnomechanical model: parameters, thermal noise, mean-field
steady state and the linearized drift/diffusion matrices.

All rates and frequencies are angular (rad/s). Quadrature ordering is
(X, Y, x1, y1, x2, y2, q, p), i.e. mode indices cavity=0, magnon1=1,
magnon2=2, mechanics=3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .gaussian import (
    DEFAULT_SETTINGS,
    Settings,
    _solve_kronecker,
    is_hurwitz,
    log_negativity,
    solve_lyapunov,
    two_mode_block,
)

TWO_PI = 2.0 * math.pi

HBAR = 6.62607015e-34 / TWO_PI
K_B = 1.380649e-23
GYROMAGNETIC_GAMMA = TWO_PI * 28e9  # rad/(s T)
SPIN_DENSITY_YIG = 4.22e27  # m^-3

CAVITY, MAGNON1, MAGNON2, MECHANICS = 0, 1, 2, 3


@dataclass(frozen=True)
class PhysicalParams:
    omega_b: float
    delta_c: float
    delta_1: float
    delta_2: float
    kappa_c: float
    kappa_1: float
    kappa_2: float
    gamma_b: float
    g_1: float
    g_2: float
    G_mb: float
    G_pa: float = 0.0
    theta: float = 0.0
    kerr_shift_k: float = 0.0
    temperature: float = 0.0
    omega_c: float = TWO_PI * 12e9
    omega_m1: float = TWO_PI * 12e9
    omega_m2: float = TWO_PI * 12e9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise InvalidInputError(f"{f.name} must be a finite number, got {v!r}")
        for name in ("omega_b", "kappa_c", "kappa_1", "kappa_2", "gamma_b", "omega_c", "omega_m1", "omega_m2"):
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"{name} must be positive")
        for name in ("G_mb", "G_pa", "temperature"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be nonnegative")
        object.__setattr__(self, "theta", math.fmod(self.theta, TWO_PI) % TWO_PI)

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


def baseline_params(**overrides) -> PhysicalParams:
    """Baseline experimental parameter set.

    Detunings default to the optimal working point Delta_c = Delta_2 =
    -0.9 omega_b, Delta_1 = 0.85 omega_b; the PA is on (1 MHz, theta = 0).
    """
    wb = TWO_PI * 10e6
    base = dict(
        omega_b=wb,
        delta_c=-0.9 * wb,
        delta_1=0.85 * wb,
        delta_2=-0.9 * wb,
        kappa_c=TWO_PI * 1e6,
        kappa_1=TWO_PI * 1e6,
        kappa_2=TWO_PI * 1e6,
        gamma_b=TWO_PI * 100.0,
        g_1=TWO_PI * 3.2e6,
        g_2=TWO_PI * 2.6e6,
        G_mb=TWO_PI * 4.8e6,
        G_pa=TWO_PI * 1e6,
        theta=0.0,
        kerr_shift_k=0.0,
        temperature=0.01,
    )
    base.update(overrides)
    return PhysicalParams(**base)


@dataclass(frozen=True)
class DriveParams:
    rabi_omega: float = 0.0
    drive_field_b0: float = 0.0
    single_magnon_g0: float = 0.0
    kerr_K: float = 0.0
    sphere_diameter: float = 250e-6

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise InvalidInputError(f"{f.name} must be finite and nonnegative, got {v!r}")


@dataclass(frozen=True)
class MeanFieldState:
    amp_c: complex
    amp_m1: complex
    amp_m2: complex
    pos_q: float
    residual: float = 0.0
    iterations: int = 0
    # distinct magnon-1 populations |m1|^2 that satisfy the fixed point
    branches: tuple[float, ...] = field(default=(), compare=False)

    @property
    def multistable(self) -> bool:
        return len(self.branches) > 1


@dataclass(frozen=True)
class EntanglementResult:
    stable: bool
    nu_minus: float | None
    E_N: float | None
    max_real_part: float


def thermal_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation 1/(exp(hbar omega / k_B T) - 1)."""
    if not omega > 0:
        raise InvalidInputError(f"omega must be positive, got {omega!r}")
    if T < 0:
        raise InvalidInputError(f"temperature must be nonnegative, got {T!r}")
    if T == 0:
        return 0.0
    x = HBAR * omega / (K_B * T)
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def spin_number(diameter: float) -> float:
    volume = 4.0 / 3.0 * math.pi * (diameter / 2.0) ** 3
    return SPIN_DENSITY_YIG * volume


def rabi_frequency(B0: float, diameter: float) -> float:
    """Drive Rabi frequency (sqrt(5)/4) gamma sqrt(N) B0 of a YIG sphere."""
    if B0 < 0:
        raise InvalidInputError("B0 must be nonnegative")
    if not diameter > 0:
        raise InvalidInputError("diameter must be positive")
    return math.sqrt(5.0) / 4.0 * GYROMAGNETIC_GAMMA * math.sqrt(spin_number(diameter)) * B0


def effective_coupling(mean_field: MeanFieldState, G0: float) -> float:
    """Drive-enhanced magnomechanical coupling sqrt(2) G0 |<m1>|."""
    return math.sqrt(2.0) * G0 * abs(mean_field.amp_m1)


def kerr_shift_from_mean_field(kerr_K: float, amp_m1: complex) -> float:
    """Linearized Kerr shift 2 K |<m1>|^2; optional helper; sweeps take k directly."""
    return 2.0 * kerr_K * abs(amp_m1) ** 2


def build_drift(p: PhysicalParams) -> np.ndarray:
    """8x8 drift matrix of the linearized fluctuation equations."""
    c, s = math.cos(p.theta), math.sin(p.theta)
    G, k = p.G_pa, p.kerr_shift_k
    A = np.zeros((8, 8))
    A[0] = [-p.kappa_c + 2 * G * c, p.delta_c + 2 * G * s, 0, p.g_1, 0, p.g_2, 0, 0]
    A[1] = [-p.delta_c + 2 * G * s, -p.kappa_c - 2 * G * c, -p.g_1, 0, -p.g_2, 0, 0, 0]
    A[2] = [0, p.g_1, -p.kappa_1, p.delta_1 - k, 0, 0, -p.G_mb, 0]
    A[3] = [-p.g_1, 0, -p.delta_1 - k, -p.kappa_1, 0, 0, 0, 0]
    A[4] = [0, p.g_2, 0, 0, -p.kappa_2, p.delta_2, 0, 0]
    A[5] = [-p.g_2, 0, 0, 0, -p.delta_2, -p.kappa_2, 0, 0]
    A[6] = [0, 0, 0, 0, 0, 0, 0, p.omega_b]
    A[7] = [0, 0, 0, p.G_mb, 0, 0, -p.omega_b, -p.gamma_b]
    return A


def build_diffusion(p: PhysicalParams) -> np.ndarray:
    """Diagonal 8x8 noise matrix; the q entry is zero (noise enters via p only)."""
    T = p.temperature
    nc = thermal_occupation(p.omega_c, T)
    n1 = thermal_occupation(p.omega_m1, T)
    n2 = thermal_occupation(p.omega_m2, T)
    nb = thermal_occupation(p.omega_b, T)
    dc = p.kappa_c * (2 * nc + 1)
    d1 = p.kappa_1 * (2 * n1 + 1)
    d2 = p.kappa_2 * (2 * n2 + 1)
    return np.diag([dc, dc, d1, d1, d2, d2, 0.0, p.gamma_b * (2 * nb + 1)])


def steady_state_covariance(p: PhysicalParams, settings: Settings = DEFAULT_SETTINGS) -> np.ndarray:
    """Stationary 8x8 covariance matrix; raises UnstableSystemError if A is not Hurwitz."""
    # rescaling by omega_b leaves V unchanged and keeps entries O(1)
    return solve_lyapunov(build_drift(p) / p.omega_b, build_diffusion(p) / p.omega_b, settings)


def compute_entanglement(p: PhysicalParams, settings: Settings = DEFAULT_SETTINGS) -> EntanglementResult:
    """Magnon-magnon logarithmic negativity at one parameter point.

    Instability is reported through ``stable=False`` rather than raised.
    """
    A = build_drift(p) / p.omega_b
    report = is_hurwitz(A)
    if not report.is_hurwitz:
        return EntanglementResult(False, None, None, report.max_real_part * p.omega_b)
    # D is diagonal and nonnegative by construction and A was just checked
    V = _solve_kronecker(A, build_diffusion(p) / p.omega_b, settings)
    E_N, nu = log_negativity(two_mode_block(V, MAGNON1, MAGNON2), settings)
    return EntanglementResult(True, nu, E_N, report.max_real_part * p.omega_b)


# --- mean field -----------------------------------------------------------


def _linear_amplitudes(p: PhysicalParams, drive: DriveParams, delta_1_eff: float, rabi: float):
    """Solve the stationary equations for (c, m1, m2) at a fixed magnon-1 detuning.

    The PA term couples c to c*, so the system is linear over the reals
    and is solved in (Re, Im) components.
    """
    G2 = 2.0 * p.G_pa * complex(math.cos(p.theta), math.sin(p.theta))
    # complex coefficient rows: sum_k a_k z_k + b_k conj(z_k) + rhs = 0
    a = np.array(
        [
            [-(1j * p.delta_c + p.kappa_c), -1j * p.g_1, -1j * p.g_2],
            [-1j * p.g_1, -(1j * delta_1_eff + p.kappa_1), 0.0],
            [-1j * p.g_2, 0.0, -(1j * p.delta_2 + p.kappa_2)],
        ]
    )
    b = np.zeros((3, 3), dtype=complex)
    b[0, 0] = G2
    rhs = np.array([0.0, rabi, 0.0], dtype=complex)
    # z = x + i y ; a z + b conj(z) = (a + b) x + i (a - b) y
    M = np.zeros((6, 6))
    top, bottom = a + b, 1j * (a - b)
    M[:3, :3], M[:3, 3:] = top.real, bottom.real
    M[3:, :3], M[3:, 3:] = top.imag, bottom.imag
    sol = np.linalg.solve(M, -np.concatenate([rhs.real, rhs.imag]))
    return sol[:3] + 1j * sol[3:]


def _mean_field_detuning(p: PhysicalParams, drive: DriveParams, n1: float) -> float:
    # -i G0 m1 q with q = -G0 n1/omega_b, plus the Kerr term 2 K n1
    return p.delta_1 - drive.single_magnon_g0**2 * n1 / p.omega_b + 2.0 * drive.kerr_K * n1


def mean_field_residual(p: PhysicalParams, drive: DriveParams, state: MeanFieldState) -> float:
    """Largest stationarity-equation residual relative to |Omega|."""
    c, m1, m2, q = state.amp_c, state.amp_m1, state.amp_m2, state.pos_q
    G0, K, rabi = drive.single_magnon_g0, drive.kerr_K, drive.rabi_omega
    G2 = 2.0 * p.G_pa * complex(math.cos(p.theta), math.sin(p.theta))
    n1 = abs(m1) ** 2
    eqs = [
        -(1j * p.delta_c + p.kappa_c) * c - 1j * (p.g_1 * m1 + p.g_2 * m2) + G2 * c.conjugate(),
        -(1j * p.delta_1 + p.kappa_1) * m1 - 1j * p.g_1 * c - 1j * G0 * m1 * q + rabi - 2j * K * n1 * m1,
        -(1j * p.delta_2 + p.kappa_2) * m2 - 1j * p.g_2 * c,
        0.0,  # q' = omega_b p with p = 0
        -p.omega_b * q - G0 * n1,
    ]
    scale = rabi if rabi > 0 else 1.0
    return max(abs(e) for e in eqs) / scale


def _population_map(p, drive, rabi):
    def f(n1):
        amps = _linear_amplitudes(p, drive, _mean_field_detuning(p, drive, n1), rabi)
        return abs(amps[1]) ** 2 - n1

    return f


def _population_bound(p: PhysicalParams, drive: DriveParams, rabi: float) -> float:
    """Upper bound on any self-consistent |m1|^2: the peak of |m1|^2 over all detunings."""
    scale = p.kappa_1 + abs(p.delta_1) + abs(p.g_1) + abs(p.g_2) + p.G_pa + abs(p.delta_c) + abs(p.delta_2)
    deltas = np.concatenate([-np.geomspace(1e3 * scale, 1e-3 * p.kappa_1, 600), [0.0],
                             np.geomspace(1e-3 * p.kappa_1, 1e3 * scale, 600)])
    peak = max(abs(_linear_amplitudes(p, drive, d, rabi)[1]) ** 2 for d in deltas)
    return 2.0 * peak


def _roots(p: PhysicalParams, drive: DriveParams, rabi: float, points: int = 2000,
           n_max: float | None = None) -> tuple[float, ...]:
    """All self-consistent populations n1 = |m1(n1)|^2, by sign changes and bisection."""
    f = _population_map(p, drive, rabi)
    if n_max is None:
        n_max = _population_bound(p, drive, rabi)
    grid = np.concatenate([[0.0], np.geomspace(n_max * 1e-12, n_max, points)])
    vals = [f(n) for n in grid]
    roots = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if flo == 0.0:
            roots.append(float(lo))
        elif flo * fhi < 0:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                fm = f(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(float(0.5 * (lo + hi)))
    return tuple(roots)


def _iterate(p, drive, rabi, m1, relaxation, tol, max_iter):
    """Damped fixed-point iteration on m1; returns (amps, iterations)."""
    for it in range(1, max_iter + 1):
        amps = _linear_amplitudes(p, drive, _mean_field_detuning(p, drive, abs(m1) ** 2), rabi)
        new = (1.0 - relaxation) * m1 + relaxation * amps[1]
        if abs(new - m1) <= tol * max(abs(new), 1e-300):
            amps = _linear_amplitudes(p, drive, _mean_field_detuning(p, drive, abs(new) ** 2), rabi)
            return amps, it
        m1 = new
    raise ConvergenceError(f"mean-field iteration did not converge in {max_iter} steps")


def _continuation(p, drive, ramp_steps):
    """Follow the self-consistent population while the drive is ramped up from zero."""
    n = 0.0
    # |m1|^2 is quadratic in the drive, so one bound serves the whole ramp
    n_max = _population_bound(p, drive, drive.rabi_omega)
    for step in range(1, ramp_steps + 1):
        rabi = drive.rabi_omega * step / ramp_steps
        roots = _roots(p, drive, rabi, points=400, n_max=n_max * (step / ramp_steps) ** 2)
        if not roots:
            raise ConvergenceError(f"no mean-field solution at ramp step {step}")
        # nearest root above the previous population; past a turning point jump to the next branch
        above = [r for r in roots if r >= n * (1 - 1e-9)]
        n = min(above) if above else min(roots, key=lambda r: abs(r - n))
    return n


def steady_state_mean_field(
    p: PhysicalParams,
    drive: DriveParams,
    relaxation: float = 0.5,
    max_iter: int = 100_000,
    ramp_steps: int = 100,
) -> MeanFieldState:
    """Classical fixed point of the driven, damped mode equations.

    The mechanics sits at q = -G0 |m1|^2 / omega_b, and the mean fields
    depend on |m1|^2 only through the shifted magnon-1 detuning, so all
    fixed points are roots of a scalar map. These are listed in
    ``branches``. With a single root, damped iteration from the linear
    (K = 0, G0 = 0) solution is used. Otherwise, or if the iteration
    stalls, the branch reached by ramping the drive up from zero is
    returned.
    """
    rabi = drive.rabi_omega
    if rabi == 0:
        return MeanFieldState(0j, 0j, 0j, 0.0, 0.0, 0, (0.0,))
    lin = _linear_amplitudes(p, drive, p.delta_1, rabi)
    if drive.single_magnon_g0 == 0 and drive.kerr_K == 0:
        branches: tuple[float, ...] = (abs(lin[1]) ** 2,)
    else:
        branches = _roots(p, drive, rabi)
    amps, iterations = None, 0
    if len(branches) <= 1:
        try:
            amps, iterations = _iterate(p, drive, rabi, lin[1], relaxation, 1e-13, max_iter)
        except ConvergenceError:
            amps = None
    if amps is None:
        n = _continuation(p, drive, ramp_steps)
        amps = _linear_amplitudes(p, drive, _mean_field_detuning(p, drive, n), rabi)
        iterations = ramp_steps
    c, m1, m2 = (complex(z) for z in amps)
    q = -drive.single_magnon_g0 * abs(m1) ** 2 / p.omega_b
    state = MeanFieldState(c, m1, m2, q, 0.0, iterations, branches)
    res = mean_field_residual(p, drive, state)
    if res > 1e-9:
        raise ConvergenceError(f"mean-field residual {res:.2e} above 1e-9")
    return replace(state, residual=res)
