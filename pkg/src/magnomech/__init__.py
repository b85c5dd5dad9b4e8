"""Steady-state magnon-magnon entanglement in a cavity-magnomechanical
system with an intracavity parametric amplifier and magnon Kerr shift."""

from .errors import (
    ConfigError,
    ConvergenceError,
    InvalidInputError,
    InvalidStateError,
    MagnomechError,
    UnstableSystemError,
)
from .gaussian import (
    Settings,
    StabilityReport,
    TwoModeBlock,
    is_hurwitz,
    log_negativity,
    solve_lyapunov,
    solve_lyapunov_by_integration,
    symplectic_eigenvalues,
    two_mode_block,
)
from .model import (
    TWO_PI,
    DriveParams,
    EntanglementResult,
    MeanFieldState,
    PhysicalParams,
    baseline_params,
    build_diffusion,
    build_drift,
    compute_entanglement,
    effective_coupling,
    rabi_frequency,
    steady_state_mean_field,
    thermal_occupation,
)
from .sweep import AxisSpec, OptimizeResult, SweepResult, optimize, stability_region, sweep

__version__ = "0.1.0"
