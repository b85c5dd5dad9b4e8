"""Grid sweeps, stability maps and local optimization of the magnon entanglement."""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError
from .gaussian import DEFAULT_SETTINGS, Settings, is_hurwitz
from .model import TWO_PI, PhysicalParams, build_drift, compute_entanglement

# external unit of each sweepable field, and the CSV column it is written to
SWEEPABLE = {
    "delta_c": ("omega_b", "delta_c_over_wb"),
    "delta_1": ("omega_b", "delta_1_over_wb"),
    "delta_2": ("omega_b", "delta_2_over_wb"),
    "kerr_shift_k": ("omega_b", "k_over_wb"),
    "theta": ("rad", "theta"),
    "G_pa": ("hz", "G_pa_hz"),
    "temperature": ("kelvin", "temperature_k"),
}


def to_internal(base: PhysicalParams, name: str, value: float) -> float:
    """Convert an external axis value to the PhysicalParams field value."""
    unit = SWEEPABLE[name][0]
    if unit == "omega_b":
        return value * base.omega_b
    if unit == "hz":
        return value * TWO_PI
    return value


def to_external(params: PhysicalParams, name: str) -> float:
    unit = SWEEPABLE[name][0]
    value = getattr(params, name)
    if unit == "omega_b":
        return value / params.omega_b
    if unit == "hz":
        return value / TWO_PI
    return value


def override(base: PhysicalParams, names, values) -> PhysicalParams:
    return base.with_(**{n: to_internal(base, n, v) for n, v in zip(names, values)})


@dataclass(frozen=True)
class AxisSpec:
    parameter: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ConfigError(
                f"unknown sweep parameter {self.parameter!r}; expected one of {sorted(SWEEPABLE)}"
            )
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.start == self.stop:
            raise ConfigError(f"axis {self.parameter}: need finite start != stop")
        if isinstance(self.points, bool) or not isinstance(self.points, int) or self.points < 2:
            raise ConfigError(f"axis {self.parameter}: points must be an integer >= 2")

    @property
    def column(self) -> str:
        return SWEEPABLE[self.parameter][1]

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class SweepResult:
    axes: tuple[AxisSpec, ...]
    values: np.ndarray
    stability: np.ndarray
    nu_minus: np.ndarray | None = None
    max_value: float = 0.0
    argmax: tuple[float, ...] | None = None

    def coordinates(self):
        """Yield (grid index, axis coordinates) in row-major order, first axis outer."""
        grids = [ax.values() for ax in self.axes]
        for idx in itertools.product(*(range(ax.points) for ax in self.axes)):
            yield idx, tuple(float(g[i]) for g, i in zip(grids, idx))

    def entangled_area(self, threshold: float = 0.0) -> int:
        """Number of grid cells with E_N above ``threshold``."""
        return int(np.count_nonzero(self.values > threshold))


@dataclass
class OptimizeResult:
    best_params: PhysicalParams
    best_value: float
    evaluations: int
    free: tuple[str, ...] = ()
    best_coords: tuple[float, ...] = ()
    trace: list[tuple[tuple[float, ...], float]] = field(default_factory=list, repr=False)


def _check_axes(axes) -> tuple[AxisSpec, ...]:
    if isinstance(axes, AxisSpec):
        axes = (axes,)
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ConfigError("a sweep takes one or two axes")
    if len(axes) == 2 and axes[0].parameter == axes[1].parameter:
        raise ConfigError("sweep axes must differ")
    return axes


def _workers(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, threads)


def _grid_map(fn, items, threads: int):
    workers = _workers(threads)
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (8 * workers))))


def sweep(base: PhysicalParams, axes, threads: int = 1, settings: Settings = DEFAULT_SETTINGS) -> SweepResult:
    """Evaluate the magnon-magnon E_N on a 1D or 2D grid.

    Unstable points are stored with E_N = 0 and stability False.
    Cells are written by index, so the result does not depend on
    ``threads``.
    """
    axes = _check_axes(axes)
    names = [ax.parameter for ax in axes]
    shape = tuple(ax.points for ax in axes)
    result = SweepResult(axes, np.zeros(shape), np.zeros(shape, dtype=bool), np.full(shape, np.nan))
    cells = list(result.coordinates())

    def evaluate(cell):
        return compute_entanglement(override(base, names, cell[1]), settings)

    for (idx, _), r in zip(cells, _grid_map(evaluate, cells, threads)):
        result.stability[idx] = r.stable
        if r.stable:
            result.values[idx] = r.E_N
            result.nu_minus[idx] = r.nu_minus
    if result.stability.any():
        masked = np.where(result.stability, result.values, -np.inf)
        flat = int(np.argmax(masked))
        best = np.unravel_index(flat, shape)
        result.max_value = float(result.values[best])
        result.argmax = tuple(float(ax.values()[i]) for ax, i in zip(axes, best))
    return result


def stability_region(base: PhysicalParams, axes, threads: int = 1) -> SweepResult:
    """Hurwitz test only, on the same grid a sweep would use."""
    axes = _check_axes(axes)
    names = [ax.parameter for ax in axes]
    shape = tuple(ax.points for ax in axes)
    result = SweepResult(axes, np.zeros(shape), np.zeros(shape, dtype=bool))
    cells = list(result.coordinates())

    def evaluate(cell):
        return is_hurwitz(build_drift(override(base, names, cell[1]))).is_hurwitz

    for (idx, _), ok in zip(cells, _grid_map(evaluate, cells, threads)):
        result.stability[idx] = ok
    return result


def optimize(
    base: PhysicalParams,
    free,
    bounds,
    grid_points: int = 17,
    threads: int = 1,
    settings: Settings = DEFAULT_SETTINGS,
    xatol: float = 1e-6,
    fatol: float = 1e-10,
) -> OptimizeResult:
    """Maximize E_N over 1-3 parameters: coarse grid, then bounded Nelder-Mead.

    ``bounds`` holds (lower, upper) pairs in the external units of each
    parameter (detunings and k in units of omega_b). The simplex starts at
    the best grid cell with edges one grid spacing long, pointing inwards.
    """
    free = tuple(free)
    bounds = [tuple(map(float, b)) for b in bounds]
    if not 1 <= len(free) <= 3:
        raise ConfigError("optimize takes 1 to 3 free parameters")
    if len(bounds) != len(free):
        raise ConfigError("one (lower, upper) bound per free parameter is required")
    for name, (lo, hi) in zip(free, bounds):
        if name not in SWEEPABLE:
            raise ConfigError(f"unknown free parameter {name!r}")
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ConfigError(f"bounds for {name} must be finite with lower < upper")
    if len(set(free)) != len(free):
        raise ConfigError("free parameters must be distinct")
    if grid_points < 17:
        raise ConfigError("grid_points must be at least 17")

    trace: list[tuple[tuple[float, ...], float]] = []

    def score(x) -> float:
        r = compute_entanglement(override(base, free, x), settings)
        return r.E_N if r.stable else 0.0

    grids = [np.linspace(lo, hi, grid_points) for lo, hi in bounds]
    cells = [tuple(float(v) for v in c) for c in itertools.product(*grids)]
    for c, v in zip(cells, _grid_map(score, cells, threads)):
        trace.append((c, v))
    start = max(trace, key=lambda t: t[1])[0]

    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    step = (hi - lo) / (grid_points - 1)
    x0 = np.array(start)
    simplex = [x0]
    for i in range(len(free)):
        v = x0.copy()
        v[i] = v[i] + step[i] if v[i] + step[i] <= hi[i] else v[i] - step[i]
        simplex.append(v)

    def objective(x):
        x = tuple(float(v) for v in np.clip(x, lo, hi))
        value = score(x)
        trace.append((x, value))
        return -value

    minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(lo, hi)),
        options={"initial_simplex": np.array(simplex), "xatol": xatol, "fatol": fatol, "maxiter": 2000},
    )
    best_coords, best_value = max(trace, key=lambda t: t[1])
    return OptimizeResult(
        best_params=override(base, free, best_coords),
        best_value=best_value,
        evaluations=len(trace),
        free=free,
        best_coords=best_coords,
        trace=trace,
    )
