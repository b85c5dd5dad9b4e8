"""JSON run configuration.

Frequencies, rates, detunings and couplings in the ``params`` block are
ordinary frequencies nu = omega / 2 pi in Hz; ``temperature`` is in kelvin
and ``theta`` in radians. Sweep axes and optimizer bounds use the axis
units of :mod:`magnomech.sweep` (detunings and k as multiples of omega_b).

Example::

    {
      "mode": "sweep",
      "params": {"G_pa": 1e6, "theta": 1.5707963267948966, "delta_1": 8e6},
      "axes": [
        {"parameter": "delta_c", "start": -2, "stop": 2, "points": 101},
        {"parameter": "delta_2", "start": -2, "stop": 2, "points": 101}
      ],
      "output": "map.csv"
    }
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError, InvalidInputError
from .model import TWO_PI, PhysicalParams
from .sweep import SWEEPABLE, AxisSpec

MODES = ("point", "sweep", "optimize", "stability")

# fields of PhysicalParams given in Hz at the config boundary
_HZ_FIELDS = {
    "omega_b", "delta_c", "delta_1", "delta_2", "kappa_c", "kappa_1", "kappa_2", "gamma_b",
    "g_1", "g_2", "G_mb", "G_pa", "kerr_shift_k", "omega_c", "omega_m1", "omega_m2",
}


@dataclass(frozen=True)
class ConfigParams:
    """Model parameters as written in a config file (Hz, K, rad)."""

    omega_b: float = 10e6
    delta_c: float = -9e6
    delta_1: float = 8.5e6
    delta_2: float = -9e6
    kappa_c: float = 1e6
    kappa_1: float = 1e6
    kappa_2: float = 1e6
    gamma_b: float = 100.0
    g_1: float = 3.2e6
    g_2: float = 2.6e6
    G_mb: float = 4.8e6
    G_pa: float = 1e6
    theta: float = 0.0
    kerr_shift_k: float = 0.0
    temperature: float = 0.01
    omega_c: float = 12e9
    omega_m1: float = 12e9
    omega_m2: float = 12e9

    def to_physical(self) -> PhysicalParams:
        values = {
            f.name: getattr(self, f.name) * (TWO_PI if f.name in _HZ_FIELDS else 1.0)
            for f in fields(self)
        }
        return PhysicalParams(**values)


@dataclass(frozen=True)
class FreeParam:
    parameter: str
    lower: float
    upper: float


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: ConfigParams = field(default_factory=ConfigParams)
    axes: tuple[AxisSpec, ...] = ()
    free: tuple[FreeParam, ...] = ()
    grid_points: int = 17
    output_path: str | None = None
    threads: int = 1


_TOP_KEYS = {
    "point": {"mode", "params", "output", "threads"},
    "sweep": {"mode", "params", "axes", "output", "threads"},
    "stability": {"mode", "params", "axes", "output", "threads"},
    "optimize": {"mode", "params", "free", "grid_points", "output", "threads"},
}


class _Source:
    """Raw config text, used to point error messages at a line."""

    def __init__(self, text: str, name: str):
        self.lines = text.splitlines()
        self.name = name

    def line_of(self, key: str | None) -> int:
        if key is not None:
            pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
            for i, line in enumerate(self.lines, 1):
                if pattern.search(line):
                    return i
        return 1

    def error(self, msg: str, key: str | None = None, line: int | None = None) -> ConfigError:
        return ConfigError(f"{self.name}:{line or self.line_of(key)}: {msg}")


def _number(src: _Source, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise src.error(f"{key} must be a number, got {json.dumps(value)}", key)
    value = float(value)
    if not math.isfinite(value):
        raise src.error(f"{key} must be finite", key)
    return value


def _integer(src: _Source, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise src.error(f"{key} must be an integer, got {json.dumps(value)}", key)
    return value


def _object(src: _Source, key: str, value, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise src.error(f"{key} must be a JSON object", key)
    for k in value:
        if k not in allowed:
            raise src.error(f"unknown key {k!r} in {key}", k)
    return value


def _parse_params(src: _Source, raw) -> ConfigParams:
    names = {f.name for f in fields(ConfigParams)}
    raw = _object(src, "params", raw, names)
    params = ConfigParams(**{k: _number(src, k, v) for k, v in raw.items()})
    try:
        params.to_physical()
    except InvalidInputError as exc:
        bad = str(exc).split()[0]
        raise src.error(f"out-of-range value: {exc}", bad if bad in names else "params") from None
    return params


def _parse_axes(src: _Source, raw) -> tuple[AxisSpec, ...]:
    if not isinstance(raw, list) or not 1 <= len(raw) <= 2:
        raise src.error("axes must be a list of one or two axis objects", "axes")
    axes = []
    for item in raw:
        item = _object(src, "axes", item, {"parameter", "start", "stop", "points"})
        missing = {"parameter", "start", "stop", "points"} - item.keys()
        if missing:
            raise src.error(f"axis is missing {sorted(missing)}", "axes")
        if item["parameter"] not in SWEEPABLE:
            raise src.error(f"unknown sweep parameter {item['parameter']!r}", "parameter")
        try:
            axes.append(
                AxisSpec(
                    item["parameter"],
                    _number(src, "start", item["start"]),
                    _number(src, "stop", item["stop"]),
                    _integer(src, "points", item["points"]),
                )
            )
        except ConfigError as exc:
            if str(exc).startswith(src.name + ":"):
                raise
            raise src.error(str(exc), "axes") from None
    for ax in axes:
        _check_range(src, ax.parameter, min(ax.start, ax.stop))
    if len(axes) == 2 and axes[0].parameter == axes[1].parameter:
        raise src.error("sweep axes must differ", "axes")
    return tuple(axes)


def _check_range(src: _Source, parameter: str, lowest: float) -> None:
    if parameter in ("temperature", "G_pa") and lowest < 0:
        raise src.error(f"{parameter} range must be nonnegative", "parameter")


def _parse_free(src: _Source, raw) -> tuple[FreeParam, ...]:
    if not isinstance(raw, list) or not 1 <= len(raw) <= 3:
        raise src.error("free must be a list of one to three parameter objects", "free")
    out = []
    for item in raw:
        item = _object(src, "free", item, {"parameter", "lower", "upper"})
        missing = {"parameter", "lower", "upper"} - item.keys()
        if missing:
            raise src.error(f"free parameter is missing {sorted(missing)}", "free")
        if item["parameter"] not in SWEEPABLE:
            raise src.error(f"unknown free parameter {item['parameter']!r}", "parameter")
        lo, hi = _number(src, "lower", item["lower"]), _number(src, "upper", item["upper"])
        if lo >= hi:
            raise src.error("lower must be below upper", "lower")
        _check_range(src, item["parameter"], lo)
        out.append(FreeParam(item["parameter"], lo, hi))
    if len({f.parameter for f in out}) != len(out):
        raise src.error("free parameters must be distinct", "free")
    return tuple(out)


def parse_config_text(text: str, mode: str | None = None, name: str = "<config>") -> RunConfig:
    """Validate config text. ``mode`` (from the CLI subcommand) wins if the
    file omits one; a conflicting ``mode`` in the file is an error."""
    src = _Source(text, name)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise src.error(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise src.error("config must be a JSON object")
    file_mode = raw.get("mode")
    if file_mode is not None and file_mode not in MODES:
        raise src.error(f"mode must be one of {list(MODES)}", "mode")
    if mode is not None and file_mode is not None and mode != file_mode:
        raise src.error(f"config mode {file_mode!r} does not match command {mode!r}", "mode")
    mode = mode or file_mode
    if mode is None:
        raise src.error("no mode given")
    allowed = _TOP_KEYS[mode]
    for k in raw:
        if k not in allowed:
            raise src.error(f"unknown key {k!r} for mode {mode!r}", k)

    kwargs: dict = {"mode": mode, "params": _parse_params(src, raw.get("params", {}))}
    if mode in ("sweep", "stability"):
        if "axes" not in raw:
            raise src.error(f"mode {mode!r} requires an axes block")
        kwargs["axes"] = _parse_axes(src, raw["axes"])
    if mode == "optimize":
        if "free" not in raw:
            raise src.error("mode 'optimize' requires a free block")
        kwargs["free"] = _parse_free(src, raw["free"])
        if "grid_points" in raw:
            gp = _integer(src, "grid_points", raw["grid_points"])
            if gp < 17:
                raise src.error("grid_points must be at least 17", "grid_points")
            kwargs["grid_points"] = gp
    if "output" in raw:
        if not isinstance(raw["output"], str) or not raw["output"]:
            raise src.error("output must be a non-empty string", "output")
        kwargs["output_path"] = raw["output"]
    if "threads" in raw:
        threads = _integer(src, "threads", raw["threads"])
        if threads < 0:
            raise src.error("threads must be >= 0", "threads")
        kwargs["threads"] = threads
    return RunConfig(**kwargs)


def parse_config(path, mode: str | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}:1: cannot read config: {exc}") from None
    return parse_config_text(text, mode, str(path))


def config_to_dict(config: RunConfig) -> dict:
    out: dict = {"mode": config.mode, "params": asdict(config.params)}
    if config.mode in ("sweep", "stability"):
        out["axes"] = [asdict(ax) for ax in config.axes]
    if config.mode == "optimize":
        out["free"] = [asdict(f) for f in config.free]
        out["grid_points"] = config.grid_points
    if config.output_path is not None:
        out["output"] = config.output_path
    out["threads"] = config.threads
    return out


def write_config(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"
