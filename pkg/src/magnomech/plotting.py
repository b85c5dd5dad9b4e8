"""Generate standalone matplotlib scripts for sweep CSV files."""
from __future__ import annotations

import csv
import os
from pathlib import Path

from .errors import ConfigError
from .sweep import SWEEPABLE

RESULT_COLUMNS = ["stable", "nu_minus", "E_N"]

AXIS_LABELS = {
    "delta_c_over_wb": r"$\Delta_c/\omega_b$",
    "delta_1_over_wb": r"$\Delta_1/\omega_b$",
    "delta_2_over_wb": r"$\Delta_2/\omega_b$",
    "k_over_wb": r"$k/\omega_b$",
    "theta": r"$\theta$ (rad)",
    "G_pa_hz": r"$G/2\pi$ (Hz)",
    "temperature_k": r"$T$ (K)",
}
assert set(AXIS_LABELS) == {col for _, col in SWEEPABLE.values()}

_HEADER = '''#!/usr/bin/env python3
"""Plot {csv_name} (written by `magnomech plot`)."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

CSV = Path(__file__).resolve().parent / {rel!r}
OUT = CSV.with_suffix(".png")

with CSV.open(newline="") as fh:
    rows = list(csv.DictReader(fh))
'''

_HEATMAP = '''
xs = np.array(sorted({{float(r[{x!r}]) for r in rows}}))
ys = np.array(sorted({{float(r[{y!r}]) for r in rows}}))
grid = np.zeros((ys.size, xs.size))
for r in rows:
    i = np.searchsorted(ys, float(r[{y!r}]))
    j = np.searchsorted(xs, float(r[{x!r}]))
    grid[i, j] = float(r["E_N"])

fig, ax = plt.subplots(figsize=(5, 4))
if rows:
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$E_{{m_1 m_2}}$")
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
fig.tight_layout()
fig.savefig(OUT, dpi=150)
'''

_CURVE = '''
xs = np.array([float(r[{x!r}]) for r in rows])
es = np.array([float(r["E_N"]) for r in rows])

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(xs, es, "-", color="tab:blue")
ax.set_xlabel({xlabel!r})
ax.set_ylabel(r"$E_{{m_1 m_2}}$")
ax.set_ylim(bottom=0)
fig.tight_layout()
fig.savefig(OUT, dpi=150)
'''


def read_header(csv_path) -> list[str]:
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
    except OSError as exc:
        raise ConfigError(f"{csv_path}:1: cannot read CSV: {exc}") from None
    if not header:
        raise ConfigError(f"{csv_path}:1: missing CSV header")
    return header


def emit_plot_script(csv_path, kind: str, script_path=None) -> Path:
    """Write a matplotlib script for ``csv_path`` and return its path.

    ``kind`` is ``heatmap`` (two axis columns) or ``curve`` (one). The
    script refers to the CSV relative to its own location.
    """
    csv_path = Path(csv_path)
    n_axes = {"heatmap": 2, "curve": 1}.get(kind)
    if n_axes is None:
        raise ConfigError(f"unknown plot kind {kind!r}")
    header = read_header(csv_path)
    axes = header[:n_axes]
    if header[n_axes:] != RESULT_COLUMNS or len(header) != n_axes + 3 or not all(
        a in AXIS_LABELS for a in axes
    ):
        raise ConfigError(f"{csv_path}:1: header {','.join(header)!r} does not fit a {kind} plot")
    script_path = Path(script_path) if script_path else csv_path.with_name(f"plot_{csv_path.stem}.py")
    rel = Path(os.path.relpath(csv_path.resolve(), script_path.resolve().parent)).as_posix()
    text = _HEADER.format(csv_name=csv_path.name, rel=rel)
    if kind == "heatmap":
        text += _HEATMAP.format(x=axes[0], y=axes[1], xlabel=AXIS_LABELS[axes[0]], ylabel=AXIS_LABELS[axes[1]])
    else:
        text += _CURVE.format(x=axes[0], xlabel=AXIS_LABELS[axes[0]])
    with open(script_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return script_path
