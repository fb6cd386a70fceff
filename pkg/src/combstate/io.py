"""CSV / JSON / SVG output with byte-stable formatting."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .spectral import FrequencyGrid, SpectralDensity

SIG_DIGITS = 12


def fmt(x: float) -> str:
    """Fixed-point decimal with 12 significant digits, trailing zeros trimmed."""
    return np.format_float_positional(float(x), precision=SIG_DIGITS, unique=False, fractional=False, trim="-")


def write_csv(path: str | Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    n = {c.size for c in cols}
    if len(n) != 1:
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    lines.extend(",".join(fmt(c[i]) for c in cols) for i in range(cols[0].size))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_density_csv(path: str | Path, sd: SpectralDensity) -> Path:
    return write_csv(path, ["nu", "S"], [sd.nu, sd.values])


def read_density_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def density_from_csv(path: str | Path, normalized: bool = False) -> SpectralDensity:
    """Load a ``nu,S`` file back onto a uniform grid."""
    nu, s = read_density_csv(path)
    if nu.size < 2:
        raise ValueError(f"{path}: need at least two rows")
    step = (nu[-1] - nu[0]) / (nu.size - 1)
    grid = FrequencyGrid(float(nu[0]), float(step), int(nu.size))
    if not np.allclose(grid.nu, nu, rtol=0, atol=1e-6 * step):
        raise ValueError(f"{path}: frequency column is not uniformly spaced")
    return SpectralDensity(grid, s, normalized=normalized)


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_line_plot(path: str | Path, x, curves: Sequence[tuple], xlabel: str = "", ylabel: str = "") -> Path:
    """Minimal SVG line plot. ``curves`` holds ``(y, label, style)`` tuples.

    Metadata dates and element ids are pinned so reruns give identical bytes.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "combstate", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4))
        for y, label, style in curves:
            ax.plot(x, y, style, label=label, lw=1.0)
        ax.set_xlim(float(np.min(x)), float(np.max(x)))
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend(loc="upper right", frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
