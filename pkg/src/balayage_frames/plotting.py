"""Figures for experiment tables.

Each run gets a PNG rendered with the Agg backend and a standalone script
that redraws it from the CSV, so figures can be restyled without rerunning.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# experiment: (x column, y columns, log-y)
LAYOUT = {
    "frame-bounds-sweep": ("jitter", ["A", "B"], False),
    "balayage-curve": ("separation", ["residual"], True),
    "stft-roundtrip": ("trial", ["moyal_error", "roundtrip_error"], True),
    "semidiscrete-check": ("trial", ["energy", "upper_bound"], False),
    "gabor-sweep": ("ab_product_or_jitter", ["A", "B", "C_constant"], False),
    "reconstruct": ("method", ["relative_error"], True),
}


def _column(table, name):
    i = table.columns.index(name)
    return [row[i] for row in table.rows]


def render(experiment: str, table, path) -> Path:
    """Draw the table's main series to ``path`` and return it."""
    xcol, ycols, logy = LAYOUT[experiment]
    xs = _column(table, xcol)
    categorical = any(isinstance(x, str) for x in xs)
    pos = np.arange(len(xs)) if categorical else np.asarray(xs, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    for y in ycols:
        vals = np.asarray(_column(table, y), dtype=float)
        if logy:
            vals = np.maximum(np.abs(vals), 1e-300)
        ax.plot(pos, vals, marker="o", label=y)
    if categorical:
        ax.set_xticks(pos, [str(x) for x in xs])
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xcol)
    ax.set_title(experiment)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


_SCRIPT = '''"""Redraw {experiment} from {csv_name}."""
import csv
import sys

import matplotlib.pyplot as plt

with open({csv_name!r}) as fh:
    rows = list(csv.DictReader(fh))
xs = [r[{xcol!r}] for r in rows]
try:
    xs = [float(x) for x in xs]
except ValueError:
    pass
for col in {ycols!r}:
    ys = [abs(float(r[col])) if {logy!r} else float(r[col]) for r in rows]
    plt.plot(xs, ys, marker="o", label=col)
if {logy!r}:
    plt.yscale("log")
plt.xlabel({xcol!r})
plt.title({experiment!r})
plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else {png_name!r})
'''


def write_plot_script(experiment: str, csv_path, path) -> Path:
    xcol, ycols, logy = LAYOUT[experiment]
    csv_path, path = Path(csv_path), Path(path)
    path.write_text(
        _SCRIPT.format(experiment=experiment, csv_name=csv_path.name, xcol=xcol, ycols=ycols, logy=logy,
                       png_name=csv_path.with_suffix(".png").name),
        encoding="utf-8",
    )
    return path
