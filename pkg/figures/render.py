#!/usr/bin/env python3
"""Render the four multi-panel comparison figures from simulator CSV output.

Reads the per-scenario CSV files written by ``cavmol figures --out <dir>``
(header ``t,<method>.<channel>,...``) and draws one curve per
method-channel per panel, with a fixed color per method across all
figures. No physics is recomputed here.

Usage: python figures/render.py --in <dir> --out <dir>
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

METHOD_COLORS = {
    "exact": "tab:blue",
    "qcme1": "tab:orange",
    "qcme2": "m",
    "semiclassical_eeff": "g",
    "semiclassical_ecl": "olive",
}

METHOD_LABELS = {
    "exact": "exact",
    "qcme1": "QCME (1st order)",
    "qcme2": "QCME",
    "semiclassical_eeff": "semiclassical",
    "semiclassical_ecl": "semiclassical (E_cl)",
}

DEFAULT_METHODS = ("exact", "qcme2", "semiclassical_eeff")


class RenderError(RuntimeError):
    pass


@dataclass(frozen=True)
class PanelSpec:
    """One panel: which CSV, which curves, and how to label the axes."""

    csv_name: str
    channel: str
    label: str
    ylabel: str
    methods: tuple[str, ...] = DEFAULT_METHODS

    def columns(self) -> list[str]:
        return [f"{method}.{self.channel}" for method in self.methods]


FIGURES: dict[str, list[PanelSpec]] = {
    "fig1": [
        PanelSpec("fig1A", "pop_e", "A", "excited population"),
        PanelSpec("fig1B", "pop_e", "B", "excited population"),
        PanelSpec("fig1C", "pop_g", "C", "ground population"),
        PanelSpec("fig1D", "pop_g", "D", "ground population"),
    ],
    "fig2": [
        PanelSpec("fig2AC", "pop_g", "A", "ground population"),
        PanelSpec("fig2BD", "pop_g", "B", "ground population"),
        PanelSpec("fig2AC", "coh_re", "C", "Re coherence"),
        PanelSpec("fig2BD", "coh_re", "D", "Re coherence"),
    ],
    "fig3": [
        PanelSpec("fig3A", "pop_g", "A", "ground population"),
        PanelSpec("fig3B", "pop_g", "B", "ground population"),
        PanelSpec("fig3C", "pop_g", "C", "ground population"),
    ],
    "fig4": [
        PanelSpec("fig4A", "pop_g_site1", "A", "site-1 ground population"),
        PanelSpec("fig4B", "pop_g_site1", "B", "site-1 ground population"),
        PanelSpec("fig4C", "pop_g_site1", "C", "site-1 ground population"),
        PanelSpec("fig4D", "pop_g_site1", "D", "site-1 ground population"),
    ],
}


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    if not path.exists():
        raise RenderError(f"missing input file {path}")
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise RenderError(f"{path}: header/data column mismatch")
    return header, data


def render_figure(panels: list[PanelSpec], in_dir: Path, out_path: Path) -> list[tuple[str, int]]:
    """Draw one figure; returns (panel label, curve count) per panel."""
    n = len(panels)
    ncols = 2 if n > 2 else n
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.0 * ncols, 3.2 * nrows), squeeze=False)
    summary = []
    for i, panel in enumerate(panels):
        ax = axes[i // ncols][i % ncols]
        header, data = read_csv(in_dir / f"{panel.csv_name}.csv")
        curves = 0
        for method, column in zip(panel.methods, panel.columns()):
            if column not in header:
                plt.close(fig)
                raise RenderError(
                    f"{panel.csv_name}.csv has no column {column!r} "
                    f"(needed for panel {panel.label})"
                )
            ax.plot(
                data[:, 0],
                data[:, header.index(column)],
                color=METHOD_COLORS[method],
                label=METHOD_LABELS[method],
                linewidth=1.0,
            )
            curves += 1
        ax.set_xlabel("time [1/omega0]")
        ax.set_ylabel(panel.ylabel)
        ax.set_title(f"({panel.label}) {panel.csv_name}", fontsize=10)
        if i == 0:
            ax.legend(fontsize=8)
        summary.append((panel.label, curves))
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_dir", required=True, help="directory with scenario CSVs")
    parser.add_argument("--out", dest="out_dir", required=True, help="directory for images")
    args = parser.parse_args(argv)

    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    try:
        for name, panels in FIGURES.items():
            out_path = out_dir / f"{name}.png"
            summary = render_figure(panels, in_dir, out_path)
            rendered = ", ".join(f"{label}:{count}" for label, count in summary)
            print(f"{out_path} [{rendered}]")
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
