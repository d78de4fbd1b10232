"""Figure assembly from validated CSV inputs.

Layouts follow the scenario conventions: the closed-system scenarios
(fig2, fig4) get one population panel per rapidity value in a 2-column
grid, the dissipative time-series scenario (fig5) gets fidelity panels,
and the sweep scenario (fig6) is a single heatmap of peak fidelity over
the two decay rates.
"""

import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import Grid, SchemaError, TimeSeries, load_grid, load_timeseries

SCENARIOS = ("fig2", "fig4", "fig5", "fig6")
PANEL_TAGS = "abcdefghij"


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: scenario, validated input files, output image."""

    scenario: str
    csv_paths: tuple
    out_path: Path
    title: str

    @classmethod
    def discover(cls, scenario: str, in_dir, out_dir) -> "FigureSpec":
        """Locate a scenario's CSVs in a directory by naming convention."""
        if scenario not in SCENARIOS:
            raise SchemaError(f"unknown scenario {scenario!r}, expected one of {SCENARIOS}")
        in_dir = Path(in_dir)
        out_path = Path(out_dir) / f"{scenario}.png"
        if scenario == "fig6":
            paths = [in_dir / "fig6_grid.csv"]
            if not paths[0].exists():
                raise SchemaError(f"{paths[0]}: no such file")
            title = "Peak transfer fidelity vs decay rates"
        else:
            pattern = re.compile(rf"{scenario}_v([0-9.]+)\.csv$")
            matches = []
            for path in in_dir.glob(f"{scenario}_v*.csv"):
                m = pattern.search(path.name)
                if m:
                    matches.append((float(m.group(1)), path))
            if not matches:
                raise SchemaError(f"no {scenario}_v*.csv files in {in_dir}")
            paths = [path for _, path in sorted(matches)]
            titles = {
                "fig2": "Adiabatic population transfer",
                "fig4": "Counter-diabatic population transfer",
                "fig5": "Transfer fidelity under dissipation",
            }
            title = titles[scenario]
        return cls(scenario=scenario, csv_paths=tuple(paths), out_path=out_path, title=title)


def _panel_v(path: Path) -> str:
    m = re.search(r"_v([0-9.]+)\.csv$", path.name)
    return m.group(1) if m else "?"


def _draw_populations(ax, series: TimeSeries, tag: str, v_label: str):
    t = series.column("t")
    ax.plot(t, series.column("p_phi1"), label=r"$P_{\phi_1}$", lw=1.2)
    ax.plot(t, series.column("p_phi2"), label=r"$P_{\phi_2}$", lw=1.2)
    ax.plot(t, series.column("p_phi3"), label=r"$P_{\phi_3}$", lw=1.2)
    ax.set_xlabel("t (ns)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"({tag}) v = {v_label}")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)


def _draw_fidelity(ax, series: TimeSeries, tag: str, v_label: str):
    t = series.column("t")
    ax.plot(t, series.column("fidelity"), color="tab:red", lw=1.4)
    ax.set_xlabel("t (ns)")
    ax.set_ylabel("fidelity")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"({tag}) v = {v_label}")
    ax.grid(True, alpha=0.3)


def _grid_surface(grid: Grid):
    kappas = np.unique(grid.kappa)
    gammas = np.unique(grid.gamma_q)
    if len(kappas) * len(gammas) != grid.n_cells:
        raise SchemaError(f"{grid.path}: rows do not form a complete rectangular grid")
    surface = np.full((len(gammas), len(kappas)), np.nan)
    for k, g, f in zip(grid.kappa, grid.gamma_q, grid.peak_fidelity):
        surface[np.searchsorted(gammas, g), np.searchsorted(kappas, k)] = f
    return kappas, gammas, surface


def render(spec: FigureSpec) -> dict:
    """Validate inputs, draw the figure, write the image.

    Inputs are read-only and rendering is idempotent; returns metadata
    (panel count, heatmap cell count, image path and pixel size) so
    callers can check the layout contract.  All inputs are validated
    before anything is drawn, so no image is emitted on schema errors.
    """
    if spec.scenario == "fig6":
        grid = load_grid(spec.csv_paths[0])
        kappas, gammas, surface = _grid_surface(grid)
        fig, ax = plt.subplots(figsize=(5.4, 4.2))
        mesh = ax.pcolormesh(kappas, gammas, surface, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="peak fidelity")
        ax.set_xlabel(r"$\kappa$ (rad/ns)")
        ax.set_ylabel(r"$\Gamma$ (rad/ns)")
        panels, cells = 1, grid.n_cells
    else:
        series = [load_timeseries(path) for path in spec.csv_paths]
        if spec.scenario == "fig5":
            for one in series:
                if not one.has_fidelity:
                    raise SchemaError(f"{one.path}: missing column 'fidelity'")
        n = len(series)
        ncols = 2 if n > 1 else 1
        nrows = (n + ncols - 1) // ncols
        fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows),
                                 squeeze=False)
        draw = _draw_fidelity if spec.scenario == "fig5" else _draw_populations
        for i, one in enumerate(series):
            ax = axes[i // ncols][i % ncols]
            draw(ax, one, PANEL_TAGS[i], _panel_v(one.path))
        for j in range(len(series), nrows * ncols):
            axes[j // ncols][j % ncols].set_axis_off()
        panels, cells = n, None

    fig.suptitle(spec.title)
    fig.tight_layout(rect=(0.0, 0.0, 1.0, 0.96))
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=150)
    width, height = fig.canvas.get_width_height()
    plt.close(fig)
    meta = {
        "scenario": spec.scenario,
        "panels": panels,
        "image": str(spec.out_path),
        "width": width,
        "height": height,
    }
    if cells is not None:
        meta["cells"] = cells
    return meta
