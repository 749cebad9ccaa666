"""Figure rendering for the report paths of the CLI.

Every function takes plain data arrays and writes one file; the delimited
output stays the canonical result, figures are a convenience view of the
same numbers.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_FIGSIZE = (4.8, 3.6)
_DPI = 160


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_state_matrix(rho: np.ndarray, path: str, title: str = "steady state") -> None:
    """Magnitude heatmap of a density matrix with entry annotations."""
    rho = np.asarray(rho)
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    im = ax.imshow(np.abs(rho), cmap="viridis", vmin=0.0)
    for i in range(rho.shape[0]):
        for j in range(rho.shape[1]):
            if abs(rho[i, j]) > 5e-4:
                ax.text(j, i, f"{abs(rho[i, j]):.3f}", ha="center", va="center",
                        color="w", fontsize=7)
    ax.set_title(title)
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    fig.colorbar(im, ax=ax, label=r"$|\rho_{ij}|$")
    _save(fig, path)


def plot_cmax_map(z_values: np.ndarray, c_grid: np.ndarray, path: str,
                  p: float | None = None) -> None:
    """Heatmap of maximal concurrence over the (z1, z2) plane."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    im = ax.pcolormesh(z_values, z_values, c_grid.T, cmap="inferno", shading="nearest")
    ax.set_xlabel(r"$z_1$")
    ax.set_ylabel(r"$z_2$")
    title = r"$C_\mathrm{max}$" + (f"  (p = {p:g})" if p is not None else "")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    _save(fig, path)


def plot_cq_region(q_abs: np.ndarray, conc: np.ndarray, path: str,
                   hull_centers: np.ndarray | None = None,
                   hull_lower: np.ndarray | None = None,
                   hull_upper: np.ndarray | None = None,
                   overhang: tuple[float, float] | None = None,
                   label: str = "") -> None:
    """Scatter of the sampled (|Q_dot|, C) cloud with hull overlays."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.scatter(q_abs, conc, s=2.0, alpha=0.25, linewidths=0, color="#2b8cbe",
               rasterized=True)
    if hull_centers is not None:
        if hull_upper is not None:
            ax.plot(hull_centers, hull_upper, "k--", lw=1.0, label="upper hull")
        if hull_lower is not None:
            ax.plot(hull_centers, hull_lower, "k:", lw=1.0, label="lower hull")
        ax.legend(fontsize=7)
    if overhang is not None:
        ax.axvspan(overhang[0], overhang[1], color="orange", alpha=0.25)
    ax.set_xlabel(r"$|\dot{Q}|$")
    ax.set_ylabel(r"$C$")
    if label:
        ax.set_title(label)
    ax.set_ylim(bottom=-0.01)
    _save(fig, path)


def plot_det_trajectory(t_grid: np.ndarray, det_abs: np.ndarray, path: str,
                        n_measure: float | None = None) -> None:
    """|det F(t)| on a log scale; increases witness non-divisibility."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    positive = det_abs > 0
    ax.semilogy(t_grid[positive], det_abs[positive], lw=0.9)
    ax.set_xlabel(r"$t\,\Omega$")
    ax.set_ylabel(r"$|\det F(t)|$")
    if n_measure is not None:
        ax.set_title(rf"$\mathcal{{N}}$ = {n_measure:.3e}")
    _save(fig, path)


def plot_collision_trajectory(t: np.ndarray, concurrence: np.ndarray,
                              q1_cumulative: np.ndarray, path: str) -> None:
    """Concurrence and accumulated bath-1 heat along a collision run."""
    fig, ax1 = plt.subplots(figsize=_FIGSIZE)
    ax1.plot(t, concurrence, color="#2b8cbe", lw=1.0)
    ax1.set_xlabel(r"$t\,\Omega$")
    ax1.set_ylabel(r"$C(t)$", color="#2b8cbe")
    ax2 = ax1.twinx()
    ax2.plot(t, q1_cumulative, color="#d95f02", lw=1.0)
    ax2.set_ylabel(r"$Q_1(t)/\omega$", color="#d95f02")
    _save(fig, path)
