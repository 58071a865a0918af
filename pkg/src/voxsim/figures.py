"""Figure rendering for run reports.

All figures go straight to image files through the Agg backend; nothing here
ever opens a window, so the functions are safe in headless runs and tests.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import SimulationModel
from .reporting import SimulationReport, SweepRow


def _cell_matrix(counts: dict[tuple[int, int], int], width: int, depth: int) -> np.ndarray:
    matrix = np.zeros((depth, width))
    for (x, y), n in counts.items():
        if 0 <= x < width and 0 <= y < depth:
            matrix[y, x] = n
    return matrix


def heatmap_figure(report: SimulationReport, model: SimulationModel, path: str) -> None:
    """Two panels: cell traversal counts and collision risk counts."""
    width = model.parameters.grid_width
    depth = model.parameters.grid_depth
    fig, axes = plt.subplots(1, 2, figsize=(max(8, width / 3), max(3.5, depth / 4)))

    for ax, counts, title, cmap in (
        (axes[0], report.traversal_counts, "Traversal count", "viridis"),
        (axes[1], report.collision_cells, "Collision risk count", "inferno"),
    ):
        image = ax.imshow(
            _cell_matrix(counts, width, depth), origin="lower", cmap=cmap,
            interpolation="nearest",
        )
        for receptor in model.receptors.values():
            ax.add_patch(
                plt.Rectangle(
                    (receptor.coord.x - 0.5, receptor.coord.y - 0.5), 1, 1,
                    fill=False, edgecolor="white", linewidth=0.4,
                )
            )
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.colorbar(image, ax=ax, shrink=0.8)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def utilization_figure(report: SimulationReport, path: str) -> None:
    agents = sorted(report.agent_utilization)
    values = [report.agent_utilization[a] for a in agents]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.35 * len(agents))))
    ax.barh(agents, values, color="#3b6ea5")
    ax.set_xlim(0, 1)
    ax.set_xlabel("utilization")
    ax.set_title(f"Agent utilization (makespan {report.makespan_seconds:.1f} s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sweep_figure(rows: list[SweepRow], agent_type_id: str, path: str) -> None:
    counts = [r.agent_count for r in rows]
    makespans = [r.makespan_seconds for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(counts, makespans, marker="o", color="#a5503b")
    ax.set_xticks(counts)
    ax.set_xlabel(f"{agent_type_id} count")
    ax.set_ylabel("makespan [s]")
    ax.set_title(f"Makespan vs {agent_type_id} count")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
