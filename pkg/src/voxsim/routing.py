"""Grid navigation: blocked cells, shortest paths, timing and collision math.

Movement is planar. Agents travel on the ground plane between cells that are
not covered by a receptor footprint; the vertical coordinate only enters
through the elevation penalty on load and unload handling times.
"""

from __future__ import annotations

from collections import deque

from .errors import Unreachable
from .model import SimulationModel

# Fixed expansion order keeps every breadth-first search deterministic.
OFFSETS = ((1, 0), (0, 1), (-1, 0), (0, -1))

Cell = tuple[int, int]


class NavGrid:
    """Static walkability derived from a model plus live traversal counters."""

    def __init__(self, model: SimulationModel):
        self.width = model.parameters.grid_width
        self.depth = model.parameters.grid_depth
        self.blocked: set[Cell] = {r.coord.cell for r in model.receptors.values()}
        self._footprints: dict[str, Cell] = {
            rid: r.coord.cell for rid, r in model.receptors.items()
        }
        self._adjacent_cache: dict[str, tuple[Cell, ...]] = {}
        self._distance_cache: dict[str, dict[Cell, int]] = {}
        self.traversal_counts: dict[Cell, int] = {}

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.depth

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    def adjacent_free_cells(self, receptor_id: str) -> tuple[Cell, ...]:
        """Free cells 4-adjacent to the receptor footprint, fixed order.

        Raises :class:`Unreachable` when the receptor is walled in.
        """
        if receptor_id in self._adjacent_cache:
            return self._adjacent_cache[receptor_id]
        x, y = self._footprints[receptor_id]
        cells = tuple(
            (x + dx, y + dy) for dx, dy in OFFSETS if self.is_free((x + dx, y + dy))
        )
        if not cells:
            raise Unreachable(f"receptor {receptor_id!r} has no free adjacent cell")
        self._adjacent_cache[receptor_id] = cells
        return cells

    def shortest_path(self, start: Cell, goals: tuple[Cell, ...]) -> list[Cell]:
        """Cells stepped through after ``start``; empty when already at a goal."""
        goal_set = set(goals)
        if start in goal_set:
            return []
        parents: dict[Cell, Cell] = {start: start}
        queue = deque([start])
        while queue:
            cell = queue.popleft()
            for dx, dy in OFFSETS:
                nxt = (cell[0] + dx, cell[1] + dy)
                if nxt in parents or not self.is_free(nxt):
                    continue
                parents[nxt] = cell
                if nxt in goal_set:
                    path = [nxt]
                    while parents[cell] != cell:
                        path.append(cell)
                        cell = parents[cell]
                    if cell != start:
                        path.append(cell)
                    path.reverse()
                    return path
                queue.append(nxt)
        raise Unreachable(f"no path from {start} to any of {sorted(goal_set)}")

    def distances_from(self, receptor_id: str) -> dict[Cell, int]:
        """Step count from every reachable free cell to the receptor's goal set.

        One multi-source flood per receptor, cached; unit steps make the
        distance symmetric, so this doubles as agent-to-receptor distance.
        """
        if receptor_id in self._distance_cache:
            return self._distance_cache[receptor_id]
        dist: dict[Cell, int] = {}
        queue: deque[Cell] = deque()
        for cell in self.adjacent_free_cells(receptor_id):
            if cell not in dist:
                dist[cell] = 0
                queue.append(cell)
        while queue:
            cell = queue.popleft()
            for dx, dy in OFFSETS:
                nxt = (cell[0] + dx, cell[1] + dy)
                if nxt not in dist and self.is_free(nxt):
                    dist[nxt] = dist[cell] + 1
                    queue.append(nxt)
        self._distance_cache[receptor_id] = dist
        return dist

    def path_to_receptor(self, start: Cell, receptor_id: str) -> list[Cell]:
        return self.shortest_path(start, self.adjacent_free_cells(receptor_id))

    def record_traversal(self, path: list[Cell]) -> None:
        for cell in path:
            self.traversal_counts[cell] = self.traversal_counts.get(cell, 0) + 1


def travel_time(path_length: int, speed: float) -> float:
    """Seconds to walk ``path_length`` unit steps at ``speed`` cells per second."""
    return path_length / speed


def handling_time(base: float, z_level: int, penalty_per_level: float) -> float:
    """Load or unload duration at a receptor ``z_level`` voxels up."""
    return base + z_level * penalty_per_level


def path_cell_intervals(
    path: list[Cell], t_start: float, speed: float
) -> list[tuple[Cell, float, float]]:
    """Time window each path cell is occupied during a move started at ``t_start``."""
    step = 1.0 / speed
    return [
        (cell, t_start + i * step, t_start + (i + 1) * step)
        for i, cell in enumerate(path)
    ]


def collision_risk(
    moves: list[tuple[str, list[Cell], float, float]],
) -> tuple[int, dict[Cell, int]]:
    """Count same-cell time overlaps between moves of distinct agents.

    ``moves`` rows are (agent_id, path, t_start, speed). Every unordered pair
    of cell occupancy intervals that belong to different agents and overlap
    for positive duration counts once; the per-cell breakdown feeds the risk
    map. Touching endpoints do not count.
    """
    by_cell: dict[Cell, list[tuple[float, float, str]]] = {}
    for agent_id, path, t_start, speed in moves:
        for cell, t_enter, t_exit in path_cell_intervals(path, t_start, speed):
            by_cell.setdefault(cell, []).append((t_enter, t_exit, agent_id))

    total = 0
    per_cell: dict[Cell, int] = {}
    for cell, intervals in by_cell.items():
        intervals.sort()
        hits = 0
        active: list[tuple[float, str]] = []
        for t_enter, t_exit, agent_id in intervals:
            active = [(end, aid) for end, aid in active if end > t_enter]
            hits += sum(1 for _, aid in active if aid != agent_id)
            active.append((t_exit, agent_id))
        if hits:
            per_cell[cell] = hits
            total += hits
    return total, per_cell
