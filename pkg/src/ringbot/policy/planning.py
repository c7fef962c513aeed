"""Occupancy grids and A* over them.

Cells are indexed ``[row, col]`` with rows along world z and columns
along world x. Moves are 8-connected; a diagonal move is only allowed when
both orthogonal neighbours it slips between are free. Path costs are kept
as exact ``(straight, diagonal)`` step counts so that two optimal paths
always compare equal.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ringbot.errors import NoPathError
from ringbot.geometry import PlanarPoint, bearing_of, ring_to_robot_frame
from ringbot.policy.controllers import DEFAULT_GAINS, Gains, follow_path, steer
from ringbot.sim import collision
from ringbot.sim.config import SimConfig
from ringbot.sim.state import ON_FIELD, Action, FieldState

SQRT2 = math.sqrt(2.0)
Cell = tuple[int, int]


def cost_value(steps: tuple[int, int]) -> float:
    return steps[0] + steps[1] * SQRT2


def cost_less(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Exact ``a0 + a1*sqrt2 < b0 + b1*sqrt2`` for integer step counts."""
    da = a[0] - b[0]
    db = b[1] - a[1]
    # da < db * sqrt(2)
    if db >= 0 and da < 0:
        return True
    if db <= 0 and da >= 0:
        return False
    if db > 0:  # da >= 0
        return da * da < 2 * db * db
    return da * da > 2 * db * db  # both negative


@dataclass
class GridMap:
    free: np.ndarray  # bool [rows, cols]
    resolution: float = 0.1
    origin: tuple[float, float] = (0.0, 0.0)  # world (x, z) of the grid's corner

    @property
    def shape(self) -> tuple[int, int]:
        return self.free.shape

    def cell_of(self, p: PlanarPoint) -> Cell:
        col = math.floor((p[0] - self.origin[0]) / self.resolution)
        row = math.floor((p[1] - self.origin[1]) / self.resolution)
        rows, cols = self.free.shape
        return min(max(row, 0), rows - 1), min(max(col, 0), cols - 1)

    def center(self, cell: Cell) -> PlanarPoint:
        row, col = cell
        return PlanarPoint(
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (row + 0.5) * self.resolution,
        )

    def is_free(self, cell: Cell) -> bool:
        return bool(self.free[cell])

    def neighbours(self, cell: Cell):
        """Yield ``(cell, diagonal)`` for legal moves out of ``cell``."""
        r, c = cell
        rows, cols = self.free.shape
        free = self.free
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nr, nc = r + dr, c + dc
                if not (0 <= nr < rows and 0 <= nc < cols) or not free[nr, nc]:
                    continue
                diagonal = dr != 0 and dc != 0
                if diagonal and not (free[r, nc] and free[nr, c]):
                    continue
                yield (nr, nc), diagonal

    def nearest_free(self, cell: Cell) -> Optional[Cell]:
        """Closest free cell by grid distance (ties row-major), or None."""
        if self.free[cell]:
            return cell
        rows, cols = np.nonzero(self.free)
        if rows.size == 0:
            return None
        d2 = (rows - cell[0]) ** 2 + (cols - cell[1]) ** 2
        k = int(np.argmin(d2))
        return int(rows[k]), int(cols[k])

    @classmethod
    def from_field(
        cls,
        state: FieldState,
        cfg: SimConfig,
        robot: int,
        resolution: float = 0.1,
        inflation: Optional[float] = None,
    ) -> "GridMap":
        """Mark goals and the opponent, each grown by ``inflation``, as occupied."""
        inflation = cfg.robot_half_extent if inflation is None else inflation
        if inflation < cfg.robot_half_extent:
            raise ValueError("inflation must be at least the robot half-extent")
        n = math.ceil(cfg.field_width / resolution - 1e-9)
        origin = (-cfg.half_width, -cfg.half_width)
        coords = origin[0] + (np.arange(n) + 0.5) * resolution
        xs, zs = np.meshgrid(coords, coords)
        free = np.ones((n, n), dtype=bool)
        for goal in state.goals:
            r = goal.radius + inflation
            free &= (xs - goal.position.x) ** 2 + (zs - goal.position.z) ** 2 > r * r
        for j, other in enumerate(state.robots):
            if j == robot:
                continue
            f, l = collision.box_axes(other.pose.heading)
            dx, dz = xs - other.pose.x, zs - other.pose.z
            along = np.clip(dx * f[0] + dz * f[1], -cfg.robot_half_extent, cfg.robot_half_extent)
            across = np.clip(dx * l[0] + dz * l[1], -cfg.robot_half_extent, cfg.robot_half_extent)
            ox = dx - (along * f[0] + across * l[0])
            oz = dz - (along * f[1] + across * l[1])
            free &= ox * ox + oz * oz > inflation * inflation
        return cls(free, resolution, origin)


@dataclass(frozen=True)
class Path:
    waypoints: list[PlanarPoint]
    cells: list[Cell]
    straight: int
    diagonal: int
    resolution: float

    @property
    def steps(self) -> tuple[int, int]:
        return self.straight, self.diagonal

    @property
    def cost(self) -> float:
        return self.resolution * cost_value(self.steps)


def _reconstruct(parent: dict, cell: Cell) -> list[Cell]:
    out = [cell]
    while cell in parent:
        cell = parent[cell]
        out.append(cell)
    return out[::-1]


def astar_cells(grid: GridMap, start: Cell, goal: Cell) -> tuple[list[Cell], tuple[int, int]]:
    """A* with a Euclidean heuristic; ties go to the smaller heuristic, then FIFO."""
    if not grid.is_free(start) or not grid.is_free(goal):
        raise NoPathError(f"start {start} or goal {goal} is occupied")

    def h(cell: Cell) -> float:
        return math.hypot(cell[0] - goal[0], cell[1] - goal[1])

    order = itertools.count()
    best: dict[Cell, tuple[int, int]] = {start: (0, 0)}
    parent: dict[Cell, Cell] = {}
    closed: set[Cell] = set()
    heap = [(h(start), h(start), next(order), start)]
    while heap:
        _, _, _, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        if cell == goal:
            return _reconstruct(parent, cell), best[cell]
        closed.add(cell)
        a, b = best[cell]
        for nb, diagonal in grid.neighbours(cell):
            cand = (a, b + 1) if diagonal else (a + 1, b)
            old = best.get(nb)
            if old is not None and not cost_less(cand, old):
                continue
            best[nb] = cand
            parent[nb] = cell
            closed.discard(nb)
            hn = h(nb)
            heapq.heappush(heap, (cost_value(cand) + hn, hn, next(order), nb))
    raise NoPathError(f"no path from {start} to {goal}")


def astar_plan(grid: GridMap, start: PlanarPoint, goal: PlanarPoint) -> Path:
    cells, (straight, diagonal) = astar_cells(grid, grid.cell_of(start), grid.cell_of(goal))
    return Path([grid.center(c) for c in cells], cells, straight, diagonal, grid.resolution)


class AStarPolicy:
    """Plan over the true field state to the nearest reachable ring and follow the path.

    This policy reads the simulator state directly rather than the noisy
    observation, so it serves as a privileged baseline. When no plan can be
    made it steers straight at the nearest ring.
    """

    needs_observation = False

    def __init__(self, cfg: Optional[SimConfig] = None, resolution: float = 0.1,
                 replan_every: int = 12, lookahead: float = 0.3, gains: Gains = DEFAULT_GAINS):
        self.cfg = cfg or SimConfig()
        self.resolution = resolution
        self.replan_every = replan_every
        self.lookahead = lookahead
        self.gains = gains
        self._path: Optional[Path] = None
        self._target: Optional[int] = None
        self._planned_at = -1

    def _stale(self, state: FieldState) -> bool:
        return (
            self._path is None
            or self._target is None
            or state.ring_holder[self._target] != ON_FIELD
            or state.step_index - self._planned_at >= self.replan_every
        )

    def _replan(self, state: FieldState, cfg: SimConfig, robot: int) -> None:
        self._path, self._target = None, None
        self._planned_at = state.step_index
        on_field = np.flatnonzero(state.ring_holder == ON_FIELD)
        if on_field.size == 0:
            return
        me = state.robots[robot].pose
        grid = GridMap.from_field(state, cfg, robot, self.resolution)
        start = grid.nearest_free(grid.cell_of(me.position))
        if start is None:
            return
        d = np.hypot(state.ring_pos[on_field, 0] - me.x, state.ring_pos[on_field, 1] - me.z)
        for k in on_field[np.lexsort((on_field, d))]:
            goal = grid.cell_of(PlanarPoint(*state.ring_pos[k]))
            if not grid.is_free(goal):
                continue
            try:
                cells, (a, b) = astar_cells(grid, start, goal)
            except NoPathError:
                continue
            waypoints = [grid.center(c) for c in cells[:-1]] + [PlanarPoint(*state.ring_pos[k])]
            self._path = Path(waypoints, cells, a, b, grid.resolution)
            self._target = int(k)
            return

    def act(self, stack, state: FieldState, robot: int) -> Action:
        if self._stale(state):
            self._replan(state, self.cfg, robot)
        me = state.robots[robot].pose
        if self._path is not None:
            return follow_path(self._path.waypoints, me, self.lookahead, tolerance=0.0, gains=self.gains)
        on_field = np.flatnonzero(state.ring_holder == ON_FIELD)
        if on_field.size == 0:
            return Action(0.0, 0.0)
        d = np.hypot(state.ring_pos[on_field, 0] - me.x, state.ring_pos[on_field, 1] - me.z)
        k = on_field[int(np.argmin(d))]
        local = ring_to_robot_frame(PlanarPoint(*state.ring_pos[k]), me)
        return steer(bearing_of(local), self.gains)
