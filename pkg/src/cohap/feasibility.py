"""Geometric feasibility: a 2D grid workspace and the external-predicate oracle.

The grid checker stands in for a sampling-based motion planner: an external
predicate such as reachable(m, r) is answered by breadth-first search over
4-connected free cells, restricted to cells whose center lies within the
manipulator's reach radius of its base.
"""

from __future__ import annotations

import json
import math
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional


class FeasibilityError(Exception):
    pass


@dataclass(frozen=True)
class Manipulator:
    name: str
    base: tuple[int, int]
    reach: float  # meters


@dataclass(frozen=True)
class Region:
    name: str
    rect: tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive
    unsafe: bool = False

    def cells(self):
        x0, y0, x1, y1 = self.rect
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                yield (x, y)


@dataclass(frozen=True)
class Workspace:
    cell_size: float
    width: int
    height: int
    obstacles: frozenset[tuple[int, int]]
    manipulators: tuple[Manipulator, ...]
    regions: tuple[Region, ...]

    def __post_init__(self):
        for m in self.manipulators:
            if m.reach <= 0:
                raise FeasibilityError(f"manipulator {m.name!r} reach must be "
                                       "positive")
            if not self.in_bounds(m.base):
                raise FeasibilityError(f"manipulator {m.name!r} base out of "
                                       "bounds")
            if m.base in self.obstacles:
                raise FeasibilityError(f"manipulator {m.name!r} base is on an "
                                       "obstacle cell")
        for r in self.regions:
            x0, y0, x1, y1 = r.rect
            if not (0 <= x0 <= x1 < self.width and 0 <= y0 <= y1 < self.height):
                raise FeasibilityError(f"region {r.name!r} not within grid")

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def manipulator(self, name: str) -> Manipulator:
        for m in self.manipulators:
            if m.name == name:
                return m
        raise FeasibilityError(f"unknown manipulator {name!r}")

    def region(self, name: str) -> Region:
        for r in self.regions:
            if r.name == name:
                return r
        raise FeasibilityError(f"unknown region {name!r}")

    def unsafe_regions(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.regions if r.unsafe)


def load_workspace(text: str) -> Workspace:
    doc = json.loads(text)
    return Workspace(
        cell_size=float(doc["cellSize"]),
        width=int(doc["width"]),
        height=int(doc["height"]),
        obstacles=frozenset((int(x), int(y)) for x, y in doc["obstacles"]),
        manipulators=tuple(
            Manipulator(m["name"], (int(m["base"][0]), int(m["base"][1])),
                        float(m["reach"]))
            for m in doc["manipulators"]),
        regions=tuple(
            Region(r["name"], tuple(int(v) for v in r["rect"]),
                   bool(r.get("unsafe", False)))
            for r in doc["regions"]),
    )


def dump_workspace(w: Workspace) -> str:
    doc = {
        "cellSize": w.cell_size,
        "width": w.width,
        "height": w.height,
        "obstacles": sorted([x, y] for x, y in w.obstacles),
        "manipulators": [
            {"name": m.name, "base": list(m.base), "reach": m.reach}
            for m in w.manipulators],
        "regions": [
            {"name": r.name, "rect": list(r.rect), "unsafe": r.unsafe}
            for r in w.regions],
    }
    return json.dumps(doc, indent=2) + "\n"


def _within_reach(cell: tuple[int, int], m: Manipulator,
                  cell_size: float) -> bool:
    dx = (cell[0] - m.base[0]) * cell_size
    dy = (cell[1] - m.base[1]) * cell_size
    return math.hypot(dx, dy) <= m.reach + 1e-9


def _sweep(w: Workspace, m: Manipulator) -> set[tuple[int, int]]:
    """Cells the manipulator can sweep to: BFS over free in-reach cells."""
    if not _within_reach(m.base, m, w.cell_size):
        return set()
    seen = {m.base}
    queue = deque([m.base])
    while queue:
        x, y = queue.popleft()
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if (nxt not in seen and w.in_bounds(nxt)
                    and nxt not in w.obstacles
                    and _within_reach(nxt, m, w.cell_size)):
                seen.add(nxt)
                queue.append(nxt)
    return seen


def collision_free(manip: str, cell: tuple[int, int], w: Workspace) -> bool:
    """True iff the manipulator can sweep to the given cell."""
    m = w.manipulator(manip)
    if not w.in_bounds(cell):
        raise FeasibilityError(f"cell {cell!r} out of bounds")
    return cell in _sweep(w, m)


def reachable(manip: str, region: str, w: Workspace) -> bool:
    """True iff the manipulator can sweep to at least one cell of the region."""
    m = w.manipulator(manip)
    r = w.region(region)
    sweep = _sweep(w, m)
    return any(c in sweep for c in r.cells())


class FeasibilityOracle:
    """Registry of external predicates with a transparent, synchronized cache."""

    def __init__(self):
        self._registry: dict[str, Callable[..., bool]] = {}
        self._cache: dict[tuple[str, tuple[str, ...]], bool] = {}
        self._lock = threading.Lock()
        self._enabled = True
        self.calls = 0
        self.hits = 0
        self.seconds = 0.0

    def register(self, name: str, fn: Callable[..., bool]) -> None:
        self._registry[name] = fn

    def registered(self, name: str) -> bool:
        return name in self._registry

    def set_cache_enabled(self, enabled: bool) -> None:
        self._enabled = enabled

    def eval(self, name: str, args: tuple[str, ...]) -> bool:
        fn = self._registry.get(name)
        if fn is None:
            raise FeasibilityError(f"external {name!r} is not registered")
        key = (name, tuple(args))
        with self._lock:
            self.calls += 1
            if self._enabled and key in self._cache:
                self.hits += 1
                return self._cache[key]
        t0 = time.perf_counter()
        result = bool(fn(*args))
        dt = time.perf_counter() - t0
        with self._lock:
            self.seconds += dt
            if self._enabled:
                self._cache[key] = result
        return result

    def check_stats(self) -> dict:
        with self._lock:
            return {"calls": self.calls, "hits": self.hits,
                    "seconds": self.seconds}


def workspace_oracle(w: Workspace) -> FeasibilityOracle:
    """Oracle exposing the built-in geometric externals for a workspace."""
    fx = FeasibilityOracle()
    fx.register("reachable", lambda m, r: reachable(m, r, w))
    fx.register("collision_free",
                lambda m, x, y: collision_free(m, (int(x), int(y)), w))
    return fx
