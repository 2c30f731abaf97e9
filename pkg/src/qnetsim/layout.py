"""Force-directed 2-D layout: Hooke springs along edges, inverse-square
repulsion between all node pairs, damped displacement per iteration.

Pure Python on purpose: each iteration is an explicit O(|V|^2) pair loop,
deterministic for a fixed seed, with no platform-dependent numerics.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import EmptyTopology
from .topology import Topology

#: below this pair distance the direction is drawn from the seeded generator
COINCIDENT_EPS = 1e-6


@dataclass(frozen=True)
class LayoutParams:
    spring_constant: float = 0.1
    ideal_edge_length: float = 100.0
    repulsion_constant: float = 1e5
    damping: float = 0.9
    max_iterations: int = 1000
    convergence_threshold: float = 0.1

    def __post_init__(self):
        for name in ("spring_constant", "ideal_edge_length", "repulsion_constant",
                     "max_iterations", "convergence_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class LayoutResult:
    positions: dict[str, tuple[float, float]]
    iterations_used: int
    converged: bool


def _unit(dx: float, dy: float, dist: float,
          rng: random.Random) -> tuple[float, float, float]:
    """Direction and effective distance, with the coincident-pair guard."""
    if dist < COINCIDENT_EPS:
        angle = rng.random() * 2.0 * math.pi
        return math.cos(angle), math.sin(angle), COINCIDENT_EPS
    return dx / dist, dy / dist, dist


def layout_step(positions: dict[str, tuple[float, float]], topo: Topology,
                params: LayoutParams,
                rng: random.Random | None = None) -> tuple[dict, float]:
    """One force iteration; returns (new positions, total displacement)."""
    if rng is None:
        rng = random.Random(0)
    names = [n.name for n in topo.nodes]
    forces = {name: [0.0, 0.0] for name in names}

    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = names[i], names[j]
            ax, ay = positions[a]
            bx, by = positions[b]
            dx, dy = bx - ax, by - ay
            ux, uy, dist = _unit(dx, dy, math.hypot(dx, dy), rng)
            rep = params.repulsion_constant / (dist * dist)
            forces[a][0] -= ux * rep
            forces[a][1] -= uy * rep
            forces[b][0] += ux * rep
            forces[b][1] += uy * rep

    for e in topo.edges:
        ax, ay = positions[e.a]
        bx, by = positions[e.b]
        dx, dy = bx - ax, by - ay
        ux, uy, dist = _unit(dx, dy, math.hypot(dx, dy), rng)
        spring = params.spring_constant * (dist - params.ideal_edge_length)
        forces[e.a][0] += ux * spring
        forces[e.a][1] += uy * spring
        forces[e.b][0] -= ux * spring
        forces[e.b][1] -= uy * spring

    new_positions = {}
    total = 0.0
    for name in names:
        fx, fy = forces[name]
        dx = params.damping * fx
        dy = params.damping * fy
        x, y = positions[name]
        new_positions[name] = (x + dx, y + dy)
        total += math.hypot(dx, dy)
    return new_positions, total


def compute_layout(topo: Topology, params: LayoutParams = LayoutParams(),
                   seed: int = 0) -> LayoutResult:
    """Run the force simulation to convergence (or max_iterations).

    Initial placement is uniform in a square of side ideal_edge_length*sqrt(|V|)
    drawn from the seed; final positions are recentered on their centroid, so a
    single node lands at the origin. Identical inputs give identical output.
    """
    if not topo.nodes:
        raise EmptyTopology("cannot lay out an empty topology")
    rng = random.Random(seed)
    side = params.ideal_edge_length * math.sqrt(len(topo.nodes))
    positions = {n.name: (rng.random() * side, rng.random() * side)
                 for n in topo.nodes}

    iterations = 0
    converged = False
    for _ in range(params.max_iterations):
        positions, total = layout_step(positions, topo, params, rng)
        iterations += 1
        if total < params.convergence_threshold:
            converged = True
            break

    cx = sum(p[0] for p in positions.values()) / len(positions)
    cy = sum(p[1] for p in positions.values()) / len(positions)
    centered = {name: (x - cx, y - cy) for name, (x, y) in positions.items()}
    return LayoutResult(positions=centered, iterations_used=iterations,
                        converged=converged)
