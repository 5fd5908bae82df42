"""Connected components of cell sets under queen contiguity.

Two cells are adjacent when they share an edge or a corner, i.e. their
row and column indices each differ by at most one. Components are found
with union-find over the member cells only, probing the eight neighbor
offsets against a hash set, so cost scales with the set, never with
the full grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .geometry import Cell, GridSpec

_NEIGHBOR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True)
class ComponentLabeling:
    """Component ids per cell, numbered 0..n_components-1.

    Ids are assigned in row-major order of each component's first cell,
    so the labeling is deterministic for a given set.
    """

    n_components: int
    label: dict[Cell, int]


def connected_components(cells: Iterable[Cell], grid: GridSpec | None = None) -> ComponentLabeling:
    """Label queen-contiguous components of a cell set.

    Passing the grid enables a bounds check on the input; the labeling
    itself only depends on the cells.
    """
    cell_set = set(cells)
    if grid is not None:
        for r, c in cell_set:
            if not (0 <= r < grid.n_rows and 0 <= c < grid.n_cols):
                raise ValueError(f"cell ({r}, {c}) outside grid bounds")

    parent: dict[Cell, Cell] = {cell: cell for cell in cell_set}

    def find(x: Cell) -> Cell:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    for r, c in cell_set:
        for dr, dc in _NEIGHBOR_OFFSETS:
            nb = (r + dr, c + dc)
            if nb in cell_set:
                ra, rb = find((r, c)), find(nb)
                if ra != rb:
                    parent[rb] = ra

    label: dict[Cell, int] = {}
    root_id: dict[Cell, int] = {}
    for cell in sorted(cell_set):
        root = find(cell)
        if root not in root_id:
            root_id[root] = len(root_id)
        label[cell] = root_id[root]
    return ComponentLabeling(n_components=len(root_id), label=label)
