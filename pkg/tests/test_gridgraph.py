"""Connected components under queen contiguity."""

from collections import deque

import numpy as np
import pytest

from mobstab.geometry import GridSpec
from mobstab.gridgraph import connected_components


def brute_force_components(cells):
    """BFS flood fill, the slow reference the union-find must match."""
    remaining = set(cells)
    comps = []
    while remaining:
        seed = next(iter(remaining))
        comp = set()
        queue = deque([seed])
        remaining.discard(seed)
        while queue:
            r, c = queue.popleft()
            comp.add((r, c))
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    nb = (r + dr, c + dc)
                    if nb in remaining:
                        remaining.discard(nb)
                        queue.append(nb)
        comps.append(frozenset(comp))
    return set(comps)


def labeling_as_partition(labeling):
    groups = {}
    for cell, cid in labeling.label.items():
        groups.setdefault(cid, set()).add(cell)
    return set(frozenset(g) for g in groups.values())


class TestHandShapes:
    def test_empty(self):
        assert connected_components([]).n_components == 0

    def test_singleton(self):
        lab = connected_components([(3, 4)])
        assert lab.n_components == 1
        assert lab.label == {(3, 4): 0}

    def test_diagonal_touch_connects(self):
        lab = connected_components([(0, 0), (1, 1)])
        assert lab.n_components == 1

    def test_knight_move_does_not_connect(self):
        lab = connected_components([(0, 0), (1, 2)])
        assert lab.n_components == 2

    def test_ring_with_hole(self):
        ring = [
            (r, c)
            for r in range(3)
            for c in range(3)
            if (r, c) != (1, 1)
        ]
        assert connected_components(ring).n_components == 1

    def test_two_bars(self):
        bars = [(0, c) for c in range(5)] + [(2, c) for c in range(5)]
        lab = connected_components(bars)
        assert lab.n_components == 2
        # labels numbered in row-major order of first appearance
        assert lab.label[(0, 0)] == 0
        assert lab.label[(2, 0)] == 1

    def test_duplicate_cells_collapse(self):
        lab = connected_components([(0, 0), (0, 0), (0, 1)])
        assert lab.n_components == 1
        assert len(lab.label) == 2

    def test_bounds_check(self):
        grid = GridSpec(8.0, 46.5, 4, 4, 28.0)
        with pytest.raises(ValueError):
            connected_components([(4, 0)], grid)
        assert connected_components([(3, 3)], grid).n_components == 1


class TestAgainstBruteForce:
    def test_random_sets_match_flood_fill(self):
        rng = np.random.default_rng(2024)
        for _ in range(300):
            n = int(rng.integers(1, 80))
            side = int(rng.integers(3, 14))
            cells = {
                (int(r), int(c))
                for r, c in zip(rng.integers(0, side, n), rng.integers(0, side, n))
            }
            lab = connected_components(cells)
            expected = brute_force_components(cells)
            assert labeling_as_partition(lab) == expected
            assert lab.n_components == len(expected)

    def test_deterministic_labels(self):
        rng = np.random.default_rng(7)
        cells = [
            (int(r), int(c))
            for r, c in zip(rng.integers(0, 10, 40), rng.integers(0, 10, 40))
        ]
        a = connected_components(cells)
        b = connected_components(reversed(cells))
        assert a == b
