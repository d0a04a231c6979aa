"""Sort-tile-recursive bulk-loaded R-tree over a point matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Node:
    lo: np.ndarray
    hi: np.ndarray
    leaf: bool
    children: np.ndarray  # point positions for leaves, node ids otherwise


class RTree:
    def __init__(self, pts: np.ndarray, capacity: int = 64):
        if capacity < 2:
            raise ValueError("R-tree capacity must be >= 2")
        self.pts = np.ascontiguousarray(pts, dtype=np.float64)
        self.capacity = capacity
        self.nodes: list[Node] = []
        n = self.pts.shape[0]
        if n == 0:
            self.root = -1
            return
        groups = _str_pack(self.pts, np.arange(n), capacity)
        level = []
        for g in groups:
            sub = self.pts[g]
            level.append(self._add(Node(sub.min(axis=0), sub.max(axis=0), True, g)))
        while len(level) > 1:
            ids = np.array(level)
            centers = np.array([(self.nodes[i].lo + self.nodes[i].hi) / 2 for i in level])
            parents = []
            for g in _str_pack(centers, np.arange(len(level)), capacity):
                kids = ids[g]
                lo = np.min([self.nodes[k].lo for k in kids], axis=0)
                hi = np.max([self.nodes[k].hi for k in kids], axis=0)
                parents.append(self._add(Node(lo, hi, False, kids)))
            level = parents
        self.root = level[0]

    def _add(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def height(self) -> int:
        h, node = 0, self.root
        while node >= 0:
            h += 1
            nd = self.nodes[node]
            if nd.leaf:
                break
            node = int(nd.children[0])
        return h


def _str_pack(pts: np.ndarray, ids: np.ndarray, capacity: int) -> list[np.ndarray]:
    n, d = pts.shape
    if n <= capacity:
        return [ids]
    return _tile(pts, ids, capacity, 0, d)


def _tile(pts, ids, capacity, dim, d):
    n = len(ids)
    if n <= capacity:
        return [ids]
    if dim == d - 1:
        order = ids[np.lexsort((ids, pts[ids, dim]))]
        return [order[i:i + capacity] for i in range(0, n, capacity)]
    leaves = math.ceil(n / capacity)
    slabs = math.ceil(leaves ** (1.0 / (d - dim)))
    per_slab = capacity * math.ceil(leaves / slabs)
    order = ids[np.lexsort((ids, pts[ids, dim]))]
    out = []
    for i in range(0, n, per_slab):
        out.extend(_tile(pts, order[i:i + per_slab], capacity, dim + 1, d))
    return out
