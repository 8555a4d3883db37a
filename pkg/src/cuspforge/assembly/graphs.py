"""Underlying graphs of block assemblies and their distance shells."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterator

KINDS = ("line", "chord", "trivalent-tree", "f2-cayley")


@dataclass(frozen=True)
class GraphPlan:
    """A vertex-transitive-enough graph with a base vertex.

    Kinds
    -----
    line
        Integers, edges ``[m, m+1]``.
    chord
        Integers, edges ``[m, m+1]`` plus the chords ``{m, -m}`` for ``m != 0``.
    trivalent-tree
        The 3-regular tree; vertices are reduced words over three involutions.
    f2-cayley
        Cayley graph of the free group on ``a, b`` (4-regular tree); vertices
        are reduced words over ``a, A, b, B``.
    """

    kind: str
    base: Hashable = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}; expected one of {KINDS}")
        if self.base is None:
            object.__setattr__(self, "base", 0 if self.kind in ("line", "chord") else "")

    # -- structure ------------------------------------------------------------

    @property
    def growth(self) -> tuple[float, float]:
        """``(C, rho)`` with ``count(k) = C * rho**k`` for ``k >= 1``."""
        if self.kind in ("line", "chord"):
            return 2.0, 1.0
        if self.kind == "trivalent-tree":
            return 1.5, 2.0
        return 4.0 / 3.0, 3.0

    def count(self, k: int) -> int:
        """Number of vertices at graph distance exactly ``k`` from the base."""
        if k < 0:
            return 0
        if k == 0:
            return 1
        if self.kind in ("line", "chord"):
            return 2
        if self.kind == "trivalent-tree":
            return 3 * 2 ** (k - 1)
        return 4 * 3 ** (k - 1)

    def neighbors(self, v) -> list:
        if self.kind == "line":
            return [v - 1, v + 1]
        if self.kind == "chord":
            out = [v - 1, v + 1]
            if v != 0:
                out.append(-v)
            return out
        letters = "xyz" if self.kind == "trivalent-tree" else "aAbB"
        out = []
        for ch in letters:
            if v and _cancels(v[-1], ch, self.kind):
                out.append(v[:-1])
            else:
                out.append(v + ch)
        return out

    def shells(self) -> Iterator[list]:
        """Breadth-first shells ``[v0], [distance 1], [distance 2], ...`` (lazy)."""
        seen = {self.base}
        frontier = [self.base]
        while True:
            yield sorted(frontier, key=_order_key)
            nxt = []
            for v in frontier:
                for w in self.neighbors(v):
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt

    def edges_to_depth(self, depth: int) -> list[tuple]:
        """Edges with both ends within distance ``depth``, each listed once."""
        dist = {self.base: 0}
        q = deque([self.base])
        edges = []
        while q:
            v = q.popleft()
            for w in self.neighbors(v):
                if w not in dist:
                    if dist[v] + 1 > depth:
                        continue
                    dist[w] = dist[v] + 1
                    q.append(w)
                if w in dist and _order_key(v) < _order_key(w):
                    edges.append((v, w))
        return edges

    def distance(self, v) -> int:
        if self.kind in ("line", "chord"):
            return abs(v)
        return len(v)

    def default_lambda(self):
        """Default scale divisor schedule making block volumes summable for ``n >= 2``."""
        from .schedules import ScaleSchedule

        if self.kind in ("line", "chord"):
            return ScaleSchedule.power(1.0, 1.0, 1.0)
        if self.kind == "trivalent-tree":
            return ScaleSchedule.exponential(1.0, 2.0)
        return ScaleSchedule.exponential(1.0, 3.0)


def _cancels(last: str, ch: str, kind: str) -> bool:
    if kind == "trivalent-tree":
        return last == ch  # involutions
    return last != ch and last.lower() == ch.lower()


def _order_key(v):
    if isinstance(v, int):
        return (abs(v), v)
    return (len(v), v)


def bfs_counts(graph: GraphPlan, depth: int) -> list[int]:
    """Shell sizes up to ``depth`` by explicit enumeration."""
    out = []
    for k, shell in enumerate(graph.shells()):
        out.append(len(shell))
        if k >= depth:
            break
    return out


def shell_count_log(graph: GraphPlan, k: int) -> float:
    """``log count(k)`` without forming huge integers."""
    if k == 0:
        return 0.0
    C, rho = graph.growth
    return math.log(C) + k * math.log(rho)
