"""Augmenting-path solver for maximum vertex-weighted b-matching.

Tasks are processed once each, in decreasing value (ties: lower index first).
For each task the solver looks for an augmenting path that starts at the task,
passes through saturated agents along matched edges, and ends at an
unsaturated agent. Flipping the path matches the task without unmatching any
other. Tasks with no augmenting path stay unmatched for good.

``SearchKind.BFS`` finds a shortest path, ``SearchKind.DFS`` the first path in
depth-first order, and ``SearchKind.APPROX`` only accepts paths of length one,
which gives the 2-approximation used by the truthful mechanism.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .instance import Matching

__all__ = [
    "SearchKind",
    "AugmentingPath",
    "PathError",
    "task_order",
    "find_augmenting_path",
    "apply_path",
    "iterate",
    "solve",
]


class SearchKind(str, enum.Enum):
    BFS = "bfs"
    DFS = "dfs"
    APPROX = "ap"   # length-1 augmenting paths only


class PathError(ValueError):
    """Raised when a path is not augmenting for the matching it is applied to."""


@dataclass(frozen=True)
class AugmentingPath:
    """An alternating path ``t0 - a0 = t1 - a1 = ... = tk - ak``.

    ``steps[r] = (t_r, a_r)``. The edge ``(t_r, a_r)`` is outside the matching
    and, for ``r > 0``, ``t_r`` is currently matched to ``a_{r-1}``. Flipping
    the path moves every ``t_r`` to ``a_r``.
    """

    steps: tuple[tuple[int, int], ...]

    @property
    def start(self) -> int:
        return self.steps[0][0]

    @property
    def end(self) -> int:
        return self.steps[-1][1]

    def __len__(self) -> int:
        return 2 * len(self.steps) - 1

    def edges(self) -> list[tuple[int, int]]:
        """The path's edges in order, as ``(agent, task)`` pairs."""
        out = []
        for r, (t, a) in enumerate(self.steps):
            if r:
                out.append((self.steps[r - 1][1], t))
            out.append((a, t))
        return out


def task_order(values: Sequence[Fraction]) -> list[int]:
    return sorted(range(len(values)), key=lambda j: (-values[j], j))


def _task_adjacency(edges: Sequence[Iterable[int]], m: int) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(m)]
    for i, tasks in enumerate(edges):
        for j in tasks:
            adj[j].append(i)
    # agents were appended in increasing index already
    return adj


class _State:
    """Mutable matching state used while the algorithm runs."""

    __slots__ = ("adj", "caps", "owner", "held")

    def __init__(self, adj: list[list[int]], caps: Sequence[int], owner: list[int] | None = None):
        self.adj = adj
        self.caps = caps
        self.owner = owner if owner is not None else [-1] * len(adj)
        self.held: list[list[int]] = [[] for _ in caps]
        for j, i in enumerate(self.owner):
            if i >= 0:
                self.held[i].append(j)

    def free(self, agent: int) -> bool:
        return len(self.held[agent]) < self.caps[agent]

    def bfs(self, task: int) -> tuple[tuple[int, int], ...] | None:
        parent: dict[int, tuple[int, int]] = {}
        queue: deque[int] = deque()
        for a in self.adj[task]:
            parent[a] = (task, -1)
            queue.append(a)
        while queue:
            a = queue.popleft()
            if self.free(a):
                steps = []
                while a != -1:
                    t, prev = parent[a]
                    steps.append((t, a))
                    a = prev
                return tuple(reversed(steps))
            for t in sorted(self.held[a]):
                for b in self.adj[t]:
                    if b not in parent:
                        parent[b] = (t, a)
                        queue.append(b)
        return None

    def dfs(self, task: int, visited: set[int]) -> list[tuple[int, int]] | None:
        for a in self.adj[task]:
            if a in visited:
                continue
            visited.add(a)
            if self.free(a):
                return [(task, a)]
            for t in sorted(self.held[a]):
                rest = self.dfs(t, visited)
                if rest is not None:
                    return [(task, a)] + rest
        return None

    def first_free(self, task: int) -> tuple[tuple[int, int], ...] | None:
        for a in self.adj[task]:
            if self.free(a):
                return ((task, a),)
        return None

    def search(self, task: int, kind: SearchKind) -> tuple[tuple[int, int], ...] | None:
        if kind is SearchKind.BFS:
            return self.bfs(task)
        if kind is SearchKind.DFS:
            found = self.dfs(task, set())
            return None if found is None else tuple(found)
        return self.first_free(task)

    def flip(self, steps: tuple[tuple[int, int], ...]) -> None:
        for t, a in steps:
            prev = self.owner[t]
            if prev >= 0:
                self.held[prev].remove(t)
            self.owner[t] = a
            self.held[a].append(t)

    def matching(self) -> Matching:
        return Matching(frozenset((i, j) for j, i in enumerate(self.owner) if i >= 0))


def _state_from(current: Matching, edges: Sequence[Iterable[int]], capacities: Sequence[int],
                m: int) -> _State:
    owner = [-1] * m
    for i, j in current.pairs:
        owner[j] = i
    return _State(_task_adjacency(edges, m), capacities, owner)


def _task_count(edges: Sequence[Iterable[int]], current: Matching, task: int) -> int:
    m = task + 1
    for tasks in edges:
        for j in tasks:
            m = max(m, j + 1)
    for _, j in current.pairs:
        m = max(m, j + 1)
    return m


def find_augmenting_path(task: int, current: Matching, edges: Sequence[Iterable[int]],
                         capacities: Sequence[int],
                         kind: SearchKind | str = SearchKind.BFS) -> AugmentingPath | None:
    """Search for an augmenting path from the unmatched ``task``.

    BFS visits the agents of each layer in increasing index order and returns
    the first shortest path. DFS explores a task's agents in increasing index
    and a saturated agent's matched tasks in increasing index.
    """
    kind = SearchKind(kind)
    if current.owner(task) is not None:
        raise PathError(f"task {task} is already matched")
    state = _state_from(current, edges, capacities, _task_count(edges, current, task))
    steps = state.search(task, kind)
    return None if steps is None else AugmentingPath(steps)


def apply_path(current: Matching, path: AugmentingPath,
               capacities: Sequence[int] | None = None) -> Matching:
    """Return ``current`` xor ``path``.

    Rejects paths that are not alternating with respect to ``current``; when
    ``capacities`` is given the saturation conditions are checked as well.
    """
    owner = {j: i for i, j in current.pairs}
    load: dict[int, int] = {}
    for i, _ in current.pairs:
        load[i] = load.get(i, 0) + 1
    steps = path.steps
    if not steps:
        raise PathError("empty path")
    if steps[0][0] in owner:
        raise PathError(f"path starts at task {steps[0][0]}, which is already matched")
    for r, (t, a) in enumerate(steps):
        if owner.get(t) == a:
            raise PathError(f"edge ({a}, {t}) is already in the matching")
        if r and owner.get(t) != steps[r - 1][1]:
            raise PathError(f"task {t} is not matched to agent {steps[r - 1][1]}")
    if capacities is not None:
        for _, a in steps[:-1]:
            if load.get(a, 0) < capacities[a]:
                raise PathError(f"interior agent {a} is not saturated")
        if load.get(path.end, 0) >= capacities[path.end]:
            raise PathError(f"terminal agent {path.end} is saturated")
    flipped = dict(owner)
    for t, a in steps:
        flipped[t] = a
    return Matching(frozenset((i, j) for j, i in flipped.items()))


def iterate(edges: Sequence[Iterable[int]], capacities: Sequence[int], values: Sequence[Fraction],
            kind: SearchKind | str = SearchKind.BFS
            ) -> Iterator[tuple[int, AugmentingPath | None, Matching]]:
    """Yield ``(task, path or None, matching after the step)`` for every task."""
    kind = SearchKind(kind)
    state = _State(_task_adjacency(edges, len(values)), capacities)
    for j in task_order(values):
        steps = state.search(j, kind)
        if steps is not None:
            state.flip(steps)
        yield j, (None if steps is None else AugmentingPath(steps)), state.matching()


def solve(edges: Sequence[Iterable[int]], capacities: Sequence[int], values: Sequence[Fraction],
          kind: SearchKind | str = SearchKind.BFS) -> Matching:
    """Run the augmenting-path algorithm and return the final matching.

    ``edges[i]`` lists the tasks agent ``i`` is connected to; ``capacities``
    are the capacities the algorithm must respect.
    """
    kind = SearchKind(kind)
    state = _State(_task_adjacency(edges, len(values)), capacities)
    for j in task_order(values):
        steps = state.search(j, kind)
        if steps is not None:
            state.flip(steps)
    return state.matching()


def solve_owners(edges: Sequence[Iterable[int]], capacities: Sequence[int],
                 order: Sequence[int], m: int, kind: SearchKind) -> list[int]:
    """Fast path for the enumerators: returns ``owner[task]`` (``-1`` if unmatched)."""
    state = _State(_task_adjacency(edges, m), capacities)
    for j in order:
        steps = state.search(j, kind)
        if steps is not None:
            state.flip(steps)
    return state.owner
