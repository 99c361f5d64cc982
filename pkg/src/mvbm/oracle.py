"""Brute-force ground truth for small instances.

Nothing here shares code with the augmenting-path solver. The enumerations
are meant to be obviously correct rather than fast.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .instance import EnumerationCapExceeded, Instance, Matching

__all__ = [
    "DEFAULT_SWEEP_VALUES",
    "OracleResult",
    "brute_force_mvbm",
    "brute_force_agent_major",
    "dp_optimum",
    "sweep_size",
    "exhaustive_instance_sweep",
]

DEFAULT_CAP = 1_000_000
DEFAULT_SWEEP_VALUES = (Fraction(1), Fraction(1, 2), Fraction(1, 4))


@dataclass(frozen=True)
class OracleResult:
    optimum: Fraction
    matchings: tuple[Matching, ...]


def _prod(xs: Iterable[int]) -> int:
    out = 1
    for x in xs:
        out *= x
    return out


def brute_force_mvbm(edges: Sequence[Iterable[int]], capacities: Sequence[int],
                     values: Sequence[Fraction], cap: int = DEFAULT_CAP) -> OracleResult:
    """Assign each task to nobody or to one incident agent, in every possible way.

    Keeps the assignments that respect the capacities and returns the best
    welfare together with every assignment that reaches it.
    """
    m = len(values)
    incident: list[list[int | None]] = [[None] for _ in range(m)]
    for i, tasks in enumerate(edges):
        for j in tasks:
            incident[j].append(i)
    size = _prod(len(c) for c in incident)
    if size > cap:
        raise EnumerationCapExceeded("task assignments", size, cap)

    best = Fraction(-1)
    winners: list[Matching] = []
    for choice in itertools.product(*incident):
        load = [0] * len(capacities)
        ok = True
        for i in choice:
            if i is not None:
                load[i] += 1
                if load[i] > capacities[i]:
                    ok = False
                    break
        if not ok:
            continue
        w = sum((values[j] for j, i in enumerate(choice) if i is not None), Fraction(0))
        pairs = frozenset((i, j) for j, i in enumerate(choice) if i is not None)
        if w > best:
            best, winners = w, [Matching(pairs)]
        elif w == best:
            winners.append(Matching(pairs))
    return OracleResult(best, tuple(winners))


def brute_force_agent_major(edges: Sequence[Iterable[int]], capacities: Sequence[int],
                            values: Sequence[Fraction], cap: int = DEFAULT_CAP) -> OracleResult:
    """Second enumeration: each agent picks a set of at most ``b_i`` of its tasks.

    Combinations in which two agents pick the same task are discarded.
    """
    options: list[list[frozenset[int]]] = []
    for tasks, b in zip(edges, capacities):
        tasks = sorted(tasks)
        opts = [frozenset(c) for k in range(min(b, len(tasks)) + 1)
                for c in itertools.combinations(tasks, k)]
        options.append(opts)
    size = _prod(len(o) for o in options)
    if size > cap:
        raise EnumerationCapExceeded("agent bundles", size, cap)

    best = Fraction(-1)
    winners: list[Matching] = []
    for combo in itertools.product(*options):
        taken: set[int] = set()
        clash = False
        for bundle in combo:
            if taken & bundle:
                clash = True
                break
            taken |= bundle
        if clash:
            continue
        w = sum((values[j] for j in taken), Fraction(0))
        pairs = frozenset((i, j) for i, bundle in enumerate(combo) for j in bundle)
        if w > best:
            best, winners = w, [Matching(pairs)]
        elif w == best:
            winners.append(Matching(pairs))
    return OracleResult(best, tuple(winners))


def dp_optimum(edges: Sequence[Iterable[int]], capacities: Sequence[int],
               values: Sequence[Fraction]) -> Fraction:
    """Exact optimum by memoised search over (task, remaining capacities).

    Used where the plain enumerations are too slow (n, m up to about 6).
    """
    m = len(values)
    incident: list[tuple[int, ...]] = [() for _ in range(m)]
    for i, tasks in enumerate(edges):
        for j in tasks:
            incident[j] += (i,)

    @lru_cache(maxsize=None)
    def best(j: int, remaining: tuple[int, ...]) -> Fraction:
        if j == m:
            return Fraction(0)
        out = best(j + 1, remaining)
        for i in incident[j]:
            if remaining[i]:
                left = remaining[:i] + (remaining[i] - 1,) + remaining[i + 1:]
                out = max(out, values[j] + best(j + 1, left))
        return out

    return best(0, tuple(capacities))


def sweep_size(n_max: int, m_max: int, b_max: int,
               values: Sequence[Fraction] = DEFAULT_SWEEP_VALUES) -> int:
    if n_max <= 0 or m_max <= 0 or b_max <= 0:
        return 0
    return 2 ** (n_max * m_max) * b_max ** n_max * len(values) ** m_max


def exhaustive_instance_sweep(n_max: int = 3, m_max: int = 3, b_max: int = 2,
                              values: Sequence[Fraction] = DEFAULT_SWEEP_VALUES
                              ) -> Iterator[Instance]:
    """Every instance with ``n_max`` agents and ``m_max`` tasks.

    Runs over every edge subset, every capacity vector in ``[1, b_max]^n`` and
    every assignment of task values from ``values``. Smaller instances are
    contained as the ones with isolated agents or tasks. No symmetry reduction.
    Yields nothing if any limit is zero.
    """
    if sweep_size(n_max, m_max, b_max, values) == 0:
        return
    cells = [(i, j) for i in range(n_max) for j in range(m_max)]
    for mask in range(2 ** len(cells)):
        edges = [set() for _ in range(n_max)]
        for bit, (i, j) in enumerate(cells):
            if mask >> bit & 1:
                edges[i].add(j)
        frozen = tuple(frozenset(e) for e in edges)
        for caps in itertools.product(range(1, b_max + 1), repeat=n_max):
            for vals in itertools.product(values, repeat=m_max):
                yield Instance(caps, vals, frozen)
