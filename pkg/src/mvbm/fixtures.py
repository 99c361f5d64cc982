"""Named instances from the literature on these mechanisms, and random generators.

Random instances come from :class:`random.Random` (MT19937) seeded with the
integer seed. Draw order, which fixes the stream:

1. one ``random()`` per capacity, agent by agent: ``b_i = 1 + floor(u * b_max)``;
2. one ``random()`` per task value (see ``value_mode``);
3. one ``random()`` per ``(agent, task)`` cell, row-major; the edge exists iff ``u < density``.

``value_mode="with_ties"`` maps ``u`` to ``(1 + floor(4u)) / 2``, i.e. one of
``1/2, 1, 3/2, 2``. ``value_mode="distinct"`` draws the value ``k/m`` for
``k = 1 + floor(u * 8m)`` and redraws on collision, so all values differ.
Only ``random()`` is used; its output is fixed for a given seed across
platforms and Python versions.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Sequence, Union

from .instance import Instance

__all__ = [
    "FIXTURES",
    "fixture",
    "fixture_ids",
    "thm1_impossibility",
    "thm3_tightness",
    "thm3_family",
    "ex1_collusion",
    "ex2_order_dependence",
    "thm8_poa",
    "thm9_lower_bound",
    "app_ex_bfs_vs_dfs",
    "app_ex_classes",
    "degree_leq_capacity_family",
    "complete_contested_family",
    "random_instance",
    "random_degree_leq_capacity",
]

Eps = Union[Fraction, str, int]
_DEFAULT_EPS = Fraction(1, 100)


def _eps(eps: Eps | None) -> Fraction:
    if eps is None:
        return _DEFAULT_EPS
    value = Fraction(eps)
    if value <= 0:
        raise ValueError(f"epsilon must be a positive rational, got {eps}")
    return value


def _inst(capacities: Sequence[int], values: Sequence, edges: Sequence[Sequence[int]]) -> Instance:
    return Instance(tuple(capacities), tuple(Fraction(v) for v in values),
                    tuple(frozenset(e) for e in edges))


def thm1_impossibility() -> Instance:
    """Two optimal matchings; whichever is chosen, one agent can gain by hiding an edge."""
    return _inst([1, 1], [1, Fraction(1, 10), Fraction(1, 10)], [[0, 1], [0, 2]])


def thm3_tightness(eps: Eps | None = None) -> Instance:
    """Two unit-capacity agents, both connected to tasks valued ``1 + eps`` and ``1``."""
    e = _eps(eps)
    return _inst([1, 1], [1 + e, 1], [[0, 1], [0, 1]])


def thm3_family(eps: Eps | None = None) -> tuple[Instance, Instance]:
    """The complete instance and the one obtained by deleting the edge that
    ``M_AP`` used for the cheaper task; ``M_AP`` is off by ``(2+eps)/(1+eps)``
    on the second."""
    e = _eps(eps)
    return thm3_tightness(e), _inst([1, 1], [1 + e, 1], [[0, 1], [0]])


def ex1_collusion() -> Instance:
    """Equal task values let agents 0 and 2 jointly gain against ``M_AP``."""
    return _inst([1, 1, 1], [1, 1], [[0, 1], [1], [0]])


def ex2_order_dependence(order: Sequence[str] | str = ("alpha", "beta", "gamma")) -> Instance:
    """Agent alpha (capacity 2) sees all four tasks, beta only t1, gamma only t2.

    ``order`` lists the agents by priority; values are ``2^-j``.
    """
    if isinstance(order, str):
        order = [s.strip() for s in order.split(",")]
    spec = {"alpha": (2, [0, 1, 2, 3]), "beta": (1, [0]), "gamma": (1, [1])}
    if sorted(order) != sorted(spec):
        raise ValueError(f"order must be a permutation of {sorted(spec)}")
    return _inst([spec[a][0] for a in order], [Fraction(1, 2 ** j) for j in range(1, 5)],
                 [spec[a][1] for a in order])


def thm8_poa(eps: Eps | None = None) -> Instance:
    """Optimum ``2 + eps``; the worst (and only) equilibrium of ``M_BFS``/``M_DFS`` gets ``1 + eps``."""
    e = _eps(eps)
    return _inst([1, 1], [1 + e, 1], [[0, 1], [0]])


def thm9_lower_bound(eps: Eps | None = None, stage: int = 2) -> Instance:
    """Lower-bound construction against any deterministic mechanism.

    Stage 1 has both agents on the expensive task only; stage 2 adds the
    edge from agent 0 to the cheap task, which is the instance with the
    ``(2+eps)/(1+eps)`` gap and a unique equilibrium.
    """
    e = _eps(eps)
    if stage == 1:
        return _inst([1, 1], [1 + e, 1], [[0], [0]])
    if stage == 2:
        return _inst([1, 1], [1 + e, 1], [[0, 1], [0]])
    raise ValueError("stage must be 1 or 2")


def app_ex_bfs_vs_dfs() -> Instance:
    """Complete 3x2 graph, unit capacities, values 1 and 1/2: BFS and DFS differ."""
    return _inst([1, 1, 1], [1, Fraction(1, 2)], [[0, 1]] * 3)


def app_ex_classes() -> Instance:
    """Five capacity-2 agents in two classes; values ``3^-j``.

    Agents 0, 2, 3 see every task, agents 1 and 4 only the last two.
    """
    full, tail = [0, 1, 2], [1, 2]
    return _inst([2] * 5, [Fraction(1, 3 ** j) for j in range(1, 4)],
                 [full, tail, full, full, tail])


def degree_leq_capacity_family(seed: int = 0, n: int = 3, m: int = 4,
                               density: float = 0.5) -> Instance:
    return random_degree_leq_capacity(seed, n, m, density=density)


def complete_contested_family(capacities: Sequence[int] = (1, 2, 2), m: int | None = None,
                              values: Sequence | None = None) -> Instance:
    """Complete bipartite graph with ``m <= sum(b) - max(b)`` tasks (default: equality)."""
    caps = list(capacities)
    limit = sum(caps) - max(caps)
    m = limit if m is None else m
    if m > limit:
        raise ValueError(f"m={m} exceeds sum(b) - max(b) = {limit}")
    vals = list(values) if values is not None else [Fraction(1, 2 ** j) for j in range(m)]
    return _inst(caps, vals, [list(range(m))] * len(caps))


FIXTURES: dict[str, Callable[..., Instance]] = {
    "thm1_impossibility": thm1_impossibility,
    "thm3_tightness": thm3_tightness,
    "ex1_collusion": ex1_collusion,
    "ex2_order_dependence": ex2_order_dependence,
    "thm8_poa": thm8_poa,
    "thm9_lower_bound": thm9_lower_bound,
    "app_ex_bfs_vs_dfs": app_ex_bfs_vs_dfs,
    "app_ex_classes": app_ex_classes,
    "degree_leq_capacity_family": degree_leq_capacity_family,
    "complete_contested_family": complete_contested_family,
}

EPS_FIXTURES = frozenset({"thm3_tightness", "thm8_poa", "thm9_lower_bound"})


def fixture_ids() -> list[str]:
    return list(FIXTURES)


def fixture(name: str, **params) -> Instance:
    """Build a named fixture; ``eps`` applies to the epsilon families."""
    try:
        build = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
    if "eps" in params and name not in EPS_FIXTURES:
        if params["eps"] is None:
            params.pop("eps")
        else:
            raise ValueError(f"fixture {name!r} takes no epsilon")
    return build(**params)


# -- random instances ---------------------------------------------------------

def random_instance(seed: int, n: int, m: int, b_max: int = 2, density: float = 0.5,
                    value_mode: str = "with_ties") -> Instance:
    """Seed-deterministic random instance; see the module docstring for the stream."""
    if n < 1 or m < 1 or b_max < 1:
        raise ValueError("n, m and b_max must be positive")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = random.Random(seed)
    caps = [1 + int(rng.random() * b_max) for _ in range(n)]
    if value_mode == "with_ties":
        values = [Fraction(1 + int(rng.random() * 4), 2) for _ in range(m)]
    elif value_mode == "distinct":
        values: list[Fraction] = []
        while len(values) < m:
            v = Fraction(1 + int(rng.random() * 8 * m), m)
            if v not in values:
                values.append(v)
    else:
        raise ValueError(f"unknown value_mode {value_mode!r}")
    edges = [[j for j in range(m) if rng.random() < density] for _ in range(n)]
    return _inst(caps, values, edges)


def random_degree_leq_capacity(seed: int, n: int, m: int, b_max: int = 2,
                               density: float = 0.5) -> Instance:
    """Random instance with every capacity raised to at least the agent's degree."""
    base = random_instance(seed, n, m, b_max, density)
    caps = [max(b, len(e)) for b, e in zip(base.capacities, base.true_edges)]
    return Instance(tuple(caps), base.values, base.true_edges)
