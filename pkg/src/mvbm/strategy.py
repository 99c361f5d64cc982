"""Strategic analysis of the mechanisms.

Every check here is an exhaustive enumeration over pure strategies with exact
arithmetic. A strategy is a non-empty subset of the agent's true tasks (plus a
capacity in ``[1, b_i]`` in ECMS). Enumerations are bounded by an explicit
``cap``; going over it raises :class:`EnumerationCapExceeded` rather than
sampling.

Ties between strategies with equal utility are resolved towards the truthful
report, then towards fewer edges, then the lexicographically smallest sorted
edge tuple, then the larger capacity.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import engine
from .engine import SearchKind
from .instance import EnumerationCapExceeded, Instance, Matching, Mode, Report
from .mechanisms import Mechanism, MechanismKind, truthful_outcome

__all__ = [
    "default_cap",
    "Strategy",
    "StrategyProfile",
    "BestResponse",
    "EquilibriumVerdict",
    "EquilibriumSet",
    "PoaPos",
    "ManipulationWitness",
    "CoalitionWitness",
    "TruthfulClass",
    "AgentClass",
    "strategy_space",
    "truthful_profile",
    "profile_to_report",
    "report_to_profile",
    "profile_outcome",
    "fcfs_policies",
    "fcfs_profile",
    "best_response",
    "verify_nash",
    "enumerate_equilibria",
    "empirical_poa_pos",
    "check_truthfulness",
    "check_group_sp",
    "agent_classes",
    "classify_truthful_inputs",
]

_FALLBACK_CAP = 1_000_000


def default_cap() -> int:
    """Enumeration cap, overridable with ``MVBM_CAP_DEFAULT``."""
    raw = os.environ.get("MVBM_CAP_DEFAULT")
    if raw:
        value = int(raw)
        if value < 1:
            raise ValueError("MVBM_CAP_DEFAULT must be positive")
        return value
    return _FALLBACK_CAP


class Strategy(NamedTuple):
    edges: frozenset[int]
    capacity: int


StrategyProfile = tuple[Strategy, ...]


def _cap(cap: int | None) -> int:
    return default_cap() if cap is None else cap


def _sort_key(instance: Instance, agent: int, s: Strategy):
    truthful = s.edges == instance.true_edges[agent] and s.capacity == instance.capacities[agent]
    return (not truthful, len(s.edges), tuple(sorted(s.edges)), -s.capacity)


def strategy_space(instance: Instance, agent: int, mode: Mode | str = Mode.EMS,
                   cap: int | None = None) -> list[Strategy]:
    """All strategies of ``agent``, in tie-break order (truthful first)."""
    cap = _cap(cap)
    tasks = sorted(instance.true_edges[agent])
    b = instance.capacities[agent]
    caps = range(1, b + 1) if Mode(mode) is Mode.ECMS else (b,)
    if not tasks:
        return [Strategy(frozenset(), b)]
    size = (2 ** len(tasks) - 1) * len(caps)
    if size > cap:
        raise EnumerationCapExceeded(f"strategies of agent {agent}", size, cap)
    out = [Strategy(frozenset(sub), c)
           for k in range(1, len(tasks) + 1)
           for sub in itertools.combinations(tasks, k)
           for c in caps]
    out.sort(key=lambda s: _sort_key(instance, agent, s))
    return out


def truthful_profile(instance: Instance) -> StrategyProfile:
    return tuple(Strategy(e, b) for e, b in zip(instance.true_edges, instance.capacities))


def profile_to_report(profile: StrategyProfile, mode: Mode | str = Mode.EMS) -> Report:
    caps = tuple(s.capacity for s in profile) if Mode(mode) is Mode.ECMS else None
    return Report(tuple(s.edges for s in profile), caps)


def report_to_profile(instance: Instance, report: Report) -> StrategyProfile:
    caps = report.effective_capacities(instance)
    return tuple(Strategy(e, c) for e, c in zip(report.declared_edges, caps))


class _Game:
    """Payoff oracle for one instance and mechanism, memoised by profile."""

    def __init__(self, instance: Instance, kind: MechanismKind):
        self.instance = instance
        self.kind = kind
        self.ecms = kind.mode is Mode.ECMS
        self.search: SearchKind = kind.mechanism.search
        self.order = engine.task_order(instance.values)
        self._memo: dict[StrategyProfile, tuple[Fraction, ...]] = {}

    def owners(self, profile: StrategyProfile) -> list[int]:
        caps = [s.capacity for s in profile] if self.ecms else self.instance.capacities
        return engine.solve_owners([s.edges for s in profile], caps, self.order,
                                   self.instance.m, self.search)

    def payoff(self, profile: StrategyProfile) -> tuple[Fraction, ...]:
        hit = self._memo.get(profile)
        if hit is None:
            util = [Fraction(0)] * self.instance.n
            for j, i in enumerate(self.owners(profile)):
                if i >= 0:
                    util[i] += self.instance.values[j]
            hit = self._memo[profile] = tuple(util)
        return hit


def profile_outcome(instance: Instance, profile: StrategyProfile,
                    kind: MechanismKind | Mechanism | str) -> Matching:
    """The matching a mechanism returns when the agents play ``profile``."""
    game = _Game(instance, MechanismKind.of(kind))
    return Matching(frozenset((i, j) for j, i in enumerate(game.owners(profile)) if i >= 0))


# -- FCFS policies ------------------------------------------------------------

def fcfs_policies(instance: Instance) -> tuple[frozenset[int], ...]:
    """Each agent, in priority order, takes its top-``b_i`` remaining connected tasks."""
    remaining = set(range(instance.m))
    out = []
    for tasks, b in zip(instance.true_edges, instance.capacities):
        available = sorted(tasks & remaining, key=lambda j: (-instance.values[j], j))
        taken = frozenset(available[:b])
        remaining -= taken
        out.append(taken)
    return tuple(out)


def fcfs_profile(instance: Instance) -> StrategyProfile:
    """The FCFS policies as a playable profile.

    An agent whose policy is empty has all its tasks claimed by higher
    priority agents and gets nothing whatever it reports; it plays its
    truthful edge set so the profile stays within the strategy sets.
    """
    return tuple(Strategy(p if p else e, b) for p, e, b in
                 zip(fcfs_policies(instance), instance.true_edges, instance.capacities))


# -- best responses and Nash equilibria ---------------------------------------

@dataclass(frozen=True)
class BestResponse:
    agent: int
    strategy: Strategy
    utility: Fraction


def _best_response(game: _Game, agent: int, profile: StrategyProfile,
                   space: Sequence[Strategy]) -> BestResponse:
    best: BestResponse | None = None
    head, tail = profile[:agent], profile[agent + 1:]
    for s in space:
        u = game.payoff(head + (s,) + tail)[agent]
        if best is None or u > best.utility:
            best = BestResponse(agent, s, u)
    assert best is not None
    return best


def best_response(instance: Instance, agent: int, others: StrategyProfile | Report,
                  kind: MechanismKind | Mechanism | str, cap: int | None = None) -> BestResponse:
    """Exact argmax of ``agent``'s utility with the other agents' play fixed.

    ``others`` is a full profile; the entry for ``agent`` is ignored.
    """
    kind = MechanismKind.of(kind)
    if isinstance(others, Report):
        others = report_to_profile(instance, others)
    space = strategy_space(instance, agent, kind.mode, cap)
    return _best_response(_Game(instance, kind), agent, tuple(others), space)


@dataclass(frozen=True)
class EquilibriumVerdict:
    is_ne: bool
    agent: int | None = None
    strategy: Strategy | None = None
    gain: Fraction | None = None


def verify_nash(instance: Instance, profile: StrategyProfile | Report,
                kind: MechanismKind | Mechanism | str, cap: int | None = None
                ) -> EquilibriumVerdict:
    """Check every unilateral deviation; report the first agent that strictly gains."""
    kind = MechanismKind.of(kind)
    if isinstance(profile, Report):
        profile = report_to_profile(instance, profile)
    profile = tuple(profile)
    game = _Game(instance, kind)
    current = game.payoff(profile)
    spaces = [strategy_space(instance, i, kind.mode, cap) for i in range(instance.n)]
    for i in range(instance.n):
        br = _best_response(game, i, profile, spaces[i])
        if br.utility > current[i]:
            return EquilibriumVerdict(False, i, br.strategy, br.utility - current[i])
    return EquilibriumVerdict(True)


@dataclass(frozen=True)
class EquilibriumSet:
    equilibria: tuple[tuple[StrategyProfile, Fraction], ...]
    optimum: Fraction
    profiles_scanned: int

    @property
    def min_welfare(self) -> Fraction:
        return min(w for _, w in self.equilibria)

    @property
    def max_welfare(self) -> Fraction:
        return max(w for _, w in self.equilibria)


def _optimum(instance: Instance) -> Fraction:
    return truthful_outcome(instance, MechanismKind(Mechanism.BFS, Mode.EMS)).welfare


def enumerate_equilibria(instance: Instance, kind: MechanismKind | Mechanism | str,
                         cap: int | None = None) -> EquilibriumSet:
    """Scan every joint pure profile and keep the Nash equilibria, in profile order."""
    kind = MechanismKind.of(kind)
    cap = _cap(cap)
    spaces = [strategy_space(instance, i, kind.mode, cap) for i in range(instance.n)]
    total = math.prod(len(s) for s in spaces)
    if total > cap:
        raise EnumerationCapExceeded("joint profiles", total, cap)
    game = _Game(instance, kind)
    index_profiles = list(itertools.product(*(range(len(s)) for s in spaces)))
    pay = {}
    for idx in index_profiles:
        pay[idx] = game.payoff(tuple(spaces[i][k] for i, k in enumerate(idx)))
    # best achievable payoff for agent i given the others' indices
    best_dev: list[dict[tuple[int, ...], Fraction]] = [{} for _ in spaces]
    for idx, u in pay.items():
        for i in range(len(spaces)):
            key = idx[:i] + idx[i + 1:]
            if key not in best_dev[i] or u[i] > best_dev[i][key]:
                best_dev[i][key] = u[i]
    found = []
    for idx in index_profiles:
        u = pay[idx]
        if all(u[i] >= best_dev[i][idx[:i] + idx[i + 1:]] for i in range(len(spaces))):
            profile = tuple(spaces[i][k] for i, k in enumerate(idx))
            found.append((profile, sum(u, Fraction(0))))
    return EquilibriumSet(tuple(found), _optimum(instance), total)


@dataclass(frozen=True)
class PoaPos:
    poa_ratio: Fraction
    pos_ratio: Fraction
    optimum: Fraction
    min_ne_welfare: Fraction
    max_ne_welfare: Fraction
    ne_count: int


class NoEquilibriumFound(RuntimeError):
    pass


def _ratio(optimum: Fraction, welfare: Fraction) -> Fraction:
    if welfare == 0:
        if optimum == 0:
            return Fraction(1)
        raise ZeroDivisionError("equilibrium with zero welfare on a non-trivial instance")
    return optimum / welfare


def empirical_poa_pos(instance: Instance, kind: MechanismKind | Mechanism | str,
                      cap: int | None = None) -> PoaPos:
    """Optimum over worst and over best equilibrium welfare, on this one instance."""
    eq = enumerate_equilibria(instance, kind, cap)
    if not eq.equilibria:
        raise NoEquilibriumFound(f"no pure equilibrium found for {MechanismKind.of(kind)}")
    return PoaPos(_ratio(eq.optimum, eq.min_welfare), _ratio(eq.optimum, eq.max_welfare),
                  eq.optimum, eq.min_welfare, eq.max_welfare, len(eq.equilibria))


# -- manipulation searches ----------------------------------------------------

@dataclass(frozen=True)
class ManipulationWitness:
    agent: int
    strategy: Strategy
    truthful_utility: Fraction
    manipulated_utility: Fraction

    @property
    def gain(self) -> Fraction:
        return self.manipulated_utility - self.truthful_utility


def check_truthfulness(instance: Instance, kind: MechanismKind | Mechanism | str,
                       cap: int | None = None) -> ManipulationWitness | None:
    """First agent (by index) with a strictly profitable misreport, and its best one."""
    kind = MechanismKind.of(kind)
    game = _Game(instance, kind)
    truthful = truthful_profile(instance)
    base = game.payoff(truthful)
    for i in range(instance.n):
        space = strategy_space(instance, i, kind.mode, cap)
        br = _best_response(game, i, truthful, space)
        if br.utility > base[i]:
            return ManipulationWitness(i, br.strategy, base[i], br.utility)
    return None


@dataclass(frozen=True)
class CoalitionWitness:
    coalition: tuple[int, ...]
    strategies: tuple[Strategy, ...]
    truthful_utilities: tuple[Fraction, ...]
    manipulated_utilities: tuple[Fraction, ...]


def check_group_sp(instance: Instance, kind: MechanismKind | Mechanism | str,
                   max_coalition: int = 2, cap: int | None = None) -> CoalitionWitness | None:
    """Search coalitions of size 1..``max_coalition`` for a joint misreport.

    A witness leaves every member at least as well off as truthful reporting
    and makes at least one strictly better off. Coalitions are scanned by
    size, then lexicographically; joint deviations in product order.
    """
    kind = MechanismKind.of(kind)
    cap = _cap(cap)
    game = _Game(instance, kind)
    truthful = truthful_profile(instance)
    base = game.payoff(truthful)
    spaces = [strategy_space(instance, i, kind.mode, cap) for i in range(instance.n)]
    for size in range(1, min(max_coalition, instance.n) + 1):
        for coalition in itertools.combinations(range(instance.n), size):
            joint = math.prod(len(spaces[i]) for i in coalition)
            if joint > cap:
                raise EnumerationCapExceeded(f"joint deviations of coalition {coalition}", joint, cap)
            for combo in itertools.product(*(spaces[i] for i in coalition)):
                profile = list(truthful)
                for i, s in zip(coalition, combo):
                    profile[i] = s
                profile = tuple(profile)
                if profile == truthful:
                    continue
                u = game.payoff(profile)
                if (all(u[i] >= base[i] for i in coalition)
                        and any(u[i] > base[i] for i in coalition)):
                    return CoalitionWitness(coalition, tuple(combo),
                                            tuple(base[i] for i in coalition),
                                            tuple(u[i] for i in coalition))
    return None


# -- input classes on which M_BFS is truthful ----------------------------------

class TruthfulClass(str, enum.Enum):
    DEGREE_LEQ_CAPACITY = "DegreeLeqCapacity"
    EVERY_TASK_CONTESTED = "EveryTaskContested"
    CLASS_CONDITION = "ClassCondition"


@dataclass(frozen=True)
class AgentClass:
    """Agents sharing the same true task set and capacity."""

    members: tuple[int, ...]
    tasks: frozenset[int]
    capacity: int
    threshold: int = field(init=False)

    def __post_init__(self) -> None:
        # ceil(|T| / b) + 1; the class needs strictly more members than this
        object.__setattr__(self, "threshold", -(-len(self.tasks) // self.capacity) + 1)

    @property
    def satisfied(self) -> bool:
        return len(self.members) > self.threshold


def agent_classes(instance: Instance) -> list[AgentClass]:
    """Partition the agents by ``(T_i, b_i)``; classes ordered by first member."""
    groups: dict[tuple[frozenset[int], int], list[int]] = {}
    for i, (tasks, b) in enumerate(zip(instance.true_edges, instance.capacities)):
        groups.setdefault((tasks, b), []).append(i)
    return [AgentClass(tuple(members), tasks, b) for (tasks, b), members in groups.items()]


def classify_truthful_inputs(instance: Instance) -> frozenset[TruthfulClass]:
    """Which of the sufficient conditions for truthfulness of ``M_BFS`` hold.

    ``EveryTaskContested`` is evaluated against the truthful ``M_BFS``
    matching. ``ClassCondition`` requires the strict member-count inequality
    for every class of agents that has at least one edge.
    """
    found = set()
    if all(len(e) <= b for e, b in zip(instance.true_edges, instance.capacities)):
        found.add(TruthfulClass.DEGREE_LEQ_CAPACITY)

    mu = truthful_outcome(instance, Mechanism.BFS).matching
    load = [0] * instance.n
    for i, _ in mu.pairs:
        load[i] += 1
    contested = True
    for j in range(instance.m):
        if not any(j in tasks and (i, j) not in mu.pairs and load[i] < instance.capacities[i]
                   for i, tasks in enumerate(instance.true_edges)):
            contested = False
            break
    if contested:
        found.add(TruthfulClass.EVERY_TASK_CONTESTED)

    classes = [c for c in agent_classes(instance) if c.tasks]
    if classes and all(c.satisfied for c in classes):
        found.add(TruthfulClass.CLASS_CONDITION)
    return frozenset(found)
