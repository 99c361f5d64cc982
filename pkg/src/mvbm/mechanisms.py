"""The three mechanisms as maps from agent reports to matchings.

``M_BFS`` and ``M_DFS`` run the optimal augmenting-path solver with the
corresponding search; ``M_AP`` runs the length-one variant. In EMS the
solver uses the true capacities, in ECMS the declared ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from . import engine
from .engine import SearchKind
from .instance import (Instance, Matching, Mode, Report, ReportError, UtilityVector,
                       utilities, validate_report)

__all__ = [
    "Mechanism",
    "MechanismKind",
    "Outcome",
    "SingleEdgeWitness",
    "run",
    "truthful_outcome",
    "best_single_edge_hide",
]


class Mechanism(str, enum.Enum):
    BFS = "bfs"
    DFS = "dfs"
    AP = "ap"

    @property
    def search(self) -> SearchKind:
        return SearchKind(self.value)


@dataclass(frozen=True)
class MechanismKind:
    mechanism: Mechanism = Mechanism.BFS
    mode: Mode = Mode.EMS

    def __post_init__(self) -> None:
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        object.__setattr__(self, "mode", Mode(self.mode))

    @classmethod
    def of(cls, kind: "MechanismKind | Mechanism | str", mode: Mode | str | None = None
           ) -> "MechanismKind":
        if isinstance(kind, MechanismKind):
            return kind if mode is None else cls(kind.mechanism, Mode(mode))
        return cls(Mechanism(kind), Mode(mode or Mode.EMS))

    @property
    def label(self) -> str:
        return f"M_{self.mechanism.name}"

    def __str__(self) -> str:
        return f"{self.label}/{self.mode.name}"


@dataclass(frozen=True)
class Outcome:
    matching: Matching
    utilities: UtilityVector

    @property
    def welfare(self) -> Fraction:
        return self.utilities.welfare


def run(instance: Instance, report: Report, kind: MechanismKind | Mechanism | str) -> Outcome:
    """Run a mechanism on a validated report; utilities use the public task values."""
    kind = MechanismKind.of(kind)
    problems = validate_report(instance, report, kind.mode)
    if problems:
        raise ReportError(problems)
    matching = engine.solve(report.declared_edges, report.effective_capacities(instance),
                            instance.values, kind.mechanism.search)
    return Outcome(matching, utilities(instance, matching))


def truthful_outcome(instance: Instance, kind: MechanismKind | Mechanism | str) -> Outcome:
    kind = MechanismKind.of(kind)
    return run(instance, instance.truthful_report(kind.mode), kind)


@dataclass(frozen=True)
class SingleEdgeWitness:
    agent: int
    hidden_task: int
    truthful_utility: Fraction
    manipulated_utility: Fraction

    @property
    def gain(self) -> Fraction:
        return self.manipulated_utility - self.truthful_utility


def best_single_edge_hide(instance: Instance, kind: MechanismKind | Mechanism | str
                          ) -> SingleEdgeWitness | None:
    """First (agent, hidden edge) in index order whose removal strictly helps the agent.

    An agent with a single edge cannot hide it, since reports must be non-empty.
    """
    kind = MechanismKind.of(kind)
    truthful = instance.truthful_report(kind.mode)
    base = run(instance, truthful, kind).utilities.per_agent
    for i in range(instance.n):
        tasks = instance.true_edges[i]
        if len(tasks) < 2:
            continue
        for j in sorted(tasks):
            outcome = run(instance, truthful.replace(i, tasks - {j}), kind)
            if outcome.utilities.per_agent[i] > base[i]:
                return SingleEdgeWitness(i, j, base[i], outcome.utilities.per_agent[i])
    return None
