"""Domain model: instances, agent reports, matchings and their JSON forms.

Agents and tasks are addressed by dense 0-based indices. The agent index is
also the mechanism priority: agent 0 is explored first. Task values are
:class:`fractions.Fraction` throughout, so every comparison is exact.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Mapping, Sequence, Union

__all__ = [
    "InstanceError",
    "ReportError",
    "EnumerationCapExceeded",
    "Mode",
    "Instance",
    "Report",
    "Matching",
    "UtilityVector",
    "parse_value",
    "format_value",
    "load_instance",
    "loads_instance",
    "dump_instance",
    "instance_to_dict",
    "instance_from_dict",
    "load_report",
    "report_from_dict",
    "matching_to_dict",
    "matching_from_dict",
    "validate_report",
    "utilities",
]


class InstanceError(ValueError):
    """Malformed or invalid instance, matching or report data."""


class ReportError(ValueError):
    """A report that violates the bounded-by-statement rules."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EnumerationCapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed the configured cap."""

    def __init__(self, what: str, size: int, cap: int):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(f"{what}: {size} candidates exceed cap {cap}")


class Mode(str, enum.Enum):
    EMS = "ems"     # agents may hide edges
    ECMS = "ecms"   # agents may hide edges and under-report capacity


Value = Fraction


def parse_value(raw: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"3"``, ``"1/10"`` or ``"0.1"`` (decimals are converted exactly)."""
    if isinstance(raw, bool):
        raise InstanceError(f"invalid task value {raw!r}")
    if isinstance(raw, (int, Fraction)):
        return Fraction(raw)
    if not isinstance(raw, str):
        # floats are rejected: their binary expansion is not the number the user meant
        raise InstanceError(f"task value must be a string or integer, got {type(raw).__name__}")
    try:
        return Fraction(raw.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceError(f"invalid task value {raw!r}") from exc


def format_value(value: Fraction) -> str:
    return str(Fraction(value))


@dataclass(frozen=True)
class Instance:
    """The public problem plus the agents' true private information.

    ``true_edges[i]`` is the set of tasks agent ``i`` is really connected to.
    Agents with no edges are allowed; they simply never receive a task.
    """

    capacities: tuple[int, ...]
    values: tuple[Fraction, ...]
    true_edges: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "capacities", tuple(self.capacities))
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        object.__setattr__(self, "true_edges", tuple(frozenset(e) for e in self.true_edges))
        if len(self.capacities) != len(self.true_edges):
            raise InstanceError(
                f"{len(self.capacities)} capacities given for {len(self.true_edges)} agents")
        for i, b in enumerate(self.capacities):
            if isinstance(b, bool) or not isinstance(b, int):
                raise InstanceError(f"agent {i}: capacity must be an integer")
            if b < 1:
                raise InstanceError(f"agent {i}: capacity must be at least 1, got {b}")
        for j, q in enumerate(self.values):
            if q <= 0:
                raise InstanceError(f"task {j}: task value must be positive, got {q}")
        m = len(self.values)
        for i, tasks in enumerate(self.true_edges):
            for j in tasks:
                if isinstance(j, bool) or not isinstance(j, int) or not 0 <= j < m:
                    raise InstanceError(f"agent {i}: edge to task {j!r} is out of range")

    @property
    def n(self) -> int:
        return len(self.capacities)

    @property
    def m(self) -> int:
        return len(self.values)

    def degree(self, agent: int) -> int:
        return len(self.true_edges[agent])

    def truthful_report(self, mode: Mode = Mode.EMS) -> "Report":
        caps = self.capacities if Mode(mode) is Mode.ECMS else None
        return Report(self.true_edges, caps)

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i, tasks in enumerate(self.true_edges) for j in tasks)


@dataclass(frozen=True)
class Report:
    """What the agents declare: edge subsets, plus capacities in ECMS."""

    declared_edges: tuple[frozenset[int], ...]
    declared_capacities: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "declared_edges",
                           tuple(frozenset(e) for e in self.declared_edges))
        if self.declared_capacities is not None:
            object.__setattr__(self, "declared_capacities", tuple(self.declared_capacities))

    @property
    def mode(self) -> Mode:
        return Mode.EMS if self.declared_capacities is None else Mode.ECMS

    def effective_capacities(self, instance: Instance) -> tuple[int, ...]:
        if self.declared_capacities is None:
            return instance.capacities
        return self.declared_capacities

    def replace(self, agent: int, edges: Iterable[int], capacity: int | None = None) -> "Report":
        """Return a copy in which ``agent`` declares ``edges`` (and ``capacity`` in ECMS)."""
        declared = list(self.declared_edges)
        declared[agent] = frozenset(edges)
        caps = self.declared_capacities
        if caps is not None and capacity is not None:
            caps = caps[:agent] + (capacity,) + caps[agent + 1:]
        return Report(tuple(declared), caps)


@dataclass(frozen=True)
class Matching:
    """A set of ``(agent, task)`` pairs."""

    pairs: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", frozenset((int(i), int(j)) for i, j in self.pairs))

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def tasks_of(self, agent: int) -> frozenset[int]:
        return frozenset(j for i, j in self.pairs if i == agent)

    def owner(self, task: int) -> int | None:
        for i, j in self.pairs:
            if j == task:
                return i
        return None

    @property
    def matched_tasks(self) -> frozenset[int]:
        return frozenset(j for _, j in self.pairs)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)


@dataclass(frozen=True)
class UtilityVector:
    per_agent: tuple[Fraction, ...]
    welfare: Fraction


# -- validation ---------------------------------------------------------------

def validate_report(instance: Instance, report: Report, mode: Mode | str = Mode.EMS) -> list[str]:
    """Return the list of rule violations; an empty list means the report is valid."""
    mode = Mode(mode)
    problems: list[str] = []
    if len(report.declared_edges) != instance.n:
        return [f"report covers {len(report.declared_edges)} agents, instance has {instance.n}"]
    for i, declared in enumerate(report.declared_edges):
        fabricated = sorted(declared - instance.true_edges[i])
        if fabricated:
            problems.append(f"agent {i}: fabricated edge to task(s) {fabricated}")
        if not declared and instance.true_edges[i]:
            problems.append(f"agent {i}: empty report")
    caps = report.declared_capacities
    if mode is Mode.EMS:
        if caps is not None:
            problems.append("capacities declared in EMS")
    elif caps is None:
        problems.append("ECMS report is missing declared capacities")
    elif len(caps) != instance.n:
        problems.append(f"report declares {len(caps)} capacities, instance has {instance.n} agents")
    else:
        for i, (c, b) in enumerate(zip(caps, instance.capacities)):
            if isinstance(c, bool) or not isinstance(c, int) or c < 1:
                problems.append(f"agent {i}: declared capacity must be a positive integer")
            elif c > b:
                problems.append(f"agent {i}: capacity exceeds true capacity ({c} > {b})")
    return problems


def utilities(instance: Instance, matching: Matching) -> UtilityVector:
    """Per-agent values of the matched tasks and the total welfare."""
    per_agent = [Fraction(0)] * instance.n
    load = [0] * instance.n
    seen: set[int] = set()
    for i, j in matching.pairs:
        if not 0 <= i < instance.n or not 0 <= j < instance.m:
            raise InstanceError(f"pair ({i}, {j}) is out of range")
        if j in seen:
            raise InstanceError(f"task {j} is matched more than once")
        if j not in instance.true_edges[i]:
            raise InstanceError(f"pair ({i}, {j}) is not an edge of the instance")
        seen.add(j)
        load[i] += 1
        if load[i] > instance.capacities[i]:
            raise InstanceError(f"agent {i}: capacity {instance.capacities[i]} exceeded")
        per_agent[i] += instance.values[j]
    return UtilityVector(tuple(per_agent), sum(per_agent, Fraction(0)))


# -- JSON ---------------------------------------------------------------------

def _require(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise InstanceError(f"{where}: missing key {key!r}")
    return obj[key]


def instance_from_dict(data: Mapping) -> Instance:
    tasks = _require(data, "tasks", "instance")
    agents = _require(data, "agents", "instance")
    if not isinstance(tasks, list) or not isinstance(agents, list):
        raise InstanceError("instance: 'tasks' and 'agents' must be lists")
    values = [parse_value(_require(t, "value", f"tasks[{j}]")) for j, t in enumerate(tasks)]
    capacities: list[int] = []
    edges: list[frozenset[int]] = []
    for i, agent in enumerate(agents):
        capacities.append(_require(agent, "capacity", f"agents[{i}]"))
        raw_edges = _require(agent, "edges", f"agents[{i}]")
        if not isinstance(raw_edges, list):
            raise InstanceError(f"agents[{i}]: 'edges' must be a list")
        if len(set(raw_edges)) != len(raw_edges):
            raise InstanceError(f"agents[{i}]: duplicate edge")
        edges.append(frozenset(raw_edges))
    return Instance(tuple(capacities), tuple(values), tuple(edges))


def instance_to_dict(instance: Instance) -> dict:
    return {
        "tasks": [{"value": format_value(q)} for q in instance.values],
        "agents": [
            {"capacity": b, "edges": sorted(e)}
            for b, e in zip(instance.capacities, instance.true_edges)
        ],
    }


def _decode(text: Union[str, bytes]) -> object:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def loads_instance(text: Union[str, bytes]) -> Instance:
    return instance_from_dict(_decode(text))


def load_instance(source: Union[IO, str, bytes]) -> Instance:
    """Read an instance from a file object, or from a JSON string/bytes."""
    if hasattr(source, "read"):
        source = source.read()
    return loads_instance(source)


def dump_instance(instance: Instance, indent: int | None = None) -> str:
    return json.dumps(instance_to_dict(instance), indent=indent)


def report_from_dict(data: Mapping) -> Report:
    edges = _require(data, "edges", "report")
    caps = data.get("capacities") if isinstance(data, Mapping) else None
    return Report(tuple(frozenset(e) for e in edges), None if caps is None else tuple(caps))


def load_report(source: Union[IO, str, bytes]) -> Report:
    if hasattr(source, "read"):
        source = source.read()
    return report_from_dict(_decode(source))


def matching_to_dict(matching: Matching) -> dict:
    return {"pairs": [[i, j] for i, j in matching.sorted_pairs()]}


def matching_from_dict(data: Mapping) -> Matching:
    pairs = _require(data, "pairs", "matching")
    try:
        return Matching(frozenset((int(i), int(j)) for i, j in pairs))
    except (TypeError, ValueError) as exc:
        raise InstanceError("matching: pairs must be [agent, task] integer lists") from exc
