import io
import json
from fractions import Fraction

import pytest
from hypothesis import given

from mvbm.fixtures import thm1_impossibility
from mvbm.instance import (Instance, InstanceError, Matching, Mode, Report, dump_instance,
                           load_instance, loads_instance, matching_from_dict, matching_to_dict,
                           parse_value, utilities, validate_report)

from conftest import instances

IMPOSSIBILITY_JSON = json.dumps({
    "tasks": [{"value": "1"}, {"value": "0.1"}, {"value": "1/10"}],
    "agents": [{"capacity": 1, "edges": [0, 1]}, {"capacity": 1, "edges": [0, 2]}],
})


def test_load_impossibility_instance():
    inst = load_instance(io.BytesIO(IMPOSSIBILITY_JSON.encode()))
    assert (inst.n, inst.m) == (2, 3)
    assert inst.values == (1, Fraction(1, 10), Fraction(1, 10))
    assert inst == thm1_impossibility()


@pytest.mark.parametrize("raw, expected", [
    ("3", Fraction(3)), ("1/10", Fraction(1, 10)), ("0.1", Fraction(1, 10)), (2, Fraction(2)),
])
def test_parse_value_is_exact(raw, expected):
    assert parse_value(raw) == expected


def test_isolated_agent_without_tasks_is_accepted():
    inst = loads_instance('{"tasks": [], "agents": [{"capacity": 1, "edges": []}]}')
    assert inst.n == 1 and inst.m == 0


def test_zero_value_rejected():
    text = '{"tasks": [{"value": "1"}, {"value": "0"}], "agents": []}'
    with pytest.raises(InstanceError, match="task value must be positive"):
        loads_instance(text)


@pytest.mark.parametrize("text, fragment", [
    ('{"tasks": [{"value": "1"}], "agents": [{"capacity": 1, "edges": [3]}]}', "out of range"),
    ('{"tasks": [{"value": "1"}], "agents": [{"capacity": 0, "edges": [0]}]}', "capacity"),
    ('{"tasks": [{"value": "1"}], "agents": [{"capacity": 1, "edges": [0, 0]}]}', "duplicate"),
    ('{"tasks": [{"value": 0.5}], "agents": []}', "string or integer"),
    ('{"tasks": [{"value": "abc"}], "agents": []}', "invalid task value"),
    ('{"agents": []}', "missing key 'tasks'"),
])
def test_validation_errors(text, fragment):
    with pytest.raises(InstanceError, match=fragment):
        loads_instance(text)


def test_parse_error_reports_location():
    with pytest.raises(InstanceError, match="line 2 column"):
        loads_instance('{"tasks": [\n')


@given(instances())
def test_round_trip(inst):
    assert loads_instance(dump_instance(inst)) == inst


@given(instances())
def test_truthful_report_is_valid(inst):
    if all(inst.true_edges):
        assert validate_report(inst, inst.truthful_report(Mode.EMS), Mode.EMS) == []
        assert validate_report(inst, inst.truthful_report(Mode.ECMS), Mode.ECMS) == []


def test_hiding_an_edge_is_valid():
    inst = thm1_impossibility()
    report = inst.truthful_report().replace(1, {0})
    assert validate_report(inst, report, Mode.EMS) == []


def test_fabricated_edge_is_a_violation():
    inst = thm1_impossibility()
    report = inst.truthful_report().replace(0, {0, 2})
    [problem] = validate_report(inst, report, Mode.EMS)
    assert "fabricated edge" in problem


def test_empty_report_is_a_violation():
    inst = thm1_impossibility()
    assert validate_report(inst, inst.truthful_report().replace(0, set()), "ems")


def test_capacity_above_truth_is_a_violation():
    inst = thm1_impossibility()
    report = Report(inst.true_edges, (2, 1))
    [problem] = validate_report(inst, report, Mode.ECMS)
    assert "capacity exceeds true capacity" in problem


def test_mode_mismatch_is_a_violation():
    inst = thm1_impossibility()
    assert validate_report(inst, Report(inst.true_edges), Mode.ECMS)
    assert validate_report(inst, Report(inst.true_edges, (1, 1)), Mode.EMS)


def test_utilities_on_impossibility_instance():
    inst = thm1_impossibility()
    u = utilities(inst, Matching({(0, 0), (1, 2)}))
    assert u.per_agent == (1, Fraction(1, 10)) and u.welfare == Fraction(11, 10)
    assert utilities(inst, Matching({(0, 1), (1, 0)})).welfare == Fraction(11, 10)
    assert utilities(inst, Matching()).welfare == 0


@pytest.mark.parametrize("pairs", [{(0, 0), (1, 0)}, {(0, 0), (0, 1)}, {(1, 1)}])
def test_utilities_rejects_invalid_matchings(pairs):
    with pytest.raises(InstanceError):
        utilities(thm1_impossibility(), Matching(pairs))


def test_matching_json_round_trip():
    m = Matching({(1, 0), (0, 1)})
    assert matching_to_dict(m) == {"pairs": [[0, 1], [1, 0]]}
    assert matching_from_dict(matching_to_dict(m)) == m
