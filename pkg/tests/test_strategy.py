from fractions import Fraction

import pytest
from hypothesis import given, settings

from mvbm.fixtures import (app_ex_classes, ex1_collusion, ex2_order_dependence, random_instance,
                           thm1_impossibility, thm8_poa, thm9_lower_bound)
from mvbm.instance import EnumerationCapExceeded, Instance, Matching, Mode
from mvbm.mechanisms import Mechanism, MechanismKind
from mvbm.strategy import (Strategy, TruthfulClass, best_response, check_group_sp,
                           check_truthfulness, classify_truthful_inputs, empirical_poa_pos,
                           enumerate_equilibria, fcfs_policies, fcfs_profile, profile_outcome,
                           strategy_space, truthful_profile, verify_nash)

from conftest import instances, top_sum

F = Fraction


def fs(*xs):
    return frozenset(xs)


def test_strategy_space_ems_and_ecms():
    inst = thm1_impossibility()
    ems = strategy_space(inst, 0, Mode.EMS)
    assert ems[0] == Strategy(fs(0, 1), 1)
    assert {s.edges for s in ems} == {fs(0), fs(1), fs(0, 1)}
    inst2 = Instance((2,), (F(1), F(1)), (fs(0, 1),))
    assert len(strategy_space(inst2, 0, Mode.ECMS)) == 3 * 2


def test_strategy_space_cap():
    inst = Instance((1,), (F(1),) * 5, (fs(0, 1, 2, 3, 4),))
    with pytest.raises(EnumerationCapExceeded):
        strategy_space(inst, 0, Mode.EMS, cap=10)


def test_fcfs_priority_changes_alpha_policy():
    assert fcfs_policies(ex2_order_dependence(("alpha", "beta", "gamma")))[0] == fs(0, 1)
    assert fcfs_policies(ex2_order_dependence(("beta", "alpha", "gamma")))[1] == fs(1, 2)
    assert fcfs_policies(ex2_order_dependence(("gamma", "alpha", "beta")))[1] == fs(0, 2)


def test_alpha_best_response_depends_on_order():
    inst = ex2_order_dependence(("gamma", "alpha", "beta"))
    br = best_response(inst, 1, truthful_profile(inst), "bfs")
    assert br.strategy.edges == fs(0, 2) and br.utility == F(5, 8)
    inst = ex2_order_dependence(("beta", "alpha", "gamma"))
    br = best_response(inst, 1, truthful_profile(inst), "bfs")
    assert br.strategy.edges == fs(1, 2) and br.utility == F(3, 8)


def test_fcfs_profile_substitutes_empty_policy():
    inst = ex2_order_dependence()
    prof = fcfs_profile(inst)
    assert [s.edges for s in prof] == [fs(0, 1), fs(0), fs(1)]


@settings(max_examples=200, deadline=None)
@given(instances(max_n=3, max_m=4, max_b=2))
def test_first_agent_gets_top_values(inst):
    for mech in ("bfs", "dfs"):
        assert best_response(inst, 0, truthful_profile(inst), mech).utility == top_sum(inst, 0)


@settings(max_examples=150, deadline=None)
@given(instances(max_n=3, max_m=4, max_b=2))
def test_fcfs_is_an_equilibrium(inst):
    prof = fcfs_profile(inst)
    union = Matching(frozenset((i, j) for i, p in enumerate(fcfs_policies(inst)) for j in p))
    for mech in ("bfs", "dfs"):
        assert verify_nash(inst, prof, mech).is_ne
        assert profile_outcome(inst, prof, mech) == union


@settings(max_examples=150, deadline=None)
@given(instances(max_n=4, max_m=4, max_b=2))
def test_ap_truthful_outcome_is_fcfs(inst):
    union = Matching(frozenset((i, j) for i, p in enumerate(fcfs_policies(inst)) for j in p))
    assert profile_outcome(inst, truthful_profile(inst), "ap") == union


def test_truthful_is_not_equilibrium_on_poa_fixture():
    inst = thm8_poa(F(1, 1000))
    v = verify_nash(inst, truthful_profile(inst), "bfs")
    assert not v.is_ne and v.agent == 0 and v.strategy.edges == fs(0)


def test_policy_subset_profiles_are_equilibria():
    # any report containing the FCFS policy is still an equilibrium
    inst = random_instance(11, 3, 4, b_max=2, density=0.8)
    pol = fcfs_policies(inst)
    prof = tuple(Strategy(e, b) for e, b in zip(inst.true_edges, inst.capacities))
    assert all(p <= s.edges for p, s in zip(pol, prof))
    for i, p in enumerate(pol):
        if p:
            prof = prof[:i] + (Strategy(p, inst.capacities[i]),) + prof[i + 1:]
            assert verify_nash(inst, prof, "bfs").is_ne


def test_equilibria_poa_fixture():
    res = empirical_poa_pos(thm8_poa(F(1, 1000)), "bfs")
    assert res.poa_ratio == res.pos_ratio == F(2001, 1001)
    assert res.ne_count == 1 and res.optimum == F(2001, 1000)


def test_lower_bound_unique_equilibrium():
    eq = enumerate_equilibria(thm9_lower_bound(F(1, 100)), "dfs")
    assert len(eq.equilibria) == 1
    assert eq.optimum / eq.min_welfare == F(201, 101)


def test_single_agent_game():
    inst = Instance((1,), (F(1), F(2)), (fs(0, 1),))
    eq = enumerate_equilibria(inst, "bfs")
    assert eq.profiles_scanned == 3
    assert {p[0].edges for p, _ in eq.equilibria} == {fs(1), fs(0, 1)}
    assert empirical_poa_pos(inst, "bfs").poa_ratio == 1


def test_enumeration_cap():
    with pytest.raises(EnumerationCapExceeded):
        enumerate_equilibria(app_ex_classes(), "bfs", cap=50)


@settings(max_examples=80, deadline=None)
@given(instances(max_n=3, max_m=3, max_b=2))
def test_poa_pos_bounds(inst):
    res = empirical_poa_pos(inst, "bfs")
    assert 1 <= res.pos_ratio <= res.poa_ratio <= 2


@settings(max_examples=80, deadline=None)
@given(instances(max_n=3, max_m=3, max_b=2, distinct=True))
def test_worst_equilibrium_matches_fcfs_with_distinct_values(inst):
    eq = enumerate_equilibria(inst, "bfs")
    fcfs = sum((inst.values[j] for p in fcfs_policies(inst) for j in p), F(0))
    assert eq.min_welfare == fcfs


def test_ties_break_worst_equilibrium_identity():
    # with equal values an equilibrium can sit below the FCFS welfare
    inst = Instance((1, 1), (F(2), F(2)), (fs(0, 1), fs(1)))
    eq = enumerate_equilibria(inst, "bfs")
    assert eq.min_welfare == 2
    assert sum((inst.values[j] for p in fcfs_policies(inst) for j in p), F(0)) == 4


def test_truthfulness_on_impossibility_instance():
    inst = thm1_impossibility()
    for mech in ("bfs", "dfs"):
        w = check_truthfulness(inst, mech)
        assert w.agent == 0 and w.truthful_utility == F(1, 10) and w.gain == F(9, 10)
    assert check_truthfulness(inst, "ap") is None
    assert check_truthfulness(inst, MechanismKind(Mechanism.AP, Mode.ECMS)) is None


def test_dfs_manipulable_on_class_example():
    inst = app_ex_classes()
    assert check_truthfulness(inst, "bfs") is None
    w = check_truthfulness(inst, "dfs")
    assert w.agent == 0 and w.gain > 0


def test_group_sp_collusion_example():
    inst = ex1_collusion()
    w = check_group_sp(inst, "ap", max_coalition=2)
    assert w.coalition == (0, 2)
    assert all(a <= b for a, b in zip(w.truthful_utilities, w.manipulated_utilities))
    assert check_group_sp(inst, "ap", max_coalition=1) is None


def test_classification():
    assert classify_truthful_inputs(app_ex_classes()) == {TruthfulClass.EVERY_TASK_CONTESTED}
    inst = Instance((1, 1, 1), (F(1),), (fs(0),) * 3)
    assert classify_truthful_inputs(inst) == set(TruthfulClass)
