from fractions import Fraction

from hypothesis import strategies as st

from mvbm.instance import Instance

SMALL_VALUES = [Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(2)]


@st.composite
def instances(draw, max_n=4, max_m=4, max_b=2, values=SMALL_VALUES, distinct=False):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    caps = tuple(draw(st.integers(1, max_b)) for _ in range(n))
    if distinct:
        vals = tuple(draw(st.lists(st.sampled_from(values), min_size=m, max_size=m, unique=True)))
    else:
        vals = tuple(draw(st.sampled_from(values)) for _ in range(m))
    edges = tuple(frozenset(draw(st.sets(st.integers(0, m - 1)))) for _ in range(n))
    return Instance(caps, vals, edges)


def top_sum(instance, agent):
    vals = sorted((instance.values[j] for j in instance.true_edges[agent]), reverse=True)
    return sum(vals[:instance.capacities[agent]], Fraction(0))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
