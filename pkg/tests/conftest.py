import itertools

import numpy as np
import pytest

from nested_qsearch.csp import graph_coloring_instance


@pytest.fixture
def triangle3():
    return graph_coloring_instance([(0, 1), (1, 2), (0, 2)], 3, 3)


@pytest.fixture
def triangle2():
    return graph_coloring_instance([(0, 1), (1, 2), (0, 2)], 3, 2)


def brute_force_good(inst, level):
    """Reference goodness over every assignment at ``level`` via itertools, no numpy tricks."""
    out = []
    for vals in itertools.product(range(inst.b), repeat=level):
        ok = True
        for vars_, bad in inst.nogoods:
            if max(vars_) < level and all(vals[v] == x for v, x in zip(vars_, bad)):
                ok = False
                break
        out.append(ok)
    return np.array(out, dtype=bool)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for r in test_acceptance.RESULTS:
            terminalreporter.write_line(r.line())
