import pytest

from derivations import Derivation, FocusedSearch, Selection, Step, indexed, rule_parts
from formulas import parse_formula
from sequents import ScSearch, Sequent


class EndlessSearch(FocusedSearch[int, int]):
    """Every state has one invertible successor and nothing ever closes"""

    calculus = "endless"

    def close(self, state):
        return None

    def invert(self, state):
        return Step((state + 1,), lambda subs: Derivation(state, "step", Selection(), tuple(subs)))

    def choices(self, state):
        return []

    def loop_key(self, state):
        return None


def test_runaway_branch_ends_as_exhausted(mlj):
    result = EndlessSearch(mlj).run(0)
    assert result.status == "exhausted"
    assert result.derivation is None


def test_depth_bound_is_configurable(mlj):
    search = EndlessSearch(mlj, budget=10_000, max_depth=25)
    result = search.run(0)
    assert result.exhausted
    assert result.nodes == 27


def test_shallow_bound_stops_a_real_search(k):
    goal = Sequent.goal(parse_formula("[1](a -> b) -> [1]a -> [1]b"))
    assert ScSearch(k, max_depth=1).run(goal).exhausted
    assert ScSearch(k).run(goal).proved


def test_deep_derivations_measure_without_recursion():
    d = Derivation(0, "leaf")
    for n in range(1, 12_000):
        d = Derivation(n, "step", Selection(), (d,))
    assert d.size == 12_000
    assert d.height == 11_999
    assert d.rule_counts() == {"leaf": 1, "step": 11_999}


@pytest.mark.parametrize("name, parts", [
    ("boxL_2_1", ("boxL", (2, 1))),
    ("impR_b", ("impR_b", ())),
    ("boxR_t_1", ("boxR_t", (1,))),
    ("init", ("init", ())),
])
def test_rule_names_split_into_base_and_indices(name, parts):
    assert rule_parts(name) == parts
    assert indexed(*parts[0:1], *parts[1]) == name
