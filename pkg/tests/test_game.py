from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pgspi import geometry as G
from pgspi.game import (
    DomainError,
    Game,
    Outcome,
    best_feasible_payoff,
    box,
    dominates,
    game_from_json,
    game_to_json,
    payoff,
    pmm,
    pmp,
    pmp_at,
    realize,
)
from pgspi.geometry import Polygon, Region


def seg(a, b) -> Region:
    return Region.of([Polygon.of([a, b])])


def test_scheduling_pmm(scheduling):
    assert scheduling.pmm == (1, 1)
    assert pmm(scheduling, pure_only=True) == (1, 1)


def test_scheduling_frontier(scheduling):
    assert scheduling.efficient == seg((1, 3), (3, 1))


def test_pmp_of_miscoordination(scheduling):
    miss = Outcome.pure("Slot1", "Slot2")
    assert pmp(scheduling, 0, miss) == seg((F(1), F(1)), (F(3), F(1)))
    assert pmp(scheduling, 1, miss) == seg((F(1), F(1)), (F(1), F(3)))


def test_pmp_above_pmm_keeps_other_coordinate(scheduling):
    got = pmp_at(scheduling, 0, (F(3, 2), F(2)))
    # on u2 = 2 the hull runs from x = 1 (frontier is x + y = 4)
    assert sorted(got.vertices()) == [(F(3, 2), F(2)), (F(2), F(2))]


def test_pmp_of_efficient_point_is_itself(scheduling):
    assert pmp_at(scheduling, 1, (F(3), F(1))) == Region.of([Polygon.of([(F(3), F(1))])])


def test_realize_midpoint_mixes_two_profiles(scheduling):
    out = realize(scheduling, (2, 2))
    assert payoff(scheduling, out) == (2, 2)
    assert dict(out.weights) == {("Slot1", "Slot1"): F(1, 2), ("Slot2", "Slot2"): F(1, 2)}


def test_realize_pure_point_prefers_pure(scheduling):
    assert realize(scheduling, (1, 1)) == Outcome.pure("Slot3", "Slot3")


def test_realize_infeasible(scheduling):
    with pytest.raises(DomainError):
        realize(scheduling, (3, 3))


@given(
    st.fractions(min_value=0, max_value=1, max_denominator=12),
    st.fractions(min_value=0, max_value=1, max_denominator=12),
)
def test_realize_round_trips_hull_points(scheduling, a, b):
    if a + b > 1:
        a, b = 1 - a, 1 - b
    at = (3 * a + b, a + 3 * b)
    assert payoff(scheduling, realize(scheduling, at)) == at


def test_outcome_weights_must_sum_to_one():
    with pytest.raises(DomainError):
        Outcome.of([(("A", "B"), F(1, 2))])


def test_negative_weight_rejected():
    with pytest.raises(DomainError):
        Outcome.of([(("A",), F(3, 2)), (("B",), F(-1, 2))])


def test_unknown_action_rejected(scheduling):
    with pytest.raises(DomainError):
        payoff(scheduling, Outcome.pure("Slot9", "Slot1"))


def test_dominance_modes():
    assert dominates((1, 1), (1, 0))
    assert not dominates((1, 1), (1, 0), "strict")
    with pytest.raises(DomainError):
        dominates((1,), (1, 2))


def test_box_with_cap(scheduling):
    got = box(scheduling, (F(1), F(1)), (F(2), None))
    assert G.contains(got, (F(2), F(2)))
    assert not G.contains(got, (F(3), F(1)))


def test_best_feasible_payoff(scheduling):
    assert best_feasible_payoff(scheduling, 0) == 3


def test_json_round_trip(scheduling):
    again = game_from_json(game_to_json(scheduling))
    assert again.payoffs == scheduling.payoffs


def test_ragged_payoffs_rejected():
    with pytest.raises(DomainError):
        game_from_json({"players": [["A", "B"], ["A"]], "payoffs": [[[1, 1]]]})


def three_player() -> Game:
    acts = [["X", "Y"]] * 3
    pay = [[[[1, 1, 1], [0, 0, 0]], [[0, 0, 0], [0, 0, 0]]], [[[0, 0, 0], [0, 0, 0]], [[0, 0, 0], [2, 2, 0]]]]
    return Game.from_matrix(acts, pay, resolution=4)


def test_three_players_use_lattice():
    g = three_player()
    assert g.feasible.point_mode
    assert (F(3, 2), F(3, 2), F(1, 2)) in g.lattice
    assert g.pmm == (1, 1, 0)
    got = pmp_at(g, 0, (0, 0, 0))
    # only the half-way mix of (2,2,0) with a zero cell keeps u2 = 1, u3 = 0
    assert set(got.points) == {(F(1), F(1), F(0))}
