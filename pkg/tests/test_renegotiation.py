from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgspi import geometry as G
from pgspi.game import DomainError, Outcome, payoff, pmp_at
from pgspi.geometry import Polygon, Region
from pgspi.programs import CSR, ICSR, Const, evaluate
from pgspi.renegotiation import (
    PMP,
    WILDCARD,
    Box,
    Fixed,
    Guard,
    RenegFunction,
    Rule,
    SVRFunction,
    Union,
    WeightedSum,
    check_transitive,
    nash_product,
    player_one_greedy,
    random_transitivity_samples,
    validate_reneg,
    validate_svr,
)
from pgspi.spi import make_csr_spi, make_reneg_spi, pmp_extend, translate_selection

SLOTS = ("Slot1", "Slot2", "Slot3")
MISS = Outcome.pure("Slot1", "Slot2")
MEET = Outcome.pure("Slot3", "Slot3")


def poly(*pts) -> Region:
    return Region.of([Polygon.of([tuple(F(c) for c in p) for p in pts])])


FRONTIER = poly((1, 3), (3, 1))


class TestRenegValidation:
    def test_improving_map_is_valid(self, scheduling):
        assert validate_reneg(RenegFunction.of([(MISS, MEET)]), scheduling).valid

    def test_worsening_map_fails_first_condition(self, scheduling):
        rep = validate_reneg(RenegFunction.of([(MEET, MISS)]), scheduling)
        assert [v["condition"] for v in rep.violations] == [1, 2]

    def test_identity_fails_second_condition(self, scheduling):
        rep = validate_reneg(RenegFunction.of([(MEET, MEET)]), scheduling)
        assert not rep.valid and rep.violations[0]["condition"] == 2

    def test_reneg_wrapper_refuses_invalid(self, scheduling):
        with pytest.raises(DomainError):
            make_reneg_spi(RenegFunction.of([(MEET, MISS)]), scheduling)


class TestSVR:
    def test_pmp_function_is_valid(self, scheduling):
        f = SVRFunction((Rule(WILDCARD, WILDCARD, PMP()),))
        assert validate_svr(f, scheduling, 0, [f]).valid

    def test_fixed_region_below_default_flagged(self, scheduling):
        f = SVRFunction((Rule(WILDCARD, WILDCARD, Fixed(poly((1, 1)))),))
        rep = validate_svr(f, scheduling, 0, [f])
        assert any(v["condition"] == 1 for v in rep.violations)

    def test_guarded_box_matches_only_low_defaults(self, scheduling):
        f = SVRFunction((Rule(WILDCARD, Guard((F(1), None)), Box("pmp", (F(2), None))),))
        assert not f.region(scheduling, 0, frozenset(), MISS).is_empty()
        assert f.region(scheduling, 0, frozenset(), Outcome.pure("Slot1", "Slot1")).is_empty()

    def test_counterpart_pattern_uses_lineage(self, scheduling):
        base = SVRFunction((Rule(WILDCARD, WILDCARD, PMP()),), name="b")
        ext = SVRFunction(base.rules, base.fingerprint, "b~")
        keyed = SVRFunction((Rule(base.fingerprint, WILDCARD, Fixed(FRONTIER)),))
        assert not keyed.region(scheduling, 0, ext.keys, MISS).is_empty()
        other = SVRFunction((Rule(WILDCARD, MEET, PMP()),))
        assert keyed.region(scheduling, 0, other.keys, MISS).is_empty()

    def test_union_region(self, scheduling):
        f = SVRFunction((Rule(WILDCARD, WILDCARD, Union((PMP(), Fixed(poly((2, 2)))))),))
        r = f.region(scheduling, 0, frozenset(), MISS)
        assert G.contains(r, (F(2), F(2))) and G.contains(r, (F(3), F(1)))

    def test_regions_are_clipped_to_feasible(self, scheduling):
        f = SVRFunction((Rule(WILDCARD, WILDCARD, Fixed(poly((0, 0), (4, 4)))),))
        got = f.region(scheduling, 0, frozenset(), MISS)
        assert sorted(got.vertices()) == [(0, 0), (2, 2)]


class TestSelection:
    def test_equal_weights_tie_breaks_lexicographically(self):
        assert WeightedSum((1, 1)).choose(FRONTIER) == (1, 3)

    def test_heavier_first_weight(self):
        assert WeightedSum((2, 1)).choose(FRONTIER) == (3, 1)

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(DomainError):
            WeightedSum((1, 0))

    def test_nash_product_on_finite_set(self):
        r = G.union(G.union(poly((1, 3)), poly((3, 1))), poly((2, 2)))
        assert nash_product((0, 0)).choose(r) == (2, 2)

    def test_nash_product_only_sees_vertices(self):
        # the true maximiser (2,2) is interior to the segment
        assert nash_product((0, 0)).choose(FRONTIER) == (1, 3)

    def test_empty_region_rejected(self):
        with pytest.raises(DomainError):
            WeightedSum((1, 1)).choose(Region.empty())


class TestTransitivity:
    @pytest.mark.parametrize("weights", [(1, 1), (2, 1), (1, 3)])
    def test_weighted_sums_pass_random_pairs(self, scheduling, weights):
        d = WeightedSum(weights)
        samples = random_transitivity_samples(random.Random(1), scheduling, d, 200)
        rep = check_transitive(d, samples)
        assert rep.passed and rep.checked > 100

    def test_greedy_selection_is_caught(self):
        # (2,1) is the greedy pick but (2,2) dominates it
        rep = check_transitive(player_one_greedy(), [(poly((1, 1), (2, 1), (2, 2)), Region.empty())])
        assert not rep.passed and rep.counterexamples[0]["kind"] == "inefficient"

    def test_greedy_selection_fails_on_random_pairs(self, scheduling):
        d = player_one_greedy()
        rep = check_transitive(d, random_transitivity_samples(random.Random(2), scheduling, d, 300))
        assert not rep.passed

    @given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_weighted_sum_property(self, scheduling, w1, w2, seed):
        d = WeightedSum((w1, w2))
        samples = random_transitivity_samples(random.Random(seed), scheduling, d, 5)
        assert check_transitive(d, samples).passed


def pmp_program(default: str, name="pmp") -> CSR:
    return CSR(Const(default), SVRFunction((Rule(WILDCARD, WILDCARD, PMP()),), name=name))


def narrow_program(default: str, name="narrow") -> CSR:
    return CSR(Const(default), SVRFunction((Rule(WILDCARD, WILDCARD, Box("default", (F(2), F(2)))),), name=name))


class TestPMPExtension:
    def universe(self):
        return [[narrow_program(s, "c" + s)] for s in SLOTS] + [[pmp_program(s)] for s in SLOTS]

    def test_pmp_program_unchanged(self, scheduling, lex11):
        p = pmp_program("Slot1")
        assert pmp_extend(p, 0, scheduling, self.universe(), lex11) == p

    def test_extension_contains_original_and_target(self, scheduling, lex11):
        p = narrow_program("Slot1")
        ext = pmp_extend(p, 0, scheduling, self.universe(), lex11)
        assert ext.rn.lineage == p.rn.fingerprint
        for (q,) in self.universe():
            before = evaluate((p, q), scheduling, lex11)
            a = evaluate((Const("Slot1"), q.default), scheduling, lex11)
            keys = q.rn.keys
            old = p.rn.region(scheduling, 0, keys, a)
            new = ext.rn.region(scheduling, 0, keys, a)
            assert G.issubset(old, new)
            assert G.issubset(pmp_at(scheduling, 0, payoff(scheduling, before)), new)

    def test_extension_is_idempotent(self, scheduling, lex11):
        p = narrow_program("Slot2")
        once = pmp_extend(p, 0, scheduling, self.universe(), lex11)
        assert pmp_extend(once, 0, scheduling, self.universe(), lex11) == once

    def test_extension_never_lowers_payoff(self, scheduling, lex11):
        p = narrow_program("Slot1")
        ext = pmp_extend(p, 0, scheduling, self.universe(), lex11)
        for (q,) in self.universe():
            a = payoff(scheduling, evaluate((p, q), scheduling, lex11))
            b = payoff(scheduling, evaluate((ext, q), scheduling, lex11))
            assert b[0] >= a[0]

    def test_base_program_rejected(self, scheduling, lex11):
        with pytest.raises(DomainError):
            pmp_extend(Const("Slot1"), 0, scheduling, [], lex11)

    def test_icsr_extends_final_round(self, scheduling, lex11):
        f = SVRFunction((Rule(WILDCARD, WILDCARD, Fixed(Region.empty())),), name="idle")
        p = ICSR(Const("Slot1"), (f, f))
        q = ICSR(Const("Slot2"), (f, SVRFunction((Rule(WILDCARD, WILDCARD, PMP()),))))
        ext = pmp_extend(p, 0, scheduling, [[q]], lex11)
        assert ext.rounds[0] == f and ext.rounds[1] != f
        assert payoff(scheduling, evaluate((ext, q), scheduling, lex11))[0] >= 1


class TestWrappers:
    def test_csr_wrapper_requires_pmp_inside(self, scheduling):
        narrow = SVRFunction((Rule(WILDCARD, WILDCARD, Fixed(poly((1, 1)))),))
        with pytest.raises(DomainError):
            make_csr_spi([narrow, narrow], scheduling, [[Const(s) for s in SLOTS]] * 2)

    def test_csr_wrapper_builds_programs(self, scheduling):
        f = SVRFunction((Rule(WILDCARD, WILDCARD, PMP()),))
        t = make_csr_spi([f, f], scheduling, [[Const(s) for s in SLOTS]] * 2)
        assert t((Const("Slot1"), Const("Slot2"))) == (CSR(Const("Slot1"), f), CSR(Const("Slot2"), f))


def test_translated_functions_force_old_choice(scheduling):
    f = SVRFunction((Rule(WILDCARD, WILDCARD, PMP()),))
    defaults = [MISS, MEET]
    old = WeightedSum((1, 1))
    new_fns = translate_selection([f, f], defaults, scheduling, old)
    progs_old = (CSR(Const("Slot1"), f), CSR(Const("Slot2"), f))
    progs_new = (CSR(Const("Slot1"), new_fns[0]), CSR(Const("Slot2"), new_fns[1]))
    want = payoff(scheduling, evaluate(progs_old, scheduling, old))
    for d in (WeightedSum((1, 5)), WeightedSum((5, 1)), nash_product((0, 0))):
        assert payoff(scheduling, evaluate(progs_new, scheduling, d)) == want
