"""Beliefs, expected utility and subjective-equilibrium checks, plus the
assumption validators and constructive checks built on them."""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import geometry
from .game import DomainError, Game, Outcome, dominates, payoff, pmp_at
from .geometry import fmt, fmt_point
from .programs import (
    CSR,
    ICSR,
    Reneg,
    default_of,
    evaluate,
    fingerprint,
    profile_fingerprint,
    run_base,
    trace,
)
from .renegotiation import check_transitive, counterpart_keys, random_transitivity_samples
from .spi import pmp_extend

CSR_FAMILY = (CSR, ICSR)


class PreconditionError(DomainError):
    """A theorem's hypotheses do not hold for the given input."""


@dataclass(frozen=True)
class Belief:
    """Finite-support distribution over counterpart profiles.

    ``support`` holds ``(profile, probability)`` pairs where each profile
    lists the other players' programs in player order.
    """

    support: tuple

    def __post_init__(self):
        if not self.support:
            raise DomainError("belief support is empty")
        total = Fraction(0)
        for _, prob in self.support:
            if Fraction(prob) <= 0:
                raise DomainError("belief probabilities must be positive")
            total += Fraction(prob)
        if total != 1:
            raise DomainError(f"belief probabilities sum to {fmt(total)}, not 1")

    @classmethod
    def point(cls, *others) -> "Belief":
        return cls(((tuple(others), Fraction(1)),))

    @classmethod
    def of(cls, pairs) -> "Belief":
        return cls(tuple((tuple(p), Fraction(q)) for p, q in pairs))


@dataclass
class Scenario:
    game: Game
    program_space: tuple  # per player: tuple of Programs
    beliefs: tuple  # per player: Belief
    selection: object
    functions: dict = field(default_factory=dict)
    tie_preference: bool = False
    programs: tuple = ()  # per player: dict name -> Program, for labels
    profiles: dict = field(default_factory=dict)  # name -> tuple of Programs

    def __post_init__(self):
        n = self.game.player_count
        if len(self.program_space) != n or len(self.beliefs) != n:
            raise DomainError("scenario needs one program space and one belief per player")
        self.program_space = tuple(_dedup(space) for space in self.program_space)
        if not self.programs:
            self.programs = tuple({} for _ in range(n))

    def label(self, player: int, p) -> str:
        for name, q in self.programs[player].items():
            if q == p:
                return name
        return "program#" + hashlib.sha1(fingerprint(p).encode()).hexdigest()[:8]


def _dedup(programs) -> tuple:
    seen = {}
    for p in programs:
        seen.setdefault(fingerprint(p), p)
    return tuple(seen.values())


def _insert(others: Sequence, player: int, p) -> list:
    others = list(others)
    return others[:player] + [p] + others[player:]


def expected_payoff(p, player: int, belief: Belief, game: Game, selection) -> Fraction:
    total = Fraction(0)
    for others, prob in belief.support:
        out = evaluate(_insert(others, player, p), game, selection)
        total += prob * payoff(game, out)[player]
    return total


def _region_profile(p, player: int, belief: Belief, game: Game, selection):
    """First-round renegotiation sets of ``p`` against each support profile,
    or None for programs without sets."""
    if not isinstance(p, CSR_FAMILY):
        return None
    out = []
    for others, _ in belief.support:
        tr = trace(_insert(others, player, p), game, selection)
        out.append(tr.rounds[0].regions[player] if tr.rounds else geometry.Region.empty())
    return out


def _contains_all(big, small) -> bool:
    return all(geometry.issubset(s, b) for b, s in zip(big, small))


def rank_ties(tied: Sequence, player: int, belief: Belief, game: Game, selection) -> list:
    """Renegotiation-capable programs first, then larger sets first (by
    containment against every support profile), then fingerprint order."""
    regions = {fingerprint(p): _region_profile(p, player, belief, game, selection) for p in tied}

    def covers(p) -> int:
        mine = regions[fingerprint(p)]
        if mine is None:
            return 0
        return sum(
            1
            for q in tied
            if q is not p
            and regions[fingerprint(q)] is not None
            and _contains_all(mine, regions[fingerprint(q)])
        )

    return sorted(
        tied,
        key=lambda p: (
            not isinstance(p, (Reneg, CSR, ICSR)),
            -covers(p),
            fingerprint(p),
        ),
    )


def best_response(
    space: Sequence,
    belief: Belief,
    game: Game,
    selection,
    tie_preference: bool = False,
    player: int = 0,
) -> list:
    if not space:
        raise DomainError("best response over an empty program space")
    utils = [(p, expected_payoff(p, player, belief, game, selection)) for p in space]
    top = max(u for _, u in utils)
    tied = [p for p, u in utils if u == top]
    if tie_preference:
        return rank_ties(tied, player, belief, game, selection)
    return tied


@dataclass
class PlayerVerdict:
    player: int
    program: str
    expected: Fraction
    utilities: list  # (label, Fraction) in space order
    argmax: list
    in_argmax: bool
    preferred: Optional[str] = None
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out = {
            "player": self.player + 1,
            "program": self.program,
            "expected_payoff": fmt(self.expected),
            "utilities": {name: fmt(u) for name, u in self.utilities},
            "argmax": self.argmax,
            "best_response": self.in_argmax,
        }
        if self.preferred is not None:
            out["preferred"] = self.preferred
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class EquilibriumReport:
    equilibrium: bool
    outcome: Outcome
    payoff: tuple
    players: list

    def to_json(self) -> dict:
        return {
            "equilibrium": self.equilibrium,
            "outcome": str(self.outcome),
            "payoff": fmt_point(self.payoff),
            "players": [p.to_json() for p in self.players],
        }


def check_subjective_equilibrium(profile: Sequence, scenario: Scenario) -> EquilibriumReport:
    game, sel = scenario.game, scenario.selection
    verdicts = []
    for i, p in enumerate(profile):
        space = _dedup(tuple(scenario.program_space[i]) + (p,))
        belief = scenario.beliefs[i]
        utils = [(q, expected_payoff(q, i, belief, game, sel)) for q in space]
        top = max(u for _, u in utils)
        mine = next(u for q, u in utils if q == p)
        tied = [q for q, u in utils if u == top]
        if scenario.tie_preference:
            tied = rank_ties(tied, i, belief, game, sel)
        labels = [(scenario.label(i, q), u) for q, u in utils]
        witness = None
        if mine < top:
            witness = {"better": scenario.label(i, tied[0]), "expected_payoff": fmt(top)}
        verdicts.append(
            PlayerVerdict(
                i,
                scenario.label(i, p),
                mine,
                labels,
                [scenario.label(i, q) for q in tied],
                mine == top,
                scenario.label(i, tied[0]) if scenario.tie_preference else None,
                witness,
            )
        )
    out = evaluate(list(profile), game, sel)
    return EquilibriumReport(
        all(v.in_argmax for v in verdicts), out, payoff(game, out), verdicts
    )


# --- safe Pareto improvements ---------------------------------------------


@dataclass
class SPIReport:
    passed: bool
    checked: int
    strict_witness: Optional[dict] = None
    violation: Optional[dict] = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "profiles_checked": self.checked,
            "strict_witness": self.strict_witness,
            "violation": self.violation,
        }


def verify_spi(transform, space: Sequence[Sequence], game: Game, selection, label=None) -> SPIReport:
    """Exhaustive weak-improvement check with a strict-improvement witness."""
    label = label or (lambda i, p: fingerprint(p))
    witness = None
    checked = 0
    for prof in itertools.product(*space):
        checked += 1
        before = payoff(game, evaluate(list(prof), game, selection))
        after = payoff(game, evaluate(list(transform(prof)), game, selection))
        entry = {
            "profile": [label(i, p) for i, p in enumerate(prof)],
            "before": fmt_point(before),
            "after": fmt_point(after),
        }
        if not dominates(after, before):
            return SPIReport(False, checked, witness, entry)
        if witness is None and any(a > b for a, b in zip(after, before)):
            witness = entry
    return SPIReport(witness is not None, checked, witness)


# --- assumption validators ------------------------------------------------


@dataclass
class AssumptionReport:
    name: str
    clauses: dict
    witnesses: list
    universe: dict

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def to_json(self) -> dict:
        return {
            "assumption": self.name,
            "passed": self.passed,
            "clauses": self.clauses,
            "witnesses": self.witnesses[:20],
            "universe": self.universe,
        }


def _action(profile: Sequence, player: int, game: Game, selection) -> Optional[str]:
    out = evaluate(list(profile), game, selection)
    return out.profile()[player] if out.is_pure else None


def _renegotiates(profile, game, selection) -> bool:
    tr = trace(list(profile), game, selection)
    if tr.family == "reneg":
        return all(x == tr.proposals[0] for x in tr.proposals)
    return tr.family in ("csr", "icsr")


def _support_programs(scenario: Scenario, player: int) -> list:
    """Programs other players' beliefs attribute to ``player``."""
    out = []
    for j, belief in enumerate(scenario.beliefs):
        if j == player:
            continue
        idx = player if player < j else player - 1
        out.extend(others[idx] for others, _ in belief.support)
    return out


def check_assumption_reneg_no_punish(scenario: Scenario, candidates: Sequence[Sequence] = ()) -> AssumptionReport:
    game, sel = scenario.game, scenario.selection
    witnesses = []
    ok1 = ok2 = True
    n = game.player_count
    for i in range(n):
        mine = list(scenario.program_space[i]) + [c[i] for c in candidates] + _support_programs(scenario, i)
        renegs = [p for p in _dedup(mine) if isinstance(p, Reneg)]
        for p in renegs:
            for others, _ in scenario.beliefs[i].support:
                full = _insert(others, i, p)
                if _renegotiates(full, game, sel):
                    continue
                plain = _insert(others, i, p.default)
                for j in range(n):
                    if j == i:
                        continue
                    a, b = _action(full, j, game, sel), _action(plain, j, game, sel)
                    if a != b:
                        ok1 = False
                        witnesses.append(
                            {
                                "clause": 1,
                                "player": j + 1,
                                "against": scenario.label(i, p),
                                "action": a,
                                "action_against_default": b,
                            }
                        )
        for cand in candidates:
            q = cand[i]
            if isinstance(q, (Reneg, CSR, ICSR)):
                continue
            for others, _ in scenario.beliefs[i].support:
                if not any(isinstance(o, Reneg) for o in others):
                    continue
                a = run_base(q, profile_fingerprint(list(others)))
                b = run_base(q, profile_fingerprint([default_of(o) for o in others]))
                if a != b:
                    ok2 = False
                    witnesses.append(
                        {
                            "clause": 2,
                            "player": i + 1,
                            "program": scenario.label(i, q),
                            "action": a,
                            "action_against_defaults": b,
                        }
                    )
    universe = {
        "programs_per_player": [len(s) for s in scenario.program_space],
        "support_sizes": [len(b.support) for b in scenario.beliefs],
        "candidates": len(candidates),
    }
    return AssumptionReport("reneg_no_punish", {"1": ok1, "2": ok2}, witnesses, universe)


def _same_family(p, others) -> bool:
    if not all(type(o) is type(p) for o in others):
        return False
    if isinstance(p, ICSR):
        return all(len(o.rounds) == len(p.rounds) for o in others)
    return True


def _round_functions(p, k: int):
    return p.rn if isinstance(p, CSR) else p.rounds[k]


def check_assumption_csr_no_punish(scenario: Scenario, candidates: Sequence[Sequence] = ()) -> AssumptionReport:
    game, sel = scenario.game, scenario.selection
    n = game.player_count
    witnesses = []
    ok1 = ok2 = True
    for i in range(n):
        supports = [others for others, _ in scenario.beliefs[i].support]
        csr_counterparts = [o for o in supports if all(isinstance(x, CSR_FAMILY) for x in o)]
        csr_counterparts += [
            [x for k, x in enumerate(c) if k != i]
            for c in candidates
            if all(isinstance(x, CSR_FAMILY) for k, x in enumerate(c) if k != i)
        ]
        plain = [c[i] for c in candidates] + _support_programs(scenario, i)
        plain = [p for p in _dedup(plain) if not isinstance(p, CSR_FAMILY)]
        # clause (i): non-CSR programs ignore whether counterparts renegotiate
        for p in plain:
            for others in csr_counterparts:
                a = _action(_insert(others, i, p), i, game, sel)
                b = _action(_insert([default_of(o) for o in others], i, p), i, game, sel)
                if a != b:
                    ok1 = False
                    witnesses.append(
                        {
                            "clause": "i",
                            "player": i + 1,
                            "program": scenario.label(i, p),
                            "action": a,
                            "action_against_defaults": b,
                        }
                    )
        # clause (ii): support programs answer an extension only by adding
        # points of the extender's PMP
        mine = list(scenario.program_space[i]) + [c[i] for c in candidates]
        for p in _dedup(mine):
            if not isinstance(p, CSR_FAMILY):
                continue
            for others in supports:
                others = list(others)
                if not _same_family(p, others):
                    continue
                ext = pmp_extend(p, i, game, [others], sel)
                base_tr = trace(_insert(others, i, p), game, sel)
                ext_tr = trace(_insert(others, i, ext), game, sel)
                y = pmp_at(game, i, payoff(game, base_tr.outcome))
                starts = [rd.start for rd in base_tr.rounds] + [rd.start for rd in ext_tr.rounds]
                rounds = len(base_tr.rounds)
                for k in range(rounds):
                    for a in dict.fromkeys([starts[k], starts[rounds + k]]):
                        for j in range(n):
                            if j == i:
                                continue
                            q = others[j if j < i else j - 1]
                            fn = _round_functions(q, k)
                            old_prof = _insert(others, i, p)
                            new_prof = _insert(others, i, ext)
                            old_keys = counterpart_keys(
                                [_round_functions(x, k) for m, x in enumerate(old_prof) if m != j]
                            )
                            new_keys = counterpart_keys(
                                [_round_functions(x, k) for m, x in enumerate(new_prof) if m != j]
                            )
                            old = fn.region(game, j, old_keys, a)
                            new = fn.region(game, j, new_keys, a)
                            if not geometry.issubset(old, new) or not geometry.issubset(
                                new, geometry.union(old, y)
                            ):
                                ok2 = False
                                witnesses.append(
                                    {
                                        "clause": "ii",
                                        "player": i + 1,
                                        "program": scenario.label(i, p),
                                        "counterpart": scenario.label(j, q),
                                        "round": k + 1,
                                        "default": str(a),
                                        "before": geometry.region_to_json(old),
                                        "after": geometry.region_to_json(new),
                                    }
                                )
    universe = {
        "programs_per_player": [len(s) for s in scenario.program_space],
        "support_sizes": [len(b.support) for b in scenario.beliefs],
        "candidates": len(candidates),
    }
    return AssumptionReport("csr_no_punish", {"i": ok1, "ii": ok2}, witnesses, universe)


# --- PMP-extension guarantee ----------------------------------------------


@dataclass
class ExtensionReport:
    original: EquilibriumReport
    extended: EquilibriumReport
    expected_before: list
    expected_after: list
    pmm: tuple
    programs: list = field(default_factory=list)

    @property
    def improves(self) -> bool:
        return all(b >= a for a, b in zip(self.expected_before, self.expected_after))

    @property
    def preserves_equilibrium(self) -> bool:
        return self.extended.equilibrium or not self.original.equilibrium

    @property
    def above_pmm(self) -> bool:
        return dominates(self.extended.payoff, self.pmm)

    @property
    def passed(self) -> bool:
        return self.improves and self.preserves_equilibrium and self.above_pmm

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "pmm": fmt_point(self.pmm),
            "payoff_before": fmt_point(self.original.payoff),
            "payoff_after": fmt_point(self.extended.payoff),
            "outcome_after": str(self.extended.outcome),
            "expected_before": [fmt(u) for u in self.expected_before],
            "expected_after": [fmt(u) for u in self.expected_after],
            "weakly_improves_expected": self.improves,
            "equilibrium_before": self.original.equilibrium,
            "equilibrium_after": self.extended.equilibrium,
            "above_pmm": self.above_pmm,
            "extended_programs": self.programs,
        }


def _transitivity_ok(scenario: Scenario, samples: int = 60, seed: int = 0) -> bool:
    if not scenario.game.two_player:
        return not getattr(scenario.selection, "approximate", True)
    rng = random.Random(seed)
    pairs = random_transitivity_samples(rng, scenario.game, scenario.selection, samples)
    return check_transitive(scenario.selection, pairs).passed


def theorem3_extend_and_verify(profile: Sequence, scenario: Scenario) -> ExtensionReport:
    if not all(isinstance(p, CSR_FAMILY) for p in profile):
        raise DomainError("PMP-extension needs a profile of CSR programs")
    assumption = check_assumption_csr_no_punish(scenario, [list(profile)])
    for clause, ok in assumption.clauses.items():
        if not ok:
            raise PreconditionError(f"CSR no-punishment clause ({clause}) fails")
    if not _transitivity_ok(scenario):
        raise PreconditionError("selection function is not transitive")
    game, sel = scenario.game, scenario.selection
    extended = []
    for i, p in enumerate(profile):
        universe = [others for others, _ in scenario.beliefs[i].support]
        universe.append([q for k, q in enumerate(profile) if k != i])
        extended.append(pmp_extend(p, i, game, universe, sel))
    before = check_subjective_equilibrium(profile, scenario)
    after = check_subjective_equilibrium(extended, scenario)
    eu_before = [
        expected_payoff(p, i, scenario.beliefs[i], game, sel) for i, p in enumerate(profile)
    ]
    eu_after = [
        expected_payoff(p, i, scenario.beliefs[i], game, sel) for i, p in enumerate(extended)
    ]
    names = []
    for i, (p, q) in enumerate(zip(profile, extended)):
        names.append({"player": i + 1, "program": scenario.label(i, p), "changed": p != q})
    return ExtensionReport(before, after, eu_before, eu_after, game.pmm, names)
