"""Two-player scenario showing the PMM guarantee cannot be improved.

Each player runs K rounds of renegotiation whose sets grant the counterpart
at most PMM + (k/K) * delta in round k. Their beliefs mix two counterpart
types: an ``x`` type that concedes everything, and a ``y`` type that stops
one ``epsilon`` short and only closes the final round with counterparts
conceding at least ``epsilon`` themselves. For a small enough weight on the
``x`` type, conceding exactly ``epsilon`` is a best response, so play
between two such players creeps up to PMM + delta and stops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import geometry
from .equilibrium import (
    Belief,
    EquilibriumReport,
    Scenario,
    check_assumption_csr_no_punish,
    check_subjective_equilibrium,
)
from .game import DomainError, Game, best_feasible_payoff, payoff
from .geometry import fmt, fmt_point
from .programs import ICSR, Const, trace
from .renegotiation import Box, Guard, Rule, SVRFunction, WeightedSum


@dataclass
class TightnessReport:
    k: int
    delta: tuple
    pmm: tuple
    best: tuple
    epsilon: tuple
    threshold: Fraction
    belief_mix_weight: Fraction
    chain: list
    equilibrium: EquilibriumReport
    assumption_passed: bool
    hypotheses: dict = field(default_factory=dict)

    @property
    def bound(self) -> tuple:
        return tuple(g + d for g, d in zip(self.pmm, self.delta))

    @property
    def strictly_improving(self) -> bool:
        return all(
            all(b > a for a, b in zip(prev, nxt)) for prev, nxt in zip(self.chain, self.chain[1:])
        )

    @property
    def final(self) -> tuple:
        return self.chain[-1]

    @property
    def within_bound(self) -> bool:
        return all(x <= b for x, b in zip(self.final, self.bound))

    @property
    def passed(self) -> bool:
        return (
            self.equilibrium.equilibrium
            and self.strictly_improving
            and len(self.chain) == self.k + 1
            and self.within_bound
            and self.assumption_passed
            and self.belief_mix_weight < self.threshold
        )

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "k": self.k,
            "delta": fmt_point(self.delta),
            "pmm": fmt_point(self.pmm),
            "best_feasible": fmt_point(self.best),
            "epsilon": fmt_point(self.epsilon),
            "threshold": fmt(self.threshold),
            "belief_mix_weight": fmt(self.belief_mix_weight),
            "hypotheses": self.hypotheses,
            "chain": [fmt_point(p) for p in self.chain],
            "strictly_improving": self.strictly_improving,
            "final": fmt_point(self.final),
            "bound": fmt_point(self.bound),
            "within_bound": self.within_bound,
            "assumption_csr_no_punish": self.assumption_passed,
            "equilibrium": self.equilibrium.to_json(),
        }


def _max_on_line(game: Game, fixed: int, level: Fraction) -> Fraction:
    """Largest feasible payoff for the other player when player ``fixed``
    gets exactly ``level``; None if the line misses the feasible set."""
    one, zero = Fraction(1), Fraction(0)
    e = (one, zero) if fixed == 0 else (zero, one)
    cut = geometry.clip(game.feasible, [(e[0], e[1], level), (-e[0], -e[1], -level)])
    if cut.is_empty():
        return None
    return max(v[1 - fixed] for v in cut.vertices())


def check_hypotheses(game: Game, delta: Sequence[Fraction]) -> dict:
    """Named hypothesis -> bool for the two-player tightness construction."""
    sums = {sum(v) for v in game.pure_points}
    g = game.pmm
    target = tuple(a + d for a, d in zip(g, delta))
    best = [best_feasible_payoff(game, i) for i in range(2)]
    exclusive = all(_max_on_line(game, i, best[i]) < best[1 - i] for i in range(2))
    return {
        "non-zero-sum": len(sums) > 1,
        "contains PMM + delta": geometry.contains(game.feasible, target),
        "best payoffs exclusive": exclusive,
    }


def _ceiling_rule(k: int, K: int, other: int, base: Fraction, span: Fraction) -> Rule:
    cap = base + Fraction(k, K) * span
    caps = [None, None]
    caps[other] = cap
    return Rule("*", Guard(tuple(caps)), Box("pmp", tuple(caps)))


def _program(default: str, rounds: list) -> ICSR:
    return ICSR(Const(default), tuple(rounds))


def _concession_program(game, player, K, c, default, name):
    """ICSR program conceding ``c`` from the player's best payoff."""
    other = 1 - player
    g = game.pmm
    best = best_feasible_payoff(game, player)
    level = _max_on_line(game, player, best - c)
    span = max(level - g[other], Fraction(0))
    rounds = [
        SVRFunction((_ceiling_rule(k, K, other, g[other], span),), None, f"{name}.r{k}")
        for k in range(1, K + 1)
    ]
    return _program(default, rounds)


def _counterpart_type(game, player, K, top, default, name, accept=None):
    """Program for ``player`` letting the other player climb to ``top``.

    With ``accept`` given, the final round only matches counterparts whose
    final-round function fingerprint (or lineage) is listed."""
    other = 1 - player
    g = game.pmm
    span = top - g[other]
    rounds = []
    for k in range(1, K + 1):
        rule = _ceiling_rule(k, K, other, g[other], span)
        if k == K and accept is not None:
            rules = tuple(Rule(fp, rule.default, rule.region) for fp in sorted(accept))
        else:
            rules = (rule,)
        rounds.append(SVRFunction(rules, None, f"{name}.r{k}"))
    return _program(default, rounds)


def _defaults(game: Game) -> tuple:
    """Pure profile Pareto-worse than the PMM with the lowest payoff sum."""
    g = game.pmm
    below = [(sum(v), v, prof) for v, prof in game.pure_points.items() if all(a <= b for a, b in zip(v, g))]
    if not below:
        raise DomainError("no pure profile is Pareto-worse than the PMM")
    return min(below)[2]


def build_tightness_scenario(game: Game, k: int, delta: Sequence, selection=None):
    """Returns ``(scenario, profile, report)``."""
    if not game.two_player:
        raise DomainError("the tightness construction is two-player")
    if k < 1:
        raise DomainError("K must be at least 1")
    delta = tuple(Fraction(d) for d in delta)
    if any(d <= 0 for d in delta):
        raise DomainError("delta must be strictly positive")
    hyp = check_hypotheses(game, delta)
    for name, ok in hyp.items():
        if not ok:
            raise DomainError(f"hypothesis fails: {name}")
    selection = selection or WeightedSum((1, 1))
    g = game.pmm
    best = tuple(best_feasible_payoff(game, i) for i in range(2))
    eps = []
    for i in range(2):
        j = 1 - i
        level = _max_on_line(game, j, g[j] + delta[j])
        eps.append(best[i] - level)
    if any(e <= 0 for e in eps):
        raise DomainError("no positive concession makes PMM + delta efficient")
    eps = tuple(eps)

    # the player-1 inequality; the construction is mirrored for player 2
    low = g[0] + Fraction(k - 1, k) * (best[0] - eps[0] - g[0])
    threshold = (best[0] - eps[0] - low) / (best[0] - low)
    low2 = g[1] + Fraction(k - 1, k) * (best[1] - eps[1] - g[1])
    threshold = min(threshold, (best[1] - eps[1] - low2) / (best[1] - low2))
    beta = threshold / 2

    defaults = _defaults(game)
    spaces, types, chosen, generous = [], [{}, {}], [], []
    for i in range(2):
        cands, accept = {}, set()
        for c in (Fraction(0), eps[i] / 2, eps[i], 2 * eps[i]):
            if best[i] - c < g[i]:
                continue
            name = f"p{i + 1}_concede_{fmt(c)}"
            cands[name] = _concession_program(game, i, k, c, defaults[i], name)
            if c >= eps[i]:
                accept.add(cands[name].rounds[-1].fingerprint)
        cands[f"p{i + 1}_default"] = Const(defaults[i])
        spaces.append(cands)
        generous.append(accept)
        chosen.append(cands[f"p{i + 1}_concede_{fmt(eps[i])}"])

    beliefs = []
    for i in range(2):
        j = 1 - i
        x = _counterpart_type(game, j, k, best[i], defaults[j], f"x{j + 1}")
        y = _counterpart_type(game, j, k, best[i] - eps[i], defaults[j], f"y{j + 1}", generous[i])
        types[j] = {f"x{j + 1}": x, f"y{j + 1}": y}
        beliefs.append(Belief((((x,), beta), ((y,), 1 - beta))))

    scenario = Scenario(
        game,
        tuple(tuple(s.values()) for s in spaces),
        tuple(beliefs),
        selection,
        {},
        False,
        tuple({**s, **t} for s, t in zip(spaces, types)),
        {"equilibrium": tuple(chosen)},
    )
    profile = list(chosen)
    tr = trace(profile, game, selection)
    chain = [payoff(game, a) for a in tr.chain()]
    eq = check_subjective_equilibrium(profile, scenario)
    assumption = check_assumption_csr_no_punish(scenario, [profile])
    report = TightnessReport(
        k, delta, g, best, eps, threshold, beta, chain, eq, assumption.passed, hyp
    )
    return scenario, profile, report
