"""Program transforms built on renegotiation: SPI wrappers, PMP-extension
and selection-function translation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import geometry
from .game import DomainError, Game, Outcome, payoff, pmp_at
from .geometry import Region, fmt_point
from .programs import CSR, ICSR, STRUCTURED, Program, Reneg, base_outcome, trace
from .renegotiation import (
    WILDCARD,
    Fixed,
    RenegFunction,
    Rule,
    SVRFunction,
    counterpart_keys,
    validate_reneg,
)


@dataclass(frozen=True)
class Transform:
    """Per-player program map f(p) = (f_1(p_1), ..., f_n(p_n))."""

    name: str
    maps: tuple  # one callable per player

    def __call__(self, profile: Sequence[Program]) -> tuple:
        return tuple(f(p) for f, p in zip(self.maps, profile))


def identity_transform(n: int = 2) -> Transform:
    return Transform("identity", tuple((lambda p: p) for _ in range(n)))


def make_reneg_spi(r: RenegFunction, game: Game) -> Transform:
    report = validate_reneg(r, game)
    if not report.valid:
        raise DomainError(f"not a renegotiation function: {report.violations}")

    def wrap(p):
        if isinstance(p, STRUCTURED):
            raise DomainError("renegotiation defaults must be base programs")
        return Reneg(p, r)

    return Transform(f"reneg[{r.name}]", tuple(wrap for _ in range(game.player_count)))


def make_csr_spi(rn_profile: Sequence[SVRFunction], game: Game, defaults_space: Sequence[Sequence]) -> Transform:
    """CSR wrapper per player. Every default profile in ``defaults_space``
    must have each player's PMP of the default outcome inside their set."""
    import itertools

    for prof in itertools.product(*defaults_space):
        a = base_outcome(list(prof))
        at = payoff(game, a)
        for i, f in enumerate(rn_profile):
            keys = counterpart_keys([g for k, g in enumerate(rn_profile) if k != i])
            have = f.region(game, i, keys, a)
            need = pmp_at(game, i, at)
            if not geometry.issubset(need, have):
                raise DomainError(
                    f"player {i + 1}'s set misses its PMP at default {a} ({fmt_point(at)})"
                )

    def wrapper(f):
        return lambda p: CSR(p, f)

    return Transform("csr[" + ",".join(f.name for f in rn_profile) + "]", tuple(wrapper(f) for f in rn_profile))


def _prepend(fn: SVRFunction, rule: Rule) -> SVRFunction:
    lineage = fn.lineage if fn.lineage is not None else fn.fingerprint
    return SVRFunction((rule,) + fn.rules, lineage, fn.name + "~")


def _pattern_for(fns: Sequence[SVRFunction]) -> str:
    if len(fns) == 1:
        f = fns[0]
        return f.lineage if f.lineage is not None else f.fingerprint
    return next(iter(counterpart_keys(fns)))


def pmp_extend(
    p: Program,
    player: int,
    game: Game,
    counterpart_universe: Sequence[Sequence[Program]],
    selection,
) -> Program:
    """PMP-extension of a CSR program against a finite set of counterpart
    profiles. For ICSR programs the final round is extended at the final
    round's starting outcome."""
    if not isinstance(p, (CSR, ICSR)):
        raise DomainError("PMP-extension applies to CSR programs")
    fam = type(p)
    current = p
    for others in counterpart_universe:
        others = list(others)
        if not all(type(q) is fam for q in others):
            continue
        if fam is ICSR and any(len(q.rounds) != len(p.rounds) for q in others):
            continue
        # outcome the un-extended program reaches against this counterpart
        full = others[:player] + [p] + others[player:]
        tr = trace(full, game, selection)
        target = pmp_at(game, player, payoff(game, tr.outcome))
        if fam is CSR:
            fn, a = current.rn, tr.default_outcome
            cp_fns = [q.rn for q in others]
        else:
            fn, a = current.rounds[-1], tr.rounds[-1].start
            cp_fns = [q.rounds[-1] for q in others]
        keys = counterpart_keys(cp_fns)
        have = fn.region(game, player, keys, a)
        if geometry.issubset(target, have):
            continue
        rule = Rule(_pattern_for(cp_fns), a, Fixed(geometry.union(have, target)))
        new_fn = _prepend(fn, rule)
        if fam is CSR:
            current = CSR(current.default, new_fn)
        else:
            current = ICSR(current.default, current.rounds[:-1] + (new_fn,))
    return current


def translate_selection(
    rn_profile: Sequence[SVRFunction],
    defaults: Sequence[Outcome],
    game: Game,
    d_old,
) -> list:
    """Singleton-region functions that force, under any selection, the
    outcome ``d_old`` picks from the original agreement sets."""
    n = len(rn_profile)
    new_rules = [[] for _ in range(n)]
    for a in defaults:
        regions = [
            f.region(game, i, counterpart_keys([g for k, g in enumerate(rn_profile) if k != i]), a)
            for i, f in enumerate(rn_profile)
        ]
        agreement = geometry.intersect_all(regions)
        if agreement.is_empty():
            raise DomainError(f"empty agreement set at default {a}")
        chosen = d_old.choose(agreement)
        if game.two_player:
            single = Region.of([geometry.Polygon((chosen,))])
        else:
            single = Region.of_points([chosen])
        for i in range(n):
            new_rules[i].append(Rule(WILDCARD, a, Fixed(single)))
    return [
        SVRFunction(tuple(rules), None, f.name + "'") for f, rules in zip(rn_profile, new_rules)
    ]
