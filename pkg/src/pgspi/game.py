"""Base games, outcomes and the Pareto-meet quantities derived from them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

from . import geometry
from .geometry import Polygon, Region, fmt, fmt_point


class DomainError(ValueError):
    """Input outside an operation's domain."""


@dataclass(frozen=True)
class Outcome:
    """Correlated distribution over pure joint actions.

    ``weights`` is a sorted tuple of ``(joint action labels, probability)``
    pairs with positive probabilities summing to exactly one.
    """

    weights: tuple

    @classmethod
    def of(cls, weights) -> "Outcome":
        acc: dict = {}
        items = weights.items() if isinstance(weights, Mapping) else weights
        for profile, w in items:
            w = Fraction(w)
            if w < 0:
                raise DomainError(f"negative weight {w} on {profile}")
            if w:
                key = tuple(profile)
                acc[key] = acc.get(key, Fraction(0)) + w
        if sum(acc.values()) != 1:
            raise DomainError("outcome weights must sum to exactly 1")
        return cls(tuple(sorted(acc.items())))

    @classmethod
    def pure(cls, *profile: str) -> "Outcome":
        return cls(((tuple(profile), Fraction(1)),))

    @property
    def is_pure(self) -> bool:
        return len(self.weights) == 1

    def profile(self) -> tuple:
        if not self.is_pure:
            raise DomainError("outcome is a mixture, not a pure profile")
        return self.weights[0][0]

    def mix(self, other: "Outcome", alpha) -> "Outcome":
        alpha = Fraction(alpha)
        w = [(p, alpha * q) for p, q in self.weights]
        w += [(p, (1 - alpha) * q) for p, q in other.weights]
        return Outcome.of(w)

    def to_json(self):
        if self.is_pure:
            return list(self.profile())
        return {"weights": [[list(p), fmt(w)] for p, w in self.weights]}

    def __str__(self) -> str:
        if self.is_pure:
            return "(" + ",".join(self.profile()) + ")"
        return " + ".join(f"{fmt(w)}*(" + ",".join(p) + ")" for p, w in self.weights)


@dataclass(frozen=True, eq=False)
class Game:
    """Finite normal-form game with exact rational payoffs."""

    actions: tuple
    payoffs: Mapping = field(repr=False)
    resolution: int = 12

    def __post_init__(self):
        if len(self.actions) < 2:
            raise DomainError("a game needs at least two players")
        for profile in self.profiles:
            vec = self.payoffs.get(profile)
            if vec is None:
                raise DomainError(f"payoff missing for {profile}")
            if len(vec) != self.player_count:
                raise DomainError(f"payoff for {profile} has wrong length")

    @classmethod
    def from_matrix(cls, actions: Sequence[Sequence[str]], payoffs, resolution=12) -> "Game":
        """Build from a nested array indexed by each player's action."""
        actions = tuple(tuple(a) for a in actions)
        table = {}
        for idx in itertools.product(*(range(len(a)) for a in actions)):
            cell = payoffs
            for k in idx:
                cell = cell[k]
            table[tuple(actions[p][k] for p, k in enumerate(idx))] = tuple(
                geometry.parse_rational(c) if not isinstance(c, Fraction) else c
                for c in cell
            )
        return cls(actions, table, resolution)

    @property
    def player_count(self) -> int:
        return len(self.actions)

    @property
    def two_player(self) -> bool:
        return self.player_count == 2

    @cached_property
    def profiles(self) -> tuple:
        return tuple(itertools.product(*self.actions))

    @cached_property
    def pure_points(self) -> dict:
        """Payoff vector -> first pure profile (in action order) attaining it."""
        out: dict = {}
        for profile in self.profiles:
            out.setdefault(tuple(self.payoffs[profile]), profile)
        return out

    @cached_property
    def hull(self) -> Polygon:
        return Polygon.of(self.pure_points)

    @cached_property
    def lattice(self) -> dict:
        """Point-mode feasible set: pure payoffs and pairwise mixtures at
        ``resolution``; maps each point to a realizing outcome."""
        out: dict = {}
        pts = list(self.pure_points.items())
        for vec, prof in pts:
            out.setdefault(vec, Outcome.pure(*prof))
        for (va, pa), (vb, pb) in itertools.combinations(pts, 2):
            for k in range(1, self.resolution):
                a = Fraction(k, self.resolution)
                vec = tuple(a * x + (1 - a) * y for x, y in zip(va, vb))
                out.setdefault(vec, Outcome.of([(pa, a), (pb, 1 - a)]))
        return out

    @cached_property
    def feasible(self) -> Region:
        if self.two_player:
            return Region.of([self.hull])
        return Region.of_points(self.lattice)

    @cached_property
    def efficient(self) -> Region:
        return geometry.frontier(self.feasible)

    @cached_property
    def pmm(self) -> tuple:
        verts = self.efficient.vertices()
        return tuple(min(v[i] for v in verts) for i in range(self.player_count))

    def check_outcome(self, outcome: Outcome) -> None:
        for profile, _ in outcome.weights:
            if profile not in self.payoffs:
                raise DomainError(f"unsupported joint action {profile}")


def payoff(game: Game, outcome: Outcome) -> tuple:
    game.check_outcome(outcome)
    n = game.player_count
    return tuple(
        sum((w * game.payoffs[p][i] for p, w in outcome.weights), Fraction(0))
        for i in range(n)
    )


def dominates(x: Sequence, y: Sequence, mode: str = "weak") -> bool:
    if len(x) != len(y):
        raise DomainError("payoff vectors differ in length")
    if mode == "weak":
        return all(a >= b for a, b in zip(x, y))
    if mode == "strict":
        return all(a > b for a, b in zip(x, y))
    raise DomainError(f"unknown dominance mode {mode!r}")


def efficient_outcomes(game: Game, pure_only: bool = False) -> Region:
    if not pure_only:
        return game.efficient
    pts = list(game.pure_points)
    keep = [p for p in pts if not any(geometry.weakly_dominated_strictly(p, q) for q in pts)]
    if game.two_player:
        return Region.of(Polygon((p,)) for p in keep)
    return Region.of_points(keep)


def pmm(game: Game, pure_only: bool = False) -> tuple:
    if not pure_only:
        return game.pmm
    verts = efficient_outcomes(game, pure_only=True).vertices()
    return tuple(min(v[i] for v in verts) for i in range(game.player_count))


def pmp_floor(game: Game, at: Sequence) -> tuple:
    """Componentwise max of the PMM and a payoff vector."""
    return tuple(max(g, x) for g, x in zip(game.pmm, at))


def pmp_at(game: Game, player: int, at: Sequence) -> Region:
    """Player's Pareto meet projection of the payoff vector ``at``."""
    floor = pmp_floor(game, at)
    if not game.two_player:
        return Region.of_points(
            p
            for p in game.lattice
            if p[player] >= floor[player]
            and all(p[j] == floor[j] for j in range(game.player_count) if j != player)
        )
    i, j = player, 1 - player
    one, zero = Fraction(1), Fraction(0)
    e = [zero, zero]
    e[j] = one
    f = [zero, zero]
    f[i] = -one
    hps = [
        (e[0], e[1], floor[j]),
        (-e[0], -e[1], -floor[j]),
        (f[0], f[1], -floor[i]),
    ]
    return geometry.clip(game.feasible, hps)


def pmp(game: Game, player: int, outcome: Outcome) -> Region:
    return pmp_at(game, player, payoff(game, outcome))


def best_feasible_payoff(game: Game, player: int) -> Fraction:
    return max(v[player] for v in game.pure_points)


def box(game: Game, floor: Sequence, caps: Sequence[Optional[Fraction]]) -> Region:
    """Feasible points weakly above ``floor`` and below the given caps."""
    if not game.two_player:
        return Region.of_points(
            p
            for p in game.lattice
            if all(a >= b for a, b in zip(p, floor))
            and all(c is None or a <= c for a, c in zip(p, caps))
        )
    one, zero = Fraction(1), Fraction(0)
    hps = [(-one, zero, -floor[0]), (zero, -one, -floor[1])]
    if caps[0] is not None:
        hps.append((one, zero, caps[0]))
    if caps[1] is not None:
        hps.append((zero, one, caps[1]))
    return geometry.clip(game.feasible, hps)


def realize(game: Game, at: Sequence) -> Outcome:
    """A canonical feasible outcome whose expected payoff is ``at``.

    Prefers a pure profile, then a mixture of two pure profiles along a
    hull edge, then a triangle of a fan triangulation.
    """
    at = tuple(Fraction(c) for c in at)
    if at in game.pure_points:
        return Outcome.pure(*game.pure_points[at])
    if not game.two_player:
        if at in game.lattice:
            return game.lattice[at]
        raise DomainError(f"{fmt_point(at)} is not on the feasible lattice")
    verts = game.hull.vertices
    prof = game.pure_points

    def on_segment(a, b):
        if geometry.cross(a, b, at) != 0:
            return None
        d = (b[0] - a[0], b[1] - a[1])
        t = ((at[0] - a[0]) * d[0] + (at[1] - a[1]) * d[1]) / (d[0] ** 2 + d[1] ** 2)
        return t if 0 <= t <= 1 else None

    for a, b in game.hull.edges():
        t = on_segment(a, b)
        if t is not None:
            return Outcome.of([(prof[a], 1 - t), (prof[b], t)])
    if len(verts) >= 3:
        v0 = verts[0]
        for k in range(1, len(verts) - 1):
            a, b = verts[k], verts[k + 1]
            area = geometry.cross(v0, a, b)
            la = geometry.cross(v0, at, b) / area
            lb = geometry.cross(v0, a, at) / area
            l0 = 1 - la - lb
            if la >= 0 and lb >= 0 and l0 >= 0:
                return Outcome.of([(prof[v0], l0), (prof[a], la), (prof[b], lb)])
    raise DomainError(f"{fmt_point(at)} is not feasible")


def game_from_json(data) -> Game:
    try:
        players = data["players"]
        payoffs = data["payoffs"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"game file needs 'players' and 'payoffs': {exc}") from exc
    try:
        return Game.from_matrix(players, payoffs, data.get("resolution", 12))
    except (IndexError, TypeError) as exc:
        raise DomainError(f"payoff array does not match action lists: {exc}") from exc


def game_to_json(game: Game) -> dict:
    def nest(prefix, depth):
        if depth == game.player_count:
            return [fmt(c) for c in game.payoffs[tuple(prefix)]]
        return [nest(prefix + [a], depth + 1) for a in game.actions[depth]]

    return {"players": [list(a) for a in game.actions], "payoffs": nest([], 0)}
