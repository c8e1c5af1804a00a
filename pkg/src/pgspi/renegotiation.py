"""Renegotiation functions, set-valued renegotiation (SVR) rule tables and
selection functions, plus their validators."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import geometry
from .game import DomainError, Game, Outcome, box, dominates, payoff, pmp_at, pmp_floor
from .geometry import Polygon, Region, fmt, fmt_point

WILDCARD = "*"


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# --- point-valued renegotiation -----------------------------------------


@dataclass(frozen=True)
class RenegFunction:
    """Outcome -> outcome map, identity on unmapped outcomes."""

    rules: tuple  # sorted ((Outcome, Outcome), ...)
    name: str = field(default="r", compare=False)

    @classmethod
    def of(cls, mapping, name: str = "r") -> "RenegFunction":
        items = mapping.items() if hasattr(mapping, "items") else mapping
        return cls(tuple(sorted(items, key=lambda kv: kv[0].weights)), name)

    def __call__(self, a: Outcome) -> Outcome:
        for src, dst in self.rules:
            if src == a:
                return dst
        return a

    def to_json(self) -> dict:
        return {"type": "reneg", "rules": [[s.to_json(), d.to_json()] for s, d in self.rules]}


@dataclass
class ValidationReport:
    valid: bool
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": self.violations, "notes": self.notes}


def validate_reneg(r: RenegFunction, game: Game) -> ValidationReport:
    """Both conditions of a renegotiation function over its mapped pairs."""
    violations = []
    strict = False
    for src, dst in r.rules:
        u, v = payoff(game, src), payoff(game, dst)
        if not dominates(v, u):
            violations.append(
                {
                    "condition": 1,
                    "from": str(src),
                    "to": str(dst),
                    "payoff_from": fmt_point(u),
                    "payoff_to": fmt_point(v),
                }
            )
        if any(b > a for a, b in zip(u, v)):
            strict = True
    if not strict:
        violations.append({"condition": 2, "reason": "no mapped pair strictly improves any player"})
    return ValidationReport(not violations, violations)


# --- region specifications ----------------------------------------------


@dataclass(frozen=True)
class Fixed:
    region: Region

    def resolve(self, game: Game, player: int, at: tuple) -> Region:
        return self.region

    def to_json(self):
        return {"fixed": geometry.region_to_json(self.region)}


@dataclass(frozen=True)
class Box:
    """Feasible points above a floor and under per-player caps.

    ``floor`` is ``"default"`` (the default outcome's payoff) or ``"pmp"``
    (componentwise max of that payoff and the PMM).
    """

    floor: str = "default"
    caps: tuple = ()

    def resolve(self, game: Game, player: int, at: tuple) -> Region:
        lo = pmp_floor(game, at) if self.floor == "pmp" else at
        caps = self.caps or (None,) * game.player_count
        return box(game, lo, caps)

    def to_json(self):
        return {
            "box": {
                "floor": self.floor,
                "caps": [None if c is None else fmt(c) for c in self.caps],
            }
        }


@dataclass(frozen=True)
class PMP:
    """The owning player's Pareto meet projection of the default outcome."""

    def resolve(self, game: Game, player: int, at: tuple) -> Region:
        return pmp_at(game, player, at)

    def to_json(self):
        return {"pmp": True}


@dataclass(frozen=True)
class Union:
    specs: tuple

    def resolve(self, game: Game, player: int, at: tuple) -> Region:
        acc = Region.empty(not game.two_player)
        for s in self.specs:
            acc = geometry.union(acc, s.resolve(game, player, at))
        return acc

    def to_json(self):
        return {"union": [s.to_json() for s in self.specs]}


@dataclass(frozen=True)
class Guard:
    """Default-outcome pattern: payoff at most ``caps`` (None = unbounded)."""

    caps: tuple

    def matches(self, game: Game, a: Outcome, at: tuple) -> bool:
        return all(c is None or x <= c for x, c in zip(at, self.caps))

    def to_json(self):
        return {"guard": [None if c is None else fmt(c) for c in self.caps]}


def _default_matches(pattern, game, a, at) -> bool:
    if pattern == WILDCARD:
        return True
    if isinstance(pattern, Outcome):
        return pattern == a
    return pattern.matches(game, a, at)


def _default_to_json(pattern):
    if pattern == WILDCARD:
        return WILDCARD
    return pattern.to_json()


@dataclass(frozen=True)
class Rule:
    counterpart: str  # fingerprint of a counterpart function, or WILDCARD
    default: object  # WILDCARD | Outcome | Guard
    region: object  # Fixed | Box | PMP | Union

    def to_json(self) -> dict:
        return {
            "counterpart": self.counterpart,
            "default": _default_to_json(self.default),
            "region": self.region.to_json(),
        }


@dataclass(frozen=True)
class SVRFunction:
    """Conditional set-valued renegotiation rule table; first match wins.

    ``lineage`` is the fingerprint of the function this one was extended
    from, so rules keyed to the original also recognise the extension.
    """

    rules: tuple
    lineage: Optional[str] = None
    name: str = field(default="rn", compare=False)

    def to_json(self) -> dict:
        out = {"type": "svr", "rules": [r.to_json() for r in self.rules]}
        if self.lineage is not None:
            out["lineage"] = self.lineage
        return out

    @property
    def fingerprint(self) -> str:
        return canonical(self.to_json())

    @property
    def keys(self) -> frozenset:
        """Identities a counterpart pattern may match against."""
        return frozenset(k for k in (self.fingerprint, self.lineage) if k is not None)

    def match(self, game: Game, counterpart_keys, a: Outcome) -> Optional[Rule]:
        at = payoff(game, a)
        for rule in self.rules:
            if rule.counterpart != WILDCARD and rule.counterpart not in counterpart_keys:
                continue
            if _default_matches(rule.default, game, a, at):
                return rule
        return None

    def region(self, game: Game, player: int, counterpart_keys, a: Outcome) -> Region:
        """Resolved renegotiation set, always inside the feasible set."""
        rule = self.match(game, counterpart_keys, a)
        if rule is None:
            return Region.empty(not game.two_player)
        raw = rule.region.resolve(game, player, payoff(game, a))
        return geometry.intersect(raw, game.feasible)


def counterpart_keys(fns: Sequence[SVRFunction]) -> frozenset:
    if len(fns) == 1:
        return fns[0].keys
    return frozenset([canonical([f.to_json() for f in fns])])


def validate_svr(
    rn: SVRFunction,
    game: Game,
    player: int,
    counterpart_universe: Sequence[SVRFunction],
) -> ValidationReport:
    """Check both SVR conditions against a finite counterpart universe.

    Defaults range over pure profiles and explicit outcome patterns; guard
    and wildcard rules carrying a fixed region are checked against the
    worst feasible default they can match.
    """
    violations = []
    universe = list(counterpart_universe) or [None]
    defaults = [Outcome.pure(*p) for p in game.profiles]
    defaults += [r.default for r in rn.rules if isinstance(r.default, Outcome)]
    strict_anywhere = False
    for cp in universe:
        keys = cp.keys if cp is not None else frozenset()
        strict_here = False
        for a in dict.fromkeys(defaults):
            at = payoff(game, a)
            region = rn.region(game, player, keys, a)
            for v in region.vertices():
                if not dominates(v, at):
                    violations.append(
                        {
                            "condition": 1,
                            "counterpart": None if cp is None else cp.name,
                            "default": str(a),
                            "point": fmt_point(v),
                        }
                    )
                    break
            if any(any(x > y for x, y in zip(v, at)) for v in region.vertices()):
                strict_here = True
        for rule in rn.rules:
            if isinstance(rule.region, (Fixed, Union)) and not isinstance(rule.default, Outcome):
                worst = _worst_default(game, rule.default)
                region = geometry.intersect(
                    rule.region.resolve(game, player, worst), game.feasible
                )
                bad = [v for v in region.vertices() if not dominates(v, worst)]
                if bad:
                    violations.append(
                        {
                            "condition": 1,
                            "counterpart": None if cp is None else cp.name,
                            "default": "any matching " + _describe(rule.default),
                            "point": fmt_point(bad[0]),
                        }
                    )
        strict_anywhere = strict_anywhere or strict_here
        if not strict_here:
            violations.append(
                {
                    "condition": 2,
                    "counterpart": None if cp is None else cp.name,
                    "reason": "no rule strictly improves any player at any checked default",
                }
            )
    notes = [f"checked against {len(universe)} counterpart function(s)"]
    return ValidationReport(not violations, violations, notes)


def _describe(pattern) -> str:
    return "outcome" if pattern == WILDCARD else "guarded outcome"


def _worst_default(game: Game, pattern) -> tuple:
    """Componentwise max payoff over feasible defaults the pattern admits."""
    if pattern == WILDCARD or not game.two_player:
        verts = game.feasible.vertices()
        if isinstance(pattern, Guard):
            verts = [v for v in verts if pattern.matches(game, None, v)]
    else:
        hps = []
        one, zero = Fraction(1), Fraction(0)
        if pattern.caps[0] is not None:
            hps.append((one, zero, pattern.caps[0]))
        if pattern.caps[1] is not None:
            hps.append((zero, one, pattern.caps[1]))
        verts = geometry.clip(game.feasible, hps).vertices()
    return tuple(max(v[i] for v in verts) for i in range(game.player_count))


# --- selection functions ------------------------------------------------


def lex_key(p: tuple) -> tuple:
    return tuple(p)


def _dot(weights: tuple, v: tuple) -> Fraction:
    # integer accumulation, one normalisation at the end
    num, den = 0, 1
    for w, x in zip(weights, v):
        tn, td = w.numerator * x.numerator, w.denominator * x.denominator
        num, den = num * td + tn * den, den * td
    return Fraction(num, den)


@dataclass(frozen=True)
class WeightedSum:
    """Maximise a positive weighted sum; ties go to the lexicographically
    smallest payoff vector. Exact: a linear objective peaks at a vertex."""

    weights: tuple
    approximate = False

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        if not weights or any(w <= 0 for w in weights):
            raise DomainError("weighted-sum selection needs positive weights")
        object.__setattr__(self, "weights", weights)

    @property
    def name(self) -> str:
        return "weighted_sum(" + ",".join(fmt(w) for w in self.weights) + ")"

    def choose(self, region: Region) -> tuple:
        if region.is_empty():
            raise DomainError("selection from an empty region")
        best = None
        for v in region.vertices():
            score = _dot(self.weights, v)
            key = (-score, lex_key(v))
            if best is None or key < best[0]:
                best = (key, v)
        return best[1]

    def to_json(self) -> dict:
        return {"weights": [fmt(w) for w in self.weights], "tie_break": "lex"}


@dataclass(frozen=True)
class VertexSelection:
    """Externally supplied objective, evaluated on region vertices only.
    Not guaranteed exact for nonlinear objectives."""

    name: str
    key: Callable = field(compare=False)
    approximate = True

    def choose(self, region: Region) -> tuple:
        if region.is_empty():
            raise DomainError("selection from an empty region")
        return min(region.vertices(), key=lambda v: (self.key(v), lex_key(v)))

    def to_json(self) -> dict:
        return {"external": self.name, "approximate": True}


def player_one_greedy() -> VertexSelection:
    """Negative control: maximise player 1, ties toward lower player 2."""
    return VertexSelection("player_one_greedy", lambda v: (-v[0], v[1]))


def nash_product(disagreement: tuple) -> VertexSelection:
    def key(v):
        prod = Fraction(1)
        for x, d in zip(v, disagreement):
            prod *= max(x - d, Fraction(0))
        return -prod

    return VertexSelection("nash_product", key)


def select(d, s: Region) -> tuple:
    """Payoff vector chosen by ``d`` from ``s``; use ``game.realize`` for a
    realizing outcome."""
    return d.choose(s)


@dataclass
class TransitivityReport:
    checked: int
    counterexamples: list

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {
            "checked": self.checked,
            "passed": self.passed,
            "counterexamples": self.counterexamples[:20],
        }


def check_transitive(d, samples: Sequence[tuple]) -> TransitivityReport:
    """Check efficiency of D(S) in S, and D(S u S') >= D(S) whenever every
    point of S' weakly dominates D(S)."""
    bad = []
    checked = 0
    for s, s2 in samples:
        ds = d.choose(s)
        if not geometry.is_efficient(s, ds):
            bad.append({"kind": "inefficient", "S": geometry.region_to_json(s), "D(S)": fmt_point(ds)})
            continue
        if any(not dominates(v, ds) for v in s2.vertices()):
            continue
        checked += 1
        du = d.choose(geometry.union(s, s2))
        if not dominates(du, ds):
            bad.append(
                {
                    "kind": "intransitive",
                    "S": geometry.region_to_json(s),
                    "S_prime": geometry.region_to_json(s2),
                    "D(S)": fmt_point(ds),
                    "D(S u S')": fmt_point(du),
                }
            )
    return TransitivityReport(checked, bad)


def _mix(weights: list, verts: Sequence) -> tuple:
    """Exact convex combination with integer weights, one Fraction per
    coordinate."""
    tot = sum(weights)
    out = []
    for c in range(len(verts[0])):
        den = math.lcm(*(v[c].denominator for v in verts))
        num = sum(wk * v[c].numerator * (den // v[c].denominator) for wk, v in zip(weights, verts))
        out.append(Fraction(num, tot * den))
    return tuple(out)


def random_region(rng: random.Random, game: Game, parts: int = 2, scale: int = 8) -> Region:
    """Random union of small polygons clipped to the feasible hull."""
    verts = game.hull.vertices
    polys = []
    for _ in range(parts):
        pts = []
        for _ in range(rng.randint(1, 4)):
            w = [rng.randint(0, scale) for _ in verts]
            if not any(w):
                w[0] = 1
            pts.append(_mix(w, verts))
        polys.append(Polygon.of(pts))
    return Region.of(polys)


def random_transitivity_samples(rng: random.Random, game: Game, d, count: int) -> list:
    """Pairs (S, S') with S' drawn inside the dominance cone of D(S)."""
    out = []
    for _ in range(count):
        s = random_region(rng, game, rng.randint(1, 3))
        ds = d.choose(s)
        cone = box(game, ds, (None,) * game.player_count)
        if cone.is_empty():
            out.append((s, Region.empty()))
            continue
        cverts = cone.vertices()
        pts = []
        for _ in range(rng.randint(1, 3)):
            w = [rng.randint(0, 6) for _ in cverts]
            if not any(w):
                w[0] = 1
            pts.append(_mix(w, cverts))
        out.append((s, Region.of([Polygon.of(pts)])))
    return out
