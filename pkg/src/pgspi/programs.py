"""Closed program language for program games.

Base programs only compare the counterpart's fingerprint with literal
patterns, so they never run the counterpart and always halt. Structured
programs (renegotiation, CSR, ICSR) wrap a base default and are executed
by ``trace`` following the three renegotiation algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union as TUnion

from . import geometry
from .game import DomainError, Game, Outcome, payoff, realize
from .geometry import Region, fmt_point
from .renegotiation import RenegFunction, SVRFunction, canonical, counterpart_keys

MAX_CHAIN = 16


class EvaluationError(RuntimeError):
    """Internal invariant violated during evaluation."""


@dataclass(frozen=True)
class Const:
    action: str


@dataclass(frozen=True)
class MatchElse:
    """Play ``then`` if the counterpart's fingerprint equals ``pattern``."""

    pattern: str
    then: str
    orelse: "BaseProgram"


BaseProgram = TUnion[Const, MatchElse]


@dataclass(frozen=True)
class Reneg:
    default: BaseProgram
    r: RenegFunction


@dataclass(frozen=True)
class CSR:
    default: BaseProgram
    rn: SVRFunction


@dataclass(frozen=True)
class ICSR:
    default: BaseProgram
    rounds: tuple

    def __post_init__(self):
        if not self.rounds:
            raise DomainError("ICSR needs at least one round (K >= 1)")


Program = TUnion[Const, MatchElse, Reneg, CSR, ICSR]
STRUCTURED = (Reneg, CSR, ICSR)


def match(pattern, then: str, orelse: BaseProgram) -> MatchElse:
    """Convenience constructor; a program pattern is fingerprinted."""
    if not isinstance(pattern, str):
        pattern = fingerprint(pattern)
    return MatchElse(pattern, then, orelse)


def to_json(p) -> dict:
    if isinstance(p, Const):
        return {"kind": "const", "action": p.action}
    if isinstance(p, MatchElse):
        return {"kind": "match", "pattern": p.pattern, "then": p.then, "else": to_json(p.orelse)}
    if isinstance(p, Reneg):
        return {"kind": "reneg", "default": to_json(p.default), "r": p.r.to_json()}
    if isinstance(p, CSR):
        return {"kind": "csr", "default": to_json(p.default), "rn": p.rn.to_json()}
    if isinstance(p, ICSR):
        return {
            "kind": "icsr",
            "default": to_json(p.default),
            "rounds": [f.to_json() for f in p.rounds],
        }
    if isinstance(p, (RenegFunction, SVRFunction)):
        return p.to_json()
    raise TypeError(f"not a program: {p!r}")


def fingerprint(x) -> str:
    """Canonical serialization; equal programs and only equal programs
    share a fingerprint."""
    return canonical(to_json(x))


def profile_fingerprint(programs: Sequence) -> str:
    if len(programs) == 1:
        return fingerprint(programs[0])
    return canonical([to_json(p) for p in programs])


def chain_length(p: BaseProgram) -> int:
    n = 0
    while isinstance(p, MatchElse):
        n += 1
        p = p.orelse
    return n


def run_base(p: BaseProgram, counterpart_fp: str) -> str:
    while isinstance(p, MatchElse):
        if p.pattern == counterpart_fp:
            return p.then
        p = p.orelse
    return p.action


def default_of(p: Program) -> BaseProgram:
    return p.default if isinstance(p, STRUCTURED) else p


@dataclass(frozen=True)
class Membership:
    family: str
    default: BaseProgram
    functions: tuple = ()

    @property
    def k(self) -> int:
        return len(self.functions)


def classify(p: Program) -> Membership:
    if isinstance(p, Reneg):
        return Membership("reneg", p.default, (p.r,))
    if isinstance(p, CSR):
        return Membership("csr", p.default, (p.rn,))
    if isinstance(p, ICSR):
        return Membership("icsr", p.default, tuple(p.rounds))
    return Membership("base", p)


def _others(seq: Sequence, i: int) -> list:
    return [x for k, x in enumerate(seq) if k != i]


def base_outcome(programs: Sequence[BaseProgram]) -> Outcome:
    """Each program's action against the others' full fingerprints."""
    acts = [run_base(default_of(p), profile_fingerprint(_others(programs, i))) for i, p in enumerate(programs)]
    return Outcome.pure(*acts)


@dataclass
class Round:
    start: Outcome
    regions: list
    agreement: Region
    selected: Optional[Outcome]

    def to_json(self, game: Game) -> dict:
        return {
            "start": str(self.start),
            "start_payoff": fmt_point(payoff(game, self.start)),
            "regions": [geometry.region_to_json(r) for r in self.regions],
            "agreement": geometry.region_to_json(self.agreement),
            "selected": None if self.selected is None else str(self.selected),
            "selected_payoff": None if self.selected is None else fmt_point(payoff(game, self.selected)),
        }


@dataclass
class Trace:
    family: str
    outcome: Outcome
    default_outcome: Optional[Outcome] = None
    proposals: list = field(default_factory=list)
    rounds: list = field(default_factory=list)

    def chain(self) -> list:
        """Default outcome followed by each round's resulting outcome."""
        out = [self.default_outcome]
        for rd in self.rounds:
            out.append(rd.selected if rd.selected is not None else rd.start)
        return out

    def to_json(self, game: Game) -> dict:
        out = {
            "family": self.family,
            "outcome": str(self.outcome),
            "payoff": fmt_point(payoff(game, self.outcome)),
        }
        if self.default_outcome is not None:
            out["default_outcome"] = str(self.default_outcome)
            out["default_payoff"] = fmt_point(payoff(game, self.default_outcome))
        if self.proposals:
            out["proposals"] = [str(p) for p in self.proposals]
        if self.rounds:
            out["rounds"] = [r.to_json(game) for r in self.rounds]
        return out


def _csr_round(fns, a: Outcome, game: Game, selection) -> Round:
    regions = [
        f.region(game, i, counterpart_keys(_others(fns, i)), a) for i, f in enumerate(fns)
    ]
    agreement = geometry.intersect_all(regions)
    selected = None
    if not agreement.is_empty():
        chosen = selection.choose(agreement)
        if not geometry.contains(agreement, chosen):
            raise EvaluationError(
                f"selection returned {fmt_point(chosen)} outside the agreement set"
            )
        selected = realize(game, chosen)
    return Round(a, regions, agreement, selected)


def trace(profile: Sequence[Program], game: Game, selection) -> Trace:
    """Evaluate a program profile, recording the renegotiation steps."""
    if len(profile) != game.player_count:
        raise DomainError("profile length differs from the number of players")
    for p in profile:
        if chain_length(default_of(p)) > MAX_CHAIN:
            raise DomainError(f"match chain longer than {MAX_CHAIN}")
    kinds = {type(p) for p in profile}
    defaults = [default_of(p) for p in profile]

    if kinds == {Reneg}:
        a_def = base_outcome(defaults)
        proposals = [p.r(a_def) for p in profile]
        if all(x == proposals[0] for x in proposals):
            return Trace("reneg", proposals[0], a_def, proposals)
        return Trace("reneg", a_def, a_def, proposals)

    if kinds == {CSR}:
        a_def = base_outcome(defaults)
        rd = _csr_round([p.rn for p in profile], a_def, game, selection)
        out = rd.selected if rd.selected is not None else a_def
        return Trace("csr", out, a_def, rounds=[rd])

    if kinds == {ICSR} and len({len(p.rounds) for p in profile}) == 1:
        a_def = base_outcome(defaults)
        a = a_def
        rounds = []
        for k in range(len(profile[0].rounds)):
            rd = _csr_round([p.rounds[k] for p in profile], a, game, selection)
            rounds.append(rd)
            if rd.selected is not None:
                a = rd.selected
        return Trace("icsr", a, a_def, rounds=rounds)

    # no common template: every program plays its default (or itself)
    # against the counterparts' full programs
    family = "base" if not kinds & set(STRUCTURED) else "mixed"
    return Trace(family, base_outcome(profile))


def evaluate(profile: Sequence[Program], game: Game, selection) -> Outcome:
    return trace(profile, game, selection).outcome


def program_from_json(data, functions: dict, actions: Sequence[str] = None) -> Program:
    """Parse the program grammar; function names resolve in ``functions``."""
    if not isinstance(data, dict) or "kind" not in data:
        raise DomainError(f"malformed program: {data!r}")
    kind = data["kind"]

    def act(a):
        if actions is not None and a not in actions:
            raise DomainError(f"unknown action {a!r}")
        return a

    def fn(name, cls):
        if isinstance(name, dict):
            from .scenario import function_from_json

            f = function_from_json(name, functions, "inline")
        else:
            if name not in functions:
                raise DomainError(f"unknown function {name!r}")
            f = functions[name]
        if not isinstance(f, cls):
            raise DomainError(f"function {name!r} has the wrong type")
        return f

    if kind == "const":
        return Const(act(data["action"]))
    if kind == "match":
        pat = data["pattern"]
        if isinstance(pat, dict):
            pat = fingerprint(program_from_json(pat, functions))
        orelse = program_from_json(data["else"], functions, actions)
        if isinstance(orelse, STRUCTURED):
            raise DomainError("match chains end in a base program")
        return MatchElse(pat, act(data["then"]), orelse)
    default = program_from_json(data["default"], functions, actions)
    if isinstance(default, STRUCTURED):
        raise DomainError("defaults must be base programs")
    if kind == "reneg":
        return Reneg(default, fn(data["r"], RenegFunction))
    if kind == "csr":
        return CSR(default, fn(data["rn"], SVRFunction))
    if kind == "icsr":
        return ICSR(default, tuple(fn(n, SVRFunction) for n in data["rounds"]))
    raise DomainError(f"unknown program kind {kind!r}")


def base_space(own_actions: Sequence[str], counterpart_actions: Sequence[str], depth: int = 1) -> list:
    """Base programs with match chains up to ``depth`` long, matching the
    counterpart's constant programs. Chains whose branch repeats the
    fallback action are left out as redundant."""
    consts = [Const(a) for a in own_actions]
    patterns = [fingerprint(Const(b)) for b in counterpart_actions]
    out = list(consts)
    layer = list(consts)
    for _ in range(depth):
        nxt = []
        for tail in layer:
            fallback = run_base(tail, "")
            for pat in patterns:
                if isinstance(tail, MatchElse) and pat <= tail.pattern:
                    continue  # keep patterns strictly increasing along a chain
                for a in own_actions:
                    if a != fallback:
                        nxt.append(MatchElse(pat, a, tail))
        out.extend(nxt)
        layer = nxt
    return out
