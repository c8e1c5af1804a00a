"""JSON loading for games, function tables and scenarios.

A scenario file looks like::

    {"game": "scheduling.json",
     "function_table": {"r": {"type": "reneg", "rules": [...]}},
     "programs": [{"pD1": {...}}, {"pD2": {...}}],
     "space": [["pD1", ...], ["pD2", ...]],
     "beliefs": [[{"profile": ["pC2"], "prob": "1"}], ...],
     "selection": {"weights": ["1", "1"], "tie_break": "lex"},
     "tie_preference": false,
     "profiles": {"main": ["pD1", "pD2"]}}

Relative paths resolve against the scenario file's directory, then against
the bundled data directory.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Optional

from .equilibrium import Belief, Scenario
from .game import DomainError, Game, Outcome, game_from_json
from .geometry import parse_rational, region_from_json
from .programs import fingerprint, program_from_json
from .renegotiation import (
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
)


class InputError(DomainError):
    """Malformed or unresolvable input file content."""


def data_path(name: str) -> Path:
    return Path(str(resources.files("pgspi") / "data" / name))


def _resolve(path: str, base: Optional[Path]) -> Path:
    candidates = []
    if base is not None:
        candidates.append(base / path)
    candidates.append(Path(path))
    candidates.append(data_path(path))
    for c in candidates:
        if c.exists():
            return c
    raise FileNotFoundError(path)


def read_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_game(path) -> Game:
    return game_from_json(read_json(path))


def outcome_from_json(data) -> Outcome:
    if isinstance(data, list):
        return Outcome.pure(*data)
    if isinstance(data, dict) and "weights" in data:
        return Outcome.of([(tuple(p), parse_rational(w)) for p, w in data["weights"]])
    raise InputError(f"malformed outcome: {data!r}")


def _caps(raw) -> tuple:
    return tuple(None if c is None else parse_rational(c) for c in raw)


def region_spec_from_json(data):
    if not isinstance(data, dict) or len(data) != 1:
        raise InputError(f"malformed region spec: {data!r}")
    (kind, body), = data.items()
    if kind == "fixed":
        return Fixed(region_from_json(body))
    if kind == "box":
        floor = body.get("floor", "default")
        if floor not in ("default", "pmp"):
            raise InputError(f"unknown box floor {floor!r}")
        return Box(floor, _caps(body.get("caps", ())))
    if kind == "pmp":
        return PMP()
    if kind == "union":
        return Union(tuple(region_spec_from_json(s) for s in body))
    raise InputError(f"unknown region kind {kind!r}")


def _default_pattern(data):
    if data == WILDCARD:
        return WILDCARD
    if isinstance(data, dict) and "guard" in data:
        return Guard(_caps(data["guard"]))
    return outcome_from_json(data)


def function_from_json(data, functions: dict, name: str):
    """Parse one function definition. A counterpart pattern may be
    ``"*"``, a fingerprint string, or ``{"function": name}`` naming an
    already-parsed function."""
    kind = data.get("type") if isinstance(data, dict) else None
    if kind == "reneg":
        return RenegFunction.of(
            [(outcome_from_json(a), outcome_from_json(b)) for a, b in data["rules"]], name
        )
    if kind == "svr":
        rules = []
        for rd in data["rules"]:
            cp = rd.get("counterpart", WILDCARD)
            if isinstance(cp, dict):
                ref = cp.get("function")
                if ref not in functions:
                    raise InputError(f"function {name!r} refers to unknown {ref!r}")
                cp = functions[ref].fingerprint
            rules.append(
                Rule(cp, _default_pattern(rd.get("default", WILDCARD)), region_spec_from_json(rd["region"]))
            )
        lineage = data.get("lineage")
        if isinstance(lineage, dict):
            lineage = functions[lineage["function"]].fingerprint
        return SVRFunction(tuple(rules), lineage, name)
    raise InputError(f"function {name!r} needs type 'reneg' or 'svr'")


def functions_from_json(table: dict) -> dict:
    """Parse a function table; entries may refer to earlier entries."""
    out: dict = {}
    pending = dict(table)
    while pending:
        progress = False
        for name in list(pending):
            try:
                out[name] = function_from_json(pending[name], out, name)
            except InputError as exc:
                if "refers to unknown" not in str(exc):
                    raise
                continue
            del pending[name]
            progress = True
        if not progress:
            raise InputError(f"unresolvable function references in {sorted(pending)}")
    return out


def selection_from_json(data):
    data = data or {"weights": ["1", "1"]}
    if data.get("tie_break", "lex") != "lex":
        raise InputError("only the lexicographic tie-break is supported")
    return WeightedSum(tuple(parse_rational(w) for w in data["weights"]))


def _programs(raw: list, functions: dict, game: Game) -> tuple:
    """Per-player name -> Program. A pattern may be ``{"program": name}``
    naming any program already parsed, for any player."""
    parsed = [dict() for _ in raw]
    everything: dict = {}
    pending = [(i, name, body) for i, table in enumerate(raw) for name, body in table.items()]

    def substitute(node):
        if isinstance(node, dict):
            if set(node) == {"program"}:
                ref = node["program"]
                if ref not in everything:
                    raise KeyError(ref)
                return fingerprint(everything[ref])
            return {k: substitute(v) for k, v in node.items()}
        if isinstance(node, list):
            return [substitute(v) for v in node]
        return node

    while pending:
        left = []
        for i, name, body in pending:
            try:
                body = substitute(body)
            except KeyError:
                left.append((i, name, body))
                continue
            parsed[i][name] = program_from_json(body, functions, game.actions[i])
            everything[name] = parsed[i][name]
        if len(left) == len(pending):
            raise InputError(f"unresolvable program references: {[n for _, n, _ in left]}")
        pending = left
    return tuple(parsed)


def _lookup(programs: tuple, player: int, name: str):
    if name not in programs[player]:
        raise InputError(f"player {player + 1} has no program named {name!r}")
    return programs[player][name]


def scenario_from_json(data: dict, base: Optional[Path] = None) -> Scenario:
    try:
        game_src = data["game"]
        game = game_from_json(
            read_json(_resolve(game_src, base)) if isinstance(game_src, str) else game_src
        )
        table = data.get("function_table", {})
        if isinstance(table, str):
            table = read_json(_resolve(table, base))
        functions = functions_from_json(table)
        programs = _programs(data["programs"], functions, game)
        n = game.player_count
        names = data.get("space") or [list(p) for p in programs]
        space = tuple(tuple(_lookup(programs, i, nm) for nm in names[i]) for i in range(n))
        beliefs = []
        for i, entries in enumerate(data["beliefs"]):
            others = [j for j in range(n) if j != i]
            support = []
            for e in entries:
                prof = tuple(_lookup(programs, j, nm) for j, nm in zip(others, e["profile"]))
                support.append((prof, parse_rational(e["prob"])))
            beliefs.append(Belief(tuple(support)))
        profiles = {
            name: tuple(_lookup(programs, i, nm) for i, nm in enumerate(prof))
            for name, prof in data.get("profiles", {}).items()
        }
        return Scenario(
            game,
            space,
            tuple(beliefs),
            selection_from_json(data.get("selection")),
            functions,
            bool(data.get("tie_preference", False)),
            programs,
            profiles,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise InputError(f"malformed scenario: {exc!r}") from exc


def load_scenario(path) -> tuple:
    """Returns ``(scenario, raw json)``."""
    path = Path(path)
    data = read_json(path)
    return scenario_from_json(data, path.parent), data
