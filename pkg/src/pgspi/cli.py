"""``pgspi`` command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 bad input, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import geometry
from .equilibrium import (
    PreconditionError,
    check_assumption_csr_no_punish,
    check_assumption_reneg_no_punish,
    check_subjective_equilibrium,
    theorem3_extend_and_verify,
    verify_spi,
)
from .game import DomainError, Game, best_feasible_payoff, payoff, pmp_at
from .geometry import fmt, fmt_point, parse_rational, region_to_json
from .programs import CSR, Const, base_space, evaluate, trace
from .scenario import (
    InputError,
    data_path,
    load_game,
    load_scenario,
    outcome_from_json,
    selection_from_json,
)
from .spi import make_csr_spi, make_reneg_spi, translate_selection
from .tightness import build_tightness_scenario

OK, FAILED, BAD_INPUT, IO_ERROR = 0, 1, 2, 3


class OutputError(OSError):
    """Writing a result failed."""


def _vector(text: str) -> tuple:
    try:
        return tuple(parse_rational(c.strip()) for c in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad rational vector {text!r}: {exc}") from exc


def _game(path) -> Game:
    return load_game(path if path else data_path("scheduling.json"))


def _segment_text(r: geometry.Region) -> list:
    out = []
    for part in r.parts:
        out.append(" -- ".join(fmt_point(v) for v in part.vertices))
    return out


# --- commands ----------------------------------------------------------------
# Each returns (report dict, text lines, exit code).


def cmd_pmm(args):
    game = _game(args.game)
    best = tuple(best_feasible_payoff(game, i) for i in range(game.player_count))
    eff = game.efficient
    report = {
        "pmm": fmt_point(game.pmm),
        "frontier": region_to_json(eff),
        "best_feasible": fmt_point(best),
    }
    lines = [f"PMM: {fmt_point(game.pmm)}"]
    if eff.point_mode:
        lines.append(f"frontier: {len(eff.points)} lattice points")
    else:
        lines += [f"frontier: {s}" for s in _segment_text(eff)]
    lines.append(f"best feasible payoffs: {fmt_point(best)}")
    return report, lines, OK


def cmd_pmp(args):
    game = _game(args.game)
    at = _vector(args.at) if args.at else (Fraction(0),) * game.player_count
    report = {"at": fmt_point(at), "pmm": fmt_point(game.pmm), "pmp": []}
    lines = [f"reference payoff: {fmt_point(at)}"]
    for i in range(game.player_count):
        r = pmp_at(game, i, at)
        report["pmp"].append(region_to_json(r))
        text = _segment_text(r) if not r.point_mode else [f"{len(r.points)} points"]
        lines.append(f"PMP of player {i + 1}: " + (", ".join(text) or "empty"))
    return report, lines, OK


def _profile_names(args, scenario, raw):
    if args.all:
        return list(scenario.profiles)
    if args.profile:
        if args.profile not in scenario.profiles:
            raise InputError(f"no profile named {args.profile!r}")
        return [args.profile]
    if not scenario.profiles:
        raise InputError("scenario declares no profiles")
    return [next(iter(scenario.profiles))]


def _describe_trace(tr, game) -> list:
    out = payoff(game, tr.outcome)
    if tr.family in ("base", "mixed"):
        if geometry.contains(game.efficient, out):
            note = "defaults coordinate"
        elif all(x < g for x, g in zip(out, game.pmm)):
            note = "defaults miscoordinate"
        else:
            note = "inefficient outcome"
        return [f"no renegotiation ({tr.family}); {note}: {tr.outcome} {fmt_point(out)}"]
    lines = [f"default outcome: {tr.default_outcome} {fmt_point(payoff(game, tr.default_outcome))}"]
    if tr.family == "reneg":
        agreed = all(p == tr.proposals[0] for p in tr.proposals)
        lines.append("proposals: " + ", ".join(str(p) for p in tr.proposals))
        lines.append(
            ("renegotiated: " if agreed else "proposals disagree, defaults kept: ")
            + f"{fmt_point(payoff(game, tr.default_outcome))} -> {fmt_point(out)}"
        )
        return lines
    for k, rd in enumerate(tr.rounds, 1):
        lines.append(f"round {k}: start {fmt_point(payoff(game, rd.start))}")
        for i, r in enumerate(rd.regions):
            lines.append(f"  player {i + 1} set: " + ("; ".join(_segment_text(r)) or "empty"))
        lines.append("  agreement: " + ("; ".join(_segment_text(rd.agreement)) or "empty"))
        if rd.selected is not None:
            lines.append(f"  selected: {rd.selected} {fmt_point(payoff(game, rd.selected))}")
        else:
            lines.append("  no agreement; outcome unchanged")
    chain = [fmt_point(payoff(game, a)) for a in tr.chain()]
    lines.append("chain: " + " -> ".join(chain))
    return lines


def cmd_run(args):
    scenario, raw = load_scenario(args.scenario)
    game = scenario.game
    report, lines = {"profiles": {}}, []
    for name in _profile_names(args, scenario, raw):
        tr = trace(list(scenario.profiles[name]), game, scenario.selection)
        report["profiles"][name] = tr.to_json(game)
        lines.append(f"[{name}] payoff {fmt_point(payoff(game, tr.outcome))}")
        lines += ["  " + s for s in _describe_trace(tr, game)]
    return report, lines, OK


def cmd_equilibrium(args):
    scenario, raw = load_scenario(args.scenario)
    report, lines, code = {"profiles": {}}, [], OK
    for name in _profile_names(args, scenario, raw):
        eq = check_subjective_equilibrium(scenario.profiles[name], scenario)
        report["profiles"][name] = eq.to_json()
        lines.append(f"[{name}] subjective equilibrium: {str(eq.equilibrium).upper()}; payoff {fmt_point(eq.payoff)}")
        for v in eq.players:
            lines.append(
                f"  player {v.player + 1}: {v.program} expects {fmt(v.expected)}; argmax {', '.join(v.argmax)}"
            )
        if not eq.equilibrium:
            code = FAILED
    candidates = [scenario.profiles[n] for n in report["profiles"]]
    for check in (check_assumption_reneg_no_punish, check_assumption_csr_no_punish):
        a = check(scenario, candidates)
        report.setdefault("assumptions", []).append(a.to_json())
        lines.append(f"assumption {a.name}: {'holds' if a.passed else 'fails'}")
    return report, lines, code


def _space(spec, scenario):
    game = scenario.game
    if spec == "base-depth-1":
        n = game.player_count
        return [
            base_space(game.actions[i], game.actions[1 - i] if n == 2 else (), 1) for i in range(n)
        ]
    return [[scenario.programs[i][nm] for nm in names] for i, names in enumerate(spec)]


def cmd_verify_spi(args):
    scenario, raw = load_scenario(args.scenario)
    spec = raw.get("spi")
    if not spec:
        raise InputError("scenario has no 'spi' section")
    game = scenario.game
    space = _space(spec.get("space", "base-depth-1"), scenario)
    t = spec["transform"]
    if t["kind"] == "reneg":
        transform = make_reneg_spi(scenario.functions[t["r"]], game)
    elif t["kind"] == "csr":
        transform = make_csr_spi([scenario.functions[n] for n in t["rn"]], game, space)
    elif t["kind"] == "identity":
        transform = lambda prof: prof  # noqa: E731
    else:
        raise InputError(f"unknown transform kind {t['kind']!r}")
    res = verify_spi(transform, space, game, scenario.selection, scenario.label)
    report = res.to_json()
    report["universe"] = {"programs_per_player": [len(s) for s in space]}
    lines = [
        f"safe Pareto improvement: {'PASS' if res.passed else 'FAIL'} ({res.checked} profiles)"
    ]
    if res.strict_witness:
        w = res.strict_witness
        lines.append(f"strict witness: {' vs '.join(w['profile'])}: {w['before']} -> {w['after']}")
    if res.violation:
        w = res.violation
        lines.append(f"violation: {' vs '.join(w['profile'])}: {w['before']} -> {w['after']}")
    return report, lines, OK if res.passed else FAILED


def cmd_theorem3(args):
    scenario, raw = load_scenario(args.scenario)
    name = args.profile or raw.get("theorem3", {}).get("profile") or next(iter(scenario.profiles), None)
    if name not in scenario.profiles:
        raise InputError(f"no profile named {name!r}")
    try:
        res = theorem3_extend_and_verify(scenario.profiles[name], scenario)
    except PreconditionError as exc:
        return {"passed": False, "precondition": str(exc)}, [f"precondition failed: {exc}"], FAILED
    report = res.to_json()
    lines = [
        f"payoff before extension: {report['payoff_before']}",
        f"payoff after extension: {report['payoff_after']} (PMM {report['pmm']})",
        f"expected payoffs: {', '.join(report['expected_before'])} -> {', '.join(report['expected_after'])}",
        f"equilibrium before/after: {report['equilibrium_before']}/{report['equilibrium_after']}",
        f"result: {'PASS' if res.passed else 'FAIL'}",
    ]
    return report, lines, OK if res.passed else FAILED


def cmd_tightness(args):
    game = _game(args.game)
    k = args.k if args.k is not None else 3
    delta = _vector(args.delta) if args.delta else (Fraction(1, 5),) * 2
    ks = range(1, k + 1) if args.all else [k]
    report, lines, code = {"runs": []}, [], OK
    for kk in ks:
        _, _, rep = build_tightness_scenario(game, kk, delta)
        report["runs"].append(rep.to_json())
        lines += [
            f"K={kk}: epsilon {fmt_point(rep.epsilon)}, threshold {fmt(rep.threshold)}, "
            f"belief_mix_weight {fmt(rep.belief_mix_weight)}",
            "  chain: " + " -> ".join(fmt_point(p) for p in rep.chain),
            f"  final {fmt_point(rep.final)} within {fmt_point(rep.bound)}: {rep.within_bound}; "
            f"equilibrium: {rep.equilibrium.equilibrium}; result: {'PASS' if rep.passed else 'FAIL'}",
        ]
        if not rep.passed:
            code = FAILED
    return report, lines, code


def cmd_translate_selection(args):
    scenario, raw = load_scenario(args.scenario)
    spec = raw.get("translation")
    if not spec:
        raise InputError("scenario has no 'translation' section")
    game = scenario.game
    defaults = [outcome_from_json(d) for d in spec["defaults"]]
    selections = [selection_from_json(s) for s in spec["selections"]]
    d_old = scenario.selection
    report, lines, code = {"cells": []}, [], OK
    for pname, fnames in spec["profiles"].items():
        fns = [scenario.functions[n] for n in fnames]
        new = translate_selection(fns, defaults, game, d_old)
        for d_new in selections:
            same = True
            rows = []
            for a in defaults:
                progs = [Const(x) for x in a.profile()]
                before = evaluate([CSR(p, f) for p, f in zip(progs, fns)], game, d_old)
                after = evaluate([CSR(p, f) for p, f in zip(progs, new)], game, d_new)
                rows.append({"default": str(a), "original": str(before), "translated": str(after)})
                same = same and before == after
            report["cells"].append(
                {"profile": pname, "selection": d_new.name, "invariant": same, "rows": rows}
            )
            lines.append(f"{pname} under {d_new.name}: {'same outcomes' if same else 'OUTCOMES DIFFER'}")
            if not same:
                code = FAILED
    return report, lines, code


def _decimal(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{float(q):.6f}".rstrip("0").rstrip(".")


def frontier_rows(game: Game, at) -> list:
    """Rows (u1, u2, tag) behind payoff-space plots."""
    rows = []
    for v in sorted(game.pure_points):
        rows.append((v, "pure"))
    for v in game.efficient.vertices():
        rows.append((v, "frontier"))
    rows.append((game.pmm, "pmm"))
    for i in range(2):
        for v in pmp_at(game, i, at).vertices():
            rows.append((v, f"pmp{i + 1}"))
    return rows


def cmd_export_frontier(args):
    game = _game(args.game)
    if not game.two_player:
        raise InputError("frontier export is for two-player games")
    at = _vector(args.at) if args.at else (Fraction(0), Fraction(0))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u1", "u2", "tag", "u1_exact", "u2_exact"])
    rows = frontier_rows(game, at)
    for v, tag in rows:
        w.writerow([_decimal(v[0]), _decimal(v[1]), tag, fmt(v[0]), fmt(v[1])])
    if args.out:
        _write(args.out, buf.getvalue())
        lines = [f"wrote {len(rows)} rows to {args.out}"]
        return {"rows": len(rows), "path": str(args.out)}, lines, OK
    return None, buf.getvalue().splitlines(), OK


COMMANDS = {
    "pmm": (cmd_pmm, "game"),
    "pmp": (cmd_pmp, "game"),
    "run": (cmd_run, "scenario"),
    "verify-spi": (cmd_verify_spi, "scenario"),
    "equilibrium": (cmd_equilibrium, "scenario"),
    "theorem3": (cmd_theorem3, "scenario"),
    "tightness": (cmd_tightness, "game"),
    "translate-selection": (cmd_translate_selection, "scenario"),
    "export-frontier": (cmd_export_frontier, "game"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    common.add_argument("--out", type=Path, help="write output to PATH")
    common.add_argument("--all", action="store_true", help="every profile (or every K up to --k)")
    parser = argparse.ArgumentParser(prog="pgspi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, kind) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common])
        if kind == "scenario":
            p.add_argument("scenario", type=Path)
            p.add_argument("--profile")
        else:
            p.add_argument("game", type=Path, nargs="?", help="game JSON (default: Scheduling Game)")
        if name in ("pmp", "export-frontier"):
            p.add_argument("--at", help="reference payoff, e.g. 0,0")
        if name == "tightness":
            p.add_argument("--k", type=int)
            p.add_argument("--delta", help="e.g. 1/5,1/5")
    return parser


def _write(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        report, lines, code = handler(args)
        if report is not None and args.json:
            text = json.dumps(report, indent=2) + "\n"
        else:
            text = "\n".join(lines) + "\n"
        if args.out and args.command != "export-frontier":
            _write(args.out, text)
        else:
            sys.stdout.write(text)
        return code
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename or exc}", file=sys.stderr)
        return BAD_INPUT
    except (DomainError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
