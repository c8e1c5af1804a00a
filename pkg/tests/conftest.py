from __future__ import annotations

from fractions import Fraction

import pytest

from pgspi.game import Game, game_from_json
from pgspi.renegotiation import WeightedSum
from pgspi.scenario import data_path, load_scenario, read_json

SCENARIOS = data_path("scenarios")
_criteria: list = []


@pytest.fixture(scope="session")
def scheduling() -> Game:
    return game_from_json(read_json(data_path("scheduling.json")))


@pytest.fixture(scope="session")
def lex11():
    return WeightedSum((1, 1))


@pytest.fixture
def scenario():
    def load(name: str):
        sc, _ = load_scenario(SCENARIOS / f"{name}.json")
        return sc

    return load


def F(x) -> Fraction:
    return Fraction(x)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


@pytest.fixture
def criterion(request):
    """Acceptance bookkeeping: ``criterion(n, detail)`` records a line that
    is printed, with the test verdict, in the terminal summary."""
    noted = {}

    def note(number: int, detail: str) -> None:
        noted["number"], noted["detail"] = number, detail

    yield note
    rep = getattr(request.node, "rep_call", None)
    if "number" in noted:
        verdict = "PASS" if rep is not None and rep.passed else "FAIL"
        _criteria.append((noted["number"], verdict, noted["detail"]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {detail}")
