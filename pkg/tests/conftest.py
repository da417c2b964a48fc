from __future__ import annotations

import pytest

from kgqg.augmentation import AugmentedGraph
from kgqg.context import ContextType, EvalInstance
from kgqg.fixtures import example_dialogs, example_kb, synthetic_corpus


@pytest.fixture(scope="session")
def ex_kb():
    return example_kb()


@pytest.fixture(scope="session")
def ex_dialogs():
    return {d.id: d for d in example_dialogs()}


@pytest.fixture(scope="session")
def corpus():
    return synthetic_corpus(seed=7, n_dialogs=40)


def make_instance(dialog, k, ct=ContextType.QA_NL, graph=None):
    graph = graph or AugmentedGraph.plain(sorted(dialog.graph))
    return EvalInstance(dialog.id, dialog.turns[:k], ct, graph, dialog.root_entity,
                        dialog.category, dialog.turns[k])


_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for name, verdict in _ACCEPTANCE:
            terminalreporter.write_line(f"{verdict}  {name}")
