from pathlib import Path

import pytest

from accessfix import (
    Automaton,
    build_super_automaton,
    enabling_functions,
    parse_policy,
    parse_system,
)

FIXTURES = Path(__file__).parent / "fixtures"

UNIVERSE = frozenset(
    ["K_OA", "K_AB", "c_PCTom", "c_PCAmy", "c_PLCusr", "c_IGSusr", "c_IGSadm", "c_MBSLadm"]
)
C_TOM = frozenset(["K_OA", "K_AB", "c_PCTom", "c_PLCusr", "c_IGSusr"])
C_AMY = frozenset(["K_OA", "K_AB", "c_PCAmy", "c_IGSadm", "c_MBSLadm"])

# Credential assignments that make the plant policy-conformant.
TOM_FIX_SMALL = frozenset(["K_OA", "c_PCTom", "c_IGSusr"])
TOM_FIX_LARGE = frozenset(["K_OA", "K_AB", "c_PCTom", "c_IGSusr"])
AMY_FIX = frozenset(
    ["K_OA", "K_AB", "c_PCAmy", "c_PLCusr", "c_IGSadm", "c_MBSLadm", "c_IGSusr"]
)
AMY_FIX_MIN = frozenset(
    ["K_OA", "K_AB", "c_PLCusr", "c_IGSadm", "c_IGSusr", "c_MBSLadm"]
)

ALL_REDUCED = frozenset(
    [
        ("enter", "A"),
        ("enter", "B"),
        ("enter", "O"),
        ("login", "PC"),
        ("login", "PLC"),
        ("run", "MBSL"),
        ("run", "IGS"),
        ("admin", "PLC"),
        ("admin", "MBSL"),
        ("admin", "IGS"),
    ]
)


@pytest.fixture(scope="session")
def plant_text():
    return (FIXTURES / "plant.ins").read_text()


@pytest.fixture(scope="session")
def policy_text():
    return (FIXTURES / "plant.rbac").read_text()


@pytest.fixture(scope="session")
def plant(plant_text):
    return parse_system(plant_text, "plant.ins")


@pytest.fixture(scope="session")
def plant_policy(policy_text):
    return parse_policy(policy_text, "plant.rbac")


@pytest.fixture(scope="session")
def plant_automaton(plant):
    return build_super_automaton(plant)


@pytest.fixture(scope="session")
def plant_functions(plant_automaton):
    return enabling_functions(plant_automaton)


def make_toy_automaton() -> Automaton:
    """Five-letter example machine: e fires after a, or after d then f."""
    return Automaton.from_edges(
        "q0",
        [
            ("q0", "a", "q1"),
            ("q1", "b", "q1"),
            ("q1", "e", "q2"),
            ("q0", "d", "q3"),
            ("q3", "f", "q4"),
            ("q4", "e", "q5"),
        ],
    )


@pytest.fixture
def toy():
    return make_toy_automaton()
