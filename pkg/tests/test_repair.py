import random

import pytest

from accessfix import (
    CnfFormula,
    Permission,
    PolicySpec,
    Role,
    SpecSets,
    build_constraint,
    repair_all,
    repair_user,
    solve_all,
    spec_sets,
    to_cnf,
    verify,
)
from conftest import AMY_FIX, AMY_FIX_MIN, C_TOM, TOM_FIX_LARGE, TOM_FIX_SMALL, UNIVERSE
from oracles import powerset


def test_tom_constraint_truth_table(plant, plant_automaton, plant_policy):
    sets = spec_sets(plant_policy)
    constraint = build_constraint(plant_automaton, sets, plant.users["Tom"], C_TOM)
    models = {creds for creds in powerset(C_TOM) if constraint.satisfied_by(creds)}
    assert models == {TOM_FIX_SMALL, TOM_FIX_LARGE}
    for creds in models:
        assert {"K_OA", "c_PCTom", "c_IGSusr"} <= creds
        assert "c_PLCusr" not in creds


def test_constraint_without_requirements_is_trivially_true(plant, plant_automaton):
    constraint = build_constraint(plant_automaton, SpecSets(), plant.users["Tom"], C_TOM)
    assert constraint.satisfied_by(frozenset())
    assert constraint.satisfied_by(C_TOM)


def test_constraint_with_impossible_requirement_is_unsat(plant, plant_automaton):
    sets = SpecSets(s_plus=frozenset({("Tom", "fly", "PLC")}))
    constraint = build_constraint(plant_automaton, sets, plant.users["Tom"], UNIVERSE)
    assert not any(constraint.satisfied_by(creds) for creds in powerset(UNIVERSE))


def test_to_cnf_trivial_cases(plant, plant_automaton):
    constraint = build_constraint(plant_automaton, SpecSets(), plant.users["Tom"], C_TOM)
    assert to_cnf(constraint).clauses == ()


def test_to_cnf_single_negation(plant, plant_automaton, plant_policy):
    # denying one action encodes as exactly one all-negative clause per minterm
    sets = SpecSets(s_minus=frozenset({("Tom", "enter", "B")}))
    constraint = build_constraint(
        plant_automaton, sets, plant.users["Tom"], frozenset({"K_OA", "K_AB"})
    )
    cnf = to_cnf(constraint)
    assert cnf.clauses == ((("K_AB", False), ("K_OA", False)),)
    models = solve_all(cnf, ("K_AB", "K_OA"), cap=10)
    assert len(models.assignments) == 3  # everything except both keys
    assert {"K_AB": True, "K_OA": True} not in models.assignments


def test_tom_cnf_has_two_projected_models(plant, plant_automaton, plant_policy):
    sets = spec_sets(plant_policy)
    constraint = build_constraint(plant_automaton, sets, plant.users["Tom"], C_TOM)
    result = solve_all(to_cnf(constraint), sorted(C_TOM), cap=50)
    assert len(result.assignments) == 2
    assert not result.truncated


def test_solve_all_basics():
    cnf = CnfFormula(clauses=((("x", True), ("y", True)),), credential_vars=("x", "y"))
    result = solve_all(cnf, ("x", "y"), cap=10)
    assert len(result.assignments) == 3
    unsat = CnfFormula(clauses=((("x", True),), (("x", False),)), credential_vars=("x",))
    assert solve_all(unsat, ("x",), cap=10).assignments == ()


def test_solve_all_caps_and_flags_truncation():
    cnf = CnfFormula(clauses=(), credential_vars=("a", "b", "c"))
    result = solve_all(cnf, ("a", "b", "c"), cap=5)
    assert len(result.assignments) == 5
    assert result.truncated


def test_repair_tom_current_matches_published_rows(plant, plant_policy):
    result = repair_user(plant, plant_policy, "Tom", eligibility="current")
    creds = [s.credentials for s in result.solutions]
    assert creds == [TOM_FIX_SMALL, TOM_FIX_LARGE]
    assert result.solutions[0].minimal
    assert not result.solutions[1].minimal
    assert [s.distance for s in result.solutions] == [2, 1]


def test_repair_amy_all_credentials(plant, plant_policy):
    result = repair_user(plant, plant_policy, "Amy", eligibility="all")
    solutions = [s.credentials for s in result.solutions]
    assert AMY_FIX in solutions
    assert all("c_IGSusr" in s for s in solutions)
    mandatory = frozenset({"K_OA", "c_PLCusr", "c_IGSadm", "c_IGSusr", "c_MBSLadm"})
    for sol in result.solutions:
        if sol.minimal:
            assert mandatory <= sol.credentials


def test_repair_solutions_reverify(plant, plant_policy):
    for uid in ("Tom", "Amy"):
        result = repair_user(plant, plant_policy, uid, eligibility="all")
        for sol in result.solutions:
            report = verify(plant.with_user_credentials(uid, sol.credentials), plant_policy)
            assert not [t for t in report.missing | report.forbidden if t[0] == uid]


def test_repair_of_conformant_user_returns_current_set_first(plant, plant_policy):
    repaired = plant.with_user_credentials("Tom", TOM_FIX_SMALL)
    result = repair_user(repaired, plant_policy, "Tom", eligibility="current")
    assert result.solutions[0].credentials == TOM_FIX_SMALL
    assert result.solutions[0].distance == 0


def test_repair_explicit_eligibility(plant, plant_policy):
    # Tom may never hold Amy's password: exclude it from the pool.
    pool = UNIVERSE - {"c_PCAmy"}
    result = repair_user(plant, plant_policy, "Tom", eligibility=pool)
    assert result.solutions
    assert all("c_PCAmy" not in s.credentials for s in result.solutions)
    with pytest.raises(ValueError):
        repair_user(plant, plant_policy, "Tom", eligibility=frozenset({"mystery"}))


def test_unsatisfiable_user_reports_blocking_triples(plant, plant_policy):
    policy = PolicySpec(
        roles={
            "r": Role(
                "r",
                allowed=frozenset({Permission("fly", "PLC"), Permission("run", "MBSL")}),
                users=frozenset({"Tom"}),
            )
        }
    )
    result = repair_user(plant, policy, "Tom", eligibility="all")
    assert result.solutions == ()
    assert result.blocking == (("Tom", "fly", "PLC"),)


def test_repair_all_covers_every_user(plant, plant_policy):
    results = repair_all(plant, plant_policy, eligibility="current")
    assert set(results) == {"Tom", "Amy"}
    assert results["Tom"].solutions
    assert results["Amy"].solutions == ()  # Amy cannot be fixed within her own credentials
    assert results["Amy"].blocking == (("Amy", "run", "IGS"),)


def test_repair_all_on_correct_system_has_distance_zero_first(plant, plant_policy):
    repaired = plant.with_user_credentials("Tom", TOM_FIX_SMALL).with_user_credentials(
        "Amy", AMY_FIX_MIN
    )
    results = repair_all(repaired, plant_policy, eligibility="current")
    for uid, result in results.items():
        assert result.solutions[0].distance == 0
        assert result.solutions[0].credentials == repaired.users[uid].credentials


def test_per_user_independence(plant, plant_policy):
    # Fixing Tom does not change Amy's verification outcome.
    before = verify(plant, plant_policy)
    after = verify(plant.with_user_credentials("Tom", TOM_FIX_SMALL), plant_policy)
    amy = lambda report: {t for t in report.missing | report.forbidden if t[0] == "Amy"}
    assert amy(before) == amy(after)


def test_minimal_flag_matches_brute_force(plant, plant_policy):
    result = repair_user(plant, plant_policy, "Amy", eligibility="all")
    solutions = {s.credentials for s in result.solutions}
    for sol in result.solutions:
        proper_subsets_solving = [
            other for other in solutions if other < sol.credentials
        ]
        assert sol.minimal == (not proper_subsets_solving)


def test_randomized_solver_equals_brute_force(plant, plant_automaton, plant_policy):
    tom = plant.users["Tom"]
    reduced = sorted({e.reduced() for e in plant_automaton.alphabet})
    rng = random.Random(99)
    done = 0
    while done < 15:
        plus = frozenset(rng.sample(reduced, rng.randint(0, 3)))
        minus = frozenset(rng.sample(reduced, rng.randint(0, 3)))
        if plus & minus:
            continue
        done += 1
        sets = SpecSets(
            s_plus=frozenset(("Tom", e.operation, e.object) for e in plus),
            s_minus=frozenset(("Tom", e.operation, e.object) for e in minus),
        )
        constraint = build_constraint(plant_automaton, sets, tom, UNIVERSE)
        expected = {c for c in powerset(UNIVERSE) if constraint.satisfied_by(c)}
        result = solve_all(to_cnf(constraint), sorted(UNIVERSE), cap=300)
        got = {
            frozenset(v for v, val in m.items() if val) for m in result.assignments
        }
        assert got == expected
