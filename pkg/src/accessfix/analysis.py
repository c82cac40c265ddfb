"""Policy implementation verification.

Compares what the policy grants or forbids with what users can actually do:
`missing` are allowed actions the system does not enable, `forbidden` are
denied actions the system enables anyway.  A policy triple whose action
exists nowhere in the system cannot be fixed by credentials and is reported
separately as dangling rather than counted as missing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import (
    Automaton,
    ReducedEvent,
    build_user_automaton,
    reachable_reduced_events,
    _reachability_automaton,
    _require_valid,
)
from .enabling import BoolExpr, enabling_functions
from .policy import PolicyError, PolicySpec, SpecSets, Triple, spec_sets, validate_policy
from .sysmodel import SystemModel, User

STRATEGIES = ("enabling", "automaton")


@dataclass(frozen=True)
class ImplementationSet:
    """Actions a user can perform, as (user, operation, object) triples."""

    triples: frozenset[Triple] = frozenset()


@dataclass(frozen=True)
class AnomalyReport:
    missing: frozenset[Triple] = frozenset()
    forbidden: frozenset[Triple] = frozenset()
    dangling: frozenset[Triple] = frozenset()

    @property
    def verdict(self) -> str:
        return "correct" if not self.missing and not self.forbidden else "anomalous"


def _zone_automaton(model: SystemModel, zone: str) -> Automaton:
    """All-credential reachability automaton started in the given zone."""
    return _reachability_automaton(model, zone, None)


def implementation_set(
    model: SystemModel,
    user: User | str,
    strategy: str = "enabling",
    *,
    functions: dict[ReducedEvent, BoolExpr] | None = None,
) -> ImplementationSet:
    """Reachable actions for one user.

    The `automaton` strategy walks the user's own automaton; the default
    `enabling` strategy evaluates the all-credential enabling functions
    under the user's credentials.  The two must agree; keeping both gives a
    built-in cross-check.  Precomputed `functions` may be supplied to avoid
    rebuilding them per user.
    """
    _require_valid(model)
    if isinstance(user, str):
        user = model.users[user]
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy '{strategy}'")
    if strategy == "automaton":
        events = reachable_reduced_events(build_user_automaton(model, user))
    else:
        if functions is None:
            functions = enabling_functions(_zone_automaton(model, user.initial_zone))
        events = {r for r, expr in functions.items() if expr.evaluate(user.credentials)}
    return ImplementationSet(frozenset((user.id, r.operation, r.object) for r in events))


def diff(spec: SpecSets, impl: ImplementationSet) -> AnomalyReport:
    """Set difference of specification against implementation."""
    return AnomalyReport(
        missing=spec.s_plus - impl.triples,
        forbidden=spec.s_minus & impl.triples,
    )


def verify(model: SystemModel, policy: PolicySpec, *, strategy: str = "enabling") -> AnomalyReport:
    """Full pipeline: flatten the policy, compute every user's actions, compare."""
    problems = [d for d in validate_policy(policy) if d.severity == "error"]
    if problems:
        raise PolicyError("policy does not validate: " + "; ".join(str(d) for d in problems))
    _require_valid(model)
    sets = spec_sets(policy)

    functions_by_zone: dict[str, dict[ReducedEvent, BoolExpr]] = {}
    known_by_zone: dict[str, frozenset[ReducedEvent]] = {}
    triples: set[Triple] = set()
    for user in sorted(model.users.values(), key=lambda u: u.id):
        zone = user.initial_zone
        if zone not in functions_by_zone:
            automaton = _zone_automaton(model, zone)
            functions_by_zone[zone] = enabling_functions(automaton)
            known_by_zone[zone] = reachable_reduced_events(automaton)
        triples |= implementation_set(
            model, user, strategy, functions=functions_by_zone[zone]
        ).triples

    report = diff(sets, ImplementationSet(frozenset(triples)))
    dangling = set()
    for triple in report.missing:
        uid, op, ob = triple
        user = model.users.get(uid)
        known = known_by_zone.get(user.initial_zone, frozenset()) if user else frozenset()
        if ReducedEvent(op, ob) not in known:
            dangling.add(triple)
    return AnomalyReport(
        missing=report.missing - dangling,
        forbidden=report.forbidden,
        dangling=frozenset(dangling),
    )
