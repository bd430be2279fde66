"""Consistency checking and quarantine for constructed graphs.

Validation is graph closure over the schema profile, not a general DL
reasoner: the profile only needs reachability semantics (subclass
entailment, sub-property lifting, transitive chaining), and full
tableau reasoning is orders of magnitude slower for no added coverage
here. Violations are data; quarantine removes them under one of two
policies and iterates to a fixpoint so removals that expose new
violations are also handled.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .ontology import KnowledgeGraph, OntologyError, SchemaProfile, local_name


class RuleId(str, Enum):
    UNDECLARED_ENTITY = "undeclared_entity"
    RANGE_VIOLATION = "range_violation"
    DOMAIN_VIOLATION = "domain_violation"
    UNCATEGORIZED_CLASS = "uncategorized_class"
    MULTI_CATEGORY = "multi_category"
    PART_SHORTCUT = "part_shortcut"
    SUBCLASS_CYCLE = "subclass_cycle"


@dataclass(frozen=True)
class Violation:
    rule_id: RuleId
    subject: tuple
    explanation: str

    def to_json(self) -> dict:
        return {
            "rule_id": self.rule_id.value,
            "subject": list(self.subject),
            "explanation": self.explanation,
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple
    checked_axiom_count: int
    removed_axiom_count: int = 0
    elapsed: float = 0.0
    schema: Optional[SchemaProfile] = field(default=None, compare=False)

    def __post_init__(self):
        if self.removed_axiom_count > self.checked_axiom_count:
            raise ValueError("removed_axiom_count exceeds checked_axiom_count")

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_rule(self) -> dict:
        counts = defaultdict(int)
        for v in self.violations:
            counts[v.rule_id] += 1
        return dict(counts)

    def to_json(self) -> dict:
        # elapsed is wall-clock noise and stays out of artifacts
        counts = {rule.value: 0 for rule in RuleId}
        for v in self.violations:
            counts[v.rule_id.value] += 1
        return {
            "violations": [v.to_json() for v in self.violations],
            "summary": {
                "violation_count": len(self.violations),
                "checked_axiom_count": self.checked_axiom_count,
                "removed_axiom_count": self.removed_axiom_count,
                "by_rule": counts,
            },
        }


@dataclass(frozen=True)
class Removal:
    rule_id: RuleId
    kind: str  # "subclass" | "restriction" | "class"
    subject: tuple

    def to_json(self) -> dict:
        return {
            "rule_id": self.rule_id.value,
            "kind": self.kind,
            "subject": list(self.subject),
        }


# -- entailment -----------------------------------------------------------


def entailed_subclass(kg: KnowledgeGraph, sub: str, super_: str) -> bool:
    return kg.is_subclass_of(sub, super_)


def _lifts_to(kg: KnowledgeGraph, q: str, p: str) -> bool:
    """True iff q == p or q is a (transitive) sub-property of p."""
    cursor = q
    seen = set()
    while cursor is not None and cursor not in seen:
        if cursor == p:
            return True
        seen.add(cursor)
        prop = kg.properties.get(cursor)
        cursor = prop.sub_property_of if prop else None
    return False


def _lifted_edges(kg: KnowledgeGraph, p: str) -> set:
    eligible = {q for q in kg.properties if _lifts_to(kg, q, p)}
    return {(c, f) for (c, q, f) in kg.restrictions if q in eligible}


def entailed_property(kg: KnowledgeGraph, a: str, p: str, b: str) -> bool:
    """Derivability of (a, p, b) from restrictions under sub-property
    lifting, chained only when p itself is transitive. Sub-properties
    feed chains of their transitive parents but are never chained
    themselves."""
    for iri in (a, b):
        if iri not in kg.classes:
            raise OntologyError(f"undeclared class {iri!r}")
    prop = kg.properties.get(p)
    if prop is None:
        raise OntologyError(f"undeclared property {p!r}")
    edges = _lifted_edges(kg, p)
    if not prop.transitive:
        return (a, b) in edges
    adjacency = defaultdict(set)
    for c, f in edges:
        adjacency[c].add(f)
    seen = set()
    frontier = [a]
    while frontier:
        current = frontier.pop()
        for nxt in adjacency[current]:
            if nxt == b:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


# -- checking -------------------------------------------------------------


def _reach_reflexive(adjacency: dict, start: str) -> set:
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for nxt in adjacency[current]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _strongly_connected(nodes, adjacency) -> list:
    """Iterative Tarjan; returns SCCs as sorted tuples."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    components = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(adjacency[root])))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter[0]
                    counter[0] += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(adjacency[child]))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(tuple(sorted(component)))
    return components


def check(kg: KnowledgeGraph, schema: SchemaProfile) -> ValidationReport:
    """All seven rules over the graph; deterministic and side-effect-free."""
    start = time.perf_counter()
    violations = []
    declared = set(kg.classes)

    # undeclared_entity: axioms referencing missing classes or properties
    valid_subclass = []
    for a, b in sorted(kg.subclass_axioms):
        missing = [x for x in (a, b) if x not in declared]
        if missing:
            names = ", ".join(local_name(m) for m in missing)
            violations.append(
                Violation(
                    RuleId.UNDECLARED_ENTITY,
                    (a, b),
                    f"subclass axiom ({local_name(a)}, {local_name(b)}) "
                    f"references undeclared {names}",
                )
            )
        else:
            valid_subclass.append((a, b))
    valid_restrictions = []
    for c, p, f in sorted(kg.restrictions):
        missing = [x for x in (c, f) if x not in declared]
        if p not in kg.properties:
            missing.append(p)
        if missing:
            names = ", ".join(local_name(m) for m in missing)
            violations.append(
                Violation(
                    RuleId.UNDECLARED_ENTITY,
                    (c, p, f),
                    f"restriction ({local_name(c)}, {local_name(p)}, "
                    f"{local_name(f)}) references undeclared {names}",
                )
            )
        else:
            valid_restrictions.append((c, p, f))

    adjacency = defaultdict(set)
    for a, b in valid_subclass:
        adjacency[a].add(b)
    reach = {iri: _reach_reflexive(adjacency, iri) for iri in declared}

    # domain / range over evaluable restrictions
    for c, p, f in valid_restrictions:
        prop = kg.properties[p]
        label = prop.display()
        if prop.domain:
            satisfiable = [d for d in prop.domain if d in declared]
            if not any(d in reach[c] for d in satisfiable):
                allowed = " or ".join(local_name(d) for d in prop.domain)
                violations.append(
                    Violation(
                        RuleId.DOMAIN_VIOLATION,
                        (c, p, f),
                        f"{local_name(c)} {label} {local_name(f)}: "
                        f"{local_name(c)} is not a {allowed}",
                    )
                )
        if prop.range is not None and prop.range not in reach[f]:
            violations.append(
                Violation(
                    RuleId.RANGE_VIOLATION,
                    (c, p, f),
                    f"{local_name(c)} {label} {local_name(f)}: "
                    f"{local_name(f)} is not a {local_name(prop.range)}",
                )
            )

    # categorization rules apply to constructed classes, not the schema's
    # own scaffolding (Thing sits above every top class by design)
    schema_iris = schema.class_iris()
    for iri in sorted(declared - schema_iris):
        tops = reach[iri] & schema.top_classes
        if not tops:
            violations.append(
                Violation(
                    RuleId.UNCATEGORIZED_CLASS,
                    (iri,),
                    f"{local_name(iri)} reaches no top-level schema class",
                )
            )
        disjoint = reach[iri] & schema.disjoint_top_classes
        if len(disjoint) > 1:
            names = ", ".join(sorted(local_name(d) for d in disjoint))
            violations.append(
                Violation(
                    RuleId.MULTI_CATEGORY,
                    (iri,),
                    f"{local_name(iri)} is categorized under multiple "
                    f"disjoint classes: {names}",
                )
            )

    # part_shortcut: a direct edge duplicating a 2+-step chain of the
    # same direct-variant property
    for q_iri, q in sorted(kg.properties.items()):
        if q.transitive or q.sub_property_of is None:
            continue
        if not any(
            kg.properties[anc].transitive
            for anc in _ancestors(kg, q_iri)
            if anc in kg.properties
        ):
            continue
        q_edges = defaultdict(set)
        direct = []
        for c, p, f in valid_restrictions:
            if _lifts_to(kg, p, q_iri):
                q_edges[c].add(f)
                direct.append((c, p, f))
        for c, p, f in sorted(direct):
            if any(f in _reach_reflexive(q_edges, x) for x in q_edges[c] if x != f):
                violations.append(
                    Violation(
                        RuleId.PART_SHORTCUT,
                        (c, p, f),
                        f"{local_name(c)} {kg.properties[p].display()} "
                        f"{local_name(f)} shortcuts a longer "
                        f"{kg.properties[p].display()} chain",
                    )
                )

    # subclass cycles, one violation per strongly connected component
    self_loops = {a for a, b in valid_subclass if a == b}
    for component in _strongly_connected(sorted(declared), adjacency):
        if len(component) > 1 or component[0] in self_loops:
            names = ", ".join(local_name(m) for m in component)
            violations.append(
                Violation(
                    RuleId.SUBCLASS_CYCLE,
                    component,
                    f"subclass cycle through {names}",
                )
            )

    violations.sort(key=lambda v: (v.rule_id.value, v.subject))
    return ValidationReport(
        violations=tuple(violations),
        checked_axiom_count=len(kg.classes)
        + len(kg.subclass_axioms)
        + len(kg.restrictions),
        elapsed=time.perf_counter() - start,
        schema=schema,
    )


def _ancestors(kg: KnowledgeGraph, prop_iri: str) -> list:
    out = []
    cursor = kg.properties[prop_iri].sub_property_of
    seen = set()
    while cursor is not None and cursor not in seen:
        out.append(cursor)
        seen.add(cursor)
        prop = kg.properties.get(cursor)
        cursor = prop.sub_property_of if prop else None
    return out


# -- quarantine -----------------------------------------------------------

POLICIES = ("remove_axiom", "remove_entity")


def quarantine(kg: KnowledgeGraph, report: ValidationReport, policy: str = "remove_axiom"):
    """Remove violating axioms (or entities) and iterate to a fixpoint.

    Returns (cleaned kg, removal log). The input kg is never mutated.
    Under remove_axiom, categorization violations are left in place;
    under remove_entity the offending classes are dropped wholesale.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown quarantine policy {policy!r}")
    if report.schema is None:
        raise ValueError("report carries no schema; produce it with check()")
    cleaned = kg.copy()
    removals = []
    current = report
    while True:
        acted = False
        for violation in current.violations:
            if _apply_removal(cleaned, violation, policy, removals):
                acted = True
        if not acted:
            break
        current = check(cleaned, report.schema)
    return cleaned, removals


def _apply_removal(kg: KnowledgeGraph, violation: Violation, policy: str, log: list) -> bool:
    rule = violation.rule_id
    subject = violation.subject
    if rule == RuleId.UNDECLARED_ENTITY:
        if len(subject) == 2:
            return _drop_subclass(kg, rule, subject, log)
        return _drop_restriction(kg, rule, subject, log)
    if rule in (RuleId.RANGE_VIOLATION, RuleId.DOMAIN_VIOLATION, RuleId.PART_SHORTCUT):
        return _drop_restriction(kg, rule, subject, log)
    if rule == RuleId.SUBCLASS_CYCLE:
        members = set(subject)
        acted = False
        for a, b in sorted(kg.subclass_axioms):
            if a in members and b in members:
                acted = _drop_subclass(kg, rule, (a, b), log) or acted
        return acted
    if rule in (RuleId.UNCATEGORIZED_CLASS, RuleId.MULTI_CATEGORY):
        if policy != "remove_entity":
            return False
        iri = subject[0]
        if iri not in kg.classes:
            return False
        kg.remove_class(iri)
        log.append(Removal(rule, "class", (iri,)))
        return True
    return False


def _drop_subclass(kg: KnowledgeGraph, rule: RuleId, pair, log: list) -> bool:
    if tuple(pair) not in kg.subclass_axioms:
        return False
    kg.remove_subclass(*pair)
    log.append(Removal(rule, "subclass", tuple(pair)))
    return True


def _drop_restriction(kg: KnowledgeGraph, rule: RuleId, triple, log: list) -> bool:
    if tuple(triple) not in kg.restrictions:
        return False
    kg.remove_restriction(*triple)
    log.append(Removal(rule, "restriction", tuple(triple)))
    return True


def validate_and_clean(kg: KnowledgeGraph, schema: SchemaProfile, policy: str = "remove_axiom"):
    """check → quarantine → final check. The returned report lists the
    residual violations of the cleaned graph but counts checked axioms
    against the original graph, so removed ≤ checked by construction.
    Returns (cleaned kg, final report, removals)."""
    first = check(kg, schema)
    cleaned, removals = quarantine(kg, first, policy)
    residual = check(cleaned, schema)
    final = replace(
        residual,
        checked_axiom_count=first.checked_axiom_count,
        removed_axiom_count=len(removals),
    )
    return cleaned, final, removals
