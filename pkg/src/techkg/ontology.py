"""Knowledge-graph data model and the two built-in schema profiles.

The graph is a TBox: classes, subclass axioms, object properties, and
existential restrictions (class SubClassOf property SOME filler). Two
profiles ship with the package: a cyber-physical-systems schema
(systems, components, functions and part-of discipline) and an
innovation-planning schema whose relation vocabulary drives the
extraction prompts.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Optional

DEFAULT_NAMESPACE = "http://techkg.local/onto#"
ANNOTATION_NAMESPACE = "http://techkg.local/ann#"

_SLUG_RE = re.compile(r"[^\w]+", re.UNICODE)


def iri_for_label(label: str, namespace: str = DEFAULT_NAMESPACE) -> str:
    """Stable, readable IRI: lowercased label with runs of punctuation
    and whitespace collapsed to underscores."""
    slug = _SLUG_RE.sub("_", label.strip().casefold()).strip("_")
    slug = re.sub(r"_+", "_", slug)
    if not slug:
        raise ValueError(f"label {label!r} yields an empty IRI slug")
    return namespace + slug


def local_name(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri:
            return iri.rsplit(sep, 1)[1]
    return iri


@dataclass(frozen=True)
class ObjectProperty:
    iri: str
    labels: tuple = ()
    transitive: bool = False
    sub_property_of: Optional[str] = None
    inverse_of: Optional[str] = None
    domain: tuple = ()  # any-of alternatives; empty means unconstrained
    range: Optional[str] = None

    def display(self) -> str:
        return self.labels[0] if self.labels else local_name(self.iri)


@dataclass
class ClassInfo:
    labels: list = field(default_factory=list)
    synonyms: list = field(default_factory=list)

    def display(self, iri: str) -> str:
        return self.labels[0] if self.labels else local_name(iri)


class OntologyError(ValueError):
    pass


class KnowledgeGraph:
    """Mutable TBox with invariant-preserving mutation operations.

    Readers may share an instance; mutations take the internal lock.
    Parsing untrusted input uses the unchecked insertion paths so the
    consistency checker can report problems instead of the constructor
    refusing them.
    """

    def __init__(self, namespace: str = DEFAULT_NAMESPACE):
        self.namespace = namespace
        self.classes: dict = {}
        self.subclass_axioms: set = set()
        self.properties: dict = {}
        self.restrictions: set = set()
        self.annotations: dict = {}
        self._lock = threading.RLock()

    # -- queries ---------------------------------------------------

    def has_class(self, iri: str) -> bool:
        return iri in self.classes

    def supers_of(self, iri: str) -> set:
        return {sup for sub, sup in self.subclass_axioms if sub == iri}

    def is_subclass_of(self, sub: str, super_: str) -> bool:
        """Reflexive-transitive reachability over declared axioms."""
        if sub not in self.classes:
            raise OntologyError(f"undeclared class {sub!r}")
        if super_ not in self.classes:
            raise OntologyError(f"undeclared class {super_!r}")
        if sub == super_:
            return True
        seen = {sub}
        frontier = [sub]
        while frontier:
            current = frontier.pop()
            for nxt in self.supers_of(current):
                if nxt == super_:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return False

    def reachable_supers(self, iri: str) -> set:
        """All classes reachable upward, excluding iri itself unless cyclic."""
        seen = set()
        frontier = [iri]
        while frontier:
            current = frontier.pop()
            for nxt in self.supers_of(current):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    def class_display(self, iri: str) -> str:
        return self.classes[iri].display(iri)

    # -- mutations -------------------------------------------------

    def add_class(self, iri: str, labels=(), synonyms=()):
        """Declare a class; re-declaration merges labels and synonyms."""
        _check_iri(iri)
        with self._lock:
            info = self.classes.get(iri)
            if info is None:
                info = ClassInfo()
                self.classes[iri] = info
            for label in labels:
                if label and label not in info.labels:
                    info.labels.append(label)
            for syn in synonyms:
                if syn and syn not in info.synonyms and syn not in info.labels:
                    info.synonyms.append(syn)

    def add_property(self, prop: ObjectProperty):
        _check_iri(prop.iri)
        with self._lock:
            if prop.sub_property_of is not None:
                if prop.sub_property_of not in self.properties:
                    raise OntologyError(
                        f"sub-property target {prop.sub_property_of!r} "
                        f"of {prop.iri!r} is undeclared"
                    )
                # walk up to reject sub-property cycles
                cursor = prop.sub_property_of
                while cursor is not None:
                    if cursor == prop.iri:
                        raise OntologyError(
                            f"sub-property cycle through {prop.iri!r}"
                        )
                    cursor = self.properties[cursor].sub_property_of
            existing = self.properties.get(prop.iri)
            if existing is not None and existing != prop:
                raise OntologyError(
                    f"property {prop.iri!r} already declared differently"
                )
            self.properties[prop.iri] = prop

    def add_subclass(self, sub: str, super_: str):
        """Insert sub SubClassOf super; cycle-creating inserts rejected."""
        with self._lock:
            self._require_class(sub)
            self._require_class(super_)
            if (sub, super_) in self.subclass_axioms:
                return
            if sub == super_ or self.is_subclass_of(super_, sub):
                raise OntologyError(
                    f"subclass axiom ({local_name(sub)}, {local_name(super_)}) "
                    f"would create a cycle"
                )
            self.subclass_axioms.add((sub, super_))

    def add_restriction(self, cls: str, prop: str, filler: str):
        with self._lock:
            self._require_class(cls)
            self._require_class(filler)
            if prop not in self.properties:
                raise OntologyError(f"undeclared property {prop!r}")
            self.restrictions.add((cls, prop, filler))

    def annotate(self, entity: str, key: str, value: str):
        with self._lock:
            self.annotations.setdefault(entity, {})[key] = value

    # unchecked paths exist for deserialization: the checker, not the
    # parser, is responsible for judging foreign data
    def insert_subclass_unchecked(self, sub: str, super_: str):
        self.subclass_axioms.add((sub, super_))

    def insert_restriction_unchecked(self, cls: str, prop: str, filler: str):
        self.restrictions.add((cls, prop, filler))

    def remove_subclass(self, sub: str, super_: str):
        with self._lock:
            self.subclass_axioms.discard((sub, super_))

    def remove_restriction(self, cls: str, prop: str, filler: str):
        with self._lock:
            self.restrictions.discard((cls, prop, filler))

    def remove_class(self, iri: str):
        """Drop a class and every axiom touching it."""
        with self._lock:
            self.classes.pop(iri, None)
            self.subclass_axioms = {
                (a, b) for a, b in self.subclass_axioms if iri not in (a, b)
            }
            self.restrictions = {
                (c, p, f) for c, p, f in self.restrictions if iri not in (c, f)
            }
            self.annotations.pop(iri, None)

    def _require_class(self, iri: str):
        if iri not in self.classes:
            raise OntologyError(f"undeclared class {iri!r}")

    # -- bookkeeping ----------------------------------------------

    def copy(self) -> "KnowledgeGraph":
        other = KnowledgeGraph(self.namespace)
        other.classes = {
            iri: ClassInfo(list(info.labels), list(info.synonyms))
            for iri, info in self.classes.items()
        }
        other.subclass_axioms = set(self.subclass_axioms)
        other.properties = dict(self.properties)
        other.restrictions = set(self.restrictions)
        other.annotations = {k: dict(v) for k, v in self.annotations.items()}
        return other

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            {i: (tuple(c.labels), tuple(c.synonyms)) for i, c in self.classes.items()}
            == {i: (tuple(c.labels), tuple(c.synonyms)) for i, c in other.classes.items()}
            and self.subclass_axioms == other.subclass_axioms
            and self.properties == other.properties
            and self.restrictions == other.restrictions
            and self.annotations == other.annotations
        )

    def stats(self) -> dict:
        """Counts under the fixed axiom-counting rule.

        axiom_count = class declarations + property declarations
        + subclass axioms + restrictions + one per property
        characteristic (transitive, sub-property-of, inverse-of,
        domain, range). Annotations are not axioms.
        """
        characteristic = 0
        for prop in self.properties.values():
            characteristic += int(prop.transitive)
            characteristic += int(prop.sub_property_of is not None)
            characteristic += int(prop.inverse_of is not None)
            characteristic += int(bool(prop.domain))
            characteristic += int(prop.range is not None)
        return {
            "axiom_count": len(self.classes)
            + len(self.properties)
            + len(self.subclass_axioms)
            + len(self.restrictions)
            + characteristic,
            "class_count": len(self.classes),
            "object_property_count": len(self.properties),
        }


def _check_iri(iri: str):
    if not iri or any(ch.isspace() for ch in iri):
        raise OntologyError(f"malformed IRI {iri!r}")


def kg_stats(kg: KnowledgeGraph) -> dict:
    return kg.stats()


@dataclass(frozen=True)
class VocabRelation:
    """One line of the extraction vocabulary.

    display is the literal prompt line; head/tail name the schema
    classes the relation connects and property_iri the object property
    a validated triple materializes as.
    """

    head_class: str
    label: str
    tail_class: str
    property_iri: str
    display: str


@dataclass(frozen=True)
class SchemaProfile:
    name: str
    namespace: str
    class_defs: tuple  # (iri, label) pairs
    subclass_defs: tuple  # (sub, super) pairs
    properties: tuple  # ObjectProperty values
    vocabulary: tuple  # VocabRelation values
    top_classes: frozenset
    disjoint_top_classes: frozenset

    def class_iris(self) -> frozenset:
        return frozenset(iri for iri, _ in self.class_defs)

    def class_by_name(self, name: str) -> Optional[str]:
        """Resolve a class by label or local name, case-insensitively."""
        needle = re.sub(r"\s+", " ", name.strip().casefold())
        for iri, label in self.class_defs:
            if needle == label.casefold() or needle == local_name(iri).replace(
                "_", " "
            ):
                return iri
        return None

    def relation_property(self, label: str) -> Optional[str]:
        needle = _normalize_relation(label)
        for rel in self.vocabulary:
            if _normalize_relation(rel.label) == needle:
                return rel.property_iri
        return None

    def materialize(self, kg: Optional[KnowledgeGraph] = None) -> KnowledgeGraph:
        """Load the profile's classes, hierarchy, and properties into a kg."""
        if kg is None:
            kg = KnowledgeGraph(self.namespace)
        for iri, label in self.class_defs:
            kg.add_class(iri, labels=[label])
        for sub, super_ in self.subclass_defs:
            kg.add_subclass(sub, super_)
        for prop in self.properties:
            kg.add_property(prop)
        return kg


def _normalize_relation(label: str) -> str:
    return re.sub(r"\s+", " ", label.strip().casefold())


def _ns(namespace: str, name: str) -> str:
    return namespace + name


def gbo_lite(namespace: str = DEFAULT_NAMESPACE) -> SchemaProfile:
    """Cyber-physical-systems profile: systems, components, functions,
    and the part-of discipline with direct/transitive variants."""
    n = lambda name: _ns(namespace, name)
    classes = (
        (n("thing"), "Thing"),
        (n("system"), "System"),
        (n("component"), "Component"),
        (n("hardware_component"), "HardwareComponent"),
        (n("software_component"), "SoftwareComponent"),
        (n("function"), "Function"),
        (n("technology"), "Technology"),
        (n("method"), "Method"),
        (n("property"), "Property"),
    )
    subclasses = (
        (n("system"), n("thing")),
        (n("component"), n("thing")),
        (n("hardware_component"), n("component")),
        (n("software_component"), n("component")),
        (n("function"), n("thing")),
        (n("technology"), n("thing")),
        (n("method"), n("thing")),
        (n("property"), n("thing")),
    )
    properties = (
        ObjectProperty(n("has_part"), labels=("has part",), transitive=True),
        ObjectProperty(
            n("has_part_directly"),
            labels=("has part directly",),
            transitive=False,
            sub_property_of=n("has_part"),
        ),
        ObjectProperty(
            n("part_of"),
            labels=("part of",),
            transitive=True,
            inverse_of=n("has_part"),
        ),
        ObjectProperty(
            n("part_of_directly"),
            labels=("part of directly",),
            transitive=False,
            sub_property_of=n("part_of"),
            inverse_of=n("has_part_directly"),
        ),
        ObjectProperty(
            n("implements"),
            labels=("implements",),
            domain=(n("system"), n("component")),
            range=n("function"),
        ),
        ObjectProperty(
            n("implemented_by"),
            labels=("implemented by",),
            inverse_of=n("implements"),
            domain=(n("function"),),
        ),
    )
    vocab = []
    for head, label, tail, prop in (
        ("system", "has part directly", "component", "has_part_directly"),
        ("component", "has part directly", "component", "has_part_directly"),
        ("component", "part of directly", "system", "part_of_directly"),
        ("system", "implements", "function", "implements"),
        ("component", "implements", "function", "implements"),
        ("function", "implemented by", "component", "implemented_by"),
    ):
        vocab.append(
            VocabRelation(
                head_class=n(head),
                label=label,
                tail_class=n(tail),
                property_iri=n(prop),
                display=f"{head.replace('_', ' ')} -> {label} -> {tail.replace('_', ' ')}",
            )
        )
    return SchemaProfile(
        name="gbo_lite",
        namespace=namespace,
        class_defs=classes,
        subclass_defs=subclasses,
        properties=properties,
        vocabulary=tuple(vocab),
        top_classes=frozenset(
            n(x)
            for x in ("system", "component", "function", "technology", "method", "property")
        ),
        disjoint_top_classes=frozenset(
            n(x) for x in ("system", "component", "function", "technology", "method")
        ),
    )


def innovation_schema(namespace: str = DEFAULT_NAMESPACE) -> SchemaProfile:
    """Innovation-planning profile; its vocabulary is rendered verbatim
    into the phase-1 extraction prompt."""
    n = lambda name: _ns(namespace, name)
    class_names = (
        ("innovator", "Innovator"),
        ("innovation", "Innovation"),
        ("development_stage", "DevelopmentStage"),
        ("need", "Need"),
        ("problem", "Problem"),
        ("symptom", "Symptom"),
        ("disruption", "Disruption"),
        ("benefit", "Benefit"),
        ("improvement", "Improvement"),
        ("embodiment", "Embodiment"),
        ("usage", "Usage"),
    )
    classes = tuple((n(slug), label) for slug, label in class_names)
    # (head, label, tail, property, display line) — display strings are
    # the exact prompt lines, including the plural "benefits" tail
    lines = (
        ("innovator", "has developed", "innovation", "has_developed",
         "innovator -> has developed -> innovation"),
        ("innovation", "has development stage", "development_stage",
         "has_development_stage",
         "innovation -> has development stage -> development stage"),
        ("innovation", "fulfills", "need", "fulfills",
         "innovation -> fulfills -> need"),
        ("innovation", "solves", "problem", "solves",
         "innovation -> solves -> problem"),
        ("problem", "has symptom", "symptom", "has_symptom",
         "problem -> has symptom -> symptom"),
        ("innovation", "causes disruption", "disruption", "causes_disruption",
         "innovation -> causes disruption -> disruption"),
        ("innovation", "has benefit", "benefit", "has_benefit",
         "innovation -> has benefit -> benefits"),
        ("innovation", "has improvement", "improvement", "has_improvement",
         "innovation -> has improvement -> improvement"),
        ("innovation", "embodied by", "embodiment", "embodied_by",
         "innovation -> embodied by -> embodiment"),
        ("embodiment", "has usage", "usage", "has_usage",
         "embodiment -> has usage -> usage"),
    )
    properties = tuple(
        ObjectProperty(
            n(prop),
            labels=(label,),
            domain=(n(head),),
            range=n(tail),
        )
        for head, label, tail, prop, _ in lines
    )
    vocab = tuple(
        VocabRelation(
            head_class=n(head),
            label=label,
            tail_class=n(tail),
            property_iri=n(prop),
            display=display,
        )
        for head, label, tail, prop, display in lines
    )
    return SchemaProfile(
        name="innovation",
        namespace=namespace,
        class_defs=classes,
        subclass_defs=(),
        properties=properties,
        vocabulary=vocab,
        top_classes=frozenset(iri for iri, _ in classes),
        disjoint_top_classes=frozenset(),
    )


_BUILTIN_PROFILES = {"gbo_lite": gbo_lite, "innovation": innovation_schema}


def load_profile(name: str, namespace: str = DEFAULT_NAMESPACE) -> SchemaProfile:
    try:
        return _BUILTIN_PROFILES[name](namespace)
    except KeyError:
        raise ValueError(
            f"unknown schema profile {name!r}; "
            f"available: {sorted(_BUILTIN_PROFILES)}"
        ) from None


def profile_from_json(obj: dict) -> SchemaProfile:
    """Build a profile from its declarative JSON form (see profile_to_json)."""
    namespace = obj.get("namespace", DEFAULT_NAMESPACE)
    classes = tuple((c["iri"], c["label"]) for c in obj["classes"])
    subclasses = tuple((s["sub"], s["super"]) for s in obj.get("subclasses", []))
    properties = tuple(
        ObjectProperty(
            iri=p["iri"],
            labels=tuple(p.get("labels", [])),
            transitive=p.get("transitive", False),
            sub_property_of=p.get("sub_property_of"),
            inverse_of=p.get("inverse_of"),
            domain=tuple(p.get("domain", [])),
            range=p.get("range"),
        )
        for p in obj.get("properties", [])
    )
    vocabulary = tuple(
        VocabRelation(
            head_class=v["head_class"],
            label=v["label"],
            tail_class=v["tail_class"],
            property_iri=v["property"],
            display=v.get(
                "display",
                f"{local_name(v['head_class']).replace('_', ' ')} -> "
                f"{v['label']} -> {local_name(v['tail_class']).replace('_', ' ')}",
            ),
        )
        for v in obj.get("vocabulary", [])
    )
    profile = SchemaProfile(
        name=obj["name"],
        namespace=namespace,
        class_defs=classes,
        subclass_defs=subclasses,
        properties=properties,
        vocabulary=vocabulary,
        top_classes=frozenset(obj.get("top_classes", [])),
        disjoint_top_classes=frozenset(obj.get("disjoint_top_classes", [])),
    )
    declared = profile.class_iris()
    prop_iris = {p.iri for p in properties}
    for rel in vocabulary:
        if rel.head_class not in declared or rel.tail_class not in declared:
            raise ValueError(f"vocabulary line {rel.display!r} references undeclared class")
        if rel.property_iri not in prop_iris:
            raise ValueError(f"vocabulary line {rel.display!r} references undeclared property")
    return profile


def profile_to_json(profile: SchemaProfile) -> dict:
    return {
        "name": profile.name,
        "namespace": profile.namespace,
        "classes": [
            {"iri": iri, "label": label} for iri, label in profile.class_defs
        ],
        "subclasses": [
            {"sub": sub, "super": sup} for sub, sup in profile.subclass_defs
        ],
        "properties": [
            {
                "iri": p.iri,
                "labels": list(p.labels),
                "transitive": p.transitive,
                "sub_property_of": p.sub_property_of,
                "inverse_of": p.inverse_of,
                "domain": list(p.domain),
                "range": p.range,
            }
            for p in profile.properties
        ],
        "vocabulary": [
            {
                "head_class": v.head_class,
                "label": v.label,
                "tail_class": v.tail_class,
                "property": v.property_iri,
                "display": v.display,
            }
            for v in profile.vocabulary
        ],
        "top_classes": sorted(profile.top_classes),
        "disjoint_top_classes": sorted(profile.disjoint_top_classes),
    }
