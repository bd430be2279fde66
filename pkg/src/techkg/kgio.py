"""Graph serialization, view export, and coverage comparison.

The on-disk format is a Turtle subset covering exactly what the graph
model can hold: class and object-property declarations, labels and
alternate labels, subclass axioms, existential restrictions as
blank-node someValuesFrom patterns, property characteristics, and
annotation triples. Output is canonically ordered so identical graphs
serialize to identical bytes.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass

from .ontology import (
    ANNOTATION_NAMESPACE,
    DEFAULT_NAMESPACE,
    ClassInfo,
    KnowledgeGraph,
    ObjectProperty,
    local_name,
)

OWL = "http://www.w3.org/2002/07/owl#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
SKOS = "http://www.w3.org/2004/02/skos/core#"

RDF_TYPE = RDF + "type"
OWL_CLASS = OWL + "Class"
OWL_OBJECT_PROPERTY = OWL + "ObjectProperty"
OWL_TRANSITIVE = OWL + "TransitiveProperty"
OWL_RESTRICTION = OWL + "Restriction"
OWL_ON_PROPERTY = OWL + "onProperty"
OWL_SOME_VALUES = OWL + "someValuesFrom"
OWL_INVERSE_OF = OWL + "inverseOf"
RDFS_LABEL = RDFS + "label"
RDFS_SUBCLASS = RDFS + "subClassOf"
RDFS_SUBPROP = RDFS + "subPropertyOf"
RDFS_DOMAIN = RDFS + "domain"
RDFS_RANGE = RDFS + "range"
SKOS_ALT = SKOS + "altLabel"

_SAFE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# -- serialization --------------------------------------------------------


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            mapped = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}.get(
                text[i + 1]
            )
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


class _Writer:
    def __init__(self, kg: KnowledgeGraph):
        self.kg = kg
        self.prefixes = {
            "": kg.namespace,
            "ann": ANNOTATION_NAMESPACE,
            "owl": OWL,
            "rdf": RDF,
            "rdfs": RDFS,
            "skos": SKOS,
        }

    def ref(self, iri: str) -> str:
        for prefix, ns in self.prefixes.items():
            if iri.startswith(ns):
                rest = iri[len(ns):]
                if _SAFE_LOCAL.match(rest):
                    return f"{prefix}:{rest}"
        return f"<{iri}>"

    def block(self, subject: str, pairs: list) -> str:
        head = f"{self.ref(subject)} {pairs[0]}"
        rest = [f"    {pair}" for pair in pairs[1:]]
        return " ;\n".join([head] + rest) + " ."

    def class_pairs(self, iri: str, info: ClassInfo) -> list:
        pairs = ["rdf:type owl:Class"]
        for label in info.labels:
            pairs.append(f'rdfs:label "{_escape(label)}"')
        for syn in info.synonyms:
            pairs.append(f'skos:altLabel "{_escape(syn)}"')
        pairs.extend(self.axiom_pairs(iri))
        pairs.extend(self.annotation_pairs(iri))
        return pairs

    def axiom_pairs(self, iri: str) -> list:
        pairs = []
        for sup in sorted(s for c, s in self.kg.subclass_axioms if c == iri):
            pairs.append(f"rdfs:subClassOf {self.ref(sup)}")
        own = sorted(
            (r for r in self.kg.restrictions if r[0] == iri),
            key=lambda r: (r[1], r[2]),
        )
        for _, prop, filler in own:
            pairs.append(
                "rdfs:subClassOf [ rdf:type owl:Restriction ; "
                f"owl:onProperty {self.ref(prop)} ; "
                f"owl:someValuesFrom {self.ref(filler)} ]"
            )
        return pairs

    def property_pairs(self, prop: ObjectProperty) -> list:
        pairs = ["rdf:type owl:ObjectProperty"]
        if prop.transitive:
            pairs.append("rdf:type owl:TransitiveProperty")
        for label in prop.labels:
            pairs.append(f'rdfs:label "{_escape(label)}"')
        if prop.sub_property_of is not None:
            pairs.append(f"rdfs:subPropertyOf {self.ref(prop.sub_property_of)}")
        if prop.inverse_of is not None:
            pairs.append(f"owl:inverseOf {self.ref(prop.inverse_of)}")
        if prop.domain:
            # multiple objects encode any-of alternatives, not an
            # intersection as in full OWL semantics
            targets = ", ".join(self.ref(d) for d in prop.domain)
            pairs.append(f"rdfs:domain {targets}")
        if prop.range is not None:
            pairs.append(f"rdfs:range {self.ref(prop.range)}")
        pairs.extend(self.annotation_pairs(prop.iri))
        return pairs

    def annotation_pairs(self, iri: str) -> list:
        entries = self.kg.annotations.get(iri, {})
        pairs = []
        for key in sorted(entries):
            if not _SAFE_LOCAL.match(key):
                raise ValueError(f"annotation key {key!r} is not serializable")
            pairs.append(f'ann:{key} "{_escape(entries[key])}"')
        return pairs

    def orphan_pairs(self, iri: str) -> list:
        pairs = self.axiom_pairs(iri)
        pairs.extend(self.annotation_pairs(iri))
        return pairs


def serialize(kg: KnowledgeGraph) -> str:
    writer = _Writer(kg)
    lines = [
        f"@prefix {prefix}: <{ns}> ."
        for prefix, ns in sorted(writer.prefixes.items())
    ]
    blocks = []
    for iri in sorted(kg.classes):
        blocks.append(writer.block(iri, writer.class_pairs(iri, kg.classes[iri])))
    for iri in sorted(kg.properties):
        blocks.append(writer.block(iri, writer.property_pairs(kg.properties[iri])))
    declared = set(kg.classes) | set(kg.properties)
    orphans = (
        {c for c, _ in kg.subclass_axioms}
        | {c for c, _, _ in kg.restrictions}
        | set(kg.annotations)
    ) - declared
    for iri in sorted(orphans):
        pairs = writer.orphan_pairs(iri)
        if pairs:
            blocks.append(writer.block(iri, pairs))
    return "\n".join(lines) + "\n\n" + "\n\n".join(blocks) + ("\n" if blocks else "")


# -- parsing ---------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # iri | pname | string | punct | prefix_kw
    value: str
    line: int
    column: int


_PUNCT = {".", ";", ",", "[", "]"}
_PNAME_STOP = set(' \t\r\n;,[]<>"#')


def _tokenize(text: str):
    tokens = []
    line = 1
    col = 1
    i = 0
    length = len(text)

    def advance(steps):
        nonlocal i, line, col
        for _ in range(steps):
            if i < length and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < length:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "#":
            while i < length and text[i] != "\n":
                advance(1)
            continue
        start_line, start_col = line, col
        if ch == "<":
            end = text.find(">", i + 1)
            if end == -1:
                raise ParseError("unterminated IRI", start_line, start_col)
            value = text[i + 1 : end]
            advance(end - i + 1)
            tokens.append(_Token("iri", value, start_line, start_col))
            continue
        if ch == '"':
            j = i + 1
            while j < length:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            if j >= length:
                raise ParseError("unterminated string", start_line, start_col)
            raw = text[i + 1 : j]
            advance(j - i + 1)
            tokens.append(_Token("string", _unescape(raw), start_line, start_col))
            continue
        if ch in _PUNCT:
            advance(1)
            tokens.append(_Token("punct", ch, start_line, start_col))
            continue
        if ch == "@":
            j = i + 1
            while j < length and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word != "@prefix":
                raise ParseError(f"unknown directive {word!r}", start_line, start_col)
            advance(j - i)
            tokens.append(_Token("prefix_kw", word, start_line, start_col))
            continue
        j = i
        while j < length and text[j] not in _PNAME_STOP:
            j += 1
        value = text[i:j]
        advance(j - i)
        # a statement-terminating dot glued to a name is punctuation
        dots = 0
        while value.endswith("."):
            value = value[:-1]
            dots += 1
        if value:
            if ":" not in value and value != "a":
                raise ParseError(
                    f"unrecognized token {value!r}", start_line, start_col
                )
            tokens.append(_Token("pname", value, start_line, start_col))
        for _ in range(dots):
            tokens.append(_Token("punct", ".", start_line, start_col))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.prefixes = {}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        token = self.peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.column if last else 1
            raise ParseError("unexpected end of input", line, col)
        self.pos += 1
        return token

    def expect_punct(self, value):
        token = self.next()
        if token.kind != "punct" or token.value != value:
            raise ParseError(
                f"expected {value!r}, found {token.value!r}", token.line, token.column
            )
        return token

    def expand(self, token) -> str:
        if token.kind == "iri":
            return token.value
        if token.kind == "pname":
            if token.value == "a":
                return RDF_TYPE
            prefix, _, local = token.value.partition(":")
            if prefix not in self.prefixes:
                raise ParseError(
                    f"undeclared prefix {prefix + ':'!r}", token.line, token.column
                )
            return self.prefixes[prefix] + local
        raise ParseError(
            f"expected IRI or prefixed name, found {token.value!r}",
            token.line,
            token.column,
        )

    def parse_prefix(self):
        name_token = self.next()
        if name_token.kind != "pname" or not name_token.value.endswith(":"):
            raise ParseError(
                "expected prefix declaration name", name_token.line, name_token.column
            )
        iri_token = self.next()
        if iri_token.kind != "iri":
            raise ParseError(
                "expected IRI in prefix declaration", iri_token.line, iri_token.column
            )
        self.prefixes[name_token.value[:-1]] = iri_token.value
        self.expect_punct(".")

    def parse_object(self):
        token = self.peek()
        if token.kind == "string":
            self.next()
            return ("literal", token.value, token)
        if token.kind == "punct" and token.value == "[":
            return ("bnode", self.parse_bnode(), token)
        return ("iri", self.expand(self.next()), token)

    def parse_bnode(self):
        self.expect_punct("[")
        pairs = []
        while True:
            pred_token = self.next()
            if pred_token.kind == "punct" and pred_token.value == "]":
                break
            predicate = self.expand(pred_token)
            objects = [self.parse_object()]
            while self.peek() and self.peek().kind == "punct" and self.peek().value == ",":
                self.next()
                objects.append(self.parse_object())
            pairs.append((predicate, objects, pred_token))
            token = self.next()
            if token.kind == "punct" and token.value == "]":
                break
            if not (token.kind == "punct" and token.value == ";"):
                raise ParseError(
                    f"expected ';' or ']' in blank node, found {token.value!r}",
                    token.line,
                    token.column,
                )
        return pairs

    def parse_statement(self):
        subject_token = self.next()
        subject = self.expand(subject_token)
        pairs = []
        while True:
            pred_token = self.next()
            if pred_token.kind == "punct":
                if pred_token.value == ".":
                    break
                raise ParseError(
                    f"expected predicate, found {pred_token.value!r}",
                    pred_token.line,
                    pred_token.column,
                )
            predicate = self.expand(pred_token)
            objects = [self.parse_object()]
            while self.peek() and self.peek().kind == "punct" and self.peek().value == ",":
                self.next()
                objects.append(self.parse_object())
            pairs.append((predicate, objects, pred_token))
            token = self.next()
            if token.kind == "punct" and token.value == ".":
                break
            if not (token.kind == "punct" and token.value == ";"):
                raise ParseError(
                    f"expected ';' or '.', found {token.value!r}",
                    token.line,
                    token.column,
                )
        return subject, pairs


def _bnode_restriction(pairs, token):
    """Interpret a blank node as an existential restriction."""
    on_property = None
    filler = None
    for predicate, objects, pred_token in pairs:
        if predicate == RDF_TYPE:
            for kind, value, obj_token in objects:
                if kind != "iri" or value != OWL_RESTRICTION:
                    raise ParseError(
                        "blank node is not an owl:Restriction",
                        obj_token.line,
                        obj_token.column,
                    )
        elif predicate == OWL_ON_PROPERTY:
            kind, value, obj_token = objects[0]
            if kind != "iri":
                raise ParseError(
                    "owl:onProperty requires an IRI", obj_token.line, obj_token.column
                )
            on_property = value
        elif predicate == OWL_SOME_VALUES:
            kind, value, obj_token = objects[0]
            if kind != "iri":
                raise ParseError(
                    "owl:someValuesFrom requires an IRI",
                    obj_token.line,
                    obj_token.column,
                )
            filler = value
        else:
            raise ParseError(
                f"unknown construct in restriction: <{predicate}>",
                pred_token.line,
                pred_token.column,
            )
    if on_property is None or filler is None:
        raise ParseError(
            "restriction needs owl:onProperty and owl:someValuesFrom",
            token.line,
            token.column,
        )
    return on_property, filler


def parse(text: str) -> KnowledgeGraph:
    """Parse serialized graph text.

    Axioms are inserted unchecked: judging undeclared references or
    cycles in foreign files is the consistency checker's job, not the
    parser's.
    """
    parser = _Parser(_tokenize(text))
    statements = []
    while parser.peek() is not None:
        if parser.peek().kind == "prefix_kw":
            parser.next()
            parser.parse_prefix()
        else:
            statements.append(parser.parse_statement())

    kg = KnowledgeGraph(namespace=parser.prefixes.get("", DEFAULT_NAMESPACE))
    properties = {}

    for subject, pairs in statements:
        types = set()
        for predicate, objects, _ in pairs:
            if predicate == RDF_TYPE:
                for kind, value, obj_token in objects:
                    if kind != "iri":
                        raise ParseError(
                            "rdf:type requires an IRI", obj_token.line, obj_token.column
                        )
                    if value not in (OWL_CLASS, OWL_OBJECT_PROPERTY, OWL_TRANSITIVE):
                        raise ParseError(
                            f"unknown construct: rdf:type <{value}>",
                            obj_token.line,
                            obj_token.column,
                        )
                    types.add(value)
        if OWL_CLASS in types and OWL_OBJECT_PROPERTY in types:
            token = pairs[0][2]
            raise ParseError(
                f"<{subject}> typed as both class and property",
                token.line,
                token.column,
            )
        if OWL_OBJECT_PROPERTY in types or OWL_TRANSITIVE in types:
            _read_property(kg, properties, subject, pairs)
        else:
            _read_class_or_orphan(kg, subject, pairs, declare=OWL_CLASS in types)

    for iri, record in properties.items():
        kg.properties[iri] = ObjectProperty(
            iri=iri,
            labels=tuple(record["labels"]),
            transitive=record["transitive"],
            sub_property_of=record["sub"],
            inverse_of=record["inverse"],
            domain=tuple(record["domain"]),
            range=record["range"],
        )
    return kg


def _require_iri(objects, predicate):
    kind, value, token = objects[0]
    if kind != "iri":
        raise ParseError(
            f"<{predicate}> requires an IRI object", token.line, token.column
        )
    return value


def _require_literal(objects, predicate):
    kind, value, token = objects[0]
    if kind != "literal":
        raise ParseError(
            f"<{predicate}> requires a string literal", token.line, token.column
        )
    return value


def _read_property(kg, properties, subject, pairs):
    record = properties.setdefault(
        subject,
        {
            "labels": [],
            "transitive": False,
            "sub": None,
            "inverse": None,
            "domain": [],
            "range": None,
        },
    )
    for predicate, objects, pred_token in pairs:
        if predicate == RDF_TYPE:
            for _, value, _ in objects:
                if value == OWL_TRANSITIVE:
                    record["transitive"] = True
        elif predicate == RDFS_LABEL:
            record["labels"].append(_require_literal(objects, predicate))
        elif predicate == RDFS_SUBPROP:
            record["sub"] = _require_iri(objects, predicate)
        elif predicate == OWL_INVERSE_OF:
            record["inverse"] = _require_iri(objects, predicate)
        elif predicate == RDFS_DOMAIN:
            for kind, value, token in objects:
                if kind != "iri":
                    raise ParseError(
                        "rdfs:domain requires IRIs", token.line, token.column
                    )
                record["domain"].append(value)
        elif predicate == RDFS_RANGE:
            record["range"] = _require_iri(objects, predicate)
        elif predicate.startswith(ANNOTATION_NAMESPACE):
            kg.annotate(
                subject,
                predicate[len(ANNOTATION_NAMESPACE):],
                _require_literal(objects, predicate),
            )
        else:
            raise ParseError(
                f"unknown construct: <{predicate}>",
                pred_token.line,
                pred_token.column,
            )


def _read_class_or_orphan(kg, subject, pairs, declare):
    labels = []
    synonyms = []
    for predicate, objects, pred_token in pairs:
        if predicate == RDF_TYPE:
            continue
        if predicate == RDFS_LABEL:
            labels.append(_require_literal(objects, predicate))
        elif predicate == SKOS_ALT:
            synonyms.append(_require_literal(objects, predicate))
        elif predicate == RDFS_SUBCLASS:
            for kind, value, token in objects:
                if kind == "iri":
                    kg.insert_subclass_unchecked(subject, value)
                elif kind == "bnode":
                    prop, filler = _bnode_restriction(value, token)
                    kg.insert_restriction_unchecked(subject, prop, filler)
                else:
                    raise ParseError(
                        "rdfs:subClassOf requires an IRI or restriction",
                        token.line,
                        token.column,
                    )
        elif predicate.startswith(ANNOTATION_NAMESPACE):
            kg.annotate(
                subject,
                predicate[len(ANNOTATION_NAMESPACE):],
                _require_literal(objects, predicate),
            )
        else:
            raise ParseError(
                f"unknown construct: <{predicate}>",
                pred_token.line,
                pred_token.column,
            )
    if declare or labels or synonyms:
        info = kg.classes.setdefault(subject, ClassInfo())
        for label in labels:
            if label not in info.labels:
                info.labels.append(label)
        for syn in synonyms:
            if syn not in info.synonyms and syn not in info.labels:
                info.synonyms.append(syn)


# -- view export -------------------------------------------------------------


def export_view_json(kg: KnowledgeGraph) -> dict:
    nodes = [
        {"id": iri, "label": kg.classes[iri].display(iri)}
        for iri in sorted(kg.classes)
    ]
    edges = [
        {"source": sub, "target": sup, "label": "subclass of"}
        for sub, sup in sorted(kg.subclass_axioms)
    ]
    for c, p, f in sorted(kg.restrictions):
        prop = kg.properties.get(p)
        edges.append(
            {
                "source": c,
                "target": f,
                "label": prop.display() if prop else local_name(p),
            }
        )
    return {"nodes": nodes, "edges": edges}


# -- coverage comparison ------------------------------------------------------


@dataclass(frozen=True)
class CoverageReport:
    shared: int
    only_in_ours: int
    only_in_theirs: int
    relation_counts: dict
    examples: dict

    def to_json(self) -> dict:
        return {
            "shared": self.shared,
            "only_in_ours": self.only_in_ours,
            "only_in_theirs": self.only_in_theirs,
            "relation_counts": self.relation_counts,
            "examples": self.examples,
        }


EXAMPLE_CAP = 10


def _normalize_label(label: str) -> str:
    return re.sub(r"\s+", " ", label.strip().casefold())


def _plural_fold(labels_by_side):
    """Map plural forms onto singulars when the singular exists on
    either side; anything smarter than final-s stripping is out of
    scope here."""
    union = set().union(*labels_by_side)
    mapping = {}
    for label in union:
        if label.endswith("s") and label[:-1] in union:
            mapping[label] = label[:-1]
    return [
        {mapping.get(label, label) for label in side} for side in labels_by_side
    ]


def compare_coverage(kg: KnowledgeGraph, external: dict) -> CoverageReport:
    if not isinstance(external, dict) or not isinstance(external.get("nodes"), list):
        raise ValueError("malformed external dump: expected {nodes: [...], edges: [...]}")
    theirs_labels = set()
    for node in external["nodes"]:
        if not isinstance(node, dict) or not isinstance(node.get("label"), str):
            raise ValueError(f"malformed external dump: bad node {node!r}")
        theirs_labels.add(_normalize_label(node["label"]))
    edges = external.get("edges", [])
    if not isinstance(edges, list):
        raise ValueError("malformed external dump: edges must be a list")
    theirs_relations = defaultdict(int)
    for edge in edges:
        if not isinstance(edge, dict):
            raise ValueError(f"malformed external dump: bad edge {edge!r}")
        label = edge.get("label") or edge.get("relation") or edge.get("property")
        theirs_relations[_normalize_label(str(label)) if label else "unlabeled"] += 1

    ours_labels = {
        _normalize_label(info.display(iri)) for iri, info in kg.classes.items()
    }
    ours_folded, theirs_folded = _plural_fold([ours_labels, theirs_labels])

    ours_relations = defaultdict(int)
    for _, p, _ in kg.restrictions:
        prop = kg.properties.get(p)
        ours_relations[prop.display() if prop else local_name(p)] += 1
    if kg.subclass_axioms:
        ours_relations["subclass of"] = len(kg.subclass_axioms)

    shared = ours_folded & theirs_folded
    only_ours = ours_folded - theirs_folded
    only_theirs = theirs_folded - ours_folded
    return CoverageReport(
        shared=len(shared),
        only_in_ours=len(only_ours),
        only_in_theirs=len(only_theirs),
        relation_counts={
            "ours": dict(sorted(ours_relations.items())),
            "theirs": dict(sorted(theirs_relations.items())),
        },
        examples={
            "only_in_ours": sorted(only_ours)[:EXAMPLE_CAP],
            "only_in_theirs": sorted(only_theirs)[:EXAMPLE_CAP],
        },
    )
