"""RDF terms and Turtle I/O for the emitted documents.

The writer produces byte-deterministic output: a fixed prefix block,
subject groups joined with ``;`` continuations, ``a`` for rdf:type, and a
stable predicate order. The parser covers exactly the Turtle subset the
writer emits (prefix declarations, prefixed names, ``<IRI>`` references,
quoted literals with escapes and an optional ``^^`` datatype) and is used
to reload emitted documents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import TurtleError

# Prefix table used by every emitted document (11 core bindings plus dbo).
PREFIXES: dict[str, str] = {
    "dbo": "http://dbpedia.org/ontology/",
    "dcterms": "http://purl.org/dc/terms/",
    "geo": "http://www.opengis.net/ont/geosparql#",
    "osmn": "https://www.openstreetmap.org/node/",
    "owl": "http://www.w3.org/2002/07/owl#",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "sf": "http://www.opengis.net/ont/sf#",
    "uom": "http://www.opengis.net/def/uom/OGC/1.0/",
    "wd": "http://www.wikidata.org/wiki/",
    "wkg": "http://www.worldkg.org/resource/",
    "wkgs": "http://www.worldkg.org/schema/",
}

RDF_TYPE = PREFIXES["rdf"] + "type"


@dataclass(frozen=True)
class Literal:
    """A string literal with an optional datatype.

    On the writer side ``datatype`` is a prefixed name (e.g.
    ``geo:wktLiteral``); the parser returns it expanded to a full IRI.
    """

    text: str
    datatype: str | None = None


class Triple(NamedTuple):
    subject: str
    predicate: str
    obj: str | Literal


_CURIE_RE = re.compile(r"^([A-Za-z][\w-]*):([\w-]+)$")
# Characters forbidden inside <...> IRI references.
_BAD_IRI_CHARS = re.compile(r'[\x00-\x20<>"{}|^`\\]')

_LITERAL_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


def escape_literal(text: str) -> str:
    out = text
    for raw, esc in _LITERAL_ESCAPES.items():
        out = out.replace(raw, esc)
    return out


def _check_encodable(text: str) -> None:
    try:
        text.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise TurtleError(f"literal contains unencodable characters: {exc}") from None


def format_term(term: str | Literal, prefixes: dict[str, str]) -> str:
    """Render one term in Turtle surface syntax, validating prefixes."""
    if isinstance(term, Literal):
        _check_encodable(term.text)
        rendered = '"' + escape_literal(term.text) + '"'
        if term.datatype is not None:
            rendered += "^^" + format_term(term.datatype, prefixes)
        return rendered
    if term.startswith("<") and term.endswith(">"):
        inner = term[1:-1]
        if _BAD_IRI_CHARS.search(inner):
            raise TurtleError(f"invalid character in IRI reference {term!r}")
        return term
    m = _CURIE_RE.match(term)
    if m is None:
        raise TurtleError(f"not a prefixed name or <IRI>: {term!r}")
    if m.group(1) not in prefixes:
        raise TurtleError(f"unknown prefix {m.group(1)!r} in {term!r}")
    return term


# Predicate order inside a subject group. Unlisted predicates sort
# alphabetically between the fixed head and tail.
_PRED_RANK_HEAD = {"rdf:type": 0, "rdfs:label": 1, "rdfs:subClassOf": 2,
                   "dcterms:source": 3, "owl:equivalentClass": 4}
_PRED_RANK_TAIL = {"wkgs:spatialObject": 6, "wkgs:osmLink": 7, "geo:asWKT": 8}


def _pred_rank(predicate: str) -> tuple[int, str]:
    if predicate in _PRED_RANK_HEAD:
        return (_PRED_RANK_HEAD[predicate], "")
    if predicate in _PRED_RANK_TAIL:
        return (_PRED_RANK_TAIL[predicate], "")
    return (5, predicate)


def _object_sort_key(obj: str | Literal) -> tuple[int, str, str]:
    if isinstance(obj, Literal):
        return (1, obj.text, obj.datatype or "")
    return (0, obj, "")


def format_prefix_block(prefixes: dict[str, str]) -> str:
    lines = [f"@prefix {p}: <{iri}> ." for p, iri in sorted(prefixes.items())]
    return "\n".join(lines) + "\n"


def format_subject_block(subject: str, triples: list[Triple],
                         prefixes: dict[str, str]) -> str:
    """Render one subject group with `;` continuations and `a` typing."""
    ordered = sorted(
        triples,
        key=lambda t: (_pred_rank(t.predicate), t.predicate, _object_sort_key(t.obj)),
    )
    parts = []
    for t in ordered:
        pred = "a" if t.predicate == "rdf:type" else format_term(t.predicate, prefixes)
        parts.append(f"{pred} {format_term(t.obj, prefixes)}")
    head = format_term(subject, prefixes)
    body = " ;\n    ".join(parts)
    return f"{head} {body} .\n"


def format_document(triples: Iterable[Triple], prefixes: dict[str, str],
                    subject_order: list[str] | None = None) -> str:
    """Serialize triples into a deterministic Turtle document.

    Subjects appear in ``subject_order`` when given; any remaining subjects
    follow, sorted lexically. Within a subject, predicates follow the fixed
    rank order.
    """
    groups: dict[str, list[Triple]] = {}
    for t in triples:
        groups.setdefault(t.subject, []).append(t)
    order: list[str] = []
    if subject_order:
        order = [s for s in subject_order if s in groups]
    seen = set(order)
    order += sorted(s for s in groups if s not in seen)
    blocks = [format_prefix_block(prefixes)]
    blocks += [format_subject_block(s, groups[s], prefixes) for s in order]
    return "\n".join(blocks)


_KG_SUBJECT_RE = re.compile(r"^wkg:(geo)?(\d+)$")


def kg_subject_order(subjects: Iterable[str]) -> list[str]:
    """Order KG subjects by numeric id, each entity before its geometry node."""

    def key(subject: str):
        m = _KG_SUBJECT_RE.match(subject)
        if m:
            return (0, int(m.group(2)), 1 if m.group(1) else 0, "")
        return (1, 0, 0, subject)

    return sorted(subjects, key=key)


def serialize_triples(triples: Iterable[Triple],
                      prefixes: dict[str, str] | None = None) -> str:
    """Serialize KG triples with id-ordered subject groups."""
    triples = list(triples)
    prefixes = PREFIXES if prefixes is None else prefixes
    order = kg_subject_order({t.subject for t in triples})
    return format_document(triples, prefixes, subject_order=order)


# --- parsing ---------------------------------------------------------------

class ParsedDocument(NamedTuple):
    triples: list[Triple]
    prefixes: dict[str, str]


_PN_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")
_DECODE = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "r": "\r", "t": "\t",
           "b": "\b", "f": "\f"}


class _Scanner:
    """Character scanner over a Turtle document."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.n = len(text)

    def error(self, message: str) -> TurtleError:
        line = self.text.count("\n", 0, self.pos) + 1
        col = self.pos - self.text.rfind("\n", 0, self.pos)
        return TurtleError(f"turtle parse error at line {line}, column {col}: {message}")

    def skip_space(self) -> None:
        while self.pos < self.n:
            c = self.text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = self.n if nl < 0 else nl + 1
            else:
                return

    def at_end(self) -> bool:
        self.skip_space()
        return self.pos >= self.n

    def read_token(self):
        """Return (kind, value): iri, pname, a, literal, punct, prefix_decl."""
        self.skip_space()
        if self.pos >= self.n:
            raise self.error("unexpected end of input")
        c = self.text[self.pos]
        if c == "<":
            end = self.text.find(">", self.pos)
            if end < 0:
                raise self.error("unterminated IRI reference")
            iri = self.text[self.pos + 1:end]
            self.pos = end + 1
            return ("iri", iri)
        if c == '"':
            return ("literal", self._read_literal())
        if c in ";,.":
            self.pos += 1
            return ("punct", c)
        if self.text.startswith("@prefix", self.pos):
            self.pos += len("@prefix")
            return ("prefix_decl", "@prefix")
        return self._read_name()

    def _read_name(self):
        start = self.pos
        while self.pos < self.n and self.text[self.pos] in _PN_CHARS:
            self.pos += 1
        head = self.text[start:self.pos]
        if self.pos < self.n and self.text[self.pos] == ":":
            self.pos += 1
            lstart = self.pos
            while self.pos < self.n and self.text[self.pos] in _PN_CHARS:
                self.pos += 1
            return ("pname", (head, self.text[lstart:self.pos]))
        if head == "a":
            return ("a", "a")
        if not head:
            raise self.error(f"unexpected character {self.text[start]!r}")
        raise self.error(f"unsupported token {head!r}")

    def _read_literal(self) -> Literal:
        assert self.text[self.pos] == '"'
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= self.n:
                raise self.error("unterminated string literal")
            c = self.text[self.pos]
            if c == '"':
                self.pos += 1
                break
            if c == "\\":
                self.pos += 1
                if self.pos >= self.n:
                    raise self.error("dangling escape")
                e = self.text[self.pos]
                if e in _DECODE:
                    out.append(_DECODE[e])
                    self.pos += 1
                elif e in "uU":
                    width = 4 if e == "u" else 8
                    hexpart = self.text[self.pos + 1:self.pos + 1 + width]
                    if len(hexpart) != width:
                        raise self.error("truncated unicode escape")
                    try:
                        out.append(chr(int(hexpart, 16)))
                    except ValueError:
                        raise self.error(f"invalid unicode escape \\{e}{hexpart}") from None
                    self.pos += 1 + width
                else:
                    raise self.error(f"unknown escape \\{e}")
            elif c in "\n\r":
                raise self.error("raw newline in string literal")
            else:
                out.append(c)
                self.pos += 1
        datatype = None
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            kind, value = self.read_token()
            if kind == "iri":
                datatype = value
            elif kind == "pname":
                datatype = ("pname", value)
            else:
                raise self.error("expected datatype IRI after ^^")
        return Literal("".join(out), datatype)


def parse_turtle(text: str) -> ParsedDocument:
    """Parse the emitted Turtle subset into fully expanded triples.

    Subjects and predicates come back as full IRI strings; objects as full
    IRI strings or :class:`Literal` values with expanded datatypes.
    """
    sc = _Scanner(text)
    prefixes: dict[str, str] = {}
    triples: list[Triple] = []

    def expand(pname: tuple[str, str]) -> str:
        prefix, local = pname
        if prefix not in prefixes:
            raise sc.error(f"undeclared prefix {prefix!r}")
        return prefixes[prefix] + local

    def resolve_literal(lit: Literal) -> Literal:
        if isinstance(lit.datatype, tuple):
            return Literal(lit.text, expand(lit.datatype[1]))
        return lit

    def read_term(kind, value, *, as_subject=False):
        if kind == "iri":
            return value
        if kind == "pname":
            return expand(value)
        if kind == "literal" and not as_subject:
            return resolve_literal(value)
        raise sc.error(f"unexpected {kind} token")

    while not sc.at_end():
        kind, value = sc.read_token()
        if kind == "prefix_decl":
            pk, pv = sc.read_token()
            if pk != "pname" or pv[1] != "":
                raise sc.error("expected prefix name in @prefix")
            ik, iv = sc.read_token()
            if ik != "iri":
                raise sc.error("expected namespace IRI in @prefix")
            dk, dv = sc.read_token()
            if (dk, dv) != ("punct", "."):
                raise sc.error("expected '.' after @prefix")
            prefixes[pv[0]] = iv
            continue
        subject = read_term(kind, value, as_subject=True)
        while True:
            pk, pv = sc.read_token()
            if pk == "punct" and pv == ".":
                break
            if pk == "a":
                predicate = RDF_TYPE
            elif pk in ("iri", "pname"):
                predicate = read_term(pk, pv)
            else:
                raise sc.error(f"expected a predicate, got {pk}")
            while True:
                ok, ov = sc.read_token()
                triples.append(Triple(subject, predicate, read_term(ok, ov)))
                nk, nv = sc.read_token()
                if nk != "punct":
                    raise sc.error(f"expected punctuation, got {nk}")
                if nv == ",":
                    continue
                break
            if nv == ".":
                break
            if nv != ";":
                raise sc.error(f"unexpected {nv!r}")
    return ParsedDocument(triples, prefixes)


def in_namespace(iri: str, prefix: str) -> str | None:
    """Return the local name when ``iri`` lies in the given prefix's namespace."""
    ns = PREFIXES[prefix]
    if iri.startswith(ns):
        return iri[len(ns):]
    return None
