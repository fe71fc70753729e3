"""Corpus data model and the line-delimited FACTS / SNIPPETS file formats.

A corpus is an immutable collection of completed projects. Each project is a
sequence of method declarations; each declaration carries its invocations as
an ordered list of fully-qualified canonical strings (repeats preserved:
order drives query splitting and sequence comparison, the de-duplicated set
drives Jaccard similarity). The corpus interns a dense vocabulary over all
canonical strings in first-appearance order and precomputes, per invocation,
how many projects and declarations contain it.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, Mapping, Sequence

FACTS_FORMAT = "focus-facts"
SNIPPETS_FORMAT = "focus-snippets"
FORMAT_VERSION = 1


class CorpusError(ValueError):
    """Base class for corpus loading failures."""


class ParseError(CorpusError):
    """A malformed record; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateError(CorpusError):
    """A (project, declaration) pair or snippet key appeared twice."""


class EmptyCorpusError(CorpusError):
    """The facts stream contained no project records."""


@dataclass(frozen=True)
class Declaration:
    """One method declaration: name, parameter types, ordered invocations.

    `invocations` keeps source order and repeats exactly as ingested.
    `source_ref` optionally keys into the corpus snippet store.
    """

    name: str
    param_types: tuple[str, ...] = ()
    invocations: tuple[str, ...] = ()
    source_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise CorpusError("declaration name must be non-empty")

    @property
    def invocation_set(self) -> frozenset[str]:
        """De-duplicated invocation set (the Jaccard view)."""
        return frozenset(self.invocations)


@dataclass(frozen=True)
class Project:
    """A project: unique id, optional category, ordered declarations."""

    id: str
    declarations: tuple[Declaration, ...]
    category: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("project id must be non-empty")
        if not self.declarations:
            raise CorpusError(f"project {self.id!r} has no declarations")
        names = [d.name for d in self.declarations]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise DuplicateError(f"project {self.id!r}: duplicate declaration {dup!r}")

    def declaration(self, name: str) -> Declaration:
        for d in self.declarations:
            if d.name == name:
                return d
        raise KeyError(name)


@dataclass(frozen=True)
class InvocationStats:
    """Per-invocation containment counts over the whole corpus."""

    project_count: int
    declaration_count: int


class Vocabulary:
    """Bijective mapping between canonical invocation strings and dense ids.

    Ids are assigned in first-appearance order and form exactly
    {0, ..., len-1}. Identity is exact byte equality of the canonical string.
    """

    def __init__(self, canonical: Sequence[str] = ()):
        self._canonical: list[str] = []
        self._index: dict[str, int] = {}
        for s in canonical:
            self.intern(s)

    def intern(self, canonical: str) -> int:
        if not canonical:
            raise CorpusError("canonical invocation string must be non-empty")
        idx = self._index.get(canonical)
        if idx is None:
            idx = len(self._canonical)
            self._canonical.append(canonical)
            self._index[canonical] = idx
        return idx

    def id_of(self, canonical: str) -> int | None:
        return self._index.get(canonical)

    def canonical_of(self, idx: int) -> str:
        return self._canonical[idx]

    def __len__(self) -> int:
        return len(self._canonical)

    def __contains__(self, canonical: str) -> bool:
        return canonical in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._canonical)


@dataclass(eq=False)
class Corpus:
    """Immutable background data: projects, vocabulary, snippets, counts.

    Instances are safely shareable across concurrent readers; all derived
    indexes elsewhere key off object identity, so never mutate one in place.
    """

    projects: tuple[Project, ...]
    vocabulary: Vocabulary
    snippets: Mapping[str, str] = field(default_factory=dict)
    _stats: dict[int, InvocationStats] = field(default_factory=dict, repr=False)
    _by_id: dict[str, Project] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, projects: Sequence[Project], snippets: Mapping[str, str] | None = None) -> "Corpus":
        if not projects:
            raise EmptyCorpusError("corpus must contain at least one project")
        ids = [p.id for p in projects]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise DuplicateError(f"duplicate project id {dup!r}")
        vocab = Vocabulary()
        proj_count: dict[int, int] = {}
        decl_count: dict[int, int] = {}
        for p in projects:
            seen_in_project: set[int] = set()
            for d in p.declarations:
                seen_in_decl: set[int] = set()
                for canonical in d.invocations:
                    idx = vocab.intern(canonical)
                    if idx not in seen_in_decl:
                        seen_in_decl.add(idx)
                        decl_count[idx] = decl_count.get(idx, 0) + 1
                    seen_in_project.add(idx)
            for idx in seen_in_project:
                proj_count[idx] = proj_count.get(idx, 0) + 1
        stats = {
            idx: InvocationStats(proj_count[idx], decl_count[idx])
            for idx in range(len(vocab))
        }
        return cls(
            projects=tuple(projects),
            vocabulary=vocab,
            snippets=dict(snippets or {}),
            _stats=stats,
            _by_id={p.id: p for p in projects},
        )

    def __len__(self) -> int:
        return len(self.projects)

    def __contains__(self, project_id: str) -> bool:
        return project_id in self._by_id

    def project(self, project_id: str) -> Project:
        return self._by_id[project_id]

    @property
    def project_ids(self) -> list[str]:
        return [p.id for p in self.projects]

    @property
    def declaration_total(self) -> int:
        return sum(len(p.declarations) for p in self.projects)

    def stats(self, canonical: str) -> InvocationStats:
        idx = self.vocabulary.id_of(canonical)
        if idx is None:
            raise KeyError(canonical)
        return self._stats[idx]

    def project_count(self, canonical: str) -> int:
        return self.stats(canonical).project_count

    def declaration_count(self, canonical: str) -> int:
        return self.stats(canonical).declaration_count

    def stats_by_id(self, idx: int) -> InvocationStats:
        return self._stats[idx]

    def with_snippets(self, snippets: Mapping[str, str]) -> "Corpus":
        """New corpus sharing projects/vocabulary with a replaced snippet store."""
        return Corpus(
            projects=self.projects,
            vocabulary=self.vocabulary,
            snippets=dict(snippets),
            _stats=self._stats,
            _by_id=self._by_id,
        )

    def subset(self, project_ids: Iterable[str]) -> "Corpus":
        """New corpus over the selected projects, in corpus order.

        The vocabulary is re-interned from the surviving projects, so counts
        and feature weights reflect only the retained background data.
        """
        wanted = set(project_ids)
        kept = [p for p in self.projects if p.id in wanted]
        return Corpus.build(kept, snippets=self.snippets)

    def snippet_for(self, declaration: Declaration) -> str | None:
        if declaration.source_ref is None:
            return None
        return self.snippets.get(declaration.source_ref)


def _read_lines(stream: BinaryIO | Iterable[bytes]) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
        if text.strip():
            yield lineno, text


def _parse_header(lineno: int, text: str, expected_format: str) -> None:
    try:
        header = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(lineno, f"invalid JSON in header: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("format") != expected_format:
        raise ParseError(lineno, f"expected header record with format={expected_format!r}")
    if header.get("version") != FORMAT_VERSION:
        raise ParseError(lineno, f"unsupported {expected_format} version {header.get('version')!r}")


def parse_facts(stream: BinaryIO | Iterable[bytes] | bytes) -> Corpus:
    """Parse a FACTS stream into a Corpus.

    The stream is line-delimited JSON: a header record
    ``{"format": "focus-facts", "version": 1}`` followed by one record per
    declaration. Records of the same project must be contiguous; project and
    declaration order are significant and preserved.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    lines = _read_lines(stream)
    try:
        lineno, text = next(lines)
    except StopIteration:
        raise EmptyCorpusError("facts stream is empty") from None
    _parse_header(lineno, text, FACTS_FORMAT)

    projects: list[Project] = []
    finished: set[str] = set()
    current_id: str | None = None
    current_category: str | None = None
    current_decls: list[Declaration] = []
    seen_decl_names: set[str] = set()

    def finish_current() -> None:
        nonlocal current_id, current_category, current_decls
        if current_id is not None:
            projects.append(
                Project(id=current_id, category=current_category, declarations=tuple(current_decls))
            )
            finished.add(current_id)
            current_id = None
            current_category = None
            current_decls = []
            seen_decl_names.clear()

    for lineno, text in lines:
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(rec, dict):
            raise ParseError(lineno, "record must be a JSON object")
        try:
            project_id = rec["project"]
            decl_name = rec["declaration"]
            invocations = rec.get("invocations", [])
            params = rec.get("params", [])
        except KeyError as exc:
            raise ParseError(lineno, f"missing field {exc.args[0]!r}") from exc
        if not isinstance(project_id, str) or not project_id:
            raise ParseError(lineno, "'project' must be a non-empty string")
        if not isinstance(decl_name, str) or not decl_name:
            raise ParseError(lineno, "'declaration' must be a non-empty string")
        if not isinstance(invocations, list) or any(not isinstance(s, str) or not s for s in invocations):
            raise ParseError(lineno, "'invocations' must be a list of non-empty strings")
        if not isinstance(params, list) or any(not isinstance(s, str) for s in params):
            raise ParseError(lineno, "'params' must be a list of strings")
        category = rec.get("category")
        if category is not None and not isinstance(category, str):
            raise ParseError(lineno, "'category' must be a string when present")
        source_ref = rec.get("source_ref")
        if source_ref is not None and not isinstance(source_ref, str):
            raise ParseError(lineno, "'source_ref' must be a string when present")

        if project_id != current_id:
            if project_id in finished:
                raise ParseError(lineno, f"records for project {project_id!r} are not contiguous")
            finish_current()
            current_id = project_id
            current_category = category
        elif category is not None and current_category is not None and category != current_category:
            raise ParseError(lineno, f"conflicting category for project {project_id!r}")
        elif category is not None and current_category is None:
            raise ParseError(lineno, f"category for project {project_id!r} must be on its first record")

        if decl_name in seen_decl_names:
            raise DuplicateError(f"line {lineno}: duplicate declaration {decl_name!r} in project {project_id!r}")
        seen_decl_names.add(decl_name)
        current_decls.append(
            Declaration(
                name=decl_name,
                param_types=tuple(params),
                invocations=tuple(invocations),
                source_ref=source_ref,
            )
        )

    finish_current()
    if not projects:
        raise EmptyCorpusError("facts stream has a header but no records")
    return Corpus.build(projects)


def serialize_facts(corpus: Corpus) -> bytes:
    """Serialize a corpus back to the FACTS format (parse round-trips)."""
    out = io.StringIO()
    out.write(json.dumps({"format": FACTS_FORMAT, "version": FORMAT_VERSION}) + "\n")
    for p in corpus.projects:
        for d in p.declarations:
            rec: dict[str, object] = {"project": p.id}
            if p.category is not None:
                rec["category"] = p.category
            rec["declaration"] = d.name
            rec["params"] = list(d.param_types)
            rec["invocations"] = list(d.invocations)
            if d.source_ref is not None:
                rec["source_ref"] = d.source_ref
            out.write(json.dumps(rec) + "\n")
    return out.getvalue().encode("utf-8")


def load_snippets(stream: BinaryIO | Iterable[bytes] | bytes) -> dict[str, str]:
    """Parse a SNIPPETS stream into a source_ref -> verbatim body map.

    An empty stream yields an empty map. Duplicate keys are an error; keys
    that no corpus declaration references are fine (lookups return absent).
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    lines = _read_lines(stream)
    try:
        lineno, text = next(lines)
    except StopIteration:
        return {}
    _parse_header(lineno, text, SNIPPETS_FORMAT)
    snippets: dict[str, str] = {}
    for lineno, text in lines:
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(rec, dict) or not isinstance(rec.get("key"), str) or not isinstance(rec.get("body"), str):
            raise ParseError(lineno, "snippet record must have string 'key' and 'body'")
        key = rec["key"]
        if key in snippets:
            raise DuplicateError(f"line {lineno}: duplicate snippet key {key!r}")
        snippets[key] = rec["body"]
    return snippets


def serialize_snippets(snippets: Mapping[str, str]) -> bytes:
    out = io.StringIO()
    out.write(json.dumps({"format": SNIPPETS_FORMAT, "version": FORMAT_VERSION}) + "\n")
    for key in snippets:
        out.write(json.dumps({"key": key, "body": snippets[key]}) + "\n")
    return out.getvalue().encode("utf-8")
