"""Corpus loading, validation, partition merging, and persistence.

The on-disk format is UTF-8 line-delimited JSON, one document per line.
Offsets are 0-based, end-exclusive, counted in Unicode code points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

PARTITIONS = ("train", "distant", "test")


class CorpusError(Exception):
    """Base error for corpus loading and validation."""


class SchemaError(CorpusError):
    """A record does not match the on-disk schema."""

    def __init__(self, paper_id: Optional[str], field_path: str, message: str):
        self.paper_id = paper_id
        self.field_path = field_path
        super().__init__(f"paper_id={paper_id!r} field={field_path}: {message}")


class ValidationError(CorpusError):
    """A structurally well-formed record violates a corpus invariant."""


@dataclass(frozen=True)
class ReferenceEntry:
    ref_id: str
    citation_mark: str
    title: str
    abstract: str


@dataclass(frozen=True)
class CitationSpan:
    span_id: str
    sentence_range: tuple[int, int]  # inclusive [first, last]
    char_range: tuple[int, int]  # [start, end) within the paragraph text
    citation_mark: str
    ref_id: str


@dataclass(frozen=True)
class Paragraph:
    para_id: str
    text: str
    sentence_offsets: tuple[tuple[int, int], ...]
    citations: tuple[CitationSpan, ...]

    @property
    def sentences(self) -> list[str]:
        return [self.text[s:e] for s, e in self.sentence_offsets]

    def sentence_extent(self, first: int, last: int) -> tuple[int, int]:
        """Character range covered by sentences first..last inclusive."""
        return self.sentence_offsets[first][0], self.sentence_offsets[last][1]


@dataclass(frozen=True)
class Document:
    paper_id: str
    partition: str
    intro_text: str
    paragraphs: tuple[Paragraph, ...]
    references: dict[str, ReferenceEntry]
    # Original partition kept when documents are folded into the unified
    # training set; equals `partition` for freshly loaded corpora.
    source_partition: Optional[str] = None

    @property
    def citation_count(self) -> int:
        return sum(len(p.citations) for p in self.paragraphs)

    def find_span(self, span_id: str) -> Optional[tuple[Paragraph, CitationSpan]]:
        for para in self.paragraphs:
            for span in para.citations:
                if span.span_id == span_id:
                    return para, span
        return None


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def partition_counts(self) -> dict[str, dict[str, int]]:
        """Per-partition document and citation counts."""
        counts: dict[str, dict[str, int]] = {}
        for doc in self.documents:
            cell = counts.setdefault(doc.partition, {"papers": 0, "citations": 0})
            cell["papers"] += 1
            cell["citations"] += doc.citation_count
        return counts

    def by_paper_id(self) -> dict[str, Document]:
        return {d.paper_id: d for d in self.documents}


def normalize_whitespace(text: str) -> str:
    """Collapse runs of spaces/tabs; newlines survive as boundaries."""
    lines = [" ".join(part.split()) if part.strip() else "" for part in text.split("\n")]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# parsing and validation


def _require(obj: dict, key: str, typ, paper_id: Optional[str], path: str):
    if key not in obj:
        raise SchemaError(paper_id, f"{path}.{key}", "missing field")
    value = obj[key]
    if not isinstance(value, typ):
        raise SchemaError(
            paper_id, f"{path}.{key}", f"expected {typ.__name__}, got {type(value).__name__}"
        )
    return value


def _parse_pair(raw, paper_id: str, path: str) -> tuple[int, int]:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 2
        or not all(isinstance(v, int) for v in raw)
    ):
        raise SchemaError(paper_id, path, "expected a pair of integers")
    return int(raw[0]), int(raw[1])


def parse_document(record: dict) -> Document:
    """Parse one JSON record into a Document, checking schema and invariants."""
    paper_id = _require(record, "paper_id", str, None, "$")
    partition = _require(record, "partition", str, paper_id, "$")
    if partition not in PARTITIONS:
        raise SchemaError(paper_id, "$.partition", f"unknown partition {partition!r}")
    intro_text = _require(record, "intro_text", str, paper_id, "$")

    references: dict[str, ReferenceEntry] = {}
    raw_refs = _require(record, "references", dict, paper_id, "$")
    for ref_id, raw in raw_refs.items():
        path = f"$.references[{ref_id}]"
        if not isinstance(raw, dict):
            raise SchemaError(paper_id, path, "expected object")
        entry = ReferenceEntry(
            ref_id=ref_id,
            citation_mark=_require(raw, "citation_mark", str, paper_id, path),
            title=_require(raw, "title", str, paper_id, path),
            abstract=_require(raw, "abstract", str, paper_id, path),
        )
        if not entry.title.strip() or not entry.abstract.strip():
            raise ValidationError(
                f"paper_id={paper_id!r} reference {ref_id!r}: empty title or abstract"
            )
        references[ref_id] = entry

    paragraphs: list[Paragraph] = []
    raw_paras = _require(record, "paragraphs", list, paper_id, "$")
    for pi, raw_para in enumerate(raw_paras):
        path = f"$.paragraphs[{pi}]"
        if not isinstance(raw_para, dict):
            raise SchemaError(paper_id, path, "expected object")
        para_id = _require(raw_para, "para_id", str, paper_id, path)
        text = _require(raw_para, "text", str, paper_id, path)
        offsets = tuple(
            _parse_pair(p, paper_id, f"{path}.sentence_offsets[{k}]")
            for k, p in enumerate(_require(raw_para, "sentence_offsets", list, paper_id, path))
        )
        citations = []
        for ci, raw_span in enumerate(_require(raw_para, "citations", list, paper_id, path)):
            spath = f"{path}.citations[{ci}]"
            if not isinstance(raw_span, dict):
                raise SchemaError(paper_id, spath, "expected object")
            citations.append(
                CitationSpan(
                    span_id=_require(raw_span, "span_id", str, paper_id, spath),
                    sentence_range=_parse_pair(
                        raw_span.get("sentence_range"), paper_id, f"{spath}.sentence_range"
                    ),
                    char_range=_parse_pair(
                        raw_span.get("char_range"), paper_id, f"{spath}.char_range"
                    ),
                    citation_mark=_require(raw_span, "citation_mark", str, paper_id, spath),
                    ref_id=_require(raw_span, "ref_id", str, paper_id, spath),
                )
            )
        paragraphs.append(
            Paragraph(
                para_id=para_id,
                text=text,
                sentence_offsets=offsets,
                citations=tuple(citations),
            )
        )

    doc = Document(
        paper_id=paper_id,
        partition=partition,
        intro_text=intro_text,
        paragraphs=tuple(paragraphs),
        references=references,
        source_partition=record.get("source_partition"),
    )
    validate_document(doc)
    return doc


def validate_document(doc: Document) -> None:
    """Check a document's structural invariants; raise ValidationError."""
    if not doc.paragraphs:
        raise ValidationError(f"paper_id={doc.paper_id!r}: no paragraphs")
    for para in doc.paragraphs:
        prev_end = 0
        for k, (s, e) in enumerate(para.sentence_offsets):
            if s < prev_end or e < s or e > len(para.text):
                raise ValidationError(
                    f"paper_id={doc.paper_id!r} para={para.para_id!r}: "
                    f"sentence offset {k} [{s},{e}) out of order or out of bounds"
                )
            prev_end = e
        n_sents = len(para.sentence_offsets)
        for span in para.citations:
            first, last = span.sentence_range
            if not (0 <= first <= last < n_sents):
                raise ValidationError(
                    f"paper_id={doc.paper_id!r} span={span.span_id!r}: "
                    f"sentence_range [{first},{last}] outside 0..{n_sents - 1}"
                )
            ext_s, ext_e = para.sentence_extent(first, last)
            cs, ce = span.char_range
            if not (ext_s <= cs <= ce <= ext_e):
                raise ValidationError(
                    f"paper_id={doc.paper_id!r} span={span.span_id!r}: "
                    f"char_range [{cs},{ce}) outside sentence extent [{ext_s},{ext_e})"
                )
            if span.citation_mark not in para.text[cs:ce]:
                raise ValidationError(
                    f"paper_id={doc.paper_id!r} span={span.span_id!r}: "
                    f"citation_mark not found verbatim in span text"
                )
            if span.ref_id not in doc.references:
                raise ValidationError(
                    f"paper_id={doc.paper_id!r} span={span.span_id!r}: "
                    f"unresolved ref_id {span.ref_id!r}"
                )


# ---------------------------------------------------------------------------
# load / save / merge


def load_corpus(path: str | Path, partition_filter: Optional[set[str]] = None) -> Corpus:
    """Load a line-delimited corpus file, validating every record.

    `partition_filter`, when given, keeps only documents whose partition is
    in the set. Unknown filter values are rejected up front.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    if partition_filter is not None:
        bad = set(partition_filter) - set(PARTITIONS)
        if bad:
            raise CorpusError(f"unknown partitions in filter: {sorted(bad)}")

    documents: list[Document] = []
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(None, f"$ (line {lineno})", f"invalid JSON: {exc}") from exc
            doc = parse_document(record)
            if doc.paper_id in seen_ids:
                raise ValidationError(f"duplicate paper_id {doc.paper_id!r} at line {lineno}")
            seen_ids.add(doc.paper_id)
            if partition_filter is None or doc.partition in partition_filter:
                documents.append(doc)
    return Corpus(documents=documents)


def merge_training(corpus: Corpus) -> Corpus:
    """Fold train and distant documents into one unified training set.

    Test documents are dropped; original partition labels survive as
    `source_partition` provenance.
    """
    merged = []
    for doc in corpus:
        if doc.partition == "test":
            continue
        merged.append(
            Document(
                paper_id=doc.paper_id,
                partition="train",
                intro_text=doc.intro_text,
                paragraphs=doc.paragraphs,
                references=doc.references,
                source_partition=doc.source_partition or doc.partition,
            )
        )
    return Corpus(documents=merged)


def document_to_record(doc: Document) -> dict:
    record = {
        "paper_id": doc.paper_id,
        "partition": doc.partition,
        "intro_text": doc.intro_text,
        "paragraphs": [
            {
                "para_id": p.para_id,
                "text": p.text,
                "sentence_offsets": [list(o) for o in p.sentence_offsets],
                "citations": [
                    {
                        "span_id": c.span_id,
                        "sentence_range": list(c.sentence_range),
                        "char_range": list(c.char_range),
                        "citation_mark": c.citation_mark,
                        "ref_id": c.ref_id,
                    }
                    for c in p.citations
                ],
            }
            for p in doc.paragraphs
        ],
        "references": {
            ref_id: {
                "citation_mark": r.citation_mark,
                "title": r.title,
                "abstract": r.abstract,
            }
            for ref_id, r in doc.references.items()
        },
    }
    if doc.source_partition is not None:
        record["source_partition"] = doc.source_partition
    return record


def save_corpus(corpus: Corpus | Iterable[Document], path: str | Path) -> None:
    """Write a corpus to line-delimited JSON; round-trips with load_corpus."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for doc in corpus:
                fh.write(json.dumps(document_to_record(doc), ensure_ascii=False, sort_keys=True))
                fh.write("\n")
    except OSError as exc:
        raise CorpusError(f"failed to write corpus to {path}: {exc}") from exc
