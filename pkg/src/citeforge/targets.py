"""Model input construction and the two generation-target variants.

Infilling targets are the citation text alone; contextualized targets are
the whole context window with the citation bracketed by `[SEP]` so it can
be recovered exactly from decoded output.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Literal, Optional

from .corpus import Corpus, Document, ReferenceEntry

MASK_TOKEN = "[MASK]"
SEP_TOKEN = "[SEP]"
FIELD_SEP = " [FIELD] "

Mode = Literal["infilling", "contextualized"]
MODES: tuple[Mode, ...] = ("infilling", "contextualized")


class TargetError(Exception):
    pass


class SpanNotFoundError(TargetError):
    pass


class BudgetError(TargetError):
    """The untruncatable input fields alone exceed the budget."""


@dataclass(frozen=True)
class ContextWindow:
    left: tuple[str, ...]
    citation_text: str
    right: tuple[str, ...]
    source: tuple[str, str, str]  # (paper_id, para_id, span_id)
    width: int


@dataclass(frozen=True)
class GenerationExample:
    example_id: str
    mode: Mode
    input_text: str
    target_text: str
    source: tuple[str, str, str]

    def to_record(self) -> dict:
        paper_id, para_id, span_id = self.source
        return {
            "example_id": self.example_id,
            "mode": self.mode,
            "input_text": self.input_text,
            "target_text": self.target_text,
            "source": {"paper_id": paper_id, "para_id": para_id, "span_id": span_id},
        }

    @classmethod
    def from_record(cls, record: dict) -> "GenerationExample":
        src = record["source"]
        return cls(
            example_id=record["example_id"],
            mode=record["mode"],
            input_text=record["input_text"],
            target_text=record["target_text"],
            source=(src["paper_id"], src["para_id"], src["span_id"]),
        )


ExtractionStatus = Literal["ok", "missing_separator", "extra_separator", "empty_citation"]


@dataclass(frozen=True)
class GenerationOutput:
    example_id: str
    raw_text: str
    extracted_citation: str
    status: ExtractionStatus

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "raw_text": self.raw_text,
            "extracted_citation": self.extracted_citation,
            "status": self.status,
        }


def extract_context_window(document: Document, span_id: str, width: int = 3) -> ContextWindow:
    """Window of up to `width` sentences either side of the citation span.

    The citation text is the full extent of the sentences the span covers,
    so multi-sentence citations stay whole. Left/right truncate at the
    paragraph boundary.
    """
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    found = document.find_span(span_id)
    if found is None:
        raise SpanNotFoundError(f"span {span_id!r} not in paper {document.paper_id!r}")
    para, span = found
    first, last = span.sentence_range
    sentences = para.sentences
    left = tuple(sentences[max(0, first - width) : first])
    right = tuple(sentences[last + 1 : last + 1 + width])
    ext_s, ext_e = para.sentence_extent(first, last)
    return ContextWindow(
        left=left,
        citation_text=para.text[ext_s:ext_e],
        right=right,
        source=(document.paper_id, para.para_id, span_id),
        width=width,
    )


def mask_window(window: ContextWindow) -> str:
    """Replace the target citation with a single `[MASK]` token.

    Other citation marks in the surrounding sentences are left intact.
    """
    parts = list(window.left) + [MASK_TOKEN] + list(window.right)
    return " ".join(parts)


def build_target(window: ContextWindow, mode: Mode) -> str:
    if mode == "infilling":
        return window.citation_text
    if mode == "contextualized":
        parts = list(window.left) + [SEP_TOKEN, window.citation_text, SEP_TOKEN] + list(window.right)
        return " ".join(parts)
    raise ValueError(f"unknown mode {mode!r}")


def build_input(
    document: Document,
    masked_window: str,
    reference: ReferenceEntry,
    budget: int,
) -> str:
    """Concatenate intro, masked paragraph, and reference block within budget.

    Budget is counted in characters over the joined output. When over
    budget, the intro loses characters from its head first; if the intro is
    exhausted, the abstract loses characters from its tail. The masked
    paragraph, citation mark, and title are never truncated.
    """
    intro = document.intro_text
    fields_after_intro = [masked_window, reference.citation_mark, reference.title]
    sep_cost = 4 * len(FIELD_SEP)
    protected = sum(len(f) for f in fields_after_intro) + sep_cost
    if protected > budget:
        raise BudgetError(
            f"budget {budget} cannot hold the untruncatable fields ({protected} chars)"
        )
    abstract = reference.abstract
    total = protected + len(intro) + len(abstract)
    if total > budget:
        over = total - budget
        cut = min(over, len(intro))
        intro = intro[cut:]  # drop from the head
        over -= cut
        if over > 0:
            abstract = abstract[: len(abstract) - over]  # drop from the tail
    return FIELD_SEP.join([intro, masked_window, reference.citation_mark, reference.title, abstract])


def extract_citation(raw_text: str, mode: Mode, example_id: str = "") -> GenerationOutput:
    """Recover the citation from decoded output.

    Contextualized outputs are split on `[SEP]`; the text between the first
    two separators is the citation. Degenerate shapes become statuses, not
    errors: fewer than two separators report the whole text as
    missing_separator, more than two apply the first-two rule.
    """
    if mode == "infilling":
        text = raw_text.strip()
        status: ExtractionStatus = "ok" if text else "empty_citation"
        return GenerationOutput(example_id, raw_text, text, status)

    pieces = raw_text.split(SEP_TOKEN)
    n_seps = len(pieces) - 1
    if n_seps < 2:
        return GenerationOutput(example_id, raw_text, raw_text.strip(), "missing_separator")
    citation = pieces[1].strip()
    if not citation:
        return GenerationOutput(example_id, raw_text, "", "empty_citation")
    status = "ok" if n_seps == 2 else "extra_separator"
    return GenerationOutput(example_id, raw_text, citation, status)


def example_id_for(source: tuple[str, str, str]) -> str:
    return ":".join(source)


def build_dataset(
    corpus: Corpus | Iterable[Document],
    mode: Mode,
    width: int = 3,
    budget: int = 4096,
    seed: int = 0,
    on_error: Optional[list] = None,
) -> Iterator[GenerationExample]:
    """One example per citation span, in a deterministic seed-shuffled order.

    Example ids are derived purely from span provenance, so datasets built
    in different modes from the same corpus pair up by example_id with
    identical inputs. Spans that fail (for example a budget too small for
    their paragraph) are recorded in `on_error` and skipped.
    """
    work = []
    for doc in corpus:
        for para in doc.paragraphs:
            for span in para.citations:
                work.append((doc, span.span_id))
    rng = random.Random(seed)
    rng.shuffle(work)
    for doc, span_id in work:
        try:
            yield build_example(doc, span_id, mode, width, budget)
        except TargetError as exc:
            if on_error is not None:
                on_error.append((doc.paper_id, span_id, str(exc)))


def build_example(
    document: Document, span_id: str, mode: Mode, width: int = 3, budget: int = 4096
) -> GenerationExample:
    window = extract_context_window(document, span_id, width)
    para, span = document.find_span(span_id)
    reference = document.references[span.ref_id]
    masked_para = _mask_paragraph(para, span)
    input_text = build_input(document, masked_para, reference, budget)
    return GenerationExample(
        example_id=example_id_for(window.source),
        mode=mode,
        input_text=input_text,
        target_text=build_target(window, mode),
        source=window.source,
    )


def write_examples(examples: Iterable[GenerationExample], path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_record(), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_examples(path) -> list[GenerationExample]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(GenerationExample.from_record(json.loads(line)))
    return out


def write_outputs(outputs: Iterable[GenerationOutput], path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for out in outputs:
            fh.write(json.dumps(out.to_record(), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_outputs(path) -> list[GenerationOutput]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                out.append(
                    GenerationOutput(
                        example_id=rec["example_id"],
                        raw_text=rec["raw_text"],
                        extracted_citation=rec["extracted_citation"],
                        status=rec["status"],
                    )
                )
    return out


def _mask_paragraph(para, span) -> str:
    """Whole paragraph with the target span's sentences replaced by [MASK]."""
    ext_s, ext_e = para.sentence_extent(*span.sentence_range)
    return (para.text[:ext_s] + MASK_TOKEN + para.text[ext_e:]).strip()
