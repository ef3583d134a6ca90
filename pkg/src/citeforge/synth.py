"""Deterministic synthetic corpora for tests, demos, and harness sanity runs."""

from __future__ import annotations

import random

from .corpus import CitationSpan, Corpus, Document, Paragraph, ReferenceEntry

_TOPICS = ("parsing", "tagging", "alignment", "retrieval", "summarization", "generation")
_VERBS = ("proposed", "introduced", "extended", "improved", "studied", "evaluated")


def _mark(rng: random.Random, k: int) -> str:
    return f"Author{k} et al. ({rng.randint(1995, 2023)})"


def make_document(
    paper_id: str,
    partition: str,
    n_citations: int,
    rng: random.Random,
    context_sentences: int = 1,
) -> Document:
    """One paper with one paragraph per citation, each with local context."""
    references: dict[str, ReferenceEntry] = {}
    paragraphs: list[Paragraph] = []
    for k in range(n_citations):
        topic = rng.choice(_TOPICS)
        verb = rng.choice(_VERBS)
        mark = _mark(rng, rng.randint(0, 999))
        ref_id = f"{paper_id}-r{k}"
        references[ref_id] = ReferenceEntry(
            ref_id=ref_id,
            citation_mark=mark,
            title=f"A study of {topic} number {k}.",
            abstract=f"This paper {verb} a new approach to {topic}.",
        )
        sentences = []
        for c in range(context_sentences):
            sentences.append(f"Earlier work explored {rng.choice(_TOPICS)} in depth {c}.")
        cite_idx = len(sentences)
        sentences.append(f"{mark} {verb} a method for {topic}.")
        for c in range(context_sentences):
            sentences.append(f"Later studies refined {rng.choice(_TOPICS)} further {c}.")

        text = " ".join(sentences)
        offsets = []
        pos = 0
        for s in sentences:
            offsets.append((pos, pos + len(s)))
            pos += len(s) + 1
        cs, ce = offsets[cite_idx]
        paragraphs.append(
            Paragraph(
                para_id=f"{paper_id}-p{k}",
                text=text,
                sentence_offsets=tuple(offsets),
                citations=(
                    CitationSpan(
                        span_id=f"{paper_id}-s{k}",
                        sentence_range=(cite_idx, cite_idx),
                        char_range=(cs, ce),
                        citation_mark=mark,
                        ref_id=ref_id,
                    ),
                ),
            )
        )
    return Document(
        paper_id=paper_id,
        partition=partition,
        intro_text=f"We study {rng.choice(_TOPICS)} and its applications.",
        paragraphs=tuple(paragraphs),
        references=references,
    )


def _spread(total_citations: int, n_papers: int) -> list[int]:
    """Distribute citations over papers so the totals are exact."""
    base, extra = divmod(total_citations, n_papers)
    return [base + 1 if i < extra else base for i in range(n_papers)]


def synthetic_corpus(
    partition_shape: dict[str, tuple[int, int]],
    seed: int = 0,
    context_sentences: int = 1,
) -> Corpus:
    """Corpus with exact (papers, citations) counts per partition.

    partition_shape maps partition name to (n_papers, n_citations).
    """
    rng = random.Random(seed)
    documents = []
    for partition, (n_papers, n_citations) in partition_shape.items():
        for i, per_paper in enumerate(_spread(n_citations, n_papers)):
            documents.append(
                make_document(
                    paper_id=f"{partition}-{i:05d}",
                    partition=partition,
                    n_citations=per_paper,
                    rng=rng,
                    context_sentences=context_sentences,
                )
            )
    return Corpus(documents=documents)


def table1_corpus(seed: int = 0) -> Corpus:
    """Corpus with the reference dataset's partition shape."""
    return synthetic_corpus(
        {"train": (565, 2243), "distant": (11564, 32512), "test": (362, 1322)},
        seed=seed,
    )


def overfit_corpus(n_citations: int = 50, seed: int = 7) -> Corpus:
    """Small single-partition corpus sized for harness overfit checks."""
    return synthetic_corpus({"train": (max(1, n_citations // 5), n_citations)}, seed=seed)
