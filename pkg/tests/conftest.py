from __future__ import annotations

import pytest

from citeforge.corpus import CitationSpan, Corpus, Document, Paragraph, ReferenceEntry


def make_window_document(
    paper_id: str,
    left: list[str],
    citation_sentences: list[str],
    right: list[str],
    citation_mark: str,
    ref_id: str = "ref-0",
    intro_text: str = "This paper studies citation generation.",
    title: str = "A reference paper.",
    abstract: str = "An abstract describing the reference paper in detail.",
) -> Document:
    """Document with one paragraph: left sentences, citation span, right sentences."""
    sentences = list(left) + list(citation_sentences) + list(right)
    text = " ".join(sentences)
    offsets = []
    pos = 0
    for s in sentences:
        offsets.append((pos, pos + len(s)))
        pos += len(s) + 1
    first = len(left)
    last = first + len(citation_sentences) - 1
    char_range = (offsets[first][0], offsets[last][1])
    para = Paragraph(
        para_id=f"{paper_id}-p0",
        text=text,
        sentence_offsets=tuple(offsets),
        citations=(
            CitationSpan(
                span_id=f"{paper_id}-s0",
                sentence_range=(first, last),
                char_range=char_range,
                citation_mark=citation_mark,
                ref_id=ref_id,
            ),
        ),
    )
    return Document(
        paper_id=paper_id,
        partition="test",
        intro_text=intro_text,
        paragraphs=(para,),
        references={
            ref_id: ReferenceEntry(
                ref_id=ref_id, citation_mark=citation_mark, title=title, abstract=abstract
            )
        },
    )


# Hand-built paragraphs exercising realistic citation shapes: masked targets
# mid-paragraph, at the end, multi-sentence citations, and neighboring
# citation marks that must survive masking.

SRL_LEFT = [
    "Broadly speaking, prior work on SRL makes use of syntactic information in two different ways.",
    "Carreras and Marquez (2005); Pradhan et al. (2013) incorporate constituent-structure span-based information, while",
]
SRL_CITATION = ["Haji et al. (2009) incorporate dependency-structure information."]
SRL_MARK = "Haji et al. (2009)"


@pytest.fixture
def srl_document() -> Document:
    return make_window_document("srl", SRL_LEFT, SRL_CITATION, [], SRL_MARK)


def sample_documents() -> list[Document]:
    """A small set of realistic hand-built documents."""
    docs = [make_window_document("srl", SRL_LEFT, SRL_CITATION, [], SRL_MARK)]
    docs.append(
        make_window_document(
            "saliency",
            ["To the best of our knowledge,"],
            [
                "Li et al. (2016) presented the only work that directly employs saliency methods to interpret NLP models."
            ],
            [
                "Most similar to our work in spirit, Ding et al. (1997) used Layer-wise Relevance Propagation (LRP; Bach et al. 2015), an interpretation method resembling saliency, to interpret NLP models."
            ],
            "Li et al. (2016)",
        )
    )
    docs.append(
        make_window_document(
            "curriculum",
            ["Previous work on"],
            [
                "curriculum learning for MT (Kocmi and Bojar, 2017; Wang et al., 2018) proposed methods which feed easier samples to the model first and later show more complex sentences.",
                "However, their focus is on improving convergence time while providing limited success on improving translation quality.",
            ],
            ["In contrast with their work, we train models to focus on translation quality."],
            "(Kocmi and Bojar, 2017; Wang et al., 2018)",
        )
    )
    docs.append(
        make_window_document(
            "embeddings",
            [
                "Rubinstein et al. (2015) demonstrated that state-of-the-art distributional semantic models fail to predict attributive properties of concept words (e.g. the properties is-red and is-round for the word apple) as accurately as taxonomic properties (e.g. is-a-fruit).",
                "Similarly,",
            ],
            [
                "Sommerauer and Fokkens (2018) investigated the types of semantic knowledge encoded within pretrained word embeddings, concluding that some properties cannot be learned by supervised classifiers."
            ],
            [],
            "Sommerauer and Fokkens (2018)",
        )
    )
    docs.append(
        make_window_document(
            "seqlabel",
            [
                "Rei et al. (2016) extended this model to include character embeddings in order to capture morphological similarities such as word endings."
            ],
            [
                "Rei (2017) subsequently added a secondary LM objective to the neural sequence labeling architecture, operating on both word and character-level embeddings.",
                "This was found to be particularly useful for GED -introducing an LM objective allows the network to learn more generic features about language and composition.",
            ],
            [],
            "Rei (2017)",
        )
    )
    return docs


@pytest.fixture
def sample_corpus() -> Corpus:
    return Corpus(documents=sample_documents())
