"""Automatic evaluation: ROUGE-1/2/L and action-verb frequency.

Tokenization is lowercase, split on non-alphanumeric runs, no stemming.
Verb matching uses suffix rules (exact, +s, +ed, +ing with e-drop)
rather than a lemmatizer.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

VARIANTS = ("R1", "R2", "RL")

DEFAULT_VERB_LEXICON = ("extend", "improve", "propose", "introduce", "build", "follow")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EvalError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    # Set when the reference side was empty and recall is undefined.
    empty_reference: bool = False


def _prf(overlap: float, cand_total: int, ref_total: int) -> RougeScore:
    if ref_total == 0:
        p = overlap / cand_total if cand_total else 0.0
        return RougeScore(precision=p, recall=0.0, f1=0.0, empty_reference=True)
    p = overlap / cand_total if cand_total else 0.0
    r = overlap / ref_total
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return RougeScore(precision=p, recall=r, f1=f1)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge(candidate: str, reference: str, variant: str) -> RougeScore:
    """ROUGE precision/recall/F1 for one candidate/reference pair.

    An empty reference makes recall undefined; it is reported as zero with
    the empty_reference flag set.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if variant == "RL":
        lcs = _lcs_len(cand, ref)
        return _prf(lcs, len(cand), len(ref))
    n = 1 if variant == "R1" else 2
    cand_ngrams = _ngrams(cand, n)
    ref_ngrams = _ngrams(ref, n)
    overlap = sum((cand_ngrams & ref_ngrams).values())
    return _prf(overlap, sum(cand_ngrams.values()), sum(ref_ngrams.values()))


def rouge_all(candidate: str, reference: str) -> dict[str, RougeScore]:
    return {v: rouge(candidate, reference, v) for v in VARIANTS}


@dataclass
class CorpusRouge:
    aggregate_f1: dict[str, float]
    per_example: dict[str, dict[str, RougeScore]]


def rouge_corpus(outputs: dict[str, str], references: dict[str, str]) -> CorpusRouge:
    """Mean per-pair F1 per variant plus the per-pair breakdown.

    Outputs and references must be aligned by id; an empty or mismatched
    set is an error, never a silent NaN.
    """
    if not outputs:
        raise EvalError("no output/reference pairs to score")
    missing_refs = sorted(set(outputs) - set(references))
    missing_outs = sorted(set(references) - set(outputs))
    if missing_refs or missing_outs:
        raise EvalError(
            f"id mismatch: missing references {missing_refs}, missing outputs {missing_outs}"
        )
    per_example = {ex_id: rouge_all(outputs[ex_id], references[ex_id]) for ex_id in outputs}
    aggregate = {
        v: sum(scores[v].f1 for scores in per_example.values()) / len(per_example)
        for v in VARIANTS
    }
    return CorpusRouge(aggregate_f1=aggregate, per_example=per_example)


# ---------------------------------------------------------------------------
# action-verb frequency


def _verb_forms(lemma: str) -> set[str]:
    forms = {lemma, lemma + "s", lemma + "ed", lemma + "ing"}
    if lemma.endswith("e"):
        forms.add(lemma[:-1] + "ed")
        forms.add(lemma[:-1] + "ing")
    return forms


@dataclass
class VerbReport:
    lexicon: tuple[str, ...]
    # per system: lemma -> number of citations containing that lemma
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    # per system: citations with >=1 lexicon hit / total citations
    rates: dict[str, float] = field(default_factory=dict)
    totals: dict[str, int] = field(default_factory=dict)


def verb_frequency(
    outputs_by_system: dict[str, Iterable[str]],
    lexicon: Sequence[str] = DEFAULT_VERB_LEXICON,
) -> VerbReport:
    """Count citations containing an action verb, per system."""
    lexicon = tuple(lexicon)
    form_to_lemma: dict[str, str] = {}
    for lemma in lexicon:
        for form in _verb_forms(lemma):
            form_to_lemma[form] = lemma
    report = VerbReport(lexicon=lexicon)
    for system, citations in outputs_by_system.items():
        lemma_counts = {lemma: 0 for lemma in lexicon}
        total = 0
        hits = 0
        for citation in citations:
            total += 1
            found = {form_to_lemma[t] for t in tokenize(citation) if t in form_to_lemma}
            for lemma in found:
                lemma_counts[lemma] += 1
            if found:
                hits += 1
        report.counts[system] = lemma_counts
        report.totals[system] = total
        report.rates[system] = hits / total if total else 0.0
    return report
