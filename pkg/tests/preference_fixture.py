"""Construct a judgment log that reproduces a given pairwise preference table.

Used as a regression fixture: the published three-way counts are targets
for the tally math, not reproduced experimental outcomes.
"""

from __future__ import annotations

from citeforge import humaneval as he

# Target counts per dimension: (prefer_contextualized, prefer_other, indistinguishable)
VS_BASELINE = {
    "fluency": (12, 33, 135),
    "relevance": (49, 44, 87),
    "coherence": (41, 36, 103),
    "overall": (53, 50, 77),
}
VS_GROUND_TRUTH = {
    "fluency": (19, 18, 143),
    "relevance": (38, 13, 129),
    "coherence": (28, 21, 131),
    "overall": (27, 18, 135),
}

JUDGES = [f"judge-{i}" for i in range(6)]


def make_samples(n: int = 60) -> list[dict]:
    return [
        {
            "sample_id": f"sample-{i:03d}",
            "context": f"Context paragraph {i} with [MASK].",
            "reference_title": f"Reference title {i}.",
            "reference_abstract": f"Reference abstract {i}.",
            "candidates": [
                {"system": "ground_truth", "text": f"Ground citation {i}."},
                {"system": "baseline", "text": f"Baseline citation {i}."},
                {"system": "contextualized", "text": f"Contextual citation {i}."},
            ],
        }
        for i in range(n)
    ]


def _outcome_sequence(counts: tuple[int, int, int]) -> list[int]:
    prefer_a, prefer_b, ties = counts
    return [1] * prefer_a + [-1] * prefer_b + [0] * ties


def _ranking_from_choices(sample: he.EvalSample, vs_base: int, vs_gt: int) -> list[list[str]]:
    """Ranking with ties whose pairwise restrictions hit the wanted outcomes.

    Scores: contextualized fixed at 0; each competitor sits one tier above
    or below (or level) according to the wanted choice.
    """
    scores = {}
    for cand in sample.candidates:
        if cand.system == "contextualized":
            scores[cand.candidate_id] = 0
        elif cand.system == "baseline":
            scores[cand.candidate_id] = vs_base * -1
        else:
            scores[cand.candidate_id] = vs_gt * -1
    tiers: dict[int, list[str]] = {}
    for cid, score in scores.items():
        tiers.setdefault(score, []).append(cid)
    return [sorted(tiers[s]) for s in sorted(tiers, reverse=True)]


def build_regression_run(data_dir) -> tuple[he.EvalRun, he.JudgmentLog]:
    """Seeded 6-judge run whose tallies reproduce the target tables exactly."""
    run = he.create_run(
        samples=make_samples(60),
        judge_roster=JUDGES,
        group_count=2,
        samples_per_group=30,
        seed=99,
        run_id="regression",
    )
    log = he.JudgmentLog(data_dir / "regression.judgments.jsonl")
    slots = [
        (judge, sample_id)
        for group in run.groups
        for judge in group
        for sample_id in run.assignment[judge]
    ]
    assert len(slots) == 180
    for dim in he.DIMENSIONS:
        base_seq = _outcome_sequence(VS_BASELINE[dim])
        gt_seq = _outcome_sequence(VS_GROUND_TRUTH[dim])
        for (judge, sample_id), vs_base, vs_gt in zip(slots, base_seq, gt_seq):
            ranking = _ranking_from_choices(run.samples[sample_id], vs_base, vs_gt)
            log.append(he.make_judgment(judge, sample_id, dim, ranking, timestamp=0.0))
    return run, log
