"""Human preference evaluation: run assignment, judgment capture, tallies,
and Kendall's tau-b inter-judge agreement.

Judges rank three anonymized candidates per sample on four dimensions,
ties allowed. Pairwise preference tables are derived by restricting each
ranking to a system pair. The judgment log is append-only; resubmission
appends a new record and the latest wins.
"""

from __future__ import annotations

import json
import math
import random
import time
import uuid
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

DIMENSIONS = ("fluency", "relevance", "coherence", "overall")
SYSTEMS = ("ground_truth", "baseline", "contextualized")


class HumanEvalError(Exception):
    pass


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    text: str
    system: str  # hidden from clients


@dataclass(frozen=True)
class EvalSample:
    sample_id: str
    context: str
    reference_title: str
    reference_abstract: str
    candidates: tuple[Candidate, ...]  # already in display order

    def public_view(self) -> dict:
        """Client payload; system labels are never serialized."""
        return {
            "sample_id": self.sample_id,
            "context": self.context,
            "reference_title": self.reference_title,
            "reference_abstract": self.reference_abstract,
            "candidates": [
                {"candidate_id": c.candidate_id, "text": c.text} for c in self.candidates
            ],
        }


@dataclass(frozen=True)
class Judgment:
    judge_id: str
    sample_id: str
    dimension: str
    # Ranking as tiers, best first; candidates in one tier are tied.
    ranking: tuple[tuple[str, ...], ...]
    timestamp: float
    seq: int = 0

    def tier_of(self, candidate_id: str) -> int:
        for tier_idx, tier in enumerate(self.ranking):
            if candidate_id in tier:
                return tier_idx
        raise KeyError(candidate_id)

    def to_record(self) -> dict:
        return {
            "seq": self.seq,
            "judge_id": self.judge_id,
            "sample_id": self.sample_id,
            "dimension": self.dimension,
            "ranking": [list(t) for t in self.ranking],
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Judgment":
        return cls(
            judge_id=record["judge_id"],
            sample_id=record["sample_id"],
            dimension=record["dimension"],
            ranking=tuple(tuple(t) for t in record["ranking"]),
            timestamp=record["timestamp"],
            seq=record.get("seq", 0),
        )


@dataclass
class TallyTable:
    system_a: str
    system_b: str
    # dimension -> (prefer_a, prefer_b, indistinguishable)
    cells: dict[str, tuple[int, int, int]] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "pair": [self.system_a, self.system_b],
            "cells": {
                dim: {"prefer_a": a, "prefer_b": b, "indistinguishable": t}
                for dim, (a, b, t) in self.cells.items()
            },
        }


@dataclass
class EvalRun:
    run_id: str
    samples: dict[str, EvalSample]
    groups: list[list[str]]  # judge ids per group
    # judge -> ordered sample ids to rate
    assignment: dict[str, list[str]]
    seed: int
    # candidate_id -> system, server-side only
    system_of: dict[str, str] = field(default_factory=dict)

    @property
    def judges(self) -> list[str]:
        return [j for group in self.groups for j in group]


def create_run(
    samples: Sequence[dict],
    judge_roster: Sequence[str],
    group_count: int = 2,
    samples_per_group: int = 30,
    seed: int = 0,
    run_id: Optional[str] = None,
) -> EvalRun:
    """Split judges into groups and deal each group its samples.

    Candidate order within every sample is shuffled under the run seed so
    position carries no system information. Raises when the roster does not
    divide evenly into groups or there are too few samples.
    """
    if group_count < 1:
        raise HumanEvalError("group_count must be >= 1")
    if len(judge_roster) % group_count != 0:
        raise HumanEvalError(
            f"{len(judge_roster)} judges cannot be split into {group_count} equal groups"
        )
    if len(set(judge_roster)) != len(judge_roster):
        raise HumanEvalError("duplicate judge ids in roster")
    needed = group_count * samples_per_group
    if len(samples) < needed:
        raise HumanEvalError(f"need {needed} samples, got {len(samples)}")

    rng = random.Random(seed)
    run_id = run_id or uuid.uuid4().hex[:12]

    sample_order = list(range(len(samples)))
    rng.shuffle(sample_order)
    chosen = sample_order[:needed]

    built: dict[str, EvalSample] = {}
    system_of: dict[str, str] = {}
    ordered_ids: list[str] = []
    for idx in chosen:
        raw = samples[idx]
        sample_id = str(raw["sample_id"])
        if sample_id in built:
            raise HumanEvalError(f"duplicate sample_id {sample_id!r}")
        cands = list(raw["candidates"])
        rng.shuffle(cands)
        candidates = []
        for k, c in enumerate(cands):
            cid = f"{sample_id}.c{k + 1}"
            candidates.append(Candidate(candidate_id=cid, text=c["text"], system=c["system"]))
            system_of[cid] = c["system"]
        built[sample_id] = EvalSample(
            sample_id=sample_id,
            context=raw.get("context", ""),
            reference_title=raw.get("reference_title", ""),
            reference_abstract=raw.get("reference_abstract", ""),
            candidates=tuple(candidates),
        )
        ordered_ids.append(sample_id)

    per_group = len(judge_roster) // group_count
    groups = [
        list(judge_roster[g * per_group : (g + 1) * per_group]) for g in range(group_count)
    ]
    assignment: dict[str, list[str]] = {}
    for g, group in enumerate(groups):
        group_samples = ordered_ids[g * samples_per_group : (g + 1) * samples_per_group]
        for judge in group:
            assignment[judge] = list(group_samples)

    return EvalRun(
        run_id=run_id,
        samples=built,
        groups=groups,
        assignment=assignment,
        seed=seed,
        system_of=system_of,
    )


# ---------------------------------------------------------------------------
# judgment store


class JudgmentLog:
    """Append-only on-disk log, one JSON judgment per line, increasing seq."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._judgments: list[Judgment] = []
        self._next_seq = 1
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._judgments.append(Judgment.from_record(json.loads(line)))
            if self._judgments:
                self._next_seq = max(j.seq for j in self._judgments) + 1

    def append(self, judgment: Judgment) -> Judgment:
        stamped = Judgment(
            judge_id=judgment.judge_id,
            sample_id=judgment.sample_id,
            dimension=judgment.dimension,
            ranking=judgment.ranking,
            timestamp=judgment.timestamp,
            seq=self._next_seq,
        )
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(stamped.to_record(), ensure_ascii=False))
            fh.write("\n")
        self._judgments.append(stamped)
        self._next_seq += 1
        return stamped

    def all(self) -> list[Judgment]:
        return list(self._judgments)

    def latest(self) -> dict[tuple[str, str, str], Judgment]:
        """Live judgment per (judge, sample, dimension); resubmission wins."""
        live: dict[tuple[str, str, str], Judgment] = {}
        for j in sorted(self._judgments, key=lambda j: j.seq):
            live[(j.judge_id, j.sample_id, j.dimension)] = j
        return live


def validate_judgment(run: EvalRun, judgment: Judgment) -> None:
    if judgment.sample_id not in run.samples:
        raise HumanEvalError(f"unknown sample_id {judgment.sample_id!r}")
    if judgment.judge_id not in run.assignment:
        raise HumanEvalError(f"judge {judgment.judge_id!r} not in this run")
    if judgment.sample_id not in run.assignment[judgment.judge_id]:
        raise HumanEvalError(
            f"sample {judgment.sample_id!r} not assigned to judge {judgment.judge_id!r}"
        )
    if judgment.dimension not in DIMENSIONS:
        raise HumanEvalError(f"unknown dimension {judgment.dimension!r}")
    expected = {c.candidate_id for c in run.samples[judgment.sample_id].candidates}
    ranked = [cid for tier in judgment.ranking for cid in tier]
    if sorted(ranked) != sorted(expected):
        raise HumanEvalError(
            f"ranking must cover exactly the sample's candidates {sorted(expected)}"
        )


def next_sample(run: EvalRun, log: JudgmentLog, judge_id: str) -> Optional[EvalSample]:
    """First assigned sample the judge has not fully rated; None when done."""
    if judge_id not in run.assignment:
        raise HumanEvalError(f"judge {judge_id!r} not in this run")
    live = log.latest()
    for sample_id in run.assignment[judge_id]:
        if any((judge_id, sample_id, dim) not in live for dim in DIMENSIONS):
            return run.samples[sample_id]
    return None


def judge_progress(run: EvalRun, log: JudgmentLog, judge_id: str) -> tuple[int, int]:
    live = log.latest()
    assigned = run.assignment.get(judge_id, [])
    done = sum(
        1
        for sid in assigned
        if all((judge_id, sid, dim) in live for dim in DIMENSIONS)
    )
    return done, len(assigned)


# ---------------------------------------------------------------------------
# tallies


def _pairwise_choice(run: EvalRun, judgment: Judgment, system_a: str, system_b: str) -> Optional[int]:
    """Restrict a ranking to one system pair: +1 prefer A, -1 prefer B, 0 tie.

    None when the sample lacks one of the systems.
    """
    sample = run.samples[judgment.sample_id]
    cid_a = cid_b = None
    for c in sample.candidates:
        if c.system == system_a:
            cid_a = c.candidate_id
        elif c.system == system_b:
            cid_b = c.candidate_id
    if cid_a is None or cid_b is None:
        return None
    ta, tb = judgment.tier_of(cid_a), judgment.tier_of(cid_b)
    return 0 if ta == tb else (1 if ta < tb else -1)


def tally(run: EvalRun, log: JudgmentLog, system_pair: tuple[str, str]) -> TallyTable:
    """Pairwise preference counts per dimension, summed over judges and samples."""
    system_a, system_b = system_pair
    table = TallyTable(system_a=system_a, system_b=system_b)
    counts = {dim: [0, 0, 0] for dim in DIMENSIONS}
    for judgment in log.latest().values():
        choice = _pairwise_choice(run, judgment, system_a, system_b)
        if choice is None:
            continue
        idx = {1: 0, -1: 1, 0: 2}[choice]
        counts[judgment.dimension][idx] += 1
    table.cells = {dim: tuple(c) for dim, c in counts.items()}
    return table


# ---------------------------------------------------------------------------
# Kendall's tau-b


def kendall_tau_b(x: Sequence[int], y: Sequence[int]) -> Optional[float]:
    """Tie-corrected Kendall rank correlation between two ordinal vectors.

    Uses tau-b = (C - D) / sqrt((n0 - n1)(n0 - n2)) where n1, n2 count
    tied pairs within each vector. A constant vector has an undefined
    tau-b and returns None.
    """
    if len(x) != len(y):
        raise HumanEvalError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise HumanEvalError("need at least 2 observations")
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            prod = (x[i] - x[j]) * (y[i] - y[j])
            if prod > 0:
                concordant += 1
            elif prod < 0:
                discordant += 1
    n0 = n * (n - 1) // 2

    def tie_pairs(v: Sequence[int]) -> int:
        counts: dict[int, int] = {}
        for value in v:
            counts[value] = counts.get(value, 0) + 1
        return sum(c * (c - 1) // 2 for c in counts.values())

    n1, n2 = tie_pairs(x), tie_pairs(y)
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0:
        return None
    return (concordant - discordant) / denom


@dataclass
class AgreementReport:
    # (judge_a, judge_b) -> dimension -> tau-b (None when undefined)
    per_pair: dict[tuple[str, str], dict[str, Optional[float]]] = field(default_factory=dict)
    # (judge_a, judge_b) -> tau-b over all dimensions pooled
    pooled: dict[tuple[str, str], Optional[float]] = field(default_factory=dict)
    # excluded judge -> mean pooled tau-b over remaining pairs
    leave_one_out: dict[str, Optional[float]] = field(default_factory=dict)
    reason: Optional[str] = None

    def to_record(self) -> dict:
        return {
            "per_pair": [
                {"judges": list(pair), "tau_b": taus}
                for pair, taus in self.per_pair.items()
            ],
            "pooled": [
                {"judges": list(pair), "tau_b": tau} for pair, tau in self.pooled.items()
            ],
            "leave_one_out": self.leave_one_out,
            "reason": self.reason,
        }


def _choice_vector(
    run: EvalRun,
    live: dict[tuple[str, str, str], Judgment],
    judge: str,
    dimensions: Iterable[str],
) -> dict[tuple[str, str, str, str, str], int]:
    """Judge's pairwise choices keyed by (sample, dim, sys_a, sys_b).

    Orientation is fixed by lexicographic system order so two judges'
    vectors align element for element.
    """
    out: dict[tuple[str, str, str, str, str], int] = {}
    for sample_id in run.assignment.get(judge, []):
        sample = run.samples[sample_id]
        systems = sorted({c.system for c in sample.candidates})
        for dim in dimensions:
            judgment = live.get((judge, sample_id, dim))
            if judgment is None:
                continue
            for sys_a, sys_b in combinations(systems, 2):
                choice = _pairwise_choice(run, judgment, sys_a, sys_b)
                if choice is not None:
                    out[(sample_id, dim, sys_a, sys_b)] = choice
    return out


def agreement_report(run: EvalRun, log: JudgmentLog) -> AgreementReport:
    """Pairwise tau-b between judges sharing samples, per dimension and pooled."""
    report = AgreementReport()
    live = log.latest()
    pairs_found = False
    for group in run.groups:
        for judge_a, judge_b in combinations(group, 2):
            vecs_a_pooled: list[int] = []
            vecs_b_pooled: list[int] = []
            per_dim: dict[str, Optional[float]] = {}
            for dim in DIMENSIONS:
                va = _choice_vector(run, live, judge_a, [dim])
                vb = _choice_vector(run, live, judge_b, [dim])
                shared = sorted(set(va) & set(vb))
                if len(shared) < 2:
                    per_dim[dim] = None
                    continue
                xa = [va[k] for k in shared]
                xb = [vb[k] for k in shared]
                per_dim[dim] = kendall_tau_b(xa, xb)
                vecs_a_pooled.extend(xa)
                vecs_b_pooled.extend(xb)
            if len(vecs_a_pooled) < 2:
                continue
            pairs_found = True
            report.per_pair[(judge_a, judge_b)] = per_dim
            report.pooled[(judge_a, judge_b)] = kendall_tau_b(vecs_a_pooled, vecs_b_pooled)
    if not pairs_found:
        report.reason = "no judge pairs with overlapping judged samples"
        return report

    for judge in run.judges:
        remaining = [
            tau
            for pair, tau in report.pooled.items()
            if judge not in pair and tau is not None
        ]
        report.leave_one_out[judge] = (
            sum(remaining) / len(remaining) if remaining else None
        )
    return report


def make_judgment(
    judge_id: str,
    sample_id: str,
    dimension: str,
    ranking: Sequence[Sequence[str]],
    timestamp: Optional[float] = None,
) -> Judgment:
    return Judgment(
        judge_id=judge_id,
        sample_id=sample_id,
        dimension=dimension,
        ranking=tuple(tuple(t) for t in ranking),
        timestamp=time.time() if timestamp is None else timestamp,
    )
