"""HTTP+JSON API over the human evaluation module.

Endpoints:
    POST /runs                      create a run
    GET  /runs/{id}/next?judge=     next sample for a judge (anonymized)
    POST /runs/{id}/judgments       submit one judgment
    GET  /runs/{id}/tally?pair=A,B  pairwise preference table
    GET  /runs/{id}/agreement       inter-judge tau-b report

Runs and judgment logs live under a data directory so a stopped server
can be restarted (or reported on offline) without losing anything.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import humaneval as he

DEFAULT_PAIR = ("contextualized", "baseline")


class RunStore:
    """Disk-backed registry of runs and their judgment logs."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._runs: dict[str, he.EvalRun] = {}
        self._logs: dict[str, he.JudgmentLog] = {}

    def _run_path(self, run_id: str) -> Path:
        return self.data_dir / f"{run_id}.run.json"

    def _log_path(self, run_id: str) -> Path:
        return self.data_dir / f"{run_id}.judgments.jsonl"

    def create(self, **kwargs) -> he.EvalRun:
        run = he.create_run(**kwargs)
        self._runs[run.run_id] = run
        self._logs[run.run_id] = he.JudgmentLog(self._log_path(run.run_id))
        with self._run_path(run.run_id).open("w", encoding="utf-8") as fh:
            json.dump(_run_to_record(run), fh, ensure_ascii=False)
        return run

    def get(self, run_id: str) -> tuple[he.EvalRun, he.JudgmentLog]:
        if run_id not in self._runs:
            path = self._run_path(run_id)
            if not path.exists():
                raise KeyError(run_id)
            with path.open("r", encoding="utf-8") as fh:
                self._runs[run_id] = _run_from_record(json.load(fh))
            self._logs[run_id] = he.JudgmentLog(self._log_path(run_id))
        return self._runs[run_id], self._logs[run_id]


def _run_to_record(run: he.EvalRun) -> dict:
    return {
        "run_id": run.run_id,
        "seed": run.seed,
        "groups": run.groups,
        "assignment": run.assignment,
        "system_of": run.system_of,
        "samples": [
            {
                "sample_id": s.sample_id,
                "context": s.context,
                "reference_title": s.reference_title,
                "reference_abstract": s.reference_abstract,
                "candidates": [
                    {"candidate_id": c.candidate_id, "text": c.text, "system": c.system}
                    for c in s.candidates
                ],
            }
            for s in run.samples.values()
        ],
    }


def _run_from_record(record: dict) -> he.EvalRun:
    samples = {}
    for raw in record["samples"]:
        samples[raw["sample_id"]] = he.EvalSample(
            sample_id=raw["sample_id"],
            context=raw["context"],
            reference_title=raw["reference_title"],
            reference_abstract=raw["reference_abstract"],
            candidates=tuple(
                he.Candidate(c["candidate_id"], c["text"], c["system"])
                for c in raw["candidates"]
            ),
        )
    return he.EvalRun(
        run_id=record["run_id"],
        samples=samples,
        groups=record["groups"],
        assignment=record["assignment"],
        seed=record["seed"],
        system_of=record["system_of"],
    )


class CandidateIn(BaseModel):
    system: str
    text: str


class SampleIn(BaseModel):
    sample_id: str
    context: str = ""
    reference_title: str = ""
    reference_abstract: str = ""
    candidates: list[CandidateIn]


class CreateRunRequest(BaseModel):
    samples: list[SampleIn]
    judges: list[str]
    group_count: int = 2
    samples_per_group: int = 30
    seed: int = 0


class JudgmentIn(BaseModel):
    judge_id: str
    sample_id: str
    dimension: str
    ranking: list[list[str]]
    # Optional client token for idempotent retries.
    client_token: Optional[str] = Field(default=None)


def create_app(data_dir: str | Path) -> FastAPI:
    store = RunStore(data_dir)
    app = FastAPI(title="citeforge human evaluation service")
    seen_tokens: dict[str, dict] = {}

    def _get(run_id: str):
        try:
            return store.get(run_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")

    @app.post("/runs")
    def post_run(req: CreateRunRequest):
        try:
            run = store.create(
                samples=[s.model_dump() for s in req.samples],
                judge_roster=req.judges,
                group_count=req.group_count,
                samples_per_group=req.samples_per_group,
                seed=req.seed,
            )
        except he.HumanEvalError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        per_group = len(req.judges) // req.group_count
        return {
            "run_id": run.run_id,
            "groups": run.groups,
            "expected_judgments_per_dimension": per_group
            * req.group_count
            * req.samples_per_group,
        }

    @app.get("/runs/{run_id}/next")
    def get_next(run_id: str, judge: str = Query(...)):
        run, log = _get(run_id)
        try:
            sample = he.next_sample(run, log, judge)
        except he.HumanEvalError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        done, total = he.judge_progress(run, log, judge)
        if sample is None:
            return {"done": True, "progress": {"completed": done, "total": total}}
        return {
            "done": False,
            "progress": {"completed": done, "total": total},
            "sample": sample.public_view(),
            "dimensions": list(he.DIMENSIONS),
        }

    @app.post("/runs/{run_id}/judgments")
    def post_judgment(run_id: str, body: JudgmentIn):
        run, log = _get(run_id)
        if body.client_token is not None:
            token_key = f"{run_id}:{body.client_token}"
            if token_key in seen_tokens:
                return seen_tokens[token_key]
        judgment = he.make_judgment(
            judge_id=body.judge_id,
            sample_id=body.sample_id,
            dimension=body.dimension,
            ranking=body.ranking,
        )
        try:
            he.validate_judgment(run, judgment)
        except he.HumanEvalError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        stamped = log.append(judgment)
        response = {"accepted": True, "seq": stamped.seq}
        if body.client_token is not None:
            seen_tokens[f"{run_id}:{body.client_token}"] = response
        return response

    @app.get("/runs/{run_id}/tally")
    def get_tally(run_id: str, pair: Optional[str] = None):
        run, log = _get(run_id)
        if pair is None:
            system_pair = DEFAULT_PAIR
        else:
            parts = tuple(p.strip() for p in pair.split(","))
            if len(parts) != 2:
                raise HTTPException(status_code=422, detail="pair must be 'systemA,systemB'")
            system_pair = parts
        return he.tally(run, log, system_pair).to_record()

    @app.get("/runs/{run_id}/agreement")
    def get_agreement(run_id: str):
        run, log = _get(run_id)
        return he.agreement_report(run, log).to_record()

    return app
