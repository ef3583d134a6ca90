"""Command-line entry point wiring the pipeline end to end.

Every command writes its artifact plus a run manifest recording the config
snapshot, input hashes, and tool version, so equal manifests mean
byte-identical dataset outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import click

from . import __version__, autoeval, corpus as corpus_mod, genharness, humaneval as he, targets
from .service import RunStore

EXIT_VALIDATION = 2


def _data_dir() -> Path:
    return Path(os.environ.get("CITEFORGE_DATA_DIR", "citeforge_data"))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path: Path, command: str, config: dict, inputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs if p.exists()},
        "output": str(out_path),
    }
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    with manifest_path.open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _fail(message: str, json_errors: bool) -> None:
    if json_errors:
        click.echo(json.dumps({"error": message}), err=True)
    else:
        click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_VALIDATION)


@click.group()
@click.option("--json-errors", is_flag=True, help="Emit machine-readable error JSON on stderr.")
@click.pass_context
def main(ctx, json_errors):
    ctx.ensure_object(dict)
    ctx.obj["json_errors"] = json_errors


@main.command()
@click.argument("raw_path", type=click.Path(path_type=Path))
@click.argument("out_path", type=click.Path(path_type=Path))
@click.pass_context
def ingest(ctx, raw_path, out_path):
    """Validate a raw corpus export and write the canonical corpus file."""
    try:
        loaded = corpus_mod.load_corpus(raw_path)
        corpus_mod.save_corpus(loaded, out_path)
    except corpus_mod.CorpusError as exc:
        _fail(str(exc), ctx.obj["json_errors"])
    counts = loaded.partition_counts()
    _write_manifest(out_path, "ingest", {}, [raw_path])
    click.echo(json.dumps({"documents": len(loaded), "partitions": counts}))


@main.command()
@click.argument("corpus_path", type=click.Path(path_type=Path))
@click.option("--mode", type=click.Choice(["infilling", "contextualized", "both"]), required=True)
@click.option("--width", type=int, default=3, show_default=True)
@click.option("--budget", type=int, default=4096, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--merge/--no-merge", default=True, show_default=True,
              help="Fold train+distant into the unified training set first.")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Output file; with --mode both, one file per mode is derived from it.")
@click.pass_context
def build(ctx, corpus_path, mode, width, budget, seed, merge, out):
    """Build generation datasets from a corpus."""
    try:
        loaded = corpus_mod.load_corpus(corpus_path)
    except corpus_mod.CorpusError as exc:
        _fail(str(exc), ctx.obj["json_errors"])
        return
    if merge:
        loaded = corpus_mod.merge_training(loaded)
    modes = list(targets.MODES) if mode == "both" else [mode]
    config = {"mode": mode, "width": width, "budget": budget, "seed": seed, "merge": merge}
    summary = {}
    for m in modes:
        out_path = out if mode != "both" else out.with_name(f"{out.stem}.{m}{out.suffix}")
        errors: list = []
        n = targets.write_examples(
            targets.build_dataset(loaded, m, width=width, budget=budget, seed=seed,
                                  on_error=errors),
            out_path,
        )
        _write_manifest(out_path, "build", {**config, "mode": m}, [corpus_path])
        summary[m] = {"examples": n, "skipped": len(errors)}
    click.echo(json.dumps(summary))


@main.command()
@click.argument("dataset", type=click.Path(path_type=Path))
@click.option("--validation", type=click.Path(path_type=Path), default=None,
              help="Validation dataset; defaults to the training set.")
@click.option("--preset", type=click.Choice(["tiny", "small"]), default="tiny", show_default=True)
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-input-len", type=int, default=256, show_default=True)
@click.option("--max-target-len", type=int, default=64, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Checkpoint directory.")
@click.pass_context
def train(ctx, dataset, validation, preset, epochs, seed, max_input_len, max_target_len, out):
    """Train the desk-scale seq2seq model on a dataset."""
    try:
        train_examples = targets.read_examples(dataset)
        val_examples = targets.read_examples(validation) if validation else train_examples
        config = genharness.HarnessConfig(
            preset=preset, epochs=epochs, seed=seed,
            max_input_len=max_input_len, max_target_len=max_target_len,
            max_decode_len=max_target_len,
        )
        out.mkdir(parents=True, exist_ok=True)
        checkpoint = genharness.train(config, train_examples, val_examples,
                                      log_path=out / "metrics.jsonl")
        checkpoint.save(out)
    except (genharness.HarnessError, OSError) as exc:
        _fail(str(exc), ctx.obj["json_errors"])
        return
    _write_manifest(out / "checkpoint.json", "train", asdict(config), [dataset])
    click.echo(json.dumps({"checkpoint": str(out), "step": checkpoint.step,
                           "validation": checkpoint.validation_metrics}))


@main.command()
@click.argument("checkpoint_dir", type=click.Path(path_type=Path))
@click.argument("dataset", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.pass_context
def generate(ctx, checkpoint_dir, dataset, out):
    """Decode a dataset with a trained checkpoint and extract citations."""
    try:
        checkpoint = genharness.Checkpoint.load(checkpoint_dir)
        examples = targets.read_examples(dataset)
    except genharness.HarnessError as exc:
        _fail(str(exc), ctx.obj["json_errors"])
        return
    errors: list = []
    outputs = genharness.generate_batch(checkpoint, examples, on_error=errors)
    targets.write_outputs(outputs, out)
    _write_manifest(out, "generate", {"checkpoint": str(checkpoint_dir)}, [dataset])
    statuses: dict[str, int] = {}
    for o in outputs:
        statuses[o.status] = statuses.get(o.status, 0) + 1
    click.echo(json.dumps({"outputs": len(outputs), "statuses": statuses,
                           "failures": len(errors)}))


@main.command("eval")
@click.argument("outputs_path", type=click.Path(path_type=Path))
@click.argument("dataset", type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.pass_context
def eval_cmd(ctx, outputs_path, dataset, out):
    """Score generated citations against the dataset's ground truth."""
    outputs = targets.read_outputs(outputs_path)
    examples = targets.read_examples(dataset)
    candidates = {o.example_id: o.extracted_citation for o in outputs}
    references = {
        ex.example_id: targets.extract_citation(ex.target_text, ex.mode).extracted_citation
        for ex in examples
    }
    try:
        scores = autoeval.rouge_corpus(candidates, references)
    except autoeval.EvalError as exc:
        _fail(str(exc), ctx.obj["json_errors"])
        return
    verb = autoeval.verb_frequency({"model": candidates.values()})
    report = {
        "aggregate_f1": scores.aggregate_f1,
        "per_example": {
            ex_id: {v: vars(s) for v, s in by_variant.items()}
            for ex_id, by_variant in scores.per_example.items()
        },
        "verb_report": {
            "lexicon": list(verb.lexicon),
            "counts": verb.counts,
            "rates": verb.rates,
        },
    }
    with out.open("w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    _write_manifest(out, "eval", {}, [outputs_path, dataset])
    click.echo(json.dumps({"aggregate_f1": scores.aggregate_f1}))


@main.command()
@click.option("--serve-port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="Defaults to $CITEFORGE_DATA_DIR or ./citeforge_data.")
def serve(serve_port, host, data_dir):
    """Run the human evaluation HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir or _data_dir())
    uvicorn.run(app, host=host, port=serve_port)


@main.command()
@click.argument("run_id")
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.pass_context
def report(ctx, run_id, data_dir):
    """Print tallies and agreement for a human evaluation run."""
    store = RunStore(data_dir or _data_dir())
    try:
        run, log = store.get(run_id)
    except KeyError:
        _fail(f"unknown run {run_id}", ctx.obj["json_errors"])
        return
    pairs = [("contextualized", "baseline"), ("contextualized", "ground_truth")]
    out = {
        "run_id": run_id,
        "tallies": [he.tally(run, log, pair).to_record() for pair in pairs],
        "agreement": he.agreement_report(run, log).to_record(),
    }
    click.echo(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
