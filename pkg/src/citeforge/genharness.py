"""Desk-scale encoder-decoder training and decoding harness.

The model is a small transformer seq2seq treated as a black box over
GenerationExample streams. Meta-tokens `[MASK]`, `[SEP]`, `[FIELD]` are
atomic vocabulary items so target extraction stays bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Optional, Sequence

import torch
import torch.nn as nn

from .targets import MASK_TOKEN, SEP_TOKEN, GenerationExample, GenerationOutput, extract_citation

META_TOKENS = (MASK_TOKEN, SEP_TOKEN, "[FIELD]")

PRESETS = {
    "tiny": {"d_model": 64, "nhead": 2, "num_layers": 2, "dim_feedforward": 128},
    "small": {"d_model": 128, "nhead": 4, "num_layers": 3, "dim_feedforward": 256},
}


class HarnessError(Exception):
    pass


@dataclass
class HarnessConfig:
    preset: str = "tiny"
    max_input_len: int = 256
    max_target_len: int = 64
    beam_size: int = 1
    max_decode_len: int = 64
    seed: int = 0
    epochs: int = 200
    batch_size: int = 16
    learning_rate: float = 3e-4
    # {"type": "constant"} or {"type": "linear_warmup", "warmup_steps": N}
    lr_schedule: dict = field(default_factory=lambda: {"type": "constant"})
    # "error" reports target overflow; "truncate" clips and counts it
    on_target_overflow: str = "error"

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise HarnessError(f"unknown preset {self.preset!r}; expected one of {list(PRESETS)}")
        if self.beam_size < 1:
            raise HarnessError("beam_size must be >= 1")

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# tokenizer

_META_RE = re.compile("|".join(re.escape(t) for t in META_TOKENS))


class Vocabulary:
    PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"

    def __init__(self, tokens: Sequence[str]):
        specials = [self.PAD, self.BOS, self.EOS, self.UNK, *META_TOKENS]
        seen = dict.fromkeys(specials)
        for t in tokens:
            seen.setdefault(t)
        self.itos = list(seen)
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def pad_id(self) -> int:
        return self.stoi[self.PAD]

    @property
    def bos_id(self) -> int:
        return self.stoi[self.BOS]

    @property
    def eos_id(self) -> int:
        return self.stoi[self.EOS]

    @staticmethod
    def split(text: str) -> list[str]:
        # Space-pad meta tokens so each maps to exactly one vocabulary id
        # regardless of surrounding punctuation.
        text = _META_RE.sub(lambda m: f" {m.group(0)} ", text)
        return text.split()

    def encode(self, text: str) -> list[int]:
        unk = self.stoi[self.UNK]
        return [self.stoi.get(t, unk) for t in self.split(text)]

    def decode(self, ids: Iterable[int]) -> str:
        skip = {self.pad_id, self.bos_id, self.eos_id}
        return " ".join(self.itos[i] for i in ids if i not in skip)

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocabulary":
        tokens: dict[str, None] = {}
        for text in texts:
            for t in cls.split(text):
                tokens.setdefault(t)
        return cls(list(tokens))

    def to_record(self) -> dict:
        return {"itos": self.itos}

    @classmethod
    def from_record(cls, record: dict) -> "Vocabulary":
        vocab = cls.__new__(cls)
        vocab.itos = list(record["itos"])
        vocab.stoi = {t: i for i, t in enumerate(vocab.itos)}
        return vocab


# ---------------------------------------------------------------------------
# model


class Seq2SeqModel(nn.Module):
    def __init__(self, vocab_size: int, d_model: int, nhead: int, num_layers: int,
                 dim_feedforward: int, max_len: int):
        super().__init__()
        self.d_model = d_model
        self.tok_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        self.transformer = nn.Transformer(
            d_model=d_model,
            nhead=nhead,
            num_encoder_layers=num_layers,
            num_decoder_layers=num_layers,
            dim_feedforward=dim_feedforward,
            dropout=0.0,
            batch_first=True,
        )
        self.out = nn.Linear(d_model, vocab_size)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        return self.tok_emb(ids) * math.sqrt(self.d_model) + self.pos_emb(positions)

    def forward(self, src: torch.Tensor, tgt: torch.Tensor, pad_id: int) -> torch.Tensor:
        src_pad = src.eq(pad_id)
        tgt_pad = tgt.eq(pad_id)
        causal = nn.Transformer.generate_square_subsequent_mask(tgt.size(1), device=tgt.device)
        hidden = self.transformer(
            self._embed(src),
            self._embed(tgt),
            tgt_mask=causal,
            src_key_padding_mask=src_pad,
            tgt_key_padding_mask=tgt_pad,
            memory_key_padding_mask=src_pad,
        )
        return self.out(hidden)

    def encode(self, src: torch.Tensor, pad_id: int):
        src_pad = src.eq(pad_id)
        memory = self.transformer.encoder(self._embed(src), src_key_padding_mask=src_pad)
        return memory, src_pad

    def decode_step(self, memory: torch.Tensor, memory_pad: torch.Tensor,
                    tgt: torch.Tensor) -> torch.Tensor:
        causal = nn.Transformer.generate_square_subsequent_mask(tgt.size(1), device=tgt.device)
        hidden = self.transformer.decoder(
            self._embed(tgt), memory, tgt_mask=causal, memory_key_padding_mask=memory_pad
        )
        return self.out(hidden[:, -1])


# ---------------------------------------------------------------------------
# checkpoint


@dataclass
class Checkpoint:
    config: HarnessConfig
    vocab: Vocabulary
    state_dict: dict
    step: int
    validation_metrics: dict
    mode: str

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        meta = {
            "config": asdict(self.config),
            "fingerprint": self.config.fingerprint(),
            "vocab": self.vocab.to_record(),
            "step": self.step,
            "validation_metrics": self.validation_metrics,
            "mode": self.mode,
        }
        with (path / "checkpoint.json").open("w", encoding="utf-8") as fh:
            json.dump(meta, fh, ensure_ascii=False)
        torch.save(self.state_dict, path / "weights.pt")

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        path = Path(path)
        meta_path = path / "checkpoint.json"
        if not meta_path.exists():
            raise HarnessError(f"no checkpoint at {path}")
        with meta_path.open("r", encoding="utf-8") as fh:
            meta = json.load(fh)
        config = HarnessConfig(**meta["config"])
        if config.fingerprint() != meta["fingerprint"]:
            raise HarnessError("checkpoint config fingerprint mismatch")
        return cls(
            config=config,
            vocab=Vocabulary.from_record(meta["vocab"]),
            state_dict=torch.load(path / "weights.pt", map_location="cpu"),
            step=meta["step"],
            validation_metrics=meta["validation_metrics"],
            mode=meta["mode"],
        )

    def build_model(self) -> Seq2SeqModel:
        preset = PRESETS[self.config.preset]
        max_len = max(self.config.max_input_len, self.config.max_target_len,
                      self.config.max_decode_len) + 2
        model = Seq2SeqModel(vocab_size=len(self.vocab), max_len=max_len, **preset)
        model.load_state_dict(self.state_dict)
        model.eval()
        return model


# ---------------------------------------------------------------------------
# training


def _encode_batch(vocab: Vocabulary, texts: Sequence[str], max_len: int,
                  add_bos_eos: bool) -> torch.Tensor:
    rows = []
    for text in texts:
        ids = vocab.encode(text)
        if add_bos_eos:
            ids = [vocab.bos_id] + ids + [vocab.eos_id]
        rows.append(ids)
    width = max(len(r) for r in rows)
    if width > max_len:
        raise HarnessError(f"sequence of {width} tokens exceeds limit {max_len}")
    out = torch.full((len(rows), width), vocab.pad_id, dtype=torch.long)
    for i, r in enumerate(rows):
        out[i, : len(r)] = torch.tensor(r, dtype=torch.long)
    return out


def _lr_at(config: HarnessConfig, step: int) -> float:
    sched = config.lr_schedule
    if sched.get("type") == "linear_warmup":
        warmup = max(1, int(sched.get("warmup_steps", 100)))
        return config.learning_rate * min(1.0, step / warmup)
    return config.learning_rate


def train(
    config: HarnessConfig,
    train_examples: Sequence[GenerationExample],
    validation_examples: Sequence[GenerationExample],
    log_path: Optional[str | Path] = None,
) -> Checkpoint:
    """Train a small seq2seq and return the best-validation checkpoint.

    Emits a line-delimited JSON loss log ({step, split, loss}) when
    log_path is given.
    """
    train_examples = list(train_examples)
    validation_examples = list(validation_examples)
    if not train_examples:
        raise HarnessError("empty training set")
    modes = {ex.mode for ex in train_examples} | {ex.mode for ex in validation_examples}
    if len(modes) != 1:
        raise HarnessError(f"examples mix modes: {sorted(modes)}")
    mode = modes.pop()

    vocab = Vocabulary.build(
        [ex.input_text for ex in train_examples] + [ex.target_text for ex in train_examples]
    )
    overflow = [
        ex.example_id
        for ex in train_examples + validation_examples
        if len(vocab.encode(ex.target_text)) + 2 > config.max_target_len
    ]
    if overflow and config.on_target_overflow == "error":
        raise HarnessError(
            f"{len(overflow)} targets exceed max_target_len={config.max_target_len}: "
            f"{overflow[:5]}"
        )

    torch.manual_seed(config.seed)
    preset = PRESETS[config.preset]
    max_len = max(config.max_input_len, config.max_target_len, config.max_decode_len) + 2
    model = Seq2SeqModel(vocab_size=len(vocab), max_len=max_len, **preset)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=vocab.pad_id)

    def batches(examples: Sequence[GenerationExample]):
        for i in range(0, len(examples), config.batch_size):
            chunk = examples[i : i + config.batch_size]
            src = _encode_batch(vocab, [ex.input_text for ex in chunk],
                                config.max_input_len, add_bos_eos=False)
            tgt = _encode_batch(vocab, [ex.target_text for ex in chunk],
                                config.max_target_len + 2, add_bos_eos=True)
            yield src, tgt

    log_fh = Path(log_path).open("w", encoding="utf-8") if log_path else None

    def log(step: int, split: str, loss: float):
        if log_fh:
            log_fh.write(json.dumps({"step": step, "split": split, "loss": loss}))
            log_fh.write("\n")

    def validation_loss() -> float:
        if not validation_examples:
            return float("nan")
        model.eval()
        total, count = 0.0, 0
        with torch.no_grad():
            for src, tgt in batches(validation_examples):
                logits = model(src, tgt[:, :-1], vocab.pad_id)
                loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt[:, 1:].reshape(-1))
                n = tgt[:, 1:].ne(vocab.pad_id).sum().item()
                total += loss.item() * n
                count += n
        model.train()
        return total / max(count, 1)

    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    best_val = float("inf")
    best_step = 0
    step = 0
    rng = torch.Generator().manual_seed(config.seed)
    model.train()
    try:
        for epoch in range(config.epochs):
            order = torch.randperm(len(train_examples), generator=rng).tolist()
            shuffled = [train_examples[i] for i in order]
            for src, tgt in batches(shuffled):
                step += 1
                for group in optimizer.param_groups:
                    group["lr"] = _lr_at(config, step)
                optimizer.zero_grad()
                logits = model(src, tgt[:, :-1], vocab.pad_id)
                loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt[:, 1:].reshape(-1))
                loss.backward()
                optimizer.step()
                log(step, "train", loss.item())
            if validation_examples:
                val = validation_loss()
                log(step, "validation", val)
                if val < best_val:
                    best_val = val
                    best_step = step
                    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    finally:
        if log_fh:
            log_fh.close()

    if not validation_examples:
        best_state = {k: v.clone() for k, v in model.state_dict().items()}
        best_step = step
        best_val = float("nan")

    return Checkpoint(
        config=config,
        vocab=vocab,
        state_dict=best_state,
        step=best_step,
        validation_metrics={"loss": best_val},
        mode=mode,
    )


# ---------------------------------------------------------------------------
# decoding


def generate(checkpoint: Checkpoint, input_text: str,
             model: Optional[Seq2SeqModel] = None) -> str:
    """Decode one input. Greedy when beam_size is 1, else beam search.

    Deterministic for a fixed checkpoint: decoding involves no sampling.
    """
    config = checkpoint.config
    vocab = checkpoint.vocab
    ids = vocab.encode(input_text)
    if len(ids) > config.max_input_len:
        raise HarnessError(
            f"input of {len(ids)} tokens exceeds max_input_len={config.max_input_len}; "
            "truncate upstream with the input budget"
        )
    if model is None:
        model = checkpoint.build_model()
    # A fully padded source breaks attention; a lone BOS stands in for
    # the empty input instead.
    src = torch.tensor([ids or [vocab.bos_id]], dtype=torch.long)
    with torch.no_grad():
        memory, memory_pad = model.encode(src, vocab.pad_id)
        if config.beam_size == 1:
            out_ids = _greedy(model, memory, memory_pad, vocab, config.max_decode_len)
        else:
            out_ids = _beam(model, memory, memory_pad, vocab, config.max_decode_len,
                            config.beam_size)
    return vocab.decode(out_ids)


def _greedy(model, memory, memory_pad, vocab: Vocabulary, max_len: int) -> list[int]:
    tgt = torch.tensor([[vocab.bos_id]], dtype=torch.long)
    out: list[int] = []
    for _ in range(max_len):
        logits = model.decode_step(memory, memory_pad, tgt)
        next_id = int(logits.argmax(dim=-1).item())
        if next_id == vocab.eos_id:
            break
        out.append(next_id)
        tgt = torch.cat([tgt, torch.tensor([[next_id]])], dim=1)
    return out


def _beam(model, memory, memory_pad, vocab: Vocabulary, max_len: int, beam: int) -> list[int]:
    # (log_prob, ids, finished)
    hyps: list[tuple[float, list[int], bool]] = [(0.0, [vocab.bos_id], False)]
    for _ in range(max_len):
        candidates: list[tuple[float, list[int], bool]] = []
        for score, ids, finished in hyps:
            if finished:
                candidates.append((score, ids, True))
                continue
            tgt = torch.tensor([ids], dtype=torch.long)
            logits = model.decode_step(memory, memory_pad, tgt)
            logp = torch.log_softmax(logits, dim=-1).squeeze(0)
            top = torch.topk(logp, beam)
            for lp, tok in zip(top.values.tolist(), top.indices.tolist()):
                candidates.append((score + lp, ids + [tok], tok == vocab.eos_id))
        candidates.sort(key=lambda c: (-c[0], c[1]))
        hyps = candidates[:beam]
        if all(f for _, _, f in hyps):
            break
    best = max(hyps, key=lambda c: c[0])
    ids = best[1][1:]  # drop BOS
    if ids and ids[-1] == vocab.eos_id:
        ids = ids[:-1]
    return ids


def generate_batch(
    checkpoint: Checkpoint,
    examples: Iterable[GenerationExample],
    on_error: Optional[list] = None,
) -> list[GenerationOutput]:
    """Decode a stream and extract citations, preserving example_id alignment.

    Per-example failures become degenerate outputs (and an on_error entry);
    they never abort the batch.
    """
    model = checkpoint.build_model()
    outputs = []
    for ex in examples:
        try:
            raw = generate(checkpoint, ex.input_text, model=model)
        except HarnessError as exc:
            if on_error is not None:
                on_error.append((ex.example_id, str(exc)))
            raw = ""
        outputs.append(extract_citation(raw, ex.mode, example_id=ex.example_id))
    return outputs
