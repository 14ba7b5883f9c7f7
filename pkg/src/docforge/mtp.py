"""Multi-token-prediction decoding simulator over n-gram models.

A draft predictor proposes ``k`` tokens by feeding on its own outputs; the
target model checks them greedily. Each step emits the accepted prefix plus
one token from the target, so the output always equals plain greedy
decoding with the target.
"""

from __future__ import annotations

import enum
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

BOS = "<s>"
EOS = "</s>"


class EmptyCorpus(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass
class NGramModel:
    order: int
    counts: dict[tuple[str, ...], Counter]
    vocab: list[str]

    def __post_init__(self):
        self._index = {tok: i for i, tok in enumerate(self.vocab)}
        self._argmax: dict[tuple[str, ...], str] = {}

    def context_of(self, history: Sequence[str]) -> tuple[str, ...]:
        n = self.order - 1
        if n == 0:
            return ()
        tail = list(history[-n:])
        return tuple([BOS] * (n - len(tail)) + tail)

    def prob(self, token: str, history: Sequence[str]) -> float:
        """Add-one smoothed conditional probability."""
        c = self.counts.get(self.context_of(history), Counter())
        return (c[token] + 1) / (sum(c.values()) + len(self.vocab))

    def distribution(self, history: Sequence[str]) -> dict[str, float]:
        return {tok: self.prob(tok, history) for tok in self.vocab}

    def index(self, token: str) -> int:
        return self._index[token]


def tokenize_corpus(text: str) -> list[list[str]]:
    """One document per non-empty line, whitespace tokens."""
    return [line.split() for line in text.splitlines() if line.strip()]


def train_ngram(corpus: Iterable[Sequence[str]], order: int) -> NGramModel:
    """Count order-grams over BOS/EOS-padded documents.

    The vocabulary lists tokens in order of first appearance, EOS last.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    docs = [list(d) for d in corpus]
    if not docs or not any(docs):
        raise EmptyCorpus("corpus has no tokens")
    counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    vocab: dict[str, None] = {}
    for doc in docs:
        for tok in doc:
            vocab.setdefault(tok, None)
        padded = [BOS] * (order - 1) + doc + [EOS]
        for i in range(order - 1, len(padded)):
            counts[tuple(padded[i - order + 1:i])][padded[i]] += 1
    vocab.pop(EOS, None)
    return NGramModel(order, dict(counts), list(vocab) + [EOS])


def greedy_next(model: NGramModel, context: Sequence[str]) -> str:
    """Most probable next token; ties go to the lowest vocabulary index."""
    ctx = model.context_of(context)
    cached = model._argmax.get(ctx)
    if cached is not None:
        return cached
    c = model.counts.get(ctx)
    if not c:
        best = model.vocab[0]
    else:
        top = max(c.values())
        best = min((t for t, v in c.items() if v == top), key=model.index)
    model._argmax[ctx] = best
    return best


def ar_decode(model: NGramModel, prompt: Sequence[str], max_len: int) -> list[str]:
    """Token-by-token greedy continuation of ``prompt`` (EOS included when reached)."""
    if EOS in prompt:
        return []
    ctx = list(prompt)
    out: list[str] = []
    while len(out) < max_len:
        tok = greedy_next(model, ctx)
        out.append(tok)
        ctx.append(tok)
        if tok == EOS:
            break
    return out


class DraftMode(str, enum.Enum):
    ORACLE = "oracle"
    LOWER_ORDER = "lower_order"
    NOISY = "noisy"


@dataclass(frozen=True)
class MtpConfig:
    k: int = 10
    max_len: int = 256
    draft_mode: DraftMode = DraftMode.ORACLE
    draft_order: int = 2
    accuracy: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_len < 0:
            raise ValueError("max_len must be >= 0")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("noisy draft accuracy must lie in [0, 1]")

    def describe(self) -> str:
        if self.draft_mode is DraftMode.LOWER_ORDER:
            return f"lower_order({self.draft_order})"
        if self.draft_mode is DraftMode.NOISY:
            return f"noisy({self.accuracy})"
        return "oracle"


@dataclass(frozen=True)
class Step:
    accepted: int
    emitted: int


@dataclass
class DecodeTrace:
    k: int
    steps: list[Step] = field(default_factory=list)

    @property
    def total_tokens(self) -> int:
        return sum(s.emitted for s in self.steps)

    @property
    def mean_tokens_per_step(self) -> float:
        return self.total_tokens / len(self.steps) if self.steps else 0.0


def _propose(target: NGramModel, draft: Optional[NGramModel], cfg: MtpConfig,
             ctx: list[str], rng: random.Random) -> list[str]:
    proposals: list[str] = []
    local = list(ctx)
    for _ in range(cfg.k):
        if cfg.draft_mode is DraftMode.LOWER_ORDER:
            tok = greedy_next(draft, local)
        else:
            tok = greedy_next(target, local)
            if cfg.draft_mode is DraftMode.NOISY and rng.random() >= cfg.accuracy:
                wrong = [t for t in target.vocab if t != tok]
                tok = rng.choice(wrong) if wrong else tok
        proposals.append(tok)
        local.append(tok)
        if tok == EOS:
            break
    return proposals


def mtp_decode(target: NGramModel, draft: Optional[NGramModel], cfg: MtpConfig,
               prompt: Sequence[str]) -> tuple[list[str], DecodeTrace]:
    """Draft-and-verify decoding; returns the tokens and the per-step trace.

    ``draft`` is only consulted in LOWER_ORDER mode. A verified EOS closes the
    step and the run, and counts as the step's target token. The final step
    may be cut short by ``max_len``.
    """
    if cfg.draft_mode is DraftMode.LOWER_ORDER:
        if draft is None:
            raise ValueError("lower-order drafting needs a draft model")
        if draft.vocab != target.vocab:
            raise ValueError("draft and target vocabularies differ")
    trace = DecodeTrace(cfg.k)
    if EOS in prompt:
        return [], trace
    rng = random.Random(cfg.seed)
    ctx = list(prompt)
    out: list[str] = []
    while len(out) < cfg.max_len and (not out or out[-1] != EOS):
        proposals = _propose(target, draft, cfg, ctx, rng)
        emitted: list[str] = []
        accepted = 0
        for tok in proposals:
            truth = greedy_next(target, ctx + emitted)
            if tok != truth:
                break
            emitted.append(tok)
            if tok == EOS:
                break
            accepted += 1
        if not emitted or emitted[-1] != EOS:
            emitted.append(greedy_next(target, ctx + emitted))
        room = cfg.max_len - len(out)
        if len(emitted) > room:
            emitted = emitted[:room]
            accepted = min(accepted, room)
        out.extend(emitted)
        ctx.extend(emitted)
        trace.steps.append(Step(accepted, len(emitted)))
    return out, trace


@dataclass
class AcceptanceStats:
    k: int
    runs: int
    steps: int
    total_tokens: int
    mean_tokens_per_step: float
    histogram: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "runs": self.runs,
            "steps": self.steps,
            "total_tokens": self.total_tokens,
            "mean_tokens_per_step": self.mean_tokens_per_step,
            "histogram": {str(a): n for a, n in sorted(self.histogram.items())},
        }


def acceptance_stats(traces: Sequence[DecodeTrace]) -> AcceptanceStats:
    """Pool traces: tokens over steps, and a histogram of accepted lengths."""
    if not traces:
        raise EmptyInput("no traces")
    steps = [s for t in traces for s in t.steps]
    total = sum(s.emitted for s in steps)
    hist = Counter(s.accepted for s in steps)
    return AcceptanceStats(
        k=max(t.k for t in traces),
        runs=len(traces),
        steps=len(steps),
        total_tokens=total,
        mean_tokens_per_step=total / len(steps) if steps else 0.0,
        histogram=dict(sorted(hist.items())),
    )


def speedup_estimate(stats: AcceptanceStats, cost_ratio: float) -> float:
    """Tokens per unit of target-step cost when each draft costs ``cost_ratio``."""
    if cost_ratio < 0:
        raise ValueError("cost ratio must be >= 0")
    return stats.mean_tokens_per_step / (1 + stats.k * cost_ratio)


# -- synthetic corpora ------------------------------------------------------


def table_tag_corpus(lines: int, seed: int = 0, max_rows: int = 4, max_cols: int = 4) -> list[list[str]]:
    """HTML-table token streams with random shapes and small numeric cells."""
    rng = random.Random(seed)
    docs = []
    for _ in range(lines):
        rows, cols = rng.randint(1, max_rows), rng.randint(1, max_cols)
        doc = ["<table>"]
        for _ in range(rows):
            doc.append("<tr>")
            for _ in range(cols):
                doc += ["<td>", str(rng.randint(0, 9)), "</td>"]
            doc.append("</tr>")
        doc.append("</table>")
        docs.append(doc)
    return docs


def random_corpus(n_tokens: int, vocab_size: int = 50, seed: int = 0,
                  line_length: int = 40) -> list[list[str]]:
    """Uniformly random tokens ``w0``..``w{vocab_size-1}`` cut into lines."""
    rng = random.Random(seed)
    toks = [f"w{rng.randrange(vocab_size)}" for _ in range(n_tokens)]
    return [toks[i:i + line_length] for i in range(0, len(toks), line_length)]


def corpus_text(docs: Iterable[Sequence[str]]) -> str:
    return "".join(" ".join(d) + "\n" for d in docs)
