import random

import pytest

from docforge.mtp import (
    EOS,
    DraftMode,
    EmptyCorpus,
    EmptyInput,
    MtpConfig,
    acceptance_stats,
    ar_decode,
    AcceptanceStats,
    DecodeTrace,
    Step,
    greedy_next,
    mtp_decode,
    random_corpus,
    speedup_estimate,
    table_tag_corpus,
    train_ngram,
)
from oracles import resimulate_mean_tokens_per_step


def alternating():
    return train_ngram([["a", "b", "a", "b"]], 2)


def test_train_alternation():
    m = alternating()
    assert m.prob("b", ["a"]) > 2 * m.prob("a", ["a"])
    assert sum(m.distribution(["a"]).values()) == pytest.approx(1.0)


def test_unigram_symmetry():
    m = train_ngram([["a", "b"], ["b", "a"]], 1)
    assert m.prob("a", []) == m.prob("b", [])


def test_trigram_fixture():
    # trigram counts by hand: (<table>,<tr>) -> <td> x2 ; (<tr>,<td>) -> x x2
    corpus = [["<table>", "<tr>", "<td>", "x", "</td>", "</tr>", "</table>"]] * 2
    m = train_ngram(corpus, 3)
    assert m.counts[("<table>", "<tr>")]["<td>"] == 2
    assert greedy_next(m, ["<table>", "<tr>"]) == "<td>"
    # a one-token history is padded with BOS, and (<s>, <tr>) was never seen
    assert greedy_next(m, ["<tr>"]) == m.vocab[0]
    assert greedy_next(m, ["<tr>", "<td>"]) == "x"


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train_ngram([], 2)
    with pytest.raises(EmptyCorpus):
        train_ngram([[]], 2)


def test_greedy_tie_break():
    m = alternating()
    assert greedy_next(m, ["b"]) == "a"  # a and EOS tie after b; a comes first
    uniform = train_ngram([["x", "y"], ["y", "x"]], 1)
    assert m.vocab[0] == "a"
    assert greedy_next(uniform, []) == uniform.vocab[0]
    assert greedy_next(m, ["unseen"]) == m.vocab[0]


def test_ar_decode():
    m = alternating()
    assert ar_decode(m, ["a"], 0) == []
    assert ar_decode(m, ["a"], 4) == ["b", "a", "b", "a"]
    assert ar_decode(m, ["a", EOS], 4) == []
    stop = train_ngram([["a", "b"]], 2)
    assert ar_decode(stop, ["a"], 10) == ["b", EOS]


def cyclic_corpus():
    return [("<tr> <td> x </td> </tr> " * 60).split()]


def test_oracle_mode_emits_k_plus_one():
    m = train_ngram(cyclic_corpus(), 3)
    cfg = MtpConfig(k=10, max_len=110, draft_mode=DraftMode.ORACLE)
    out, trace = mtp_decode(m, None, cfg, ["<tr>"])
    assert out == ar_decode(m, ["<tr>"], 110)
    assert [s.emitted for s in trace.steps] == [11] * 10
    assert trace.mean_tokens_per_step == 11.0


def test_noisy_zero_never_accepts():
    m = train_ngram(cyclic_corpus(), 3)
    cfg = MtpConfig(k=4, max_len=30, draft_mode=DraftMode.NOISY, accuracy=0.0, seed=1)
    out, trace = mtp_decode(m, None, cfg, ["<tr>"])
    assert out == ar_decode(m, ["<tr>"], 30)
    assert all(s.accepted == 0 and s.emitted == 1 for s in trace.steps)


def test_eos_and_truncation():
    m = train_ngram([["a", "b", "c"]], 2)
    out, trace = mtp_decode(m, None, MtpConfig(k=10, max_len=50), ["a"])
    assert out == ["b", "c", EOS]
    assert [(s.accepted, s.emitted) for s in trace.steps] == [(2, 3)]
    out, trace = mtp_decode(m, None, MtpConfig(k=10, max_len=2), ["a"])
    assert out == ["b", "c"] and trace.total_tokens == 2


def test_lower_order_matches_independent_resimulation():
    docs = table_tag_corpus(150, seed=4)
    target, draft = train_ngram(docs, 4), train_ngram(docs, 2)
    cfg = MtpConfig(k=10, max_len=150, draft_mode=DraftMode.LOWER_ORDER)
    total_steps = total_tokens = 0
    ref_steps = ref_tokens = 0
    for seed in range(10):
        prompt = random.Random(seed).choice(docs)[:3]
        out, trace = mtp_decode(target, draft, cfg, prompt)
        ref_out, per_step = resimulate_mean_tokens_per_step(
            lambda c: greedy_next(target, c), lambda c: greedy_next(draft, c), 10, prompt, 150, EOS
        )
        assert out == ref_out
        assert [s.emitted for s in trace.steps] == per_step
        total_steps += len(trace.steps)
        total_tokens += trace.total_tokens
        ref_steps += len(per_step)
        ref_tokens += sum(per_step)
    assert total_tokens / total_steps == ref_tokens / ref_steps


@pytest.mark.parametrize("mode", list(DraftMode))
def test_losslessness_random(mode):
    for seed in range(15):
        rng = random.Random(seed)
        docs = random_corpus(rng.randint(20, 200), vocab_size=rng.randint(2, 8), seed=seed, line_length=rng.randint(3, 12))
        target = train_ngram(docs, rng.randint(1, 4))
        draft = train_ngram(docs, rng.randint(1, 3))
        prompt = rng.choice(docs)[: rng.randint(1, 3)]
        cfg = MtpConfig(k=rng.randint(1, 10), max_len=rng.randint(0, 80), draft_mode=mode, accuracy=rng.random(), seed=seed)
        out, trace = mtp_decode(target, draft, cfg, prompt)
        assert out == ar_decode(target, prompt, cfg.max_len)
        assert all(1 <= s.emitted <= cfg.k + 1 for s in trace.steps)
        assert trace.total_tokens == len(out)


def test_determinism():
    docs = random_corpus(300, 6, seed=2)
    t = train_ngram(docs, 3)
    cfg = MtpConfig(k=5, max_len=60, draft_mode=DraftMode.NOISY, accuracy=0.6, seed=9)
    assert mtp_decode(t, None, cfg, ["w1"]) == mtp_decode(t, None, cfg, ["w1"])


def test_acceptance_stats_and_speedup():
    trace = DecodeTrace(10, [Step(10, 11), Step(10, 11)])
    stats = acceptance_stats([trace])
    assert stats.mean_tokens_per_step == 11.0
    assert acceptance_stats([DecodeTrace(10, [Step(0, 1)] * 3)]).mean_tokens_per_step == 1.0
    mixed = [DecodeTrace(4, [Step(4, 5), Step(0, 1)]), DecodeTrace(4, [Step(2, 3)])]
    s = acceptance_stats(mixed)
    assert s.mean_tokens_per_step == (5 + 1 + 3) / 3
    assert s.histogram == {0: 1, 2: 1, 4: 1}
    with pytest.raises(EmptyInput):
        acceptance_stats([])


def test_speedup_estimate():
    def stats(mean, k=10):
        return AcceptanceStats(k, 1, 1, 1, mean, {})

    assert speedup_estimate(stats(5.2), 0.0) == 5.2
    assert speedup_estimate(stats(1.0), 0.3) <= 1.0
    assert speedup_estimate(stats(6.0), 0.05) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        speedup_estimate(stats(6.0), -1)


def test_config_validation():
    with pytest.raises(ValueError):
        MtpConfig(k=0)
    with pytest.raises(ValueError):
        MtpConfig(accuracy=1.5)
    m = alternating()
    other = train_ngram([["z"]], 1)
    with pytest.raises(ValueError):
        mtp_decode(m, other, MtpConfig(draft_mode=DraftMode.LOWER_ORDER), ["a"])
