from __future__ import annotations

from typing import Hashable, Sequence

MAX_PERIOD = 20
MIN_REPEATS = 3
MIN_TOKENS = 6


def periodic_suffix_length(seq: Sequence[Hashable], max_period: int = MAX_PERIOD,
                           min_repeats: int = MIN_REPEATS) -> int:
    """Length of the longest suffix made of >= ``min_repeats`` whole copies of one block."""
    n = len(seq)
    best = 0
    for p in range(1, min(max_period, n // min_repeats) + 1):
        run = 0
        j = n - 1
        while j - p >= 0 and seq[j] == seq[j - p]:
            run += 1
            j -= 1
        repeats = (run + p) // p
        if repeats >= min_repeats:
            best = max(best, repeats * p)
    return best


def repetition_ratio(s: str) -> float:
    """Share of ``s`` covered by a trailing loop of at least three repeats.

    Measured over whitespace tokens, or over characters when there are
    fewer than six tokens.
    """
    tokens = s.split()
    seq: Sequence[str] = tokens if len(tokens) >= MIN_TOKENS else s
    if not seq:
        return 0.0
    return periodic_suffix_length(seq) / len(seq)
