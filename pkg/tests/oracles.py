"""Independent reference implementations for the derived behaviors.

Everything here is written from the published constants and rules alone,
deliberately not importing the package internals, so the tests compare two
separate derivations rather than a function against itself.
"""
from __future__ import annotations

import math
import re
from typing import Dict, List, Sequence, Tuple

_WORD = re.compile(r"[^\W_]+", re.UNICODE)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return h


def embed(text: str, dimension: int = 64) -> Tuple[float, ...]:
    acc = [0.0] * dimension
    for token in _WORD.findall(text.lower()):
        h = fnv1a(token.encode("utf-8"))
        sign = 1.0 if (h >> 6) & 1 == 0 else -1.0
        acc[h % dimension] += sign
    norm = math.sqrt(sum(c * c for c in acc))
    if norm == 0.0:
        return tuple(acc)
    return tuple(c / norm for c in acc)


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    if tuple(a) == tuple(b):
        if not any(a):
            return 0.0
        return 1.0
    dot = 0.0
    for x, y in zip(a, b):
        dot += x * y
    na = sum(x * x for x in a)
    nb = sum(y * y for y in b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    value = dot / math.sqrt(na * nb)
    return max(-1.0, min(1.0, value))


def rank_chunks(
    query_vec: Sequence[float],
    chunks: Sequence[Tuple[str, int, Sequence[float], float]],
    k: int,
) -> List[Tuple[str, int, float]]:
    """Brute-force top-k.

    ``chunks`` rows are (doc_id, ordinal, embedding, boost); returns
    (doc_id, ordinal, effective_score) rows in rank order.
    """
    scored = []
    for doc_id, ordinal, vec, boost in chunks:
        raw = cosine(query_vec, vec)
        scored.append((doc_id, ordinal, raw + boost))
    scored.sort(key=lambda row: (-row[2], row[0], row[1]))
    return scored[:k]


def word_ngrams(text: str, n: int) -> set:
    words = _WORD.findall(text.lower())
    return {tuple(words[i : i + n]) for i in range(len(words) - n + 1)}


def overlap_ratio(message: str, source: str, n: int = 5):
    msg = word_ngrams(message, n)
    if not msg:
        return None
    src = word_ngrams(source, n)
    return len(msg & src) / len(msg)


def map_transcript(
    definition_turns: Sequence[Tuple[str, str]],
    transcript: Sequence[Tuple[str, str, str]],
    responder_id: str,
    names: Dict[str, str],
) -> List[Tuple[str, str]]:
    """Re-derive the prompt an agent should see for its next turn.

    ``definition_turns`` are (role, content) pairs; ``transcript`` rows are
    (author_id, display ignored, content). Returns merged (role, content)
    pairs ending on a non-assistant turn.
    """
    turns: List[Tuple[str, str]] = list(definition_turns)
    for author_id, _, content in transcript:
        if author_id == responder_id:
            turns.append(("assistant", content))
        else:
            name = names.get(author_id, author_id)
            turns.append(("user", f"{name}: {content}"))

    merged: List[Tuple[str, str]] = []
    for role, content in turns:
        if merged and role != "system" and merged[-1][0] == role:
            merged[-1] = (role, merged[-1][1] + "\n" + content)
        else:
            merged.append((role, content))
    if merged and merged[-1][0] == "assistant":
        merged.append(("user", "(continue)"))
    return merged
