"""Run-length shorthand and controlled mutations of input strings."""
from __future__ import annotations

import re
from itertools import groupby

MAX_EXPANSION = 10**7

_TOKEN = re.compile(r"^(?P<sym>[^\s^])\^(?P<count>\d+)$")
_MUTATION = re.compile(
    r"^(?:block(?P<block>\d+)(?P<sign>[+-])(?P<delta>\d+)"
    r"|delb(?P<drop>\d+)"
    r"|insb(?P<split>\d+)@(?P<offset>\d+))$"
)


def parse_rle(text: str, limit: int = MAX_EXPANSION) -> str:
    """Expand ``"a^7 b a^56"``; tokens without ``^`` are taken literally."""
    parts = []
    total = 0
    for token in text.split():
        m = _TOKEN.match(token)
        if m:
            count = int(m["count"])
            piece = (m["sym"], count)
        elif "^" in token:
            raise ValueError(f"malformed run-length token {token!r}")
        else:
            piece = (token, 1)
            count = len(token)
        total += count
        if total > limit:
            raise ValueError(f"input expands to more than {limit} symbols")
        parts.append(piece[0] * piece[1])
    return "".join(parts)


def render_rle(word: str) -> str:
    out = []
    for sym, run in groupby(word):
        n = sum(1 for _ in run)
        out.append(sym if n == 1 else f"{sym}^{n}")
    return " ".join(out)


def mutate(word: str, spec: str) -> str:
    """Apply comma-separated mutations to an a/b string.

    ``blockJ+D`` / ``blockJ-D`` add or remove D a's in block J (0-based),
    ``delbJ`` deletes the J-th b (1-based, merging blocks J-1 and J) and
    ``insbJ@P`` splits block J with a new b after P a's.
    """
    counts = [len(part) for part in word.split("b")]
    for item in filter(None, (s.strip() for s in spec.split(","))):
        m = _MUTATION.match(item)
        if not m:
            raise ValueError(f"unknown mutation {item!r}")
        if m["block"] is not None:
            j = int(m["block"])
            _check_block(j, counts)
            delta = int(m["delta"]) * (1 if m["sign"] == "+" else -1)
            if counts[j] + delta < 0:
                raise ValueError(f"block {j} has only {counts[j]} a's")
            counts[j] += delta
        elif m["drop"] is not None:
            j = int(m["drop"])
            if not 1 <= j < len(counts):
                raise ValueError(f"there is no b number {j}")
            counts[j - 1:j + 1] = [counts[j - 1] + counts[j]]
        else:
            j, offset = int(m["split"]), int(m["offset"])
            _check_block(j, counts)
            if offset > counts[j]:
                raise ValueError(f"block {j} has only {counts[j]} a's")
            counts[j:j + 1] = [offset, counts[j] - offset]
    return "b".join("a" * t for t in counts)


def _check_block(j: int, counts: list) -> None:
    if not 0 <= j < len(counts):
        raise ValueError(f"block {j} does not exist (have {len(counts)})")
