"""Search result records and the ranking rule shared by all indexes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SearchHit:
    """One retrieved document: id, cosine score, and 0-based rank."""

    doc_id: str | int
    score: float
    rank: int


def rank_candidates(
    scores: np.ndarray, seqs: np.ndarray, ids: list, k: int
) -> list[SearchHit]:
    """Turn candidate scores into the top-k hit list.

    Ordering is descending score; exact score ties break by ascending
    insertion sequence so results are deterministic and comparable across
    backends. Returns min(k, len(scores)) hits with ranks 0..len-1.

    `seqs` holds each candidate's global insertion sequence number and
    `ids[i]` is the doc id of candidate i.
    """
    n = scores.shape[0]
    if n == 0 or k <= 0:
        return []
    # lexsort uses the last key as primary: sort by -score, then seq.
    order = np.lexsort((seqs, -scores))
    take = min(k, n)
    return [
        SearchHit(doc_id=ids[int(i)], score=float(scores[int(i)]), rank=r)
        for r, i in enumerate(order[:take])
    ]
