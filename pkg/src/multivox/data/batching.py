"""Length-bucketed, seeded batch construction."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyCorpusError
from .manifest import Utterance

# Utterances within the same quarter second share a bucket, limiting
# padding waste without destroying the shuffle.
_BUCKET_SECONDS = 0.25


def make_batches(
    utterances: list[Utterance],
    batch_size: int,
    seed: int,
    epoch: int = 0,
) -> list[list[Utterance]]:
    """One epoch of batches; every utterance appears exactly once.

    Shuffle, stable-sort into duration buckets, chunk, then shuffle batch
    order. Fully determined by (seed, epoch); the last partial batch is
    kept.
    """
    if not utterances:
        raise EmptyCorpusError("no utterances to batch")
    if batch_size < 1:
        raise EmptyCorpusError("batch_size must be >= 1")
    rng = np.random.default_rng([seed, epoch])
    order = rng.permutation(len(utterances))
    buckets = [int(utterances[i].duration_sec / _BUCKET_SECONDS) for i in order]
    order = order[np.argsort(buckets, kind="stable")]
    batches = [
        [utterances[j] for j in order[i : i + batch_size]]
        for i in range(0, len(order), batch_size)
    ]
    batch_order = rng.permutation(len(batches))
    return [batches[i] for i in batch_order]
