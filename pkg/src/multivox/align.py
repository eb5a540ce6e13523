"""Monotonic alignment search over a phoneme-by-frame log-likelihood grid.

``mas`` is the reference dynamic program: it returns the monotonic,
surjective phoneme-to-frame assignment maximizing the summed log-likelihood.
``brute_force_align`` enumerates every feasible path and exists purely as a
testing oracle; both share one tie rule so their outputs are identical down
to the assignment integers.

Tie rule: walking back from the last frame, when staying on the current
phoneme scores the same as having just transitioned, the path stays. Among
all optimal paths this selects the lexicographically greatest assignment.
Accumulation is left to right over frames, one addition per cell, so the
path totals of both routes are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import AlignmentSizeLimitError, InfeasibleAlignmentError, NonFiniteError

BRUTE_FORCE_MAX_P = 8
BRUTE_FORCE_MAX_F = 12


@dataclass
class AlignmentPath:
    """Frame-to-phoneme assignment plus the per-phoneme frame counts."""

    assignment: np.ndarray  # int64, shape (F,), nondecreasing, steps of 0/1
    durations: np.ndarray  # int64, shape (P,), each >= 1, sums to F
    total: float  # summed log-likelihood along the path

    def validate(self) -> None:
        a = self.assignment
        assert a[0] == 0 and a[-1] == len(self.durations) - 1
        steps = np.diff(a)
        assert np.all((steps == 0) | (steps == 1))
        assert np.all(self.durations >= 1)
        assert int(self.durations.sum()) == len(a)


def _check_region(loglik: np.ndarray, valid_p: int, valid_f: int) -> np.ndarray:
    if loglik.ndim != 2:
        raise InfeasibleAlignmentError("log-likelihood matrix must be 2-D")
    if not (1 <= valid_p <= loglik.shape[0]) or not (1 <= valid_f <= loglik.shape[1]):
        raise InfeasibleAlignmentError(
            f"valid region ({valid_p}, {valid_f}) exceeds matrix shape {loglik.shape}"
        )
    if valid_f < valid_p:
        raise InfeasibleAlignmentError(
            f"{valid_f} frames cannot cover {valid_p} phonemes monotonically"
        )
    region = np.asarray(loglik, dtype=np.float64)[:valid_p, :valid_f]
    if not np.all(np.isfinite(region)):
        raise NonFiniteError("log-likelihood matrix has non-finite entries")
    return region


def _durations_from_assignment(assignment: np.ndarray, n_phonemes: int) -> np.ndarray:
    return np.bincount(assignment, minlength=n_phonemes).astype(np.int64)


def mas(loglik: np.ndarray, valid_p: int | None = None, valid_f: int | None = None) -> AlignmentPath:
    """Maximum-likelihood monotonic surjective alignment (reference DP).

    Entries outside the valid region are never read; padded callers pass
    ``valid_p``/``valid_f``.
    """
    loglik = np.asarray(loglik)
    if valid_p is None:
        valid_p = loglik.shape[0]
    if valid_f is None:
        valid_f = loglik.shape[1]
    ll = _check_region(loglik, valid_p, valid_f)
    P, F = valid_p, valid_f

    value = np.full((P, F), -np.inf, dtype=np.float64)
    value[0, 0] = ll[0, 0]
    for f in range(1, F):
        # stay on the same phoneme
        stay = value[:, f - 1].copy()
        # advance from the previous phoneme
        advance = np.full(P, -np.inf)
        advance[1:] = value[:-1, f - 1]
        value[:, f] = ll[:, f] + np.maximum(stay, advance)

    assignment = np.empty(F, dtype=np.int64)
    p = P - 1
    assignment[F - 1] = p
    for f in range(F - 1, 0, -1):
        stay = value[p, f - 1]
        advance = value[p - 1, f - 1] if p > 0 else -np.inf
        if not (stay >= advance):
            p -= 1
        assignment[f - 1] = p

    path = AlignmentPath(
        assignment=assignment,
        durations=_durations_from_assignment(assignment, P),
        total=float(value[P - 1, F - 1]),
    )
    path.validate()
    return path


def brute_force_align(loglik: np.ndarray, valid_p: int | None = None, valid_f: int | None = None) -> AlignmentPath:
    """Exhaustive oracle: enumerate all C(F-1, P-1) monotonic paths.

    Only usable on small grids; ties resolve to the lexicographically
    greatest assignment, matching the DP's stay-on-tie rule.
    """
    loglik = np.asarray(loglik)
    if valid_p is None:
        valid_p = loglik.shape[0]
    if valid_f is None:
        valid_f = loglik.shape[1]
    if valid_p > BRUTE_FORCE_MAX_P or valid_f > BRUTE_FORCE_MAX_F:
        raise AlignmentSizeLimitError(
            f"brute force bounded to P<={BRUTE_FORCE_MAX_P}, F<={BRUTE_FORCE_MAX_F}; "
            f"got ({valid_p}, {valid_f})"
        )
    ll = _check_region(loglik, valid_p, valid_f)
    P, F = valid_p, valid_f

    best_total = -np.inf
    best_assignment: tuple[int, ...] | None = None
    # Transition frames: the set of f where the phoneme index increments.
    for cuts in combinations(range(1, F), P - 1):
        assignment = np.empty(F, dtype=np.int64)
        edges = list(cuts) + [F]
        start = 0
        for p, end in enumerate(edges):
            assignment[start:end] = p
            start = end
        total = 0.0
        for f in range(F):
            total = total + ll[assignment[f], f]
        key = tuple(int(x) for x in assignment)
        if total > best_total or (total == best_total and (best_assignment is None or key > best_assignment)):
            best_total = total
            best_assignment = key
    assert best_assignment is not None
    assignment = np.asarray(best_assignment, dtype=np.int64)
    path = AlignmentPath(
        assignment=assignment,
        durations=_durations_from_assignment(assignment, P),
        total=float(best_total),
    )
    path.validate()
    return path


def mas_batch(
    loglik: np.ndarray, valid_p: np.ndarray, valid_f: np.ndarray
) -> list[AlignmentPath]:
    """Run the reference DP over a padded batch, item by item."""
    paths = []
    for b in range(loglik.shape[0]):
        try:
            paths.append(mas(loglik[b], int(valid_p[b]), int(valid_f[b])))
        except InfeasibleAlignmentError as err:
            raise InfeasibleAlignmentError(f"batch item {b}: {err.message}")
    return paths
