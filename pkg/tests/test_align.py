import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multivox import align
from multivox.errors import (
    AlignmentSizeLimitError,
    InfeasibleAlignmentError,
    NonFiniteError,
)


def test_single_phoneme_takes_all_frames():
    path = align.mas(np.random.default_rng(0).normal(size=(1, 3)))
    assert path.assignment.tolist() == [0, 0, 0]
    assert path.durations.tolist() == [3]


def test_unique_diagonal_path():
    path = align.mas(np.array([[0.0, -9.0], [-9.0, 0.0]]))
    assert path.assignment.tolist() == [0, 1]


def test_infeasible_raises():
    with pytest.raises(InfeasibleAlignmentError):
        align.mas(np.zeros((3, 2)))


def test_non_finite_rejected():
    loglik = np.zeros((2, 4))
    loglik[1, 2] = np.nan
    with pytest.raises(NonFiniteError):
        align.mas(loglik)


def test_padding_region_never_read():
    rng = np.random.default_rng(3)
    core = rng.normal(size=(3, 6))
    padded = np.full((5, 9), np.nan)
    padded[:3, :6] = core
    a = align.mas(core)
    b = align.mas(padded, valid_p=3, valid_f=6)
    assert np.array_equal(a.assignment, b.assignment)
    assert a.total == b.total


def test_oracle_equivalence_randomized():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, 5))
        f = int(rng.integers(p, 8))
        loglik = rng.normal(size=(p, f))
        fast = align.mas(loglik)
        slow = align.brute_force_align(loglik)
        assert fast.total == slow.total
        assert np.array_equal(fast.assignment, slow.assignment)


def test_oracle_equivalence_with_ties():
    # Integer grids produce many equal-score paths; the tie rule must match.
    for seed in range(60):
        rng = np.random.default_rng(10_000 + seed)
        p = int(rng.integers(2, 5))
        f = int(rng.integers(p, 8))
        loglik = rng.integers(-1, 2, size=(p, f)).astype(np.float64)
        fast = align.mas(loglik)
        slow = align.brute_force_align(loglik)
        assert np.array_equal(fast.assignment, slow.assignment)


def test_4x7_equivalence_many_seeds():
    for seed in range(100):
        loglik = np.random.default_rng(seed).normal(size=(4, 7))
        fast = align.mas(loglik)
        slow = align.brute_force_align(loglik)
        assert fast.total == slow.total
        assert np.array_equal(fast.assignment, slow.assignment)


def test_shift_invariance():
    rng = np.random.default_rng(12)
    loglik = rng.normal(size=(4, 9))
    base = align.mas(loglik)
    for c in (-25.0, 0.5, 1e3):
        shifted = align.mas(loglik + c)
        assert np.array_equal(base.assignment, shifted.assignment)


def test_determinism():
    loglik = np.random.default_rng(5).normal(size=(5, 11))
    a = align.mas(loglik)
    b = align.mas(loglik)
    assert np.array_equal(a.assignment, b.assignment)
    assert a.total == b.total


def test_brute_force_size_limit():
    with pytest.raises(AlignmentSizeLimitError):
        align.brute_force_align(np.zeros((9, 12)))
    with pytest.raises(AlignmentSizeLimitError):
        align.brute_force_align(np.zeros((2, 13)))


def test_brute_force_single_row():
    path = align.brute_force_align(np.random.default_rng(1).normal(size=(1, 6)))
    assert path.assignment.tolist() == [0] * 6


def test_batch_matches_single():
    rng = np.random.default_rng(9)
    batch = rng.normal(size=(4, 5, 10))
    valid_p = np.array([2, 5, 1, 3])
    valid_f = np.array([7, 10, 4, 3])
    paths = align.mas_batch(batch, valid_p, valid_f)
    for b, path in enumerate(paths):
        single = align.mas(batch[b], int(valid_p[b]), int(valid_f[b]))
        assert np.array_equal(path.assignment, single.assignment)


def test_batch_reports_bad_item_index():
    batch = np.zeros((2, 3, 4))
    with pytest.raises(InfeasibleAlignmentError, match="item 1"):
        align.mas_batch(batch, np.array([2, 3]), np.array([4, 2]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_path_validity_properties(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 7))
    f = int(rng.integers(p, 14))
    loglik = rng.normal(size=(p, f))
    path = align.mas(loglik)
    a = path.assignment
    assert a[0] == 0 and a[-1] == p - 1
    steps = np.diff(a)
    assert set(steps.tolist()) <= {0, 1}
    assert path.durations.min() >= 1
    assert path.durations.sum() == f
    # Left-to-right accumulation along the chosen path equals the total.
    total = 0.0
    for frame in range(f):
        total = total + loglik[a[frame], frame]
    assert total == path.total
