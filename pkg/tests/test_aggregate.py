"""Masked aggregation: fixed-point codec, mask algebra, end-to-end sums."""

import numpy as np
import pytest

from neuropds.aggregate import (
    MODULUS,
    SCALE,
    AggregationSession,
    MaskedShare,
    aggregate,
    contribute,
    decode_fixed,
    derive_pairwise_mask,
    encode_fixed,
    make_pair_seed_table,
    participants_hash,
    seeds_for,
)
from neuropds.errors import (
    DuplicateShare,
    MinimumGroupSize,
    MissingShare,
    RangeExceeded,
    SessionMismatch,
)


def make_sessions(values, session_id="s1", rng=None):
    """Participant-side sessions with a shared out-of-band seed table."""
    ids = [f"p{i + 1:02d}" for i in range(len(values))]
    rng = rng or np.random.default_rng(0)
    table = make_pair_seed_table(ids, rng.bytes)
    sessions = {
        pid: AggregationSession(
            session_id=session_id,
            question_id="q",
            field_path="q.v",
            participants=tuple(ids),
            participant_id=pid,
            pair_seeds=seeds_for(table, pid),
        )
        for pid in ids
    }
    return ids, sessions


# --- fixed point --------------------------------------------------------------


def test_encode_decode_trivials():
    assert encode_fixed(0.0) == 0
    assert decode_fixed(0, 3) == 0.0
    assert encode_fixed(1.5) == 1572864  # 1.5 * 2^20
    assert decode_fixed(encode_fixed(1.5), 1) == 1.5


def test_negative_encodes_as_additive_inverse():
    total = (encode_fixed(-2.0) + encode_fixed(2.0)) % MODULUS
    assert decode_fixed(total, 2) == 0.0


def test_range_exceeded():
    with pytest.raises(RangeExceeded):
        encode_fixed(float(2**40) * 1.01)
    encode_fixed(float(2**40))  # boundary is allowed


def test_codec_round_trip_on_grid():
    for x in (-100.0, -0.25, 0.0, 3.141592502593994, 1000.5):
        # Values on the 2^-20 grid come back exactly.
        grid = round(x * SCALE) / SCALE
        assert decode_fixed(encode_fixed(grid), 1) == grid


# --- masks ------------------------------------------------------------------------


def test_mask_deterministic_and_symmetric():
    seed = bytes(range(32))
    a = derive_pairwise_mask(seed, "sess", "p1", "p2")
    assert a == derive_pairwise_mask(seed, "sess", "p1", "p2")
    assert a == derive_pairwise_mask(seed, "sess", "p2", "p1")
    assert 0 <= a < MODULUS


def test_mask_varies_with_session_no_collisions():
    seed = bytes(32)
    masks = {derive_pairwise_mask(seed, f"session-{i}", "a", "b") for i in range(10_000)}
    assert len(masks) == 10_000  # birthday bound at 2^64 makes collisions negligible


def test_mask_needs_distinct_parties_and_full_seed():
    with pytest.raises(ValueError):
        derive_pairwise_mask(bytes(32), "s", "p1", "p1")
    with pytest.raises(ValueError):
        derive_pairwise_mask(bytes(16), "s", "p1", "p2")


# --- contribute/aggregate ---------------------------------------------------------------


def test_three_party_sum_is_exact():
    ids, sessions = make_sessions([2.0, 3.0, 5.0])
    shares = [contribute(sessions[pid], v) for pid, v in zip(ids, [2.0, 3.0, 5.0])]
    view = AggregationSession(
        session_id="s1", question_id="q", field_path="q.v", participants=tuple(ids)
    )
    total, mean, n = aggregate(view, shares)
    assert total == 10.0
    assert n == 3
    assert abs(mean - 10.0 / 3.0) < 2**-20


def test_contribute_is_idempotent():
    ids, sessions = make_sessions([1.0, 2.0, 3.0])
    first = contribute(sessions[ids[0]], 1.0)
    second = contribute(sessions[ids[0]], 1.0)
    assert first == second


def test_masks_telescope_to_zero():
    ids, sessions = make_sessions([0.0, 0.0, 0.0, 0.0])
    shares = [contribute(sessions[pid], 0.0) for pid in ids]
    total = sum(s.value for s in shares) % MODULUS
    assert total == 0  # all-zero plaintext: anything left is mask residue


def test_share_is_not_plaintext():
    ids, sessions = make_sessions([42.0, 0.0, 0.0])
    share = contribute(sessions[ids[0]], 42.0)
    assert share.value != encode_fixed(42.0)


def test_share_changes_when_any_pair_seed_changes():
    values = [7.0, 1.0, 2.0]
    ids, sessions = make_sessions(values, rng=np.random.default_rng(1))
    baseline = contribute(sessions[ids[0]], 7.0)
    ids2, sessions2 = make_sessions(values, rng=np.random.default_rng(2))
    assert contribute(sessions2[ids2[0]], 7.0).value != baseline.value


def test_same_plaintext_distinct_sessions_distinct_shares():
    values = [5.0, 5.0, 5.0]
    rng = np.random.default_rng(3)
    ids, s_a = make_sessions(values, session_id="sess-a", rng=rng)
    table_rng = np.random.default_rng(3)  # same seeds, different session id
    _, s_b = make_sessions(values, session_id="sess-b", rng=table_rng)
    assert contribute(s_a[ids[0]], 5.0).value != contribute(s_b[ids[0]], 5.0).value


def test_minimum_group_size():
    with pytest.raises(MinimumGroupSize):
        AggregationSession(
            session_id="s", question_id="q", field_path="q.v", participants=("a", "b")
        )


def test_participant_hash_commitment():
    ids = ["a", "b", "c"]
    good = participants_hash(ids)
    AggregationSession(
        session_id="s", question_id="q", field_path="q.v", participants=tuple(ids),
        expected_hash=good,
    )
    with pytest.raises(SessionMismatch):
        AggregationSession(
            session_id="s", question_id="q", field_path="q.v", participants=("a", "b", "x"),
            expected_hash=good,
        )


def test_duplicate_and_missing_shares():
    ids, sessions = make_sessions([1.0, 2.0, 3.0])
    shares = [contribute(sessions[pid], v) for pid, v in zip(ids, [1.0, 2.0, 3.0])]
    view = AggregationSession(
        session_id="s1", question_id="q", field_path="q.v", participants=tuple(ids)
    )
    with pytest.raises(DuplicateShare):
        aggregate(view, shares + [shares[0]])
    with pytest.raises(MissingShare):
        aggregate(view, shares[:2])
    with pytest.raises(SessionMismatch):
        aggregate(view, shares[:2] + [MaskedShare("stranger", 1)])


def test_random_groups_match_plaintext_oracle():
    rng = np.random.default_rng(2026)
    for trial in range(100):
        n = int(rng.integers(3, 8))
        values = [float(v) for v in rng.uniform(-100, 100, n)]
        ids, sessions = make_sessions(values, session_id=f"t{trial}", rng=rng)
        shares = [contribute(sessions[pid], v) for pid, v in zip(ids, values)]
        view = AggregationSession(
            session_id=f"t{trial}", question_id="q", field_path="q.v", participants=tuple(ids)
        )
        total, mean, _ = aggregate(view, shares)
        # Oracle: encode/decode plaintext values directly, no masking involved.
        expected = decode_fixed(sum(encode_fixed(v) for v in values) % MODULUS, n)
        assert total == expected
        assert abs(total - sum(values)) < n * 2**-20


def test_withheld_share_garbles_the_sum():
    rng = np.random.default_rng(7)
    for trial in range(50):
        values = [float(v) for v in rng.uniform(-50, 50, 4)]
        ids, sessions = make_sessions(values, session_id=f"w{trial}", rng=rng)
        shares = [contribute(sessions[pid], v) for pid, v in zip(ids, values)]
        partial = sum(s.value for s in shares[:-1]) % MODULUS
        decoded = decode_fixed(partial, len(values) - 1)
        assert abs(decoded - sum(values[:-1])) > 1.0  # masks no longer cancel
