"""Pairwise additive masking for group sums across PDSes.

Each participant adds, for every peer, a seed-derived mask with a sign fixed
by the canonical pair order. Summed over the full group the masks telescope
to zero, so the aggregator learns the total and nothing else; one missing
share leaves undecodable garbage by design (no dropout recovery).
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field

from .errors import (
    DuplicateShare,
    MinimumGroupSize,
    MissingShare,
    RangeExceeded,
    SessionMismatch,
)

MODULUS = 1 << 64
SCALE_BITS = 20
SCALE = 1 << SCALE_BITS
VALUE_RANGE = 1 << 40  # |x| <= 2^40 is the documented encodable range
MIN_GROUP_SIZE = 3


def encode_fixed(x: float) -> int:
    """round(x * 2^20) embedded two's-complement mod 2^64."""
    if not abs(x) <= VALUE_RANGE:
        raise RangeExceeded(f"|{x}| exceeds the 2^40 range")
    return round(x * SCALE) % MODULUS


def decode_fixed(v: int, n_participants: int) -> float:
    """Invert encode after summation.

    Exact whenever sum |x_i| * 2^20 < 2^62; n_participants documents the
    summation width (the two's-complement decode itself does not need it).
    """
    v %= MODULUS
    if v >= MODULUS // 2:
        v -= MODULUS
    return v / SCALE


def participants_hash(participant_ids: list[str]) -> str:
    return hashlib.sha256(",".join(sorted(participant_ids)).encode()).hexdigest()


def derive_pairwise_mask(shared_seed: bytes, session_id: str, i: str, j: str) -> int:
    """Deterministic mask for the unordered pair {i, j} in one session."""
    if i == j:
        raise ValueError("a participant has no pairwise mask with itself")
    if len(shared_seed) != 32:
        raise ValueError(f"shared seed must be 32 bytes, got {len(shared_seed)}")
    lo, hi = sorted((i, j))
    message = b"\x1f".join(s.encode() for s in ("npds-agg-mask", session_id, lo, hi))
    digest = hmac.new(shared_seed, message, hashlib.sha256).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class MaskedShare:
    participant_id: str
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < MODULUS:
            raise ValueError("share value must be reduced mod 2^64")


@dataclass
class AggregationSession:
    """One participant's (or the aggregator's) view of a group computation."""

    session_id: str
    question_id: str
    field_path: str
    participants: tuple[str, ...]
    participant_id: str | None = None  # None on the aggregator side
    pair_seeds: dict[str, bytes] = field(default_factory=dict)
    state: str = "COLLECTING"
    expected_hash: str | None = None
    _cached_share: MaskedShare | None = None

    def __post_init__(self) -> None:
        self.participants = tuple(self.participants)
        if len(self.participants) < MIN_GROUP_SIZE:
            raise MinimumGroupSize(
                f"{len(self.participants)} participants, minimum is {MIN_GROUP_SIZE}"
            )
        if len(set(self.participants)) != len(self.participants):
            raise ValueError("duplicate participant ids")
        actual = participants_hash(list(self.participants))
        if self.expected_hash is not None and self.expected_hash != actual:
            raise SessionMismatch(
                f"participant list hash {actual[:16]}... != committed {self.expected_hash[:16]}..."
            )
        self.expected_hash = actual
        if self.participant_id is not None:
            if self.participant_id not in self.participants:
                raise SessionMismatch(f"{self.participant_id!r} is not in the participant list")
            peers = set(self.participants) - {self.participant_id}
            if set(self.pair_seeds) != peers:
                raise SessionMismatch("pairwise seeds must cover exactly the peer set")


def contribute(session: AggregationSession, value: float) -> MaskedShare:
    """This participant's masked share; idempotent per session."""
    if session.participant_id is None:
        raise ValueError("aggregator-side sessions cannot contribute")
    if session.state != "COLLECTING":
        raise SessionMismatch(f"session state is {session.state}, not COLLECTING")
    if session._cached_share is not None:
        return session._cached_share
    me = session.participant_id
    total = encode_fixed(value)
    for peer in session.participants:
        if peer == me:
            continue
        mask = derive_pairwise_mask(session.pair_seeds[peer], session.session_id, me, peer)
        total = (total + mask) % MODULUS if me < peer else (total - mask) % MODULUS
    share = MaskedShare(participant_id=me, value=total)
    session._cached_share = share
    return share


def aggregate(session: AggregationSession, shares: list[MaskedShare]) -> tuple[float, float, int]:
    """(sum, mean, n) from the full set of shares; masks cancel exactly."""
    n = len(session.participants)
    if n < MIN_GROUP_SIZE:
        raise MinimumGroupSize(f"{n} participants, minimum is {MIN_GROUP_SIZE}")
    seen: set[str] = set()
    for share in shares:
        if share.participant_id not in session.participants:
            raise SessionMismatch(f"share from unknown participant {share.participant_id!r}")
        if share.participant_id in seen:
            raise DuplicateShare(f"two shares from {share.participant_id!r}")
        seen.add(share.participant_id)
    missing = set(session.participants) - seen
    if missing:
        raise MissingShare(f"no share from {', '.join(sorted(missing))}")
    total = 0
    for share in shares:
        total = (total + share.value) % MODULUS
    value_sum = decode_fixed(total, n)
    session.state = "DONE"
    return value_sum, value_sum / n, n


def make_pair_seed_table(participant_ids: list[str], rng_bytes) -> dict[frozenset[str], bytes]:
    """Out-of-band seed provisioning: one 32-byte seed per unordered pair.

    `rng_bytes(n)` supplies randomness (secrets.token_bytes in production,
    a seeded generator in tests).
    """
    table: dict[frozenset[str], bytes] = {}
    ordered = sorted(participant_ids)
    for a_idx, a in enumerate(ordered):
        for b in ordered[a_idx + 1 :]:
            table[frozenset((a, b))] = rng_bytes(32)
    return table


def seeds_for(table: dict[frozenset[str], bytes], me: str) -> dict[str, bytes]:
    """The slice of the pair-seed table one participant is allowed to see."""
    out: dict[str, bytes] = {}
    for pair, seed in table.items():
        if me in pair:
            (peer,) = pair - {me}
            out[peer] = seed
    return out
