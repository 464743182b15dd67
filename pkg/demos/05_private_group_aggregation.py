#!/usr/bin/env python3
"""Pairwise-masked aggregation: the aggregator learns the sum, nothing else.

Walks the mask algebra directly: shares look nothing like the values, masks
telescope to zero over the full group, and a single missing share leaves
undecodable garbage (dropout is fatal by design, not patched over).
"""

import numpy as np

from neuropds.aggregate import (
    MODULUS,
    AggregationSession,
    aggregate,
    contribute,
    decode_fixed,
    encode_fixed,
    make_pair_seed_table,
    seeds_for,
)

values = {"pds-alice": 2.0, "pds-bob": 3.0, "pds-carol": 5.0}
ids = sorted(values)

rng = np.random.default_rng(42)
seed_table = make_pair_seed_table(ids, rng.bytes)  # out-of-band pair seeds

sessions = {
    pid: AggregationSession(
        session_id="morning-drowsiness",
        question_id="drowsiness",
        field_path="drowsiness.ratio",
        participants=tuple(ids),
        participant_id=pid,
        pair_seeds=seeds_for(seed_table, pid),
    )
    for pid in ids
}

print("plaintext values (never leave their PDS):", values)
shares = [contribute(sessions[pid], values[pid]) for pid in ids]
print("\nmasked shares as the aggregator sees them:")
for share in shares:
    print(f"  {share.participant_id}: {share.value:20d}  "
          f"(plain encoding would be {encode_fixed(values[share.participant_id]):>8d})")

view = AggregationSession(
    session_id="morning-drowsiness",
    question_id="drowsiness",
    field_path="drowsiness.ratio",
    participants=tuple(ids),
)
total, mean, n = aggregate(view, shares)
print(f"\naggregate over {n} stores: sum={total}, mean={mean:.6f}")
print(f"true sum for comparison:   {sum(values.values())}")

partial = sum(s.value for s in shares[:-1]) % MODULUS
print(f"\nwith one share withheld the partial sum decodes to {decode_fixed(partial, n - 1):.3f}")
print("masks no longer cancel: the aggregator gets garbage, not a 2-party sum")
