from __future__ import annotations

from typing import Sequence

import numpy as np

from .types import CommunityProfile, DataError, LoadSeries


def aggregate(members: Sequence[LoadSeries], id: str | None = None) -> LoadSeries:
    """Element-wise sum of member series, accumulated in list order."""
    if not members:
        raise DataError("cannot aggregate an empty community")
    first = members[0]
    total = np.zeros(len(first))
    for m in members:
        if len(m) != len(first) or m.start != first.start:
            raise DataError(
                f"household {m.id!r} covers [{m.start}, {m.end}], "
                f"expected [{first.start}, {first.end}]"
            )
        total = total + m.values
    return LoadSeries(id or "+".join(m.id for m in members), first.timestamps, total)


def common_range(pool: Sequence[LoadSeries]) -> list[LoadSeries]:
    """Trim every series to the hours covered by all of them."""
    start = max(s.start for s in pool)
    stop = min(s.end for s in pool) + np.timedelta64(1, "h")
    if stop <= start:
        raise DataError("household series do not overlap")
    return [s.slice(start, stop) for s in pool]


def sample_communities(
    pool: Sequence[LoadSeries], h: int, n_repetitions: int, seed: int
) -> list[CommunityProfile]:
    """Draw ``n_repetitions`` disjoint communities of ``h`` households each.

    Households are drawn without replacement across all repetitions from a
    seeded permutation of the pool, so no household belongs to two communities.
    """
    if h < 1 or n_repetitions < 1:
        raise ValueError("h and n_repetitions must be positive")
    need = h * n_repetitions
    if len(pool) < need:
        raise DataError(
            f"pool has {len(pool)} households; {need} required "
            f"for {n_repetitions} disjoint communities of {h}"
        )
    ids = [s.id for s in pool]
    if len(set(ids)) != len(ids):
        raise DataError("household ids in the pool are not unique")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pool))[:need]
    out = []
    for r in range(n_repetitions):
        members = [pool[int(i)] for i in order[r * h : (r + 1) * h]]
        agg = aggregate(members, id=f"ec{h}_{r:02d}")
        out.append(CommunityProfile(tuple(m.id for m in members), agg))
    return out
