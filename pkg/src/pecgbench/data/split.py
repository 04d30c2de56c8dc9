"""Iterative multi-label stratified splitting.

Partition capacities are fixed up front by largest-remainder rounding of
the ratios, so the split sizes land within one slice of exact proportions.
Within those capacities, slices are placed label by label: the rarest
remaining label is handled first, and each of its slices goes to the
partition with the largest outstanding demand for that label (ties broken
by larger remaining capacity, then lower partition index).
"""

from __future__ import annotations

import numpy as np

from .pipeline import SliceSet
from ..seeding import substream

PARTITIONS = ("train", "val", "test")


def _capacities(n: int, ratios) -> np.ndarray:
    ratios = np.asarray(ratios, dtype=np.float64)
    if ratios.ndim != 1 or len(ratios) != 3 or not np.all(ratios > 0):
        raise ValueError(f"ratios must be three positive numbers, got {ratios}")
    exact = ratios / ratios.sum() * n
    caps = np.floor(exact).astype(np.int64)
    remainder = exact - caps
    # Largest remainders (ties to the lower index) absorb the leftover.
    order = np.lexsort((np.arange(3), -remainder))
    for i in range(n - int(caps.sum())):
        caps[order[i % 3]] += 1
    return caps


def stratify_assign(Y: np.ndarray, ratios=(0.7, 0.1, 0.2), seed: int = 0) -> np.ndarray:
    """Assign each row of a multi-hot label matrix to partition 0, 1, or 2."""
    Y = np.asarray(Y)
    n = Y.shape[0]
    if n < 10:
        raise ValueError(f"need at least 10 slices to split, got {n}")
    caps = _capacities(n, ratios)
    ratios = np.asarray(ratios, dtype=np.float64) / np.sum(ratios)
    # Outstanding per-label demand of each partition, in expected positives.
    demand = ratios[:, None] * Y.sum(axis=0, dtype=np.float64)[None, :]
    remaining_caps = caps.astype(np.float64).copy()

    order = substream(seed, "split").permutation(n)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    assigned = np.full(n, -1, dtype=np.int64)
    unassigned = np.ones(n, dtype=bool)

    def place(i: int, part: int):
        assigned[i] = part
        unassigned[i] = False
        remaining_caps[part] -= 1.0
        demand[part] -= Y[i]

    while unassigned.any():
        counts = Y[unassigned].sum(axis=0)
        open_labels = np.flatnonzero(counts > 0)
        if open_labels.size == 0:
            # Label-free rows: fill by remaining capacity.
            for i in sorted(np.flatnonzero(unassigned), key=lambda j: rank[j]):
                part = int(np.argmax(remaining_caps))
                place(i, part)
            break
        label = open_labels[np.argmin(counts[open_labels])]
        rows = np.flatnonzero(unassigned & (Y[:, label] > 0))
        for i in sorted(rows, key=lambda j: rank[j]):
            candidates = np.flatnonzero(remaining_caps > 0)
            if candidates.size == 0:
                candidates = np.arange(3)
            # Largest per-label demand, then largest capacity, then index.
            keys = [
                (-demand[p, label], -remaining_caps[p], p) for p in candidates
            ]
            part = int(candidates[min(range(len(keys)), key=keys.__getitem__)])
            place(i, part)
    return assigned


def stratified_split(slices, ratios=(0.7, 0.1, 0.2), seed: int = 0):
    """Split a slice list into train/val/test SliceSets."""
    slices = list(slices)
    Y = np.stack([s.y for s in slices])
    assigned = stratify_assign(Y, ratios=ratios, seed=seed)
    out = []
    for part_idx, name in enumerate(PARTITIONS):
        members = [s for s, a in zip(slices, assigned) if a == part_idx]
        out.append(SliceSet.from_slices(name, members))
    return tuple(out)
