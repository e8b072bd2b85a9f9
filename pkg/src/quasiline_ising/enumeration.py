"""Exhaustive spin enumeration with Gray-code incremental cut updates.

A configuration is an integer whose bit ``v`` is set iff vertex ``v`` has
spin ``+``. Vertices ``0..k-1`` form the *low* block, enumerated as a
vectorised array of all ``2**k`` patterns; the remaining *high* vertices are
walked in Gray-code order so each step flips one high vertex and updates the
cut vector by that vertex's local contribution only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graphs import Graph

DEFAULT_ENUMERATION_CAP = 26
LOW_BITS = 18


class EnumerationCapError(ValueError):
    """The requested exhaustive enumeration exceeds the configured cap."""


def check_cap(n: int, cap: int, what: str = "graph") -> None:
    if n > cap:
        raise EnumerationCapError(
            f"{what} has {n} vertices, over the enumeration cap of {cap}; "
            "use the gadget-marginalised routines for reduction instances"
        )


@dataclass
class GrayBlocks:
    """Iterate ``(high, cuts)`` over all (or half of all) configurations.

    ``cuts[low]`` is the cut size of configuration ``(high << k) | low``.
    With ``half=True`` only configurations whose top vertex is ``-`` are
    visited, which suffices whenever the quantity is invariant under global
    spin flip.
    """

    graph: Graph
    half: bool = False
    low_bits: int = LOW_BITS

    def __post_init__(self):
        g = self.graph
        self.k = min(g.n, self.low_bits)
        self.h = g.n - self.k
        idx = np.arange(1 << self.k, dtype=np.int64)
        self.bits = ((idx[None, :] >> np.arange(self.k)[:, None]) & 1).astype(np.int8)

    def low_popcount(self) -> np.ndarray:
        return self.bits.sum(axis=0, dtype=np.int64)

    def __iter__(self) -> Iterator[tuple[int, np.ndarray]]:
        g, k, h = self.graph, self.k, self.h
        low_cut = np.zeros(1 << k, dtype=np.int32)
        cross = np.zeros(1 << k, dtype=np.int32)
        # flip_gain[j]: change of the cross cut when high vertex j goes - -> +
        flip_gain = [np.zeros(1 << k, dtype=np.int32) for _ in range(h)]
        high_nbrs: list[list[int]] = [[] for _ in range(h)]
        for u, v in g.edges:
            if v < k:
                low_cut += self.bits[u] ^ self.bits[v]
            elif u < k:
                cross += self.bits[u]
                flip_gain[v - k] += 1 - 2 * self.bits[u].astype(np.int32)
            else:
                high_nbrs[u - k].append(v - k)
                high_nbrs[v - k].append(u - k)

        steps = 1 << h
        if self.half and h > 0:
            steps >>= 1
        elif self.half:
            raise ValueError("half enumeration needs at least one high vertex")
        base = low_cut + cross
        state = 0
        high_cut = 0
        yield 0, base + high_cut
        for i in range(1, steps):
            j = (i & -i).bit_length() - 1
            on = (state >> j) & 1
            for x in high_nbrs[j]:
                high_cut += 1 - 2 * (on ^ ((state >> x) & 1))
            if on:
                base -= flip_gain[j]
            else:
                base += flip_gain[j]
            state ^= 1 << j
            yield state, base + high_cut


def all_cut_sizes(g: Graph, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Cut size of every configuration, indexed by configuration integer."""
    check_cap(g.n, cap)
    blocks = GrayBlocks(g)
    out = np.empty(1 << g.n, dtype=np.int32)
    size = 1 << blocks.k
    for high, cuts in blocks:
        out[high * size:(high + 1) * size] = cuts
    return out


def cut_histogram(g: Graph, cap: int = DEFAULT_ENUMERATION_CAP) -> list[int]:
    """``N[k]`` = number of configurations with cut size ``k``."""
    check_cap(g.n, cap)
    m = g.m
    if g.n == 0:
        return [1]
    counts = np.zeros(m + 1, dtype=np.int64)
    use_half = g.n > LOW_BITS
    for _, cuts in GrayBlocks(g, half=use_half):
        counts += np.bincount(cuts, minlength=m + 1)
    if use_half:
        counts *= 2
    return [int(c) for c in counts]


def plus_cut_histogram(g: Graph, cap: int = DEFAULT_ENUMERATION_CAP) -> list[list[int]]:
    """``N[k][j]`` = number of configurations with ``k`` plus spins and cut ``j``."""
    check_cap(g.n, cap)
    n, m = g.n, g.m
    counts = np.zeros((n + 1) * (m + 1), dtype=np.int64)
    blocks = GrayBlocks(g)
    low_pop = blocks.low_popcount()
    for high, cuts in blocks:
        key = (low_pop + high.bit_count()) * (m + 1) + cuts
        counts += np.bincount(key, minlength=(n + 1) * (m + 1))
    table = counts.reshape(n + 1, m + 1)
    return [[int(c) for c in row] for row in table]


def spins_from_index(index: int, n: int) -> np.ndarray:
    return np.where((index >> np.arange(n)) & 1, 1, -1).astype(np.int8)


def index_from_spins(spins) -> int:
    return sum(1 << v for v, s in enumerate(spins) if s > 0)
