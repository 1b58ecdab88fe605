"""Total Kripke structures up to isomorphism, smallest first.

A structure on ``n`` states is coded by two bitmasks: transition ``(i, j)``
is bit ``i*n + j`` and "atom ``a`` holds at state ``s``" is bit ``s*m + a``.
Each isomorphism class is represented by its least member, comparing the
transition mask first and the valuation mask second.  Classes come out
ordered by state count, then transition mask, then valuation mask.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .kripke.structure import KripkeStructure
from .symbols import SymbolTable

_CHUNK = 1 << 16


def _apply(masks: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Permuted masks, shape ``(perms, len(masks))``."""
    bits = table.shape[1]
    out = np.zeros((table.shape[0], masks.size), dtype=np.int64)
    for k in range(bits):
        on = ((masks >> k) & 1).astype(bool)
        if not on.any():
            continue
        out[:, on] |= (np.int64(1) << table[:, k])[:, None]
    return out


def transition_perms(n: int) -> np.ndarray:
    perms = list(itertools.permutations(range(n)))
    out = np.empty((len(perms), n * n), dtype=np.int64)
    for p, perm in enumerate(perms):
        for i in range(n):
            for j in range(n):
                out[p, i * n + j] = perm[i] * n + perm[j]
    return out


def valuation_perms(n: int, m: int) -> np.ndarray:
    perms = list(itertools.permutations(range(n)))
    out = np.empty((len(perms), n * m), dtype=np.int64)
    for p, perm in enumerate(perms):
        for s in range(n):
            for a in range(m):
                out[p, s * m + a] = perm[s] * m + a
    return out


def total_masks(n: int, max_outdegree: int | None = None) -> np.ndarray:
    """All transition masks on ``n`` states where every state has a successor."""
    rows = np.arange(1, 1 << n, dtype=np.int64)
    if max_outdegree is not None:
        pop = np.array([bin(r).count("1") for r in rows.tolist()])
        rows = rows[pop <= max_outdegree]
    masks = np.zeros(1, dtype=np.int64)
    for i in range(n):
        masks = (masks[:, None] | (rows[None, :] << (i * n))).ravel()
    return np.sort(masks)


def canonical_transitions(n: int, max_outdegree: int | None = None) -> list[tuple[int, np.ndarray]]:
    """Least representatives of total relations, each with its automorphism indices."""
    if n == 0:
        return []
    table = transition_perms(n)
    masks = total_masks(n, max_outdegree)
    out = []
    for start in range(0, masks.size, _CHUNK):
        chunk = masks[start:start + _CHUNK]
        images = _apply(chunk, table)
        canon = images.min(axis=0) == chunk
        for col in np.flatnonzero(canon):
            autos = np.flatnonzero(images[:, col] == chunk[col])
            out.append((int(chunk[col]), autos))
    return out


def canonical_valuations(n: int, m: int, autos: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Valuation masks that are least in their orbit under the given automorphisms."""
    vals = np.arange(1 << (n * m), dtype=np.int64)
    if autos.size == 1:
        return vals
    images = _apply(vals, table[autos])
    return vals[images.min(axis=0) == vals]


@dataclass(frozen=True)
class Coded:
    """One isomorphism class representative."""

    n: int
    trans: int
    val: int


def iter_codes(
    max_states: int, m: int, min_states: int = 1, max_outdegree: int | None = None
) -> Iterator[Coded]:
    """Representatives of all total structures with ``min_states..max_states`` states."""
    for n in range(max(1, min_states), max_states + 1):
        vtable = valuation_perms(n, m)
        for t, autos in canonical_transitions(n, max_outdegree):
            for v in canonical_valuations(n, m, autos, vtable):
                yield Coded(n, t, int(v))


def count_classes(max_states: int, m: int, max_outdegree: int | None = None) -> int:
    total = 0
    for n in range(1, max_states + 1):
        vtable = valuation_perms(n, m)
        for _, autos in canonical_transitions(n, max_outdegree):
            total += canonical_valuations(n, m, autos, vtable).size
    return total


def decode(c: Coded, ap: tuple[str, ...]) -> KripkeStructure:
    """The structure with states ``s0 .. s{n-1}``."""
    n, m = c.n, len(ap)
    states = [f"s{i}" for i in range(n)]
    trans = [(states[i], states[j]) for i in range(n) for j in range(n) if c.trans >> (i * n + j) & 1]
    val = {states[s]: [ap[a] for a in range(m) if c.val >> (s * m + a) & 1] for s in range(n)}
    return KripkeStructure.build(states, trans, val, ap)


def structures(
    max_states: int, ap: tuple[str, ...], min_states: int = 1, max_outdegree: int | None = None
) -> Iterator[KripkeStructure]:
    for c in iter_codes(max_states, len(ap), min_states, max_outdegree):
        yield decode(c, ap)


@dataclass
class Batch:
    """Many small structures as one disjoint union.

    ``offsets[i]`` is the first state of part ``i``; ``sizes[i]`` its state
    count.  ``part_of[s]`` maps a union state back to its part.
    """

    union: KripkeStructure
    offsets: np.ndarray
    sizes: np.ndarray
    codes: list[Coded]

    @property
    def part_of(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.sizes)), self.sizes)

    def part(self, i: int, ap: tuple[str, ...]) -> KripkeStructure:
        return decode(self.codes[i], ap)


def batch(codes: list[Coded], ap: tuple[str, ...]) -> Batch:
    """Build the disjoint union directly from the codes, without per-part objects."""
    m = len(ap)
    sizes = np.array([c.n for c in codes], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    total = int(sizes.sum())
    src_parts, dst_parts = [], []
    labels = np.zeros((total, m), dtype=bool)
    by_n: dict[int, list[int]] = {}
    for i, c in enumerate(codes):
        by_n.setdefault(c.n, []).append(i)
    for n, idx in by_n.items():
        idx = np.array(idx, dtype=np.int64)
        trans = np.array([codes[i].trans for i in idx], dtype=np.int64)
        vals = np.array([codes[i].val for i in idx], dtype=np.int64)
        base = offsets[idx]
        for k in range(n * n):
            on = (trans >> k) & 1 == 1
            src_parts.append(base[on] + k // n)
            dst_parts.append(base[on] + k % n)
        for s in range(n):
            for a in range(m):
                labels[base + s, a] = (vals >> (s * m + a)) & 1 == 1
    src = np.concatenate(src_parts) if src_parts else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dst_parts) if dst_parts else np.empty(0, dtype=np.int64)
    names = SymbolTable.generated(total)
    union = KripkeStructure(names, src, dst, labels, tuple(ap))
    return Batch(union, offsets, sizes, list(codes))
