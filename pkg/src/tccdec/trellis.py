"""Binary trellises for the constituent codes of a trellis-constrained code.

Labels are bipolar: bit 0 maps to +1 and bit 1 maps to -1.  A trellis has
``n`` sections; section ``k`` carries the transmitted symbol at position
``positions[k]``, which is how an interleaver is expressed without
reordering any trellis layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_ENUM_N = 24


def bits_to_bipolar(bits) -> np.ndarray:
    return (1 - 2 * np.asarray(bits, dtype=np.int8)).astype(np.int8)


def bipolar_to_bits(word) -> np.ndarray:
    return ((1 - np.asarray(word, dtype=np.int8)) // 2).astype(np.int8)


def as_word(word, n: int | None = None) -> np.ndarray:
    """Validate a bipolar word and return it as an int8 array."""
    arr = np.asarray(word)
    if arr.ndim != 1:
        raise ValueError("a word must be one-dimensional")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("word symbols must be -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"word length {arr.shape[0]} does not match code length {n}")
    return arr.astype(np.int8)


@dataclass(frozen=True, eq=False)
class Trellis:
    """Layered graph whose start-to-end paths spell the codewords.

    Edges of all sections are stored in flat arrays; the edges of section
    ``k`` are ``edge_*[section_ptr[k]:section_ptr[k + 1]]``.  Layer 0 holds
    only the start state 0.  ``end_mask`` marks the accepting states of
    layer ``n``.
    """

    n: int
    num_states: int
    edge_from: np.ndarray
    edge_to: np.ndarray
    edge_label: np.ndarray
    section_ptr: np.ndarray
    end_mask: np.ndarray
    positions: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.positions is None:
            object.__setattr__(self, "positions", np.arange(self.n, dtype=np.int64))
        for name in ("edge_from", "edge_to", "edge_label", "section_ptr", "end_mask", "positions"):
            getattr(self, name).setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.edge_from.shape[0])

    def section(self, k: int):
        """Return ``(from, to, label)`` arrays of section ``k``."""
        lo, hi = self.section_ptr[k], self.section_ptr[k + 1]
        return self.edge_from[lo:hi], self.edge_to[lo:hi], self.edge_label[lo:hi]

    @property
    def sections(self):
        return [self.section(k) for k in range(self.n)]

    def permuted(self, perm) -> "Trellis":
        """Attach the trellis to new symbol positions.

        ``perm[k]`` (0-based) is the transmitted position carried by what
        was previously position ``k``.
        """
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise ValueError(f"not a permutation of 0..{self.n - 1}")
        return Trellis(
            self.n, self.num_states, self.edge_from, self.edge_to, self.edge_label,
            self.section_ptr, self.end_mask, perm[self.positions],
        )

    def without_edge(self, index: int) -> "Trellis":
        keep = np.ones(self.num_edges, dtype=bool)
        keep[index] = False
        return _from_edges(self.n, self.num_states, self.edge_from, self.edge_to,
                           self.edge_label, self.section_ptr, keep, self.end_mask,
                           self.positions, trim=False)


@dataclass(frozen=True, eq=False)
class IntersectionCode:
    """The code C1 ∩ C2 given by two trellises over the same positions."""

    trellis1: Trellis
    trellis2: Trellis

    def __post_init__(self):
        if self.trellis1.n != self.trellis2.n:
            raise ValueError(
                f"constituent lengths differ: {self.trellis1.n} != {self.trellis2.n}")

    @property
    def n(self) -> int:
        return self.trellis1.n

    def contains(self, word) -> bool:
        return contains(self.trellis1, word) and contains(self.trellis2, word)


def _from_edges(n, num_states, e_from, e_to, e_label, ptr, keep, end_mask, positions, trim=True):
    e_from = np.asarray(e_from, dtype=np.int64)
    e_to = np.asarray(e_to, dtype=np.int64)
    e_label = np.asarray(e_label, dtype=np.int8)
    ptr = np.asarray(ptr, dtype=np.int64)
    section_of = np.repeat(np.arange(n), np.diff(ptr))
    if trim:
        keep = keep & _useful_edges(n, num_states, e_from, e_to, ptr, keep, end_mask)
    counts = np.bincount(section_of[keep], minlength=n)
    new_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return Trellis(n, num_states, e_from[keep].copy(), e_to[keep].copy(),
                   e_label[keep].copy(), new_ptr, np.asarray(end_mask, dtype=bool).copy(),
                   np.asarray(positions, dtype=np.int64).copy())


def _useful_edges(n, num_states, e_from, e_to, ptr, keep, end_mask):
    """Edges lying on at least one start-to-end path."""
    fwd = np.zeros((n + 1, num_states), dtype=bool)
    fwd[0, 0] = True
    for k in range(n):
        sl = slice(ptr[k], ptr[k + 1])
        ok = keep[sl] & fwd[k, e_from[sl]]
        fwd[k + 1, e_to[sl][ok]] = True
    bwd = np.zeros((n + 1, num_states), dtype=bool)
    bwd[n] = end_mask
    for k in range(n - 1, -1, -1):
        sl = slice(ptr[k], ptr[k + 1])
        ok = keep[sl] & bwd[k + 1, e_to[sl]]
        bwd[k, e_from[sl][ok]] = True
    useful = np.zeros(e_from.shape[0], dtype=bool)
    for k in range(n):
        sl = slice(ptr[k], ptr[k + 1])
        useful[sl] = fwd[k, e_from[sl]] & bwd[k + 1, e_to[sl]]
    return useful


class _Builder:
    def __init__(self, n: int, num_states: int):
        self.n = n
        self.num_states = num_states
        self.sections: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]

    def add(self, k: int, src: int, dst: int, bit: int):
        self.sections[k].append((src, dst, 1 - 2 * bit))

    def build(self, end_states) -> Trellis:
        if self.n < 1:
            raise ValueError("a trellis needs at least one section")
        ptr = np.concatenate([[0], np.cumsum([len(s) for s in self.sections])])
        edges = np.array([e for sec in self.sections for e in sorted(sec)], dtype=np.int64).reshape(-1, 3)
        end_mask = np.zeros(self.num_states, dtype=bool)
        end_mask[list(end_states)] = True
        t = _from_edges(self.n, self.num_states, edges[:, 0], edges[:, 1], edges[:, 2],
                        ptr, np.ones(len(edges), dtype=bool), end_mask, np.arange(self.n))
        if t.num_edges == 0:
            raise ValueError("trellis has no start-to-end path")
        return t


def build_conv_trellis(generators, memory: int, info_len: int, terminated: bool = True) -> Trellis:
    """Trellis of a feedforward convolutional code.

    ``generators`` are octal strings or integers whose most significant bit
    (of ``memory + 1`` bits) taps the current input.  Each time step emits
    one symbol per generator, so the trellis has
    ``(info_len + memory * terminated) * len(generators)`` sections.
    Intermediate layers inside a time step use state ``2 * register + u``.
    """
    if memory < 1:
        raise ValueError("memory must be >= 1")
    if info_len < 1:
        raise ValueError("info_len must be >= 1")
    gens = [int(g, 8) if isinstance(g, str) else int(g) for g in generators]
    if not gens:
        raise ValueError("at least one generator is required")
    for g in gens:
        if g <= 0:
            raise ValueError(f"invalid generator {oct(g)}: zero polynomial")
        if g >= 1 << (memory + 1):
            raise ValueError(f"generator {oct(g)} does not fit in memory + 1 = {memory + 1} bits")

    n_out = len(gens)
    steps = info_len + (memory if terminated else 0)
    builder = _Builder(steps * n_out, max(1 << memory, 2 << memory if n_out > 1 else 0))
    for t in range(steps):
        inputs = (0, 1) if t < info_len else (0,)
        for s in range(1 << memory):
            for u in inputs:
                reg = (u << memory) | s
                out = [bin(reg & g).count("1") & 1 for g in gens]
                nxt = reg >> 1
                mid = 2 * s + u
                base = t * n_out
                if n_out == 1:
                    builder.add(base, s, nxt, out[0])
                    continue
                builder.add(base, s, mid, out[0])
                for q in range(1, n_out - 1):
                    builder.add(base + q, mid, mid, out[q])
                builder.add(base + n_out - 1, mid, nxt, out[-1])
    ends = [0] if terminated else range(1 << memory)
    return builder.build(ends)


def build_check_trellis(check_rows) -> Trellis:
    """Syndrome trellis of the words satisfying every parity check.

    The state after section ``j`` is the partial syndrome of the first
    ``j + 1`` bits, row ``i`` stored in bit ``i``.
    """
    H = np.asarray(check_rows)
    if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
        raise ValueError("check matrix must have m >= 1 rows and n >= 1 columns")
    if not np.all((H == 0) | (H == 1)):
        raise ValueError("check matrix entries must be 0 or 1")
    if np.any(H.sum(axis=1) == 0):
        raise ValueError("all-zero check row is degenerate")
    m, n = H.shape
    cols = [int(sum(int(H[i, j]) << i for i in range(m))) for j in range(n)]
    builder = _Builder(n, 1 << m)
    layer = {0}
    for j in range(n):
        nxt = set()
        for s in sorted(layer):
            for bit in (0, 1):
                d = s ^ (cols[j] if bit else 0)
                builder.add(j, s, d, bit)
                nxt.add(d)
        layer = nxt
    return builder.build([0])


def full_trellis(n: int) -> Trellis:
    """Trellis of the whole space {-1, +1}^n."""
    builder = _Builder(n, 1)
    for j in range(n):
        builder.add(j, 0, 0, 0)
        builder.add(j, 0, 0, 1)
    return builder.build([0])


def repetition_trellis(n: int) -> Trellis:
    if n < 2:
        return full_trellis(n)
    rows = np.zeros((n - 1, n), dtype=np.int8)
    for i in range(n - 1):
        rows[i, i] = rows[i, i + 1] = 1
    return build_check_trellis(rows)


def contains(trellis: Trellis, word) -> bool:
    """True iff ``word`` labels a start-to-end path of ``trellis``."""
    word = as_word(word, trellis.n)
    reach = np.zeros(trellis.num_states, dtype=bool)
    reach[0] = True
    for k in range(trellis.n):
        src, dst, lab = trellis.section(k)
        ok = reach[src] & (lab == word[trellis.positions[k]])
        reach = np.zeros_like(reach)
        reach[dst[ok]] = True
        if not reach.any():
            return False
    return bool(np.any(reach & trellis.end_mask))


def contains_many(trellis: Trellis, words: np.ndarray) -> np.ndarray:
    """Vectorised membership over the rows of ``words``."""
    words = np.asarray(words)
    if words.ndim != 2 or words.shape[1] != trellis.n:
        raise ValueError(f"expected an array of shape (N, {trellis.n})")
    reach = np.zeros((words.shape[0], trellis.num_states), dtype=bool)
    reach[:, 0] = True
    for k in range(trellis.n):
        src, dst, lab = trellis.section(k)
        sym = words[:, trellis.positions[k]]
        ok = reach[:, src] & (sym[:, None] == lab[None, :])
        new = np.zeros_like(reach)
        for e in range(src.shape[0]):
            new[:, dst[e]] |= ok[:, e]
        reach = new
    return np.any(reach & trellis.end_mask[None, :], axis=1)


def enumerate_codewords(trellis: Trellis) -> np.ndarray:
    """All codewords as rows of an int8 array, sorted lexicographically.

    Symbols compare as -1 < +1.  Refuses trellises longer than 24.
    """
    n = trellis.n
    if n > MAX_ENUM_N:
        raise ValueError(f"refusing to enumerate a code of length {n} > {MAX_ENUM_N}")
    # prefixes per state as section-order bit masks, bit=1 for label -1
    prefixes = {0: np.zeros(1, dtype=np.int64)}
    for k in range(n):
        src, dst, lab = trellis.section(k)
        nxt: dict[int, list[np.ndarray]] = {}
        for s, d, a in zip(src.tolist(), dst.tolist(), lab.tolist()):
            if s in prefixes:
                nxt.setdefault(d, []).append(prefixes[s] | (np.int64(a < 0) << k))
        prefixes = {d: np.concatenate(v) for d, v in nxt.items()}
    finals = [v for d, v in prefixes.items() if trellis.end_mask[d]]
    if not finals:
        return np.zeros((0, n), dtype=np.int8)
    masks = np.concatenate(finals)
    bits = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)
    words = np.empty_like(bits)
    words[:, trellis.positions] = 1 - 2 * bits
    words = np.unique(words, axis=0)  # lexicographic with -1 < +1
    return words
