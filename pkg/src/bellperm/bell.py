"""Bell-diagonal state encoding.

A Bell pair is described by the signs of its two stabilizers ``XX`` and ``ZZ``.
A ``+`` sign is stored as ``1`` and a ``-`` sign as ``0``, so every pair costs
exactly two bits and a register of ``n`` pairs costs ``2n`` bits.

Bit layout
----------
Within a register, pair ``i`` occupies bit ``2i`` (the ``XX`` sign) and bit
``2i + 1`` (the ``ZZ`` sign). The same layout is used for the 2-bit *code* of a
single pair, ``code = xx | (zz << 1)``, which gives::

    A = |00> + |11>   (+XX, +ZZ)   code 3   "11"
    B = |01> - |10>   (-XX, -ZZ)   code 0   "00"
    C = |01> + |10>   (+XX, -ZZ)   code 1   "10"
    D = |00> - |11>   (-XX, +ZZ)   code 2   "01"

The phases of C and D are the ones obtained by computing the stabilizers of
the kets above (see ``bellperm.clifford.bell_state_phases``). Some references
print them the other way around; the dynamics only ever depend on the phase
bits, the letters are used for reporting.

Pauli errors are 2-bit XOR masks in the same layout. An ``X`` on one qubit of
a pair anticommutes with ``ZZ`` and flips the ``zz`` bit (mask ``2``), a ``Z``
flips the ``xx`` bit (mask ``1``), and a ``Y`` flips both (mask ``3``).
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence

import numpy as np

WORD_BITS = 64
PAIRS_PER_WORD = WORD_BITS // 2


class BellState(enum.IntEnum):
    """The four Bell states, valued by their 2-bit phase code."""

    B = 0
    C = 1
    D = 2
    A = 3

    @property
    def xx_phase(self) -> int:
        return int(self) & 1

    @property
    def zz_phase(self) -> int:
        return (int(self) >> 1) & 1

    @classmethod
    def from_phases(cls, xx_phase: int, zz_phase: int) -> "BellState":
        return cls((xx_phase & 1) | ((zz_phase & 1) << 1))

    def to_string(self) -> str:
        return f"{self.xx_phase}{self.zz_phase}"


A, B, C, D = BellState.A, BellState.B, BellState.C, BellState.D

#: Pauli name -> single-pair XOR mask.
PAULI_MASKS = {"I": 0, "Z": 1, "X": 2, "Y": 3}
MASK_PAULIS = {v: k for k, v in PAULI_MASKS.items()}


class PauliMask:
    """Per-pair 2-bit XOR masks for a Pauli applied on one side of each pair.

    Parameters
    ----------
    masks : mapping or sequence
        Either ``{pair_index: mask}`` or a dense sequence of masks, one per
        pair. Masks are ints in ``0..3`` or the letters ``I, X, Y, Z``.
    """

    __slots__ = ("masks",)

    def __init__(self, masks):
        if isinstance(masks, dict):
            items = masks.items()
        else:
            items = enumerate(masks)
        out = {}
        for i, m in items:
            if isinstance(m, str):
                m = PAULI_MASKS[m.upper()]
            m = int(m)
            if not 0 <= m <= 3:
                raise ValueError(f"mask for pair {i} must be in 0..3, got {m}")
            if i < 0:
                raise IndexError(f"negative pair index {i}")
            if m:
                out[int(i)] = m
        self.masks = out

    @classmethod
    def single(cls, pair: int, pauli) -> "PauliMask":
        return cls({pair: pauli})

    def __xor__(self, other: "PauliMask") -> "PauliMask":
        merged = dict(self.masks)
        for i, m in other.masks.items():
            merged[i] = merged.get(i, 0) ^ m
        return PauliMask(merged)

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliMask) and self.masks == other.masks

    def __hash__(self) -> int:
        return hash(frozenset(self.masks.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}:{MASK_PAULIS[m]}" for i, m in sorted(self.masks.items()))
        return f"PauliMask({{{body}}})"


class RegisterState:
    """A register of ``num_pairs`` Bell pairs packed 32 pairs per ``uint64`` word.

    Padding bits above ``2 * num_pairs`` are kept at zero. Every per-pair
    operation touches a single word, so its cost does not depend on the size
    of the register.
    """

    __slots__ = ("num_pairs", "words")

    def __init__(self, num_pairs: int, words: np.ndarray | None = None):
        if num_pairs < 1:
            raise ValueError("a register needs at least one pair")
        nwords = -(-num_pairs // PAIRS_PER_WORD)
        if words is None:
            words = np.zeros(nwords, dtype=np.uint64)
        else:
            words = np.asarray(words, dtype=np.uint64)
            if words.shape != (nwords,):
                raise ValueError(f"expected {nwords} words, got shape {words.shape}")
        self.num_pairs = num_pairs
        self.words = words

    @classmethod
    def all_a(cls, num_pairs: int) -> "RegisterState":
        state = cls(num_pairs)
        state.words[:] = np.uint64(0xFFFF_FFFF_FFFF_FFFF)
        tail = num_pairs % PAIRS_PER_WORD
        if tail:
            state.words[-1] = np.uint64((1 << (2 * tail)) - 1)
        return state

    def copy(self) -> "RegisterState":
        return RegisterState(self.num_pairs, self.words.copy())

    def _check(self, i: int) -> None:
        if not 0 <= i < self.num_pairs:
            raise IndexError(f"pair index {i} out of range for {self.num_pairs} pairs")

    def get_code(self, i: int) -> int:
        self._check(i)
        w, off = divmod(i, PAIRS_PER_WORD)
        return (int(self.words[w]) >> (2 * off)) & 3

    def set_code(self, i: int, code: int) -> None:
        self._check(i)
        w, off = divmod(i, PAIRS_PER_WORD)
        word = int(self.words[w])
        word &= ~(3 << (2 * off))
        word |= (code & 3) << (2 * off)
        self.words[w] = word

    def to_string(self) -> str:
        return "".join(BellState(self.get_code(i)).to_string() for i in range(self.num_pairs))

    @classmethod
    def from_string(cls, bits: str) -> "RegisterState":
        if len(bits) % 2 or not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a canonical state string: {bits!r}")
        pairs = [BellState.from_phases(int(bits[j]), int(bits[j + 1])) for j in range(0, len(bits), 2)]
        return encode(pairs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RegisterState)
            and self.num_pairs == other.num_pairs
            and bool(np.array_equal(self.words, other.words))
        )

    def __repr__(self) -> str:
        if self.num_pairs <= 16:
            return f"RegisterState({self.to_string()!r})"
        return f"RegisterState(num_pairs={self.num_pairs})"


def encode(pairs: Sequence[BellState | int]) -> RegisterState:
    """Pack a list of Bell states into a register."""
    if len(pairs) < 1:
        raise ValueError("encode needs at least one pair")
    state = RegisterState(len(pairs))
    for i, p in enumerate(pairs):
        state.set_code(i, int(p))
    return state


def decode(state: RegisterState) -> list[BellState]:
    return [BellState(state.get_code(i)) for i in range(state.num_pairs)]


def get_pair(state: RegisterState, i: int) -> BellState:
    return BellState(state.get_code(i))


def set_pair(state: RegisterState, i: int, pair: BellState | int) -> RegisterState:
    """Return a copy of ``state`` with pair ``i`` replaced."""
    out = state.copy()
    out.set_code(i, int(pair))
    return out


def apply_pauli_mask(state: RegisterState, mask: PauliMask) -> RegisterState:
    """XOR a Pauli mask into a copy of ``state``."""
    out = state.copy()
    apply_pauli_mask_inplace(out, mask)
    return out


def apply_pauli_mask_inplace(state: RegisterState, mask: PauliMask) -> None:
    for i, m in mask.masks.items():
        state._check(i)
    for i, m in mask.masks.items():
        w, off = divmod(i, PAIRS_PER_WORD)
        state.words[w] = int(state.words[w]) ^ (m << (2 * off))


def codes_to_string(codes: Iterable[int]) -> str:
    return "".join(BellState(c).to_string() for c in codes)
