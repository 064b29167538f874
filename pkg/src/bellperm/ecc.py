"""Teleporting a logical qubit over purified pairs.

Each output pair that is not ``A`` leaves a Pauli by-product on the teleported
qubit: the Pauli that turns the pair back into ``A`` on one side. With the
mask layout of :mod:`bellperm.bell` that is ``mask = code ^ 3``, i.e.
``B -> Y``, ``C -> X`` (zz flipped), ``D -> Z`` (xx flipped).

Logical fidelity is scored two ways:

* threshold: the pattern weight is at most ``(d - 1) // 2``;
* decoder: a syndrome lookup table picks a minimum-weight correction and
  the run succeeds if error times correction is in the stabilizer group.
"""

from __future__ import annotations

import functools
import hashlib
import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .bell import MASK_PAULIS, BellState
from .clifford import PauliOperator

BUILTIN_CODES = ("five_qubit", "eleven_qubit")


def pair_to_pauli(code: BellState | int) -> str:
    """Pauli left on the teleported qubit by a pair in state ``code``."""
    return MASK_PAULIS[int(code) ^ 3]


def codes_to_xz(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Error patterns for rows of output codes, as ``(x, z)`` bit masks.

    ``codes`` has shape ``(samples, k)``; bit ``j`` of the result refers to
    output pair ``j``.
    """
    codes = np.asarray(codes, dtype=np.int64)
    mask = codes ^ 3
    shifts = np.arange(codes.shape[1], dtype=np.int64)
    x = (((mask >> 1) & 1) << shifts).sum(axis=1)
    z = ((mask & 1) << shifts).sum(axis=1)
    return x.astype(np.int64), z.astype(np.int64)


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class StabilizerCode:
    """A stabilizer code with one logical qubit."""

    name: str
    n_phys: int
    generators: tuple[PauliOperator, ...]
    d: int

    def __post_init__(self):
        for g in self.generators:
            if g.n != self.n_phys:
                raise ValueError(f"generator {g} does not act on {self.n_phys} qubits")
        for a, b in itertools.combinations(self.generators, 2):
            if not a.commutes(b):
                raise ValueError(f"generators {a} and {b} do not commute")
        if len(self.generators) != self.n_phys - 1:
            raise ValueError(f"need {self.n_phys - 1} generators for one logical qubit, got {len(self.generators)}")
        if _rank([(g.x, g.z) for g in self.generators], self.n_phys) != len(self.generators):
            raise ValueError("generators are not independent")

    @property
    def t(self) -> int:
        """Number of errors the code is guaranteed to correct."""
        return (self.d - 1) // 2

    @functools.cached_property
    def _gen_x(self) -> np.ndarray:
        return np.array([g.x for g in self.generators], dtype=np.int64)

    @functools.cached_property
    def _gen_z(self) -> np.ndarray:
        return np.array([g.z for g in self.generators], dtype=np.int64)

    def syndromes(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Syndrome integers (bit ``i`` = anticommutes with generator ``i``)."""
        x = np.asarray(x, dtype=np.int64)[:, None]
        z = np.asarray(z, dtype=np.int64)[:, None]
        par = (_popcount(x & self._gen_z) + _popcount(z & self._gen_x)) & 1
        return (par << np.arange(len(self.generators))).sum(axis=1)

    @functools.cached_property
    def stabilizer_keys(self) -> np.ndarray:
        """Sorted ``x | z << n`` keys of every element of the stabilizer group."""
        keys = []
        for mask in range(1 << len(self.generators)):
            x = z = 0
            for i, g in enumerate(self.generators):
                if (mask >> i) & 1:
                    x ^= g.x
                    z ^= g.z
            keys.append(x | (z << self.n_phys))
        return np.array(sorted(keys), dtype=np.int64)

    def in_stabilizer(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        keys = np.asarray(x, dtype=np.int64) | (np.asarray(z, dtype=np.int64) << self.n_phys)
        return np.isin(keys, self.stabilizer_keys)

    @functools.cached_property
    def lookup_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(corr_x, corr_z, corr_weight)`` indexed by syndrome.

        Filled in order of increasing weight so each entry is a minimum-weight
        representative of its syndrome class.
        """
        size = 1 << len(self.generators)
        cx = np.full(size, -1, dtype=np.int64)
        cz = np.full(size, -1, dtype=np.int64)
        cw = np.full(size, -1, dtype=np.int64)
        filled = 0
        for w in range(self.n_phys + 1):
            x, z = paulis_of_weight(self.n_phys, w)
            syn = self.syndromes(x, z)
            # first occurrence per syndrome at this weight
            uniq, first = np.unique(syn, return_index=True)
            new = cw[uniq] < 0
            cx[uniq[new]] = x[first[new]]
            cz[uniq[new]] = z[first[new]]
            cw[uniq[new]] = w
            filled += int(new.sum())
            if filled == size:
                break
        return cx, cz, cw

    def decode_success(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Whether the lookup decoder leaves no logical error, per pattern."""
        cx, cz, _ = self.lookup_table
        syn = self.syndromes(x, z)
        return self.in_stabilizer(np.asarray(x) ^ cx[syn], np.asarray(z) ^ cz[syn])

    def threshold_success(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        w = _popcount(np.asarray(x, dtype=np.int64) | np.asarray(z, dtype=np.int64))
        return w <= self.t

    def fingerprint(self) -> str:
        text = "\n".join(str(g) for g in self.generators) + f"\nd={self.d}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_text(self) -> str:
        lines = [f"name: {self.name}", f"distance: {self.d}"]
        lines += [str(g) for g in self.generators]
        return "\n".join(lines) + "\n"


def _rank(vectors: list[tuple[int, int]], n: int) -> int:
    rows = [x | (z << n) for x, z in vectors]
    rank = 0
    for bit in range(2 * n):
        piv = next((i for i in range(rank, len(rows)) if (rows[i] >> bit) & 1), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and (rows[i] >> bit) & 1:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def paulis_of_weight(n: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``3**w * C(n, w)`` Paulis of exactly weight ``w`` as ``(x, z)`` arrays."""
    if w == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    supports = np.array(list(itertools.combinations(range(n), w)), dtype=np.int64)  # (S, w)
    letters = np.array(list(itertools.product((1, 2, 3), repeat=w)), dtype=np.int64)  # (L, w); x=bit1, z=bit0
    xbits = ((letters >> 1) & 1)[None, :, :] << supports[:, None, :]
    zbits = (letters & 1)[None, :, :] << supports[:, None, :]
    return xbits.sum(axis=2).ravel(), zbits.sum(axis=2).ravel()


def min_logical_weight(code: StabilizerCode, max_weight: int) -> int | None:
    """Smallest weight of a logical operator, or ``None`` if above ``max_weight``.

    A logical operator commutes with every generator but is not in the
    stabilizer group.
    """
    for w in range(1, max_weight + 1):
        x, z = paulis_of_weight(code.n_phys, w)
        undetected = code.syndromes(x, z) == 0
        if np.any(undetected & ~code.in_stabilizer(x, z)):
            return w
    return None


def load_code_text(text: str, name: str | None = None) -> StabilizerCode:
    """Parse the generator-list format: ``name:``/``distance:`` headers, ``#`` comments,
    one signed Pauli string per line."""
    gens = []
    meta = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            key, val = (s.strip() for s in line.split(":", 1))
            meta[key.lower()] = val
            continue
        gens.append(PauliOperator.from_string(line))
    if not gens:
        raise ValueError("no generators found")
    if "distance" not in meta:
        raise ValueError("code file needs a 'distance:' line")
    return StabilizerCode(
        name=name or meta.get("name", "custom"),
        n_phys=gens[0].n,
        generators=tuple(gens),
        d=int(meta["distance"]),
    )


@functools.lru_cache(maxsize=None)
def builtin_code(name: str) -> StabilizerCode:
    if name not in BUILTIN_CODES:
        raise ValueError(f"unknown code {name!r}; built-ins are {BUILTIN_CODES}")
    text = resources.files("bellperm").joinpath("data", f"{name}.txt").read_text()
    return load_code_text(text, name)


def get_code(spec: str) -> StabilizerCode:
    """A built-in code by name, or a code file by path."""
    if spec in BUILTIN_CODES:
        return builtin_code(spec)
    path = Path(spec)
    if not path.exists():
        raise ValueError(f"{spec!r} is neither a built-in code nor a file")
    return load_code_text(path.read_text())


def _check_k(codes: np.ndarray, code: StabilizerCode) -> np.ndarray:
    codes = np.asarray(codes)
    if codes.ndim != 2 or codes.shape[1] != code.n_phys:
        raise ValueError(f"{code.name} needs {code.n_phys} output pairs per sample, got shape {codes.shape}")
    return codes


def logical_fidelity_threshold(codes: np.ndarray, code: StabilizerCode) -> float:
    """Fraction of samples (rows of output codes) with at most ``t`` non-A pairs."""
    codes = _check_k(codes, code)
    if len(codes) == 0:
        return float("nan")
    return float(code.threshold_success(*codes_to_xz(codes)).mean())


def logical_fidelity_decoder(codes: np.ndarray, code: StabilizerCode) -> float:
    """Fraction of samples the lookup decoder corrects."""
    codes = _check_k(codes, code)
    if len(codes) == 0:
        return float("nan")
    return float(code.decode_success(*codes_to_xz(codes)).mean())
