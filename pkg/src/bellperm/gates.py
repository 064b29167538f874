"""Bell-preserving two-pair gates and their permutation tables.

A bilateral two-pair gate is written as five small indices::

    Alice: p . g      Bob: g      with   g = g0 . (h (x) f)

``g0`` is one of 20 coset representatives of the phaseless two-qubit Clifford
group modulo single-qubit phaseless Cliffords, ``h`` and ``f`` are among the 6
phaseless single-qubit Cliffords, and ``p = p1 (x) p2`` is a Pauli applied by
Alice after ``g``. Indices run over ``20 * 6 * 6 * 4 * 4 = 11520`` distinct gates.

Every table here is derived from :mod:`bellperm.clifford` by conjugating Bell
pair stabilizer tableaux; nothing is typed in by hand. The factored tables are
what the simulators use: a gate's action on the joint 4-bit code
``c = code_a | code_b << 2`` is ::

    perm(c) = mask[p1] | mask[p2] << 2  XOR  q_perm[g0][c1[h][c & 3] | c1[f][c >> 2] << 2]
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import clifford as cl

TABLE_FORMAT = "bellperm-gate-tables"
TABLE_VERSION = 1
N_COSETS = 20
N_C1 = 6
N_PAULI = 4
N_BP_GATES = N_COSETS * N_C1 * N_C1 * N_PAULI * N_PAULI
AA = 0b1111

#: Pauli index order used by gate parameters.
PAULI_ORDER = ("I", "X", "Y", "Z")


class TableIntegrityError(RuntimeError):
    """A gate-table file is corrupted or fails a consistency check."""


class BPGateParams(NamedTuple):
    """Fixed-length parameterization of one two-pair Bell-preserving gate."""

    g0: int
    h: int
    f: int
    p1: int
    p2: int

    def index(self) -> int:
        return (((self.g0 * N_C1 + self.h) * N_C1 + self.f) * N_PAULI + self.p1) * N_PAULI + self.p2

    @classmethod
    def from_index(cls, idx: int) -> "BPGateParams":
        if not 0 <= idx < N_BP_GATES:
            raise ValueError(f"gate index {idx} outside 0..{N_BP_GATES - 1}")
        idx, p2 = divmod(idx, N_PAULI)
        idx, p1 = divmod(idx, N_PAULI)
        idx, f = divmod(idx, N_C1)
        g0, h = divmod(idx, N_C1)
        return cls(g0, h, f, p1, p2)

    def validate(self) -> None:
        bounds = (N_COSETS, N_C1, N_C1, N_PAULI, N_PAULI)
        for name, v, hi in zip(self._fields, self, bounds):
            if not 0 <= v < hi:
                raise ValueError(f"{name}={v} outside 0..{hi - 1}")


IDENTITY = BPGateParams(0, 0, 0, 0, 0)
CNOT = BPGateParams(1, 0, 0, 0, 0)
SWAP = BPGateParams(2, 0, 0, 0, 0)


# Derivation ----------------------------------------------------------------------


def single_qubit_cliffords() -> list[cl.CliffordGate]:
    """The 6 phaseless single-qubit Cliffords, identity first."""
    gates = cl.enumerate_cliffords(1, phaseless=True)
    ident = cl.CliffordGate.identity(1).symplectic_key()
    gates.sort(key=lambda g: g.symplectic_key() != ident)
    return gates


def pauli_operators() -> list[cl.PauliOperator]:
    return [cl.PauliOperator.from_string(p) for p in PAULI_ORDER]


def derive_cosets() -> list[cl.CliffordGate]:
    """Coset representatives of ``C*_2 / (C*_1 (x) C*_1)``.

    Identity, CNOT and SWAP represent their own cosets and come first; every
    other coset is represented by its smallest :meth:`symplectic_key` and the
    rest are ordered by that key.
    """
    c2 = cl.enumerate_cliffords(2, phaseless=True)
    c1 = single_qubit_cliffords()
    local = [h.tensor(f) for h in c1 for f in c1]
    coset_of: dict[tuple, frozenset] = {}
    cosets: dict[frozenset, list[tuple]] = {}
    by_key = {g.symplectic_key(): g for g in c2}
    for g in c2:
        k = g.symplectic_key()
        if k in coset_of:
            continue
        members = frozenset((g @ loc).symplectic_key() for loc in local)
        for m in members:
            coset_of[m] = members
        cosets[members] = sorted(members)
    if len(cosets) != N_COSETS or any(len(m) != N_C1 * N_C1 for m in cosets):
        raise TableIntegrityError(
            f"coset decomposition gave {len(cosets)} cosets of sizes {sorted({len(m) for m in cosets})}"
        )
    preferred = [cl.CliffordGate.identity(2), cl.CNOT, cl.SWAP]
    reps = []
    used = set()
    for g in preferred:
        members = coset_of[g.symplectic_key()]
        if members in used:
            raise TableIntegrityError(f"{g} shares a coset with an earlier preferred gate")
        used.add(members)
        reps.append(g)
    rest = sorted(m[0] for members, m in cosets.items() if members not in used)
    reps.extend(by_key[k] for k in rest)
    return reps


def _bilateral_perm(g: cl.CliffordGate, alice_pauli: cl.PauliOperator | None = None) -> list[int]:
    """Permutation of joint Bell codes for ``g`` on Alice and Bob (then a Pauli on Alice)."""
    m = g.n
    alice = list(range(m))
    bob = list(range(m, 2 * m))
    perm = []
    for code in range(4**m):
        codes = [(code >> (2 * j)) & 3 for j in range(m)]
        t = cl.bell_pair_tableau(codes)
        t = cl.apply_gate_to_tableau(t, g, alice)
        t = cl.apply_gate_to_tableau(t, g, bob)
        if alice_pauli is not None:
            t = cl.apply_gate_to_tableau(t, cl.CliffordGate.pauli(alice_pauli), alice)
        out = cl.read_bell_codes(t)
        perm.append(sum(c << (2 * j) for j, c in enumerate(out)))
    return perm


def bp_gate_clifford(params: BPGateParams, reps=None, c1=None) -> tuple[cl.CliffordGate, cl.PauliOperator]:
    """The two-qubit Clifford ``g`` and Alice's Pauli for a parameter tuple."""
    reps = reps if reps is not None else derive_cosets()
    c1 = c1 if c1 is not None else single_qubit_cliffords()
    g = reps[params.g0] @ c1[params.h].tensor(c1[params.f])
    paulis = pauli_operators()
    p = cl.PauliOperator.from_string(paulis[params.p1].letters() + paulis[params.p2].letters())
    return g, p


def derive_two_pair_perm_oracle(params: BPGateParams, reps=None, c1=None) -> list[int]:
    """Two-pair permutation computed directly on a 4-qubit tableau."""
    g, p = bp_gate_clifford(params, reps, c1)
    return _bilateral_perm(g, p)


def derive_single_pair_perms(c1=None) -> list[tuple[tuple[int, ...], list[tuple[int, int]]]]:
    """Distinct single-pair permutations from bilateral ``h`` plus an Alice Pauli.

    Returns ``[(perm, [(h_index, pauli_index), ...]), ...]`` in first-seen order.
    """
    c1 = c1 if c1 is not None else single_qubit_cliffords()
    paulis = pauli_operators()
    seen: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    for hi, h in enumerate(c1):
        for pi, p in enumerate(paulis):
            perm = tuple(_bilateral_perm(h, p))
            seen.setdefault(perm, []).append((hi, pi))
    return list(seen.items())


# Tables ----------------------------------------------------------------------------


@dataclass
class GateTables:
    """Factored permutation tables for every two-pair and single-pair gate."""

    q_keys: list[tuple[int, ...]]
    q_perms: np.ndarray  # (20, 16) uint8
    c1_keys: list[tuple[int, ...]]
    c1_perms: np.ndarray  # (6, 4) uint8
    pauli_masks: np.ndarray  # (4,) uint8
    single_pair_perms: np.ndarray  # (m, 4) uint8
    single_pair_sources: list[list[tuple[int, int]]]
    _fused: np.ndarray | None = field(default=None, repr=False)
    _good: np.ndarray | None = field(default=None, repr=False)

    @property
    def fused(self) -> np.ndarray:
        """All 11520 two-pair permutations, shape ``(11520, 16)``, by flat index."""
        if self._fused is None:
            c = np.arange(16)
            lo, hi = c & 3, c >> 2
            # local = c1[h][lo] | c1[f][hi] << 2, for every (h, f)
            local = self.c1_perms[:, None, lo] | (self.c1_perms[None, :, hi] << 2)  # (6, 6, 16)
            g = self.q_perms[np.arange(N_COSETS)[:, None, None, None], local[None]]  # (20, 6, 6, 16)
            masks = self.pauli_masks[:, None] | (self.pauli_masks[None, :] << 2)  # (4, 4)
            full = g[:, :, :, None, None, :] ^ masks[None, None, None, :, :, None]
            self._fused = np.ascontiguousarray(full.reshape(N_BP_GATES, 16).astype(np.uint8))
            self._fused.setflags(write=False)
        return self._fused

    def two_pair_perm(self, params: BPGateParams | int) -> np.ndarray:
        idx = params if isinstance(params, int) else params.index()
        return self.fused[idx]

    def apply(self, params: BPGateParams, code_a: int, code_b: int) -> tuple[int, int]:
        """Constant-time application to two 2-bit codes via the factored tables."""
        c1 = self.c1_perms
        joint = int(self.q_perms[params.g0, c1[params.h, code_a] | (c1[params.f, code_b] << 2)])
        joint ^= int(self.pauli_masks[params.p1]) | (int(self.pauli_masks[params.p2]) << 2)
        return joint & 3, joint >> 2

    @property
    def good_subset(self) -> np.ndarray:
        """Flat indices of gates that map ``AA`` to ``AA``."""
        if self._good is None:
            self._good = np.flatnonzero(self.fused[:, AA] == AA)
            self._good.setflags(write=False)
        return self._good

    def counts(self) -> dict[str, int]:
        return {
            "cosets": len(self.q_keys),
            "c1": len(self.c1_keys),
            "paulis": len(self.pauli_masks),
            "bp_gates": N_BP_GATES,
            "distinct_bp_perms": int(len({row.tobytes() for row in self.fused})),
            "single_pair_perms": len(self.single_pair_perms),
            "good_gates": int(len(self.good_subset)),
        }

    # Serialization

    def payload(self) -> dict:
        return {
            "format": TABLE_FORMAT,
            "version": TABLE_VERSION,
            "q_keys": [list(k) for k in self.q_keys],
            "q_perms": self.q_perms.tolist(),
            "c1_keys": [list(k) for k in self.c1_keys],
            "c1_perms": self.c1_perms.tolist(),
            "pauli_order": list(PAULI_ORDER),
            "pauli_masks": self.pauli_masks.tolist(),
            "single_pair_perms": self.single_pair_perms.tolist(),
            "single_pair_sources": [[list(s) for s in src] for src in self.single_pair_sources],
            "counts": {
                "cosets": len(self.q_keys),
                "c1": len(self.c1_keys),
                "bp_gates": N_BP_GATES,
                "good_gates": int(len(self.good_subset)),
                "single_pair_perms": len(self.single_pair_perms),
            },
        }

    @functools.cached_property
    def hash(self) -> str:
        return _content_hash(self.payload())

    def to_json(self) -> str:
        doc = self.payload()
        doc["sha256"] = _content_hash(doc)
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    def save(self, path: str | os.PathLike) -> str:
        Path(path).write_text(self.to_json())
        return self.hash

    @classmethod
    def from_json(cls, text: str) -> "GateTables":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TableIntegrityError(f"gate table is not valid JSON: {exc}") from exc
        stored = doc.pop("sha256", None)
        if stored is None:
            raise TableIntegrityError("gate table has no sha256 field")
        actual = _content_hash(doc)
        if stored != actual:
            raise TableIntegrityError(f"gate table hash mismatch: stored {stored[:12]}, computed {actual[:12]}")
        if doc.get("format") != TABLE_FORMAT or doc.get("version") != TABLE_VERSION:
            raise TableIntegrityError(f"unsupported table format {doc.get('format')} v{doc.get('version')}")
        tables = cls(
            q_keys=[tuple(k) for k in doc["q_keys"]],
            q_perms=np.array(doc["q_perms"], dtype=np.uint8),
            c1_keys=[tuple(k) for k in doc["c1_keys"]],
            c1_perms=np.array(doc["c1_perms"], dtype=np.uint8),
            pauli_masks=np.array(doc["pauli_masks"], dtype=np.uint8),
            single_pair_perms=np.array(doc["single_pair_perms"], dtype=np.uint8),
            single_pair_sources=[[tuple(s) for s in src] for src in doc["single_pair_sources"]],
        )
        check_tables(tables)
        return tables

    @classmethod
    def load(cls, path: str | os.PathLike) -> "GateTables":
        return cls.from_json(Path(path).read_text())


def _content_hash(doc: dict) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def check_tables(t: GateTables) -> None:
    """Cheap structural checks; raises :class:`TableIntegrityError`."""
    problems = []
    if t.q_perms.shape != (N_COSETS, 16):
        problems.append(f"q_perms shape {t.q_perms.shape}")
    if t.c1_perms.shape != (N_C1, 4):
        problems.append(f"c1_perms shape {t.c1_perms.shape}")
    for name, arr, size in (("q_perms", t.q_perms, 16), ("c1_perms", t.c1_perms, 4), ("single_pair_perms", t.single_pair_perms, 4)):
        for i, row in enumerate(arr):
            if sorted(row.tolist()) != list(range(size)):
                problems.append(f"{name}[{i}] is not a permutation")
    if sorted(t.pauli_masks.tolist()) != [0, 1, 2, 3]:
        problems.append("pauli masks are not a permutation of 0..3")
    if problems:
        raise TableIntegrityError("; ".join(problems))


def derive_tables() -> GateTables:
    """Derive every table from the tableau oracle."""
    reps = derive_cosets()
    c1 = single_qubit_cliffords()
    q_perms = np.array([_bilateral_perm(g) for g in reps], dtype=np.uint8)
    c1_perms = np.array([_bilateral_perm(h) for h in c1], dtype=np.uint8)
    ident1 = cl.CliffordGate.identity(1)
    masks = []
    for p in pauli_operators():
        perm = _bilateral_perm(ident1, p)
        mask = perm[0]
        if any(perm[c] != c ^ mask for c in range(4)):
            raise TableIntegrityError(f"Pauli {p} does not act as an XOR mask")
        masks.append(mask)
    singles = derive_single_pair_perms(c1)
    tables = GateTables(
        q_keys=[g.symplectic_key() for g in reps],
        q_perms=q_perms,
        c1_keys=[h.symplectic_key() for h in c1],
        c1_perms=c1_perms,
        pauli_masks=np.array(masks, dtype=np.uint8),
        single_pair_perms=np.array([p for p, _ in singles], dtype=np.uint8),
        single_pair_sources=[src for _, src in singles],
    )
    check_tables(tables)
    if tables.fused[IDENTITY.index()].tolist() != list(range(16)):
        raise TableIntegrityError("identity parameters do not give the identity permutation")
    return tables


@functools.lru_cache(maxsize=None)
def _load_cached(path: str | None) -> GateTables:
    if path:
        return GateTables.load(path)
    return derive_tables()


def get_tables(path: str | os.PathLike | None = None) -> GateTables:
    """Shared read-only tables: from ``path``, else ``$BELLPERM_TABLES``, else derived."""
    if path is None:
        path = os.environ.get("BELLPERM_TABLES") or None
    return _load_cached(str(path) if path else None)


def filter_good_gates(tables: GateTables | None = None) -> list[BPGateParams]:
    tables = tables or get_tables()
    return [BPGateParams.from_index(int(i)) for i in tables.good_subset]


def derive_two_pair_perm(params: BPGateParams, tables: GateTables | None = None) -> np.ndarray:
    tables = tables or get_tables()
    params.validate()
    return tables.fused[params.index()]
