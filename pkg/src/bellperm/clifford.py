"""A small stabilizer-tableau toolkit.

This is the reference implementation everything else is checked against. It
is written for clarity, not speed: Pauli operators are stored as Python-int
bit masks and every gate conjugates every tableau row, so applying a gate costs
``O(N)`` in the number of qubits.

Pauli convention
----------------
Qubit ``j`` maps to bit ``j`` of the ``x`` and ``z`` masks. Per qubit the two
bits read ``I=00, Z=01, X=10, Y=11`` as ``(x, z)``. Internally an operator is
``i**r * X^x * Z^z`` (all X factors to the left of all Z factors). With that
ordering the product of two operators only needs one parity correction::

    (i^r1 X^x1 Z^z1)(i^r2 X^x2 Z^z2) = i^(r1 + r2 + 2|z1 & x2|) X^(x1^x2) Z^(z1^z2)
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTER.items()}
# Appendix-style 2-bit labels, (x, z) read as a binary number.
PAULI_CODE = {"I": 0b00, "Z": 0b01, "X": 0b10, "Y": 0b11}


def _popcount(v: int) -> int:
    return v.bit_count()


@dataclass(frozen=True)
class PauliOperator:
    """A Pauli string with a phase in ``{1, i, -1, -i}``.

    ``r`` is the exponent of ``i`` in the ``X^x Z^z`` ordering described in the
    module docstring. Use :attr:`sign` for the usual Hermitian sign.
    """

    n: int
    x: int
    z: int
    r: int = 0

    def __post_init__(self):
        object.__setattr__(self, "r", self.r % 4)

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse ``"+XZ_Y"``-style strings (``_`` and ``I`` are identities)."""
        text = text.strip()
        sign = 0
        if text[:1] in "+-":
            sign = 2 if text[0] == "-" else 0
            text = text[1:]
        x = z = 0
        for j, ch in enumerate(text.upper()):
            if ch == "_":
                ch = "I"
            if ch not in _BITS:
                raise ValueError(f"bad Pauli letter {ch!r} in {text!r}")
            bx, bz = _BITS[ch]
            x |= bx << j
            z |= bz << j
        return cls(len(text), x, z, sign + _popcount(x & z))

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliOperator":
        bx, bz = _BITS[letter]
        x, z = bx << qubit, bz << qubit
        return cls(n, x, z, (0 if sign > 0 else 2) + _popcount(x & z))

    @property
    def hermitian(self) -> bool:
        return (self.r - _popcount(self.x & self.z)) % 2 == 0

    @property
    def sign(self) -> int:
        """``+1`` or ``-1`` for Hermitian operators."""
        s = (self.r - _popcount(self.x & self.z)) % 4
        if s == 0:
            return 1
        if s == 2:
            return -1
        raise ValueError(f"{self!r} is not Hermitian")

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letters(self) -> str:
        return "".join(_LETTER[((self.x >> j) & 1, (self.z >> j) & 1)] for j in range(self.n))

    def __str__(self) -> str:
        if not self.hermitian:
            s = (self.r - _popcount(self.x & self.z)) % 4
            return ("+i", "-i")[s == 3] + self.letters()
        return ("+" if self.sign > 0 else "-") + self.letters()

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
        r = self.r + other.r + 2 * _popcount(self.z & other.x)
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, r)

    def __neg__(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, self.r + 2)

    def commutes(self, other: "PauliOperator") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def unsigned(self) -> "PauliOperator":
        """The same Pauli string with sign ``+``."""
        return PauliOperator(self.n, self.x, self.z, _popcount(self.x & self.z))

    def restrict(self, qubits: Sequence[int]) -> "PauliOperator":
        """Sub-string on ``qubits`` (phase dropped)."""
        x = z = 0
        for j, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << j
            z |= ((self.z >> q) & 1) << j
        return PauliOperator(len(qubits), x, z, _popcount(x & z))


@dataclass(frozen=True)
class CliffordGate:
    """A Clifford unitary given by the conjugation images of ``X_i`` and ``Z_i``."""

    n: int
    x_images: tuple[PauliOperator, ...]
    z_images: tuple[PauliOperator, ...]

    def __post_init__(self):
        if len(self.x_images) != self.n or len(self.z_images) != self.n:
            raise ValueError("need one X and one Z image per qubit")
        gens = list(self.x_images) + list(self.z_images)
        for p in gens:
            if p.n != self.n or not p.hermitian or p.is_identity:
                raise ValueError(f"invalid generator image {p}")
        for i in range(self.n):
            for j in range(self.n):
                anti_xz = i == j
                if self.x_images[i].commutes(self.z_images[j]) == anti_xz:
                    raise ValueError("images do not preserve commutation relations")
                if j > i:
                    if not self.x_images[i].commutes(self.x_images[j]):
                        raise ValueError("images do not preserve commutation relations")
                    if not self.z_images[i].commutes(self.z_images[j]):
                        raise ValueError("images do not preserve commutation relations")

    @classmethod
    def from_strings(cls, x_images: Sequence[str], z_images: Sequence[str]) -> "CliffordGate":
        xs = tuple(PauliOperator.from_string(s) for s in x_images)
        zs = tuple(PauliOperator.from_string(s) for s in z_images)
        return cls(len(xs), xs, zs)

    @classmethod
    def identity(cls, n: int) -> "CliffordGate":
        return cls(
            n,
            tuple(PauliOperator.single(n, i, "X") for i in range(n)),
            tuple(PauliOperator.single(n, i, "Z") for i in range(n)),
        )

    @classmethod
    def pauli(cls, p: PauliOperator) -> "CliffordGate":
        """Conjugation by the Pauli ``p`` itself (flips signs of anticommuting images)."""
        base = cls.identity(p.n)
        xs = tuple(-g if not g.commutes(p) else g for g in base.x_images)
        zs = tuple(-g if not g.commutes(p) else g for g in base.z_images)
        return cls(p.n, xs, zs)

    def symplectic_key(self) -> tuple[int, ...]:
        """The images' bits, ignoring signs. Equal keys mean equal up to a Pauli."""
        key = []
        for xi, zi in zip(self.x_images, self.z_images):
            key.extend((xi.x, xi.z, zi.x, zi.z))
        return tuple(key)

    def signs(self) -> tuple[int, ...]:
        return tuple(p.sign for pair in zip(self.x_images, self.z_images) for p in pair)

    def phaseless(self) -> "CliffordGate":
        """Representative with every image sign set to ``+``."""
        return CliffordGate(
            self.n,
            tuple(p.unsigned() for p in self.x_images),
            tuple(p.unsigned() for p in self.z_images),
        )

    def __matmul__(self, other: "CliffordGate") -> "CliffordGate":
        """Operator product ``self @ other``: ``other`` acts first."""
        return CliffordGate(
            self.n,
            tuple(conjugate(self, p) for p in other.x_images),
            tuple(conjugate(self, p) for p in other.z_images),
        )

    def tensor(self, other: "CliffordGate") -> "CliffordGate":
        n = self.n + other.n

        def lift(p: PauliOperator, shift: int) -> PauliOperator:
            return PauliOperator(n, p.x << shift, p.z << shift, p.r)

        xs = tuple(lift(p, 0) for p in self.x_images) + tuple(lift(p, self.n) for p in other.x_images)
        zs = tuple(lift(p, 0) for p in self.z_images) + tuple(lift(p, self.n) for p in other.z_images)
        return CliffordGate(n, xs, zs)

    def __str__(self) -> str:
        parts = [f"X{i}->{x} Z{i}->{z}" for i, (x, z) in enumerate(zip(self.x_images, self.z_images))]
        return "; ".join(parts)


def conjugate(g: CliffordGate, p: PauliOperator) -> PauliOperator:
    """Return ``g p g^dagger``."""
    if g.n != p.n:
        raise ValueError(f"qubit count mismatch: gate on {g.n}, Pauli on {p.n}")
    out = PauliOperator(p.n, 0, 0, p.r)
    for j in range(p.n):
        if (p.x >> j) & 1:
            out = out * g.x_images[j]
    for j in range(p.n):
        if (p.z >> j) & 1:
            out = out * g.z_images[j]
    return out


# Standard gates ---------------------------------------------------------------

H = CliffordGate.from_strings(["Z"], ["X"])
S = CliffordGate.from_strings(["Y"], ["Z"])
CNOT = CliffordGate.from_strings(["XX", "_X"], ["Z_", "ZZ"])  # control 0, target 1
SWAP = CliffordGate.from_strings(["_X", "X_"], ["_Z", "Z_"])
PAULI_GATES = {
    name: CliffordGate.pauli(PauliOperator.from_string(name)) for name in ("I", "X", "Y", "Z")
}


# Stabilizer tableaux ------------------------------------------------------------


class RankDeficiencyError(ValueError):
    """The rows of a tableau are not independent."""


@dataclass(frozen=True)
class StabilizerTableau:
    """Generators of a stabilizer group, one :class:`PauliOperator` per row."""

    n: int
    rows: tuple[PauliOperator, ...]

    def __post_init__(self):
        for p in self.rows:
            if p.n != self.n:
                raise ValueError("row length does not match qubit count")
            if not p.hermitian:
                raise ValueError(f"stabilizer rows must have sign +-1, got {p}")

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "StabilizerTableau":
        ps = tuple(PauliOperator.from_string(s) for s in rows)
        return cls(ps[0].n, ps)

    def commuting(self) -> bool:
        return all(a.commutes(b) for a, b in itertools.combinations(self.rows, 2))

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.rows)


def _pivot_bits(n: int) -> list[tuple[int, int]]:
    # X/Y columns first, Z columns last.
    return [(0, j) for j in range(n)] + [(1, j) for j in range(n)]


def _has_bit(p: PauliOperator, col: tuple[int, int]) -> bool:
    kind, j = col
    return bool(((p.x if kind == 0 else p.z) >> j) & 1)


def canonicalize(t: StabilizerTableau) -> StabilizerTableau:
    """Row-reduced echelon form over the columns ``x_0..x_{n-1}, z_0..z_{n-1}``.

    Two tableaux generate the same group exactly when their canonical forms
    are equal. Raises :class:`RankDeficiencyError` if the rows are dependent.
    """
    rows = list(t.rows)
    pivot_row = 0
    for col in _pivot_bits(t.n):
        hit = next((i for i in range(pivot_row, len(rows)) if _has_bit(rows[i], col)), None)
        if hit is None:
            continue
        rows[pivot_row], rows[hit] = rows[hit], rows[pivot_row]
        piv = rows[pivot_row]
        for i in range(len(rows)):
            if i != pivot_row and _has_bit(rows[i], col):
                rows[i] = rows[i] * piv
        pivot_row += 1
        if pivot_row == len(rows):
            break
    if pivot_row < len(rows):
        raise RankDeficiencyError(f"tableau has rank {pivot_row} < {len(rows)} rows")
    return StabilizerTableau(t.n, tuple(rows))


def group_elements(t: StabilizerTableau) -> set[PauliOperator]:
    """Every element of the generated group (brute force, ``2**len(rows)`` items)."""
    out = set()
    for mask in range(1 << len(t.rows)):
        acc = PauliOperator.identity(t.n)
        for i, row in enumerate(t.rows):
            if (mask >> i) & 1:
                acc = acc * row
        out.add(acc)
    return out


def apply_gate_to_tableau(
    t: StabilizerTableau, g: CliffordGate, qubits: Sequence[int] | None = None
) -> StabilizerTableau:
    """Conjugate every row by ``g`` acting on ``qubits`` (default: all, in order)."""
    if qubits is None:
        qubits = range(t.n)
    qubits = list(qubits)
    if len(qubits) != g.n:
        raise ValueError(f"gate acts on {g.n} qubits, {len(qubits)} given")
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < t.n for q in qubits):
        raise ValueError(f"bad qubit list {qubits} for {t.n} qubits")
    sel = sum(1 << q for q in qubits)
    new_rows = []
    for row in t.rows:
        sub = PauliOperator(g.n, 0, 0, 0)
        for j, q in enumerate(qubits):
            sub = PauliOperator(g.n, sub.x | (((row.x >> q) & 1) << j), sub.z | (((row.z >> q) & 1) << j))
        img = conjugate(g, sub)
        x, z = row.x & ~sel, row.z & ~sel
        for j, q in enumerate(qubits):
            x |= ((img.x >> j) & 1) << q
            z |= ((img.z >> j) & 1) << q
        new_rows.append(PauliOperator(t.n, x, z, row.r + img.r))
    return StabilizerTableau(t.n, tuple(new_rows))


def measure_pauli(t: StabilizerTableau, p: PauliOperator) -> tuple[StabilizerTableau, int | None]:
    """Measure a Hermitian Pauli on a full-rank stabilizer state.

    Returns ``(t, +1 or -1)`` when the outcome is deterministic and ``(t, None)``
    when ``p`` anticommutes with the group (random outcome; not sampled here).
    """
    if p.n != t.n:
        raise ValueError(f"qubit count mismatch: tableau {t.n}, Pauli {p.n}")
    if any(not p.commutes(r) for r in t.rows):
        return t, None
    canon = canonicalize(t)
    acc = PauliOperator.identity(t.n)
    resid = p.unsigned()
    for row, col in _pivots(canon):
        if _has_bit(resid, col):
            acc = acc * row
            resid = resid * row
    if not resid.is_identity:
        raise RankDeficiencyError("Pauli commutes with the group but is not in it; tableau is not full rank")
    return t, acc.sign * p.sign


def _pivots(canon: StabilizerTableau):
    cols = _pivot_bits(canon.n)
    ci = 0
    for row in canon.rows:
        while not _has_bit(row, cols[ci]):
            ci += 1
        yield row, cols[ci]
        ci += 1


# Enumeration ----------------------------------------------------------------------


def _symplectic_images(n: int):
    """Yield every list of binary images ``[(X0', Z0'), (X1', Z1'), ...]``."""
    vecs = [PauliOperator(n, v & ((1 << n) - 1), v >> n) for v in range(1, 4**n)]
    vecs.sort(key=lambda p: (p.x, p.z))

    def extend(prefix):
        if len(prefix) == n:
            yield list(prefix)
            return
        placed = [p for pair in prefix for p in pair]
        for xi in vecs:
            if not all(xi.commutes(q) for q in placed):
                continue
            for zi in vecs:
                if xi.commutes(zi) or not all(zi.commutes(q) for q in placed):
                    continue
                yield from extend(prefix + [(xi, zi)])

    yield from extend([])


def enumerate_cliffords(n: int, phaseless: bool = False) -> list[CliffordGate]:
    """All ``n``-qubit Clifford gates for ``n`` in ``{1, 2}``.

    With ``phaseless=True`` one representative (all image signs ``+``) is
    returned per class modulo Pauli factors, otherwise every sign choice.
    """
    if n not in (1, 2):
        raise ValueError("enumeration is supported for n = 1 or 2")
    gates = []
    seen = set()
    for images in _symplectic_images(n):
        sign_choices = [(0,) * (2 * n)] if phaseless else itertools.product((0, 2), repeat=2 * n)
        for signs in sign_choices:
            xs = tuple(
                PauliOperator(n, p.x, p.z, _popcount(p.x & p.z) + s)
                for (p, _), s in zip(images, signs[0::2])
            )
            zs = tuple(
                PauliOperator(n, p.x, p.z, _popcount(p.x & p.z) + s)
                for (_, p), s in zip(images, signs[1::2])
            )
            g = CliffordGate(n, xs, zs)
            key = g.symplectic_key() if phaseless else (g.symplectic_key(), g.signs())
            if key not in seen:
                seen.add(key)
                gates.append(g)
    return gates


def clifford_group_size(n: int, phaseless: bool = False) -> int:
    """Closed-form group order from the ``(4^j - 1) 4^j`` recurrence."""
    size = 1
    for j in range(1, n + 1):
        size *= (4**j - 1) * 4**j * (1 if phaseless else 2)
        if phaseless:
            size //= 2
    return size


# Bell pairs -----------------------------------------------------------------------


def bell_pair_tableau(codes: Sequence[int]) -> StabilizerTableau:
    """Tableau of a product of Bell pairs given by 2-bit phase codes.

    Alice's qubit of pair ``j`` is qubit ``j``; Bob's is qubit ``len(codes) + j``.
    Rows are ``(+/-)X_aX_b`` then ``(+/-)Z_aZ_b`` for each pair.
    """
    m = len(codes)
    n = 2 * m
    rows = []
    for j, c in enumerate(codes):
        both = (1 << j) | (1 << (m + j))
        xx_plus, zz_plus = c & 1, (c >> 1) & 1
        rows.append(PauliOperator(n, both, 0, 0 if xx_plus else 2))
        rows.append(PauliOperator(n, 0, both, 0 if zz_plus else 2))
    return StabilizerTableau(n, tuple(rows))


def bell_stabilizers(m: int, j: int) -> tuple[PauliOperator, PauliOperator]:
    """The unsigned ``X_aX_b`` and ``Z_aZ_b`` operators of pair ``j`` out of ``m``."""
    both = (1 << j) | (1 << (m + j))
    return PauliOperator(2 * m, both, 0, 0), PauliOperator(2 * m, 0, both, 0)


def read_bell_codes(t: StabilizerTableau) -> list[int]:
    """Read back the phase codes of a tableau that is a product of Bell pairs."""
    m = t.n // 2
    codes = []
    for j in range(m):
        xx, zz = bell_stabilizers(m, j)
        _, ox = measure_pauli(t, xx)
        _, oz = measure_pauli(t, zz)
        if ox is None or oz is None:
            raise ValueError(f"pair {j} is not in a Bell state")
        codes.append((1 if ox > 0 else 0) | ((1 if oz > 0 else 0) << 1))
    return codes


def bell_state_phases(ket: Sequence[complex]) -> tuple[int, int]:
    """``(xx_bit, zz_bit)`` of a two-qubit ket, from dense expectation values."""
    psi = np.asarray(ket, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    ex = np.real(psi.conj() @ np.kron(X, X) @ psi)
    ez = np.real(psi.conj() @ np.kron(Z, Z) @ psi)
    if not (np.isclose(abs(ex), 1) and np.isclose(abs(ez), 1)):
        raise ValueError("ket is not an XX/ZZ eigenstate")
    return int(ex > 0), int(ez > 0)
