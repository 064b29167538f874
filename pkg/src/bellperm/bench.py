"""Per-gate cost versus register size: Bell-code diagonal vs stabilizer tableau.

The diagonal backends touch two 2-bit fields per gate. The tableau backend
is a bit-packed Aaronson-Gottesman style tableau of the ``2 n`` qubits,
stored column-major so that a CNOT is a handful of word-wise operations on
four columns of ``2 n`` bits each, i.e. ``O(n)`` per gate. Columns are
materialized on first touch from the initial all-``A`` pattern, which keeps
memory proportional to the columns a benchmark actually uses; it does not
change the per-gate cost.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bell import RegisterState
from .clifford import PauliOperator, StabilizerTableau
from .gates import get_tables

DEFAULT_SIZES = (100, 10_000, 1_000_000)


class LazyBellTableau:
    """Stabilizer tableau of ``m`` Bell pairs, starting in ``A`` unless ``codes`` is given.

    Qubit ``j`` is Alice's half of pair ``j`` and qubit ``m + j`` is Bob's.
    Row ``j`` starts as ``X_j X_{m+j}`` and row ``m + j`` as ``Z_j Z_{m+j}``,
    with signs taken from the pair's code.
    """

    def __init__(self, m: int, codes=None):
        self.m = m
        self.rows = 2 * m
        self.nwords = -(-self.rows // 64)
        self.sign = np.zeros(self.nwords, dtype=np.uint64)
        if codes is not None:
            for j, code in enumerate(codes):
                if not code & 1:
                    self.sign ^= self._unit(j)
                if not code & 2:
                    self.sign ^= self._unit(m + j)
        self._x: dict[int, np.ndarray] = {}
        self._z: dict[int, np.ndarray] = {}

    def _unit(self, row: int) -> np.ndarray:
        col = np.zeros(self.nwords, dtype=np.uint64)
        col[row >> 6] = np.uint64(1) << np.uint64(row & 63)
        return col

    def x(self, q: int) -> np.ndarray:
        if q not in self._x:
            self._x[q] = self._unit(q % self.m)
        return self._x[q]

    def z(self, q: int) -> np.ndarray:
        if q not in self._z:
            self._z[q] = self._unit(self.m + q % self.m)
        return self._z[q]

    @property
    def materialized_columns(self) -> int:
        return len(self._x) + len(self._z)

    def cnot(self, c: int, t: int) -> None:
        xc, zc, xt, zt = self.x(c), self.z(c), self.x(t), self.z(t)
        self.sign ^= xc & zt & ~(xt ^ zc)
        xt ^= xc
        zc ^= zt

    def bilateral_cnot(self, a: int, b: int) -> None:
        """CNOT from pair ``a`` onto pair ``b`` on both sides."""
        self.cnot(a, b)
        self.cnot(self.m + a, self.m + b)

    def to_tableau(self) -> StabilizerTableau:
        """Dense copy for cross-checking (small ``m`` only)."""
        n = 2 * self.m
        bits = lambda col, row: (int(col[row >> 6]) >> (row & 63)) & 1  # noqa: E731
        rows = []
        for row in range(self.rows):
            x = z = 0
            for q in range(n):
                x |= bits(self.x(q), row) << q
                z |= bits(self.z(q), row) << q
            s = bits(self.sign, row)
            ny = bin(x & z).count("1")
            rows.append(PauliOperator(n, x, z, (2 * s + ny) % 4))
        return StabilizerTableau(n, tuple(rows))


@dataclass
class BenchRow:
    n: int
    diagonal_cython_ns: float | None
    diagonal_python_ns: float
    tableau_ns: float


def _pairs(rng, n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    a = rng.integers(0, n, size=count).astype(np.int32)
    b = (a + rng.integers(1, n, size=count)) % n
    return a, b.astype(np.int32)


def time_diagonal(n: int, backend, gates: int, reps: int, seed: int = 0) -> float:
    """Median ns per gate for random good gates on random pairs of an ``n``-pair register."""
    tables = get_tables()
    fused = np.ascontiguousarray(tables.fused)
    rng = np.random.default_rng(seed)
    state = RegisterState.all_a(n)
    times = []
    batched = backend is not kernels.get_backend("python")
    for _ in range(reps):
        a, b = _pairs(rng, n, gates)
        idx = tables.good_subset[rng.integers(len(tables.good_subset), size=gates)].astype(np.int32)
        t0 = time.perf_counter_ns()
        if batched:
            backend.apply_gates_words(state.words, a, b, idx, fused)
        else:
            apply = backend.apply_gate_words
            words = state.words
            for j in range(gates):
                apply(words, int(a[j]), int(b[j]), fused[idx[j]])
        times.append((time.perf_counter_ns() - t0) / gates)
    return float(np.median(times))


def time_tableau(n: int, gates: int, reps: int, seed: int = 0) -> float:
    """Median ns per bilateral CNOT on the tableau of ``n`` pairs."""
    rng = np.random.default_rng(seed)
    times = []
    for _ in range(reps):
        tab = LazyBellTableau(n)
        a, b = _pairs(rng, n, gates)
        for j in range(gates):  # warm the columns so only gate cost is timed
            tab.x(int(a[j])), tab.z(int(a[j])), tab.x(int(b[j])), tab.z(int(b[j]))
            tab.x(n + int(a[j])), tab.z(n + int(a[j])), tab.x(n + int(b[j])), tab.z(n + int(b[j]))
        t0 = time.perf_counter_ns()
        for j in range(gates):
            tab.bilateral_cnot(int(a[j]), int(b[j]))
        times.append((time.perf_counter_ns() - t0) / gates)
    return float(np.median(times))


def run_benchmark(sizes=DEFAULT_SIZES, reps: int = 5, diag_gates: int = 100_000,
                  py_gates: int = 5_000, tableau_gates: int = 40, seed: int = 0) -> list[BenchRow]:
    """Per-gate timings for each register size.

    ``tableau_gates`` stays small because each touched column of the largest
    tableau takes ``n / 4`` bytes.
    """
    if len(sizes) < 2:
        raise ValueError("need at least two sizes")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    have_cython = "cython" in kernels.available_backends()
    rows = []
    for n in sizes:
        if n < 2:
            raise ValueError("sizes must be >= 2")
        cy = time_diagonal(n, kernels.get_backend("cython"), diag_gates, reps, seed) if have_cython else None
        py = time_diagonal(n, kernels.get_backend("python"), py_gates, reps, seed)
        tb = time_tableau(n, tableau_gates, reps, seed)
        rows.append(BenchRow(n, cy, py, tb))
    return rows


def write_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "diagonal_cython_ns", "diagonal_python_ns", "tableau_ns"])
        for r in rows:
            w.writerow([r.n, r.diagonal_cython_ns, r.diagonal_python_ns, r.tableau_ns])


def ratio(values) -> float:
    """Largest over smallest."""
    values = [v for v in values if v is not None]
    return max(values) / min(values)

