"""Purification circuits: data model, validation, JSON documents and baselines."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Union

from . import gates
from .gates import BPGateParams

CIRCUIT_FORMAT = "bpcirc"
CIRCUIT_VERSION = 1

BASES = ("X", "Y", "Z")
MODES = ("coincidence", "anticoincidence")
#: Measurements that keep A and one other Bell state.
DEFAULT_MEASUREMENTS = (("X", "coincidence"), ("Z", "coincidence"), ("Y", "anticoincidence"))


def true_pass_set(basis: str, mode: str) -> frozenset[int]:
    """Codes whose noiseless (basis, mode) verdict is *pass*.

    Both parties measure ``basis`` on their half; the parity of the two
    outcomes is the pair's ``basis (x) basis`` eigenvalue. ``YY = -XX.ZZ``.
    """
    out = set()
    for code in range(4):
        xx = 1 if code & 1 else -1
        zz = 1 if code & 2 else -1
        eig = {"X": xx, "Z": zz, "Y": -xx * zz}[basis]
        same = eig == 1
        if same == (mode == "coincidence"):
            out.add(code)
    return frozenset(out)


def pass_mask(basis: str, mode: str) -> int:
    """4-bit mask, bit ``c`` set when code ``c`` passes."""
    return sum(1 << c for c in true_pass_set(basis, mode))


@dataclass(frozen=True)
class NewPair:
    reg: int


@dataclass(frozen=True)
class PairPermute:
    perm_id: int
    reg: int


@dataclass(frozen=True)
class BPGate:
    params: BPGateParams
    reg_a: int
    reg_b: int


@dataclass(frozen=True)
class Measure:
    basis: str
    mode: str
    reg: int


Op = Union[NewPair, PairPermute, BPGate, Measure]


def op_registers(op: Op) -> tuple[int, ...]:
    if isinstance(op, BPGate):
        return (op.reg_a, op.reg_b)
    return (op.reg,)


@dataclass(frozen=True)
class Circuit:
    """An ``n``-to-``k`` purification circuit on ``register_width`` registers.

    ``raw_pairs`` is the declared number of raw pairs; when given it must
    match the number of :class:`NewPair` ops. It is checked by
    :func:`validate` and ignored by equality.
    """

    register_width: int
    ops: tuple[Op, ...]
    output_pairs: tuple[int, ...]
    raw_pairs: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "output_pairs", tuple(self.output_pairs))

    @property
    def n(self) -> int:
        return sum(isinstance(op, NewPair) for op in self.ops)

    @property
    def k(self) -> int:
        return len(self.output_pairs)

    @property
    def r(self) -> int:
        return self.register_width

    @property
    def length(self) -> int:
        return sum(isinstance(op, BPGate) for op in self.ops)

    def stats(self) -> "CircuitStats":
        return CircuitStats(self.length, self.n, self.k, self.r)

    def with_ops(self, ops) -> "Circuit":
        return Circuit(self.register_width, tuple(ops), self.output_pairs, None)

    def __add__(self, other: "Circuit") -> "Circuit":
        """Run ``self`` then ``other`` on a register of the larger width."""
        return Circuit(
            max(self.register_width, other.register_width),
            self.ops + other.ops,
            tuple(dict.fromkeys(self.output_pairs + other.output_pairs)),
        )


@dataclass(frozen=True)
class CircuitStats:
    length: int
    n: int
    k: int
    r: int


@dataclass(frozen=True)
class Violation:
    op_index: int | None
    message: str

    def __str__(self) -> str:
        where = "circuit" if self.op_index is None else f"ops[{self.op_index}]"
        return f"{where}: {self.message}"


def validate(c: Circuit, tables: gates.GateTables | None = None) -> list[Violation]:
    """Return every invariant violation; an empty list means the circuit is valid."""
    out: list[Violation] = []
    r = c.register_width
    if r < 1:
        out.append(Violation(None, f"register width {r} < 1"))
    if len(set(c.output_pairs)) != len(c.output_pairs):
        out.append(Violation(None, f"output pairs {list(c.output_pairs)} are not distinct"))
    if c.k >= r:
        out.append(Violation(None, f"k={c.k} must be smaller than r={r}"))
    if c.k < 1:
        out.append(Violation(None, "no output pairs"))
    for q in c.output_pairs:
        if not 0 <= q < r:
            out.append(Violation(None, f"output pair {q} outside register range 0..{r - 1}"))
    if c.raw_pairs is not None and c.raw_pairs != c.n:
        out.append(Violation(None, f"declared n={c.raw_pairs} but circuit has {c.n} NewPair ops"))
    n_single = len(tables.single_pair_perms) if tables is not None else None
    live: set[int] = set()
    for i, op in enumerate(c.ops):
        regs = op_registers(op)
        bad = [q for q in regs if not 0 <= q < r]
        if bad:
            out.append(Violation(i, f"register {bad[0]} outside 0..{r - 1}"))
            continue
        if isinstance(op, NewPair):
            if op.reg in live:
                out.append(Violation(i, f"NewPair on live register {op.reg}"))
            live.add(op.reg)
            continue
        if isinstance(op, BPGate):
            if op.reg_a == op.reg_b:
                out.append(Violation(i, f"BPGate acts twice on register {op.reg_a}"))
            try:
                BPGateParams(*op.params).validate()
            except (ValueError, TypeError) as exc:
                out.append(Violation(i, f"bad gate parameters: {exc}"))
        elif isinstance(op, PairPermute):
            if op.perm_id < 0 or (n_single is not None and op.perm_id >= n_single):
                out.append(Violation(i, f"unknown single-pair permutation {op.perm_id}"))
        elif isinstance(op, Measure):
            if op.basis not in BASES or op.mode not in MODES:
                out.append(Violation(i, f"unknown measurement {op.basis}/{op.mode}"))
        else:
            out.append(Violation(i, f"unknown op {op!r}"))
            continue
        for q in regs:
            if q not in live:
                out.append(Violation(i, f"register {q} read before NewPair (or after being measured)"))
        if isinstance(op, Measure):
            live.discard(op.reg)
    for q in c.output_pairs:
        if 0 <= q < r and q not in live:
            out.append(Violation(None, f"output pair {q} is not live at the end (never initialized or measured)"))
    return out


def check(c: Circuit, tables: gates.GateTables | None = None) -> Circuit:
    """Raise :class:`CircuitValidationError` unless ``c`` is valid."""
    problems = validate(c, tables)
    if problems:
        raise CircuitValidationError(problems)
    return c


class CircuitValidationError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class CircuitFormatError(ValueError):
    """A circuit document does not follow the schema."""


# Baselines ---------------------------------------------------------------------------


def _check_gate(basis: str, mode: str, params: BPGateParams, tables: gates.GateTables) -> bool:
    """Whether the measured pair's verdict equals the parity check of ``basis``."""
    perm = tables.fused[params.index()]
    ps = true_pass_set(basis, mode)
    for c in range(16):
        kept, sac = c & 3, c >> 2
        out_sac = int(perm[c]) >> 2
        if (out_sac in ps) != ((kept in ps) == (sac in ps)):
            return False
    return True


def parity_check_gate(basis: str, mode: str = "coincidence", tables: gates.GateTables | None = None) -> BPGateParams:
    """A good two-pair gate after which measuring the second pair compares both pairs.

    ``Z``-coincidence uses the bilateral CNOT; anything else gets the first
    good gate, in index order, with the same property.
    """
    tables = tables or gates.get_tables()
    if basis == "Z" and mode == "coincidence" and _check_gate(basis, mode, gates.CNOT, tables):
        return gates.CNOT
    for idx in tables.good_subset:
        p = BPGateParams.from_index(int(idx))
        if _check_gate(basis, mode, p, tables):
            return p
    raise ValueError(f"no good gate implements a {basis}/{mode} parity check")


def build_single_selection(basis: str = "Z", tables: gates.GateTables | None = None) -> Circuit:
    """2-to-1: one sacrificial pair checks the kept pair in ``basis``.

    ``Z`` uses a bilateral CNOT from the kept pair onto the sacrificial pair
    and a Z coincidence. ``X`` reverses the CNOT and uses an X coincidence;
    ``Y`` uses a Y anticoincidence after a gate found by search.
    """
    tables = tables or gates.get_tables()
    mode = "anticoincidence" if basis == "Y" else "coincidence"
    if basis == "X":
        ops = [NewPair(0), NewPair(1), BPGate(gates.CNOT, 1, 0), Measure("X", mode, 1)]
    else:
        g = parity_check_gate(basis, mode, tables)
        ops = [NewPair(0), NewPair(1), BPGate(g, 0, 1), Measure(basis, mode, 1)]
    return Circuit(2, tuple(ops), (0,), 2)


def _double_selection_ops(kept: int, s1: int, s2: int, variant: str) -> list[Op]:
    first, second = variant[0], variant[1]
    if {first, second} != {"X", "Z"}:
        raise ValueError(f"double selection variant must be 'ZX' or 'XZ', got {variant!r}")

    def check_gate(basis, data, ancilla):
        # Z check: CNOT data -> ancilla. X check: CNOT ancilla -> data.
        return BPGate(gates.CNOT, data, ancilla) if basis == "Z" else BPGate(gates.CNOT, ancilla, data)

    return [
        check_gate(first, kept, s1),
        check_gate(second, s1, s2),
        Measure(second, "coincidence", s2),
        Measure(first, "coincidence", s1),
    ]


def build_double_selection(variant: str = "ZX") -> Circuit:
    """3-to-1 double selection.

    The first sacrificial pair checks the kept pair in ``variant[0]``; the
    second sacrificial pair checks the first one in ``variant[1]``, catching
    errors that would otherwise propagate back to the kept pair.
    """
    ops = [NewPair(0), NewPair(1), NewPair(2)] + _double_selection_ops(0, 1, 2, variant)
    return Circuit(3, tuple(ops), (0,), 3)


def build_manual_5to2(variant: str = "ZX") -> Circuit:
    """5-to-2 from standard blocks on 4 registers.

    Single selection (Z) of pair 0 using register 2, then double selection of
    pair 1 using registers 2 and 3. This is one reasonable hand-assembled
    choice, used as a qualitative baseline.
    """
    ops: list[Op] = [NewPair(0), NewPair(1), NewPair(2)]
    ops += [BPGate(gates.CNOT, 0, 2), Measure("Z", "coincidence", 2)]
    ops += [NewPair(2), NewPair(3)]
    ops += _double_selection_ops(1, 2, 3, variant)
    return Circuit(4, tuple(ops), (0, 1), 5)


def _is_power_of_two(v: int) -> bool:
    return v >= 1 and v & (v - 1) == 0


def build_truncated_hashing(n: int = 8, k: int = 2) -> Circuit:
    """One truncated hashing round from ``n`` pairs to ``k``.

    Registers ``n-1`` down to ``k`` are sacrificed in turn. Each sacrificial
    register collects the parity of every register below it through bilateral
    CNOTs and is then measured. Checks alternate Z (CNOT data -> check) and X
    (CNOT check -> data), starting with Z.
    """
    if not (_is_power_of_two(n) and _is_power_of_two(k)) or k >= n:
        raise ValueError(f"hashing needs powers of two with k < n, got n={n}, k={k}")
    ops: list[Op] = [NewPair(i) for i in range(n)]
    for j, t in enumerate(range(n - 1, k - 1, -1)):
        basis = "Z" if j % 2 == 0 else "X"
        for d in range(t):
            ops.append(BPGate(gates.CNOT, d, t) if basis == "Z" else BPGate(gates.CNOT, t, d))
        ops.append(Measure(basis, "coincidence", t))
    return Circuit(n, tuple(ops), tuple(range(k)), n)


def build_identity(k: int) -> Circuit:
    """``k`` raw pairs passed through untouched (teleport unpurified pairs)."""
    return Circuit(k + 1, tuple(NewPair(i) for i in range(k)), tuple(range(k)), k)


# Serialization ----------------------------------------------------------------------


def _op_to_doc(op: Op) -> dict:
    if isinstance(op, NewPair):
        return {"op": "new_pair", "reg": op.reg}
    if isinstance(op, PairPermute):
        return {"op": "permute", "perm": op.perm_id, "reg": op.reg}
    if isinstance(op, BPGate):
        return {"op": "bp_gate", "params": list(op.params), "regs": [op.reg_a, op.reg_b]}
    if isinstance(op, Measure):
        return {"op": "measure", "basis": op.basis, "mode": op.mode, "reg": op.reg}
    raise TypeError(f"unknown op {op!r}")


def to_document(c: Circuit, table_hash: str | None = None) -> dict:
    problems = validate(c)
    if problems:
        raise CircuitValidationError(problems)
    if table_hash is None:
        table_hash = gates.get_tables().hash
    return {
        "format": CIRCUIT_FORMAT,
        "version": CIRCUIT_VERSION,
        "register_width": c.register_width,
        "raw_pairs": c.n,
        "outputs": list(c.output_pairs),
        "table_hash": table_hash,
        "ops": [_op_to_doc(op) for op in c.ops],
    }


def serialize(c: Circuit, table_hash: str | None = None) -> str:
    return json.dumps(to_document(c, table_hash), indent=1) + "\n"


def _int(doc: dict, key: str, path: str) -> int:
    if key not in doc:
        raise CircuitFormatError(f"{path}: missing field {key!r}")
    v = doc[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise CircuitFormatError(f"{path}.{key}: expected integer, got {v!r}")
    return v


def _op_from_doc(d, path: str) -> Op:
    if not isinstance(d, dict):
        raise CircuitFormatError(f"{path}: expected an object")
    kind = d.get("op")
    if kind == "new_pair":
        return NewPair(_int(d, "reg", path))
    if kind == "permute":
        return PairPermute(_int(d, "perm", path), _int(d, "reg", path))
    if kind == "bp_gate":
        params, regs = d.get("params"), d.get("regs")
        if not (isinstance(params, list) and len(params) == 5 and all(isinstance(v, int) for v in params)):
            raise CircuitFormatError(f"{path}.params: expected 5 integers")
        if not (isinstance(regs, list) and len(regs) == 2 and all(isinstance(v, int) for v in regs)):
            raise CircuitFormatError(f"{path}.regs: expected 2 integers")
        p = BPGateParams(*params)
        try:
            p.validate()
        except ValueError as exc:
            raise CircuitFormatError(f"{path}.params: {exc}") from exc
        return BPGate(p, regs[0], regs[1])
    if kind == "measure":
        basis, mode = d.get("basis"), d.get("mode")
        if basis not in BASES:
            raise CircuitFormatError(f"{path}.basis: expected one of {BASES}, got {basis!r}")
        if mode not in MODES:
            raise CircuitFormatError(f"{path}.mode: expected one of {MODES}, got {mode!r}")
        return Measure(basis, mode, _int(d, "reg", path))
    raise CircuitFormatError(f"{path}: unknown op kind {kind!r}")


def from_document(doc: dict, table_hash: str | None = None) -> Circuit:
    """Build a circuit from a parsed document.

    A missing or different ``table_hash`` only warns: the parameter space is
    fixed, so any document whose indices are in range is still meaningful.
    """
    if not isinstance(doc, dict):
        raise CircuitFormatError("document: expected a JSON object")
    if doc.get("format") != CIRCUIT_FORMAT:
        raise CircuitFormatError(f"format: expected {CIRCUIT_FORMAT!r}, got {doc.get('format')!r}")
    if doc.get("version") != CIRCUIT_VERSION:
        raise CircuitFormatError(f"version: unsupported version {doc.get('version')!r}")
    r = _int(doc, "register_width", "document")
    outputs = doc.get("outputs")
    if not isinstance(outputs, list) or not all(isinstance(v, int) for v in outputs):
        raise CircuitFormatError("outputs: expected a list of integers")
    ops_doc = doc.get("ops")
    if not isinstance(ops_doc, list):
        raise CircuitFormatError("ops: expected a list")
    ops = tuple(_op_from_doc(d, f"ops[{i}]") for i, d in enumerate(ops_doc))
    raw = doc.get("raw_pairs")
    c = Circuit(r, ops, tuple(outputs), raw)
    stored = doc.get("table_hash")
    if table_hash is None:
        table_hash = gates.get_tables().hash
    if stored is None:
        warnings.warn("circuit document has no table_hash; assuming the current gate tables", stacklevel=2)
    elif stored != table_hash:
        warnings.warn(
            f"circuit was written against gate tables {stored[:12]}, current tables are {table_hash[:12]}",
            stacklevel=2,
        )
    return c


def deserialize(text: str, table_hash: str | None = None) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"document: invalid JSON ({exc})") from exc
    return from_document(doc, table_hash)


def load(path) -> Circuit:
    with open(path) as fh:
        return deserialize(fh.read())


def save(c: Circuit, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize(c))


def describe(c: Circuit) -> str:
    lines = [f"r={c.r} n={c.n} k={c.k} length={c.length} outputs={list(c.output_pairs)}"]
    for op in c.ops:
        if isinstance(op, NewPair):
            lines.append(f"  new     {op.reg}")
        elif isinstance(op, PairPermute):
            lines.append(f"  perm{op.perm_id:<3d} {op.reg}")
        elif isinstance(op, BPGate):
            lines.append(f"  gate    {op.reg_a},{op.reg_b}  {tuple(op.params)}")
        else:
            lines.append(f"  meas    {op.reg}  {op.basis} {op.mode}")
    return "\n".join(lines)

