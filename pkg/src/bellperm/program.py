"""Lowering of a :class:`~bellperm.circuit.Circuit` to flat arrays for the kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuit as ci
from .gates import GateTables, get_tables

OP_NEW, OP_GATE, OP_PERM, OP_MEAS = 0, 1, 2, 3
#: Uniform draws consumed by each op kind, in order.
DRAWS = {OP_NEW: 1, OP_GATE: 2, OP_PERM: 1, OP_MEAS: 1}
MAX_MC_REGISTERS = 32  # one uint64 word per trajectory


@dataclass(frozen=True)
class Program:
    """Flat description of a circuit.

    ``table[i]`` holds the 16-entry permutation of a gate, the 4-entry
    permutation of a single-pair op (first 4 slots), or the pass mask of a
    measurement (slot 0). ``draw_offset[i]`` is the first uniform used by op
    ``i``; ``n_draws`` is the total per trajectory.
    """

    register_width: int
    kind: np.ndarray
    reg_a: np.ndarray
    reg_b: np.ndarray
    table: np.ndarray
    draw_offset: np.ndarray
    n_draws: int
    outputs: np.ndarray


def compile_circuit(c: ci.Circuit, tables: GateTables | None = None) -> Program:
    tables = tables or get_tables()
    n = len(c.ops)
    kind = np.zeros(n, dtype=np.int8)
    ra = np.zeros(n, dtype=np.int32)
    rb = np.zeros(n, dtype=np.int32)
    table = np.zeros((n, 16), dtype=np.uint8)
    offs = np.zeros(n, dtype=np.int32)
    d = 0
    for i, op in enumerate(c.ops):
        if isinstance(op, ci.NewPair):
            kind[i], ra[i] = OP_NEW, op.reg
        elif isinstance(op, ci.BPGate):
            kind[i], ra[i], rb[i] = OP_GATE, op.reg_a, op.reg_b
            table[i] = tables.fused[op.params.index()]
        elif isinstance(op, ci.PairPermute):
            kind[i], ra[i] = OP_PERM, op.reg
            table[i, :4] = tables.single_pair_perms[op.perm_id]
        elif isinstance(op, ci.Measure):
            kind[i], ra[i] = OP_MEAS, op.reg
            table[i, 0] = ci.pass_mask(op.basis, op.mode)
        else:
            raise TypeError(f"unknown op {op!r}")
        offs[i] = d
        d += DRAWS[int(kind[i])]
    return Program(
        register_width=c.register_width,
        kind=kind,
        reg_a=ra,
        reg_b=rb,
        table=table,
        draw_offset=offs,
        n_draws=max(d, 1),
        outputs=np.asarray(c.output_pairs, dtype=np.int32),
    )
