"""Exact propagation of the Bell-diagonal distribution for small registers.

The state is a nonnegative array of shape ``(4,) * r``; axis ``j`` is the
code of register ``j``. It is never renormalized: measurements move the
failing mass out, so the final total is the single-shot success
probability and ``rejected`` keeps track of what was removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuit as ci
from .ecc import StabilizerCode
from .gates import GateTables, get_tables
from .metrics import CODE_A, MetricsReport, report_from_joint
from .noise import NoiseConfig

DEFAULT_EXACT_CAP = 10
MASS_TOL = 1e-12

# Joint code ``ca | cb << 2`` of the flat index ``ca * 4 + cb`` of a (4, 4) block.
_FLAT_TO_JOINT = np.array([(f // 4) | ((f % 4) << 2) for f in range(16)])
_JOINT_TO_FLAT = np.argsort(_FLAT_TO_JOINT)


class ExactCapError(ValueError):
    """The register is too wide for exact propagation."""


@dataclass
class DistributionVector:
    """Unnormalized distribution over the joint codes of ``r`` registers.

    ``probs[j]`` is the mass of joint code ``j = sum(code_i << 2 i)``.
    """

    probs: np.ndarray
    norm: float
    rejected: float

    @classmethod
    def from_array(cls, arr: np.ndarray, rejected: float = 0.0) -> "DistributionVector":
        probs = np.ascontiguousarray(arr.transpose(tuple(reversed(range(arr.ndim))))).reshape(-1)
        return cls(probs=probs, norm=float(probs.sum()), rejected=rejected)

    def to_array(self) -> np.ndarray:
        r = int(round(np.log(len(self.probs)) / np.log(4)))
        return self.probs.reshape((4,) * r).transpose(tuple(reversed(range(r))))

    def normalized(self) -> np.ndarray:
        return self.probs / self.norm

    def to_text(self) -> str:
        """One ``code-string probability`` line per nonzero entry."""
        r = int(round(np.log(len(self.probs)) / np.log(4)))
        lines = [f"# norm {self.norm!r} rejected {self.rejected!r}"]
        for j in np.flatnonzero(self.probs):
            bits = "".join(f"{(j >> (2 * i)) & 1}{(j >> (2 * i + 1)) & 1}" for i in range(r))
            lines.append(f"{bits} {self.probs[j]!r}")
        return "\n".join(lines) + "\n"


def _delta_a() -> np.ndarray:
    v = np.zeros(4)
    v[CODE_A] = 1.0
    return v


class ExactSimulator:
    """Step-by-step exact propagation of one circuit."""

    def __init__(self, register_width: int, cfg: NoiseConfig, tables: GateTables | None = None,
                 cap: int = DEFAULT_EXACT_CAP, check: bool = False):
        if register_width > cap:
            raise ExactCapError(f"exact mode supports at most {cap} registers, circuit has {register_width}")
        self.r = register_width
        self.cfg = cfg
        self.tables = tables or get_tables()
        self.check = check
        self.arr = np.ones((4,) * register_width) if register_width == 0 else self._all_a()
        self.rejected = 0.0
        self._raw = cfg.raw_distribution()
        gate_ch = cfg.gate_error_distribution()
        # mix[out_flat, in_flat] = P(mask = joint(out) ^ joint(in))
        self._gate_mix = gate_ch[_FLAT_TO_JOINT[:, None] ^ _FLAT_TO_JOINT[None, :]]
        perm_ch = cfg.permute_error_distribution()
        idx = np.arange(4)
        self._perm_mix = perm_ch[idx[:, None] ^ idx[None, :]]

    def _all_a(self) -> np.ndarray:
        arr = np.zeros((4,) * self.r)
        arr[(CODE_A,) * self.r] = 1.0
        return arr

    @property
    def mass(self) -> float:
        return float(self.arr.sum())

    def _verify(self) -> None:
        assert self.arr.min() >= -MASS_TOL, "negative probability"
        assert abs(self.mass + self.rejected - 1.0) < MASS_TOL, "mass not conserved"

    def _replace_axis(self, axis: int, vec: np.ndarray) -> None:
        marg = self.arr.sum(axis=axis, keepdims=True)
        shape = [1] * self.r
        shape[axis] = 4
        self.arr = marg * vec.reshape(shape)

    def new_pair(self, reg: int) -> None:
        self._replace_axis(reg, self._raw)

    def gate(self, perm: np.ndarray, reg_a: int, reg_b: int) -> None:
        if reg_a == reg_b:
            raise ValueError("a gate needs two distinct registers")
        moved = np.moveaxis(self.arr, (reg_a, reg_b), (-2, -1))
        shape = moved.shape
        flat = moved.reshape(-1, 16)
        out_flat = _JOINT_TO_FLAT[np.asarray(perm, dtype=np.int64)[_FLAT_TO_JOINT]]
        new = np.empty_like(flat)
        new[:, out_flat] = flat
        p2 = self.cfg.p2
        if p2 < 1.0:
            new = p2 * new + (1.0 - p2) * (new @ self._gate_mix.T)
        self.arr = np.moveaxis(new.reshape(shape), (-2, -1), (reg_a, reg_b))

    def permute(self, perm: np.ndarray, reg: int) -> None:
        moved = np.moveaxis(self.arr, reg, -1)
        new = np.empty_like(moved)
        new[..., np.asarray(perm[:4], dtype=np.int64)] = moved
        if self.cfg.permute_channel is not None:
            new = new @ self._perm_mix.T
        self.arr = np.moveaxis(new, -1, reg)

    def measure(self, pass_mask: int, reg: int) -> float:
        """Keep the reported-pass mass and reset the register to ``A``.

        Returns the pass probability of this step (relative to the current mass).
        """
        vf = self.cfg.verdict_fidelity
        truth = np.array([(pass_mask >> c) & 1 for c in range(4)], dtype=float)
        keep = truth * vf + (1.0 - truth) * (1.0 - vf)
        shape = [1] * self.r
        shape[reg] = 4
        before = self.mass
        kept = (self.arr * keep.reshape(shape)).sum(axis=reg, keepdims=True)
        self.arr = kept * _delta_a().reshape(shape)
        after = self.mass
        self.rejected += before - after
        return after / before if before > 0 else 0.0

    def apply(self, op: ci.Op) -> None:
        if isinstance(op, ci.NewPair):
            self.new_pair(op.reg)
        elif isinstance(op, ci.BPGate):
            self.gate(self.tables.fused[op.params.index()], op.reg_a, op.reg_b)
        elif isinstance(op, ci.PairPermute):
            self.permute(self.tables.single_pair_perms[op.perm_id], op.reg)
        elif isinstance(op, ci.Measure):
            self.measure(ci.pass_mask(op.basis, op.mode), op.reg)
        else:
            raise TypeError(f"unknown op {op!r}")
        if self.check:
            self._verify()

    def output_joint(self, outputs) -> np.ndarray:
        """Unnormalized distribution over the output registers, axes in ``outputs`` order."""
        outputs = list(outputs)
        other = tuple(i for i in range(self.r) if i not in outputs)
        marg = self.arr.sum(axis=other) if other else self.arr
        kept = sorted(outputs)
        return marg.transpose([kept.index(o) for o in outputs])

    def distribution(self) -> DistributionVector:
        return DistributionVector.from_array(self.arr, self.rejected)


def propagate(c: ci.Circuit, cfg: NoiseConfig, tables: GateTables | None = None,
              cap: int = DEFAULT_EXACT_CAP, check: bool = False) -> ExactSimulator:
    """Run every op of ``c`` and return the simulator holding the final state."""
    ci.check(c, tables)
    sim = ExactSimulator(c.register_width, cfg, tables, cap=cap, check=check)
    for op in c.ops:
        sim.apply(op)
    return sim


def run_exact(
    c: ci.Circuit,
    cfg: NoiseConfig,
    tables: GateTables | None = None,
    code: StabilizerCode | None = None,
    cap: int = DEFAULT_EXACT_CAP,
    check: bool = False,
    with_mutual_info: bool = True,
) -> MetricsReport:
    """Exact metrics of ``c`` under ``cfg``.

    Parameters
    ----------
    cap : int
        Largest register width accepted. The state takes ``8 * 4**r`` bytes.
    check : bool
        Assert nonnegativity and mass conservation after every op.
    """
    sim = propagate(c, cfg, tables, cap=cap, check=check)
    joint = sim.output_joint(c.output_pairs)
    rep = report_from_joint(joint, sim.mass, code=code, with_mutual_info=with_mutual_info)
    rep.extra["rejected_mass"] = sim.rejected
    return rep
