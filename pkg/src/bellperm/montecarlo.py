"""Monte Carlo trajectories over packed Bell-code registers.

Trajectories are processed in fixed-size chunks. Chunk ``i`` draws all of
its uniforms from a generator seeded with ``(seed, i)``, so results do not
depend on the number of worker threads or on the kernel backend.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import circuit as ci
from . import kernels
from .bell import RegisterState
from .ecc import StabilizerCode
from .gates import BPGateParams, GateTables, get_tables
from .metrics import MetricsReport, report_from_samples
from .noise import NoiseConfig, cdf
from .program import MAX_MC_REGISTERS, Program, compile_circuit

CHUNK_SIZE = 4096


def chunk_uniforms(seed: int, chunk: int, size: int, n_draws: int) -> np.ndarray:
    """The uniforms used by trajectories ``chunk * CHUNK_SIZE ...``."""
    rng = np.random.default_rng([seed, chunk])
    return rng.random((size, n_draws))


def _extract_outputs(states: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    shifts = (2 * outputs).astype(np.uint64)
    return ((states[:, None] >> shifts[None, :]) & np.uint64(3)).astype(np.uint8)


def sample_outputs(
    prog: Program,
    cfg: NoiseConfig,
    n_samples: int,
    seed: int = 0,
    threads: int = 1,
    backend=None,
) -> np.ndarray:
    """Output codes of the accepted trajectories, shape ``(accepted, k)``.

    Rows come out in trajectory order whatever ``threads`` is.
    """
    if prog.register_width > MAX_MC_REGISTERS:
        raise ValueError(f"Monte Carlo supports at most {MAX_MC_REGISTERS} registers")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if isinstance(backend, str):
        backend = kernels.get_backend(backend)
    kern = backend or kernels.default_backend()
    raw_cdf = cdf(cfg.raw_distribution())
    gate_cdf = cdf(cfg.gate_error_distribution())
    perm_cdf = cdf(cfg.permute_error_distribution())
    n_chunks = -(-n_samples // CHUNK_SIZE)

    def run_chunk(i: int) -> np.ndarray:
        size = min(CHUNK_SIZE, n_samples - i * CHUNK_SIZE)
        u = chunk_uniforms(seed, i, size, prog.n_draws)
        state = np.zeros(size, dtype=np.uint64)
        ok = np.zeros(size, dtype=np.uint8)
        kern.run_trajectories(
            prog.kind, prog.reg_a, prog.reg_b, prog.table, prog.draw_offset, u,
            float(cfg.p2), float(cfg.verdict_fidelity), raw_cdf, gate_cdf, perm_cdf, state, ok,
        )
        return _extract_outputs(state[ok.astype(bool)], prog.outputs)

    if threads <= 1 or n_chunks == 1:
        parts = [run_chunk(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, range(n_chunks)))
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, len(prog.outputs)), np.uint8)


def run_monte_carlo(
    c: ci.Circuit,
    cfg: NoiseConfig,
    n_samples: int = 100_000,
    seed: int = 0,
    tables: GateTables | None = None,
    code: StabilizerCode | None = None,
    threads: int | None = None,
    backend=None,
    with_mutual_info: bool = True,
) -> MetricsReport:
    """Estimate the metrics of ``c`` from ``n_samples`` trajectories.

    A trajectory is rejected at its first failing verdict and still counts
    towards ``n_samples``. ``threads=None`` uses one thread per CPU.
    """
    tables = tables or get_tables()
    ci.check(c, tables)
    prog = compile_circuit(c, tables)
    if threads is None:
        threads = os.cpu_count() or 1
    acc = sample_outputs(prog, cfg, n_samples, seed, threads=threads, backend=backend)
    return report_from_samples(acc, n_samples, code=code, with_mutual_info=with_mutual_info)


# Single-step API ----------------------------------------------------------------------


def sample_raw_pair(cfg: NoiseConfig, rng: np.random.Generator) -> int:
    """Code of one freshly generated (Werner) pair."""
    return int(min(np.searchsorted(cdf(cfg.raw_distribution()), rng.random(), side="right"), 3))


def _check_regs(state: RegisterState, *regs: int) -> None:
    for reg in regs:
        if not 0 <= reg < state.num_pairs:
            raise ValueError(f"register {reg} out of range for {state.num_pairs} pairs")
    if len(set(regs)) != len(regs):
        raise ValueError(f"register conflict: {regs}")


def apply_noisy_gate(
    state: RegisterState,
    params: BPGateParams,
    reg_a: int,
    reg_b: int,
    cfg: NoiseConfig,
    rng: np.random.Generator,
    tables: GateTables | None = None,
) -> RegisterState:
    """Apply a two-pair gate in place, then depolarize with probability ``1 - p2``.

    The cost does not depend on the number of pairs in ``state``.
    """
    _check_regs(state, reg_a, reg_b)
    tables = tables or get_tables()
    kernels.apply_gate_words(state.words, reg_a, reg_b, tables.fused[params.index()])
    if rng.random() >= cfg.p2:
        dist = cfg.gate_error_distribution()
        mask = int(rng.choice(16, p=dist))
        if mask:
            _xor_pair(state, reg_a, mask & 3)
            _xor_pair(state, reg_b, mask >> 2)
    return state


def _xor_pair(state: RegisterState, i: int, m: int) -> None:
    state.set_code(i, state.get_code(i) ^ m)


def apply_measurement(
    state: RegisterState, op: ci.Measure, cfg: NoiseConfig, rng: np.random.Generator
) -> tuple[RegisterState, bool]:
    """Measure register ``op.reg``; return the freed state and the reported verdict.

    The freed register is left in ``A`` so the state stays a valid code string.
    """
    _check_regs(state, op.reg)
    truth = bool((ci.pass_mask(op.basis, op.mode) >> state.get_code(op.reg)) & 1)
    reported = truth if rng.random() < cfg.verdict_fidelity else not truth
    state.set_code(op.reg, 3)
    return state, reported
