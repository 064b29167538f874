import itertools

import numpy as np
import pytest

from bellperm import circuit as ci
from bellperm import kernels
from bellperm.bell import A, B, RegisterState, encode, get_pair
from bellperm.gates import CNOT, BPGateParams
from bellperm.montecarlo import (
    apply_measurement, apply_noisy_gate, run_monte_carlo, sample_outputs, sample_raw_pair,
)
from bellperm.noise import NoiseConfig
from bellperm.optimize import SearchConfig, random_circuit
from bellperm.program import compile_circuit

from frozen import SINGLE_SELECTION_F09

CHI2_15_999 = 37.7  # 99.9% quantile of chi-square with 15 degrees of freedom
CHI2_3_999 = 16.27


def within(est, se, ref, k=3.0):
    return abs(est - ref) <= k * se + 1e-12


def test_sample_raw_pair(rng):
    assert all(sample_raw_pair(NoiseConfig(f_in=1.0), rng) == 3 for _ in range(1000))
    draws = np.array([sample_raw_pair(NoiseConfig(f_in=0.9), rng) for _ in range(100_000)])
    freq = (draws == 3).mean()
    assert within(freq, np.sqrt(0.09 / 1e5), 0.9)
    counts = np.bincount([sample_raw_pair(NoiseConfig(f_in=0.25), rng) for _ in range(40_000)], minlength=4)
    assert ((counts - 10_000) ** 2 / 10_000).sum() < CHI2_3_999


def test_noisy_gate_p2_one_is_table(tables, rng):
    cfg = NoiseConfig(p2=1.0)
    for idx in rng.integers(11520, size=50):
        params = BPGateParams.from_index(int(idx))
        for j in range(16):
            s = encode([j & 3, j >> 2, 3])
            apply_noisy_gate(s, params, 0, 1, cfg, rng, tables)
            out = tables.fused[idx][j]
            assert (s.get_code(0), s.get_code(1), s.get_code(2)) == (out & 3, out >> 2, 3)


def test_noisy_gate_p2_zero_uniform(tables, rng):
    cfg = NoiseConfig(p2=0.0)
    counts = np.zeros(16)
    n = 32_000
    for _ in range(n):
        s = encode([A, A])
        apply_noisy_gate(s, CNOT, 0, 1, cfg, rng, tables)
        counts[s.get_code(0) | (s.get_code(1) << 2)] += 1
    assert ((counts - n / 16) ** 2 / (n / 16)).sum() < CHI2_15_999


def test_p2_zero_uniform_in_engine(tables):
    c = ci.Circuit(3, (ci.NewPair(0), ci.NewPair(1), ci.BPGate(CNOT, 0, 1)), (0, 1))
    out = sample_outputs(compile_circuit(c, tables), NoiseConfig(f_in=0.9, p2=0.0), 100_000, seed=5)
    counts = np.bincount(out[:, 0].astype(int) | (out[:, 1].astype(int) << 2), minlength=16)
    assert ((counts - 100_000 / 16) ** 2 / (100_000 / 16)).sum() < CHI2_15_999


def test_noisy_gate_register_conflict(tables, rng):
    with pytest.raises(ValueError, match="conflict"):
        apply_noisy_gate(encode([A, A]), CNOT, 1, 1, NoiseConfig(), rng, tables)
    with pytest.raises(ValueError, match="out of range"):
        apply_noisy_gate(encode([A, A]), CNOT, 0, 2, NoiseConfig(), rng, tables)


def test_apply_measurement(rng):
    cfg = NoiseConfig(p2=1.0, eta=1.0)
    s, ok = apply_measurement(encode([A]), ci.Measure("Z", "coincidence", 0), cfg, rng)
    assert ok and get_pair(s, 0) is A
    s, ok = apply_measurement(encode([B]), ci.Measure("Z", "coincidence", 0), cfg, rng)
    assert not ok
    for basis, mode in ci.DEFAULT_MEASUREMENTS:
        passed = [apply_measurement(encode([c]), ci.Measure(basis, mode, 0), cfg, rng)[1] for c in range(4)]
        assert sum(passed) == 2 and passed[3]
    flipped = NoiseConfig(p2=1.0, eta=0.0)
    assert not apply_measurement(encode([A]), ci.Measure("Z", "coincidence", 0), flipped, rng)[1]


def test_single_selection_mc(tables):
    rep = run_monte_carlo(ci.build_single_selection("Z", tables), NoiseConfig.noiseless(0.9), 100_000, seed=7,
                          tables=tables)
    f_out, p_succ = SINGLE_SELECTION_F09
    assert within(rep.f_out, rep.f_out_se, f_out)
    assert within(rep.p_success, rep.p_success_se, p_succ)
    assert sum(rep.weight_histogram) == rep.accepted_count


def test_perfect_inputs_give_exact_ones(tables):
    for c in (ci.build_double_selection(), ci.build_truncated_hashing(8, 2)):
        rep = run_monte_carlo(c, NoiseConfig.noiseless(1.0), 5_000, seed=1, tables=tables)
        assert rep.f_out == rep.f_a == rep.p_success == 1.0


def test_identity_circuit_fin(tables):
    rep = run_monte_carlo(ci.build_identity(2), NoiseConfig(f_in=0.8), 50_000, seed=3, tables=tables)
    assert within(rep.f_out, rep.f_out_se, 0.8)
    assert rep.p_success == 1.0


def test_zero_accepted_flags_unavailable(tables):
    rep = run_monte_carlo(ci.build_single_selection("Z", tables), NoiseConfig(f_in=1.0, p2=1.0, eta=0.0), 1000,
                          tables=tables)
    assert rep.p_success == 0.0 and not rep.available


def test_deterministic_and_thread_independent(tables):
    c = ci.build_manual_5to2()
    cfg = NoiseConfig(0.85, 0.97)
    runs = [run_monte_carlo(c, cfg, 20_000, seed=11, tables=tables, threads=t).to_json() for t in (1, 1, 3)]
    assert runs[0] == runs[1] == runs[2]
    assert run_monte_carlo(c, cfg, 20_000, seed=12, tables=tables).to_json() != runs[0]


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")
def test_backends_bit_identical(tables):
    c = ci.build_truncated_hashing(8, 2)
    prog = compile_circuit(c, tables)
    cfg = NoiseConfig(0.8, 0.9, eta=0.95, gate_channel=np.arange(16) / 120, permute_channel=[0.7, 0.1, 0.1, 0.1])
    a = sample_outputs(prog, cfg, 30_000, seed=4, backend="cython")
    b = sample_outputs(prog, cfg, 30_000, seed=4, backend="python")
    assert np.array_equal(a, b)


def _setter_perm(tables, code):
    for i, perm in enumerate(tables.single_pair_perms):
        if perm[3] == code:
            return i
    raise AssertionError


def test_noiseless_trajectories_are_permutations(tables, rng):
    """Exhaustive inputs for random 3-pair gate circuits of length <= 5."""
    setters = {c: _setter_perm(tables, c) for c in range(4)}
    cfg = NoiseConfig.noiseless(1.0)
    for _ in range(15):
        length = int(rng.integers(1, 6))
        gates = []
        for _ in range(length):
            a, b = rng.choice(3, size=2, replace=False)
            gates.append(ci.BPGate(BPGateParams.from_index(int(rng.integers(11520))), int(a), int(b)))
        for codes in itertools.product(range(4), repeat=3):
            ops = [ci.NewPair(i) for i in range(3)]
            ops += [ci.PairPermute(setters[c], i) for i, c in enumerate(codes)]
            c = ci.Circuit(4, tuple(ops + gates), (0, 1, 2))
            out = sample_outputs(compile_circuit(c, tables), cfg, 1, seed=0)[0]
            state = list(codes)
            for g in gates:
                j = tables.fused[g.params.index()][state[g.reg_a] | (state[g.reg_b] << 2)]
                state[g.reg_a], state[g.reg_b] = j & 3, j >> 2
            assert list(out) == state


def test_too_many_registers(tables):
    c = ci.build_identity(33)
    with pytest.raises(ValueError, match="at most 32"):
        run_monte_carlo(c, NoiseConfig(), 10, tables=tables)


def test_samples_must_be_positive(tables):
    with pytest.raises(ValueError):
        run_monte_carlo(ci.build_identity(1), NoiseConfig(), 0, tables=tables)


def test_mc_matches_exact_random(tables, rng):
    from bellperm.exact import run_exact

    cfg = SearchConfig(k=2, r=4, max_n=6, max_length=8, population_size=2)
    noise = NoiseConfig(0.85, 0.95)
    bad = 0
    for _ in range(10):
        c = random_circuit(rng, cfg, tables)
        e = run_exact(c, noise, tables)
        m = run_monte_carlo(c, noise, 20_000, seed=int(rng.integers(1000)), tables=tables)
        bad += not (within(m.f_out, m.f_out_se, e.f_out, 4) and within(m.p_success, m.p_success_se, e.p_success, 4))
    assert bad <= 1
