import numpy as np
import pytest

from bellperm import circuit as ci
from bellperm.exact import DistributionVector, ExactCapError, ExactSimulator, propagate, run_exact
from bellperm.gates import CNOT
from bellperm.noise import NoiseConfig
from bellperm.optimize import SearchConfig, random_circuit

from frozen import SINGLE_SELECTION_F09


def test_single_selection_exact(tables):
    rep = run_exact(ci.build_single_selection("Z", tables), NoiseConfig.noiseless(0.9), tables)
    f_out, p_succ = SINGLE_SELECTION_F09
    assert rep.f_out == pytest.approx(f_out, abs=1e-12)
    assert rep.p_success == pytest.approx(p_succ, abs=1e-12)
    assert rep.f_a == rep.f_out  # one output pair


def test_noiseless_perfect_pairs(tables):
    for c in (ci.build_double_selection(), ci.build_manual_5to2(), ci.build_truncated_hashing(8, 2)):
        rep = run_exact(c, NoiseConfig.noiseless(1.0), tables)
        assert rep.f_out == rep.f_a == rep.p_success == 1.0


def test_identity_circuit_keeps_fin(tables):
    rep = run_exact(ci.build_identity(3), NoiseConfig(f_in=0.83), tables)
    assert rep.f_out == pytest.approx(0.83)
    assert rep.f_a == pytest.approx(0.83**3)
    assert rep.p_success == pytest.approx(1.0)


def test_depolarized_cnot_on_aa(tables):
    c = ci.Circuit(3, (ci.NewPair(0), ci.NewPair(1), ci.BPGate(CNOT, 0, 1)), (0, 1))
    rep = run_exact(c, NoiseConfig(f_in=1.0, p2=0.99), tables)
    assert rep.f_a == pytest.approx(0.99 + 0.01 / 16, abs=1e-15)


def test_full_depolarization_is_uniform(tables):
    c = ci.Circuit(3, (ci.NewPair(0), ci.NewPair(1), ci.BPGate(CNOT, 0, 1)), (0, 1))
    sim = propagate(c, NoiseConfig(f_in=0.7, p2=0.0), tables)
    assert np.allclose(sim.output_joint((0, 1)), 1 / 16)


def test_mass_conservation_random_circuits(tables, rng):
    cfg = SearchConfig(k=2, r=5, max_n=8, max_length=10, population_size=2)
    for _ in range(40):
        c = random_circuit(rng, cfg, tables)
        noise = NoiseConfig(f_in=rng.uniform(0.5, 1), p2=rng.uniform(0.8, 1), eta=rng.uniform(0.8, 1))
        sim = ExactSimulator(c.r, noise, tables, check=True)
        for op in c.ops:
            sim.apply(op)  # asserts after every op
        assert sim.mass + sim.rejected == pytest.approx(1.0, abs=1e-12)


def test_noiseless_is_reindexing(tables, rng):
    cfg = SearchConfig(k=1, r=3, max_n=5, max_length=6, population_size=2)
    for _ in range(20):
        c = random_circuit(rng, cfg, tables)
        sim = propagate(c, NoiseConfig.noiseless(0.8), tables, check=True)
        assert sim.mass + sim.rejected == pytest.approx(1.0, abs=1e-12)


def test_cap(tables):
    with pytest.raises(ExactCapError):
        run_exact(ci.build_truncated_hashing(16, 2), NoiseConfig(), tables)
    with pytest.raises(ExactCapError):
        run_exact(ci.build_double_selection(), NoiseConfig(), tables, cap=2)


def test_invalid_circuit_rejected(tables):
    with pytest.raises(ci.CircuitValidationError):
        run_exact(ci.Circuit(2, (), (0,)), NoiseConfig(), tables)


def test_distribution_dump_order(tables):
    c = ci.Circuit(3, (ci.NewPair(0), ci.NewPair(1)), (0, 1))
    dv = propagate(c, NoiseConfig(f_in=0.7), tables).distribution()
    # register 2 is unused and sits in A; joint code j = sum(code_i << 2 i)
    j = 3 | (0 << 2) | (3 << 4)
    assert dv.probs[j] == pytest.approx(0.7 * 0.1)
    assert dv.norm == pytest.approx(1.0)
    assert np.array_equal(DistributionVector.from_array(dv.to_array()).probs, dv.probs)
    line = [ln for ln in dv.to_text().splitlines() if ln.startswith("110011 ")]
    assert len(line) == 1


def test_eta_zero_rejects_everything(tables):
    rep = run_exact(ci.build_single_selection("Z", tables), NoiseConfig(f_in=1.0, p2=1.0, eta=0.0), tables)
    assert rep.p_success == 0.0 and not rep.available


def test_measurement_models_differ(tables):
    c = ci.build_single_selection("Z", tables)
    j = run_exact(c, NoiseConfig(0.9, 0.95, measurement_model="joint"), tables)
    loc = run_exact(c, NoiseConfig(0.9, 0.95, measurement_model="local"), tables)
    assert loc.p_success != j.p_success


def test_permute_channel(tables):
    # a noisy identity permutation on a perfect pair leaves A with prob 0.9
    c = ci.Circuit(2, (ci.NewPair(0), ci.PairPermute(0, 0)), (0,))
    rep = run_exact(c, NoiseConfig(f_in=1.0, permute_channel=[0.9, 0.05, 0.05, 0.0]), tables)
    assert rep.f_out == pytest.approx(0.9)
