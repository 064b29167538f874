import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellperm import circuit as ci
from bellperm.ecc import builtin_code
from bellperm.exact import run_exact
from bellperm.noise import NoiseConfig
from bellperm.optimize import (
    CostFunction, SearchConfig, crossover, fit_circuit, genome, mutate, optimize, random_circuit, repair,
)

NOISE = NoiseConfig(0.9, 0.99)


def small_cfg(**kw):
    base = dict(k=1, r=3, max_n=4, max_length=6, population_size=12, max_generations=4, patience=10,
                eval_samples=2000, final_eval_samples=4000, seed=0)
    base.update(kw)
    return SearchConfig(**base)


def assert_within_bounds(c, cfg, tables):
    assert ci.validate(c, tables) == []
    assert c.register_width == cfg.r
    assert c.output_pairs == tuple(range(cfg.k))
    assert c.n <= cfg.max_n and c.length <= cfg.max_length


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(k=3, r=3)
    with pytest.raises(ValueError):
        SearchConfig(max_n=0)
    with pytest.raises(ValueError):
        SearchConfig(population_size=1)
    with pytest.raises(ValueError):
        SearchConfig(mutation_weights={"teleport": 1.0})
    with pytest.raises(ValueError):
        SearchConfig(crossover_rate=2.0)
    with pytest.raises(ValueError):
        SearchConfig(measurements=(("W", "coincidence"),))


def test_cost_function_validation():
    with pytest.raises(ValueError):
        CostFunction("f_l")
    with pytest.raises(ValueError):
        CostFunction("fidelity")
    with pytest.raises(ValueError, match="k=5"):
        optimize(small_cfg(), NOISE, CostFunction("f_l", builtin_code("five_qubit")))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 4))
def test_mutants_and_offspring_valid(tables, seed, k, extra):
    cfg = small_cfg(k=k, r=k + 2, max_n=k + extra, max_length=7)
    rng = np.random.default_rng(seed)
    pop = [random_circuit(rng, cfg, tables) for _ in range(5)]
    for _ in range(50):
        child = mutate(pop[int(rng.integers(5))], rng, cfg, tables)
        assert_within_bounds(child, cfg, tables)
        other = crossover(child, pop[int(rng.integers(5))], rng, cfg)
        assert_within_bounds(other, cfg, tables)
        pop[int(rng.integers(5))] = other


def test_many_mutants_valid(tables):
    cfg = small_cfg(max_n=5, max_length=8)
    rng = np.random.default_rng(7)
    c = random_circuit(rng, cfg, tables)
    for _ in range(10_000):
        c = mutate(c, rng, cfg, tables)
        assert c.n <= cfg.max_n and c.length <= cfg.max_length
    assert ci.validate(c, tables) == []


def test_delete_then_reinsert_is_identity(tables):
    cfg = small_cfg(max_n=6, max_length=8)
    rng = np.random.default_rng(3)
    for _ in range(50):
        c = random_circuit(rng, cfg, tables)
        genes = genome(c)
        for i, op in enumerate(genes):
            shorter = genes[:i] + genes[i + 1:]
            assert repair(shorter[:i] + [op] + shorter[i:], cfg) == c


def test_length_zero_mutation_inserts(tables):
    cfg = small_cfg()
    empty = repair([], cfg)
    assert genome(empty) == []
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert len(genome(mutate(empty, rng, cfg, tables))) == 1


def test_crossover_properties(tables):
    cfg = small_cfg()
    rng = np.random.default_rng(1)
    a, b = random_circuit(rng, cfg, tables), random_circuit(rng, cfg, tables)
    assert crossover(a, a, rng, cfg) == a
    assert crossover(a, b, rng, cfg, point=0) == b
    with pytest.raises(ValueError):
        crossover(a, ci.build_identity(2), rng, cfg)


def test_fit_circuit_rejects_wrong_outputs():
    with pytest.raises(ValueError):
        fit_circuit(ci.build_identity(2), small_cfg())
    with pytest.raises(ValueError):
        fit_circuit(ci.build_double_selection(), small_cfg(r=2))


def test_elitism_keeps_best_seed(tables):
    ss = ci.build_single_selection("Z", tables)
    cfg = small_cfg(population_size=2, max_generations=0, seed_circuits=(ci.build_identity(1), ss))
    res = optimize(cfg, NOISE, CostFunction("f_out"), tables)
    assert res.circuit == fit_circuit(ss, cfg)
    assert res.cost == pytest.approx(run_exact(ss, NOISE, tables).f_out, abs=1e-12)


def test_search_monotone_reproducible_and_bounded(tables):
    cfg = small_cfg(max_generations=6)
    a = optimize(cfg, NOISE, CostFunction("f_out"), tables)
    best = a.log.best_costs
    assert all(y >= x - 1e-12 for x, y in zip(best, best[1:]))
    assert_within_bounds(a.circuit, cfg, tables)
    b = optimize(cfg, NOISE, CostFunction("f_out"), tables)
    assert ci.serialize(a.circuit) == ci.serialize(b.circuit)
    assert a.log.rows == b.log.rows
    assert a.report.to_json() == b.report.to_json()


def test_search_log_csv(tables, tmp_path):
    res = optimize(small_cfg(max_generations=2), NOISE, CostFunction("f_a"), tables)
    path = tmp_path / "log.csv"
    res.log.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "generation,best,median,best_length,best_n,evaluations"
    assert len(lines) == len(res.log.rows) + 1


def test_monte_carlo_evaluation_path(tables):
    """With exact_cap below r, candidates are scored by sampling."""
    cfg = small_cfg(exact_cap=2, max_generations=1, population_size=4)
    res = optimize(cfg, NOISE, CostFunction("f_out"), tables)
    assert 0.0 <= res.cost <= 1.0
    assert not res.report.exact
