"""Genetic search over purification circuits.

A candidate is stored as its *genome*: the circuit's ops without the
``NewPair`` refills. :func:`repair` turns any genome into a valid circuit by
dropping ops that cannot act, inserting a refill before every use of a
register that is not live, and trimming trailing ops until the resource
bounds hold. Mutation and crossover work on genomes and always repair.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import circuit as ci
from .ecc import StabilizerCode
from .exact import run_exact
from .gates import BPGateParams, GateTables, get_tables
from .metrics import MetricsReport
from .montecarlo import run_monte_carlo
from .noise import NoiseConfig

COST_KINDS = ("f_out", "f_a", "f_l", "f_l_minus_i")
MUTATIONS = ("insert", "delete", "resample", "swap")


@dataclass(frozen=True)
class CostFunction:
    """What the search maximizes.

    ``f_l`` scores logical fidelity with the weight threshold of ``code``;
    ``f_l_minus_i`` subtracts ``mi_weight`` times the pairwise mutual
    information of the output pairs.
    """

    kind: str = "f_out"
    code: StabilizerCode | None = None
    mi_weight: float = 1.0

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost {self.kind!r}; choose from {COST_KINDS}")
        if self.kind.startswith("f_l") and self.code is None:
            raise ValueError(f"cost {self.kind} needs an error-correcting code")

    @property
    def needs_code(self) -> bool:
        return self.kind.startswith("f_l")

    def __call__(self, rep: MetricsReport) -> float:
        if not rep.available:
            return -math.inf
        if self.kind == "f_out":
            return rep.f_out
        if self.kind == "f_a":
            return rep.f_a
        if self.kind == "f_l":
            return rep.f_l
        return rep.f_l - self.mi_weight * (rep.mutual_info or 0.0)


@dataclass
class SearchConfig:
    """Parameters of one search.

    Circuits have exactly ``k`` outputs on registers ``0..k-1`` and use
    ``r`` registers in total. ``max_n`` bounds raw pairs and ``max_length``
    bounds two-pair gates.
    """

    k: int = 1
    r: int = 3
    max_n: int = 4
    max_length: int = 8
    population_size: int = 100
    max_generations: int = 200
    patience: int = 20
    mutation_weights: dict = field(default_factory=lambda: {"insert": 1.0, "delete": 1.0, "resample": 1.0, "swap": 0.5})
    crossover_rate: float = 0.5
    eval_samples: int = 10_000
    final_eval_samples: int = 100_000
    exact_cap: int = 8
    seed: int = 0
    good_gates_only: bool = True
    measurements: tuple = ci.DEFAULT_MEASUREMENTS
    seed_circuits: tuple = ()
    threads: int = 1

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.k < 1 or self.k >= self.r:
            raise ValueError(f"need 1 <= k < r, got k={self.k}, r={self.r}")
        if self.max_n < self.k:
            raise ValueError(f"max_n={self.max_n} cannot feed k={self.k} outputs")
        if self.max_length < 0 or self.max_generations < 0 or self.patience < 1:
            raise ValueError("max_length and max_generations must be >= 0, patience >= 1")
        w = self.mutation_weights
        if set(w) - set(MUTATIONS) or any(v < 0 for v in w.values()) or sum(w.values()) <= 0:
            raise ValueError(f"mutation weights must be nonnegative over {MUTATIONS} with positive sum")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0, 1]")
        if self.eval_samples < 1 or self.final_eval_samples < 1:
            raise ValueError("evaluation budgets must be >= 1")
        for basis, mode in self.measurements:
            if basis not in ci.BASES or mode not in ci.MODES:
                raise ValueError(f"unknown measurement {basis}/{mode}")


# Genome helpers ----------------------------------------------------------------------


def genome(c: ci.Circuit) -> list[ci.Op]:
    return [op for op in c.ops if not isinstance(op, ci.NewPair)]


def _build(genes, cfg: SearchConfig) -> tuple[ci.Circuit, list[ci.Op]]:
    """Repair without trimming. Returns the circuit and the genes actually kept."""
    outputs = set(range(cfg.k))
    live: set[int] = set()
    ops: list[ci.Op] = []
    kept: list[ci.Op] = []
    for op in genes:
        if isinstance(op, ci.NewPair):
            continue
        regs = ci.op_registers(op)
        if any(not 0 <= q < cfg.r for q in regs) or len(set(regs)) != len(regs):
            continue
        if isinstance(op, ci.Measure):
            if op.reg in outputs or op.reg not in live:
                continue
            ops.append(op)
            kept.append(op)
            live.discard(op.reg)
            continue
        for q in regs:
            if q not in live:
                ops.append(ci.NewPair(q))
                live.add(q)
        ops.append(op)
        kept.append(op)
    for q in sorted(outputs - live):
        ops.append(ci.NewPair(q))
    return ci.Circuit(cfg.r, tuple(ops), tuple(range(cfg.k))), kept


def repair(genes, cfg: SearchConfig) -> ci.Circuit:
    """Smallest-change valid circuit within the bounds of ``cfg``."""
    genes = list(genes)
    while True:
        c, kept = _build(genes, cfg)
        if c.n <= cfg.max_n and c.length <= cfg.max_length:
            return c
        genes = kept[:-1]


def random_op(rng: np.random.Generator, cfg: SearchConfig, tables: GateTables) -> ci.Op:
    """A gate on two random registers, or (sometimes) a measurement of a non-output register."""
    if cfg.r > cfg.k and rng.random() < 0.25:
        basis, mode = cfg.measurements[rng.integers(len(cfg.measurements))]
        return ci.Measure(basis, mode, int(rng.integers(cfg.k, cfg.r)))
    return _random_gate(rng, cfg, tables)


def _random_gate(rng, cfg, tables) -> ci.BPGate:
    if cfg.good_gates_only:
        idx = int(tables.good_subset[rng.integers(len(tables.good_subset))])
    else:
        idx = int(rng.integers(len(tables.fused)))
    a, b = rng.choice(cfg.r, size=2, replace=False)
    return ci.BPGate(BPGateParams.from_index(idx), int(a), int(b))


def _resample(op: ci.Op, rng, cfg, tables) -> ci.Op:
    if isinstance(op, ci.BPGate):
        if rng.random() < 0.5:
            g = _random_gate(rng, cfg, tables)
            return ci.BPGate(g.params, op.reg_a, op.reg_b)
        a, b = rng.choice(cfg.r, size=2, replace=False)
        return ci.BPGate(op.params, int(a), int(b))
    if isinstance(op, ci.Measure):
        if rng.random() < 0.5:
            basis, mode = cfg.measurements[rng.integers(len(cfg.measurements))]
            return ci.Measure(basis, mode, op.reg)
        return ci.Measure(op.basis, op.mode, int(rng.integers(cfg.k, cfg.r)))
    return op


def mutate(c: ci.Circuit, rng: np.random.Generator, cfg: SearchConfig,
           tables: GateTables | None = None) -> ci.Circuit:
    """Apply one random mutation and repair."""
    tables = tables or get_tables()
    genes = genome(c)
    names = [m for m in MUTATIONS if cfg.mutation_weights.get(m, 0) > 0]
    if len(genes) == 0:
        names = ["insert"]
    elif len(genes) == 1:
        names = [m for m in names if m != "swap"] or ["insert"]
    w = np.array([cfg.mutation_weights.get(m, 0.0) for m in names])
    w = w / w.sum() if w.sum() > 0 else np.full(len(names), 1 / len(names))
    kind = names[rng.choice(len(names), p=w)]
    if kind == "insert":
        # a measurement alone would be dropped by repair, so an empty genome gets a gate
        op = random_op(rng, cfg, tables) if genes else _random_gate(rng, cfg, tables)
        genes.insert(int(rng.integers(len(genes) + 1)), op)
    elif kind == "delete":
        del genes[int(rng.integers(len(genes)))]
    elif kind == "resample":
        i = int(rng.integers(len(genes)))
        genes[i] = _resample(genes[i], rng, cfg, tables)
    else:
        i, j = rng.choice(len(genes), size=2, replace=False)
        genes[i], genes[j] = genes[j], genes[i]
    return repair(genes, cfg)


def crossover(a: ci.Circuit, b: ci.Circuit, rng: np.random.Generator, cfg: SearchConfig,
              point: int | None = None) -> ci.Circuit:
    """Genes of ``a`` before ``point`` followed by genes of ``b`` from ``point`` on."""
    if a.register_width != b.register_width or a.output_pairs != b.output_pairs:
        raise ValueError("crossover needs parents with the same register width and outputs")
    ga, gb = genome(a), genome(b)
    if point is None:
        point = int(rng.integers(max(len(ga), len(gb)) + 1))
    return repair(ga[:point] + gb[point:], cfg)


def random_circuit(rng: np.random.Generator, cfg: SearchConfig, tables: GateTables | None = None) -> ci.Circuit:
    tables = tables or get_tables()
    length = int(rng.integers(1, max(cfg.max_length, 1) + 1))
    return repair([random_op(rng, cfg, tables) for _ in range(2 * length)], cfg)


def fit_circuit(c: ci.Circuit, cfg: SearchConfig) -> ci.Circuit:
    """Adapt a seed circuit to the search's register width (outputs must be ``0..k-1``)."""
    if c.output_pairs != tuple(range(cfg.k)):
        raise ValueError(f"seed outputs {c.output_pairs} are not registers 0..{cfg.k - 1}")
    if c.register_width > cfg.r:
        raise ValueError(f"seed needs {c.register_width} registers, search allows {cfg.r}")
    return repair(genome(c), cfg)


# Search ------------------------------------------------------------------------------


@dataclass
class Candidate:
    circuit: ci.Circuit
    cost: float
    report: MetricsReport
    order: int

    def key(self):
        return (-self.cost, self.circuit.length, self.circuit.n, self.order)


@dataclass
class SearchLog:
    rows: list[dict] = field(default_factory=list)

    FIELDS = ("generation", "best", "median", "best_length", "best_n", "evaluations")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.FIELDS)
            w.writeheader()
            w.writerows(self.rows)

    @property
    def best_costs(self) -> list[float]:
        return [row["best"] for row in self.rows]


@dataclass
class SearchResult:
    circuit: ci.Circuit
    report: MetricsReport
    cost: float
    log: SearchLog


def evaluate(c: ci.Circuit, noise: NoiseConfig, cost: CostFunction, cfg: SearchConfig,
             seed: int, tables: GateTables) -> tuple[float, MetricsReport]:
    """Exact when the register fits under ``cfg.exact_cap``, Monte Carlo otherwise."""
    mi = cost.kind == "f_l_minus_i"
    if c.register_width <= cfg.exact_cap:
        rep = run_exact(c, noise, tables, code=cost.code, with_mutual_info=mi)
    else:
        rep = run_monte_carlo(c, noise, cfg.eval_samples, seed, tables, code=cost.code,
                              threads=1, with_mutual_info=mi)
    return cost(rep), rep


def optimize(cfg: SearchConfig, noise: NoiseConfig, cost: CostFunction,
             tables: GateTables | None = None) -> SearchResult:
    """Elitist genetic search; returns the best circuit re-evaluated by Monte Carlo."""
    tables = tables or get_tables()
    if cost.needs_code and cost.code.n_phys != cfg.k:
        raise ValueError(f"{cost.code.name} needs k={cost.code.n_phys}, search has k={cfg.k}")
    rng = np.random.default_rng(cfg.seed)
    counter = [0]
    seen: dict[str, Candidate] = {}

    def evaluate_all(circuits: list[ci.Circuit]) -> list[Candidate]:
        todo = []
        for c in circuits:
            key = ci.serialize(c)
            if key in seen:
                continue
            seen[key] = None
            todo.append((key, c, int(rng.integers(2**63))))
        pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
        run = (lambda f, xs: list(pool.map(f, xs))) if pool else (lambda f, xs: [f(x) for x in xs])
        results = run(lambda t: evaluate(t[1], noise, cost, cfg, t[2], tables), todo)
        if pool:
            pool.shutdown()
        out = []
        for (key, c, _), (value, rep) in zip(todo, results):
            cand = Candidate(c, value, rep, counter[0])
            counter[0] += 1
            seen[key] = cand
            out.append(cand)
        return out

    initial = [fit_circuit(c, cfg) for c in cfg.seed_circuits]
    while len(initial) < cfg.population_size:
        initial.append(random_circuit(rng, cfg, tables))
    population = sorted(evaluate_all(initial), key=Candidate.key)[: cfg.population_size]
    log = SearchLog()

    def record(gen: int) -> None:
        costs = [p.cost for p in population]
        best = population[0]
        log.rows.append({
            "generation": gen, "best": best.cost, "median": float(np.median(costs)),
            "best_length": best.circuit.length, "best_n": best.circuit.n, "evaluations": counter[0],
        })

    record(0)
    stale = 0
    for gen in range(1, cfg.max_generations + 1):
        children = [mutate(population[int(rng.integers(len(population)))].circuit, rng, cfg, tables)
                    for _ in range(cfg.population_size)]
        for _ in range(int(round(cfg.crossover_rate * cfg.population_size))):
            i, j = rng.choice(len(population), size=2, replace=len(population) < 2)
            children.append(crossover(population[i].circuit, population[j].circuit, rng, cfg))
        previous = population[0].cost
        population = sorted(population + evaluate_all(children), key=Candidate.key)[: cfg.population_size]
        record(gen)
        stale = stale + 1 if population[0].cost <= previous + 1e-12 else 0
        if stale >= cfg.patience:
            break

    best = population[0]
    report = run_monte_carlo(best.circuit, noise, cfg.final_eval_samples, int(rng.integers(2**63)),
                             tables, code=cost.code, threads=cfg.threads)
    return SearchResult(best.circuit, report, best.cost, log)
