"""Bell-pair purification circuits simulated on the Bell-code diagonal.

Multi-pair Bell-diagonal states are tracked as strings of 2-bit codes, one
per pair, and every bilateral Clifford gate acts as a lookup-table
permutation of the joint codes of two pairs.
"""

__version__ = "0.1.0"

from .bell import BellState, PauliMask, RegisterState, apply_pauli_mask, decode, encode, get_pair, set_pair
from .circuit import BPGate, Circuit, Measure, NewPair, PairPermute, validate
from .ecc import StabilizerCode, get_code
from .exact import DistributionVector, run_exact
from .gates import BPGateParams, GateTables, derive_tables, get_tables
from .kernels import BACKEND
from .metrics import MetricsReport, estimate_mutual_information
from .montecarlo import apply_measurement, apply_noisy_gate, run_monte_carlo, sample_raw_pair
from .noise import NoiseConfig
from .optimize import CostFunction, SearchConfig, crossover, mutate, optimize

__all__ = [
    "BACKEND", "BPGate", "BPGateParams", "BellState", "Circuit", "CostFunction", "DistributionVector",
    "GateTables", "Measure", "MetricsReport", "NewPair", "NoiseConfig", "PairPermute", "PauliMask",
    "RegisterState", "SearchConfig", "StabilizerCode", "apply_measurement", "apply_noisy_gate",
    "apply_pauli_mask", "crossover", "decode", "derive_tables", "encode", "estimate_mutual_information",
    "get_code", "get_pair", "get_tables", "mutate", "optimize", "run_exact", "run_monte_carlo",
    "sample_raw_pair", "set_pair", "validate",
]
