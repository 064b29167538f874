"""Noise model: Werner raw pairs, depolarizing two-pair gates, flipped verdicts."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .bell import BellState


@dataclass(frozen=True)
class NoiseConfig:
    """Hardware noise parameters.

    Attributes
    ----------
    f_in : float
        Fidelity of a raw pair (Werner state, the rest spread evenly over
        B, C and D).
    p2 : float
        Probability that a two-pair gate acts correctly. Otherwise a Pauli
        mask drawn from ``gate_channel`` is XORed onto the two pairs; the
        default channel is uniform over all 16 masks (identity included), so
        the pairs end up maximally mixed.
    eta : float or None
        Probability that a measurement verdict is reported correctly.
        ``None`` means ``eta = p2``.
    measurement_model : {"joint", "local"}
        ``"joint"`` flips the verdict once with probability ``1 - eta``.
        ``"local"`` flips each party's outcome independently, so the verdict
        is correct with probability ``eta**2 + (1 - eta)**2``.
    gate_channel : sequence of 16 floats, optional
        Distribution over two-pair masks ``m_a | m_b << 2`` used on a gate error.
    permute_channel : sequence of 4 floats, optional
        Mask distribution applied after every single-pair permutation.
        Default: noiseless.
    """

    f_in: float = 0.9
    p2: float = 0.99
    eta: float | None = None
    measurement_model: str = "joint"
    gate_channel: tuple[float, ...] | None = None
    permute_channel: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("f_in", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta={self.eta} is not a probability")
        if self.measurement_model not in ("joint", "local"):
            raise ValueError(f"unknown measurement model {self.measurement_model!r}")
        for name, size in (("gate_channel", 16), ("permute_channel", 4)):
            ch = getattr(self, name)
            if ch is None:
                continue
            ch = tuple(float(v) for v in ch)
            object.__setattr__(self, name, ch)
            if len(ch) != size or min(ch) < 0 or abs(sum(ch) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be {size} nonnegative weights summing to 1")

    @classmethod
    def noiseless(cls, f_in: float = 1.0) -> "NoiseConfig":
        return cls(f_in=f_in, p2=1.0, eta=1.0)

    @property
    def eta_value(self) -> float:
        return self.p2 if self.eta is None else self.eta

    @property
    def verdict_fidelity(self) -> float:
        """Probability that the reported verdict equals the true one."""
        e = self.eta_value
        if self.measurement_model == "local":
            return e * e + (1 - e) * (1 - e)
        return e

    def raw_distribution(self) -> np.ndarray:
        """Probabilities of codes 0..3 for one raw pair."""
        q = (1.0 - self.f_in) / 3.0
        dist = np.full(4, q)
        dist[int(BellState.A)] = self.f_in
        return dist

    def gate_error_distribution(self) -> np.ndarray:
        if self.gate_channel is None:
            return np.full(16, 1.0 / 16)
        return np.asarray(self.gate_channel, dtype=float)

    def permute_error_distribution(self) -> np.ndarray:
        if self.permute_channel is None:
            return np.array([1.0, 0.0, 0.0, 0.0])
        return np.asarray(self.permute_channel, dtype=float)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eta"] = self.eta_value
        return d


def cdf(weights) -> np.ndarray:
    """Cumulative distribution with the last entry pinned to exactly 1."""
    c = np.cumsum(np.asarray(weights, dtype=np.float64))
    c[-1] = 1.0
    return c
