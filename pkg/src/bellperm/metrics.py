"""Figures of merit for purified pairs."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bell import BellState
from .ecc import StabilizerCode, codes_to_xz

CODE_A = int(BellState.A)
MIN_MI_SAMPLES = 100


@dataclass
class MetricsReport:
    """Success probability and output quality of one circuit at one noise point.

    Monte Carlo reports carry standard errors in the ``*_se`` fields; exact
    reports leave them at 0. Conditional metrics are ``nan`` (and
    ``available`` is False) when no run was accepted.
    """

    p_success: float
    f_out: float
    f_a: float
    weight_histogram: list[float]
    sample_count: int | None = None
    accepted_count: int | None = None
    exact: bool = False
    available: bool = True
    p_success_se: float = 0.0
    f_out_se: float = 0.0
    f_a_se: float = 0.0
    f_l: float | None = None
    f_l_se: float = 0.0
    f_l_decoder: float | None = None
    f_l_decoder_se: float = 0.0
    mutual_info: float | None = None
    code: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.available and not math.isnan(self.f_a):
            # F_A is a joint probability, F_out an average of marginals.
            assert self.f_a <= self.f_out + 1e-12, (self.f_a, self.f_out)
            assert self.f_out <= 1 + 1e-12

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    CSV_FIELDS = (
        "p_success", "p_success_se", "f_out", "f_out_se", "f_a", "f_a_se",
        "f_l", "f_l_se", "f_l_decoder", "f_l_decoder_se", "mutual_info",
        "sample_count", "accepted_count", "exact", "available", "code",
    )

    def csv_row(self) -> dict:
        d = self.to_dict()
        return {k: d[k] for k in self.CSV_FIELDS}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


# Mutual information -----------------------------------------------------------------


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mutual_information_from_joint(joint: np.ndarray) -> float:
    """Sum over ``i < j`` of ``I(pair_i; pair_j)`` in bits.

    ``joint`` is a normalized distribution with one axis of length 4 per
    output pair.
    """
    k = joint.ndim
    total = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            other = tuple(a for a in range(k) if a not in (i, j))
            pij = joint.sum(axis=other) if other else joint
            total += _entropy(pij.sum(axis=1)) + _entropy(pij.sum(axis=0)) - _entropy(pij.ravel())
    return max(total, 0.0)


def estimate_mutual_information(codes: np.ndarray, min_samples: int = MIN_MI_SAMPLES) -> float | None:
    """Plug-in estimate of the pairwise-summed mutual information.

    ``codes`` has one row per accepted sample and one column per output
    pair. Returns ``None`` with fewer than ``min_samples`` rows.
    """
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim != 2 or codes.shape[1] < 2:
        raise ValueError("mutual information needs at least two output pairs")
    if len(codes) < min_samples:
        return None
    total = 0.0
    n = len(codes)
    for i in range(codes.shape[1]):
        for j in range(i + 1, codes.shape[1]):
            counts = np.bincount(codes[:, i] * 4 + codes[:, j], minlength=16).reshape(4, 4) / n
            total += _entropy(counts.sum(axis=1)) + _entropy(counts.sum(axis=0)) - _entropy(counts.ravel())
    return max(total, 0.0)


# Report construction -----------------------------------------------------------------


def _se(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


def report_from_samples(
    accepted_codes: np.ndarray,
    n_samples: int,
    code: StabilizerCode | None = None,
    with_mutual_info: bool = True,
) -> MetricsReport:
    """Metrics from the output codes of accepted Monte Carlo trajectories."""
    acc = np.asarray(accepted_codes, dtype=np.int64)
    n_acc, k = acc.shape
    p = n_acc / n_samples
    p_se = math.sqrt(p * (1 - p) / n_samples)
    if n_acc == 0:
        return MetricsReport(
            p_success=p, p_success_se=p_se, f_out=math.nan, f_a=math.nan,
            weight_histogram=[0] * (k + 1), sample_count=n_samples, accepted_count=0,
            available=False, code=code.name if code else None,
        )
    is_a = acc == CODE_A
    per_sample = is_a.mean(axis=1)
    all_a = is_a.all(axis=1).astype(float)
    weights = k - is_a.sum(axis=1)
    rep = MetricsReport(
        p_success=p,
        p_success_se=p_se,
        f_out=float(per_sample.mean()),
        f_out_se=_se(per_sample),
        f_a=float(all_a.mean()),
        f_a_se=_se(all_a),
        weight_histogram=np.bincount(weights, minlength=k + 1).tolist(),
        sample_count=n_samples,
        accepted_count=n_acc,
    )
    if code is not None:
        if k != code.n_phys:
            raise ValueError(f"{code.name} needs k={code.n_phys} output pairs, circuit has {k}")
        x, z = codes_to_xz(acc)
        thr = code.threshold_success(x, z).astype(float)
        dec = code.decode_success(x, z).astype(float)
        rep.code = code.name
        rep.f_l, rep.f_l_se = float(thr.mean()), _se(thr)
        rep.f_l_decoder, rep.f_l_decoder_se = float(dec.mean()), _se(dec)
    if with_mutual_info and k >= 2:
        rep.mutual_info = estimate_mutual_information(acc)
    return rep


def report_from_joint(
    joint: np.ndarray,
    p_success: float,
    code: StabilizerCode | None = None,
    with_mutual_info: bool = True,
) -> MetricsReport:
    """Metrics from the exact (unnormalized) distribution over output codes.

    ``joint`` has one axis of length 4 per output pair, in output order, and
    total mass ``p_success``.
    """
    k = joint.ndim
    if p_success <= 0:
        return MetricsReport(
            p_success=0.0, f_out=math.nan, f_a=math.nan, weight_histogram=[0.0] * (k + 1),
            exact=True, available=False, code=code.name if code else None,
        )
    dist = joint / p_success
    marg_a = [float(dist.sum(axis=tuple(a for a in range(k) if a != i))[CODE_A]) for i in range(k)]
    flat_codes = _all_codes(k)
    probs = dist.reshape(-1)
    weights = (flat_codes != CODE_A).sum(axis=1)
    hist = np.bincount(weights, weights=probs, minlength=k + 1)
    rep = MetricsReport(
        p_success=float(p_success),
        f_out=float(np.mean(marg_a)),
        f_a=float(dist[(CODE_A,) * k]),
        weight_histogram=hist.tolist(),
        exact=True,
    )
    if code is not None:
        if k != code.n_phys:
            raise ValueError(f"{code.name} needs k={code.n_phys} output pairs, circuit has {k}")
        x, z = _all_xz(k)
        rep.code = code.name
        rep.f_l = float(probs[code.threshold_success(x, z)].sum())
        rep.f_l_decoder = float(probs[code.decode_success(x, z)].sum())
    if with_mutual_info and k >= 2:
        rep.mutual_info = mutual_information_from_joint(dist)
    return rep


_CODES_CACHE: dict[int, np.ndarray] = {}
_XZ_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _all_codes(k: int) -> np.ndarray:
    """Rows of codes in C order of a ``(4,)*k`` array (first axis slowest)."""
    if k not in _CODES_CACHE:
        idx = np.arange(4**k)
        _CODES_CACHE[k] = np.stack([(idx // 4 ** (k - 1 - i)) % 4 for i in range(k)], axis=1)
    return _CODES_CACHE[k]


def _all_xz(k: int) -> tuple[np.ndarray, np.ndarray]:
    if k not in _XZ_CACHE:
        _XZ_CACHE[k] = codes_to_xz(_all_codes(k))
    return _XZ_CACHE[k]
