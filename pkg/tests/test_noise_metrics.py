import json
import math

import numpy as np
import pytest

from bellperm.metrics import (
    MetricsReport, estimate_mutual_information, mutual_information_from_joint, report_from_joint,
    report_from_samples,
)
from bellperm.noise import NoiseConfig, cdf


def test_defaults_and_eta():
    cfg = NoiseConfig()
    assert cfg.f_in == 0.9 and cfg.p2 == 0.99
    assert cfg.eta_value == 0.99
    assert NoiseConfig(p2=0.9, eta=0.8).eta_value == 0.8


def test_local_measurement_model():
    cfg = NoiseConfig(p2=0.9, measurement_model="local")
    assert cfg.verdict_fidelity == pytest.approx(0.9**2 + 0.1**2)
    assert NoiseConfig(p2=0.9).verdict_fidelity == 0.9


@pytest.mark.parametrize("kwargs", [
    dict(f_in=1.1), dict(p2=-0.1), dict(eta=2.0), dict(measurement_model="both"),
    dict(gate_channel=[0.5] * 16), dict(permute_channel=[1.0, 0.0, 0.0]),
])
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        NoiseConfig(**kwargs)


def test_raw_distribution():
    d = NoiseConfig(f_in=0.7).raw_distribution()
    assert d[3] == 0.7 and np.allclose(d[:3], 0.1) and math.isclose(d.sum(), 1.0)
    assert np.allclose(NoiseConfig(f_in=0.25).raw_distribution(), 0.25)


def test_cdf_last_entry_is_one():
    c = cdf([0.1] * 10)
    assert c[-1] == 1.0 and np.all(np.diff(c) >= 0)


def test_mi_correlated_and_independent(rng):
    u = rng.integers(4, size=100_000)
    assert estimate_mutual_information(np.stack([u, u], axis=1)) == pytest.approx(2.0, abs=1e-3)
    v = rng.integers(4, size=(100_000, 2))
    # plug-in bias is about (4-1)^2 / (2 N ln 2)
    assert estimate_mutual_information(v) < 10 * 9 / (2 * 100_000 * math.log(2))


def test_mi_needs_samples_and_pairs():
    assert estimate_mutual_information(np.zeros((10, 2), dtype=int)) is None
    with pytest.raises(ValueError):
        estimate_mutual_information(np.zeros((200, 1), dtype=int))


def test_mi_exact_vs_sampled(rng):
    joint = rng.dirichlet(np.ones(64) * 0.3).reshape(4, 4, 4)
    exact = mutual_information_from_joint(joint)
    flat = rng.choice(64, size=200_000, p=joint.ravel())
    codes = np.stack([flat // 16, (flat // 4) % 4, flat % 4], axis=1)
    assert estimate_mutual_information(codes) == pytest.approx(exact, abs=0.01)


def test_report_from_samples_basic():
    codes = np.array([[3, 3], [3, 0], [1, 2], [3, 3]])
    rep = report_from_samples(codes, n_samples=8)
    assert rep.p_success == 0.5
    assert rep.f_out == pytest.approx(5 / 8)
    assert rep.f_a == 0.5
    assert rep.weight_histogram == [2, 1, 1]
    assert sum(rep.weight_histogram) == rep.accepted_count


def test_report_with_no_accepted():
    rep = report_from_samples(np.zeros((0, 2), dtype=int), n_samples=10)
    assert not rep.available and rep.p_success == 0.0
    assert json.loads(rep.to_json())["f_out"] is None


def test_fa_above_fout_rejected():
    with pytest.raises(AssertionError):
        MetricsReport(p_success=1.0, f_out=0.5, f_a=0.6, weight_histogram=[1])


def test_report_from_joint_matches_samples():
    joint = np.zeros((4, 4))
    joint[3, 3] = 0.5
    joint[3, 0] = 0.25
    joint[1, 2] = 0.25
    rep = report_from_joint(joint * 0.8, 0.8)
    assert rep.f_a == pytest.approx(0.5)
    assert rep.f_out == pytest.approx((0.75 + 0.5) / 2)
    assert rep.weight_histogram == pytest.approx([0.5, 0.25, 0.25])


def test_csv_and_json():
    rep = report_from_samples(np.array([[3], [3], [0]]), n_samples=4)
    text = rep.to_csv()
    header, row = text.strip().split("\n")
    assert header.split(",")[0] == "p_success" and row.startswith("0.75")
    assert json.loads(rep.to_json())["sample_count"] == 4
