import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavpdc.harness import (ScenarioConfig, TrialDiagnostics, _block_indices,
                            compare_report, config_from_dict, config_to_yaml,
                            empirical_cdf, link_budget_normalize,
                            read_samples_csv, run_trials, default_preset,
                            write_cdf_csvs, write_samples_csv)
from uavpdc.linklevel import Direction, Scheme
from uavpdc.topology import UserKind


@pytest.fixture(scope="module")
def tiny_run():
    cfg = default_preset(trials=6, seed=77, trial_block=4)
    return cfg, run_trials(cfg)


def test_preset_matches_setup():
    cfg = default_preset()
    assert cfg.layout.K == 9 and cfg.layout.K_u == 3
    assert cfg.layout.cell_radius == 500.0 and cfg.layout.reuse_factor == 7
    assert cfg.array.M == 128
    assert cfg.detector.kappa == 3.0


def test_link_budget_numbers():
    lb = link_budget_normalize(default_preset())
    # 10 MHz over -164 dBm/Hz
    assert lb.noise_watts == pytest.approx(3.981e-13, rel=1e-3)
    # E = M * P_tx / noise for 23 dBm up and 46 dBm down
    assert lb.E_u == pytest.approx(128 * 0.1995 / 3.981e-13, rel=1e-3)
    assert lb.E_d == pytest.approx(128 * 39.81 / 3.981e-13, rel=1e-3)
    # pilot defaults: tau = K symbols at the uplink power
    assert lb.tau_pp == pytest.approx(9 * 0.1995 / 3.981e-13, rel=1e-3)


def test_config_yaml_round_trip():
    cfg = default_preset(trials=11, seed=3,
                         schemes=(Scheme.BEFORE, Scheme.AFTER))
    back = config_from_dict(__import__("yaml").safe_load(config_to_yaml(cfg)))
    assert back == cfg


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(trials=0)
    with pytest.raises(ValueError):
        ScenarioConfig(trial_block=0)


@given(st.integers(1, 200), st.integers(1, 64))
@settings(max_examples=40, deadline=None)
def test_block_indices_partition(trials, block):
    blocks = _block_indices(trials, block)
    flat = [t for b in blocks for t in b]
    assert flat == list(range(trials))
    assert all(len(b) <= block for b in blocks)


def test_run_trials_sample_shape(tiny_run):
    cfg, (samples, diags) = tiny_run
    # K users x 2 directions x 4 schemes per trial
    assert len(samples) == cfg.trials * cfg.layout.K * 2 * len(cfg.schemes)
    trials_seen = {row[0] for row in samples}
    assert trials_seen == set(range(cfg.trials))
    assert all(row[5] > 0 for row in samples)
    kinds = {row[2] for row in samples}
    assert kinds == {UserKind.UAV, UserKind.GUE}
    assert diags.uav_identification_total == cfg.trials * cfg.layout.K_u


def test_trial_block_size_does_not_change_results():
    base = default_preset(trials=5, seed=9, trial_block=32,
                          schemes=(Scheme.BEFORE, Scheme.TRUE_CSI))
    small = default_preset(trials=5, seed=9, trial_block=2,
                           schemes=(Scheme.BEFORE, Scheme.TRUE_CSI))
    s1, _ = run_trials(base)
    s2, _ = run_trials(small)
    assert s1 == s2


def test_true_csi_bounds_before(tiny_run):
    """The true-CSI uplink SINR beats the contaminated estimate's in almost
    every (trial, user) pair.  Not a per-pair certainty: matched filtering
    with the true channel maximizes SNR, not SINR, so rare draws where the
    contaminated combiner happens to suppress an interferer can reverse it."""
    _, (samples, _) = tiny_run
    by_key = {}
    for trial, user, kind, direction, scheme, value in samples:
        by_key[(trial, user, direction, scheme)] = value
    wins = total = 0
    for (trial, user, direction, scheme), value in by_key.items():
        if scheme is Scheme.BEFORE and direction is Direction.UL:
            total += 1
            wins += value <= by_key[(trial, user, direction, Scheme.TRUE_CSI)]
    assert wins >= 0.9 * total


def test_samples_csv_round_trip(tiny_run, tmp_path):
    _, (samples, _) = tiny_run
    path = tmp_path / "samples.csv"
    write_samples_csv(samples, path)
    back = read_samples_csv(path)
    assert len(back) == len(samples)
    for a, b in zip(samples, back):
        assert a[:5] == b[:5]
        assert b[5] == pytest.approx(a[5], rel=1e-9)


def test_empirical_cdf_properties(tiny_run):
    _, (samples, _) = tiny_run
    series = empirical_cdf(samples)
    assert len(series) == 16  # 2 kinds x 2 directions x 4 schemes
    for s in series:
        assert np.all(np.diff(s.values_db) >= 0)
        assert s.probabilities[0] > 0
        assert s.probabilities[-1] == pytest.approx(1.0)
        assert set(s.label) == {"kind", "direction", "scheme"}


def test_write_cdf_csvs(tiny_run, tmp_path):
    _, (samples, _) = tiny_run
    paths = write_cdf_csvs(empirical_cdf(samples), tmp_path)
    assert len(paths) == 16
    assert os.path.basename(paths[0]).startswith("cdf_")
    with open(paths[0]) as fh:
        header = fh.readline().strip()
    assert header == "sinr_db,probability"


def test_compare_report_contents(tiny_run):
    _, (samples, diags) = tiny_run
    report = compare_report(samples, diags)
    assert "uav/ul/before" in report
    assert "gue/dl/perfect" in report
    assert "UAV identification success" in report
    assert "truncated detections" in report


def test_diagnostics_merge():
    a = TrialDiagnostics(uav_identification_ok=2, interferers_total=5)
    b = TrialDiagnostics(uav_identification_ok=1, false_removals=3)
    a.merge(b)
    assert a.uav_identification_ok == 3
    assert a.interferers_total == 5
    assert a.false_removals == 3


def test_worker_pool_matches_serial():
    cfg = default_preset(trials=4, seed=21, trial_block=2,
                         schemes=(Scheme.BEFORE,))
    serial, _ = run_trials(cfg, workers=1)
    parallel, _ = run_trials(cfg, workers=2)
    assert serial == parallel
