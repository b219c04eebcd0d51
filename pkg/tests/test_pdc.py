import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cn
from uavpdc.channel import steering_vector, uca_halfwavelength
from uavpdc.detector import AngularGrid, LoSComponent
from uavpdc.pdc import (DetectorConfig, MatchTolerance, PdcMethod,
                        component_distance, decontaminate_gue,
                        decontaminate_uav, match_components, perfect_pdc)


@pytest.fixture(scope="module")
def config():
    return DetectorConfig(grid=AngularGrid(), array=uca_halfwavelength(128),
                          kappa=3.0, max_iterations=12)


def comp(grid, i, j, mu):
    return LoSComponent(theta=float(grid.theta_points[i]),
                        phi=float(grid.phi_points[j]), mu=mu, peak_value=1.0)


def test_match_tolerance_validation():
    with pytest.raises(ValueError):
        MatchTolerance(0.0)
    with pytest.raises(ValueError):
        MatchTolerance(1.0)


def test_component_distance_phase_invariant(config):
    """A per-block phase rotation of the gain must not affect the distance."""
    grid = config.grid
    c1 = comp(grid, 20, 30, 0.7 + 0.1j)
    c2 = comp(grid, 20, 30, (0.7 + 0.1j) * np.exp(1j * 2.1))
    assert component_distance(c1, c2, config.array) < 1e-6
    assert component_distance(c1, c1, config.array) == pytest.approx(0.0, abs=1e-6)


def test_component_distance_separates_cells(config):
    grid = config.grid
    c1 = comp(grid, 20, 30, 1.0)
    c2 = comp(grid, 40, 90, 1.0)
    assert component_distance(c1, c2, config.array) > 0.9


@given(st.floats(0.1, 2.0), st.floats(0.1, 2.0))
@settings(max_examples=30, deadline=None)
def test_component_distance_symmetric(m1, m2):
    array = uca_halfwavelength(64)
    grid = AngularGrid(32, 64)
    c1 = comp(grid, 10, 5, m1)
    c2 = comp(grid, 12, 40, m2 * 1j)
    d12 = component_distance(c1, c2, array)
    d21 = component_distance(c2, c1, array)
    assert d12 == pytest.approx(d21)
    assert 0.0 <= d12 <= 2.0


def test_match_components_each_used_once(config):
    grid = config.grid
    tol = MatchTolerance(0.35)
    own = comp(grid, 20, 30, 1.0)
    d1 = [own, comp(grid, 50, 100, 0.5)]
    # block 2 offers two near-copies of the own cell; only one may pair
    d2 = [comp(grid, 20, 30, 1.0j), comp(grid, 20, 30, 0.98j)]
    matched = match_components(d1, d2, tol, config.array)
    assert matched == [own]


def test_match_components_prefers_closest(config):
    grid = config.grid
    tol = MatchTolerance(0.35)
    a = comp(grid, 20, 30, 1.0)
    b = comp(grid, 20, 30, 0.8)
    d2 = [comp(grid, 20, 30, 0.82j)]
    # b is the better gain match and must win the single block-2 slot
    assert match_components([a, b], d2, tol, config.array) == [b]


def test_uav_single_component_keeps_block1(config):
    """Exactly one detectable component: nothing to disambiguate, block 2 is
    not even consulted.  On-grid and noise-free so the peel terminates with
    a single detection."""
    grid = config.grid
    est = 2.0 * steering_vector(config.array, grid.theta_points[30],
                                grid.phi_points[40])
    dec = decontaminate_uav(est, None, config, MatchTolerance())
    assert dec.method is PdcMethod.UAV_TWO_BLOCK
    assert dec.removed == []
    np.testing.assert_allclose(dec.vector, est)


def test_uav_two_block_removes_fresh_interferers(config, rng):
    """Planted oracle: own path in both blocks, interferers swapped out in
    block 2 -> exactly the interferers are removed and the own term kept."""
    array = config.array
    own = (0.7, 0.2)
    ia = [(1.1, -2.0), (0.4, 1.9)]
    ib = [(1.3, 2.8), (0.25, -0.9)]

    def block(intf):
        v = np.exp(1j * rng.uniform(0, 2 * np.pi)) * steering_vector(array, *own)
        for aoa in intf:
            v = v + 0.8 * np.exp(1j * rng.uniform(0, 2 * np.pi)) \
                * steering_vector(array, *aoa)
        return v + cn(rng, (128,), 1e-6)

    e1, e2 = block(ia), block(ib)
    dec = decontaminate_uav(e1, e2, config, MatchTolerance())
    assert len(dec.removed) >= 2
    true_h = np.exp(1j * np.angle(np.vdot(steering_vector(array, *own), e1))) \
        * steering_vector(array, *own)
    # own term survives nearly intact, interferers are gone
    assert abs(np.vdot(steering_vector(array, *own), dec.vector)) / 128 == \
        pytest.approx(1.0, abs=0.1)
    for aoa in ia:
        assert abs(np.vdot(steering_vector(array, *aoa), dec.vector)) / 128 < 0.25
    del true_h


def test_uav_empty_match_keeps_block1(config, rng):
    """If nothing reappears in block 2 there is no basis for identification
    and the contaminated estimate is returned unchanged."""
    e1 = (steering_vector(config.array, 0.5, 0.5)
          + 0.9 * steering_vector(config.array, 1.2, -1.5)
          + cn(rng, (128,), 1e-6))
    e2 = (steering_vector(config.array, 0.9, 2.5)
          + 0.9 * steering_vector(config.array, 0.3, -0.5)
          + cn(rng, (128,), 1e-6))
    dec = decontaminate_uav(e1, e2, config, MatchTolerance())
    assert dec.removed == []
    np.testing.assert_allclose(dec.vector, e1)


def test_uav_requires_block2_when_ambiguous(config, rng):
    e1 = (steering_vector(config.array, 0.5, 0.5)
          + steering_vector(config.array, 1.2, -1.5))
    with pytest.raises(ValueError):
        decontaminate_uav(e1, None, config, MatchTolerance())


def test_gue_removes_planted_interferers(rng):
    """Rayleigh own channel plus two strong on-grid LoS interferers:
    everything detected goes, and what remains is close to own + noise.

    A frozen threshold stops the peel once the interferers are gone, and the
    removal's own-channel leakage floor of sqrt(removals / M) forces a
    larger array than the default desk scale for the 10% error budget."""
    M = 512
    array = uca_halfwavelength(M)
    grid = AngularGrid(128, 256)
    config = DetectorConfig(grid=grid, array=array, kappa=3.0,
                            max_iterations=12, recompute_threshold=False)
    h = cn(rng, (M,))
    noise = cn(rng, (M,), 1e-4)
    est = h + noise
    for i, j in ((40, 70), (100, 200)):
        est = est + 1.5 * np.exp(1j * rng.uniform(0, 2 * np.pi)) \
            * steering_vector(array, grid.theta_points[i], grid.phi_points[j])
    dec = decontaminate_gue(est, config)
    assert dec.method is PdcMethod.GUE_PDC
    assert len(dec.removed) >= 2
    assert np.linalg.norm(dec.vector - h - noise) / np.linalg.norm(h) < 0.1


def test_gue_clean_channel_untouched(rng):
    """With the detection constant above the spectrum's natural max/mean
    ratio (~8.5 at M=128 for an isotropic vector), a clean Rayleigh channel
    passes through with nothing detected."""
    array = uca_halfwavelength(128)
    config = DetectorConfig(grid=AngularGrid(), array=array, kappa=12.0,
                            max_iterations=12)
    h = cn(rng, (128,))
    dec = decontaminate_gue(h, config)
    assert dec.removed == []
    np.testing.assert_allclose(dec.vector, h)


def test_perfect_pdc_nulls_and_idempotent(rng):
    array = uca_halfwavelength(128)
    aoas = [(0.7, 0.1), (1.1, -2.0), (0.3, 2.4)]
    v = cn(rng, (128,))
    out = perfect_pdc(v, aoas, array)
    for aoa in aoas:
        a = steering_vector(array, *aoa)
        assert abs(np.vdot(a, out.vector)) < 1e-8 * 128
    again = perfect_pdc(out.vector, aoas, array)
    np.testing.assert_allclose(again.vector, out.vector, atol=1e-10)
    # empty interferer list is the identity
    np.testing.assert_allclose(perfect_pdc(v, [], array).vector, v)


def test_perfect_pdc_validation(rng):
    array = uca_halfwavelength(16)
    v = cn(rng, (16,))
    with pytest.raises(ValueError):
        perfect_pdc(v, [(0.5, 0.5), (0.5, 0.5)], array)
    with pytest.raises(ValueError):
        perfect_pdc(v, [(0.1 * i, 0.0) for i in range(16)], array)
