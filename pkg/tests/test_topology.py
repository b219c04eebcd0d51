import math

import numpy as np
import pytest

from uavpdc.topology import (UserKind, build_layout, geometry_to_aoa,
                             is_valid_reuse_factor, place_users)


def test_reuse_factor_validity():
    valid = {1, 3, 4, 7, 9, 12, 13, 16, 19, 21}
    for n in range(1, 22):
        assert is_valid_reuse_factor(n) == (n in valid), n
    assert not is_valid_reuse_factor(0)
    assert not is_valid_reuse_factor(-7)


def test_build_layout_cochannel_spacing():
    layout = build_layout(cell_radius=500.0, reuse_factor=7, K=9)
    assert layout.n_cells == 9
    spacing = math.sqrt(21) * 500.0
    pos = np.array([s.position[:2] for s in layout.sites])
    # nearest co-pilot neighbor of every site sits at the lattice spacing
    for i in range(9):
        d = np.linalg.norm(pos - pos[i], axis=1)
        d[i] = np.inf
        assert d.min() == pytest.approx(spacing, rel=1e-9)


def test_build_layout_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_layout(500.0, reuse_factor=5, K=9)  # 5 is not Loeschian
    with pytest.raises(ValueError):
        build_layout(500.0, reuse_factor=7, K=1)
    with pytest.raises(ValueError):
        build_layout(-1.0, reuse_factor=7, K=9)


def test_place_users_counts_and_heights(rng):
    layout = build_layout(500.0, 7, 9)
    layout = place_users(layout, K_u=3, rng=rng)
    assert len(layout.users) == 9
    assert len(layout.uav_indices) == 3
    assert len(layout.gue_indices) == 6
    for i, u in enumerate(layout.users):
        assert u.serving_cell == i
        xy = u.position[:2] - layout.sites[i].position[:2]
        assert 20.0 <= np.linalg.norm(xy) <= 500.0
        if u.kind is UserKind.UAV:
            assert 25.0 <= u.position[2] <= 300.0
        else:
            assert u.position[2] == pytest.approx(1.5)


def test_place_users_pinned_uav_cells(rng):
    layout = build_layout(500.0, 7, 9)
    layout = place_users(layout, K_u=2, rng=rng, uav_cells=(1, 4))
    assert layout.uav_indices == (1, 4)


def test_place_users_rejects_bad_ku(rng):
    layout = build_layout(500.0, 7, 9)
    for ku in (0, 9, 12):
        with pytest.raises(ValueError):
            place_users(layout, K_u=ku, rng=rng)


def test_geometry_to_aoa_ranges(rng):
    layout = build_layout(500.0, 7, 9)
    layout = place_users(layout, K_u=3, rng=rng)
    for site in layout.sites:
        for user in layout.users:
            th, ph, dist = geometry_to_aoa(site, user)
            assert dist > 0
            assert 0.0 <= th <= math.pi
            assert -math.pi <= ph <= math.pi
            if user.kind is UserKind.GUE:
                assert th > math.pi / 2  # ground users sit below the BS


def test_geometry_to_aoa_known_direction():
    layout = build_layout(500.0, 7, 2)
    site = layout.sites[0]
    from uavpdc.topology import UserPlacement
    # user 100 m east, 100*sqrt(3) m above the BS -> theta=30 deg, phi=0
    user = UserPlacement(
        position=site.position + np.array([100.0, 0.0, 100.0 * math.sqrt(3)]),
        kind=UserKind.UAV, serving_cell=0)
    th, ph, dist = geometry_to_aoa(site, user)
    assert th == pytest.approx(math.pi / 6)
    assert ph == pytest.approx(0.0)
    assert dist == pytest.approx(200.0)
