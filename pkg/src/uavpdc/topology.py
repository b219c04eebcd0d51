"""Multi-cell layout generation and geometry.

Only the co-pilot cells are instantiated: the tracked pilot is reused by K
cells whose centers sit on the hexagonal co-channel lattice with spacing
sqrt(3*R) * cell_radius.  Each cell serves exactly one user for the tracked
pilot; K_u of the K users are UAVs, the rest are ground users (GUEs).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

DEFAULT_BS_HEIGHT = 25.0
DEFAULT_GUE_HEIGHT = 1.5
DEFAULT_UAV_HEIGHT_RANGE = (25.0, 300.0)
MIN_HORIZONTAL_DISTANCE = 20.0  # near-field guard


class UserKind(Enum):
    UAV = "uav"
    GUE = "gue"


@dataclass(frozen=True)
class SiteGeometry:
    """One BS site: position (x, y, height) in meters and its cell index."""

    position: np.ndarray
    cell_index: int

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.position.shape != (3,):
            raise ValueError("site position must be a 3-vector")
        if self.position[2] <= 0:
            raise ValueError("BS height must be positive")


@dataclass(frozen=True)
class UserPlacement:
    """One co-pilot user: position in meters, kind, and serving cell index."""

    position: np.ndarray
    kind: UserKind
    serving_cell: int

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if self.position.shape != (3,):
            raise ValueError("user position must be a 3-vector")


@dataclass(frozen=True)
class NetworkLayout:
    sites: tuple
    users: tuple
    reuse_factor: int
    cell_radius: float
    bs_height: float = DEFAULT_BS_HEIGHT

    @property
    def n_cells(self) -> int:
        return len(self.sites)

    @property
    def uav_indices(self) -> tuple:
        return tuple(i for i, u in enumerate(self.users) if u.kind is UserKind.UAV)

    @property
    def gue_indices(self) -> tuple:
        return tuple(i for i, u in enumerate(self.users) if u.kind is UserKind.GUE)


def is_valid_reuse_factor(reuse_factor: int) -> bool:
    """Hexagonal reuse factors are the Loeschian numbers i^2 + i*j + j^2."""
    if reuse_factor < 1:
        return False
    for i in range(int(math.isqrt(reuse_factor)) + 1):
        for j in range(i, int(math.isqrt(reuse_factor)) + 1):
            if i * i + i * j + j * j == reuse_factor and (i or j):
                return True
    return False


def build_layout(cell_radius: float, reuse_factor: int, K: int,
                 bs_height: float = DEFAULT_BS_HEIGHT) -> NetworkLayout:
    """Place K co-pilot cell centers on the reuse lattice (no users yet).

    Centers are the K lattice points nearest the origin, so nearest co-pilot
    neighbors sit at the co-channel distance sqrt(3*R) * cell_radius.
    """
    if cell_radius <= 0:
        raise ValueError("cell_radius must be positive")
    if K < 2:
        raise ValueError("K >= 2 required (1 <= K_u < K is impossible otherwise)")
    if not is_valid_reuse_factor(reuse_factor):
        raise ValueError(
            f"reuse_factor={reuse_factor} is not a valid hexagonal reuse factor "
            "(must be of the form i^2 + i*j + j^2)")
    spacing = math.sqrt(3.0 * reuse_factor) * cell_radius
    # hex lattice basis scaled to the co-channel spacing
    u = np.array([spacing, 0.0])
    v = np.array([spacing / 2.0, spacing * math.sqrt(3.0) / 2.0])
    span = int(math.ceil(math.sqrt(K))) + 2
    points = []
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            p = i * u + j * v
            points.append((float(np.hypot(p[0], p[1])), i, j, p))
    points.sort(key=lambda t: (round(t[0], 9), t[1], t[2]))
    sites = tuple(
        SiteGeometry(position=np.array([p[0], p[1], bs_height]), cell_index=n)
        for n, (_, _, _, p) in enumerate(points[:K]))
    return NetworkLayout(sites=sites, users=(), reuse_factor=reuse_factor,
                         cell_radius=cell_radius, bs_height=bs_height)


def _draw_in_disc(rng: np.random.Generator, center: np.ndarray, radius: float,
                  min_distance: float) -> np.ndarray:
    while True:
        r = radius * math.sqrt(rng.uniform())
        if r < min_distance:
            continue
        ang = rng.uniform(-math.pi, math.pi)
        return center[:2] + r * np.array([math.cos(ang), math.sin(ang)])


def place_users(layout: NetworkLayout, K_u: int, rng: np.random.Generator,
                uav_height_range: tuple = DEFAULT_UAV_HEIGHT_RANGE,
                gue_height: float = DEFAULT_GUE_HEIGHT,
                min_distance: float = MIN_HORIZONTAL_DISTANCE,
                uav_cells: tuple | None = None) -> NetworkLayout:
    """Drop one user per cell: K_u UAVs at uniform heights, the rest GUEs.

    The UAV-serving cells are drawn uniformly from the K cells unless
    `uav_cells` pins them explicitly.
    """
    K = layout.n_cells
    if not 1 <= K_u < K:
        raise ValueError(f"K_u must satisfy 1 <= K_u < K, got K_u={K_u}, K={K}")
    if uav_cells is None:
        uav_cells = tuple(sorted(rng.choice(K, size=K_u, replace=False).tolist()))
    else:
        uav_cells = tuple(sorted(uav_cells))
        if len(uav_cells) != K_u:
            raise ValueError("uav_cells length must equal K_u")
    users = []
    for site in layout.sites:
        xy = _draw_in_disc(rng, site.position, layout.cell_radius, min_distance)
        if site.cell_index in uav_cells:
            h = rng.uniform(*uav_height_range)
            kind = UserKind.UAV
        else:
            h = gue_height
            kind = UserKind.GUE
        users.append(UserPlacement(position=np.array([xy[0], xy[1], h]),
                                   kind=kind, serving_cell=site.cell_index))
    return replace(layout, users=tuple(users))


def geometry_to_aoa(bs: SiteGeometry, user: UserPlacement):
    """Elevation/azimuth angle of arrival and 3-D distance of a user at a BS.

    theta is the polar angle from the upward vertical (theta=0 at zenith), so
    users above the BS land in [0, pi/2).  phi is measured from east (+x)
    toward north (+y), in (-pi, pi].
    """
    delta = user.position - bs.position
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise ValueError("user and BS positions coincide")
    theta = math.acos(np.clip(delta[2] / dist, -1.0, 1.0))
    phi = math.atan2(delta[1], delta[0])
    return theta, phi, dist


def dump_layout_csv(layout: NetworkLayout, path) -> None:
    """Write sites and users to CSV for inspection."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["entity", "id", "x", "y", "z", "kind", "serving_cell"])
        for s in layout.sites:
            w.writerow(["site", s.cell_index, f"{s.position[0]:.6f}",
                        f"{s.position[1]:.6f}", f"{s.position[2]:.6f}", "", ""])
        for i, u in enumerate(layout.users):
            w.writerow(["user", i, f"{u.position[0]:.6f}", f"{u.position[1]:.6f}",
                        f"{u.position[2]:.6f}", u.kind.value, u.serving_cell])
