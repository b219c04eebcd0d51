"""Successive LoS-component detection on the matched-filter angular spectrum.

The search grid covers the above-horizon range (elevation [0, pi/2), azimuth
[-pi, pi)).  Detection compares the strongest spectrum cell against
kappa times the average cell of the *initial* spectrum; components are peeled
off one at a time, each removal being the least-squares fit onto the detected
steering vector.

The detection threshold is recomputed from the current residual's spectrum
each round by default, so it adapts downward as strong components are peeled
and weak ones buried under them become detectable.  The price is that the
loop does not terminate on its own on diffuse residuals (the max/mean ratio
of the spectrum of an isotropic vector stays well above typical kappa), so
`max_iterations` is a real stopping rule there, not just a safety net;
`recompute_threshold=False` freezes the threshold at its first-round value,
which terminates cleanly but can only find components above kappa times the
*initial* average power.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, beamwidths, steering_vector


@dataclass(frozen=True)
class AngularGrid:
    """Quantized search grid over elevation [0, pi/2) x azimuth [-pi, pi).

    Azimuth points span the full circle with spacing 2*pi/n_phi (a grid
    stopping short of positive azimuths would leave half the sky
    unsearchable, making detection of arbitrarily placed interferers
    impossible)."""

    n_theta: int = 64
    n_phi: int = 128

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("grid sizes must be positive")

    @property
    def theta_points(self) -> np.ndarray:
        return np.arange(self.n_theta) * np.pi / (2.0 * self.n_theta)

    @property
    def phi_points(self) -> np.ndarray:
        return np.arange(self.n_phi) * 2.0 * np.pi / self.n_phi - np.pi

    @property
    def n_cells(self) -> int:
        return self.n_theta * self.n_phi

    def cache_key(self) -> tuple:
        return (self.n_theta, self.n_phi)


def check_grid_spacing(grid: AngularGrid, array: ArrayGeometry) -> None:
    """Grid spacing must be finer than the array's 3-dB beamwidths."""
    th_bw, ph_bw = beamwidths(array)
    if np.pi / (2.0 * grid.n_theta) >= th_bw:
        raise ValueError(
            f"theta spacing {np.pi / (2 * grid.n_theta):.4f} rad not finer than "
            f"3-dB beamwidth {th_bw:.4f} rad")
    if 2.0 * np.pi / grid.n_phi >= ph_bw:
        raise ValueError(
            f"phi spacing {2.0 * np.pi / grid.n_phi:.4f} rad not finer than "
            f"3-dB beamwidth {ph_bw:.4f} rad")


@dataclass(frozen=True)
class LoSComponent:
    """One detected LoS path: grid angles, fitted complex gain and the
    matched-filter peak that triggered it."""

    theta: float
    phi: float
    mu: complex
    peak_value: float

    def reconstruct(self, array: ArrayGeometry) -> np.ndarray:
        return self.mu * steering_vector(array, self.theta, self.phi)


@dataclass
class DetectionOutcome:
    components: list
    residual: np.ndarray
    truncated: bool = False

    @property
    def L(self) -> int:
        return len(self.components)


class GridSteeringTable:
    """Precomputed (conjugated) steering vectors for every grid cell.

    The complex64 copy feeds the hot matched-filter GEMM; exact complex128
    steering vectors are recomputed per detected cell for the gain fit.
    """

    def __init__(self, array: ArrayGeometry, grid: AngularGrid):
        self.array = array
        self.grid = grid
        th, ph = np.meshgrid(grid.theta_points, grid.phi_points, indexing="ij")
        self.cell_thetas = th.ravel()
        self.cell_phis = ph.ravel()
        a = steering_vector(array, th, ph).reshape(grid.n_cells, array.M)
        self.mf128 = a.conj()
        self.mf64 = self.mf128.astype(np.complex64)


_TABLE_CACHE: dict = {}


def get_grid_table(array: ArrayGeometry, grid: AngularGrid) -> GridSteeringTable:
    key = (array.cache_key(), grid.cache_key())
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        tab = GridSteeringTable(array, grid)
        if len(_TABLE_CACHE) > 4:
            _TABLE_CACHE.clear()
        _TABLE_CACHE[key] = tab
    return tab


def matched_filter_spectrum(estimate: np.ndarray, grid: AngularGrid,
                            array: ArrayGeometry) -> np.ndarray:
    """(1/M) |a^H(theta, phi) h|^2 over the grid, shape (n_theta, n_phi)."""
    est = np.asarray(estimate)
    if est.shape != (array.M,):
        raise ValueError(f"estimate must have length M={array.M}")
    tab = get_grid_table(array, grid)
    s = tab.mf128 @ est
    return (np.abs(s) ** 2 / array.M).reshape(grid.n_theta, grid.n_phi)


def detection_threshold(spectrum: np.ndarray, kappa: float) -> float:
    """kappa times the arithmetic mean over all spectrum cells."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return float(kappa * np.mean(spectrum))


def fit_los_gain(estimate: np.ndarray, steering: np.ndarray) -> complex:
    """Least-squares gain of a steering vector in an estimate: a^H h / M."""
    steering = np.asarray(steering)
    M = steering.shape[-1]
    return complex(np.vdot(steering, estimate) / M)


def successive_detection_batch(estimates: np.ndarray, grid: AngularGrid,
                               array: ArrayGeometry, kappa: float = 3.0,
                               max_iterations: int = 16,
                               recompute_threshold: bool = True):
    """Run successive detection on each row of `estimates` (shape (B, M)).

    Returns one DetectionOutcome per row.  Batching exists purely for speed:
    each row's result is independent of the other rows.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if max_iterations < 1:
        raise ValueError("max_iterations >= 1 required")
    est = np.atleast_2d(np.asarray(estimates))
    B, M = est.shape
    if M != array.M:
        raise ValueError(f"estimates must have length M={array.M}")
    tab = get_grid_table(array, grid)
    residual = est.astype(np.complex128).copy()
    components = [[] for _ in range(B)]
    truncated = np.zeros(B, dtype=bool)
    active = np.arange(B)
    zeta0 = np.empty(B)
    for it in range(max_iterations):
        S = tab.mf64 @ residual[active].T.astype(np.complex64)
        T = np.square(S.real)
        T += np.square(S.imag)
        T /= np.float32(M)
        means = T.mean(axis=0, dtype=np.float64)
        peak_cells = T.argmax(axis=0)
        peaks = T[peak_cells, np.arange(active.size)]
        if it == 0:
            zeta0[active] = kappa * means
        zeta = kappa * means if recompute_threshold else zeta0[active]
        hit = peaks > zeta
        if np.any(hit):
            rows = active[hit]
            cells = peak_cells[hit]
            th = tab.cell_thetas[cells]
            ph = tab.cell_phis[cells]
            a = steering_vector(array, th, ph)
            mu = np.einsum("ij,ij->i", a.conj(), residual[rows]) / M
            residual[rows] -= mu[:, None] * a
            for r, t, p, m_, pk in zip(rows, th, ph, mu, peaks[hit]):
                components[r].append(
                    LoSComponent(theta=float(t), phi=float(p), mu=complex(m_),
                                 peak_value=float(pk)))
        active = active[hit]
        if active.size == 0:
            break
    else:
        truncated[active] = True
    return [DetectionOutcome(components=components[b], residual=residual[b],
                             truncated=bool(truncated[b])) for b in range(B)]


def successive_detection(estimate: np.ndarray, grid: AngularGrid,
                         array: ArrayGeometry, kappa: float = 3.0,
                         max_iterations: int = 16,
                         recompute_threshold: bool = True) -> DetectionOutcome:
    """Successive detection of one channel estimate (batch of one)."""
    return successive_detection_batch(
        np.asarray(estimate)[None, :], grid, array, kappa=kappa,
        max_iterations=max_iterations,
        recompute_threshold=recompute_threshold)[0]


def dump_spectrum_csv(spectrum: np.ndarray, grid: AngularGrid, path) -> None:
    """Debug dump: one row per grid cell (theta, phi, value)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "phi", "value"])
        for i, th in enumerate(grid.theta_points):
            for j, ph in enumerate(grid.phi_points):
                w.writerow([f"{th:.8f}", f"{ph:.8f}", f"{spectrum[i, j]:.10e}"])
