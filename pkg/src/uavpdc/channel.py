"""UCA steering vectors, LoS / Rayleigh channel synthesis and path loss."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_CARRIER_HZ = 2.0e9


class LinkType(Enum):
    LOS = "los"
    NLOS = "nlos"


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform circular array: M antennas on a circle of radius `radius`."""

    M: int
    radius: float
    wavelength: float

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M >= 2 required")
        if self.radius <= 0 or self.wavelength <= 0:
            raise ValueError("radius and wavelength must be positive")

    @property
    def antenna_angles(self) -> np.ndarray:
        """Angular location of each antenna on the circle, 2*pi*(m-1)/M."""
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @property
    def phase_scale(self) -> float:
        """2*pi*radius / wavelength, the steering-vector phase factor."""
        return 2.0 * np.pi * self.radius / self.wavelength

    def cache_key(self) -> tuple:
        return (self.M, self.radius, self.wavelength)


def uca_halfwavelength(M: int, carrier_hz: float = DEFAULT_CARRIER_HZ) -> ArrayGeometry:
    """Default array: radius M*lambda/(4*pi), i.e. half-wavelength spacing
    along the circumference."""
    lam = SPEED_OF_LIGHT / carrier_hz
    return ArrayGeometry(M=M, radius=M * lam / (4.0 * np.pi), wavelength=lam)


def steering_vector(array: ArrayGeometry, theta, phi) -> np.ndarray:
    """UCA array response for elevation theta and azimuth phi.

    Element m is exp(-j * (2*pi*d/lambda) * sin(theta) * cos(phi - gamma_m)).
    theta and phi broadcast; the output has shape broadcast(theta, phi) + (M,).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    gamma = array.antenna_angles
    arg = (array.phase_scale * np.sin(theta)[..., None]
           * np.cos(phi[..., None] - gamma))
    return np.exp(-1j * arg)


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path-loss model, configurable; beta is noise-free linear
    gain relative to the reference distance."""

    d0: float = 1.0
    pl0: float = 1.42e-4          # free-space gain at 1 m, 2 GHz
    alpha_los: float = 2.2
    alpha_nlos: float = 3.7
    shadowing_sigma_db: float = 8.0   # log-normal, NLoS links only


@dataclass(frozen=True)
class LargeScaleFading:
    beta: float
    link_type: LinkType

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


def path_loss(distance: float, link_type: LinkType,
              params: PathLossParams = PathLossParams(),
              rng: np.random.Generator | None = None,
              noise_scale: float = 1.0) -> LargeScaleFading:
    """Distance-law gain; NLoS links optionally draw log-normal shadowing.

    `noise_scale` divides the raw gain to express beta in noise-normalized
    units (see the harness link budget).
    """
    if distance < params.d0:
        raise ValueError(f"distance {distance} below reference distance {params.d0}")
    alpha = params.alpha_los if link_type is LinkType.LOS else params.alpha_nlos
    beta = params.pl0 * (distance / params.d0) ** (-alpha)
    if link_type is LinkType.NLOS and rng is not None and params.shadowing_sigma_db > 0:
        beta *= 10.0 ** (rng.normal(0.0, params.shadowing_sigma_db) / 10.0)
    return LargeScaleFading(beta=beta / noise_scale, link_type=link_type)


def gen_uav_channel(array: ArrayGeometry, beta: float, theta, phi,
                    rng: np.random.Generator) -> np.ndarray:
    """LoS channel sqrt(beta) * exp(j*psi) * a(theta, phi), psi uniform.

    theta/phi may be arrays; one independent phase is drawn per direction.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    a = steering_vector(array, theta, phi)
    psi = rng.uniform(0.0, 2.0 * np.pi, size=a.shape[:-1])
    return math.sqrt(beta) * np.exp(1j * psi)[..., None] * a


def gen_gue_channel(M: int, beta: float, rng: np.random.Generator,
                    size=()) -> np.ndarray:
    """Rayleigh channel: i.i.d. CN(0, beta) entries, shape size + (M,)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    shape = (size,) if isinstance(size, int) else tuple(size)
    z = rng.standard_normal(shape + (M, 2))
    return math.sqrt(beta / 2.0) * (z[..., 0] + 1j * z[..., 1])


def beamwidths(array: ArrayGeometry, theta0: float = np.pi / 4,
               phi0: float = 0.0) -> tuple[float, float]:
    """Numerically estimated full 3-dB beamwidths (theta, phi) at a boresight.

    Scans the normalized power response |a0^H a|^2 / M^2 away from
    (theta0, phi0) until it first drops below one half, in each direction.
    """
    a0 = steering_vector(array, theta0, phi0)

    def width(axis):
        lo = 0.0
        hi = None
        for step in np.linspace(1e-4, np.pi / 2, 4000):
            if axis == "theta":
                a = steering_vector(array, theta0 + step, phi0)
            else:
                a = steering_vector(array, theta0, phi0 + step)
            p = abs(np.vdot(a0, a)) ** 2 / array.M**2
            if p < 0.5:
                hi = step
                break
            lo = step
        if hi is None:
            return np.pi
        return lo + (hi - lo) / 2.0

    # symmetric mainlobe: full width is twice the half-power offset
    return 2.0 * width("theta"), 2.0 * width("phi")
