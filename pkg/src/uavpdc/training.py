"""Uplink pilot training: contaminated LS channel estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PilotConfig:
    """Pilot length tau and per-symbol pilot power (noise-normalized linear).

    Only the product tau * p_p matters for the estimate statistics; p_p may be
    math.inf to disable estimation noise entirely.
    """

    tau: int = 1
    p_p: float = 1.0

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau >= 1 required")
        if not self.p_p > 0:
            raise ValueError("p_p must be positive")

    @property
    def tau_pp(self) -> float:
        return self.tau * self.p_p

    @property
    def noise_var(self) -> float:
        """Per-entry variance of the post-correlation estimation noise."""
        return 0.0 if math.isinf(self.tau_pp) else 1.0 / self.tau_pp

    @classmethod
    def from_tau_pp(cls, tau_pp: float) -> "PilotConfig":
        return cls(tau=1, p_p=tau_pp)


@dataclass(frozen=True)
class LsEstimate:
    vector: np.ndarray
    owner_bs: int = 0
    block_index: int = 0


def estimation_noise(M: int, pilot: PilotConfig, rng: np.random.Generator,
                     size=()) -> np.ndarray:
    """Post-correlation noise: i.i.d. CN(0, 1/(tau*p_p)) entries."""
    shape = ((size,) if isinstance(size, int) else tuple(size)) + (M, 2)
    if pilot.noise_var == 0.0:
        return np.zeros(shape[:-1], dtype=complex)
    z = rng.standard_normal(shape)
    return math.sqrt(pilot.noise_var / 2.0) * (z[..., 0] + 1j * z[..., 1])


def ls_estimate(own_channel: np.ndarray, interferer_channels,
                pilot: PilotConfig, rng: np.random.Generator,
                owner_bs: int = 0, block_index: int = 0) -> LsEstimate:
    """Contaminated LS estimate: own channel + co-pilot interferers + noise.

    The pilot sequence is never materialized; since psi0^H psi0 = 1 the
    post-correlation form is generated directly (see ls_estimate_via_pilot_block
    for the equivalence check).
    """
    own = np.asarray(own_channel)
    M = own.shape[-1]
    total = own.astype(complex).copy()
    for h in interferer_channels:
        h = np.asarray(h)
        if h.shape[-1] != M:
            raise ValueError("interferer channel length mismatch")
        total = total + h
    total = total + estimation_noise(M, pilot, rng)
    return LsEstimate(vector=total, owner_bs=owner_bs, block_index=block_index)


def ls_estimate_via_pilot_block(own_channel: np.ndarray, interferer_channels,
                                pilot: PilotConfig, rng: np.random.Generator
                                ) -> np.ndarray:
    """Debug path: materialize the received pilot block and correlate.

    Builds Y = sqrt(tau*p_p) * (sum of channels) psi0^T + N and returns
    Y psi0^* / sqrt(tau*p_p).  Statistically identical to ls_estimate; used
    only for the equivalence test.
    """
    if math.isinf(pilot.tau_pp):
        raise ValueError("pilot-block synthesis requires finite tau * p_p")
    own = np.asarray(own_channel)
    M = own.shape[-1]
    tau = pilot.tau
    k = np.arange(tau)
    psi0 = np.exp(2j * np.pi * k * 0.37) / math.sqrt(tau)  # any unit-norm sequence
    total = own.astype(complex).copy()
    for h in interferer_channels:
        total = total + np.asarray(h)
    z = rng.standard_normal((M, tau, 2))
    noise_block = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)
    Y = math.sqrt(pilot.tau_pp) * np.outer(total, psi0) + noise_block
    return (Y @ psi0.conj()) / math.sqrt(pilot.tau_pp)


def estimate_norm_sq_asymptote(beta_own: float, betas_interferers,
                               pilot: PilotConfig) -> float:
    """Large-M limit of ||h_hat||^2 / M: own beta + interferer betas + noise."""
    betas = list(betas_interferers)
    if beta_own <= 0 or any(b <= 0 for b in betas):
        raise ValueError("betas must be positive")
    return beta_own + sum(betas) + pilot.noise_var
