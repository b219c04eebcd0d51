"""Uplink MRC and downlink conjugate-precoding SINRs, with the closed-form
asymptotic values used as oracles."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .topology import UserKind
from .training import PilotConfig, estimate_norm_sq_asymptote


class Direction(Enum):
    UL = "ul"
    DL = "dl"


class Scheme(Enum):
    BEFORE = "before"
    AFTER = "after"
    PERFECT = "perfect"
    TRUE_CSI = "true_csi"


class InterferenceFreeRegime(Exception):
    """Raised where the high-SNR table has no finite entry (no interferers)."""


@dataclass(frozen=True)
class PowerBudget:
    """Energy constants (noise-normalized, linear); the per-transmission
    powers are E/M so total radiated energy stays fixed as M grows."""

    E_u: float
    E_d: float
    M: int

    def __post_init__(self):
        if self.E_u <= 0 or self.E_d <= 0:
            raise ValueError("energy constants must be positive")
        if self.M < 1:
            raise ValueError("M >= 1 required")

    @property
    def p_u(self) -> float:
        return self.E_u / self.M

    @property
    def p_d(self) -> float:
        return self.E_d / self.M


@dataclass(frozen=True)
class SinrSample:
    value: float
    user_kind: UserKind | None = None
    direction: Direction | None = None
    scheme: Scheme | None = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("SINR must be nonnegative")

    @property
    def db(self) -> float:
        return 10.0 * np.log10(self.value)


def _norm_sq_over_m(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real) / v.shape[-1]


def uplink_sinr(estimate_used: np.ndarray, true_own: np.ndarray,
                true_interferers, budget: PowerBudget,
                user_kind: UserKind | None = None,
                scheme: Scheme | None = None) -> SinrSample:
    """Receive SINR of normalized MRC with the supplied combining estimate."""
    est = np.asarray(estimate_used)
    M = est.shape[-1]
    eta_sq = _norm_sq_over_m(est)
    if eta_sq == 0.0:
        raise ValueError("combining estimate is zero")
    signal = budget.E_u / eta_sq * abs(np.vdot(est, true_own) / M) ** 2
    interference = sum(
        budget.E_u / eta_sq * abs(np.vdot(est, h) / M) ** 2
        for h in true_interferers)
    return SinrSample(value=signal / (interference + 1.0), user_kind=user_kind,
                      direction=Direction.UL, scheme=scheme)


def downlink_sinr_uav(true_channels_to_uav, precoding_estimates,
                      budget: PowerBudget, serving: int,
                      scheme: Scheme | None = None) -> SinrSample:
    """Downlink SINR of a UAV under conjugate precoding at every BS.

    `true_channels_to_uav[l]` is the channel from the UAV to BS l and
    `precoding_estimates[l]` the estimate BS l precodes with; `serving` is
    the index of the BS serving this UAV.
    """
    channels = [np.asarray(h) for h in true_channels_to_uav]
    estimates = [np.asarray(h) for h in precoding_estimates]
    if len(channels) != len(estimates):
        raise ValueError("channel and precoder lists must be aligned")
    M = channels[0].shape[-1]
    eta_sqs = [_norm_sq_over_m(e) for e in estimates]
    if any(e == 0.0 for e in eta_sqs):
        raise ValueError("a precoding estimate is zero")
    signal = (budget.E_d / eta_sqs[serving]
              * abs(np.vdot(channels[serving], estimates[serving]) / M) ** 2)
    interference = sum(
        budget.E_d / eta_sqs[l] * abs(np.vdot(channels[l], estimates[l]) / M) ** 2
        for l in range(len(channels)) if l != serving)
    return SinrSample(value=signal / (interference + 1.0),
                      user_kind=UserKind.UAV, direction=Direction.DL,
                      scheme=scheme)


def downlink_sinr_gue(true_own: np.ndarray, precoding_estimate: np.ndarray,
                      budget: PowerBudget, interference: float = 0.0,
                      scheme: Scheme | None = None) -> SinrSample:
    """Downlink SINR of a GUE; non-serving BSs are far enough apart that the
    model carries no inter-cell interference term (an explicit value may be
    injected for sensitivity studies)."""
    est = np.asarray(precoding_estimate)
    M = est.shape[-1]
    eta_sq = _norm_sq_over_m(est)
    if eta_sq == 0.0:
        raise ValueError("precoding estimate is zero")
    signal = budget.E_d / eta_sq * abs(np.vdot(true_own, est) / M) ** 2
    return SinrSample(value=signal / (interference + 1.0),
                      user_kind=UserKind.GUE, direction=Direction.DL,
                      scheme=scheme)


@dataclass(frozen=True)
class AsymptoticBetas:
    """Large-scale inputs for the closed-form SINR limits.

    own: beta of the serving link.
    uplink_interferers: betas of the co-pilot UAV interferers at the serving
        BS (defines the estimate's asymptotic energy).
    downlink_cross: per non-serving BS l, (beta of the link from that BS to
        this user, asymptotic estimate energy eta_l_inf_sq of that BS).
    """

    own: float
    uplink_interferers: tuple = ()
    downlink_cross: tuple = ()


def asymptotic_sinr(scheme: Scheme, direction: Direction, user_kind: UserKind,
                    betas: AsymptoticBetas, budget: PowerBudget,
                    pilot: PilotConfig) -> float:
    """Closed-form M -> infinity SINR for the selected scheme/direction."""
    if betas.own <= 0:
        raise ValueError("own beta required")
    if scheme in (Scheme.AFTER, Scheme.PERFECT):
        eta_hat_sq = betas.own + pilot.noise_var
        e = budget.E_u if direction is Direction.UL else budget.E_d
        return e * betas.own**2 / eta_hat_sq
    if scheme is not Scheme.BEFORE:
        raise ValueError(f"no closed-form limit for scheme {scheme}")
    eta_sq = estimate_norm_sq_asymptote(
        betas.own, betas.uplink_interferers, pilot)
    if direction is Direction.UL:
        signal = budget.E_u * betas.own**2 / eta_sq
        interference = sum(budget.E_u * b**2 / eta_sq
                           for b in betas.uplink_interferers)
        return signal / (interference + 1.0)
    if user_kind is UserKind.GUE:
        return budget.E_d * betas.own**2 / eta_sq
    if not betas.downlink_cross:
        raise ValueError("downlink UAV limit needs per-BS cross terms")
    signal = budget.E_d * betas.own**2 / eta_sq
    interference = sum(budget.E_d * b**2 / eta_l_sq
                       for b, eta_l_sq in betas.downlink_cross)
    return signal / (interference + 1.0)


def table1_high_snr(user_kind: UserKind, direction: Direction, scheme: Scheme,
                    K: int, K_u: int, beta: float,
                    budget: PowerBudget) -> float:
    """High-SNR limiting SINR under the equal-beta assumption (linear)."""
    if K_u < 1 or K_u >= K:
        raise ValueError("1 <= K_u < K required")
    if scheme is Scheme.AFTER:
        e = budget.E_u if direction is Direction.UL else budget.E_d
        return e * beta
    if scheme is not Scheme.BEFORE:
        raise ValueError("high-SNR table covers Before and After only")
    if direction is Direction.UL:
        if user_kind is UserKind.UAV:
            if K_u == 1:
                raise InterferenceFreeRegime(
                    "a lone UAV has no co-pilot UAV interferers in the uplink")
            return 1.0 / (K_u - 1)
        return 1.0 / K_u
    if user_kind is UserKind.UAV:
        return 1.0 / (K - 1)
    return budget.E_d * beta / (K_u + 1)
