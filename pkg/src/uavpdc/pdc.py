"""Pilot decontamination: GUE interference removal, UAV two-block
identification, and the genie-aided orthogonal-projection reference."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ArrayGeometry, steering_vector
from .detector import (AngularGrid, DetectionOutcome, LoSComponent,
                       successive_detection)


class PdcMethod(Enum):
    GUE_PDC = "gue_pdc"
    UAV_TWO_BLOCK = "uav_two_block"
    PERFECT_PROJECTION = "perfect_projection"
    NONE = "none"


@dataclass(frozen=True)
class MatchTolerance:
    """Relative distance below which two reconstructed LoS components are
    considered the same path across training blocks.

    A persisting path reappears on the same grid cell with the same gain (a
    per-block phase rotation is factored out), so its phase-aligned relative
    distance is near zero, while components belonging to different physical
    paths sit close to 1.  The tolerance is deliberately tight: failing to
    match a weak splinter of the own path costs a percent of its energy,
    whereas a spurious match keeps an entire interfering path."""

    epsilon_rel: float = 0.35

    def __post_init__(self):
        if not 0.0 < self.epsilon_rel < 1.0:
            raise ValueError("epsilon_rel must be in (0, 1)")


@dataclass
class DecontaminatedEstimate:
    vector: np.ndarray
    removed: list
    method: PdcMethod
    truncated: bool = False


@dataclass(frozen=True)
class DetectorConfig:
    """Parameters forwarded to successive detection."""

    grid: AngularGrid
    array: ArrayGeometry
    kappa: float = 3.0
    max_iterations: int = 16
    recompute_threshold: bool = True

    def detect(self, estimate: np.ndarray) -> DetectionOutcome:
        return successive_detection(
            estimate, self.grid, self.array, kappa=self.kappa,
            max_iterations=self.max_iterations,
            recompute_threshold=self.recompute_threshold)


def decontaminate_gue(estimate: np.ndarray, config: DetectorConfig
                      ) -> DecontaminatedEstimate:
    """GUE path: every LoS component detected in the UAV angle range is
    interference; the residual after peeling them all is the estimate."""
    outcome = config.detect(estimate)
    return DecontaminatedEstimate(vector=outcome.residual,
                                  removed=list(outcome.components),
                                  method=PdcMethod.GUE_PDC,
                                  truncated=outcome.truncated)


def apply_outcome_gue(outcome: DetectionOutcome) -> DecontaminatedEstimate:
    """Wrap an already-computed detection outcome (batched harness path)."""
    return DecontaminatedEstimate(vector=outcome.residual,
                                  removed=list(outcome.components),
                                  method=PdcMethod.GUE_PDC,
                                  truncated=outcome.truncated)


def component_distance(c1: LoSComponent, c2: LoSComponent,
                       array: ArrayGeometry) -> float:
    """Phase-aligned relative distance between two reconstructed components.

    The per-block phase rotation makes a raw Euclidean distance meaningless,
    so the comparison uses the phase-minimized distance
    sqrt(|v1|^2 + |v2|^2 - 2 |v1^H v2|) normalized by the larger norm.
    """
    n1 = abs(c1.mu) * np.sqrt(array.M)
    n2 = abs(c2.mu) * np.sqrt(array.M)
    if n1 == 0.0 and n2 == 0.0:
        return 0.0
    a1 = steering_vector(array, c1.theta, c1.phi)
    a2 = steering_vector(array, c2.theta, c2.phi)
    inner = abs(c1.mu) * abs(c2.mu) * abs(np.vdot(a1, a2))
    d_sq = max(n1 * n1 + n2 * n2 - 2.0 * inner, 0.0)
    return float(np.sqrt(d_sq) / max(n1, n2))


def match_components(D1, D2, tol: MatchTolerance, array: ArrayGeometry):
    """Pair components across two training blocks; return the block-1 members
    of matched pairs.

    Pairs greedily by smallest phase-aligned distance; each component is
    matched at most once and only below the tolerance.
    """
    pairs = []
    for i, c1 in enumerate(D1):
        for j, c2 in enumerate(D2):
            d = component_distance(c1, c2, array)
            if d < tol.epsilon_rel:
                pairs.append((d, i, j))
    pairs.sort(key=lambda t: (t[0], t[1], t[2]))
    used1, used2 = set(), set()
    matched = []
    for d, i, j in pairs:
        if i in used1 or j in used2:
            continue
        used1.add(i)
        used2.add(j)
        matched.append(D1[i])
    return matched


def decontaminate_uav(estimate_block1: np.ndarray, estimate_block2,
                      config: DetectorConfig, tol: MatchTolerance,
                      outcome_block1: DetectionOutcome | None = None,
                      outcome_block2: DetectionOutcome | None = None
                      ) -> DecontaminatedEstimate:
    """UAV path: two-training-block identification of the own LoS channel.

    Detect on block 1; with at most one component there is nothing to
    disambiguate and the block-1 estimate is kept.  Otherwise components that
    fail to reappear in block 2 (where the UAV switched to a fresh pilot) are
    interference and are removed from the block-1 estimate.

    Precomputed detection outcomes may be passed in to avoid re-detection.
    """
    est1 = np.asarray(estimate_block1, dtype=complex)
    out1 = outcome_block1 if outcome_block1 is not None else config.detect(est1)
    if out1.L <= 1:
        return DecontaminatedEstimate(vector=est1.copy(), removed=[],
                                      method=PdcMethod.UAV_TWO_BLOCK,
                                      truncated=out1.truncated)
    if outcome_block2 is not None:
        out2 = outcome_block2
    else:
        if estimate_block2 is None:
            raise ValueError("block-2 estimate required when |D| >= 2")
        out2 = config.detect(np.asarray(estimate_block2, dtype=complex))
    matched = match_components(out1.components, out2.components, tol,
                               config.array)
    if not matched:
        # nothing reappeared in block 2: no basis for identification, keep
        # the contaminated block-1 estimate rather than guessing
        return DecontaminatedEstimate(vector=est1.copy(), removed=[],
                                      method=PdcMethod.UAV_TWO_BLOCK,
                                      truncated=out1.truncated or out2.truncated)
    matched_ids = {id(c) for c in matched}
    to_remove = [c for c in out1.components if id(c) not in matched_ids]
    vec = est1.copy()
    for c in to_remove:
        vec -= c.reconstruct(config.array)
    return DecontaminatedEstimate(vector=vec, removed=to_remove,
                                  method=PdcMethod.UAV_TWO_BLOCK,
                                  truncated=out1.truncated or out2.truncated)


def perfect_pdc(estimate: np.ndarray, interferer_aoas,
                array: ArrayGeometry,
                rank_rtol: float = 1e-8) -> DecontaminatedEstimate:
    """Genie reference: project the estimate onto the orthogonal complement
    of the span of the true interferer steering vectors."""
    aoas = list(interferer_aoas)
    if len(aoas) >= array.M:
        raise ValueError("interferer count must be below M")
    if len(set((float(t), float(p)) for t, p in aoas)) != len(aoas):
        raise ValueError("interferer AoAs must be pairwise distinct")
    est = np.asarray(estimate, dtype=complex)
    if not aoas:
        return DecontaminatedEstimate(vector=est.copy(), removed=[],
                                      method=PdcMethod.PERFECT_PROJECTION)
    A = np.stack([steering_vector(array, t, p) for t, p in aoas], axis=1)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > rank_rtol * s[0]))
    if rank < A.shape[1]:
        raise ValueError("interferer steering matrix is rank deficient")
    U = U[:, :rank]
    vec = est - U @ (U.conj().T @ est)
    return DecontaminatedEstimate(vector=vec, removed=[],
                                  method=PdcMethod.PERFECT_PROJECTION)
