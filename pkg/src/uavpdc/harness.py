"""Monte Carlo driver: scenario configuration, trial engine, CDF and report
generation, CSV export.

Reproducibility contract: trial t draws from the substream seeded by
(seed, t), so results are identical regardless of execution order or worker
count.  Detection is batched over fixed-size trial blocks for speed; block
boundaries depend only on the configured block size, never on the worker
count.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from dataclasses import dataclass, replace

import numpy as np
import yaml

from . import pdc as pdc_mod
from .channel import (ArrayGeometry, LinkType, PathLossParams, gen_gue_channel,
                      path_loss, steering_vector, uca_halfwavelength)
from .detector import AngularGrid, successive_detection_batch
from .linklevel import (Direction, PowerBudget, Scheme, downlink_sinr_gue,
                        downlink_sinr_uav, uplink_sinr)
from .topology import (UserKind, _draw_in_disc, build_layout, geometry_to_aoa,
                       place_users)
from .training import PilotConfig, estimation_noise


@dataclass(frozen=True)
class LayoutParams:
    cell_radius: float = 500.0
    reuse_factor: int = 7
    K: int = 9
    K_u: int = 3
    bs_height: float = 25.0
    uav_height_min: float = 25.0
    uav_height_max: float = 300.0
    gue_height: float = 1.5
    min_distance: float = 20.0


@dataclass(frozen=True)
class ArrayParams:
    M: int = 128
    carrier_hz: float = 2.0e9
    radius: float | None = None  # None -> half-wavelength circumferential spacing

    def build(self) -> ArrayGeometry:
        if self.radius is None:
            return uca_halfwavelength(self.M, self.carrier_hz)
        lam = 299_792_458.0 / self.carrier_hz
        return ArrayGeometry(M=self.M, radius=self.radius, wavelength=lam)


@dataclass(frozen=True)
class PowerParams:
    user_power_dbm: float = 23.0
    bs_power_dbm: float = 46.0
    noise_density_dbm_hz: float = -164.0
    bandwidth_hz: float = 10.0e6


@dataclass(frozen=True)
class PilotParams:
    """tau defaults to K; p_p defaults to the link-budget pilot SNR.  An
    explicit tau_pp overrides both (the product is all that matters)."""

    tau: int | None = None
    p_p: float | None = None
    tau_pp: float | None = None


@dataclass(frozen=True)
class DetectorParams:
    kappa: float = 3.0
    n_theta: int = 64
    n_phi: int = 128
    max_iterations: int | None = None  # None -> 2 * K
    recompute_threshold: bool = True


@dataclass(frozen=True)
class PdcParams:
    epsilon_rel: float = 0.35
    persistence_prob: float = 0.0  # block-2 interferer keeps the same pilot


@dataclass(frozen=True)
class ScenarioConfig:
    layout: LayoutParams = LayoutParams()
    array: ArrayParams = ArrayParams()
    powers: PowerParams = PowerParams()
    pilot: PilotParams = PilotParams()
    detector: DetectorParams = DetectorParams()
    pdc: PdcParams = PdcParams()
    path_loss: PathLossParams = PathLossParams()
    trials: int = 10_000
    seed: int = 12345
    schemes: tuple = (Scheme.BEFORE, Scheme.AFTER, Scheme.PERFECT,
                      Scheme.TRUE_CSI)
    gue_interference: bool = False
    dl_gue_interference: bool = False
    trial_block: int = 32

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials >= 1 required")
        if self.trial_block < 1:
            raise ValueError("trial_block >= 1 required")


def default_preset(**overrides) -> ScenarioConfig:
    """Reference drop: K=9 reuse-7 cells of radius 500 m,
    M=128, 23/46 dBm transmit powers, -164 dBm/Hz noise over 10 MHz,
    detection constant kappa=3."""
    return replace(ScenarioConfig(), **overrides)


# ---------------------------------------------------------------------------
# config file round-trip


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, Scheme):
        return obj.value
    if isinstance(obj, tuple):
        return [_to_plain(x) for x in obj]
    return obj


def config_to_yaml(config: ScenarioConfig) -> str:
    return yaml.safe_dump(_to_plain(config), sort_keys=False)


_SECTION_TYPES = {
    "layout": LayoutParams, "array": ArrayParams, "powers": PowerParams,
    "pilot": PilotParams, "detector": DetectorParams, "pdc": PdcParams,
    "path_loss": PathLossParams,
}


def config_from_dict(data: dict) -> ScenarioConfig:
    kwargs = {}
    for key, value in data.items():
        if key in _SECTION_TYPES:
            kwargs[key] = _SECTION_TYPES[key](**value)
        elif key == "schemes":
            kwargs[key] = tuple(Scheme(v) for v in value)
        else:
            kwargs[key] = value
    return ScenarioConfig(**kwargs)


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))


def save_config(config: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(config_to_yaml(config))


# ---------------------------------------------------------------------------
# link budget


@dataclass(frozen=True)
class LinkBudget:
    E_u: float
    E_d: float
    tau_pp: float
    noise_watts: float


def _dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def link_budget_normalize(config: ScenarioConfig) -> LinkBudget:
    """Map physical powers to the noise-normalized model constants.

    The per-transmission power p = E/M equals the physical transmit power
    over the total noise power, so E = M * P / N.
    """
    p = config.powers
    noise = _dbm_to_watts(p.noise_density_dbm_hz) * p.bandwidth_hz
    M = config.array.M
    E_u = M * _dbm_to_watts(p.user_power_dbm) / noise
    E_d = M * _dbm_to_watts(p.bs_power_dbm) / noise
    pil = config.pilot
    if pil.tau_pp is not None:
        tau_pp = pil.tau_pp
    else:
        tau = pil.tau if pil.tau is not None else config.layout.K
        p_p = pil.p_p if pil.p_p is not None else \
            _dbm_to_watts(p.user_power_dbm) / noise
        tau_pp = tau * p_p
    return LinkBudget(E_u=E_u, E_d=E_d, tau_pp=tau_pp, noise_watts=noise)


# ---------------------------------------------------------------------------
# trial engine


@dataclass
class TrialDiagnostics:
    uav_identification_ok: int = 0
    uav_identification_total: int = 0
    interferers_missed: int = 0
    interferers_total: int = 0
    false_removals: int = 0
    truncated_detections: int = 0

    def merge(self, other: "TrialDiagnostics") -> None:
        for f in dataclasses.fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


SAMPLE_FIELDS = ("trial", "user", "kind", "direction", "scheme", "sinr_db")


class TrialEngine:
    """Everything needed to simulate trial blocks for one scenario."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.array = config.array.build()
        self.grid = AngularGrid(config.detector.n_theta, config.detector.n_phi)
        lb = link_budget_normalize(config)
        self.budget = PowerBudget(E_u=lb.E_u, E_d=lb.E_d, M=self.array.M)
        self.pilot = PilotConfig.from_tau_pp(lb.tau_pp)
        self.noise_watts = lb.noise_watts
        maxit = config.detector.max_iterations
        self.max_iterations = maxit if maxit is not None else 2 * config.layout.K
        self.det_config = pdc_mod.DetectorConfig(
            grid=self.grid, array=self.array, kappa=config.detector.kappa,
            max_iterations=self.max_iterations,
            recompute_threshold=config.detector.recompute_threshold)
        self.tol = pdc_mod.MatchTolerance(config.pdc.epsilon_rel)
        lay = config.layout
        self.base_layout = build_layout(lay.cell_radius, lay.reuse_factor,
                                        lay.K, bs_height=lay.bs_height)
        self.cell_spacing = math.pi / (2 * self.grid.n_theta)

    # -- per-trial synthesis ------------------------------------------------

    def _draw_trial(self, trial: int):
        """Geometry, large-scale gains and block-1/2 channels for one trial."""
        cfg = self.config
        lay = cfg.layout
        rng = np.random.default_rng([cfg.seed, trial])
        layout = place_users(
            self.base_layout, lay.K_u, rng,
            uav_height_range=(lay.uav_height_min, lay.uav_height_max),
            gue_height=lay.gue_height, min_distance=lay.min_distance)
        K = lay.K
        uavs = set(layout.uav_indices)
        # AoA / distance / beta for every (BS l, user k) link we model
        aoa = {}
        beta = np.zeros((K, K))
        for l, site in enumerate(layout.sites):
            for k, user in enumerate(layout.users):
                if k not in uavs and k != l and not cfg.gue_interference:
                    continue
                th, ph, dist = geometry_to_aoa(site, user)
                aoa[(l, k)] = (th, ph)
                link = LinkType.LOS if k in uavs else LinkType.NLOS
                beta[l, k] = path_loss(dist, link, cfg.path_loss, rng=rng).beta
        # block-1 channels
        h = {}
        for (l, k), (th, ph) in aoa.items():
            if k in uavs:
                psi = rng.uniform(0.0, 2.0 * np.pi)
                h[(l, k)] = (math.sqrt(beta[l, k]) * np.exp(1j * psi)
                             * steering_vector(self.array, th, ph))
            elif k == l or cfg.gue_interference:
                h[(l, k)] = gen_gue_channel(self.array.M, beta[l, k], rng)
        # per-BS interferer sets and block-1 estimates
        interferer_sets = {}
        est1 = {}
        for l in range(K):
            u_l = sorted(uavs - {l}) if l in uavs else sorted(uavs)
            if cfg.gue_interference:
                u_l = sorted(set(u_l) | {k for k in range(K)
                                         if k not in uavs and k != l})
            interferer_sets[l] = u_l
            est1[l] = (h[(l, l)]
                       + sum(h[(l, k)] for k in u_l)
                       + estimation_noise(self.array.M, self.pilot, rng))
        # block-2 estimates for UAV-serving BSs (own UAV on a fresh pilot).
        # Interferer count is preserved: a non-persistent UAV interferer is
        # replaced by a fresh UAV dropped in a random other co-channel cell;
        # GUE interferers simply present an independent Rayleigh realization.
        est2 = {}
        for i in sorted(uavs):
            th, ph = aoa[(i, i)]
            psi = rng.uniform(0.0, 2.0 * np.pi)
            total = (math.sqrt(beta[i, i]) * np.exp(1j * psi)
                     * steering_vector(self.array, th, ph))
            for k in interferer_sets[i]:
                if k not in uavs:
                    total = total + gen_gue_channel(self.array.M, beta[i, k], rng)
                    continue
                if rng.uniform() < cfg.pdc.persistence_prob:
                    th_k, ph_k = aoa[(i, k)]
                    b_k = beta[i, k]
                else:
                    # fresh co-pilot UAV in a random other co-channel cell
                    # (random pilot reassignment changes the co-pilot group)
                    cell = int(rng.integers(K - 1))
                    site = layout.sites[cell if cell < i else cell + 1]
                    xy = _draw_in_disc(rng, site.position, lay.cell_radius,
                                       lay.min_distance)
                    height = rng.uniform(lay.uav_height_min, lay.uav_height_max)
                    delta = np.array([xy[0], xy[1], height]) - layout.sites[i].position
                    dist = float(np.linalg.norm(delta))
                    th_k = math.acos(np.clip(delta[2] / dist, -1.0, 1.0))
                    ph_k = math.atan2(delta[1], delta[0])
                    b_k = path_loss(dist, LinkType.LOS, cfg.path_loss).beta
                psi_k = rng.uniform(0.0, 2.0 * np.pi)
                total = total + (math.sqrt(b_k) * np.exp(1j * psi_k)
                                 * steering_vector(self.array, th_k, ph_k))
            total = total + estimation_noise(self.array.M, self.pilot, rng)
            est2[i] = total
        return layout, aoa, beta, h, interferer_sets, est1, est2

    # -- block execution ----------------------------------------------------

    def run_block(self, trial_indices):
        cfg = self.config
        want_after = Scheme.AFTER in cfg.schemes
        trials = [self._draw_trial(t) for t in trial_indices]
        outcomes = {}
        if want_after:
            jobs = []
            keys = []
            for bi, (layout, aoa, beta, h, u_sets, est1, est2) in enumerate(trials):
                for l in range(cfg.layout.K):
                    jobs.append(est1[l])
                    keys.append((bi, l, 1))
                for i in est2:
                    jobs.append(est2[i])
                    keys.append((bi, i, 2))
            results = successive_detection_batch(
                np.stack(jobs), self.grid, self.array,
                kappa=cfg.detector.kappa, max_iterations=self.max_iterations,
                recompute_threshold=cfg.detector.recompute_threshold)
            outcomes = dict(zip(keys, results))
        samples = []
        diags = TrialDiagnostics()
        for bi, trial in enumerate(trial_indices):
            data = trials[bi]
            try:
                samples.extend(self._evaluate_trial(trial, bi, data, outcomes,
                                                    diags))
            except Exception as exc:
                raise RuntimeError(f"trial {trial} failed: {exc}") from exc
        return samples, diags

    def _scheme_estimates(self, bi, data, outcomes, diags):
        cfg = self.config
        layout, aoa, beta, h, u_sets, est1, est2 = data
        uavs = set(layout.uav_indices)
        per_scheme = {}
        for scheme in cfg.schemes:
            ests = {}
            for l in range(cfg.layout.K):
                if scheme is Scheme.BEFORE:
                    ests[l] = est1[l]
                elif scheme is Scheme.TRUE_CSI:
                    ests[l] = h[(l, l)]
                elif scheme is Scheme.PERFECT:
                    aoas = [aoa[(l, k)] for k in u_sets[l] if k in uavs]
                    ests[l] = pdc_mod.perfect_pdc(est1[l], aoas,
                                                  self.array).vector
                else:
                    if l in uavs:
                        dec = pdc_mod.decontaminate_uav(
                            est1[l], est2.get(l), self.det_config, self.tol,
                            outcome_block1=outcomes[(bi, l, 1)],
                            outcome_block2=outcomes.get((bi, l, 2)))
                    else:
                        dec = pdc_mod.apply_outcome_gue(outcomes[(bi, l, 1)])
                    ests[l] = dec.vector
                    if dec.truncated:
                        diags.truncated_detections += 1
                    self._score_removals(l, dec, outcomes.get((bi, l, 1)),
                                         data, diags)
            per_scheme[scheme] = ests
        return per_scheme

    def _score_removals(self, l, dec, outcome, data, diags):
        """Score the removal decisions against the true paths.

        Own-component identification (UAV links only) succeeds when the own
        LoS path is classified as own: the strongest detected component at
        the own direction survives the matching, and the decontaminated
        vector retains at least 70% of the own path's coherent amplitude
        (catches amputation of the own channel by spurious removals; grid
        splinter losses are a few percent).

        Interferer removal quality is tracked separately: a path counts as
        removed when the removed reconstructions cancel most of it, i.e. the
        leftover fraction |a_k^H (h_k - sum removed)| / (sqrt(b) M) drops
        below 0.6 (one grid-cell peel leaves ~0.2-0.4; a wrongly kept path
        leaves ~1).  This is robust against own-path sidelobes that happen
        to sit near an interferer direction.
        """
        layout, aoa, beta, h, u_sets, est1, est2 = data
        uavs = set(layout.uav_indices)
        own = aoa[(l, l)]
        tol = 2.5 * self.cell_spacing

        def near(a, b):
            return (abs(a[0] - b[0]) < tol
                    and abs((a[1] - b[1] + np.pi) % (2 * np.pi) - np.pi)
                    < 2.5 * 2.0 * np.pi / self.grid.n_phi)

        removed_ids = {id(c) for c in dec.removed}
        removed_sum = 0.0
        for c in dec.removed:
            removed_sum = removed_sum + c.reconstruct(self.array)
        M = self.array.M
        leftovers = []
        for k in u_sets[l]:
            if k not in uavs:
                continue
            a_k = steering_vector(self.array, *aoa[(l, k)])
            left = h[(l, k)] - removed_sum
            leftovers.append(abs(np.vdot(a_k, left))
                             / (math.sqrt(beta[l, k]) * M))
        if l in uavs and outcome is not None:
            diags.uav_identification_total += 1
            own_cands = [c for c in outcome.components
                         if near((c.theta, c.phi), own)]
            main_ok = bool(own_cands) and (
                id(max(own_cands, key=lambda c: abs(c.mu))) not in removed_ids)
            a_own = steering_vector(self.array, *own)
            own_retained = (abs(np.vdot(a_own, dec.vector))
                            / (math.sqrt(beta[l, l]) * M))
            if main_ok and own_retained >= 0.7:
                diags.uav_identification_ok += 1
        diags.interferers_total += len(leftovers)
        diags.interferers_missed += sum(1 for lv in leftovers if lv >= 0.6)
        for c in dec.removed:
            r = (c.theta, c.phi)
            if near(r, own) and l in uavs:
                diags.false_removals += 1

    def _evaluate_trial(self, trial, bi, data, outcomes, diags):
        cfg = self.config
        layout, aoa, beta, h, u_sets, est1, est2 = data
        uavs = set(layout.uav_indices)
        per_scheme = self._scheme_estimates(bi, data, outcomes, diags)
        rows = []
        for scheme, ests in per_scheme.items():
            for l in range(cfg.layout.K):
                kind = UserKind.UAV if l in uavs else UserKind.GUE
                interferers = [h[(l, k)] for k in u_sets[l] if (l, k) in h]
                ul = uplink_sinr(ests[l], h[(l, l)], interferers, self.budget,
                                 user_kind=kind, scheme=scheme)
                rows.append((trial, l, kind, Direction.UL, scheme, ul.value))
                if kind is UserKind.UAV:
                    channels = [h[(m, l)] for m in range(cfg.layout.K)]
                    precoders = [ests[m] for m in range(cfg.layout.K)]
                    dl = downlink_sinr_uav(channels, precoders, self.budget,
                                           serving=l, scheme=scheme)
                else:
                    dl_intf = 0.0
                    if cfg.dl_gue_interference:
                        eta = lambda v: float(np.vdot(v, v).real) / self.array.M
                        dl_intf = sum(
                            self.budget.E_d / eta(ests[m])
                            * abs(np.vdot(h[(m, l)], ests[m]) / self.array.M) ** 2
                            for m in range(cfg.layout.K)
                            if m != l and (m, l) in h)
                    dl = downlink_sinr_gue(h[(l, l)], ests[l], self.budget,
                                           interference=dl_intf, scheme=scheme)
                rows.append((trial, l, kind, Direction.DL, scheme, dl.value))
        return rows


def _block_indices(trials: int, block: int):
    return [range(start, min(start + block, trials))
            for start in range(0, trials, block)]


_WORKER_ENGINE = None


def _init_worker(config_yaml: str):
    global _WORKER_ENGINE
    _WORKER_ENGINE = TrialEngine(config_from_dict(yaml.safe_load(config_yaml)))


def _run_block_worker(trial_indices):
    return _WORKER_ENGINE.run_block(list(trial_indices))


def run_trials(config: ScenarioConfig, workers: int = 1):
    """Simulate all trials; returns (samples, diagnostics).

    Samples are (trial, user, kind, direction, scheme, linear SINR) tuples in
    trial order.
    """
    blocks = _block_indices(config.trials, config.trial_block)
    diags = TrialDiagnostics()
    results = []
    if workers <= 1:
        engine = TrialEngine(config)
        for blk in blocks:
            s, d = engine.run_block(list(blk))
            results.append(s)
            diags.merge(d)
    else:
        import multiprocessing as mp
        ctx = mp.get_context("spawn")
        with ctx.Pool(workers, initializer=_init_worker,
                      initargs=(config_to_yaml(config),)) as pool:
            for s, d in pool.map(_run_block_worker,
                                 [list(b) for b in blocks]):
                results.append(s)
                diags.merge(d)
    samples = [row for block_rows in results for row in block_rows]
    return samples, diags


# ---------------------------------------------------------------------------
# aggregation and export


@dataclass
class CdfSeries:
    """Sorted sample values (dB) with empirical probabilities i/n."""

    values_db: np.ndarray
    probabilities: np.ndarray
    label: dict

    @classmethod
    def from_linear(cls, values, label) -> "CdfSeries":
        v = np.sort(10.0 * np.log10(np.asarray(values, dtype=float)))
        n = v.size
        return cls(values_db=v, probabilities=np.arange(1, n + 1) / n,
                   label=dict(label))


def group_key(row) -> tuple:
    _, _, kind, direction, scheme, _ = row
    return (kind.value, direction.value, scheme.value)


def empirical_cdf(samples, extra_label: dict | None = None):
    """One CdfSeries per (kind, direction, scheme) group, sorted by key."""
    groups: dict = {}
    for row in samples:
        groups.setdefault(group_key(row), []).append(row[5])
    series = []
    for key in sorted(groups):
        values = groups[key]
        if not values:
            continue
        label = {"kind": key[0], "direction": key[1], "scheme": key[2]}
        if extra_label:
            label.update(extra_label)
        series.append(CdfSeries.from_linear(values, label))
    return series


def write_samples_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SAMPLE_FIELDS)
        for trial, user, kind, direction, scheme, value in samples:
            db = 10.0 * math.log10(value) if value > 0 else float("-inf")
            w.writerow([trial, user, kind.value, direction.value, scheme.value,
                        f"{db:.10e}"])


def read_samples_csv(path):
    samples = []
    with open(path) as fh:
        r = csv.reader(fh)
        next(r)
        for trial, user, kind, direction, scheme, db in r:
            samples.append((int(trial), int(user), UserKind(kind),
                            Direction(direction), Scheme(scheme),
                            10.0 ** (float(db) / 10.0)))
    return samples


def write_cdf_csvs(series_list, out_dir) -> list:
    paths = []
    for s in series_list:
        name = "cdf_{kind}_{direction}_{scheme}.csv".format(**s.label)
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sinr_db", "probability"])
            for v, p in zip(s.values_db, s.probabilities):
                w.writerow([f"{v:.10e}", f"{p:.10e}"])
        paths.append(path)
    return paths


def compare_report(samples, diags: TrialDiagnostics | None = None) -> str:
    """Summary table: median and 5th/95th percentiles per group, gaps to the
    Perfect and TrueCsi references, detector quality counters."""
    groups: dict = {}
    for row in samples:
        groups.setdefault(group_key(row), []).append(row[5])
    med = {}
    for key, vals in groups.items():
        arr = 10.0 * np.log10(np.asarray(vals))
        med[key] = (float(np.median(arr)), float(np.percentile(arr, 5)),
                    float(np.percentile(arr, 95)))
    out = io.StringIO()
    out.write(f"{'group':<28}{'median':>10}{'p5':>10}{'p95':>10}"
              f"{'vs perfect':>12}{'vs true':>10}\n")
    for key in sorted(med):
        kind, direction, scheme = key
        m, p5, p95 = med[key]
        ref_p = med.get((kind, direction, Scheme.PERFECT.value))
        ref_t = med.get((kind, direction, Scheme.TRUE_CSI.value))
        gp = f"{m - ref_p[0]:+.2f}" if ref_p else "-"
        gt = f"{m - ref_t[0]:+.2f}" if ref_t else "-"
        out.write(f"{kind + '/' + direction + '/' + scheme:<28}"
                  f"{m:>10.2f}{p5:>10.2f}{p95:>10.2f}{gp:>12}{gt:>10}\n")
    if diags is not None and diags.uav_identification_total:
        rate = diags.uav_identification_ok / diags.uav_identification_total
        out.write(f"\nUAV identification success: {rate:.4f} "
                  f"({diags.uav_identification_ok}/{diags.uav_identification_total})\n")
        if diags.interferers_total:
            miss = diags.interferers_missed / diags.interferers_total
            out.write(f"interferer miss rate: {miss:.4f}\n")
        out.write(f"false removals: {diags.false_removals}\n")
        out.write(f"truncated detections: {diags.truncated_detections}\n")
    return out.getvalue()
