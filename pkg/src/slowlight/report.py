"""Protocol observables computed from a run, keyed as in ``metrics.txt``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .errors import NoPeak, WeakProbeViolated
from .metrics import (
    correlation_sign,
    fitted_velocity,
    fwhm,
    gaussian_broaden,
    l2_distance,
    peak_trajectory,
    spatial_length,
)
from .oracle import StageSolution, in_transient, oracle_field, oracle_spinwave
from .physics import DerivedRates, validate_params
from .solver import AtomicFieldHistory, FieldHistory, MarchOptions, run_march

WEAK_PROBE = 0.1


@dataclass
class RunResult:
    config: ScenarioConfig
    geo: StageSolution
    field: FieldHistory
    atoms: AtomicFieldHistory


def geometry(cfg: ScenarioConfig) -> StageSolution:
    g = cfg.grid
    return StageSolution.build(
        cfg.params, cfg.schedule, cfg.march.rf_mode, l_s=g.l_s, t_window=(g.tau_min, g.tau_max + g.l_s / cfg.params.c)
    )


def validate(cfg: ScenarioConfig) -> DerivedRates:
    p = cfg.params
    validate_params(p, cfg.input.bandwidth)
    if cfg.input.peak > WEAK_PROBE * p.omega0:
        raise WeakProbeViolated(f"signal peak {cfg.input.peak:g} exceeds {WEAK_PROBE:g} * omega0")
    rates = DerivedRates.from_params(p)
    cfg.schedule.check_completion(p, rates, rates.v1 * cfg.input.t_p1)
    return rates


def simulate(cfg: ScenarioConfig, march: MarchOptions | None = None, check_grid: bool = True) -> RunResult:
    validate(cfg)
    field, atoms = run_march(cfg.grid, cfg.schedule, cfg.input, cfg.params, march or cfg.march, check_grid)
    return RunResult(cfg, geometry(cfg), field, atoms)


def oracle_histories(cfg: ScenarioConfig, z, tau, exact_transients: bool = False):
    """Closed-form field and spin waves on a stored (z, tau) grid."""
    geo = geometry(cfg)
    zg, tg = np.meshgrid(z, tau, indexing="ij")
    t_lab = tg + zg / cfg.params.c
    psi = oracle_field(zg, t_lab, geo, cfg.input, exact_transients=exact_transients)
    cm, cbm = oracle_spinwave(zg, t_lab, geo, cfg.input)
    field = FieldHistory(z=np.asarray(z), tau=np.asarray(tau), psi=psi, boundary=cfg.input, c=cfg.params.c)
    atoms = AtomicFieldHistory(z=np.asarray(z), tau=np.asarray(tau), x=cm, y=np.zeros_like(cm), c_big_m=cbm)
    return RunResult(cfg, geo, field, atoms)


def _col(tau, t, side="after"):
    """Index of the first stored node at or after ``t`` (or the last one before it)."""
    if side == "after":
        return int(np.searchsorted(tau, t - 1e-9, side="left"))
    return int(np.searchsorted(tau, t - 1e-9, side="left")) - 1


def _clean_trajectory(history, lo, hi):
    """Peak trajectory restricted to slices whose half-maximum region lies inside (lo, hi)."""
    z, t = peak_trajectory(history, tau_window=(lo, hi))
    cols = (history.tau >= lo) & (history.tau <= hi)
    amp = np.abs(history.psi[:, cols])
    if amp.shape[1] < 3:
        return z[:0], t[:0]
    edge = np.maximum(amp[:, 0], amp[:, -1])
    keep = edge < 0.5 * amp.max(axis=1)
    return z[keep], t[keep]


def protocol_metrics(run: RunResult, sigma: float | None = None) -> dict:
    """Observables of the step / split / store / retrieve protocol that are defined for this schedule."""
    cfg, geo, f, a = run.config, run.geo, run.field, run.atoms
    sigma = cfg.broadening_sigma if sigma is None else sigma
    tau, z = f.tau, f.z
    dtau = tau[1] - tau[0]
    dz = z[1] - z[0]
    env = cfg.input
    out: dict[str, object] = {}
    t_end = float(tau[-1])
    t1 = geo.t1 if math.isfinite(geo.t1) and cfg.schedule.control_step is not None else t_end

    try:
        zs, ts = _clean_trajectory(f, tau[0], t1)
        out["v1_fit"] = fitted_velocity(zs, ts)
    except NoPeak:
        pass
    out["v1_theory"] = geo.v1

    def exit_signal(i0, i1, iz=-1):
        sig = f.psi[iz, i0:i1]
        return gaussian_broaden(sig, sigma, dtau) if sigma > 0 else sig

    if cfg.schedule.control_step is None:
        return out

    tg = geo.tau_gamma
    after_step = t1 + tg
    seg_end = min(geo.t4, t_end)
    try:
        # one window per stage so no argmax is pinned to an amplitude jump
        edges = [after_step]
        if math.isfinite(geo.t3) and geo.t3 < seg_end:
            edges += [geo.t3, geo.t3 + tg]
        edges.append(seg_end)
        parts = [
            _clean_trajectory(f, lo, hi)
            for lo, hi in zip(edges[::2], edges[1::2])
            if hi > lo
        ]
        zs = np.concatenate([p[0] for p in parts])
        ts = np.concatenate([p[1] for p in parts])
        if len(zs) >= 2:
            v2 = fitted_velocity(zs, ts)
            out["v2_fit"] = v2
            if "v1_fit" in out:
                out["v2_over_v1"] = v2 / out["v1_fit"]
    except NoPeak:
        pass
    out["v2_theory"] = geo.v2

    pre, post = _col(tau, t1, "before"), _col(tau, after_step)
    peak_pre = float(np.max(np.abs(f.psi[:, pre])))
    peak_post = float(np.max(np.abs(f.psi[:, post])))
    out["amp_ratio_step"] = peak_post / peak_pre
    out["intensity_ratio_step"] = (peak_post / peak_pre) ** 2

    # temporal width: input slice before the step, exit slice after it
    lo = max(after_step, geo.t3 + tg) if math.isfinite(geo.t3) else after_step
    i0, i1 = _col(tau, lo), _col(tau, seg_end)
    try:
        w_pre = fwhm(f.psi[0, : _col(tau, t1)], dtau)
        w_post = fwhm(exit_signal(i0, i1), dtau)
        out["fwhm_ratio_step"] = w_post / w_pre
    except (NoPeak, ValueError):
        pass
    try:
        out["lp_ratio_step"] = spatial_length(a.x[:, post], dz) / spatial_length(a.x[:, pre], dz)
    except NoPeak:
        pass

    if math.isfinite(geo.t3):
        k = _col(tau, geo.t3 + tg)
        out["amp_ratio_rf1"] = float(np.max(np.abs(f.psi[:, k]))) / env.peak
        k3 = _col(tau, geo.t3 + dtau)
        cbm = a.c_big_m[:, k3]
        expected = geo.store * (-env(geo.big_t3(z)) / geo.omega0)
        scale = float(np.max(np.abs(cbm)))
        out["cbm_split_err"] = float(np.max(np.abs(cbm - expected))) / scale
        ks, ke = _col(tau, geo.t3 + tg), _col(tau, min(geo.t4, t_end), "before")
        ref = a.c_big_m[:, ks]
        drift = np.max(np.abs(a.c_big_m[:, ks : ke + 1] - ref[:, None]))
        out["storage_drift"] = float(drift) / float(np.max(np.abs(ref)))
        cm_peak = float(np.max(np.abs(a.x[:, :ks])))
        out["cm_residual_t4"] = float(np.max(np.abs(a.x[:, ke]))) / cm_peak

    if math.isfinite(geo.t5) and geo.t5 + tg < t_end:
        i0 = _col(tau, geo.t5 + tg)
        sig = exit_signal(i0, len(tau))
        t_lab = tau[i0:] + z[-1] / cfg.params.c
        ref = env(geo.big_t35(z[-1], t_lab))
        dist, shift = l2_distance(sig, ref)
        out["retrieval_l2"] = dist
        out["retrieval_shift"] = shift * dtau
        out["retrieval_sign"] = correlation_sign(sig, ref, shift)
    return out


def compare_metrics(run: RunResult, exact_transients: bool = True) -> dict:
    """Sup-norm error of the march against the closed forms, split by transient windows."""
    cfg, geo, f = run.config, run.geo, run.field
    zg, tg = np.meshgrid(f.z, f.tau, indexing="ij")
    t_lab = tg + zg / cfg.params.c
    orc = oracle_field(zg, t_lab, geo, cfg.input)
    inside = in_transient(zg, t_lab, geo)
    scale = float(np.max(np.abs(orc)))
    err = np.abs(f.psi - orc)
    out = {"supnorm_rel_err": float(np.max(err[~inside])) / scale}
    if np.any(inside):
        if exact_transients:
            idx = np.nonzero(inside)
            orc_in = oracle_field(zg[idx], t_lab[idx], geo, cfg.input, exact_transients=True)
            out["supnorm_rel_err_transient"] = float(np.max(np.abs(f.psi[idx] - orc_in))) / scale
        else:
            out["supnorm_rel_err_transient"] = float(np.max(err[inside])) / scale
    out["l2_rel_err"] = float(np.linalg.norm(f.psi - orc) / np.linalg.norm(orc))
    return out
