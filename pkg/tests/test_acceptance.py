"""Acceptance criteria 1-10 on the fig1 preset.

Each test records one PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and when the module is run as a script.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from slowlight.atoms import AtomicState, rf_matrix, rf_rotation
from slowlight.oracle import in_transient
from slowlight.physics import DerivedRates, kernel_kx, kernel_ky
from slowlight.report import compare_metrics, protocol_metrics, simulate

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[n]


@pytest.fixture(scope="module")
def metrics(fig1_run):
    return protocol_metrics(fig1_run)


def test_criterion_01_slow_light_transport(metrics, fig1_run):
    v1 = 1 / (1 / fig1_run.config.params.c + fig1_run.config.params.alpha / fig1_run.config.params.omega0**2)
    rel = metrics["v1_fit"] / v1 - 1
    record(1, abs(rel) < 0.02, f"v1_fit = {metrics['v1_fit']:.6g}, V1 = {v1:.6g}, rel err {rel:+.2e} (tol 2%)")


def test_criterion_02_step_amplitude_law(metrics):
    amp = metrics["amp_ratio_step"]
    inten = metrics["intensity_ratio_step"]
    ok = abs(inten / 2 - 1) < 0.05 and abs(amp / math.sqrt(2) - 1) < 0.025
    record(2, ok, f"intensity ratio {inten:.4f} (2 +/- 5%), amplitude ratio {amp:.4f} (sqrt2 +/- 2.5%)")


def test_criterion_03_velocity_duration_trade(metrics, fig1_run):
    p = fig1_run.config.params
    c_over_v1 = p.c / fig1_run.geo.v1
    ratio = metrics["v2_over_v1"]
    w = metrics["fwhm_ratio_step"]
    ok = abs(ratio / 2 - 1) < 0.02 and abs(w / 0.5 - 1) < 0.05 and round(math.log10(c_over_v1)) == 6
    record(3, ok, f"V2/V1 = {ratio:.4f} (2 +/- 2%), FWHM ratio {w:.4f} (0.5 +/- 5%), c/V1 = {c_over_v1:.3g}")


def test_criterion_04_spatial_length(metrics):
    r = metrics["lp_ratio_step"]
    record(4, abs(r - 1) < 0.05, f"spin-wave z-FWHM after/before = {r:.5f} (1 +/- 5%)")


def test_criterion_05_rf_split(metrics):
    a = metrics["amp_ratio_rf1"]
    e = metrics["cbm_split_err"]
    record(5, abs(a - 1) < 0.05 and e < 0.05,
           f"post-rf1 peak / input peak = {a:.4f} (1 +/- 5%), C_M profile error {e:.3e} (< 5%)")


def test_criterion_06_storage(metrics):
    d = metrics["storage_drift"]
    r = metrics["cm_residual_t4"]
    record(6, d < 1e-3 and r < 0.01, f"C_M drift {d:.2e} (< 1e-3), C_m residual at t4 {r:.2e} (< 1%)")


def test_criterion_07_retrieval(metrics, fig1_pi_run):
    pi = protocol_metrics(fig1_pi_run)
    l2, s3, s1 = metrics["retrieval_l2"], metrics["retrieval_sign"], pi["retrieval_sign"]
    record(7, l2 < 0.10 and s3 > 0 and s1 < 0,
           f"3pi retrieval L2 = {l2:.4f} (< 0.10), sign {s3:+d}; pi retrieval sign {s1:+d} (expect -1)")


def test_criterion_08_oracle_equivalence(fig1_run):
    m = compare_metrics(fig1_run, exact_transients=True)
    out, inside = m["supnorm_rel_err"], m["supnorm_rel_err_transient"]
    record(8, out < 0.05 and inside < 0.15,
           f"sup-norm rel err outside windows {out:.4f} (< 0.05), inside windows (quadrature) {inside:.4f} (< 0.15)")


def test_criterion_09_kernel_identities(fig1_run):
    p = fig1_run.config.params
    r = DerivedRates.from_params(p)
    h = p.h
    eps = 1e-12
    errs = {
        "g+ + g- - g": abs(r.gamma_plus + r.gamma_minus - p.gamma),
        "g+ g- - 2W^2": abs(r.gamma_plus * r.gamma_minus - 2 * p.omega0**2),
    }
    kern = {
        "Kx(0+) - h": abs(kernel_kx(eps, r, h) - h),
        "Ky(0)": abs(kernel_ky(0.0, r, h)),
        "Ky'(0+) - h": abs(kernel_ky(eps, r, h) / eps - h),
    }
    ok = all(v <= 1e-12 for v in errs.values()) and all(v <= 1e-10 for v in kern.values())
    detail = ", ".join(f"|{k}| = {v:.1e}" for k, v in {**errs, **kern}.items())
    record(9, ok, detail)


def test_criterion_10_unitarity_and_convergence(fig1_config, fig1_run):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(2000):
        cm, cbm = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = AtomicState(cm, 0j, cbm)
        out = rf_rotation(s, rng.uniform(-10, 10), rng.uniform(-math.pi, math.pi))
        worst = max(worst, abs(out.norm2() - s.norm2()) / s.norm2())
    for area in (math.pi / 4, 1.5 * math.pi):
        u = rf_matrix(area)
        worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(2)))))

    # grid halving twice; compared outside the tau_gamma windows after each event
    fields = [fig1_run.field.psi]
    for factor in (2, 4):
        cfg = replace(fig1_config, grid=fig1_config.grid.refined(factor))
        fields.append(simulate(cfg).field.psi)
    f = fig1_run.field
    zz, tt = np.meshgrid(f.z, f.tau, indexing="ij")
    smooth = ~in_transient(zz, tt + zz / fig1_config.params.c, fig1_run.geo)
    peak = float(np.max(np.abs(fields[2])))
    e1 = float(np.max(np.abs(fields[0] - fields[1])[smooth])) / peak
    e2 = float(np.max(np.abs(fields[1] - fields[2])[smooth])) / peak
    ratio = e1 / e2
    ok = worst < 1e-14 and e1 < 0.01 and 3 <= ratio <= 5
    record(10, ok, f"rf norm drift {worst:.1e} (< 1e-14), halving change {e1:.2e} (< 1%), "
                   f"error ratio {ratio:.2f} (3..5)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
