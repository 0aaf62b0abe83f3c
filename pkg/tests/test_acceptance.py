"""Acceptance criteria, one PASS/FAIL line each at the stated tolerances.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from lagmcf.curvature import embed, mean_curvature_in_L, small_s_limit_scalar, small_s_limit_vector
from lagmcf.flow import FlowConfig, decay_rate_estimate, integrate_flow
from lagmcf.oracle import EmbeddingChart, ambient_mean_curvature_fd, oracle_mean_curvature_in_L, random_sphere_point
from lagmcf.profile import CircleProfile, ExpanderParams, ExpanderProfile, LineProfile, eval_w, phi_E

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # direct execution outside the tests directory
    ACCEPTANCE_LINES = []

SETS = [(2, 1.0, 0.0, 1.0), (3, 1.0, 1.0, 1.0), (2, 1.0, 0.0, 2.0), (3, 2.0, 0.5, 1.5)]
S_GRID = [round(0.1 * k, 10) for k in range(1, 31)]


def expander(n, a, alpha, E):
    return ExpanderProfile(ExpanderParams(a=a, E=E, alpha=alpha, n=n))


def report(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_c1_shrinking_sphere():
    t0 = time.perf_counter()
    tr = integrate_flow(LineProfile(3), FlowConfig(f0=1.0, t_end=1.0, rel_tol=1e-10))
    elapsed = time.perf_counter() - t0
    m = tr.t <= 0.24
    err = float(np.max(np.abs(tr.f[m] ** 2 - (1 - 4 * tr.t[m]))))
    ext = tr.extinction_time
    ext_err = abs(ext - 0.25) if ext is not None else math.inf
    ok = err <= 1e-8 and ext_err <= 1e-6 and elapsed < 1.0
    assert report("1 shrinking sphere", ok, f"max|f^2-(1-4t)|={err:.2e}, |T-0.25|={ext_err:.2e}, {elapsed:.3f}s")


def test_c2_phi_closed_form():
    t0 = time.perf_counter()
    p = ExpanderParams(1.0, 1.0, 0.0, 2)
    e1 = abs(phi_E(p, 1.0) - math.pi / 6)
    e100 = abs(phi_E(p, 100.0) - math.atan(100 / math.sqrt(10002)))
    elapsed = time.perf_counter() - t0
    ok = e1 <= 1e-8 and e100 <= 1e-8 and elapsed < 1.0
    assert report("2 phi_E closed form", ok, f"err(1)={e1:.2e}, err(100)={e100:.2e}, {elapsed:.3f}s")


def test_c3_oracle_agreement():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n, a, alpha, E in SETS:
        prof = expander(n, a, alpha, E)
        for s in S_GRID:
            x = random_sphere_point(rng, n)
            ref = mean_curvature_in_L(prof, s, x).H
            got = oracle_mean_curvature_in_L(EmbeddingChart(prof, x, fd_step=1e-5), s)
            worst = max(worst, float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed < 30.0
    assert report("3 oracle agreement", ok, f"max rel discrepancy={worst:.2e}, {elapsed:.2f}s")


def test_c4_minimality():
    rng = np.random.default_rng(4)
    worst = 0.0
    for n, a, alpha, E in SETS:
        if E != 1.0:
            continue
        p = ExpanderParams(a, E, alpha, n)
        prof = ExpanderProfile(p)
        for s in (1e-2, 1e-3):
            smp = mean_curvature_in_L(prof, s, random_sphere_point(rng, n))
            bound = 1.1 * (n - 1) * (n * a + alpha) * s * np.linalg.norm(smp.ds_vector)
            worst = max(worst, float(np.linalg.norm(smp.H) / bound))
        if np.any(mean_curvature_in_L(prof, 0.0, random_sphere_point(rng, n)).H != 0.0):
            worst = math.inf
    assert report("4 minimality of l_0", worst <= 1.0, f"max |H|/bound={worst:.3f}")


def test_c5a_small_s_limit():
    rng = np.random.default_rng(5)
    worst = 0.0
    for n, a, E in ((2, 1.0, 2.0), (3, 4.0, 5.0)):
        p = ExpanderParams(a, E, 0.0, n)
        x = random_sphere_point(rng, n)
        H = mean_curvature_in_L(ExpanderProfile(p), 1e-4, x).H
        ref = small_s_limit_vector(p, x)
        worst = max(worst, float(np.linalg.norm(H - ref) / np.linalg.norm(ref)))
    assert report("5a E>1 small-s limit", worst <= 1e-3, f"max rel err={worst:.2e}")


@pytest.mark.xfail(strict=True, reason="|limit| ~ (n-1) sqrt(a (E-1)) is 0.1 and 0.03 at these E, not 1e-6")
def test_c5b_limit_vanishes_near_e_one():
    mags = {E: abs(small_s_limit_scalar(ExpanderParams(1.0, E, 0.0, 2))) for E in (1.01, 1.001)}
    detail = ", ".join(f"|limit(E={E})|={m:.3e}" for E, m in mags.items())
    assert report("5b E->1+ scalar limit <= 1e-6", max(mags.values()) <= 1e-6, detail)


def test_c6_expander_convergence():
    tr = integrate_flow(expander(2, 1.0, 0.0, 1.0), FlowConfig(f0=2.0, t_end=10.0))
    decreasing = bool(np.all(np.diff(tr.f) < 0))
    f_end = float(tr.f[-1]) if tr.t[-1] == 10.0 else math.inf
    rate = decay_rate_estimate(tr).rate
    rel = abs(rate + 2.0) / 2.0
    ok = decreasing and f_end < 1e-3 and rel <= 0.02
    assert report("6 E=1 convergence", ok, f"decreasing={decreasing}, f(10)={f_end:.2e}, rate={rate:.5f}")


def test_c7_stationary_circle():
    worst_f = 0.0
    for f0 in (0.5, 1.0, 3.0):
        tr = integrate_flow(CircleProfile(2), FlowConfig(f0=f0, t_end=10.0))
        worst_f = max(worst_f, float(np.max(np.abs(tr.f - f0))) if tr.t[-1] == 10.0 else math.inf)
    rng = np.random.default_rng(7)
    worst_h = 0.0
    for n in (2, 3, 4):
        for s in (-2.0, 0.3, 1.7):
            H = oracle_mean_curvature_in_L(EmbeddingChart(CircleProfile(n), random_sphere_point(rng, n)), s)
            worst_h = max(worst_h, float(np.linalg.norm(H)))
    ok = worst_f <= 1e-12 and worst_h <= 1e-6
    assert report("7 stationary circle", ok, f"max|f-f0|={worst_f:.2e}, max|H_oracle|={worst_h:.2e}")


def test_c8_sphere_mean_curvature():
    rng = np.random.default_rng(8)
    worst = 0.0
    for n in (2, 3, 4):
        for prof in (expander(n, 1.0, 0.0, 1.0), expander(n, 2.0, 0.5, 1.5), LineProfile(n)):
            for s in (0.3, 1.0, 2.5):
                chart = EmbeddingChart(prof, random_sphere_point(rng, n))
                w = eval_w(prof, s)
                ref = -(n - 1) / abs(w) ** 2 * embed(chart.base_x * w)
                got = ambient_mean_curvature_fd(chart, s)
                worst = max(worst, float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
    assert report("8 ambient sphere curvature", worst <= 1e-4, f"max rel err={worst:.2e}")


def test_c9_full_verify():
    t0 = time.perf_counter()
    runs = [
        subprocess.run([sys.executable, "-m", "lagmcf", "verify"], capture_output=True, check=False)
        for _ in range(2)
    ]
    elapsed = time.perf_counter() - t0
    codes = [r.returncode for r in runs]
    identical = runs[0].stdout == runs[1].stdout
    failed = [c["name"] for c in json.loads(runs[0].stdout)["checks"] if not c["passed"]] if runs[0].stdout else ["<no output>"]
    ok = codes == [0, 0] and identical and not failed and elapsed < 120.0
    detail = f"exit={codes}, identical={identical}, failed={failed or 'none'}, {elapsed:.1f}s"
    assert report("9 full verify", ok, detail)


if __name__ == "__main__":
    # 5b is expected to fail; see its xfail reason
    expected_fail = {"test_c5b_limit_vanishes_near_e_one"}
    ok = True
    for name, fn in list(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                ok = ok and name in expected_fail
    sys.exit(0 if ok else 1)
