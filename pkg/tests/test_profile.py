import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmcf.errors import DomainViolation, NonFiniteIntegrand, ParameterViolation
from lagmcf.profile import (
    CircleProfile,
    ExpanderParams,
    ExpanderProfile,
    LineProfile,
    TableProfile,
    eval_w,
    eval_wdot,
    phase_rate,
    phi_E,
)
from lagmcf.quadrature import adaptive_simpson

BASE = ExpanderParams(a=1.0, E=1.0, alpha=0.0, n=2)

params_st = st.builds(
    ExpanderParams,
    a=st.floats(0.1, 5.0),
    E=st.one_of(st.just(1.0), st.floats(1.0, 6.0)),
    alpha=st.floats(0.0, 3.0),
    n=st.integers(2, 5),
)


def reduced_integrand(t):
    # a=1, alpha=0, n=2, E=1: t / ((1+t^2) sqrt((1+t^2)^2 - 1)) = 1 / ((1+t^2) sqrt(t^2+2))
    return 1.0 / ((1.0 + t * t) * np.sqrt(t * t + 2.0))


def antiderivative(t):
    return np.arctan(t / np.sqrt(t * t + 2.0))


def composite_simpson(f, a, b, m):
    x = np.linspace(a, b, 2 * m + 1)
    y = f(x)
    h = (b - a) / (2 * m)
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


class TestPhaseOracle:
    def test_antiderivative_differentiates_to_integrand(self):
        h = 1e-5
        for t in (0.1, 0.5, 1.0, 3.0, 20.0):
            fd = (antiderivative(t + h) - antiderivative(t - h)) / (2 * h)
            assert fd == pytest.approx(reduced_integrand(t), abs=1e-10)
            assert phase_rate(BASE, t) == pytest.approx(reduced_integrand(t), rel=1e-13)

    def test_fine_grid_simpson_matches_arctan(self):
        assert composite_simpson(reduced_integrand, 0.0, 1.0, 20000) == pytest.approx(math.pi / 6, abs=1e-13)
        assert antiderivative(1.0) == pytest.approx(math.pi / 6, abs=1e-15)

    def test_phi_closed_form_values(self):
        assert phi_E(BASE, 1.0) == pytest.approx(0.5235987755982988, abs=1e-8)
        assert abs(phi_E(BASE, 100.0) - math.atan(100 / math.sqrt(10002))) <= 1e-8
        assert phi_E(BASE, 100.0) == pytest.approx(0.7853481683968653, abs=1e-8)

    def test_phi_at_zero(self):
        for p in (BASE, ExpanderParams(2.0, 3.0, 1.0, 4)):
            assert phi_E(p, 0.0) == 0.0

    def test_removable_limit(self):
        p = ExpanderParams(a=2.0, E=1.0, alpha=0.5, n=3)
        limit = p.a / math.sqrt(p.n * p.a + p.alpha)
        assert phase_rate(p, 0.0) == limit
        # continuity across the series threshold
        assert phase_rate(p, 2e-8) == pytest.approx(limit, rel=1e-12)

    def test_negative_s_rejected(self):
        with pytest.raises(DomainViolation):
            phi_E(BASE, -0.1)

    def test_corrupted_params_signal_nonfinite(self):
        p = ExpanderParams(1.0, 1.0, 0.0, 2)
        object.__setattr__(p, "E", 0.5)
        with pytest.raises(NonFiniteIntegrand):
            phase_rate(p, 0.1)

    def test_threads_agree(self):
        p = ExpanderParams(1.3, 1.0, 0.2, 3)
        grid = np.linspace(0.05, 9.0, 60)
        results = {}

        def work(i):
            order = grid[::-1] if i % 2 else grid
            results[i] = {s: phi_E(p, s, 1e-11) for s in order}

        threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        ref = {s: phi_E(p, s, 1e-11) for s in grid}
        assert all(results[i] == ref for i in range(4))


@given(params_st, st.lists(st.floats(0.0, 10.0), min_size=2, max_size=12))
@settings(max_examples=40, deadline=None)
def test_phi_monotone(params, points):
    grid = sorted(set(points))
    # spacing well above the quadrature budget
    grid = [s for i, s in enumerate(grid) if i == 0 or s - grid[i - 1] > 1e-6]
    vals = [phi_E(params, s) for s in grid]
    assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
    assert all(v >= 0 for v in vals)


@given(params_st, st.floats(0.01, 10.0))
@settings(max_examples=40, deadline=None)
def test_quadrature_self_consistency(params, s):
    tol = 1e-8
    assert abs(phi_E(params, s, tol) - phi_E(params, s, tol / 100)) <= tol


@given(params_st, st.floats(0.0, 10.0))
@settings(max_examples=60, deadline=None)
def test_radius_identity(params, s):
    prof = ExpanderProfile(params)
    ref = 1.0 / params.a + s * s
    assert abs(abs(eval_w(prof, s)) ** 2 - ref) <= 1e-12 * ref


class TestEval:
    def test_expander_origin(self):
        for p in (ExpanderParams(4.0, 1.0, 0.0, 2), ExpanderParams(4.0, 2.5, 1.0, 3)):
            assert eval_w(ExpanderProfile(p), 0.0) == complex(0.5, 0.0)

    def test_expander_at_one(self):
        w = eval_w(ExpanderProfile(BASE), 1.0)
        assert w.real == pytest.approx(1.2247449, abs=1e-7)
        assert w.imag == pytest.approx(0.7071068, abs=1e-7)
        assert w == pytest.approx(math.sqrt(2) * complex(math.cos(math.pi / 6), math.sin(math.pi / 6)), abs=1e-9)

    def test_line_and_circle(self):
        assert eval_w(LineProfile(3), 2.0) == complex(2.0, 0.0)
        assert eval_wdot(LineProfile(3), 0.7) == complex(1.0, 0.0)
        assert eval_wdot(CircleProfile(2), 0.0) == complex(0.0, 1.0)

    def test_expander_speed(self):
        prof = ExpanderProfile(BASE)
        wd = eval_wdot(prof, 1.0)
        # rdot = 1/sqrt(2), phidot = 1/(2 sqrt(3)), r^2 = 2
        assert abs(wd) ** 2 == pytest.approx(0.5 + 2.0 / 12.0, rel=1e-12)
        assert abs(wd) ** 2 == pytest.approx(2.0 / 3.0, rel=1e-12)
        h = 1e-6
        fd = (eval_w(prof, 1.0 + h) - eval_w(prof, 1.0 - h)) / (2 * h)
        assert abs(fd - wd) < 1e-8

    def test_one_sided_derivative_at_origin(self):
        p = ExpanderParams(a=1.0, E=1.0, alpha=0.0, n=2)
        wd = eval_wdot(ExpanderProfile(p), 0.0)
        r0 = 1.0
        assert wd == pytest.approx(complex(0.0, r0 * p.a / math.sqrt(p.n * p.a + p.alpha)), abs=1e-15)

    def test_domain_violations(self):
        with pytest.raises(DomainViolation):
            eval_w(ExpanderProfile(BASE), -0.1)
        with pytest.raises(DomainViolation):
            eval_w(ExpanderProfile(BASE, s_max=5.0), 5.5)
        with pytest.raises(DomainViolation):
            eval_w(LineProfile(2), 0.0)
        with pytest.raises(DomainViolation):
            eval_wdot(LineProfile(2), -1.0)


@pytest.mark.parametrize(
    "profile",
    [
        ExpanderProfile(BASE),
        ExpanderProfile(ExpanderParams(2.0, 1.5, 0.5, 3)),
        ExpanderProfile(ExpanderParams(0.5, 1.0, 2.0, 4), two_sided=True),
        LineProfile(2),
        CircleProfile(3),
    ],
    ids=lambda p: p.kind,
)
def test_derivative_finite_difference_consistency(profile):
    for s in (0.3, 1.2, 2.9):
        for h in (1e-4, 1e-5):
            fd = (eval_w(profile, s + h) - eval_w(profile, s - h)) / (2 * h)
            assert abs(eval_wdot(profile, s) - fd) <= 1.0 * h * h


class TestTwoSided:
    def test_conjugate_reflection(self):
        prof = ExpanderProfile(ExpanderParams(1.5, 1.0, 0.3, 3), two_sided=True)
        for s in (0.2, 1.0, 4.0):
            assert eval_w(prof, -s) == pytest.approx(eval_w(prof, s).conjugate(), abs=1e-15)
            assert eval_wdot(prof, -s) == pytest.approx(-eval_wdot(prof, s).conjugate(), abs=1e-15)

    def test_smooth_through_origin(self):
        prof = ExpanderProfile(BASE, two_sided=True)
        assert eval_wdot(prof, -1e-9) == pytest.approx(eval_wdot(prof, 1e-9), abs=1e-8)

    def test_requires_e_equal_one(self):
        with pytest.raises(ParameterViolation):
            ExpanderProfile(ExpanderParams(1.0, 2.0, 0.0, 2), two_sided=True)


@pytest.mark.parametrize(
    "kwargs",
    [dict(a=0.0), dict(a=-1.0), dict(E=0.5), dict(alpha=-0.1), dict(n=1), dict(n=2.5), dict(a=math.nan)],
)
def test_params_rejected(kwargs):
    base = dict(a=1.0, E=1.0, alpha=0.0, n=2)
    base.update(kwargs)
    with pytest.raises(ParameterViolation):
        ExpanderParams(**base)


class TestTable:
    def write(self, tmp_path, s, w, header="s,re_w,im_w"):
        path = tmp_path / "w.csv"
        lines = [header] + [f"{float(a)!r},{float(b.real)!r},{float(b.imag)!r}" for a, b in zip(s, w)]
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_round_trip(self, tmp_path):
        s = np.linspace(0.5, 3.0, 80)
        w = s * np.exp(0.4j * s)
        prof = TableProfile.from_csv(self.write(tmp_path, s, w), n=3)
        assert prof.n == 3
        for x in (0.9, 1.77, 2.5):
            assert eval_w(prof, x) == pytest.approx(x * np.exp(0.4j * x), abs=1e-6)
            exact = np.exp(0.4j * x) * (1 + 0.4j * x)
            assert eval_wdot(prof, x) == pytest.approx(exact, abs=1e-4)
        with pytest.raises(DomainViolation):
            eval_w(prof, 3.5)

    def test_bad_header(self, tmp_path):
        s = np.linspace(1, 2, 5)
        with pytest.raises(ValueError, match="header"):
            TableProfile.from_csv(self.write(tmp_path, s, s + 0j, header="s,x,y"))

    def test_not_increasing(self, tmp_path):
        s = np.array([1.0, 2.0, 2.0, 3.0, 4.0])
        with pytest.raises(ValueError, match="increasing"):
            TableProfile.from_csv(self.write(tmp_path, s, s + 0j))

    def test_through_origin(self):
        s = np.linspace(-1, 1, 11)
        with pytest.raises(ValueError, match="w = 0"):
            TableProfile(s, s + 0j)

    def test_stationary_point(self):
        s = np.linspace(-1, 1, 11)
        with pytest.raises(ValueError, match="derivative"):
            TableProfile(s, 2.0 + s**2 + 0j)


def test_adaptive_simpson_polynomial_exact():
    assert adaptive_simpson(lambda x: x**3 - 2 * x, 0.0, 2.0, 1e-12) == pytest.approx(0.0, abs=1e-14)
    assert adaptive_simpson(math.sin, 0.0, math.pi, 1e-12) == pytest.approx(2.0, abs=1e-12)
    assert adaptive_simpson(math.exp, 1.0, 0.0, 1e-12) == pytest.approx(1 - math.e, abs=1e-12)
