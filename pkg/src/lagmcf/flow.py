"""Reduced mean curvature flow df/dt = -G(f) of the slices l_f.

The integrator is the Dormand-Prince 5(4) pair with PI step control and
cubic Hermite dense output. Two ends are handled specially:

* profiles whose G vanishes linearly at 0 (expanders with E = 1) switch to
  the exact linearised solution once f < ``NEAR_ZERO``;
* profiles that reach 0 in finite time stop at f <= f_min, or when the step
  floor is hit with the extinction clearly imminent. The extinction time is
  extrapolated from the last three (t, f^2) samples.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .curvature import coefficient_function
from .errors import InsufficientTail, ParameterViolation, StepSizeUnderflow
from .profile import ExpanderParams, ExpanderProfile, ProfileCurve

DT_FLOOR = 1e-14
NEAR_ZERO = 1e-6
# time-to-extinction below which a step underflow counts as extinction
EXTINCTION_HORIZON = 1e-8
# ... and f must be this small (times max(1, f0)), so blow-up elsewhere is not mistaken for it
EXTINCTION_LEVEL = 1e-4
TAIL_LEVEL = 0.1
ANALYTIC_SAMPLES = 200
# the linearised tail stops before f leaves the normal float range
F_FLOOR = 1e-300

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6] + (0.0,)
_B_LOW = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b - bl for b, bl in zip(_B, _B_LOW))


@dataclass(frozen=True)
class FlowConfig:
    f0: float
    t_end: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    f_min: float = 1e-8
    max_samples: int = 10_000

    def __post_init__(self) -> None:
        if not (self.f0 > 0.0 and math.isfinite(self.f0)):
            raise ParameterViolation("f0 must be a positive real")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ParameterViolation("t_end must be a positive real")
        for name in ("rel_tol", "abs_tol"):
            if not 0.0 < getattr(self, name) <= 1e-2:
                raise ParameterViolation(f"{name} must lie in (0, 1e-2]")
        if not self.f_min > 0.0:
            raise ParameterViolation("f_min must be positive")
        if self.max_samples < 2:
            raise ParameterViolation("max_samples must be >= 2")


class Termination(enum.Enum):
    REACHED_T_END = "reached_t_end"
    EXTINCTION = "extinction"
    CONVERGED_TO_ZERO = "converged_to_zero"


@dataclass(frozen=True)
class FlowTrace:
    t: np.ndarray
    f: np.ndarray
    dfdt: np.ndarray
    termination: Termination
    # extinction time estimate or decay rate, depending on termination
    termination_value: float | None = None
    steps_accepted: int = 0
    steps_rejected: int = 0

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.f.tolist()))

    @property
    def extinction_time(self) -> float | None:
        return self.termination_value if self.termination is Termination.EXTINCTION else None

    def __call__(self, t):
        """Cubic Hermite interpolant of f between stored samples."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0]) or np.any(t > self.t[-1]):
            raise ValueError("dense output requested outside the trace")
        k = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[k], self.t[k + 1]
        h = t1 - t0
        x = (t - t0) / h
        h00 = (1 + 2 * x) * (1 - x) ** 2
        h10 = x * (1 - x) ** 2
        h01 = x * x * (3 - 2 * x)
        h11 = x * x * (x - 1)
        return h00 * self.f[k] + h10 * h * self.dfdt[k] + h01 * self.f[k + 1] + h11 * h * self.dfdt[k + 1]

    def to_dict(self) -> dict:
        return {
            "termination": {"kind": self.termination.value, "value": self.termination_value},
            "samples": [{"t": t, "f": f} for t, f in self.samples],
        }


def linear_rate(profile: ProfileCurve) -> float | None:
    """lim G(f)/f as f -> 0 when finite and positive, else None."""
    if isinstance(profile, ExpanderProfile) and profile.params.E == 1.0:
        p = profile.params
        return (p.n - 1) * p.series_rate
    return None


def _extrapolate_extinction(ts, fs) -> float:
    """Zero of the quadratic through the last three (t, f^2) points."""
    t = np.asarray(ts[-3:], dtype=float)
    y = np.asarray(fs[-3:], dtype=float) ** 2
    tl = t[-1]
    if len(t) == 3:
        c2, c1, c0 = np.polyfit(t - tl, y, 2)
        if c2 != 0.0:
            disc = c1 * c1 - 4 * c2 * c0
            if disc >= 0.0:
                roots = [(-c1 + sgn * math.sqrt(disc)) / (2 * c2) for sgn in (1.0, -1.0)]
                ahead = [r for r in roots if r >= 0.0]
                if ahead:
                    return float(tl + min(ahead))
    slope = (y[-1] - y[-2]) / (t[-1] - t[-2])
    return float(tl - y[-1] / slope) if slope < 0 else math.inf


def _thin(t, f, d, max_samples):
    if len(t) <= max_samples:
        return t, f, d
    targets = np.linspace(t[0], t[-1], max_samples)
    idx = np.unique(np.clip(np.searchsorted(t, targets), 0, len(t) - 1))
    idx = np.union1d(idx, [0, len(t) - 1])
    return t[idx], f[idx], d[idx]


def integrate_flow(profile: ProfileCurve, cfg: FlowConfig) -> FlowTrace:
    """Integrate df/dt = -G(f) from f(0) = cfg.f0 up to cfg.t_end."""
    if cfg.f0 not in profile.domain:
        raise ParameterViolation(f"f0 = {cfg.f0} outside the profile domain")
    G = coefficient_function(profile)
    rate0 = linear_rate(profile)
    domain = profile.domain

    def rhs(f: float) -> float:
        return -G(f)

    t, f = 0.0, float(cfg.f0)
    k1 = rhs(f)
    ts, fs, ds = [t], [f], [k1]
    if k1 == 0.0:
        dt = min(cfg.t_end, 1e-3)
    else:
        dt = min(cfg.t_end, 0.01 * f / abs(k1))
    err_prev = 1.0
    accepted = rejected = 0
    termination, value = Termination.REACHED_T_END, None

    while t < cfg.t_end:
        remaining = cfg.t_end - t
        if dt >= remaining or remaining - dt < DT_FLOOR:
            dt = remaining
        elif dt < DT_FLOOR:
            eta = _extrapolate_extinction(ts, fs) if len(ts) >= 2 else math.inf
            near_zero = domain.lo == 0.0 and f <= EXTINCTION_LEVEL * max(1.0, cfg.f0)
            if rate0 is None and near_zero and eta - t <= EXTINCTION_HORIZON:
                termination, value = Termination.EXTINCTION, eta
                break
            raise StepSizeUnderflow(f"dt = {dt:.3e} at t = {t!r}, f = {f!r}")

        k = [k1]
        ok = True
        for i in range(1, 7):
            fi = f + dt * sum(a * kj for a, kj in zip(_A[i], k))
            if not (fi > 0.0 and fi in domain):
                ok = False
                break
            ki = rhs(fi)
            if not math.isfinite(ki):
                ok = False
                break
            k.append(ki)
        if not ok:
            rejected += 1
            dt *= 0.25
            continue

        f_new = f + dt * sum(b * kj for b, kj in zip(_B, k))
        err_est = dt * sum(e * kj for e, kj in zip(_E, k))
        scale = cfg.rel_tol * max(abs(f), abs(f_new)) + cfg.abs_tol
        err = abs(err_est) / scale

        if err <= 1.0:
            accepted += 1
            # FSAL: the last stage is evaluated at f_new
            t += dt
            f, k1 = f_new, k[6]
            ts.append(t)
            fs.append(f)
            ds.append(k1)
            if err == 0.0:
                factor = 5.0
            else:
                factor = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5)
                factor = min(5.0, max(0.2, factor))
            err_prev = max(err, 1e-4)
            dt *= factor

            if rate0 is not None:
                if f < NEAR_ZERO and abs(-k1 / f - rate0) <= 0.01 * rate0 and t < cfg.t_end:
                    _fill_linearised(ts, fs, ds, rate0, cfg.t_end)
                    termination, value = Termination.CONVERGED_TO_ZERO, -rate0
                    break
            elif f <= cfg.f_min:
                termination, value = Termination.EXTINCTION, _extrapolate_extinction(ts, fs)
                break
        else:
            rejected += 1
            dt *= max(0.2, 0.9 * err ** (-1 / 5))

    t_arr, f_arr, d_arr = _thin(np.array(ts), np.array(fs), np.array(ds), cfg.max_samples)
    return FlowTrace(t_arr, f_arr, d_arr, termination, value, accepted, rejected)


def _fill_linearised(ts, fs, ds, rate, t_end) -> None:
    t0, f0 = ts[-1], fs[-1]
    for t in np.linspace(t0, t_end, ANALYTIC_SAMPLES + 1)[1:]:
        f = f0 * math.exp(-rate * (t - t0))
        if f < F_FLOOR:
            break
        ts.append(float(t))
        fs.append(f)
        ds.append(-rate * f)


def extinction_time_estimate(params: ExpanderParams, f0: float) -> float:
    """Leading-order extinction time E f0^2 / (2 (n-1) (E-1)) for E > 1.

    Near f = 0 the flow behaves like d(f^2)/dt = -2 (n-1) (E-1) / E.
    """
    if not params.E > 1.0:
        raise ParameterViolation("extinction estimate requires E > 1")
    if not 0.0 < f0 <= 0.1:
        raise ParameterViolation("extinction estimate needs 0 < f0 <= 0.1")
    return params.E * f0 * f0 / (2.0 * (params.n - 1) * (params.E - 1.0))


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    flat: bool = False
    tail_samples: int = 0

    def __float__(self) -> float:
        return self.rate


def decay_rate_estimate(trace: FlowTrace, min_samples: int = 10) -> DecayEstimate:
    """Least-squares slope of log f against t over the samples with f < 0.1.

    A trace with constant f is reported as rate 0 with ``flat=True``.
    """
    f = trace.f
    if np.all(f == f[0]):
        return DecayEstimate(0.0, True, len(f))
    mask = (f < TAIL_LEVEL) & (f > 0.0)
    if int(mask.sum()) < min_samples:
        raise InsufficientTail(f"{int(mask.sum())} samples below {TAIL_LEVEL}, need {min_samples}")
    slope = np.polyfit(trace.t[mask], np.log(f[mask]), 1)[0]
    return DecayEstimate(float(slope), False, int(mask.sum()))
