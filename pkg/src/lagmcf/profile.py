"""Profile curves w: I -> C \\ {0} generating L = union of x * w(s), |x| = 1.

Values of w and its derivative are carried as Python ``complex``.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainViolation, NonFiniteIntegrand, ParameterViolation
from .quadrature import adaptive_simpson

# below this |t| the E = 1 phase integrand is replaced by its limit
SERIES_THRESHOLD = 1e-8
DEFAULT_QUAD_TOL = 1e-12
DEFAULT_S_MAX = 10.0


@dataclass(frozen=True)
class ExpanderParams:
    """Constants of the expander family: scale ``a``, ``E``, ``alpha``, ``n``."""

    a: float
    E: float
    alpha: float
    n: int

    def __post_init__(self) -> None:
        for name in ("a", "E", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterViolation(f"{name} must be finite")
        if not self.a > 0.0:
            raise ParameterViolation(f"a must be > 0, got {self.a}")
        if not self.E >= 1.0:
            raise ParameterViolation(f"E must be >= 1, got {self.E}")
        if not self.alpha >= 0.0:
            raise ParameterViolation(f"alpha must be >= 0, got {self.alpha}")
        if int(self.n) != self.n or self.n < 2:
            raise ParameterViolation(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def series_rate(self) -> float:
        """Coefficient ``n*a + alpha`` of the leading t**2 term of Q(t) - 1."""
        return self.n * self.a + self.alpha

    def radicand(self, t: float) -> float:
        """``E (1 + a t^2)^n exp(alpha t^2) - 1`` without cancellation."""
        t2 = t * t
        return math.expm1(math.log(self.E) + self.n * math.log1p(self.a * t2) + self.alpha * t2)


def phase_rate(params: ExpanderParams, t: float) -> float:
    """Integrand of the phase, t / ((1/a + t^2) sqrt(radicand(t))), for t >= 0."""
    if params.E == 1.0 and t < SERIES_THRESHOLD:
        return params.a / math.sqrt(params.series_rate)
    q = params.radicand(t)
    if not (q > 0.0 and math.isfinite(q)):
        if t == 0.0 and q == 0.0:
            # only reachable for E == 1, handled above
            raise NonFiniteIntegrand("0/0 at t = 0")
        raise NonFiniteIntegrand(f"radicand {q!r} at t = {t!r}")
    return t / ((1.0 / params.a + t * t) * math.sqrt(q))


_FINE_STEP = 0.125
_FINE_COUNT = 16
_GROWTH = 1.25


def _knot(k: int) -> float:
    if k <= _FINE_COUNT:
        return k * _FINE_STEP
    return _FINE_COUNT * _FINE_STEP * _GROWTH ** (k - _FINE_COUNT)


def _knot_index(s: float) -> int:
    if s <= _FINE_COUNT * _FINE_STEP:
        k = int(s / _FINE_STEP)
    else:
        k = _FINE_COUNT + int(math.log(s / (_FINE_COUNT * _FINE_STEP)) / math.log(_GROWTH))
    while _knot(k + 1) <= s:
        k += 1
    while _knot(k) > s:
        k -= 1
    return k


class _PhaseTable:
    """Cumulative phase integrals on a fixed knot grid.

    Segment k is integrated with budget ``tol * 6 / (pi^2 (k+1)^2)`` so any
    prefix of segments plus one partial segment stays within ``tol``.
    """

    def __init__(self, params: ExpanderParams, tol: float):
        self.params = params
        self.tol = tol
        self._cum = [0.0]
        self._lock = threading.Lock()

    def _budget(self, k: int) -> float:
        return self.tol * 6.0 / (math.pi**2 * (k + 1) ** 2)

    def _integrand(self, t: float) -> float:
        return phase_rate(self.params, t)

    def cumulative(self, k: int) -> float:
        with self._lock:
            while len(self._cum) <= k:
                j = len(self._cum) - 1
                seg = adaptive_simpson(self._integrand, _knot(j), _knot(j + 1), self._budget(j))
                self._cum.append(self._cum[-1] + seg)
            return self._cum[k]

    def __call__(self, s: float) -> float:
        k = _knot_index(s)
        base = self.cumulative(k)
        lo = _knot(k)
        if s == lo:
            return base
        full = self.cumulative(k + 1) - base
        part = adaptive_simpson(self._integrand, lo, s, self._budget(k))
        # positive integrand: the partial segment lies between 0 and the full one
        return base + min(max(part, 0.0), full)


@lru_cache(maxsize=128)
def _phase_table(params: ExpanderParams, quad_tol: float) -> _PhaseTable:
    return _PhaseTable(params, quad_tol)


def phi_E(params: ExpanderParams, s: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Phase of the expander profile, the integral of ``phase_rate`` over [0, s].

    Absolute error is at most ``quad_tol``. Results are memoised per
    ``(params, quad_tol)`` on a knot grid, so repeated calls only integrate
    the last partial segment.
    """
    if not quad_tol > 0.0:
        raise ValueError("quad_tol must be positive")
    if not s >= 0.0 or not math.isfinite(s):
        raise DomainViolation(f"phi_E needs s >= 0, got {s!r}")
    if s == 0.0:
        return 0.0
    return _phase_table(params, float(quad_tol))(float(s))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __contains__(self, s: float) -> bool:
        if not (math.isfinite(s)):
            return False
        above = s > self.lo or (self.lo_closed and s == self.lo)
        below = s < self.hi or (self.hi_closed and s == self.hi)
        return above and below


class ProfileCurve:
    """Base class: subclasses provide ``_w``, ``_wdot``, ``n`` and ``domain``."""

    kind: str = "abstract"
    n: int
    domain: Interval

    def _w(self, s: float) -> complex:
        raise NotImplementedError

    def _wdot(self, s: float) -> complex:
        raise NotImplementedError

    def check(self, s: float) -> float:
        s = float(s)
        if s not in self.domain:
            raise DomainViolation(f"s = {s!r} outside {self.kind} domain {self.domain}")
        return s


@dataclass(frozen=True, eq=False)
class ExpanderProfile(ProfileCurve):
    """r(s) exp(i phi_E(s)) with r(s) = sqrt(1/a + s^2).

    ``two_sided`` extends the curve to [-s_max, s_max] with an even phase
    integrand, i.e. an odd phase and w(-s) = conj(w(s)). Only valid for E = 1,
    where the curve is smooth through s = 0.
    """

    params: ExpanderParams
    s_max: float = DEFAULT_S_MAX
    two_sided: bool = False
    quad_tol: float = DEFAULT_QUAD_TOL
    kind: str = field(default="expander", init=False)

    def __post_init__(self) -> None:
        if not self.s_max > 0.0:
            raise ParameterViolation("s_max must be > 0")
        if self.two_sided and self.params.E != 1.0:
            raise ParameterViolation("two-sided expander profile requires E = 1")

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.params.n

    @property
    def domain(self) -> Interval:  # type: ignore[override]
        return Interval(-self.s_max if self.two_sided else 0.0, self.s_max)

    def r(self, s: float) -> float:
        return math.sqrt(1.0 / self.params.a + s * s)

    def phi(self, s: float) -> float:
        value = phi_E(self.params, abs(s), self.quad_tol)
        return -value if s < 0 else value

    def _w(self, s: float) -> complex:
        r, ph = self.r(s), self.phi(s)
        return complex(r * math.cos(ph), r * math.sin(ph))

    def _wdot(self, s: float) -> complex:
        r, ph = self.r(s), self.phi(s)
        radial = s / r
        angular = r * phase_rate(self.params, abs(s))
        return complex(radial, angular) * complex(math.cos(ph), math.sin(ph))


@dataclass(frozen=True, eq=False)
class LineProfile(ProfileCurve):
    """w(s) = s on (0, s_max]; l_s is the round sphere of radius s in R^n."""

    n: int = 2
    s_max: float = math.inf
    kind: str = field(default="line", init=False)

    def __post_init__(self) -> None:
        _check_n(self.n)

    @property
    def domain(self) -> Interval:  # type: ignore[override]
        return Interval(0.0, self.s_max, lo_closed=False)

    def _w(self, s: float) -> complex:
        return complex(s, 0.0)

    def _wdot(self, s: float) -> complex:
        return complex(1.0, 0.0)


@dataclass(frozen=True, eq=False)
class CircleProfile(ProfileCurve):
    """w(s) = exp(i s); every slice has |w| = 1 and is stationary."""

    n: int = 2
    kind: str = field(default="circle", init=False)

    def __post_init__(self) -> None:
        _check_n(self.n)

    @property
    def domain(self) -> Interval:  # type: ignore[override]
        return Interval(-math.inf, math.inf, False, False)

    def _w(self, s: float) -> complex:
        return complex(math.cos(s), math.sin(s))

    def _wdot(self, s: float) -> complex:
        return complex(-math.sin(s), math.cos(s))


class TableProfile(ProfileCurve):
    """Tabulated profile interpolated by a cubic spline in each component."""

    kind = "table"
    min_modulus = 1e-12

    def __init__(self, s, w, n: int = 2):
        _check_n(n)
        s = np.asarray(s, dtype=float)
        w = np.asarray(w, dtype=complex)
        if s.ndim != 1 or s.shape != w.shape or s.size < 4:
            raise ValueError("need matching 1-d arrays with at least 4 nodes")
        if not np.all(np.diff(s) > 0):
            raise ValueError("s column must be strictly increasing")
        self.n = int(n)
        self.nodes = s
        self.domain = Interval(float(s[0]), float(s[-1]))
        self._re = CubicSpline(s, w.real)
        self._im = CubicSpline(s, w.imag)
        mids = 0.5 * (s[1:] + s[:-1])
        grid = np.sort(np.concatenate([s, mids]))
        if np.min(np.abs(self._re(grid) + 1j * self._im(grid))) < self.min_modulus:
            raise ValueError("tabulated profile passes through w = 0")
        if np.min(np.abs(self._re(grid, 1) + 1j * self._im(grid, 1))) < self.min_modulus:
            raise ValueError("tabulated profile has a vanishing derivative")

    @classmethod
    def from_csv(cls, path: str | Path, n: int = 2) -> "TableProfile":
        """Read a ``s,re_w,im_w`` CSV file."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != [
                "s",
                "re_w",
                "im_w",
            ]:
                raise ValueError(f"{path}: header must be 's,re_w,im_w'")
            rows = [(float(r["s"]), float(r["re_w"]), float(r["im_w"])) for r in reader]
        arr = np.array(rows, dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], n=n)

    def _w(self, s: float) -> complex:
        return complex(float(self._re(s)), float(self._im(s)))

    def _wdot(self, s: float) -> complex:
        return complex(float(self._re(s, 1)), float(self._im(s, 1)))


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise ParameterViolation(f"n must be an integer >= 2, got {n}")


def eval_w(profile: ProfileCurve, s: float) -> complex:
    return profile._w(profile.check(s))


def eval_wdot(profile: ProfileCurve, s: float) -> complex:
    """Analytic derivative dw/ds (one-sided at a closed domain endpoint)."""
    return profile._wdot(profile.check(s))


def make_profile(preset: str, params: ExpanderParams | None = None, n: int | None = None, **kw) -> ProfileCurve:
    """Build a preset profile by name: ``expander``, ``line`` or ``circle``."""
    if preset == "expander":
        if params is None:
            raise ParameterViolation("expander preset needs ExpanderParams")
        return ExpanderProfile(params, **kw)
    dim = n if n is not None else (params.n if params is not None else 2)
    if preset == "line":
        return LineProfile(dim, **kw)
    if preset == "circle":
        return CircleProfile(dim)
    raise ParameterViolation(f"unknown preset {preset!r}")


__all__ = [
    "CircleProfile",
    "ExpanderParams",
    "ExpanderProfile",
    "Interval",
    "LineProfile",
    "ProfileCurve",
    "TableProfile",
    "eval_w",
    "eval_wdot",
    "make_profile",
    "phase_rate",
    "phi_E",
]
