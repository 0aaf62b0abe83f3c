"""Closed-form mean curvature of the slices l_s inside L and inside C^n.

Vectors in C^n are stored as 2n reals with interleaved (re, im) pairs.
The flow coefficient G uses the positive convention H = -G * d/ds, so the
reduced flow reads df/dt = -G(f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotOnSphere, ParameterViolation, SingularPoint
from .profile import (
    SERIES_THRESHOLD,
    ExpanderParams,
    ExpanderProfile,
    ProfileCurve,
    eval_w,
    eval_wdot,
)

UNIT_TOL = 1e-12
SPHERE_TOL = 1e-10


def embed(z) -> np.ndarray:
    """Complex n-vector -> interleaved real 2n-vector."""
    z = np.asarray(z, dtype=complex)
    return np.column_stack([z.real, z.imag]).ravel()


def unembed(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[0::2] + 1j * v[1::2]


def as_sphere_point(x, tol: float = UNIT_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or abs(float(x @ x) - 1.0) > tol:
        raise NotOnSphere(f"x must be a unit vector, |x|^2 = {float(x @ x)!r}")
    return x


def expander_coefficient(params: ExpanderParams, s: float) -> float:
    """G(s) = (n-1) (E(1+as^2)^n - exp(-alpha s^2)) / (s E (1+as^2)^n).

    Evaluated as (n-1) (Q-1) / (s Q) with Q = E (1+as^2)^n exp(alpha s^2),
    which is the same quotient without the cancellation at small s. For
    E = 1 and s below ``SERIES_THRESHOLD`` the leading series term
    (n-1)(na + alpha) s is returned; G(0) = 0 there.
    """
    s = float(s)
    if s < 0.0:
        raise ParameterViolation("expander coefficient needs s >= 0")
    if params.E == 1.0 and s < SERIES_THRESHOLD:
        return (params.n - 1) * params.series_rate * s
    if s == 0.0:
        raise SingularPoint("G diverges at s = 0 when E > 1")
    q1 = params.radicand(s)
    return (params.n - 1) * q1 / (s * (1.0 + q1))


def flow_coefficient(profile: ProfileCurve, s: float) -> float:
    """(n-1) Re(conj(w) w') / (|w|^2 |w'|^2) assembled from w and w'."""
    if isinstance(profile, ExpanderProfile) and profile.params.E == 1.0 and abs(s) < SERIES_THRESHOLD:
        p = profile.params
        return (p.n - 1) * p.series_rate * float(s)
    w = eval_w(profile, s)
    wd = eval_wdot(profile, s)
    speed2 = wd.real**2 + wd.imag**2
    if speed2 == 0.0:
        raise SingularPoint(f"w'(s) = 0 at s = {s!r}")
    mod2 = w.real**2 + w.imag**2
    return (profile.n - 1) * (w.conjugate() * wd).real / (mod2 * speed2)


def coefficient_function(profile: ProfileCurve):
    """Scalar G for the flow: the simplified form for expanders, generic otherwise."""
    if isinstance(profile, ExpanderProfile):
        params = profile.params
        return lambda s: expander_coefficient(params, s)
    return lambda s: flow_coefficient(profile, s)


@dataclass(frozen=True)
class CurvatureSample:
    s: float
    x: np.ndarray
    coefficient: float
    H: np.ndarray
    ds_vector: np.ndarray


def mean_curvature_in_L(profile: ProfileCurve, s: float, x) -> CurvatureSample:
    """Mean curvature vector of l_s in L at the point x * w(s)."""
    x = as_sphere_point(x)
    if x.size != profile.n:
        raise ValueError(f"x has dimension {x.size}, profile has n = {profile.n}")
    coeff = flow_coefficient(profile, s)
    ds = embed(x * eval_wdot(profile, s))
    H = -coeff * ds if coeff != 0.0 else np.zeros_like(ds)
    return CurvatureSample(float(s), x, coeff, H, ds)


def ambient_sphere_mean_curvature(scale: complex, n: int, p) -> np.ndarray:
    """Mean curvature in C^n of S = {scale * x : x in S^{n-1}} at p: -(n-1) p / |scale|^2."""
    scale = complex(scale)
    if scale == 0:
        raise ParameterViolation("scale must be nonzero")
    p = np.asarray(p, dtype=float)
    if p.shape != (2 * n,):
        raise NotOnSphere(f"p must have {2 * n} real entries")
    x = unembed(p) / scale
    if np.max(np.abs(x.imag)) > SPHERE_TOL or abs(float(np.sum(x.real**2)) - 1.0) > SPHERE_TOL:
        raise NotOnSphere("p is not on the scaled unit sphere")
    return -(n - 1) / abs(scale) ** 2 * p


def small_s_limit_scalar(params: ExpanderParams) -> complex:
    """-(n-1) sqrt(a) (E - 1 + i sqrt(E - 1)) / E, the s -> 0+ limit factor for E > 1."""
    if not params.E > 1.0:
        raise ParameterViolation("small-s limit requires E > 1")
    d = params.E - 1.0
    return -(params.n - 1) * math.sqrt(params.a) * complex(d, math.sqrt(d)) / params.E


def small_s_limit_vector(params: ExpanderParams, x) -> np.ndarray:
    x = as_sphere_point(x)
    return embed(small_s_limit_scalar(params) * x)


def rotate_blockwise(R, v) -> np.ndarray:
    """Apply a real n x n matrix to each of the real/imaginary coordinate vectors."""
    return embed(np.asarray(R) @ unembed(v))
