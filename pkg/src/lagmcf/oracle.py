"""Finite-difference mean curvature of l_s, computed from the embedding alone.

F(s, u) = x(u) * w(s) in C^n = R^{2n}, where x(u) is an orthographic chart of
S^{n-1} centred at ``base_x``. The ambient mean curvature of l_s is the trace
g^{ij} (d_ij F)^perp; its mean curvature inside L is the orthogonal projection
of that vector onto T_p L. No closed-form curvature expression is used.

Second differences are taken of the displacement F(s, u) - F(s, 0), written
so that the constant part never has to cancel in floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .curvature import as_sphere_point, embed
from .errors import NonOrthonormalBasis, RankDeficient
from .profile import ProfileCurve, eval_w, eval_wdot

PIVOT_TOL = 1e-8
ORTHO_TOL = 1e-8
FD_STEP_RANGE = (1e-7, 1e-3)


def _rotation_to(x: np.ndarray) -> np.ndarray:
    """Proper rotation Q with Q e_1 = x (Householder reflection times a flip)."""
    n = x.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    v = e1 - x
    if v @ v < 1e-30:
        return np.eye(n)
    Q = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    # a reflection has det -1; flipping a column orthogonal to e_1 fixes that
    Q[:, -1] *= -1.0
    return Q


@dataclass(frozen=True, eq=False)
class EmbeddingChart:
    profile: ProfileCurve
    base_x: np.ndarray
    fd_step: float = 1e-5
    rotation: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        x = as_sphere_point(self.base_x)
        if x.size != self.profile.n:
            raise ValueError("base_x dimension does not match profile n")
        lo, hi = FD_STEP_RANGE
        if not lo <= self.fd_step <= hi:
            raise ValueError(f"fd_step must lie in [{lo}, {hi}]")
        object.__setattr__(self, "base_x", x)
        object.__setattr__(self, "rotation", _rotation_to(x))

    @property
    def n(self) -> int:
        return self.profile.n

    def sphere_point(self, u) -> np.ndarray:
        return self.base_x + self.displacement(u)

    def displacement(self, u) -> np.ndarray:
        """x(u) - x(0) for x(u) = Q (sqrt(1 - |u|^2), u)."""
        u = np.asarray(u, dtype=float)
        uu = float(u @ u)
        local = np.concatenate([[-uu / (1.0 + np.sqrt(1.0 - uu))], u])
        return self.rotation @ local


@dataclass(frozen=True)
class FrameAtPoint:
    tangent_ls: np.ndarray  # (n-1, 2n), orthonormal rows
    tangent_L: np.ndarray  # (n, 2n), first n-1 rows equal tangent_ls
    point: np.ndarray


def gram_schmidt(vectors, basis=None) -> np.ndarray:
    """Modified Gram-Schmidt with one reorthogonalisation pass.

    Extends the orthonormal rows of ``basis`` (if given) by ``vectors``.
    """
    out = [] if basis is None else [np.asarray(b, dtype=float) for b in basis]
    for v in np.atleast_2d(np.asarray(vectors, dtype=float)):
        norm0 = np.linalg.norm(v)
        r = v.copy()
        for _ in range(2):
            for q in out:
                r -= (q @ r) * q
        norm = np.linalg.norm(r)
        if norm0 == 0.0 or norm < PIVOT_TOL * norm0:
            raise RankDeficient(f"pivot {norm:.3e} relative to {norm0:.3e}")
        out.append(r / norm)
    return np.array(out)


def _derivatives(chart: EmbeddingChart, s: float):
    """Central differences of F in u: first (n-1, 2n) and second (n-1, n-1, 2n)."""
    h = chart.fd_step
    m = chart.n - 1
    w = eval_w(chart.profile, s)
    eye = np.eye(m)

    def D(u):
        return embed(chart.displacement(u) * w)

    first = np.empty((m, 2 * chart.n))
    second = np.empty((m, m, 2 * chart.n))
    for i in range(m):
        fp, fm = D(h * eye[i]), D(-h * eye[i])
        first[i] = (fp - fm) / (2.0 * h)
        second[i, i] = (fp + fm) / (h * h)
    for i, j in itertools.combinations(range(m), 2):
        ei, ej = h * eye[i], h * eye[j]
        mixed = (D(ei + ej) - D(ei - ej) - D(ej - ei) + D(-ei - ej)) / (4.0 * h * h)
        second[i, j] = second[j, i] = mixed
    point = embed(chart.base_x * w)
    return point, first, second


def _frame(chart: EmbeddingChart, s: float, point, first) -> FrameAtPoint:
    tangent_ls = gram_schmidt(first)
    # the s-direction uses the profile's own derivative; no curvature formula
    ds = embed(chart.base_x * eval_wdot(chart.profile, s))
    tangent_L = gram_schmidt(ds, basis=tangent_ls)
    return FrameAtPoint(tangent_ls, tangent_L, point)


def build_frame(chart: EmbeddingChart, s: float) -> FrameAtPoint:
    point, first, _ = _derivatives(chart, s)
    return _frame(chart, s, point, first)


def _ambient(first, second, tangent_ls) -> np.ndarray:
    metric = first @ first.T
    inv = np.linalg.inv(metric)
    normal = second - np.einsum("ijk,lk,lm->ijm", second, tangent_ls, tangent_ls)
    return np.einsum("ij,ijk->k", inv, normal)


def ambient_mean_curvature_fd(chart: EmbeddingChart, s: float) -> np.ndarray:
    """Mean curvature vector of l_s in C^n at base_x * w(s)."""
    point, first, second = _derivatives(chart, s)
    frame = _frame(chart, s, point, first)
    return _ambient(first, second, frame.tangent_ls)


def project_onto_span(basis, v) -> np.ndarray:
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    gram = basis @ basis.T
    if np.max(np.abs(gram - np.eye(len(basis)))) > ORTHO_TOL:
        raise NonOrthonormalBasis("basis rows are not orthonormal")
    v = np.asarray(v, dtype=float)
    return basis.T @ (basis @ v)


@dataclass(frozen=True)
class OracleResult:
    frame: FrameAtPoint
    H_ambient: np.ndarray
    H: np.ndarray


def oracle_evaluate(chart: EmbeddingChart, s: float) -> OracleResult:
    """One pass computing the frame, ambient curvature and its projection."""
    point, first, second = _derivatives(chart, s)
    frame = _frame(chart, s, point, first)
    Hbar = _ambient(first, second, frame.tangent_ls)
    return OracleResult(frame, Hbar, project_onto_span(frame.tangent_L, Hbar))


def oracle_mean_curvature_in_L(chart: EmbeddingChart, s: float) -> np.ndarray:
    return oracle_evaluate(chart, s).H


def random_sphere_point(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    # renormalise once more so |x|^2 = 1 holds to the last bits
    return x / np.sqrt(x @ x)
