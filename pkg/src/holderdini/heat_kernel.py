"""Anisotropic time-inhomogeneous Gaussian kernel and its covariance bookkeeping.

For a diffusion matrix ``a(t)`` the kernel from time ``r`` to ``t > r`` is the
centred Gaussian density with covariance ``A = int_r^t a``::

    K(r, t, x) = (2 pi)^(-n/2) det(B)^(1/2) exp(-(Bx, x)/2),   B = A^(-1).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import IllConditionedError, InvalidSpecError, OrderingError, TruncationWarning

# time gaps below this are treated as a point mass
POINT_MASS_GAP = 1e-12


@dataclass(frozen=True, eq=False)
class DiffusionSpec:
    """Diffusion coefficient ``a``.

    ``a_time(t)`` returns the space-independent ``n x n`` matrix. For the drifted
    solver a space-dependent ``a_space(t, x)`` (``x`` of shape ``(..., n)``, output
    ``(..., n, n)``) may be supplied; ``a_time`` is then the frozen part that the
    heat kernel uses.
    """

    n: int
    a_time: Callable[[float], np.ndarray]
    Gamma: float = 1.0
    a_space: Optional[Callable] = None
    constant_matrix: Optional[np.ndarray] = None
    name: str = "custom"

    @classmethod
    def identity(cls, n: int = 1) -> "DiffusionSpec":
        eye = np.eye(n)
        return cls(n=n, a_time=lambda t: eye, Gamma=1.0, constant_matrix=eye, name="identity")

    @classmethod
    def constant(cls, matrix, Gamma: Optional[float] = None) -> "DiffusionSpec":
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if Gamma is None:
            ev = np.linalg.eigvalsh(0.5 * (m + m.T))
            Gamma = max(ev.max(), 1.0 / ev.min()) if ev.min() > 0 else math.inf
        spec = cls(n=m.shape[0], a_time=lambda t: m, Gamma=float(Gamma), constant_matrix=m, name="constant")
        spec.check_ellipticity()
        return spec

    @classmethod
    def linear(cls, a0, a1, Gamma: Optional[float] = None, T: float = 1.0) -> "DiffusionSpec":
        """``a(t) = a0 + a1 t``."""
        a0 = np.atleast_2d(np.asarray(a0, dtype=float))
        a1 = np.atleast_2d(np.asarray(a1, dtype=float))
        if Gamma is None:
            Gamma = _gamma_from_samples([a0 + a1 * t for t in np.linspace(0.0, T, 33)])
        spec = cls(n=a0.shape[0], a_time=lambda t: a0 + a1 * t, Gamma=float(Gamma), name="linear")
        spec.check_ellipticity(T)
        return spec

    @classmethod
    def space_dependent(cls, a_space, a_time, n: int, Gamma: float) -> "DiffusionSpec":
        spec = cls(n=n, a_time=a_time, Gamma=float(Gamma), a_space=a_space, name="space")
        spec.check_ellipticity()
        return spec

    def is_constant(self) -> bool:
        return self.constant_matrix is not None

    def check_ellipticity(self, T: float = 1.0, points=None) -> None:
        """Raise if ``Gamma^-1 <= xi' a xi <= Gamma`` fails on sampled times (and points)."""
        lo, hi = 1.0 / self.Gamma - 1e-12, self.Gamma + 1e-12
        for t in np.linspace(0.0, T, 17):
            ev = np.linalg.eigvalsh(np.atleast_2d(self.a_time(t)))
            if ev.min() < lo or ev.max() > hi:
                raise InvalidSpecError(f"a(t) at t={t:.3g} violates ellipticity with Gamma={self.Gamma}")
        if self.a_space is not None:
            if points is None:
                points = np.linspace(-4.0, 4.0, 33)[:, None] * np.ones((1, self.n))
            for t in np.linspace(0.0, T, 9):
                ev = np.linalg.eigvalsh(np.asarray(self.a_space(t, points)))
                if ev.min() < lo or ev.max() > hi:
                    raise InvalidSpecError(f"a(t,x) at t={t:.3g} violates ellipticity with Gamma={self.Gamma}")


def _gamma_from_samples(mats):
    lo, hi = math.inf, 0.0
    for m in mats:
        ev = np.linalg.eigvalsh(0.5 * (m + m.T))
        lo, hi = min(lo, ev.min()), max(hi, ev.max())
    if lo <= 0:
        raise InvalidSpecError("diffusion matrix is not positive definite")
    return max(hi, 1.0 / lo)


@dataclass(frozen=True)
class CovariancePair:
    A: np.ndarray
    B: np.ndarray
    r: float
    t: float


def accumulated_matrix(spec: DiffusionSpec, r: float, t: float) -> np.ndarray:
    """``int_r^t a(tau) dtau`` by composite Simpson (exact for constant ``a``)."""
    if spec.is_constant():
        return (t - r) * spec.constant_matrix
    panels = 2 * max(1, int(math.ceil(32.0 * (t - r))))
    nodes = np.linspace(r, t, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = (t - r) / panels
    vals = np.array([np.atleast_2d(spec.a_time(s)) for s in nodes])
    return np.tensordot(w, vals, axes=1) * h / 3.0


def accumulate(spec: DiffusionSpec, r: float, t: float) -> CovariancePair:
    if not t > r:
        raise OrderingError(f"need r < t, got r={r}, t={t}")
    A = accumulated_matrix(spec, r, t)
    A = 0.5 * (A + A.T)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditionedError(f"A_(r,t) has condition number {cond:.3g}")
    B = np.linalg.inv(A)
    return CovariancePair(A=A, B=B, r=float(r), t=float(t))


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != n:
        raise ValueError(f"points must have trailing dimension {n}")
    return x


def kernel(spec: DiffusionSpec, r: float, t: float, x):
    """Kernel density at points ``x`` (trailing axis = dimension); zero when ``t <= r``."""
    x = _as_points(x, spec.n)
    if t <= r:
        return np.zeros(x.shape[:-1])
    pair = accumulate(spec, r, t)
    return _density(pair.B, x)


def _density(B, x):
    n = B.shape[0]
    q = np.einsum("...i,ij,...j->...", x, B, x)
    return (2.0 * math.pi) ** (-n / 2.0) * math.sqrt(np.linalg.det(B)) * np.exp(-0.5 * q)


def kernel_derivatives(spec: DiffusionSpec, r: float, t: float, x, order: int):
    """Gradient (``order=1``, shape ``(..., n)``) or Hessian (``order=2``, ``(..., n, n)``)."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    x = _as_points(x, spec.n)
    n = spec.n
    if t <= r:
        shape = x.shape if order == 1 else x.shape + (n,)
        return np.zeros(shape)
    B = accumulate(spec, r, t).B
    k = _density(B, x)
    bx = x @ B.T
    if order == 1:
        return -k[..., None] * bx
    return k[..., None, None] * (bx[..., :, None] * bx[..., None, :] - B)


def kernel_mass(spec: DiffusionSpec, r: float, t: float, L: float = 8.0, N: int = 512,
                refine: bool = True) -> float:
    """Riemann sum of the kernel over ``[-L, L)^n`` with ``N`` points per axis.

    With ``refine`` the sum is taken on a sub-box and sub-grid fine enough to
    resolve a sharp kernel (spacing at most half the smallest standard deviation).
    """
    if t <= r:
        return 0.0
    pair = accumulate(spec, r, t)
    ev = np.linalg.eigvalsh(pair.A)
    sd_min, sd_max = math.sqrt(ev.min()), math.sqrt(ev.max())
    half, count = L, N
    if refine:
        half = min(L, 14.0 * sd_max)
        dx = min(2.0 * L / N, 0.5 * sd_min)
        count = max(16, int(2 ** math.ceil(math.log2(2.0 * half / dx))))
    axis = -half + (2.0 * half / count) * np.arange(count)
    mesh = np.stack(np.meshgrid(*([axis] * spec.n), indexing="ij"), axis=-1)
    mass = float(np.sum(_density(pair.B, mesh)) * (2.0 * half / count) ** spec.n)
    if 1.0 - mass > 1e-3:
        warnings.warn(f"box [-{L}, {L}] loses kernel mass {1.0 - mass:.3g}", TruncationWarning)
    return mass
