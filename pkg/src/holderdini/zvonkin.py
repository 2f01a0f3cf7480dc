"""Transform ``Phi(t, x) = x + V(t, x)`` with ``V(t) = U(T - t)``, its inverse and the transformed coefficients.

``V`` is interpolated cubically in time (Hermite, using ``dV/dt`` from the
equation) and multilinearly in space. ``grad V`` is interpolated linearly in
both. Outside the grid box ``V`` is extended by its boundary value and
``grad V`` by zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GradientBoundError, NonConvergenceError, OutOfDomainError
from .grid import GridSpec
from .kolmogorov import KolmogorovSolution

GRADIENT_BOUND = 0.5


def _hermite(u, h):
    u2, u3 = u * u, u * u * u
    return 2 * u3 - 3 * u2 + 1, (u3 - 2 * u2 + u) * h, -2 * u3 + 3 * u2, (u3 - u2) * h


@dataclass(frozen=True, eq=False)
class ZvonkinMap:
    """Interpolated ``V``, ``dV/dt`` and ``grad V`` on the grid of a Kolmogorov solution."""

    grid: GridSpec
    V: np.ndarray  # (M+1, *space, n)
    dVdt: np.ndarray  # (M+1, *space, n)
    gradV: np.ndarray  # (M+1, *space, n, n)
    lam: float
    lipschitz_bound: float
    grid_gradient: float
    tol: float = 1e-3
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def T(self) -> float:
        return self.grid.T

    @property
    def box(self):
        g = self.grid
        return -g.L, g.L - g.dx

    # -- interpolation --------------------------------------------------------

    def _time_cell(self, t):
        g = self.grid
        s = min(max(t / g.dt, 0.0), float(g.M))
        j = min(int(math.floor(s)), g.M - 1)
        return j, s - j

    def _space_cell(self, x):
        g = self.grid
        lo, hi = self.box
        xc = np.clip(x, lo, hi)
        s = (xc - lo) / g.dx
        i = np.clip(np.floor(s).astype(np.int64), 0, g.N - 2)
        w = s - i
        inside = np.all((x >= lo) & (x <= hi), axis=-1)
        return i, w, inside

    def _multilinear(self, arr, i, w):
        """``arr`` of shape ``(*space, ...)``; ``i``, ``w`` of shape ``(P, n)``."""
        if self.n == 1:
            i0, w0 = i[:, 0], w[:, 0]
            w0 = w0.reshape(w0.shape + (1,) * (arr.ndim - 1))
            return (1 - w0) * arr[i0] + w0 * arr[i0 + 1]
        i0, i1 = i[:, 0], i[:, 1]
        shape = (-1,) + (1,) * (arr.ndim - 2)
        a, b = w[:, 0].reshape(shape), w[:, 1].reshape(shape)
        return ((1 - a) * (1 - b) * arr[i0, i1] + a * (1 - b) * arr[i0 + 1, i1]
                + (1 - a) * b * arr[i0, i1 + 1] + a * b * arr[i0 + 1, i1 + 1])

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return x

    def value(self, t: float, x) -> np.ndarray:
        """``V(t, x)``; ``x`` of shape ``(..., n)``."""
        x = self._points(x)
        flat = x.reshape(-1, self.n)
        j, u = self._time_cell(t)
        c0, c1, c2, c3 = _hermite(u, self.grid.dt)
        col = c0 * self.V[j] + c1 * self.dVdt[j] + c2 * self.V[j + 1] + c3 * self.dVdt[j + 1]
        i, w, _ = self._space_cell(flat)
        return self._multilinear(col, i, w).reshape(x.shape[:-1] + (self.n,))

    def gradient(self, t: float, x) -> np.ndarray:
        """``grad V(t, x)`` (``[..., i, j] = d_j V_i``), zero outside the box."""
        x = self._points(x)
        flat = x.reshape(-1, self.n)
        j, u = self._time_cell(t)
        col = (1 - u) * self.gradV[j] + u * self.gradV[j + 1]
        i, w, inside = self._space_cell(flat)
        out = self._multilinear(col, i, w) * inside[:, None, None]
        return out.reshape(x.shape[:-1] + (self.n, self.n))

    def phi(self, t: float, x) -> np.ndarray:
        x = self._points(x)
        return x + self.value(t, x)

    def summary(self) -> dict:
        return {"lambda": self.lam, "lipschitz_bound": self.lipschitz_bound,
                "grid_gradient": self.grid_gradient, "tol": self.tol, "T": self.T}


def _interpolant_lipschitz(V, dVdt, grid: GridSpec) -> float:
    """Largest axis difference quotient of the space-time interpolant of ``V``.

    The interpolant is multilinear in space, so its spatial Lipschitz constant at
    a fixed time is the largest difference quotient between neighbouring knots;
    the Hermite time factor is scanned on a fine set of fractional times.
    """
    n = grid.n
    worst = np.zeros(n)
    for u in np.linspace(0.0, 1.0, 9):
        c0, c1, c2, c3 = _hermite(u, grid.dt)
        col = c0 * V[:-1] + c1 * dVdt[:-1] + c2 * V[1:] + c3 * dVdt[1:]
        for ax in range(n):
            d = np.diff(col, axis=1 + ax) / grid.dx
            # rows of the Jacobian column ``ax``: norm over components
            worst[ax] = max(worst[ax], float(np.max(np.sqrt(np.sum(d * d, axis=-1)))))
    return float(np.sqrt(np.sum(worst ** 2)))


def build_transform(sol: KolmogorovSolution, tol: float = 1e-3) -> ZvonkinMap:
    """Time-reverse ``U`` into ``V`` and certify ``sup |grad V| <= 1/2 + tol`` on the interpolant."""
    grid = sol.U.grid
    V = np.ascontiguousarray(sol.U.values[::-1])
    dVdt = np.ascontiguousarray(-sol.dUdt.values[::-1])
    gradV = np.ascontiguousarray(sol.grad.values[::-1])
    grid_grad = float(np.max(np.sqrt(np.sum(gradV ** 2, axis=(-2, -1)))))
    lip = _interpolant_lipschitz(V, dVdt, grid)
    if max(lip, grid_grad) > GRADIENT_BOUND + tol:
        raise GradientBoundError(
            f"sup |grad V| = {max(lip, grid_grad):.6g} exceeds {GRADIENT_BOUND} + {tol}; increase lambda")
    return ZvonkinMap(grid=grid, V=V, dVdt=dVdt, gradV=gradV, lam=sol.lam, lipschitz_bound=lip,
                      grid_gradient=grid_grad, tol=tol, info={"drift": sol.drift.name})


def identity_transform(grid: GridSpec) -> ZvonkinMap:
    """The map with ``V = 0``."""
    n = grid.n
    z = np.zeros((grid.M + 1,) + grid.space_shape + (n,))
    return ZvonkinMap(grid=grid, V=z, dVdt=z.copy(), gradV=np.zeros(z.shape + (n,)), lam=1.0,
                      lipschitz_bound=0.0, grid_gradient=0.0)


def invert_phi(zmap: ZvonkinMap, t: float, y, tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    """Solve ``x + V(t, x) = y`` by the fixed-point iteration ``x <- y - V(t, x)``."""
    y = zmap._points(y)
    lo, hi = zmap.box
    x = y.copy()
    for _ in range(max_iter):
        if np.any(x < lo) or np.any(x > hi):
            raise OutOfDomainError(f"inverse iterate left the box [{lo}, {hi}]; enlarge L")
        nxt = y - zmap.value(t, x)
        if np.max(np.abs(nxt - x), initial=0.0) <= tol:
            if np.any(nxt < lo) or np.any(nxt > hi):
                raise OutOfDomainError(f"inverse left the box [{lo}, {hi}]; enlarge L")
            return nxt
        x = nxt
    raise NonConvergenceError("inverse iteration did not converge")


def transformed_coeffs(zmap: ZvonkinMap, t: float, y):
    """``(lambda V(t, x), I + grad V(t, x))`` at ``x = Psi(t, y)``."""
    x = invert_phi(zmap, t, y)
    drift = zmap.lam * zmap.value(t, x)
    sigma = np.eye(zmap.n) + zmap.gradient(t, x)
    return drift, sigma


def sampled_quotients(zmap: ZvonkinMap, t: float, pairs_x, pairs_y):
    """Difference quotients of ``Phi`` and ``Psi`` on point pairs (for bi-Lipschitz checks)."""
    a, b = zmap._points(pairs_x), zmap._points(pairs_y)
    dist = np.linalg.norm(a - b, axis=-1)
    pa, pb = zmap.phi(t, a), zmap.phi(t, b)
    q_phi = np.linalg.norm(pa - pb, axis=-1) / dist
    ia, ib = invert_phi(zmap, t, a), invert_phi(zmap, t, b)
    q_psi = np.linalg.norm(ia - ib, axis=-1) / dist
    return q_phi, q_psi
