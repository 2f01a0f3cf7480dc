"""Space-time grids, sampled fields, and the padded periodic domain used by the solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import BoxTooSmallError, GridMismatchError, InvalidSpecError


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L, L)^n x [0, T]`` with ``N`` points per axis and ``M`` steps."""

    n: int = 1
    L: float = 8.0
    N: int = 512
    T: float = 1.0
    M: int = 64
    p: float = math.inf

    def __post_init__(self):
        if self.n not in (1, 2):
            raise InvalidSpecError("only n = 1 or n = 2 is supported")
        if self.N < 16 or self.N & (self.N - 1):
            raise InvalidSpecError("N must be a power of two >= 16")
        if not self.L > 0 or 2.0 * self.L / self.N > 1.0:
            raise InvalidSpecError("grid spacing 2L/N must be positive and <= 1")
        if self.M < 8:
            raise InvalidSpecError("M must be >= 8")
        if not 0.0 < self.T <= 1.0:
            raise InvalidSpecError("the horizon T must lie in (0, 1]")
        if not self.p > 1.0:
            raise InvalidSpecError("p must exceed 1")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dt(self) -> float:
        return self.T / self.M

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.M + 1)

    @property
    def axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @property
    def space_shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def points(self) -> np.ndarray:
        """Grid points, shape ``space_shape + (n,)``."""
        return np.stack(np.meshgrid(*([self.axis] * self.n), indexing="ij"), axis=-1)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(n=self.n, L=self.L, N=self.N * factor, T=self.T, M=self.M, p=self.p)

    def with_p(self, p: float) -> "GridSpec":
        return GridSpec(n=self.n, L=self.L, N=self.N, T=self.T, M=self.M, p=p)


@dataclass(eq=False)
class GridField:
    """Space-time samples ``values[time, *space, *components]`` on a :class:`GridSpec`."""

    values: np.ndarray
    grid: GridSpec
    role: str = "field"
    component_shape: tuple = ()
    growth: float = field(default=float("nan"))

    def __post_init__(self):
        expected = (self.grid.M + 1,) + self.grid.space_shape + tuple(self.component_shape)
        if self.values.shape != expected:
            raise GridMismatchError(f"field shape {self.values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidSpecError("field values must be finite")

    @classmethod
    def from_function(cls, fn: Callable, grid: GridSpec, role: str = "field",
                      component_shape: tuple = ()) -> "GridField":
        pts = grid.points
        vals = np.stack([np.asarray(fn(t, pts), dtype=float) * np.ones(grid.space_shape + tuple(component_shape))
                         for t in grid.times])
        return cls(vals, grid, role, tuple(component_shape))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def linear_growth_constant(self) -> float:
        r = np.linalg.norm(self.grid.points, axis=-1)
        mag = np.abs(self.values)
        if self.component_shape:
            mag = np.sqrt(np.sum(self.values.reshape(self.values.shape[: 1 + self.grid.n] + (-1,)) ** 2, axis=-1))
        return float(np.max(mag / (1.0 + r)))

    def at_time(self, t: float) -> np.ndarray:
        """Linear interpolation in time."""
        s = np.clip(t / self.grid.dt, 0.0, self.grid.M)
        j = min(int(math.floor(s)), self.grid.M - 1)
        w = s - j
        return (1.0 - w) * self.values[j] + w * self.values[j + 1]


def check_same_grid(*fields: GridField) -> GridSpec:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError("fields live on different grids")
    return grid


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, derivative at most 2."""
    s = np.asarray(s, dtype=float)
    a = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    b = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return a / (a + b)


Source = Union[Callable, GridField, None]


class PaddedDomain:
    """Periodic computational box ``[-L_pad, L_pad)^n`` containing the grid box.

    The margin is ``6 sqrt(Gamma T)`` plus a taper zone of width ``2 sqrt(Gamma T)``
    where sources are smoothly switched off, so the periodic extension has no jump.
    """

    def __init__(self, grid: GridSpec, Gamma: float = 1.0):
        self.grid = grid
        n, dx = grid.n, grid.dx
        sd = math.sqrt(Gamma * grid.T)
        self.core = 6.0 * sd
        self.taper = max(2.0 * sd, 4.0 * dx)
        need = grid.L + self.core + self.taper + 2.0 * dx
        self.N = int(2 ** math.ceil(math.log2(max(grid.N, 2.0 * need / dx))))
        self.L = 0.5 * self.N * dx
        self.offset = (self.N - grid.N) // 2
        # mass of the widest kernel outside the periodic box
        deficit = n * math.erfc(self.L / math.sqrt(2.0 * Gamma * grid.T))
        if deficit > 1e-3:
            raise BoxTooSmallError(f"padded box loses kernel mass {deficit:.3g}")
        self.axis = -self.L + dx * np.arange(self.N)
        self.shape = (self.N,) * n
        self.points = np.stack(np.meshgrid(*([self.axis] * n), indexing="ij"), axis=-1)
        w1 = smooth_step((grid.L + self.core + self.taper - np.abs(self.axis)) / self.taper)
        win = w1
        if n == 2:
            win = w1[:, None] * w1[None, :]
        self.window = win
        self.inner = tuple(slice(self.offset, self.offset + grid.N) for _ in range(n))
        kfull = 2.0 * math.pi * np.fft.fftfreq(self.N, dx)
        khalf = 2.0 * math.pi * np.fft.rfftfreq(self.N, dx)
        if n == 1:
            self.k = [khalf]
        else:
            kx, ky = np.meshgrid(kfull, khalf, indexing="ij")
            self.k = [kx, ky]
        self.axes = tuple(range(-n, 0))
        self.kshape = self.k[0].shape

    # -- transforms -------------------------------------------------------

    def fft(self, arr):
        return np.fft.rfftn(arr, axes=self.axes)

    def ifft(self, arr):
        return np.fft.irfftn(arr, s=self.shape, axes=self.axes)

    def deriv_hat(self, uhat, index):
        """Spectral derivative ``d^|index| / dx_index`` of transformed data."""
        out = uhat
        for i in index:
            out = out * (1j * self.k[i])
        return out

    def quad_form(self, mat):
        """``k' mat k`` on the wavenumber mesh."""
        mat = np.atleast_2d(mat)
        if self.grid.n == 1:
            return mat[0, 0] * self.k[0] ** 2
        kx, ky = self.k
        return mat[0, 0] * kx * kx + (mat[0, 1] + mat[1, 0]) * kx * ky + mat[1, 1] * ky * ky

    # -- sampling ---------------------------------------------------------

    def crop(self, arr, lead: int = 1):
        idx = (slice(None),) * lead + self.inner
        return arr[idx]

    def extend(self, inner_vals):
        """Edge-constant extension of inner-box samples to the padded box, then taper."""
        pad = [(self.offset, self.N - self.grid.N - self.offset)] * self.grid.n
        return np.pad(inner_vals, pad, mode="edge") * self.window

    def sample(self, f: Source, t: float, component=None):
        if f is None:
            return np.zeros(self.shape)
        if isinstance(f, GridField):
            vals = f.at_time(t)
            if component is not None:
                vals = vals[(Ellipsis,) + tuple(np.atleast_1d(component))]
            return self.extend(vals)
        vals = np.asarray(f(t, self.points), dtype=float)
        if component is not None:
            vals = vals[(Ellipsis,) + tuple(np.atleast_1d(component))]
        vals = np.broadcast_to(vals, self.shape)
        return vals * self.window


def phi_functions(z):
    """``exp(-z)``, ``g1(z) = (1-exp(-z))/z`` and ``g2(z) = (1-exp(-z)(1+z))/z^2``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 0.05
    zs = np.where(small, z, 0.0)
    zl = np.where(small, 1.0, z)
    g1_series = np.zeros_like(zs)
    g2_series = np.zeros_like(zs)
    for k in range(9):
        g1_series = g1_series + (-zs) ** k / math.factorial(k + 1)
        g2_series = g2_series + (k + 1) * (-zs) ** k / math.factorial(k + 2)
    e = np.exp(-z)
    g1 = np.where(small, g1_series, -np.expm1(-zl) / zl)
    g2 = np.where(small, g2_series, (1.0 - np.exp(-zl) * (1.0 + zl)) / (zl * zl))
    return e, g1, g2
