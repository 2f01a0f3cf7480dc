"""Euler-Maruyama for ``dX = b(t, X) dt + dW`` and for the transformed state ``Y = Phi(t, X)``.

All runs draw Brownian increments from a :class:`BrownianTape`, so runs at
different step sizes, initial points or drifts can share one noise realization.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import BlowUpError, InvalidSpecError, NonConvergenceError, OutOfDomainError, VarianceWarning
from .kolmogorov import DriftSpec, MollificationSpec, mollify_drift
from .zvonkin import ZvonkinMap, invert_phi


@dataclass(frozen=True)
class SimConfig:
    """Time window ``[s, T]``, step ``dt``, ensemble size, seed and initial points."""

    dt: float
    n_paths: int = 1000
    seed: int = 0
    T: float = 1.0
    s: float = 0.0
    x0: tuple = (0.0,)

    def __post_init__(self):
        if self.n_paths < 1:
            raise InvalidSpecError("n_paths must be >= 1")
        if not 0.0 <= self.s < self.T <= 1.0:
            raise InvalidSpecError("need 0 <= s < T <= 1")
        steps = (self.T - self.s) / self.dt
        if not self.dt > 0 or abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise InvalidSpecError("dt must divide T - s")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidSpecError("seed must be a 64-bit unsigned integer")

    @property
    def n_steps(self) -> int:
        return int(round((self.T - self.s) / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.s + self.dt * np.arange(self.n_steps + 1)


class BrownianTape:
    """Increments ``dW[path, step, component]`` with variance ``dt``.

    The stream is ``numpy.random.Generator(PCG64(seed)).standard_normal`` in C order,
    so the same ``(seed, n_paths, n_steps, n)`` always gives the same bits.
    """

    def __init__(self, n_paths: int, n_steps: int, dt: float, n: int = 1, seed: int = 0, s: float = 0.0):
        self.n_paths, self.n_steps, self.dt, self.n, self.seed, self.s = n_paths, n_steps, dt, n, seed, s
        rng = np.random.Generator(np.random.PCG64(seed))
        self.increments = rng.standard_normal((n_paths, n_steps, n)) * math.sqrt(dt)

    @classmethod
    def for_config(cls, cfg: SimConfig, n: int = 1) -> "BrownianTape":
        return cls(cfg.n_paths, cfg.n_steps, cfg.dt, n, cfg.seed, cfg.s)

    def coarsen(self, factor: int) -> "BrownianTape":
        """Tape at step ``factor * dt`` built by summing consecutive increments."""
        if factor < 1 or self.n_steps % factor:
            raise InvalidSpecError("factor must divide the number of steps")
        out = object.__new__(BrownianTape)
        out.n_paths, out.n_steps, out.dt = self.n_paths, self.n_steps // factor, self.dt * factor
        out.n, out.seed, out.s = self.n, self.seed, self.s
        out.increments = self.increments.reshape(self.n_paths, out.n_steps, factor, self.n).sum(axis=2)
        return out

    def path(self) -> np.ndarray:
        """``W`` at the step times, starting from 0."""
        w = np.zeros((self.n_paths, self.n_steps + 1, self.n))
        np.cumsum(self.increments, axis=1, out=w[:, 1:])
        return w

    def moment_check(self) -> dict:
        inc = self.increments
        count = inc.shape[0] * inc.shape[1]
        mean = inc.mean(axis=(0, 1))
        var = inc.var(axis=(0, 1))
        return {"mean": mean, "variance": var, "samples": count,
                "mean_ok": bool(np.all(np.abs(mean) <= 4.0 * math.sqrt(self.dt / count))),
                "variance_ok": bool(np.all(np.abs(var / self.dt - 1.0) <= 0.01))}


@dataclass
class PathEnsemble:
    """Trajectories ``X[path, step, component]`` (and ``Y`` for transformed runs)."""

    times: np.ndarray
    X: np.ndarray
    tape: BrownianTape
    kind: str
    drift: str
    x0: np.ndarray
    Y: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    @property
    def terminal(self) -> np.ndarray:
        return self.X[:, -1]


def _tape_for(cfg: SimConfig, n: int, tape: Optional[BrownianTape]) -> BrownianTape:
    if tape is None:
        return BrownianTape.for_config(cfg, n)
    if tape.n_steps != cfg.n_steps:
        if tape.n_steps % cfg.n_steps:
            raise InvalidSpecError("tape resolution is incompatible with dt")
        tape = tape.coarsen(tape.n_steps // cfg.n_steps)
    if tape.n_paths != cfg.n_paths or tape.n != n:
        raise InvalidSpecError("tape shape does not match the configuration")
    return tape


def euler_direct(drift: DriftSpec, cfg: SimConfig, tape: Optional[BrownianTape] = None, x0=None,
                 start_offset: float = 0.0) -> PathEnsemble:
    """``X <- X + b(t, X) dt + dW``.

    With ``start_offset > 0`` the drift is evaluated at ``max(t, s + start_offset)``,
    which keeps a drift singular at ``t = s`` finite on the first step.
    """
    n = drift.n
    tape = _tape_for(cfg, n, tape)
    x0 = np.broadcast_to(np.asarray(cfg.x0[0] if x0 is None else x0, dtype=float), (n,))
    times = cfg.times
    X = np.empty((cfg.n_paths, cfg.n_steps + 1, n))
    x = np.tile(x0, (cfg.n_paths, 1))
    X[:, 0] = x
    dw = tape.increments
    for k in range(cfg.n_steps):
        t = max(times[k], cfg.s + start_offset)
        x = x + drift(t, x) * cfg.dt + dw[:, k]
        if not np.all(np.isfinite(x)):
            raise BlowUpError(f"non-finite state at step {k + 1}", step=k + 1)
        X[:, k + 1] = x
    return PathEnsemble(times=times, X=X, tape=tape, kind="direct", drift=drift.name, x0=x0,
                        info={"start_offset": start_offset})


def euler_transformed(zmap: ZvonkinMap, cfg: SimConfig, tape: Optional[BrownianTape] = None,
                      x0=None, backend: Optional[str] = None) -> PathEnsemble:
    """``Y <- Y + lambda int V(r, X) dr + (I + grad V(t, X)) dW`` with ``X = Psi(t, Y)``.

    The drift integral is exact for the cubic-in-time interpolant of ``V`` frozen
    at the current state. Returns ``Y`` and the mapped-back ``X``.
    """
    n = zmap.n
    if cfg.T > zmap.T + 1e-12:
        raise InvalidSpecError("simulation horizon exceeds the transform horizon")
    tape = _tape_for(cfg, n, tape)
    x0 = np.broadcast_to(np.asarray(cfg.x0[0] if x0 is None else x0, dtype=float), (n,))
    times = cfg.times
    y0 = zmap.phi(cfg.s, x0[None])[0]
    if n == 1:
        impl = kernels if backend is None else _Backend(backend)
        g = zmap.grid
        Y, X, status, step = impl.transformed_euler_1d(
            np.full(cfg.n_paths, y0[0]), tape.increments[:, :, 0], times, zmap.lam, g.dt, -g.L, g.dx,
            zmap.V[..., 0], zmap.dVdt[..., 0], zmap.gradV[..., 0, 0])
        _raise_status(status, step)
        Y, X = Y[..., None], X[..., None]
    else:
        Y, X = _transformed_nd(zmap, cfg, tape, y0)
    return PathEnsemble(times=times, X=X, tape=tape, kind="transformed", drift=str(zmap.info.get("drift")),
                        x0=x0, Y=Y)


class _Backend:
    def __init__(self, name):
        self.mod = kernels.get_backend(name)

    def transformed_euler_1d(self, *args):
        c = np.ascontiguousarray
        y0, dw, times, lam, ht, lo, dx, vals, dvals, gvals = args
        return self.mod.transformed_euler_1d(c(y0), c(dw), c(times), float(lam), float(ht), float(lo), float(dx),
                                             c(vals), c(dvals), c(gvals), 1e-10, 200)


def _raise_status(status, step):
    if status == 1:
        raise OutOfDomainError(f"inverse left the interpolation box at step {step}; enlarge L")
    if status == 2:
        raise NonConvergenceError(f"inverse iteration did not converge at step {step}")
    if status == 3:
        raise BlowUpError(f"non-finite state at step {step}", step=step)


def _integrate_v_nd(zmap, x, t0, t1):
    ht = zmap.grid.dt
    total = np.zeros_like(x)
    a = t0
    while a < t1:
        b = min(t1, (math.floor(a / ht + 1e-9) + 1.0) * ht)
        if b - a <= 1e-15:
            b = min(t1, b + ht)
        total += (b - a) / 6.0 * (zmap.value(a, x) + 4.0 * zmap.value(0.5 * (a + b), x) + zmap.value(b, x))
        a = b
    return total


def _transformed_nd(zmap, cfg, tape, y0):
    n = zmap.n
    times = cfg.times
    Y = np.empty((cfg.n_paths, cfg.n_steps + 1, n))
    X = np.empty_like(Y)
    y = np.tile(y0, (cfg.n_paths, 1))
    x = invert_phi(zmap, times[0], y)
    Y[:, 0], X[:, 0] = y, x
    for k in range(cfg.n_steps):
        sig = np.eye(n) + zmap.gradient(times[k], x)
        y = y + zmap.lam * _integrate_v_nd(zmap, x, times[k], times[k + 1]) \
            + np.einsum("pij,pj->pi", sig, tape.increments[:, k])
        if not np.all(np.isfinite(y)):
            raise BlowUpError(f"non-finite state at step {k + 1}", step=k + 1)
        x = invert_phi(zmap, times[k + 1], y)
        Y[:, k + 1], X[:, k + 1] = y, x
    return Y, X


# -- statistics ------------------------------------------------------------------------------


def _fit(xs, ys, weights=None):
    """Least-squares slope of ``log y`` on ``log x`` with its standard error."""
    lx, ly = np.log(xs), np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(len(xs) - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), float(np.max(np.abs(resid)))


@dataclass
class FlowStats:
    """Two-point and time-increment moment estimates with fitted exponents."""

    q_values: tuple
    separations: np.ndarray
    spatial_moments: dict  # q -> array over separations
    spatial_halfwidth: dict
    spatial_exponent: dict  # q -> (slope, stderr, max residual)
    lags: np.ndarray
    time_moments: dict
    time_exponent: dict

    def rows(self):
        out = []
        for q in self.q_values:
            for d, m, h in zip(self.separations, self.spatial_moments[q], self.spatial_halfwidth[q]):
                out.append((f"spatial_moment_q{q:g}", float(d), float(m), float(h)))
            slope, se, res = self.spatial_exponent[q]
            out.append((f"spatial_exponent_q{q:g}", "fit", slope, se))
            for lag, m in zip(self.lags, self.time_moments[q]):
                out.append((f"time_moment_q{q:g}", float(lag), float(m), float("nan")))
            slope, se, res = self.time_exponent[q]
            out.append((f"time_exponent_q{q:g}", "fit", slope, se))
        return out


def _states(ens: PathEnsemble, use_transformed: bool):
    return ens.Y if use_transformed and ens.Y is not None else ens.X


def flow_stats(base: PathEnsemble, others: Sequence[PathEnsemble], q_values=(2.0, 4.0),
               lags: Optional[Sequence[int]] = None, use_transformed: bool = True) -> FlowStats:
    """Moments ``E|Y(y) - Y(y')|^q`` at the final time against ``|y - y'|``, and
    ``E|Y_t - Y_t'|^q`` from ``base`` against the lag ``|t - t'|``.
    """
    ref = _states(base, use_transformed)
    seps, mom, half = [], {q: [] for q in q_values}, {q: [] for q in q_values}
    for ens in others:
        if ens.tape is not base.tape and not np.array_equal(ens.tape.increments, base.tape.increments):
            raise InvalidSpecError("ensembles must share the Brownian tape")
        dist = float(np.linalg.norm(ens.x0 - base.x0))
        diff = np.linalg.norm(_states(ens, use_transformed)[:, -1] - ref[:, -1], axis=-1)
        seps.append(dist)
        for q in q_values:
            v = diff ** q
            mom[q].append(float(v.mean()))
            half[q].append(1.96 * float(v.std(ddof=1)) / math.sqrt(len(v)) if len(v) > 1 else math.inf)
    seps = np.array(seps)
    order = np.argsort(seps)
    seps = seps[order]
    spatial = {q: np.array(mom[q])[order] for q in q_values}
    spatial_h = {q: np.array(half[q])[order] for q in q_values}
    n_paths = ref.shape[0]
    for q in q_values:
        if q < 0:
            warnings.warn(f"q={q}: negative moments depend on small separations; diagnostic only",
                          VarianceWarning)
        elif n_paths < 100 * q:
            warnings.warn(f"{n_paths} paths are few for q={q} moments", VarianceWarning)
    sp_exp = {q: _fit(seps, spatial[q]) if len(seps) >= 2 and np.all(spatial[q] > 0) else (math.nan,) * 3
              for q in q_values}
    steps = ref.shape[1] - 1
    if lags is None:
        lags = [2 ** k for k in range(int(math.log2(max(steps, 1))) + 1) if 2 ** k <= steps // 2] or [1]
    lags = np.array(lags, dtype=int)
    dt = base.times[1] - base.times[0]
    tm = {q: [] for q in q_values}
    for lag in lags:
        d = np.linalg.norm(ref[:, lag:] - ref[:, :-lag], axis=-1)
        for q in q_values:
            tm[q].append(float(np.mean(d ** q)))
    tm = {q: np.array(v) for q, v in tm.items()}
    t_exp = {q: _fit(lags * dt, tm[q]) if len(lags) >= 2 and np.all(tm[q] > 0) else (math.nan,) * 3
             for q in q_values}
    return FlowStats(q_values=tuple(q_values), separations=seps, spatial_moments=spatial,
                     spatial_halfwidth=spatial_h, spatial_exponent=sp_exp, lags=lags * dt,
                     time_moments=tm, time_exponent=t_exp)


@dataclass
class NonCrossingReport:
    violations: int
    samples: int

    @property
    def fraction(self) -> float:
        return self.violations / self.samples if self.samples else 0.0


def non_crossing_check(ensembles: Sequence[PathEnsemble]) -> NonCrossingReport:
    """Count (path, time, neighbour pair) samples where 1-D trajectories lose their initial order."""
    if any(e.X.shape[-1] != 1 for e in ensembles):
        raise InvalidSpecError("non-crossing check needs n = 1")
    starts = np.array([float(e.x0[0]) for e in ensembles])
    if np.any(np.diff(starts) <= 0):
        raise InvalidSpecError("initial points must be strictly increasing")
    stack = np.stack([e.X[..., 0] for e in ensembles])
    bad = np.diff(stack, axis=0) <= 0.0
    return NonCrossingReport(violations=int(bad.sum()), samples=int(bad.size))


def second_moment_profile(ens: PathEnsemble, use_transformed: bool = True) -> float:
    """``sup_t E|Y_t|^2``."""
    st = _states(ens, use_transformed)
    return float(np.max(np.mean(np.sum(st ** 2, axis=-1), axis=0)))


# -- supercritical contrast --------------------------------------------------------------------


@dataclass
class SupercriticalReport:
    """Terminal means per mollification width and shift, with their spreads."""

    eps: np.ndarray
    shifts: tuple
    means: np.ndarray  # (len(eps), len(shifts))
    spread: np.ndarray
    start_offset: float
    drift: str

    def rows(self):
        out = []
        for i, e in enumerate(self.eps):
            for j, s in enumerate(self.shifts):
                out.append(("terminal_mean", float(e), float(s), float(self.means[i, j])))
            out.append(("spread", float(e), "all", float(self.spread[i])))
        return out

    @property
    def reduction(self) -> float:
        """Spread at the coarsest width over spread at the finest width."""
        last = self.spread[-1]
        return math.inf if last == 0 else float(self.spread[0] / last)


def _shifted(drift: DriftSpec, shift: float) -> DriftSpec:
    if shift == 0.0:
        return drift
    base = drift

    def fn(t, x):
        return base(t, x - shift)

    return DriftSpec(fn=fn, n=base.n, p=base.p, modulus=base.modulus, name=base.name)


def supercritical_demo(drift: DriftSpec, eps: Sequence[float], cfg: SimConfig, x0: float = 0.0,
                       start_offset: Optional[float] = None) -> SupercriticalReport:
    """Direct Euler runs under space mollifications of width ``eps_j``, centred and shifted by ``+-eps_j``.

    All runs share one tape. ``spread_j`` is the range of the three terminal means.
    A drift singular at ``t = 0`` is evaluated from ``start_offset`` (default ``dt``).
    """
    if start_offset is None:
        start_offset = cfg.dt if drift.name == "supercritical" else 0.0
    tape = BrownianTape.for_config(cfg, drift.n)
    eps = np.asarray(eps, dtype=float)
    shifts = (-1.0, 0.0, 1.0)
    means = np.empty((len(eps), len(shifts)))
    for i, e in enumerate(eps):
        k = 1.0 / e
        moll = mollify_drift(drift, MollificationSpec(k=k, R=None))
        for j, sgn in enumerate(shifts):
            ens = euler_direct(_shifted(moll, sgn * e), cfg, tape=tape, x0=x0, start_offset=start_offset)
            means[i, j] = float(ens.terminal[:, 0].mean())
    spread = means.max(axis=1) - means.min(axis=1)
    return SupercriticalReport(eps=eps, shifts=shifts, means=means, spread=spread, start_offset=start_offset,
                               drift=drift.name)


@dataclass
class PeanoReport:
    times: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    zero: np.ndarray
    exact: np.ndarray
    max_error: float


def peano_pair(alpha: float = -0.5, T: float = 1.0, seed_eps: float = 1e-9, num: int = 65) -> PeanoReport:
    """Solutions of ``x' = sign(x)|x|^alpha`` from ``x(0) = +-seed_eps`` and from 0 (which stays 0).

    The seeded branches approach ``+-((1-alpha) t)^(1/(1-alpha))``.
    """
    if not -1.0 < alpha < 1.0:
        raise InvalidSpecError("alpha must lie in (-1, 1)")
    times = np.linspace(0.0, T, num)

    def rhs(t, x):
        return np.sign(x) * np.abs(x) ** alpha if x[0] != 0.0 else np.zeros(1)

    branches = []
    for x_start in (seed_eps, -seed_eps, 0.0):
        sol = solve_ivp(rhs, (0.0, T), [x_start], t_eval=times, rtol=1e-11, atol=1e-13, method="DOP853")
        branches.append(sol.y[0])
    exact = ((1.0 - alpha) * times) ** (1.0 / (1.0 - alpha))
    err = max(float(np.max(np.abs(branches[0] - exact))), float(np.max(np.abs(branches[1] + exact))),
              float(np.max(np.abs(branches[2]))))
    return PeanoReport(times=times, upper=branches[0], lower=branches[1], zero=branches[2], exact=exact,
                       max_error=err)
