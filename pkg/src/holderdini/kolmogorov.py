"""Kolmogorov equation ``dU/dt = 1/2 Lap U + b . grad U - lambda U + b``, ``U(0) = 0``.

The drift is mollified (time and/or space, then cut off at radius ``2R``), the
mild form ``U = G_lambda[b (I + grad U)]`` is solved by Picard iteration on the
padded periodic box, and ``lambda`` is doubled until the iteration contracts by
at least 1/2 and ``sup |grad U| <= 1/2``.

The drift enters with reversed time, ``b(T - t, x)``, so that ``V(t) = U(T - t)``
solves the backward equation driven by ``b(t, x)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, signal

from .errors import AdmissibilityError, InvalidSpecError, NonConvergenceError, SequenceTooCoarseWarning
from .grid import GridField, GridSpec, PaddedDomain, smooth_step
from .heat_kernel import DiffusionSpec
from .modulus import ModulusSpec, classify_modulus, dini_integral, holder_seminorm
from .parabolic import _etd_march

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def bump(s):
    """Unnormalized smooth bump supported on ``[0, 1]``."""
    s = np.asarray(s, dtype=float)
    u = 2.0 * s - 1.0
    inside = np.abs(u) < 1.0
    return np.where(inside, np.exp(-1.0 / np.maximum(1.0 - u * u, 1e-300)), 0.0)


def cutoff(x):
    """``chi(x)``: 1 on ``|x| <= 1``, 0 on ``|x| >= 2``, ``|chi'| <= 2``."""
    return smooth_step(2.0 - np.asarray(x, dtype=float))


def _time_rule(m):
    """Nodes and weights of ``int g(r) rho_m(r) dr`` (weights sum to one)."""
    r = 0.5 * (_GL_NODES + 1.0)
    w = 0.5 * _GL_WEIGHTS * bump(r)
    return r / m, w / w.sum()


@dataclass(frozen=True, eq=False)
class DriftSpec:
    """Drift ``b(t, x)`` with ``x`` of shape ``(..., n)`` and values of shape ``(..., n)``.

    Separable drifts ``time_factor(t) * profile(x)`` are evaluated (and mollified)
    faster. ``alpha = 2/p - 1`` is the spatial exponent paired with ``modulus``.
    """

    fn: Callable
    n: int = 1
    p: float = 2.0
    modulus: Optional[ModulusSpec] = None
    name: str = "custom"
    time_factor: Optional[Callable] = None
    profile: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1.0 < self.p <= 2.0 and self.name != "supercritical":
            raise InvalidSpecError("drift time exponent p must lie in (1, 2]")

    @property
    def alpha(self) -> float:
        return 2.0 / self.p - 1.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.fn(t, x), dtype=float), x.shape[:-1] + (self.n,))

    # -- constructors --------------------------------------------------------

    @classmethod
    def constant(cls, c, n: int = 1, p: float = 2.0) -> "DriftSpec":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if c.shape != (n,):
            raise InvalidSpecError("constant drift needs n components")
        return cls(fn=lambda t, x: np.broadcast_to(c, np.shape(x)[:-1] + (n,)), n=n, p=p,
                   modulus=ModulusSpec.constant(1.0), name="constant",
                   time_factor=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                   profile=lambda x: np.broadcast_to(c, np.shape(x)[:-1] + (n,)), params={"c": c.tolist()})

    @classmethod
    def smooth(cls, profile: Callable, n: int = 1, p: float = 2.0, name: str = "smooth") -> "DriftSpec":
        """Time-independent smooth bounded drift."""
        return cls(fn=lambda t, x: profile(x), n=n, p=p, modulus=ModulusSpec.constant(1.0), name=name,
                   time_factor=lambda t: np.ones_like(np.asarray(t, dtype=float)), profile=profile)

    @classmethod
    def sine(cls, n: int = 1, amplitude: float = 1.0) -> "DriftSpec":
        def prof(x):
            return amplitude * np.sin(x)

        spec = cls.smooth(prof, n=n, name="sine")
        return replace(spec, params={"amplitude": amplitude})

    @classmethod
    def log_power_example(cls, beta: float = -3.0, p: float = 2.0, scale: Optional[float] = None,
                          time_exponent: float = 0.0, cutoff_radius: float = 0.5) -> "DriftSpec":
        """``b(t, x) = scale * t^-time_exponent * sign(x) rho(min(|x|, cutoff_radius))`` in 1-D.

        ``rho`` is the log-power modulus; the profile is flat beyond the cutoff. With ``scale=None`` the drift is normalized to unit ``[b]_{p, 2/p-1, rho}`` on ``[0, 1]``.
        """
        rho = ModulusSpec.log_power(beta, cutoff=cutoff_radius)
        if time_exponent * p >= 1.0:
            raise InvalidSpecError("time factor must be p-integrable")

        def shape(x):
            x0 = x[..., 0]
            r = np.minimum(np.abs(x0), cutoff_radius)
            return (np.sign(x0) * np.where(r > 0, rho(np.maximum(r, 1e-300)), 0.0))[..., None]

        if scale is None:
            base = _seminorm_fine(shape, 2.0 / p - 1.0, rho)
            tnorm = (1.0 / (1.0 - time_exponent * p)) ** (1.0 / p)
            scale = 1.0 / (base * tnorm)

        def tf(t):
            t = np.asarray(t, dtype=float)
            if time_exponent == 0.0:
                return np.ones_like(t)
            return np.where(t > 0, np.maximum(t, 1e-300) ** (-time_exponent), 0.0)

        def prof(x):
            return scale * shape(x)

        return cls(fn=lambda t, x: tf(t) * prof(x), n=1, p=p, modulus=rho, name="log_power_example",
                   time_factor=tf, profile=prof, params={"beta": beta, "scale": scale, "time_exponent": time_exponent})

    @classmethod
    def supercritical(cls, p_tilde: float = 2.5, alpha: float = -0.5, p: float = 2.0) -> "DriftSpec":
        """``b(t, x) = t^(-1/p_tilde) sign(x) |x|^alpha`` (1-D); singular at ``x = 0``."""
        if not p < p_tilde < 3.0:
            raise InvalidSpecError("need p < p_tilde < 3")
        if not -1.0 < alpha < 2.0 / p_tilde - 1.0:
            raise InvalidSpecError("need -1 < alpha < 2/p_tilde - 1")

        def tf(t):
            t = np.asarray(t, dtype=float)
            return np.where(t > 0, np.maximum(t, 1e-300) ** (-1.0 / p_tilde), 0.0)

        def prof(x):
            x0 = x[..., 0]
            r = np.abs(x0)
            return (np.sign(x0) * np.where(r > 0, np.maximum(r, 1e-300) ** alpha, 0.0))[..., None]

        return cls(fn=lambda t, x: tf(t) * prof(x), n=1, p=p, modulus=None, name="supercritical",
                   time_factor=tf, profile=prof, params={"p_tilde": p_tilde, "alpha": alpha})

    # -- sampled profiles ------------------------------------------------------------

    def weighted_sup(self, grid: GridSpec) -> np.ndarray:
        """``b_1(t) = sup_x |b(t,x)| / (1 + |x|)`` at the grid times."""
        pts = grid.points
        w = 1.0 / (1.0 + np.linalg.norm(pts, axis=-1))
        return np.array([np.max(np.linalg.norm(self(t, pts), axis=-1) * w) for t in grid.times])

    def seminorm_profile(self, grid: GridSpec, pair_budget: int = 0, seed: int = 0) -> np.ndarray:
        """``[b(t, .)]_{2/p-1, rho}`` at the grid times."""
        if self.modulus is None:
            raise InvalidSpecError("drift has no modulus")
        pts = grid.points
        if self.time_factor is not None and self.profile is not None:
            prof = np.asarray(self.profile(pts), dtype=float)
            base = holder_seminorm(prof, self.alpha, self.modulus, grid.dx, pair_budget, seed, value_axes=1)
            return np.abs(np.asarray(self.time_factor(grid.times), dtype=float)) * base
        return np.array([holder_seminorm(self(t, pts), self.alpha, self.modulus, grid.dx, pair_budget, seed,
                                         value_axes=1) for t in grid.times])

    def lp_seminorm(self, grid: GridSpec) -> float:
        prof = self.seminorm_profile(grid)
        return float(np.trapezoid(prof ** self.p, grid.times) ** (1.0 / self.p))


def _seminorm_fine(shape, alpha, rho):
    """``[shape]_{alpha, rho}`` on a fine 1-D grid around the origin."""
    dx = 2.0 ** -12
    x = (np.arange(-2 ** 13, 2 ** 13) * dx)[:, None]
    return holder_seminorm(shape(x), alpha, rho, dx, value_axes=1, max_separation=1.0)


@dataclass(frozen=True)
class MollificationSpec:
    """Time mollifier width ``1/m``, space mollifier width ``1/k``, cutoff radius ``R``.

    ``None`` disables the corresponding step.
    """

    m: Optional[int] = None
    k: Optional[int] = None
    R: Optional[float] = 8.0

    def __post_init__(self):
        for name in ("m", "k"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidSpecError(f"{name} must be positive")
        if self.R is not None and not self.R > 0:
            raise InvalidSpecError("R must be positive")


def _space_rule(k, n):
    """Quadrature for ``int g(x - y) rho_k(y) dy`` with a radial bump on the ball of radius ``1/k``."""
    if n == 1:
        s = 0.5 * (_GL_NODES + 1.0)
        y = (2.0 * s - 1.0) / k
        w = 0.5 * _GL_WEIGHTS * bump(s)
        return y[:, None], w / w.sum()
    nodes, weights = np.polynomial.legendre.leggauss(16)
    gx, gy = np.meshgrid(nodes, nodes, indexing="ij")
    wx = np.outer(weights, weights)
    rad = np.sqrt(gx ** 2 + gy ** 2)
    w = wx * np.where(rad < 1.0, np.exp(-1.0 / np.maximum(1.0 - rad ** 2, 1e-300)), 0.0)
    y = np.stack([gx.ravel(), gy.ravel()], axis=-1) / k
    return y, (w / w.sum()).ravel()


def _tabulated_profile(profile, k, extent):
    """Space-mollified 1-D profile, tabulated on a fine grid and interpolated linearly."""
    h = 1.0 / (64.0 * k)
    count = int(math.ceil(extent / h)) + 64 * 2
    x = np.arange(-count, count + 1) * h
    vals = np.asarray(profile(x[:, None]), dtype=float)[:, 0]
    taps = np.arange(-64, 65) * h * k
    ker = bump(0.5 * (taps + 1.0))
    ker = ker / ker.sum()
    smooth = signal.fftconvolve(vals, ker, mode="same")
    valid = slice(64, -64)
    xs, ys = x[valid], smooth[valid]

    def fn(pts):
        pts = np.asarray(pts, dtype=float)
        return np.interp(pts[..., 0], xs, ys)[..., None]

    return fn


def mollify_drift(drift: DriftSpec, moll: MollificationSpec, grid: Optional[GridSpec] = None) -> DriftSpec:
    """``b_{m,R}(t, x) = (b^k * rho_m)(t, x chi(x/R))`` with ``b`` extended by zero for ``t < 0``.

    With ``grid`` the weighted-sup and seminorm profiles of the result are recorded
    in ``info`` together with the seminorm inflation relative to ``drift``.
    """
    n = drift.n
    tf, prof = drift.time_factor, drift.profile
    separable = tf is not None and prof is not None

    def space_part(fn_x):
        if moll.k is None:
            return fn_x
        if n == 1 and separable:
            extent = 2.0 * moll.R + 2.0 if moll.R is not None else 64.0
            return _tabulated_profile(fn_x, moll.k, extent)
        ys, ws = _space_rule(moll.k, n)

        def smoothed(x):
            x = np.asarray(x, dtype=float)
            acc = 0.0
            for y, w in zip(ys, ws):
                acc = acc + w * np.asarray(fn_x(x - y), dtype=float)
            return acc

        return smoothed

    def with_cutoff(fn_x):
        if moll.R is None:
            return fn_x

        def cut(x):
            x = np.asarray(x, dtype=float)
            chi = cutoff(np.linalg.norm(x, axis=-1) / moll.R)
            return fn_x(x * chi[..., None])

        return cut

    if moll.m is not None:
        rs, wr = _time_rule(moll.m)

    def time_part_scalar(g):
        if moll.m is None:
            return g

        def smoothed(t):
            t = np.asarray(t, dtype=float)
            tt = t[..., None] - rs
            vals = np.where(tt >= 0.0, np.asarray(g(np.maximum(tt, 0.0)), dtype=float), 0.0)
            return np.sum(vals * wr, axis=-1)

        return smoothed

    if separable:
        new_tf = time_part_scalar(tf)
        new_prof = with_cutoff(space_part(prof))

        def fn(t, x):
            return np.asarray(new_tf(t), dtype=float) * np.asarray(new_prof(x), dtype=float)

        out = replace(drift, fn=fn, time_factor=new_tf, profile=new_prof,
                      name=drift.name, info={"mollification": moll})
    else:
        def base(t, x):
            inner = with_cutoff(space_part(lambda y: drift(t, y)))
            return inner(x)

        if moll.m is None:
            fn = base
        else:
            def fn(t, x):
                acc = 0.0
                for r, w in zip(rs, wr):
                    if t - r >= 0.0:
                        acc = acc + w * base(t - r, x)
                return np.broadcast_to(acc, np.shape(x)[:-1] + (n,))

        out = replace(drift, fn=fn, time_factor=None, profile=None, info={"mollification": moll})
    if grid is not None:
        out.info.update(_profile_report(drift, out, grid))
    return out


def _profile_report(orig: DriftSpec, moll: DriftSpec, grid: GridSpec) -> dict:
    rep = {"weighted_sup": moll.weighted_sup(grid)}
    if orig.modulus is not None:
        a = orig.lp_seminorm(grid)
        b = moll.lp_seminorm(grid)
        rep["seminorm_profile"] = moll.seminorm_profile(grid)
        rep["inflation"] = b / a if a > 0 else (0.0 if b == 0 else math.inf)
        if isinstance(orig.modulus, ModulusSpec):
            rep["inflation_bound"] = 3.0 ** orig.alpha * _three_ratio(orig.modulus)
    return rep


def _three_ratio(rho: ModulusSpec) -> float:
    r = np.logspace(-12, 0, 400) / 3.0
    return float(np.max(rho(3.0 * r) / rho(r)))


# -- Picard solve --------------------------------------------------------------------


@dataclass
class KolmogorovSolution:
    """Solution ``U`` with derivative fields, selected ``lambda`` and iteration record."""

    U: GridField
    grad: GridField  # grad[..., i, j] = d_j U_i
    hess: GridField  # hess[..., i, j, l] = d_j d_l U_i
    dUdt: GridField
    lam: float
    drift: DriftSpec
    trace: list
    contraction: float
    converged: bool
    iterations: int
    norms: dict = field(default_factory=dict)
    certificate: Optional[float] = None
    lambda_trials: list = field(default_factory=list)

    def summary(self) -> dict:
        out = {"lambda": self.lam, "contraction": self.contraction, "converged": self.converged,
               "iterations": self.iterations, "trace": list(self.trace)}
        out.update(self.norms)
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def _sample_drift(drift: DriftSpec, dom: PaddedDomain, grid: GridSpec) -> np.ndarray:
    """``b(T - t_j, x)`` on the padded box, shape ``(M+1, *pad, n)``, windowed."""
    T = grid.T
    win = dom.window[..., None]
    if drift.time_factor is not None and drift.profile is not None:
        prof = np.asarray(drift.profile(dom.points), dtype=float) * win
        tf = np.asarray(drift.time_factor(T - grid.times), dtype=float)
        return tf.reshape((-1,) + (1,) * (dom.grid.n + 1)) * prof[None]
    return np.stack([drift(T - t, dom.points) * win for t in grid.times])


def _grad_from_hat(dom, uhat):
    """``uhat`` of shape ``(M+1, n_comp, *k)``; returns real ``(M+1, n_comp, n, *pad)``."""
    n = dom.grid.n
    return np.stack([dom.ifft(dom.deriv_hat(uhat, (j,))) for j in range(n)], axis=2)


def picard_solve_U(drift: DriftSpec, lam: float, grid: GridSpec, tol: float = 1e-6, max_iter: int = 200,
                   homogeneous: bool = False, raise_on_failure: bool = False) -> KolmogorovSolution:
    """Iterate ``U <- G_lambda[b (I + grad U)]`` from ``U = 0``.

    Stops when the sup of successive gradient differences is at most ``tol``.
    ``homogeneous=True`` drops the forcing term (the zero fixed point).
    """
    if not lam > 0:
        raise InvalidSpecError("lambda must be positive")
    n = grid.n
    if drift.n != n:
        raise InvalidSpecError("drift and grid dimensions differ")
    ident = DiffusionSpec.identity(n)
    dom = PaddedDomain(grid, 1.0)
    b = _sample_drift(drift, dom, grid)  # (M+1, *pad, n)
    if not np.all(np.isfinite(b)):
        raise InvalidSpecError("drift is not finite on the grid; mollify it first")
    forcing = np.zeros_like(b) if homogeneous else b
    uhat = np.zeros((grid.M + 1, n) + dom.kshape, dtype=complex)
    grad = np.zeros((grid.M + 1, n, n) + dom.shape)
    trace, ratios = [], []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # source_i = forcing_i + sum_j b_j d_j U_i
        src = np.moveaxis(forcing, -1, 1).copy()
        src += np.einsum("t...j,tij...->ti...", b, grad)
        src *= dom.window
        new_hat = np.stack([_etd_march(dom, ident, lam, grid, dom.fft(src[:, i])) for i in range(n)], axis=1)
        new_grad = _grad_from_hat(dom, new_hat)
        diff = float(np.max(np.abs(dom.crop(new_grad - grad, lead=3)))) if it > 0 else 0.0
        if trace and trace[-1] > 1e-13:
            ratios.append(diff / trace[-1])
        trace.append(diff)
        if not math.isfinite(diff):
            break
        uhat, grad = new_hat, new_grad
        if diff <= tol:
            converged = True
            break
    if not converged and raise_on_failure:
        raise NonConvergenceError(f"Picard iteration did not reach {tol} in {max_iter} steps; increase lambda")
    contraction = max(ratios) if ratios else 0.0
    return _assemble(dom, grid, drift, b, uhat, grad, lam, trace, contraction, converged, it, homogeneous)


def _assemble(dom, grid, drift, b, uhat, grad_pad, lam, trace, contraction, converged, it, homogeneous):
    n = grid.n
    U = np.moveaxis(dom.crop(dom.ifft(uhat), lead=2), 1, -1)
    grad = np.moveaxis(dom.crop(grad_pad, lead=3), (1, 2), (-2, -1))
    hess = np.empty(grad.shape + (n,))
    lap = np.zeros((grid.M + 1, n) + dom.shape)
    for j in range(n):
        for l in range(j, n):
            d = dom.ifft(dom.deriv_hat(uhat, (j, l)))
            hess[..., j, l] = np.moveaxis(dom.crop(d, lead=2), 1, -1)
            hess[..., l, j] = hess[..., j, l]
            if j == l:
                lap += d
    bcrop = dom.crop(b, lead=1)
    drift_term = np.einsum("t...j,t...ij->t...i", bcrop, grad)
    forcing = 0.0 if homogeneous else bcrop
    dUdt = 0.5 * np.moveaxis(dom.crop(lap, lead=2), 1, -1) + drift_term - lam * U + forcing
    fields = dict(
        U=GridField(U, grid, "kolmogorov", (n,)),
        grad=GridField(grad, grid, "gradient", (n, n)),
        hess=GridField(hess, grid, "hessian", (n, n, n)),
        dUdt=GridField(dUdt, grid, "time-derivative", (n,)),
    )
    norms = _norm_report(fields, grid)
    return KolmogorovSolution(lam=lam, drift=drift, trace=trace, contraction=contraction, converged=converged,
                              iterations=it, norms=norms, **fields)


def _norm_report(fields, grid: GridSpec) -> dict:
    pts = grid.points
    w = 1.0 / (1.0 + np.linalg.norm(pts, axis=-1))
    gnorm = np.sqrt(np.sum(fields["grad"].values ** 2, axis=(-2, -1)))
    hnorm = np.sqrt(np.sum(fields["hess"].values ** 2, axis=(-3, -2, -1)))
    sup_grad_t = np.max(gnorm.reshape(grid.M + 1, -1), axis=1)
    sup_hess_t = np.max(hnorm.reshape(grid.M + 1, -1), axis=1)
    u = np.linalg.norm(fields["U"].values, axis=-1) * w
    dudt = np.linalg.norm(fields["dUdt"].values, axis=-1) * w
    return {
        "sup_grad": float(np.max(sup_grad_t)),
        "hess_L2_Linf": float(np.trapezoid(sup_hess_t ** 2, grid.times) ** 0.5),
        "weighted_sup_U": float(np.max(u)),
        "weighted_sup_dUdt": float(np.max(dudt)),
    }


# -- lambda selection ----------------------------------------------------------------------


_TAIL_CUT = 1e-8


def certificate_integral(modulus: ModulusSpec, p: float, lam: float, T: float = 1.0) -> float:
    """``int_0^sqrt(T) exp(-lambda p r^2/(p-1)) [r + rho^q(r)/r] dr`` with ``q = 2p/(5p-2)``."""
    q = 2.0 * p / (5.0 * p - 2.0)
    rho_q = modulus.powered(q)
    c = lam * p / (p - 1.0)
    top = math.sqrt(T)
    head = (1.0 - math.exp(-c * T)) / (2.0 * c)
    r0 = min(top, 0.25)

    def tail(s):
        r = math.exp(-s)
        return math.exp(-c * r * r) * float(rho_q(r))

    # below r = 1e-8 the Gaussian factor is 1 to double precision; the rest is a Dini tail
    s_lo, s_hi = -math.log(r0), -math.log(_TAIL_CUT)
    knots = np.concatenate(([s_lo], np.arange(math.ceil(s_lo), s_hi), [s_hi]))
    near = sum(integrate.quad(tail, a, b, limit=200)[0] for a, b in zip(knots[:-1], knots[1:]) if b > a)
    rest = dini_integral(rho_q, lower_cut=_TAIL_CUT, upper=_TAIL_CUT)
    if not rest.finite:
        return math.inf
    near += rest.value
    far = 0.0
    if top > r0:
        pts = [x for x in rho_q.breakpoints() if r0 < x < top] or None
        far, _ = integrate.quad(lambda r: math.exp(-c * r * r) * float(rho_q(r)) / r, r0, top, points=pts, limit=200)
    return head + near + far


def _check_admissible(drift: DriftSpec):
    rho = drift.modulus
    if rho is None:
        raise AdmissibilityError(f"drift {drift.name!r} has no modulus; it is outside the admissible class")
    if rho.kind == "constant" or drift.name in ("constant", "sine", "smooth"):
        return
    cls = classify_modulus(rho, drift.alpha, drift.p)
    if not cls.flow_admissible:
        raise AdmissibilityError(f"modulus fails the flow hypothesis: {cls.diagnostic}")


def select_lambda(drift: DriftSpec, grid: GridSpec, lam0: float = 1.0, max_doublings: int = 20,
                  tol: float = 1e-6, max_iter: int = 200) -> KolmogorovSolution:
    """Double ``lambda`` from ``lam0`` until contraction <= 1/2 and ``sup |grad U| <= 1/2``."""
    _check_admissible(drift)
    trials = []
    lam = lam0
    for _ in range(max_doublings + 1):
        sol = picard_solve_U(drift, lam, grid, tol=tol, max_iter=max_iter)
        ok = sol.converged and sol.contraction <= 0.5 and sol.norms["sup_grad"] <= 0.5
        trials.append({"lambda": lam, "contraction": sol.contraction, "sup_grad": sol.norms["sup_grad"],
                       "converged": sol.converged, "accepted": ok})
        if ok:
            sol.lambda_trials = trials
            if drift.modulus is not None and drift.modulus.kind != "constant":
                sol.certificate = certificate_integral(drift.modulus, drift.p, lam, grid.T)
            return sol
        lam *= 2.0
    raise AdmissibilityError(f"no lambda up to {lam / 2.0:g} met the contraction and gradient bounds")


@dataclass
class LimitSolution:
    """Solution at the finest mollification and Cauchy differences between successive levels."""

    solution: KolmogorovSolution
    u_differences: list
    grad_differences: list
    levels: list


def limit_solution(drift: DriftSpec, sequence, lam: float, grid: GridSpec, tol: float = 1e-6,
                   inner_radius: Optional[float] = None) -> LimitSolution:
    """Solve along a mollification sequence and record sup differences on ``|x| <= inner_radius``."""
    sequence = list(sequence)
    if len(sequence) < 2:
        raise InvalidSpecError("need at least two mollification levels")
    inner_radius = grid.L / 2.0 if inner_radius is None else inner_radius
    mask = np.linalg.norm(grid.points, axis=-1) <= inner_radius
    prev = None
    du, dg = [], []
    sol = None
    for moll in sequence:
        sol = picard_solve_U(mollify_drift(drift, moll), lam, grid, tol=tol)
        if prev is not None:
            du.append(float(np.max(np.abs(sol.U.values - prev.U.values)[:, mask])))
            dg.append(float(np.max(np.abs(sol.grad.values - prev.grad.values)[:, mask])))
        prev = sol
    if any(b >= a for a, b in zip(du, du[1:])) or any(b >= a for a, b in zip(dg, dg[1:])):
        warnings.warn("Cauchy differences along the mollification sequence are not decreasing",
                      SequenceTooCoarseWarning)
    return LimitSolution(solution=sol, u_differences=du, grad_differences=dg, levels=sequence)
