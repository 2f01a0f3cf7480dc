"""Heat-kernel solutions ``u = G_lambda f`` of the parabolic Cauchy problem.

``u`` solves ``du/dt = 1/2 sum a_ij(t) d_ij u - lambda u + f`` with ``u(0) = 0``, i.e.
``u(t) = int_0^t exp(-lambda (t-r)) K(r, t) * f(r) dr``.

Two time discretizations are available. The default ``"etd"`` marches in Fourier
space and integrates a source that is piecewise linear in time exactly per mode.
``"quadrature"`` evaluates the Duhamel integral directly for every output time on
a graded mesh ``r = t - T (k/M)^2`` that clusters nodes near ``r = t``. The second
derivative field is also available through the subtraction form
``int K_xx(x - z) [f(z) - f(x)] dz`` which keeps the time integrand integrable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import HypothesisError, NonContractionError
from .grid import GridField, GridSpec, PaddedDomain, Source, check_same_grid, phi_functions
from .heat_kernel import POINT_MASS_GAP, DiffusionSpec, accumulated_matrix
from .modulus import ClassLabel, ModulusSpec, classify_modulus, holder_seminorm, rho_hat_function


# -- time stepping ----------------------------------------------------------


def _etd_march(dom: PaddedDomain, spec: DiffusionSpec, lam: float, grid: GridSpec, src_hat):
    """Exact per-mode integration of a source linear in time between grid times."""
    h = grid.dt
    out = np.empty_like(src_hat)
    out[0] = 0.0
    if spec.is_constant():
        mu = lam + 0.5 * dom.quad_form(spec.constant_matrix)
        e, g1, g2 = phi_functions(mu * h)
        pa, pb = h * g2, h * (g1 - g2)
    for j in range(grid.M):
        if not spec.is_constant():
            t0 = grid.times[j]
            abar = accumulated_matrix(spec, t0, t0 + h) / h
            mu = lam + 0.5 * dom.quad_form(abar)
            e, g1, g2 = phi_functions(mu * h)
            pa, pb = h * g2, h * (g1 - g2)
        out[j + 1] = e * out[j] + pa * src_hat[j] + pb * src_hat[j + 1]
    return out


def _scalar_march(lam: float, grid: GridSpec, coeffs):
    """Same recursion for a spatially constant coefficient series (shape (M+1, ...))."""
    h = grid.dt
    e, g1, g2 = (float(v) for v in phi_functions(lam * h))
    pa, pb = h * g2, h * (g1 - g2)
    out = np.empty_like(coeffs)
    out[0] = 0.0
    for j in range(grid.M):
        out[j + 1] = e * out[j] + pa * coeffs[j] + pb * coeffs[j + 1]
    return out


# -- sources ------------------------------------------------------------------


@dataclass
class _PreparedSource:
    """Bounded part sampled on the padded box plus an affine part ``c0 + c1 . x``."""

    padded: np.ndarray  # (M+1, *pad_shape)
    c0: np.ndarray  # (M+1,)
    c1: np.ndarray  # (M+1, n)
    sampler: object = None  # callable t -> padded bounded part, for off-grid times


def _fit_affine(dom: PaddedDomain, vals_inner):
    grid = dom.grid
    pts = grid.points.reshape(-1, grid.n)
    design = np.hstack([np.ones((pts.shape[0], 1)), pts])
    coef, *_ = np.linalg.lstsq(design, vals_inner.reshape(-1), rcond=None)
    return coef[0], coef[1:]


def _prepare(f: Source, dom: PaddedDomain, grid: GridSpec, affine=None) -> _PreparedSource:
    n = grid.n
    times = grid.times
    c0 = np.zeros(grid.M + 1)
    c1 = np.zeros((grid.M + 1, n))
    if f is None:
        return _PreparedSource(np.zeros((grid.M + 1,) + dom.shape), c0, c1, lambda t: np.zeros(dom.shape))
    if isinstance(f, GridField):
        raw_inner = f.values
    else:
        raw_inner = None
    if affine == "auto":
        for j, t in enumerate(times):
            inner = raw_inner[j] if raw_inner is not None else np.broadcast_to(
                np.asarray(f(t, grid.points), dtype=float), grid.space_shape)
            c0[j], c1[j] = _fit_affine(dom, inner)
    elif affine is not None:
        fn0, fn1 = affine
        for j, t in enumerate(times):
            c0[j] = fn0(t)
            c1[j] = np.atleast_1d(fn1(t))

    def bounded(t, j=None):
        if raw_inner is not None:
            inner = raw_inner[j] if j is not None else f.at_time(t)
            if affine is not None:
                a0, a1 = _affine_at(c0, c1, grid, t, j)
                inner = inner - a0 - grid.points @ a1
            return dom.extend(inner)
        vals = np.broadcast_to(np.asarray(f(t, dom.points), dtype=float), dom.shape)
        if affine is not None:
            a0, a1 = _affine_at(c0, c1, grid, t, j)
            vals = vals - a0 - dom.points @ a1
        return vals * dom.window

    padded = np.stack([bounded(t, j) for j, t in enumerate(times)])
    return _PreparedSource(padded, c0, c1, bounded)


def _affine_at(c0, c1, grid, t, j):
    if j is not None:
        return c0[j], c1[j]
    s = np.clip(t / grid.dt, 0.0, grid.M)
    i = min(int(math.floor(s)), grid.M - 1)
    w = s - i
    return (1 - w) * c0[i] + w * c0[i + 1], (1 - w) * c1[i] + w * c1[i + 1]


# -- public solvers -------------------------------------------------------------


def _check_space_independent(spec: DiffusionSpec):
    if spec.a_space is not None:
        raise HypothesisError("G_lambda needs a space-independent diffusion; use solve_drifted")


def _solve_hat(f, spec, lam, grid, affine):
    if lam < 0:
        raise HypothesisError("lambda must be nonnegative")
    dom = PaddedDomain(grid, spec.Gamma)
    src = _prepare(f, dom, grid, affine)
    uhat = _etd_march(dom, spec, lam, grid, dom.fft(src.padded))
    a0 = _scalar_march(lam, grid, src.c0)
    a1 = _scalar_march(lam, grid, src.c1)
    return dom, uhat, a0, a1


def solve_g_lambda(f: Source, spec: DiffusionSpec, lam: float, grid: GridSpec, method: str = "etd",
                   affine=None) -> GridField:
    """Sample ``u = G_lambda f`` on the grid.

    ``f`` is a callable ``f(t, x)`` (``x`` of shape ``(..., n)``) or a scalar
    :class:`GridField`. ``affine="auto"`` splits off a fitted affine part, whose
    image is computed in closed form (use it for linearly growing sources).
    """
    _check_space_independent(spec)
    if method == "quadrature":
        return _quadrature_solve(f, spec, lam, grid, affine, "u")
    if method != "etd":
        raise ValueError(f"unknown method {method!r}")
    dom, uhat, a0, a1 = _solve_hat(f, spec, lam, grid, affine)
    u = dom.crop(dom.ifft(uhat)) + a0[(slice(None),) + (None,) * grid.n]
    u = u + np.einsum("...i,ti->t...", grid.points, a1)
    return GridField(u, grid, role="solution")


def g_lambda_derivatives(f: Source, spec: DiffusionSpec, lam: float, grid: GridSpec, affine=None):
    """``(u, grad u, hess u)`` with spectral space derivatives of the marched solution."""
    _check_space_independent(spec)
    dom, uhat, a0, a1 = _solve_hat(f, spec, lam, grid, affine)
    return _fields_from_hat(dom, grid, uhat, a0, a1)


def _fields_from_hat(dom, grid, uhat, a0=None, a1=None):
    n = grid.n
    u = dom.crop(dom.ifft(uhat))
    grad = np.stack([dom.crop(dom.ifft(dom.deriv_hat(uhat, (i,)))) for i in range(n)], axis=-1)
    hess = np.empty(grad.shape + (n,))
    for i in range(n):
        for j in range(i, n):
            hess[..., i, j] = dom.crop(dom.ifft(dom.deriv_hat(uhat, (i, j))))
            hess[..., j, i] = hess[..., i, j]
    if a0 is not None:
        u = u + a0[(slice(None),) + (None,) * n] + np.einsum("...i,ti->t...", grid.points, a1)
        grad = grad + a1[(slice(None),) + (None,) * n + (slice(None),)]
    return (GridField(u, grid, "solution"), GridField(grad, grid, "gradient", (n,)),
            GridField(hess, grid, "hessian", (n, n)))


def _kernel_symbol(dom, spec, r, t):
    if t - r < POINT_MASS_GAP:
        return np.ones(dom.kshape)
    return np.exp(-0.5 * dom.quad_form(accumulated_matrix(spec, r, t)))


def _sampled_hessian_kernel_hat(dom, spec, r, t):
    """Transforms of the grid-sampled kernel Hessian (periodic, FFT ordering), scaled by dx^n."""
    n = dom.grid.n
    A = accumulated_matrix(spec, r, t)
    A = 0.5 * (A + A.T)
    B = np.linalg.inv(A)
    dx = dom.grid.dx
    d1 = dx * np.fft.fftfreq(dom.N, 1.0 / dom.N)
    disp = np.stack(np.meshgrid(*([d1] * n), indexing="ij"), axis=-1)
    q = np.einsum("...i,ij,...j->...", disp, B, disp)
    k = (2.0 * math.pi) ** (-n / 2.0) * math.sqrt(np.linalg.det(B)) * np.exp(-0.5 * q)
    bx = disp @ B.T
    out = {}
    for i in range(n):
        for j in range(i, n):
            kij = k * (bx[..., i] * bx[..., j] - B[i, j])
            out[(i, j)] = dom.fft(kij) * dx ** n
    return out


def _graded_nodes(t, grid):
    """Gaps ``s`` from ``r = t`` with ``s = T sigma^2``; trapezoid weights in ``sigma``."""
    T, M = grid.T, grid.M
    smax = math.sqrt(t / T)
    sig = np.arange(0, int(math.floor(smax * M)) + 1) / M
    if smax - sig[-1] > 1e-12:
        sig = np.append(sig, smax)
    w = np.zeros_like(sig)
    ds = np.diff(sig)
    w[:-1] += 0.5 * ds
    w[1:] += 0.5 * ds
    gaps = T * sig * sig
    # ds = 2 T sigma dsigma
    return gaps, w * 2.0 * T * sig


def _quadrature_solve(f, spec, lam, grid, affine, what):
    dom = PaddedDomain(grid, spec.Gamma)
    src = _prepare(f, dom, grid, affine)
    n = grid.n
    nt = grid.M + 1
    if what == "u":
        out = np.zeros((nt,) + grid.space_shape)
    else:
        out = np.zeros((nt,) + grid.space_shape + (n, n))
    cache = {}
    for jt, t in enumerate(grid.times):
        if t == 0.0:
            continue
        gaps, weights = _graded_nodes(t, grid)
        acc = np.zeros(dom.kshape, dtype=complex) if what == "u" else None
        hacc = {}
        for s, w in zip(gaps, weights):
            if w == 0.0:
                continue
            r = t - s
            fr = src.sampler(r)
            fhat = dom.fft(fr)
            damp = w * math.exp(-lam * s)
            if what == "u":
                acc += damp * _kernel_symbol(dom, spec, r, t) * fhat
                continue
            if s < POINT_MASS_GAP:
                continue
            key = s if spec.is_constant() else (r, t)
            if key not in cache:
                cache[key] = _sampled_hessian_kernel_hat(dom, spec, r, t)
            khat = cache[key]
            for ij, kh in khat.items():
                term = dom.ifft(kh * fhat) - fr * kh.flat[0].real
                hacc[ij] = hacc.get(ij, 0.0) + damp * term
        if what == "u":
            out[jt] = dom.crop(dom.ifft(acc), lead=0)
        else:
            for (i, j), val in hacc.items():
                out[jt][..., i, j] = dom.crop(val, lead=0)
                out[jt][..., j, i] = out[jt][..., i, j]
    if what == "u":
        a0 = _scalar_march(lam, grid, src.c0)
        a1 = _scalar_march(lam, grid, src.c1)
        out = out + a0[(slice(None),) + (None,) * n] + np.einsum("...i,ti->t...", grid.points, a1)
        return GridField(out, grid, role="solution")
    return GridField(out, grid, role="hessian", component_shape=(n, n))


def second_derivative_field(f: Source, spec: DiffusionSpec, lam: float, grid: GridSpec,
                            affine=None) -> GridField:
    """``hess u`` via the subtraction form ``int K_xx(x-z)[f(r,z) - f(r,x)] dz``.

    The grid-sampled kernel Hessian is convolved with ``f`` and the kernel's total
    grid sum times ``f(x)`` is removed, which cancels constants exactly.
    """
    _check_space_independent(spec)
    if lam < 0:
        raise HypothesisError("lambda must be nonnegative")
    return _quadrature_solve(f, spec, lam, grid, affine, "hess")


# -- norms ---------------------------------------------------------------------------


def _time_aggregate(values, grid: GridSpec, p: float) -> float:
    values = np.asarray(values, dtype=float)
    if math.isinf(p):
        return float(np.max(values)) if values.size else 0.0
    return float(np.trapezoid(values ** p, grid.times) ** (1.0 / p))


def _pointwise_norm(values, comp_axes):
    if comp_axes == 0:
        return np.abs(values)
    return np.sqrt(np.sum(values.reshape(values.shape[: values.ndim - comp_axes] + (-1,)) ** 2, axis=-1))


@dataclass
class NormProfile:
    """Per-time norm components and their time aggregates."""

    times: np.ndarray
    per_time: dict
    aggregates: dict


def lp_time_norm(fields, label: ClassLabel, modulus, pair_budget: int = 0, seed: int = 0,
                 alpha: Optional[float] = None) -> NormProfile:
    """Lebesgue-in-time Holder-Dini norm of ``fields = [h, grad h, ..., grad^k h]``.

    Per time: weighted (``theta='l'``) or plain sup of ``h``, sup norms of the
    derivative fields, and the ``(alpha, rho)`` seminorm of the top derivative.
    These are summed and aggregated in time by the ``L^p`` norm (max for ``p = inf``).
    ``modulus`` may be any callable ``r -> rho(r)``.
    """
    fields = list(fields)
    grid = check_same_grid(*fields)
    alpha = label.alpha if alpha is None else alpha
    n = grid.n
    weight = 1.0
    if label.theta == "l":
        weight = 1.0 / (1.0 + np.linalg.norm(grid.points, axis=-1))
    per = {}
    per["sup0"] = np.array([np.max(np.abs(fields[0].values[j]) * weight) for j in range(grid.M + 1)])
    for order, fld in enumerate(fields[1:], start=1):
        comp = len(fld.component_shape)
        per[f"sup{order}"] = np.array([np.max(_pointwise_norm(fld.values[j], comp)) for j in range(grid.M + 1)])
    top = fields[-1]
    comp = len(top.component_shape)
    semi = np.empty(grid.M + 1)
    for j in range(grid.M + 1):
        semi[j] = holder_seminorm(top.values[j], alpha, modulus, grid.dx, pair_budget=pair_budget,
                                  seed=seed, value_axes=comp)
    per["seminorm"] = semi
    total = sum(per.values())
    per["total"] = total
    aggregates = {k: _time_aggregate(v, grid, label.p) for k, v in per.items()}
    return NormProfile(times=grid.times, per_time=per, aggregates=aggregates)


@dataclass
class RegularityReport:
    """Solution and source norms with their ratio, at one or two resolutions."""

    solution: NormProfile
    source: NormProfile
    ratio: float
    label: ClassLabel
    refinement: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def relative_change(self) -> float:
        if len(self.refinement) < 2:
            return float("nan")
        a, b = self.refinement[:2]
        if a == 0.0 and b == 0.0:
            return 0.0
        return abs(b - a) / max(abs(a), abs(b))

    def rows(self):
        """``(quantity, t, value)`` rows; aggregates use ``t = 'aggregate'``."""
        out = []
        for prefix, prof in (("solution", self.solution), ("source", self.source)):
            for name, vals in prof.per_time.items():
                for t, v in zip(prof.times, vals):
                    out.append((f"{prefix}.{name}", float(t), float(v)))
        for prefix, prof in (("solution", self.solution), ("source", self.source)):
            for name, v in prof.aggregates.items():
                out.append((f"{prefix}.{name}", "aggregate", float(v)))
        out.append(("ratio", "aggregate", float(self.ratio)))
        for i, r in enumerate(self.refinement):
            out.append((f"ratio.level{i}", "aggregate", float(r)))
        for k, v in self.extra.items():
            if isinstance(v, (int, float)):
                out.append((k, "aggregate", float(v)))
        return out


def _safe_ratio(a, b):
    if a == 0.0 and b == 0.0:
        return 0.0
    return a / b if b > 0 else math.inf


def _source_field(f: Source, grid: GridSpec) -> GridField:
    if isinstance(f, GridField):
        return f
    if f is None:
        return GridField(np.zeros((grid.M + 1,) + grid.space_shape), grid, "source")
    return GridField.from_function(f, grid, role="source")


def _check_admissible(modulus, label):
    if not isinstance(modulus, ModulusSpec):
        return
    cls = classify_modulus(modulus, label.alpha, label.p, label.theta)
    if not cls.regularity_admissible:
        raise HypothesisError("increasing modulus must be slowly varying at zero")


def _solution_profile(f, spec, lam, grid, label, modulus, pair_budget, seed, affine):
    u, grad, _ = g_lambda_derivatives(f, spec, lam, grid, affine=affine)
    hess = second_derivative_field(f, spec, lam, grid, affine=affine)
    sol = lp_time_norm([u, grad, hess], label, modulus, pair_budget, seed)
    src = lp_time_norm([_source_field(f, grid)], label, modulus, pair_budget, seed)
    return sol, src, (u, grad, hess)


def verify_maximal_regularity(f: Source, spec: DiffusionSpec, lam: float, grid: GridSpec,
                              label: ClassLabel, modulus, pair_budget: int = 256, seed: int = 0,
                              refine: bool = True) -> RegularityReport:
    """Ratio of the ``L^p C^{2+alpha,rho}`` norm of ``G_lambda f`` to the ``L^p C^{alpha,rho}`` norm of ``f``.

    Computed on ``grid`` and, with ``refine``, on the grid with ``2N`` points.
    """
    _check_admissible(modulus, label)
    grid = grid.with_p(label.p)
    affine = "auto" if label.theta == "l" else None
    ratios = []
    first = None
    for g in ([grid, grid.refined()] if refine else [grid]):
        sol, src, _ = _solution_profile(f, spec, lam, g, label, modulus, pair_budget, seed, affine)
        ratios.append(_safe_ratio(sol.aggregates["total"], src.aggregates["total"]))
        if first is None:
            first = (sol, src)
    sol, src = first
    return RegularityReport(solution=sol, source=src, ratio=ratios[0], label=label,
                            refinement=tuple(ratios), extra={"lambda": lam, "seed": seed})


def verify_embedding(f: Source, spec: DiffusionSpec, lam: float, grid: GridSpec, label: ClassLabel,
                     modulus, pair_budget: int = 256, seed: int = 0, refine: bool = True) -> RegularityReport:
    """Sup-in-time regularity of ``u`` predicted by the parabolic embedding.

    For ``alpha`` away from ``2/p - 1`` and ``2/p`` the exponent is
    ``2 + alpha - 2/p`` with modulus ``rho``; at the two endpoints (Dini class only)
    the exponent is the integer ``1`` or ``2`` and the modulus is the sharp modulus.
    """
    p = label.p
    two_p = 0.0 if math.isinf(p) else 2.0 / p
    alpha = label.alpha
    if alpha < two_p - 1.0 - 1e-12:
        raise HypothesisError(f"alpha={alpha} below 2/p - 1 = {two_p - 1.0}")
    _check_admissible(modulus, label)
    grid = grid.with_p(p)
    endpoint = abs(alpha - two_p) < 1e-12 or abs(alpha - (two_p - 1.0)) < 1e-12
    if endpoint:
        if label.varsigma != "d":
            raise HypothesisError("endpoint exponents need a Dini modulus")
        order = int(round(2 + alpha - two_p))
        exponent = 0.0
        out_modulus = rho_hat_function(modulus)
    else:
        theta_exp = 2.0 + alpha - two_p
        order = int(math.floor(theta_exp))
        exponent = theta_exp - order
        out_modulus = modulus
    affine = "auto" if label.theta == "l" else None
    sup_label = ClassLabel(varsigma=label.varsigma, alpha=label.alpha, theta=label.theta, p=math.inf)
    ratios, consts = [], []
    first = None
    for g in ([grid, grid.refined()] if refine else [grid]):
        u, grad, _ = g_lambda_derivatives(f, spec, lam, g, affine=affine)
        fields = [u, grad]
        if order == 2:
            fields.append(second_derivative_field(f, spec, lam, g, affine=affine))
        sol = lp_time_norm(fields, sup_label, out_modulus, pair_budget, seed, alpha=exponent)
        src = lp_time_norm([_source_field(f, g)], label, modulus, pair_budget, seed)
        ratios.append(sol.aggregates["seminorm"])
        consts.append(_safe_ratio(sol.aggregates["total"], src.aggregates["total"]))
        if first is None:
            first = (sol, src)
    sol, src = first
    return RegularityReport(solution=sol, source=src, ratio=consts[0], label=label,
                            refinement=tuple(ratios),
                            extra={"order": order, "exponent": exponent, "endpoint": endpoint,
                                   "constant_refined": consts[-1], "lambda": lam})


# -- drifted equation ---------------------------------------------------------------


@dataclass
class DriftedResult:
    u: GridField
    grad: GridField
    hess: GridField
    trace: list
    residual: float
    lam: float


def _apply_operator(dom, grid, vhat, g_pad, da_pad):
    """``1/2 sum (a_ij(t,x) - a_ij(t)) d_ij v + g . grad v`` on the padded box, all times."""
    n = grid.n
    out = np.zeros((grid.M + 1,) + dom.shape)
    if g_pad is not None:
        for i in range(n):
            out += g_pad[..., i] * dom.ifft(dom.deriv_hat(vhat, (i,)))
    if da_pad is not None:
        for i in range(n):
            for j in range(n):
                out += 0.5 * da_pad[..., i, j] * dom.ifft(dom.deriv_hat(vhat, (i, j)))
    return out


def _picard(dom, spec, lam, grid, fhat, vhat, g_pad, da_pad, tau, tol, max_iter):
    """Iterate ``v <- G_lambda[tau L v + f]``; returns (vhat, max ratio, iterations, converged)."""
    prev_diff = None
    ratios = []
    for it in range(1, max_iter + 1):
        lv = _apply_operator(dom, grid, vhat, g_pad, da_pad) if tau != 0.0 else 0.0
        src = fhat + (dom.fft(tau * lv * dom.window) if tau != 0.0 else 0.0)
        new = _etd_march(dom, spec, lam, grid, src)
        delta = new - vhat
        diff = _h2_sup(dom, delta)
        scale = max(1.0, _h2_sup(dom, new))
        vhat = new
        if prev_diff is not None and prev_diff > 1e-14 * scale:
            ratios.append(diff / prev_diff)
        prev_diff = diff
        if diff <= tol * scale:
            return vhat, (max(ratios) if ratios else 0.0), it, True
        if len(ratios) >= 3 and min(ratios[-3:]) >= 1.0:
            break
    return vhat, (max(ratios) if ratios else 0.0), it, False


def _h2_sup(dom, vhat):
    n = dom.grid.n
    total = np.max(np.abs(dom.crop(dom.ifft(vhat))))
    for i in range(n):
        total += np.max(np.abs(dom.crop(dom.ifft(dom.deriv_hat(vhat, (i,))))))
        for j in range(i, n):
            total += np.max(np.abs(dom.crop(dom.ifft(dom.deriv_hat(vhat, (i, j))))))
    return float(total)


def _sample_vector(g, dom, grid, shape_tail):
    if g is None:
        return None
    if isinstance(g, GridField):
        vals = g.values
        pads = []
        for j in range(grid.M + 1):
            comps = vals[j].reshape(grid.space_shape + (-1,))
            pads.append(np.stack([dom.extend(comps[..., c]) for c in range(comps.shape[-1])], axis=-1))
        return np.stack(pads).reshape((grid.M + 1,) + dom.shape + shape_tail)
    return np.stack([np.broadcast_to(np.asarray(g(t, dom.points), dtype=float), dom.shape + shape_tail)
                     * dom.window[(...,) + (None,) * len(shape_tail)] for t in grid.times])


def solve_drifted(f: Source, g: Source, a: DiffusionSpec, lam: float, grid: GridSpec,
                  label: Optional[ClassLabel] = None, modulus=None, tol: float = 1e-10,
                  max_iter: int = 200, tau_steps: int = 8, min_tau_step: float = 1.0 / 256) -> DriftedResult:
    """Solve ``du/dt = 1/2 a(t,x):D^2 u + g . grad u - lambda u + f``, ``u(0) = 0``.

    The fixed point of ``v -> G_lambda[tau (1/2 (a(t,x) - a(t)):D^2 v + g . grad v) + f]``
    is continued from ``tau = 0`` to ``tau = 1``. A step is retried at half size
    when its measured contraction factor reaches 0.8.
    """
    n = grid.n
    dom = PaddedDomain(grid, a.Gamma)
    src = _prepare(f, dom, grid, None)
    fhat = dom.fft(src.padded)
    g_pad = _sample_vector(g, dom, grid, (n,))
    da_pad = None
    if a.a_space is not None:
        frozen = np.stack([np.atleast_2d(a.a_time(t)) for t in grid.times])
        da_pad = np.stack([np.asarray(a.a_space(t, dom.points), dtype=float) - frozen[j]
                           for j, t in enumerate(grid.times)])
        da_pad = da_pad * dom.window[(...,) + (None, None)]
    frozen_spec = DiffusionSpec(n=n, a_time=a.a_time, Gamma=a.Gamma,
                                constant_matrix=None if a.a_space is not None else a.constant_matrix)
    vhat = _etd_march(dom, frozen_spec, lam, grid, fhat)
    trace = [{"tau": 0.0, "factor": 0.0, "iterations": 1}]
    active = g_pad is not None or da_pad is not None
    tau = 0.0
    step = 1.0 / tau_steps
    tried = []
    while active and tau < 1.0 - 1e-14:
        target = min(1.0, tau + step)
        tried.append(target)
        cand, factor, iters, ok = _picard(dom, frozen_spec, lam, grid, fhat, vhat, g_pad, da_pad,
                                          target, tol, max_iter)
        if factor >= 0.8 and step > min_tau_step:
            step *= 0.5
            continue
        if not ok:
            raise NonContractionError(
                f"contraction failed at tau={target:.6g} (factor {factor:.3g}) with lambda={lam}; "
                f"tau values tried: {', '.join(f'{x:.6g}' for x in tried)}"
            )
        vhat = cand
        tau = target
        trace.append({"tau": tau, "factor": factor, "iterations": iters})
    u, grad, hess = _fields_from_hat(dom, grid, vhat)
    residual = _drifted_residual(u, grad, hess, f, g, a, lam, grid)
    return DriftedResult(u=u, grad=grad, hess=hess, trace=trace, residual=residual, lam=lam)


def _drifted_residual(u, grad, hess, f, g, a, lam, grid):
    """Sup over interior space-time nodes of the PDE residual (central differences in time)."""
    pts = grid.points
    n = grid.n
    worst = 0.0
    edge = max(1, grid.N // 16)
    inner = tuple(slice(edge, grid.N - edge) for _ in range(n))
    for j in range(1, grid.M):
        t = grid.times[j]
        dudt = (u.values[j + 1] - u.values[j - 1]) / (2.0 * grid.dt)
        if a.a_space is not None:
            amat = np.asarray(a.a_space(t, pts), dtype=float)
        else:
            amat = np.broadcast_to(np.atleast_2d(a.a_time(t)), grid.space_shape + (n, n))
        diff = 0.5 * np.einsum("...ij,...ij->...", amat, hess.values[j])
        drift = 0.0
        if g is not None:
            gv = g.values[j] if isinstance(g, GridField) else np.broadcast_to(
                np.asarray(g(t, pts), dtype=float), grid.space_shape + (n,))
            drift = np.einsum("...i,...i->...", gv, grad.values[j])
        if f is None:
            fv = 0.0
        elif isinstance(f, GridField):
            fv = f.values[j]
        else:
            fv = np.asarray(f(t, pts), dtype=float)
        res = dudt - diff - drift + lam * u.values[j] - fv
        worst = max(worst, float(np.max(np.abs(res[inner]))))
    return worst
