"""Moduli of continuity: evaluation, Dini integrals, sharp modulus, classification.

A modulus is a positive monotone function ``rho`` on ``(0, 1]``. Three kinds are
supported:

``log_power``
    ``rho(r) = |log r|**beta`` below ``cutoff``, continued to ``[cutoff, 1]`` by a
    quadratic matching value and slope at the cutoff. The quadratic flattens out
    (zero slope) at ``cutoff + w`` and stays constant after that, so the
    continuation is C^1, monotone, and positive.
``constant``
    ``rho(r) = c``.
``tabulated``
    Samples ``(r_i, rho_i)`` interpolated linearly in log-log coordinates. Below the
    first sample the first log-log segment is extended as a power law; above the
    last sample the modulus is held constant.

Every modulus may carry an ``exponent`` e, in which case the object represents
``rho**e`` (used for Dini tests of ``rho**(2p/(5p-2))``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from . import kernels
from .errors import (
    ClassificationError,
    DomainError,
    InvalidSpecError,
    NotApplicableError,
    QuadratureError,
)

_QUAD_RTOL = 1e-12
_QUAD_LIMIT = 500
# local log-log slope below which a tabulated modulus counts as power-free
_POWER_FREE_SLOPE = 0.15


@dataclass(frozen=True, eq=False)
class ModulusSpec:
    """Immutable description of a modulus of continuity.

    Use the constructors :meth:`log_power`, :meth:`constant`, :meth:`tabulated`
    and :meth:`from_csv` rather than the raw initializer.
    """

    kind: str
    beta: float = 0.0
    c: float = 1.0
    cutoff: float = 0.5
    r_samples: tuple = ()
    rho_samples: tuple = ()
    exponent: float = 1.0
    _ext: tuple = field(default=(), repr=False)

    @classmethod
    def log_power(cls, beta: float, cutoff: float = 0.5) -> "ModulusSpec":
        beta = float(beta)
        cutoff = float(cutoff)
        if beta == 0.0:
            return cls.constant(1.0)
        if not 0.0 < cutoff < 1.0:
            raise InvalidSpecError("log_power cutoff must lie in (0, 1)")
        if not math.isfinite(beta):
            raise InvalidSpecError("beta must be finite")
        v0 = abs(math.log(cutoff)) ** beta
        s0 = -beta * abs(math.log(cutoff)) ** (beta - 1.0) / cutoff
        w = 1.0 - cutoff
        if s0 != 0.0:
            w = min(w, v0 / abs(s0))
        return cls(kind="log_power", beta=beta, cutoff=cutoff, _ext=(v0, s0, w))

    @classmethod
    def constant(cls, c: float = 1.0) -> "ModulusSpec":
        c = float(c)
        if not (c > 0.0 and math.isfinite(c)):
            raise InvalidSpecError("constant modulus must be positive and finite")
        return cls(kind="constant", c=c, cutoff=1.0)

    @classmethod
    def tabulated(cls, r: Sequence[float], rho: Sequence[float]) -> "ModulusSpec":
        r = np.asarray(r, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if r.ndim != 1 or r.shape != rho.shape or r.size < 2:
            raise InvalidSpecError("tabulated modulus needs two equal-length 1-D arrays (>= 2 samples)")
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(rho)):
            raise InvalidSpecError("tabulated samples must be finite")
        if np.any(r <= 0.0):
            raise InvalidSpecError("tabulated r samples must be positive")
        if np.any(np.diff(r) <= 0.0):
            raise InvalidSpecError("tabulated r samples must be strictly increasing")
        if np.any(rho <= 0.0):
            raise InvalidSpecError("non-positive modulus sample")
        return cls(kind="tabulated", cutoff=1.0, r_samples=tuple(r), rho_samples=tuple(rho))

    @classmethod
    def from_csv(cls, path) -> "ModulusSpec":
        """Load a two-column ``r,rho`` CSV (header row optional)."""
        rs, rhos = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    r_val, rho_val = float(row[0]), float(row[1])
                except ValueError:
                    if rs:
                        raise InvalidSpecError(f"malformed row in {path}: {row}")
                    continue
                rs.append(r_val)
                rhos.append(rho_val)
        return cls.tabulated(rs, rhos)

    def powered(self, q: float) -> "ModulusSpec":
        """The modulus ``rho**q``."""
        return replace(self, exponent=self.exponent * float(q))

    # -- evaluation -------------------------------------------------------

    @property
    def effective_beta(self) -> float:
        return self.beta * self.exponent

    def __call__(self, r):
        """Vectorized evaluation for ``r > 0`` (no domain check above 1)."""
        r = np.asarray(r, dtype=float)
        return np.exp(self.log_value(r))

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.full(r.shape, self.exponent * math.log(self.c))
        if self.kind == "log_power":
            v0, s0, w = self._ext
            c = self.cutoff
            with np.errstate(divide="ignore", invalid="ignore"):
                inner = self.beta * np.log(np.abs(np.log(np.minimum(r, c))))
            d = np.clip(r - c, 0.0, w)
            outer = np.log(v0 + s0 * d - s0 * d * d / (2.0 * w))
            return self.exponent * np.where(r < c, inner, outer)
        lr = np.log(np.asarray(self.r_samples))
        lv = np.log(np.asarray(self.rho_samples))
        x = np.log(r)
        out = np.interp(x, lr, lv)
        slope0 = (lv[1] - lv[0]) / (lr[1] - lr[0])
        out = np.where(x < lr[0], lv[0] + slope0 * (x - lr[0]), out)
        return self.exponent * out

    # -- structure --------------------------------------------------------

    def direction(self) -> int:
        """+1 increasing, -1 decreasing, 0 constant; raises if not monotone."""
        if self.kind == "constant":
            return 0
        if self.kind == "log_power":
            if self.effective_beta == 0.0:
                return 0
            return 1 if self.effective_beta < 0 else -1
        d = np.diff(np.asarray(self.rho_samples))
        if np.all(d == 0):
            return 0
        sign = 1 if self.exponent > 0 else -1
        if np.all(d >= 0):
            return sign
        if np.all(d <= 0):
            return -sign
        idx = int(np.flatnonzero(np.sign(d[1:]) * np.sign(d[:-1]) < 0)[0]) + 1
        raise ClassificationError(
            f"tabulated modulus is not monotone: slope changes sign near r={self.r_samples[idx]:.6g}"
        )

    def breakpoints(self) -> list:
        if self.kind == "log_power":
            pts = [self.cutoff]
            end = self.cutoff + self._ext[2]
            if end < 1.0:
                pts.append(end)
            return pts
        return []

    def small_scale_slope(self) -> float:
        """Log-log slope of the modulus at the smallest represented scale."""
        if self.kind == "constant":
            return 0.0
        if self.kind == "log_power":
            return 0.0
        lr = np.log(np.asarray(self.r_samples))
        lv = np.log(np.asarray(self.rho_samples))
        return float(self.exponent * (lv[1] - lv[0]) / (lr[1] - lr[0]))


@dataclass(frozen=True)
class DiniResult:
    """Outcome of a Dini integral: ``finite`` flag and value (``inf`` if divergent)."""

    finite: bool
    value: float


@dataclass(frozen=True)
class RhoHatTable:
    r: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class ClassLabel:
    varsigma: str
    alpha: float
    theta: str = "l"
    p: float = math.inf

    def __post_init__(self):
        if self.varsigma not in ("d", "s", "c", "w"):
            raise InvalidSpecError(f"unknown class {self.varsigma!r}")
        if not 0.0 <= self.alpha < 1.0:
            raise InvalidSpecError("alpha must lie in [0, 1)")
        if self.theta not in ("l", "b"):
            raise InvalidSpecError("theta must be 'l' or 'b'")
        if not self.p > 1.0:
            raise InvalidSpecError("p must exceed 1")


@dataclass(frozen=True)
class Classification:
    label: ClassLabel
    dini: bool
    slowly_varying: bool
    direction: int
    regularity_admissible: bool
    flow_admissible: bool
    diagnostic: str = ""


@dataclass(frozen=True)
class LimitTable:
    delta: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    tail: np.ndarray
    alpha: float


# -- quadrature helpers ----------------------------------------------------


def _quad(fn, a, b, points=None):
    pts = None
    if points:
        pts = [p for p in points if a < p < b] or None
    if pts is not None and (math.isinf(a) or math.isinf(b)):
        # quad rejects breakpoints on infinite ranges; split by hand
        total, err = 0.0, 0.0
        edges = [a] + sorted(pts) + [b]
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e = _quad(fn, lo, hi)
            total += v
            err += e
        return total, err
    val, err, info = integrate.quad(
        fn, a, b, points=pts, epsabs=0.0, epsrel=_QUAD_RTOL, limit=_QUAD_LIMIT, full_output=1
    )[:3]
    scale = max(abs(val), 1e-300)
    if err > 1e-8 * scale and err > 1e-14:
        raise QuadratureError(
            f"quadrature on [{a}, {b}] reached only relative error {err / scale:.3g}", achieved=err
        )
    return val, err


def _segment_power_integral(rho_i, r_i, k, x, y):
    """Integral of rho_i * (r/r_i)**k over [x, y] (0 <= x <= y)."""
    if y <= x:
        return 0.0
    kp = k + 1.0
    uy = math.log(y / r_i)
    if x == 0.0:
        if kp <= 0.0:
            return math.inf
        return rho_i * r_i * math.exp(kp * uy) / kp
    ux = math.log(x / r_i)
    if abs(kp) < 1e-12:
        return rho_i * r_i * (uy - ux)
    return rho_i * r_i * (math.expm1(kp * uy) - math.expm1(kp * ux)) / kp


def _tabulated_integral(spec: ModulusSpec, gamma: float, a: float, b: float) -> float:
    """Exact integral of rho(r) r**gamma over [a, b] for the log-log interpolant."""
    e = spec.exponent
    r = np.asarray(spec.r_samples)
    v = np.asarray(spec.rho_samples) ** e
    lr, lv = np.log(r), np.log(v)
    slopes = np.diff(lv) / np.diff(lr)
    segs = [(0.0, r[0], v[0], r[0], slopes[0])]
    for i in range(len(r) - 1):
        segs.append((r[i], r[i + 1], v[i], r[i], slopes[i]))
    segs.append((r[-1], math.inf, v[-1], r[-1], 0.0))
    total = 0.0
    for lo, hi, rho_i, r_i, s in segs:
        x, y = max(lo, a), min(hi, b)
        if y <= x:
            continue
        # rho(r) r^gamma = rho_i r_i^gamma (r/r_i)^(s+gamma)
        total += (r_i ** gamma) * _segment_power_integral(rho_i, r_i, s + gamma, x, y)
    return total


def weighted_integral(spec: ModulusSpec, gamma: float, a: float, b: float) -> float:
    """Integral of ``rho(r) * r**gamma`` over ``[a, b]``, ``0 <= a <= b``.

    ``a = 0`` is allowed when the integral converges at the origin.
    """
    if b <= a:
        return 0.0
    if spec.kind == "tabulated":
        return _tabulated_integral(spec, gamma, a, b)
    if spec.kind == "constant" or spec.effective_beta == 0.0:
        cval = spec.c ** spec.exponent if spec.kind == "constant" else 1.0
        if abs(gamma + 1.0) < 1e-14:
            if a == 0.0:
                return math.inf
            return cval * math.log(b / a)
        if a == 0.0 and gamma + 1.0 <= 0.0:
            return math.inf
        return cval * (b ** (gamma + 1.0) - a ** (gamma + 1.0)) / (gamma + 1.0)
    # log-power: substitute u = log r, integrand rho(e^u) e^{(gamma+1)u}
    g1 = gamma + 1.0

    def fn(u):
        return math.exp(float(spec.log_value(math.exp(u))) + g1 * u)

    if a == 0.0:
        if g1 <= 0.0:
            if g1 == 0.0 and spec.effective_beta < -1.0:
                head = min(b, spec.cutoff)
                val = abs(math.log(head)) ** (spec.effective_beta + 1.0) / (-spec.effective_beta - 1.0)
                if b > head:
                    val += weighted_integral(spec, gamma, head, b)
                return val
            return math.inf
        lo = -math.inf
    else:
        lo = math.log(a)
    pts = [math.log(p) for p in spec.breakpoints()]
    val, _ = _quad(fn, lo, math.log(b), points=pts)
    return val


# -- operations ------------------------------------------------------------


def eval_modulus(spec: ModulusSpec, r: float) -> float:
    """Evaluate ``rho(r)`` for ``r`` in ``(0, 1]``."""
    r = float(r)
    if not 0.0 < r <= 1.0:
        raise DomainError(f"r={r} outside (0, 1]")
    return float(spec(r))


def dini_integral(spec: ModulusSpec, lower_cut: float = 1e-8, upper: float = 1.0) -> DiniResult:
    """Integral of ``rho(r)/r`` over ``(0, upper]``.

    The part on ``[lower_cut, upper]`` is integrated numerically; the part below
    ``lower_cut`` is classified analytically (log-power, constant) or by a Cauchy
    test over decades plus the power-law extrapolation of the table.
    """
    if not 0.0 < lower_cut <= 1e-8:
        raise DomainError("lower_cut must lie in (0, 1e-8]")
    if not 0.0 < upper <= 1.0:
        raise DomainError("upper must lie in (0, 1]")
    if spec.kind == "constant" or spec.effective_beta == 0.0 and spec.kind == "log_power":
        return DiniResult(False, math.inf)
    if spec.kind == "log_power":
        b = spec.effective_beta
        if b >= -1.0 or spec.direction() < 0:
            return DiniResult(False, math.inf)
        if upper <= lower_cut:
            return DiniResult(True, abs(math.log(upper)) ** (b + 1.0) / (-b - 1.0))
        head = min(upper, spec.cutoff)
        # s = -log r turns rho(r)/r dr into s**b ds
        body, _ = _quad(lambda s: s ** b, -math.log(head), -math.log(lower_cut))
        if upper > head:
            body += weighted_integral(spec, -1.0, head, upper)
        tail = abs(math.log(lower_cut)) ** (b + 1.0) / (-b - 1.0)
        return DiniResult(True, body + tail)
    return _tabulated_dini(spec, lower_cut, upper)


def _tabulated_dini(spec, lower_cut, upper):
    edges = [upper]
    while edges[-1] / 10.0 > lower_cut * (1 + 1e-12):
        edges.append(edges[-1] / 10.0)
    edges.append(lower_cut)
    increments = [weighted_integral(spec, -1.0, lo, hi) for hi, lo in zip(edges[:-1], edges[1:])]
    running = 0.0
    streak = 0
    prev = None
    for inc in increments:
        running += inc
        growing = prev is not None and inc >= prev
        if inc > 1e-3 * running and growing:
            streak += 1
            if streak >= 3:
                return DiniResult(False, math.inf)
        else:
            streak = 0
        prev = inc
    algebraic = _algebraic_decay(edges, increments)
    if algebraic is not None:
        gamma, density = algebraic
        if gamma <= 1.0:
            return DiniResult(False, math.inf)
        s_cut = -math.log(lower_cut)
        return DiniResult(True, running + density * s_cut / (gamma - 1.0))
    slope = spec.small_scale_slope() if lower_cut < spec.r_samples[0] else None
    if slope is None:
        lr = math.log(lower_cut)
        x = np.log(np.asarray(spec.r_samples))
        i = int(np.clip(np.searchsorted(x, lr) - 1, 0, len(x) - 2))
        slope = float(spec.exponent * (math.log(spec.rho_samples[i + 1]) - math.log(spec.rho_samples[i])) / (x[i + 1] - x[i]))
    if slope <= 0.0:
        return DiniResult(False, math.inf)
    tail = float(spec(lower_cut)) / slope
    return DiniResult(True, running + tail)


def _algebraic_decay(edges, increments, window: int = 5):
    """Decay exponent of decade increments when they look algebraic in ``log(1/r)``.

    A power-law modulus gives increments geometric in the decade index (linear in
    ``s = log(1/r)`` on a log scale); a log-type modulus gives increments
    ``~ s**(-gamma)`` (linear in ``log s``). When the second fit is the better one,
    returns ``gamma`` and the integrand density in ``s`` at the last edge, else ``None``.
    """
    inc = np.asarray(increments[-window:], dtype=float)
    if inc.size < window or np.any(inc <= 0.0):
        return None
    hi = np.asarray(edges[:-1][-window:], dtype=float)
    lo = np.asarray(edges[1:][-window:], dtype=float)
    s_mid = -0.5 * (np.log(hi) + np.log(lo))
    y = np.log(inc)
    fits = {}
    for name, x in (("power", s_mid), ("algebraic", np.log(s_mid))):
        coef = np.polyfit(x, y, 1)
        fits[name] = (float(np.sum((np.polyval(coef, x) - y) ** 2)), float(coef[0]))
    if fits["algebraic"][0] < fits["power"][0]:
        gamma = -fits["algebraic"][1]
        # integrand density in s at the cut, from the last decade
        density = float(inc[-1] / (math.log(hi[-1]) - math.log(lo[-1]))) * (s_mid[-1] / -math.log(lo[-1])) ** gamma
        return gamma, density
    return None


def rho_hat(spec: ModulusSpec, r_grid) -> RhoHatTable:
    """Sharp modulus ``int_0^r rho/tau + rho(r) + r int_r^1 rho/tau^2`` on a grid."""
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(r_grid <= 0.0) or np.any(r_grid > 1.0):
        raise DomainError("rho_hat grid must lie in (0, 1]")
    if not dini_integral(spec).finite:
        raise NotApplicableError("rho_hat needs a Dini modulus")
    r_sorted = np.sort(r_grid)[::-1]
    vals = np.empty_like(r_sorted)
    for i, r in enumerate(r_sorted):
        vals[i] = _dini_up_to(spec, r) + float(spec(r)) + r * weighted_integral(spec, -2.0, r, 1.0)
    return RhoHatTable(r=r_sorted, values=vals)


def rho_hat_function(spec: ModulusSpec):
    """Return a vectorized callable ``r -> rho_hat(r)`` (clipped to ``r <= 1``)."""
    table = rho_hat(spec, np.geomspace(1e-12, 1.0, 241))
    lr = np.log(table.r[::-1])
    lv = np.log(table.values[::-1])

    def fn(r):
        x = np.log(np.clip(np.asarray(r, dtype=float), 1e-12, 1.0))
        return np.exp(np.interp(x, lr, lv))

    return fn


def _dini_up_to(spec, r):
    if spec.kind == "log_power" and r <= spec.cutoff:
        b = spec.effective_beta
        if r <= 1e-8:
            return abs(math.log(r)) ** (b + 1.0) / (-b - 1.0)
        return dini_integral(spec, 1e-8, r).value
    if spec.kind == "tabulated":
        return weighted_integral(spec, -1.0, 0.0, r)
    return dini_integral(spec, 1e-8, r).value


def slowly_varying_ratio(spec: ModulusSpec, upsilon: float, r_seq) -> np.ndarray:
    """Ratios ``rho(upsilon r)/rho(r)`` along a sequence of scales."""
    if not upsilon > 0.0:
        raise DomainError("upsilon must be positive")
    r_seq = np.atleast_1d(np.asarray(r_seq, dtype=float))
    if np.any(r_seq <= 0.0):
        raise DomainError("scales must be positive")
    if np.any(upsilon * r_seq > 1.0):
        raise DomainError("upsilon * r exceeds 1")
    return np.exp(spec.log_value(upsilon * r_seq) - spec.log_value(r_seq))


def is_slowly_varying(spec: ModulusSpec) -> bool:
    if spec.kind in ("constant", "log_power"):
        return True
    r = np.asarray(spec.r_samples)
    v = np.log(np.asarray(spec.rho_samples) ** spec.exponent)
    lr = np.log(r)
    slopes = np.abs(np.diff(v) / np.diff(lr))
    s_min = slopes[0]
    # compare with the slope roughly one decade above the smallest sample
    j = int(np.clip(np.searchsorted(lr, lr[0] + math.log(10.0)), 1, len(slopes) - 1))
    s_up = slopes[j]
    if s_min > _POWER_FREE_SLOPE:
        return False
    return bool(s_min < 1e-12 or s_min < s_up * (1.0 - 1e-6))


def classify_modulus(spec: ModulusSpec, alpha: float, p: float, theta: str = "l") -> Classification:
    """Place ``spec`` in the d/s/c/w taxonomy and compute admissibility flags."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    direction = spec.direction()
    dini = direction > 0 and dini_integral(spec).finite
    slowly = is_slowly_varying(spec)
    diag = ""
    if spec.kind == "log_power":
        b = spec.effective_beta
        varsigma = "d" if b < -1.0 else ("s" if b < 0.0 else "w")
    elif direction == 0:
        varsigma = "c"
    else:
        slope = spec.small_scale_slope()
        if abs(slope) > _POWER_FREE_SLOPE:
            raise ClassificationError(
                f"tabulated modulus behaves like r**{slope:.3g} at small scales; "
                "fold the power into alpha instead"
            )
        if direction > 0:
            if slope <= 0.0:
                varsigma = "c"
                diag = "increasing table with positive limit at 0 is equivalent to a constant modulus"
            else:
                varsigma = "d" if dini else "s"
        else:
            varsigma = "w"
    regularity_ok = slowly if direction > 0 else True
    flow_ok = False
    if p <= 2.0 and direction > 0:
        q = 2.0 * p / (5.0 * p - 2.0)
        flow_ok = slowly and dini_integral(spec.powered(q)).finite
    label = ClassLabel(varsigma=varsigma, alpha=float(alpha), theta=theta, p=float(p))
    return Classification(
        label=label,
        dini=dini,
        slowly_varying=slowly,
        direction=direction,
        regularity_admissible=regularity_ok,
        flow_admissible=flow_ok,
        diagnostic=diag,
    )


def holder_seminorm(h, alpha: float, spec: ModulusSpec, dx: float, pair_budget: int = 0,
                    seed: int = 0, max_separation: float = 1.0, value_axes: int = 0) -> float:
    """Estimate ``[h]_{alpha,rho}`` on a uniform grid of spacing ``dx``.

    Covers every axis shift up to ``max_separation`` in 1-D (dyadic shifts along
    axes and diagonals in 2-D) plus ``pair_budget`` random pairs drawn from a
    generator seeded with ``seed``. Random pairs are drawn in fixed-size chunks, so
    a larger budget always extends the sample set of a smaller one.

    The last ``value_axes`` axes of ``h`` index components (vector or matrix
    fields); differences are then measured in the Frobenius norm.
    """
    h = np.asarray(h, dtype=float)
    if h.size == 0:
        raise DomainError("empty grid")
    space = h.shape[: h.ndim - value_axes]
    vals = np.ascontiguousarray(h.reshape(space + (-1,)))
    h = vals[..., 0]
    if not 0.0 < dx <= 1.0:
        raise DomainError("grid spacing must lie in (0, 1]")
    smax = int(math.floor(max_separation / dx + 1e-9))
    smax = min(smax, max(h.shape) - 1)
    if smax < 1:
        return 0.0

    def weight(dist):
        return 1.0 / (dist ** alpha * spec(np.minimum(dist, 1.0)))

    best = 0.0
    if h.ndim == 1:
        if smax <= 4096:
            shifts = np.arange(1, smax + 1)
        else:
            shifts = 2 ** np.arange(int(math.log2(smax)) + 1)
        best = kernels.max_shift_ratio_1d(vals, shifts.astype(np.int64), weight(shifts * dx))
    elif h.ndim == 2:
        dy = []
        s = 1
        while s <= smax:
            dy.append((s, 0))
            dy.append((0, s))
            if s * math.sqrt(2.0) <= smax + 1e-9:
                dy.append((s, s))
                dy.append((s, -s))
            s *= 2
        for si, sj in dy:
            a = vals[max(0, -si): h.shape[0] - max(0, si), max(0, -sj): h.shape[1] - max(0, sj)]
            b = vals[max(0, si): h.shape[0] + min(0, si) or None, max(0, sj): h.shape[1] + min(0, sj) or None]
            if a.size == 0:
                continue
            dist = dx * math.hypot(si, sj)
            gap = np.sqrt(np.max(np.sum((b - a) ** 2, axis=-1)))
            best = max(best, float(gap) * float(weight(dist)))
    else:
        raise DomainError("holder_seminorm supports 1-D and 2-D grids")
    if pair_budget > 0:
        best = max(best, _random_pairs(vals, alpha, spec, dx, pair_budget, seed, smax, weight))
    return float(best)


_CHUNK = 1024


def _random_pairs(vals, alpha, spec, dx, budget, seed, smax, weight):
    rng = np.random.Generator(np.random.PCG64(seed))
    h = vals[..., 0]
    flat = vals.reshape(-1, vals.shape[-1])
    shape = np.array(h.shape)
    best = 0.0
    drawn = 0
    while drawn < budget:
        first = rng.integers(0, shape, size=(_CHUNK, h.ndim))
        offset = rng.integers(-smax, smax + 1, size=(_CHUNK, h.ndim))
        take = min(_CHUNK, budget - drawn)
        first, offset = first[:take], offset[:take]
        second = first + offset
        dist = dx * np.sqrt(np.sum(offset.astype(float) ** 2, axis=1))
        ok = np.all((second >= 0) & (second < shape), axis=1) & (dist > 0) & (dist <= smax * dx + 1e-12)
        if np.any(ok):
            ia = np.ravel_multi_index(first[ok].T, h.shape)
            ib = np.ravel_multi_index(second[ok].T, h.shape)
            best = max(best, kernels.max_pair_ratio(flat, ia.astype(np.int64), ib.astype(np.int64), weight(dist[ok])))
        drawn += take
    return best


def limit_checks(alpha: float, spec: ModulusSpec, deltas) -> LimitTable:
    """Ratios whose small-scale limits are ``1/alpha`` and ``1/(1-alpha)``.

    ``r1 = int_0^d rho r^(alpha-1) dr / (d^alpha rho(d))``,
    ``r2 = d int_d^1 rho r^(alpha-2) dr / (d^alpha rho(d))`` and
    ``tail = d int_d^1 rho / r^2 dr``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0.0) or np.any(deltas >= 1.0):
        raise DomainError("deltas must lie in (0, 1)")
    r1 = np.empty_like(deltas)
    r2 = np.empty_like(deltas)
    tail = np.empty_like(deltas)
    for i, d in enumerate(deltas):
        den = d ** alpha * float(spec(d))
        r1[i] = weighted_integral(spec, alpha - 1.0, 0.0, d) / den
        r2[i] = d * weighted_integral(spec, alpha - 2.0, d, 1.0) / den
        tail[i] = d * weighted_integral(spec, -2.0, d, 1.0)
    return LimitTable(delta=deltas, r1=r1, r2=r2, tail=tail, alpha=float(alpha))


def sandwich_constants(spec: ModulusSpec, alpha: float, eps: float, beta: float,
                       r_min: float = 1e-8, num: int = 400):
    """Empirical ``C1, C2`` with ``r^beta <= C1 r^alpha rho(r) <= C2 r^eps`` on ``[r_min, 1]``."""
    if not eps < alpha < beta:
        raise DomainError("need eps < alpha < beta")
    r = np.geomspace(r_min, 1.0, num)
    mid = r ** alpha * spec(r)
    c1 = float(np.max(r ** beta / mid))
    c2 = float(np.max(c1 * mid / r ** eps))
    return c1, c2


def karamata_representation(spec: ModulusSpec, r, r0: Optional[float] = None):
    """Slowly varying representation ``rho(r) = exp(c(r) - int_r^r0 zeta(t)/t dt)``.

    Returns ``(c, zeta, integral)`` evaluated at the scales ``r <= r0``, built from
    ``phi(s) = log rho(exp(-s))`` with ``zeta(r) = phi(s) - phi(s+1)``.
    """
    if r0 is None:
        r0 = min(spec.cutoff, 0.5)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r > r0) or np.any(r <= 0.0):
        raise DomainError("scales must lie in (0, r0]")

    def phi(s):
        return float(spec.log_value(math.exp(-s)))

    s1 = -math.log(r0)
    base, _ = _quad(phi, s1, s1 + 1.0)
    c = np.empty_like(r)
    zeta = np.empty_like(r)
    integ = np.empty_like(r)
    for i, ri in enumerate(r):
        s = -math.log(ri)
        avg, _ = _quad(lambda t: phi(s + t), 0.0, 1.0)
        c[i] = phi(s) - avg + base
        zeta[i] = phi(s) - phi(s + 1.0)
        if s > s1:
            integ[i], _ = _quad(lambda u: phi(u) - phi(u + 1.0), s1, s)
        else:
            integ[i] = 0.0
    return c, zeta, integ
