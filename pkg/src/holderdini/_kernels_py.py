"""Pure numpy implementations of the hot loops (fallback for the compiled core)."""
import numpy as np


def max_shift_ratio_1d(h, shifts, weights):
    """max over shifts s and rows i of |h[i+s] - h[i]| * weights[s]; ``h`` has shape (N, C)."""
    best = 0.0
    for s, w in zip(shifts, weights):
        s = int(s)
        if s <= 0 or s >= h.shape[0]:
            continue
        d = np.sqrt(np.max(np.sum((h[s:] - h[:-s]) ** 2, axis=1)))
        best = max(best, float(d) * float(w))
    return best


def max_pair_ratio(flat, ia, ib, weights):
    """max over pairs k of |flat[ib[k]] - flat[ia[k]]| * weights[k]; ``flat`` has shape (P, C)."""
    if len(ia) == 0:
        return 0.0
    d = np.sqrt(np.sum((flat[ib] - flat[ia]) ** 2, axis=1))
    return float(np.max(d * weights))


def transformed_euler_1d(y0, dw, times, lam, ht, lo, dx, vals, dvals, gvals, tol, max_iter):
    """Euler scheme for the transformed state in 1-D.

    ``Y <- Y + lam int V(r, X) dr + (1 + dV/dx(t, X)) dW`` with ``X = Psi(t, Y)``.
    ``vals``, ``dvals``, ``gvals`` hold ``V``, ``dV/dt`` and ``dV/dx`` on uniform
    (time, space) knots with spacings ``ht`` and ``dx`` starting at ``(0, lo)``.
    Returns ``(Y, X, status, step)``; status 0 ok, 1 left the box, 2 inversion
    did not converge, 3 non-finite state.
    """
    y = np.array(y0, dtype=float)
    nsteps = dw.shape[1]
    Y = np.empty((y.shape[0], nsteps + 1))
    X = np.empty((y.shape[0], nsteps + 1))
    Y[:, 0] = y
    grid = (ht, lo, dx, vals, dvals, gvals)
    x, status = _invert(y, y, times[0], grid, tol, max_iter)
    if status:
        return Y, X, status, 0
    X[:, 0] = x
    for k in range(nsteps):
        t0, t1 = times[k], times[k + 1]
        sig = 1.0 + _grad(x, t0, grid)
        ynew = y + lam * _integrate_v(x, t0, t1, grid) + sig * dw[:, k]
        if not np.all(np.isfinite(ynew)):
            return Y, X, 3, k + 1
        x, status = _invert(ynew, x, t1, grid, tol, max_iter)
        y = ynew
        if status:
            return Y, X, status, k + 1
        Y[:, k + 1] = y
        X[:, k + 1] = x
    return Y, X, 0, -1


def _cell(x, lo, dx, npts):
    s = (np.clip(x, lo, lo + dx * (npts - 1)) - lo) / dx
    i = np.clip(np.floor(s).astype(np.int64), 0, npts - 2)
    return i, s - i


def _time_cell(t, ht, nt):
    s = min(max(t / ht, 0.0), float(nt - 1))
    j = min(int(np.floor(s)), nt - 2)
    return j, s - j


def _value(x, t, grid, with_slope=False):
    ht, lo, dx, vals, dvals, _ = grid
    j, u = _time_cell(t, ht, vals.shape[0])
    u2, u3 = u * u, u * u * u
    c0, c1, c2, c3 = 2 * u3 - 3 * u2 + 1, (u3 - 2 * u2 + u) * ht, -2 * u3 + 3 * u2, (u3 - u2) * ht
    i, w = _cell(x, lo, dx, vals.shape[1])
    a = c0 * vals[j, i] + c1 * dvals[j, i] + c2 * vals[j + 1, i] + c3 * dvals[j + 1, i]
    b = c0 * vals[j, i + 1] + c1 * dvals[j, i + 1] + c2 * vals[j + 1, i + 1] + c3 * dvals[j + 1, i + 1]
    if with_slope:
        return (1 - w) * a + w * b, (b - a) / dx
    return (1 - w) * a + w * b


def _grad(x, t, grid):
    ht, lo, dx, _, _, gvals = grid
    j, u = _time_cell(t, ht, gvals.shape[0])
    i, w = _cell(x, lo, dx, gvals.shape[1])
    a = (1 - u) * gvals[j, i] + u * gvals[j + 1, i]
    b = (1 - u) * gvals[j, i + 1] + u * gvals[j + 1, i + 1]
    inside = (x >= lo) & (x <= lo + dx * (gvals.shape[1] - 1))
    return ((1 - w) * a + w * b) * inside


def _integrate_v(x, t0, t1, grid):
    """Simpson on each piece between time knots; exact for the cubic-in-time interpolant."""
    ht = grid[0]
    total = np.zeros_like(x)
    a = t0
    while a < t1:
        b = min(t1, (np.floor(a / ht + 1e-9) + 1.0) * ht)
        if b - a <= 1e-15:
            b = min(t1, b + ht)
        total += (b - a) / 6.0 * (_value(x, a, grid) + 4.0 * _value(x, 0.5 * (a + b), grid)
                                  + _value(x, b, grid))
        a = b
    return total


def _invert(y, guess, t, grid, tol, max_iter):
    # Newton steps with the cell slope of the piecewise-linear interpolant
    ht, lo, dx, vals, _, _ = grid
    hi = lo + dx * (vals.shape[1] - 1)
    x = guess.copy()
    for _ in range(max_iter):
        if np.any(x < lo) or np.any(x > hi):
            return x, 1
        v, slope = _value(x, t, grid, with_slope=True)
        resid = x + v - y
        if np.max(np.abs(resid), initial=0.0) <= tol:
            return x, 0
        x = x - resid / (1.0 + slope)
    return x, 2
