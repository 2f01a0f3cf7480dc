"""Independent high-precision reference values, frozen into ``frozen.json``.

Uses mpmath only; nothing from ``holderdini`` is imported. Re-run with
``python3 tests/oracles/build_oracles.py`` to regenerate.
"""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30


def log_power(beta, cutoff=mp.mpf("0.5")):
    """``|log r|^beta`` below the cutoff; above it the C^1 quadratic that flattens to a plateau."""
    v0 = abs(mp.log(cutoff)) ** beta
    s0 = -beta * abs(mp.log(cutoff)) ** (beta - 1) / cutoff
    width = min(1 - cutoff, v0 / abs(s0))

    def rho(r):
        if r < cutoff:
            return abs(mp.log(r)) ** beta
        d = min(r - cutoff, width)
        return v0 + s0 * d - s0 * d * d / (2 * width)

    breaks = [cutoff] + ([cutoff + width] if cutoff + width < 1 else [])
    return rho, breaks


def integral(fn, a, b, breaks=()):
    pts = [a] + [x for x in breaks if a < x < b] + [b]
    return mp.quad(fn, pts)


def rho_hat(rho, breaks, r):
    # first term through s = -log tau so the singular end is smooth
    knots = sorted([-mp.log(r)] + [-mp.log(b) for b in breaks if b < r])
    head = mp.quad(lambda s: rho(mp.e ** (-s)), knots + [mp.inf])
    tail = integral(lambda t: rho(t) / t ** 2, r, 1, breaks)
    return head + rho(r) + r * tail


def limit_ratios(rho, breaks, alpha, delta):
    den = delta ** alpha * rho(delta)
    r1 = mp.quad(lambda s: rho(mp.e ** (-s)) * mp.e ** (-alpha * s), [-mp.log(delta), mp.inf]) / den
    r2 = delta * integral(lambda t: rho(t) * t ** (alpha - 2), delta, 1, breaks) / den
    tail = delta * integral(lambda t: rho(t) / t ** 2, delta, 1, breaks)
    return r1, r2, tail


def certificate(beta, p, lam, T=1):
    q = mp.mpf(2) * p / (5 * p - 2)
    rho, breaks = log_power(mp.mpf(beta))
    c = lam * p / (p - 1)
    top = mp.sqrt(T)
    lin = mp.quad(lambda r: mp.e ** (-c * r * r) * r, [0, top])
    sing = mp.quad(lambda s: mp.e ** (-c * mp.e ** (-2 * s)) * rho(mp.e ** (-s)) ** q,
                   [-mp.log(top), -mp.log(mp.mpf("0.5")), mp.inf])
    return lin + sing


def main():
    out = {}
    rho2, br2 = log_power(mp.mpf(-2))
    out["rho_beta_m2_quarter"] = rho2(mp.mpf("0.25"))
    out["rho_beta_m2_half"] = rho2(mp.mpf("0.5") - mp.mpf(10) ** -25)
    out["dini_beta_m2_half"] = mp.quad(lambda s: s ** -2, [mp.log(2), mp.inf])
    out["dini_beta_m2_one"] = mp.quad(lambda s: rho2(mp.e ** (-s)), [0, -mp.log(br2[-1]), mp.log(2), mp.inf])
    out["rho_hat_linear_0.1"] = rho_hat(lambda t: t, [], mp.mpf("0.1"))
    out["rho_hat_beta_m2"] = {str(r): rho_hat(rho2, br2, mp.mpf(r)) for r in ("1e-6", "1e-3", "0.1", "0.75")}
    out["slowly_varying_beta_m2_3_1e-6"] = rho2(3 * mp.mpf("1e-6")) / rho2(mp.mpf("1e-6"))
    table = {}
    for d in ("1e-3", "1e-4", "1e-5", "1e-6"):
        r1, r2, tail = limit_ratios(rho2, br2, mp.mpf("0.5"), mp.mpf(d))
        table[d] = {"r1": r1, "r2": r2, "tail": tail}
    out["limit_beta_m2_alpha_half"] = table
    out["certificate_beta_m3_p2"] = {str(lam): certificate(-3, mp.mpf(2), mp.mpf(lam)) for lam in (1, 2, 4, 8)}
    out["gauss_at_1"] = mp.npdf(1)
    out["ou_variance_T1"] = (1 - mp.e ** -2) / 2
    out["const_source_lambda2"] = (1 - mp.e ** -2) / 2
    path = Path(__file__).with_name("frozen.json")
    path.write_text(json.dumps(_floats(out), indent=1, sort_keys=True) + "\n")


def _floats(obj):
    if isinstance(obj, dict):
        return {k: _floats(v) for k, v in obj.items()}
    return float(obj)


if __name__ == "__main__":
    main()
