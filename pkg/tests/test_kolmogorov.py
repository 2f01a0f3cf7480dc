import math
import warnings

import numpy as np
import pytest

from holderdini.errors import AdmissibilityError, InvalidSpecError, NonConvergenceError, SequenceTooCoarseWarning
from holderdini.grid import GridSpec
from holderdini.kolmogorov import (
    DriftSpec,
    MollificationSpec,
    bump,
    certificate_integral,
    cutoff,
    limit_solution,
    mollify_drift,
    picard_solve_U,
    select_lambda,
)
from holderdini.modulus import ModulusSpec

GRID = GridSpec(N=256, M=32)
FINE = GridSpec(N=512, M=64)


@pytest.fixture(scope="module")
def example_drift():
    return DriftSpec.log_power_example(-3.0, 2.0)


@pytest.fixture(scope="module")
def example_solution(example_drift):
    moll = mollify_drift(example_drift, MollificationSpec(k=64, R=8.0))
    return select_lambda(moll, FINE)


# -- building blocks ------------------------------------------------------------------------


def test_bump_support_and_cutoff_constraints():
    s = np.linspace(-0.5, 1.5, 2001)
    b = bump(s)
    assert np.all(b[(s <= 0) | (s >= 1)] == 0) and np.all(b[(s > 0.01) & (s < 0.99)] > 0)
    x = np.linspace(0, 3, 3001)
    chi = cutoff(x)
    assert np.all(chi[x <= 1] == 1) and np.all(chi[x >= 2] == 0)
    assert np.all((chi >= 0) & (chi <= 1))
    assert np.max(np.abs(np.diff(chi) / np.diff(x))) <= 2.0 + 1e-9


def test_drift_spec_validation():
    with pytest.raises(InvalidSpecError):
        DriftSpec.constant([1.0, 2.0], n=1)
    with pytest.raises(InvalidSpecError):
        DriftSpec.supercritical(p_tilde=3.5)
    with pytest.raises(InvalidSpecError):
        DriftSpec.log_power_example(time_exponent=0.6, p=2.0)
    assert DriftSpec.log_power_example(p=2.0).alpha == 0.0


def test_example_drift_normalized(example_drift):
    fine = GridSpec(N=2 ** 13, L=2.0, M=8)
    assert example_drift.lp_seminorm(fine) == pytest.approx(1.0, rel=0.02)


# -- mollification -------------------------------------------------------------------------------


@pytest.mark.parametrize("moll", [MollificationSpec(m=16, R=4.0), MollificationSpec(k=8, R=4.0),
                                  MollificationSpec(m=8, k=8, R=4.0)])
def test_mollified_constant_is_constant_inside_cutoff(moll):
    c = np.array([0.7])
    out = mollify_drift(DriftSpec.constant(c), moll)
    x = np.linspace(-4.0, 4.0, 101)[:, None]
    assert np.allclose(out(0.5, x), 0.7, atol=1e-12)


def test_mollified_constant_2d():
    c = np.array([0.3, -0.2])
    out = mollify_drift(DriftSpec.constant(c, n=2), MollificationSpec(k=4, R=4.0))
    pts = np.random.default_rng(0).uniform(-3, 3, size=(50, 2))
    assert np.allclose(out(0.5, pts), c, atol=1e-12)


def test_time_mollification_uses_zero_extension():
    out = mollify_drift(DriftSpec.constant([1.0]), MollificationSpec(m=4, R=None))
    assert out(0.0, np.zeros((1, 1)))[0, 0] == 0.0
    assert out(0.3, np.zeros((1, 1)))[0, 0] == pytest.approx(1.0)


def test_inflation_bounded(example_drift):
    grid = GridSpec(N=2 ** 12, L=4.0, M=8)
    out = mollify_drift(example_drift, MollificationSpec(m=64, k=64, R=8.0), grid)
    assert out.info["inflation"] <= out.info["inflation_bound"]
    assert out.info["weighted_sup"].shape == (grid.M + 1,)


def test_pointwise_convergence(example_drift):
    x = np.array([[-0.8], [-0.3], [0.2], [0.45], [1.5]])
    errs = []
    for k in (8, 32, 128):
        out = mollify_drift(example_drift, MollificationSpec(m=k, k=k, R=4.0 * k))
        errs.append(np.max(np.abs(out(0.5, x) - example_drift(0.5, x))))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


# -- Picard solve -------------------------------------------------------------------------------


def test_constant_drift_closed_form():
    sol = picard_solve_U(DriftSpec.constant([0.3]), 2.0, GRID)
    exact = 0.3 * (1 - np.exp(-2 * GRID.times)) / 2
    assert np.max(np.abs(sol.U.values[..., 0] - exact[:, None])) < 1e-10
    # the taper outside the box leaks at the 1e-10 level near its edge
    assert np.max(np.abs(sol.grad.values)) < 1e-8


def test_zero_drift():
    sol = picard_solve_U(DriftSpec.constant([0.0]), 1.0, GRID)
    assert np.all(sol.U.values == 0.0)


def test_initial_slice_zero_and_grad_bound(example_solution):
    sol = example_solution
    assert np.all(sol.U.values[0] == 0.0)
    assert sol.norms["sup_grad"] <= 0.5 + 1e-3
    assert sol.contraction <= 0.5 and sol.converged


def test_picard_trace_decays_geometrically(example_solution):
    trace = np.array(example_solution.trace)
    ratios = trace[1:] / trace[:-1]
    assert np.all(ratios <= example_solution.contraction + 1e-12)


def test_homogeneous_probe(example_drift):
    moll = mollify_drift(example_drift, MollificationSpec(k=16, R=8.0))
    sol = picard_solve_U(moll, 1.0, GRID, homogeneous=True)
    assert np.max(np.abs(sol.U.values)) <= 1e-6


def test_non_convergence_raises():
    with pytest.raises(NonConvergenceError):
        picard_solve_U(DriftSpec.sine(amplitude=6.0), 0.05, GRID, max_iter=5, raise_on_failure=True)


def test_second_derivative_and_growth_stable(example_drift):
    moll = mollify_drift(example_drift, MollificationSpec(k=4, R=8.0))
    a = picard_solve_U(moll, 2.0, GridSpec(N=256, M=32)).norms
    b = picard_solve_U(moll, 2.0, GridSpec(N=512, M=32)).norms
    for key in ("hess_L2_Linf", "weighted_sup_U"):
        assert abs(a[key] - b[key]) <= 0.05 * b[key]


# -- lambda selection --------------------------------------------------------------------------


def test_small_constant_accepted_at_first_lambda():
    sol = select_lambda(DriftSpec.constant([0.1]), GRID)
    assert sol.lam == 1.0 and len(sol.lambda_trials) == 1


def test_inadmissible_modulus_rejected():
    drift = DriftSpec.log_power_example(-1.5, 2.0, scale=1.0)
    with pytest.raises(AdmissibilityError):
        select_lambda(drift, GRID)


def test_supercritical_rejected():
    with pytest.raises(AdmissibilityError):
        select_lambda(DriftSpec.supercritical(), GRID)


def test_certificate_matches_oracle(frozen):
    rho = ModulusSpec.log_power(-3.0)
    for lam, ref in frozen["certificate_beta_m3_p2"].items():
        assert certificate_integral(rho, 2.0, float(lam)) == pytest.approx(ref, rel=1e-7)


def test_certificate_decreasing_in_lambda():
    rho = ModulusSpec.log_power(-3.0)
    vals = [certificate_integral(rho, 2.0, 2.0 ** j) for j in range(8)]
    assert np.all(np.diff(vals) < 0)


def test_certificate_infinite_for_non_dini_power():
    assert certificate_integral(ModulusSpec.log_power(-1.5), 2.0, 1.0) == math.inf


def test_example_accepted_with_certificate(example_solution):
    assert math.isfinite(example_solution.lam)
    assert example_solution.certificate > 0
    accepted = [t for t in example_solution.lambda_trials if t["accepted"]]
    assert len(accepted) == 1 and accepted[0]["lambda"] == example_solution.lam


def test_larger_drift_needs_larger_lambda():
    moll = mollify_drift(DriftSpec.log_power_example(-3.0, 2.0, scale=2.0), MollificationSpec(k=32, R=8.0))
    sol = select_lambda(moll, GRID)
    assert sol.lam > 1.0
    assert sol.norms["sup_grad"] <= 0.5 and sol.contraction <= 0.5


# -- limit along the mollification sequence --------------------------------------------------


def test_limit_constant_levels_identical():
    seq = [MollificationSpec(k=k, R=8.0) for k in (4, 8)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SequenceTooCoarseWarning)
        res = limit_solution(DriftSpec.constant([0.2]), seq, 2.0, GRID)
    assert res.u_differences[0] < 1e-12


def test_limit_example_cauchy_decay():
    drift = DriftSpec.log_power_example(-3.0, 2.0, scale=2.0)
    seq = [MollificationSpec(k=k, R=8.0) for k in (8, 16, 32, 64)]
    res = limit_solution(drift, seq, 128.0, FINE)
    du, dg = np.array(res.u_differences), np.array(res.grad_differences)
    assert np.all(du[:-1] / du[1:] >= 2.0)
    assert np.all(dg[:-1] / dg[1:] >= 2.0)


def test_limit_needs_two_levels():
    with pytest.raises(InvalidSpecError):
        limit_solution(DriftSpec.constant([0.2]), [MollificationSpec(k=4)], 1.0, GRID)
