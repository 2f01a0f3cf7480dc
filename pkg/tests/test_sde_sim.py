import math

import numpy as np
import pytest

from holderdini.errors import InvalidSpecError
from holderdini.grid import GridSpec
from holderdini.kolmogorov import DriftSpec, MollificationSpec, mollify_drift, picard_solve_U, select_lambda
from holderdini.sde_sim import (
    BrownianTape,
    SimConfig,
    euler_direct,
    euler_transformed,
    flow_stats,
    non_crossing_check,
    peano_pair,
    second_moment_profile,
    supercritical_demo,
)
from holderdini.zvonkin import build_transform, identity_transform

GRID = GridSpec(N=512, M=64)


@pytest.fixture(scope="module")
def sine_map():
    return build_transform(select_lambda(DriftSpec.sine(), GRID))


@pytest.fixture(scope="module")
def example_map():
    drift = mollify_drift(DriftSpec.log_power_example(-3.0, 2.0), MollificationSpec(k=64, R=8.0))
    return build_transform(select_lambda(drift, GRID))


# -- configuration and tape ---------------------------------------------------------------------


@pytest.mark.parametrize("kwargs", [dict(dt=0.3), dict(dt=0.1, n_paths=0), dict(dt=0.1, T=1.5),
                                    dict(dt=0.1, s=0.5, T=0.5), dict(dt=0.1, seed=-1)])
def test_config_rejects(kwargs):
    with pytest.raises(InvalidSpecError):
        SimConfig(**kwargs)


def test_tape_is_deterministic():
    a = BrownianTape(50, 64, 1 / 64, seed=9)
    b = BrownianTape(50, 64, 1 / 64, seed=9)
    c = BrownianTape(50, 64, 1 / 64, seed=10)
    assert np.array_equal(a.increments, b.increments)
    assert not np.array_equal(a.increments, c.increments)


def test_tape_moments():
    report = BrownianTape(2000, 256, 1 / 256, seed=4).moment_check()
    assert report["mean_ok"] and report["variance_ok"]


def test_coarsen_preserves_endpoint():
    fine = BrownianTape(20, 64, 1 / 64, seed=2)
    coarse = fine.coarsen(8)
    assert coarse.n_steps == 8 and coarse.dt == pytest.approx(1 / 8)
    assert np.allclose(coarse.path()[:, -1], fine.path()[:, -1], atol=1e-14)
    with pytest.raises(InvalidSpecError):
        fine.coarsen(5)


def test_tape_shape_mismatch():
    with pytest.raises(InvalidSpecError):
        euler_direct(DriftSpec.constant([0.0]), SimConfig(dt=1 / 8, n_paths=10), tape=BrownianTape(11, 8, 1 / 8))


# -- direct scheme -------------------------------------------------------------------------------


def test_zero_drift_is_brownian():
    cfg = SimConfig(dt=1 / 128, n_paths=300, seed=1, x0=(0.25,))
    ens = euler_direct(DriftSpec.constant([0.0]), cfg)
    assert np.allclose(ens.X, 0.25 + ens.tape.path(), atol=1e-13)


def test_constant_drift_exact():
    cfg = SimConfig(dt=1 / 128, n_paths=300, seed=1)
    ens = euler_direct(DriftSpec.constant([0.6]), cfg, x0=-0.1)
    assert np.allclose(ens.X, -0.1 + 0.6 * cfg.times[None, :, None] + ens.tape.path(), atol=1e-12)


def test_ornstein_uhlenbeck_variance(frozen):
    drift = DriftSpec.smooth(lambda x: -x, name="ou")
    finals = []
    for seed in range(10):
        cfg = SimConfig(dt=1e-3, n_paths=10_000, seed=seed)
        finals.append(euler_direct(drift, cfg).terminal[:, 0])
    x = np.concatenate(finals)
    var = float(x.var(ddof=1))
    se = var * math.sqrt(2.0 / (len(x) - 1))
    assert abs(var - frozen["ou_variance_T1"]) <= 3 * se


# -- transformed scheme --------------------------------------------------------------------------


def test_identity_transform_equals_direct():
    cfg = SimConfig(dt=1 / 64, n_paths=100, seed=3)
    tape = BrownianTape.for_config(cfg)
    a = euler_transformed(identity_transform(GRID), cfg, tape=tape, x0=0.2)
    b = euler_direct(DriftSpec.constant([0.0]), cfg, tape=tape, x0=0.2)
    assert np.allclose(a.X, b.X, atol=1e-12)
    assert np.array_equal(a.X, a.Y)


def test_constant_drift_mapped_back_exact():
    zmap = build_transform(picard_solve_U(DriftSpec.constant([0.7]), 2.0, GRID))
    cfg = SimConfig(dt=1 / 256, n_paths=500, seed=3, x0=(0.5,))
    ens = euler_transformed(zmap, cfg)
    expected = 0.5 + 0.7 * cfg.times[None, :, None] + ens.tape.path()
    assert np.max(np.abs(ens.X - expected)) <= 1e-8


def test_transformed_tracks_direct(sine_map):
    cfg = SimConfig(dt=1 / 256, n_paths=2000, seed=2, x0=(0.3,))
    tape = BrownianTape.for_config(cfg)
    a = euler_transformed(sine_map, cfg, tape=tape)
    b = euler_direct(DriftSpec.sine(), cfg, tape=tape)
    assert math.sqrt(np.mean((a.terminal - b.terminal) ** 2)) < 0.05


def test_horizon_beyond_transform():
    with pytest.raises(InvalidSpecError):
        euler_transformed(identity_transform(GridSpec(N=64, M=8, T=0.5)), SimConfig(dt=1 / 8, n_paths=4))


# -- flow statistics -----------------------------------------------------------------------------


def _fan(zmap, cfg, starts):
    tape = BrownianTape.for_config(cfg)
    return [euler_transformed(zmap, cfg, tape=tape, x0=s) for s in starts]


def test_flow_exponent_for_zero_drift():
    cfg = SimConfig(dt=1 / 64, n_paths=400, seed=5)
    ens = _fan(identity_transform(GRID), cfg, [0.0, 0.1, 0.2, 0.4])
    stats = flow_stats(ens[0], ens[1:], q_values=(2.0, 4.0))
    for q in (2.0, 4.0):
        assert stats.spatial_exponent[q][0] == pytest.approx(q, abs=1e-9)


def test_time_moment_for_constant_drift():
    cfg = SimConfig(dt=1 / 256, n_paths=4000, seed=6)
    tape = BrownianTape.for_config(cfg)
    base = euler_direct(DriftSpec.constant([0.5]), cfg, tape=tape)
    stats = flow_stats(base, [], q_values=(2.0,), lags=[1, 4, 16, 64])
    h = stats.lags
    expected = h + 0.25 * h ** 2
    assert np.allclose(stats.time_moments[2.0], expected, rtol=0.05)
    assert stats.time_exponent[2.0][0] == pytest.approx(1.0, abs=0.1)


def test_flow_requires_shared_tape():
    cfg = SimConfig(dt=1 / 16, n_paths=10, seed=1)
    a = euler_direct(DriftSpec.constant([0.0]), cfg)
    b = euler_direct(DriftSpec.constant([0.0]), SimConfig(dt=1 / 16, n_paths=10, seed=2), x0=0.5)
    with pytest.raises(InvalidSpecError):
        flow_stats(a, [b])


def test_non_crossing(example_map):
    cfg = SimConfig(dt=1 / 256, n_paths=300, seed=7)
    report = non_crossing_check(_fan(example_map, cfg, np.linspace(-1.5, 1.5, 6)))
    assert report.violations == 0 and report.samples == 5 * 300 * 257


def test_non_crossing_needs_order():
    cfg = SimConfig(dt=1 / 16, n_paths=5)
    ens = _fan(identity_transform(GRID), cfg, [0.5, 0.0])
    with pytest.raises(InvalidSpecError):
        non_crossing_check(ens)


def test_second_moment_growth(example_map):
    cfg = SimConfig(dt=1 / 128, n_paths=2000, seed=8)
    small, large = _fan(example_map, cfg, [0.0, 2.0])
    m0, m2 = second_moment_profile(small), second_moment_profile(large)
    assert m0 <= 3.0 and m2 <= 3.0 * (1 + 4.0)
    assert m2 > m0


# -- supercritical contrast ----------------------------------------------------------------------


def test_peano_pair():
    report = peano_pair(alpha=-0.5)
    assert report.max_error <= 1e-3
    assert np.all(report.zero == 0.0)
    with pytest.raises(InvalidSpecError):
        peano_pair(alpha=1.0)


def test_supercritical_report_shape():
    cfg = SimConfig(dt=1 / 64, n_paths=200, seed=11)
    report = supercritical_demo(DriftSpec.supercritical(2.5, -0.5), [1 / 4, 1 / 16], cfg)
    assert report.means.shape == (2, 3) and np.all(np.isfinite(report.means))
    assert report.start_offset == cfg.dt
    assert len(report.rows()) == 2 * 4


def test_supercritical_smooth_drift_has_no_spread():
    cfg = SimConfig(dt=1 / 64, n_paths=200, seed=11)
    report = supercritical_demo(DriftSpec.constant([0.3]), [1 / 4, 1 / 16], cfg)
    assert np.all(report.spread <= 1e-12)


def test_negative_moment_is_diagnostic():
    from holderdini.errors import VarianceWarning

    cfg = SimConfig(dt=1 / 32, n_paths=400, seed=5)
    ens = _fan(identity_transform(GRID), cfg, [0.0, 0.1, 0.2])
    with pytest.warns(VarianceWarning, match="diagnostic"):
        stats = flow_stats(ens[0], ens[1:], q_values=(-1.0,))
    assert stats.spatial_exponent[-1.0][0] == pytest.approx(-1.0, abs=1e-9)
