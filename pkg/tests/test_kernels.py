import os
import subprocess
import sys

import numpy as np
import pytest

from holderdini import _kernels_py, kernels
from holderdini.grid import GridSpec
from holderdini.kolmogorov import DriftSpec, select_lambda
from holderdini.sde_sim import BrownianTape, SimConfig, euler_transformed
from holderdini.zvonkin import build_transform

try:
    from holderdini import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python") is _kernels_py
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_pure_python_switch():
    code = "from holderdini import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, HOLDERDINI_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_default_prefers_extension():
    env = {k: v for k, v in os.environ.items() if k != "HOLDERDINI_PURE_PYTHON"}
    code = "from holderdini import kernels; print(kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"


@needs_ext
def test_shift_ratio_agrees():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((300, 2))
    shifts = np.array([1, 3, 17, 120, 299], dtype=np.int64)
    weights = rng.uniform(0.1, 2.0, len(shifts))
    a = _kernels_py.max_shift_ratio_1d(h, shifts, weights)
    b = _ckernels.max_shift_ratio_1d(h, shifts, weights)
    assert a == pytest.approx(b, rel=1e-14)


@needs_ext
def test_pair_ratio_agrees():
    rng = np.random.default_rng(1)
    flat = rng.standard_normal((500, 3))
    ia = rng.integers(0, 500, 200).astype(np.int64)
    ib = rng.integers(0, 500, 200).astype(np.int64)
    w = rng.uniform(0.1, 2.0, 200)
    assert _kernels_py.max_pair_ratio(flat, ia, ib, w) == pytest.approx(_ckernels.max_pair_ratio(flat, ia, ib, w),
                                                                         rel=1e-14)


@needs_ext
def test_transformed_euler_agrees():
    zmap = build_transform(select_lambda(DriftSpec.sine(), GridSpec(N=256, M=32)))
    cfg = SimConfig(dt=1 / 128, n_paths=200, seed=4, x0=(0.3,))
    tape = BrownianTape.for_config(cfg)
    a = euler_transformed(zmap, cfg, tape=tape, backend="python")
    b = euler_transformed(zmap, cfg, tape=tape, backend="cython")
    assert np.max(np.abs(a.X - b.X)) <= 1e-12
    assert np.max(np.abs(a.Y - b.Y)) <= 1e-12
