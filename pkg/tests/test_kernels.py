import os
import subprocess
import sys

import numpy as np
import pytest

from polyham import kernels
from polyham import _pykernels

compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")


def wave(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.arange(n) / n
    phi = np.cos(2 * np.pi * x) + 0.1 * rng.normal(size=n)
    return phi, np.sin(2 * np.pi * x), rng.normal(size=n)


@compiled
def test_hamiltonian_backends_agree():
    c = kernels.get_backend("cython")
    a = [v.copy() for v in wave(96)]
    b = [v.copy() for v in a]
    _pykernels.kg_hamiltonian_steps(*a, 1 / 96, 1 / 192, 1.0, 300)
    c.kg_hamiltonian_steps(*b, 1 / 96, 1 / 192, 1.0, 300)
    for u, v in zip(a, b):
        assert np.abs(u - v).max() <= 1e-11


@compiled
def test_reference_backends_agree():
    c = kernels.get_backend("cython")
    phi, v, _ = wave(64, 1)
    prev = phi - v / 128
    a, ap = phi.copy(), prev.copy()
    b, bp = phi.copy(), prev.copy()
    _pykernels.kg_reference_steps(a, ap, 1 / 64, 1 / 128, 2.0, 250)
    c.kg_reference_steps(b, bp, 1 / 64, 1 / 128, 2.0, 250)
    assert np.abs(a - b).max() <= 1e-11
    assert np.abs(ap - bp).max() <= 1e-11


def test_zero_steps_is_identity():
    arrays = [v.copy() for v in wave(16)]
    _pykernels.kg_hamiltonian_steps(*arrays, 1 / 16, 1 / 32, 1.0, 0)
    for u, v in zip(arrays, wave(16)):
        assert np.array_equal(u, v)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_environment_forces_fallback():
    env = dict(os.environ, POLYHAM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import polyham.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
