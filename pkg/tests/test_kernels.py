"""Compiled and pure-Python kernels must be interchangeable."""
import importlib

import numpy as np
import pytest

from nspec import _kernels_py, kernels
from nspec.errors import NoConvergence

try:
    compiled = importlib.import_module("nspec._kernels")
except ImportError:  # extension not built
    compiled = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
BACKENDS.append(pytest.param(compiled, id="cython", marks=pytest.mark.skipif(compiled is None, reason="extension not built")))


def random_params(n, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(0, 100, n), rng.uniform(0, 100, n), rng.uniform(-100, 100, n), rng.uniform(-100, 100, n)


def hamiltonians(o1, o2, d1, d2):
    h = np.zeros((o1.size, 3, 3))
    h[:, 0, 0] = d1
    h[:, 1, 1] = d1 - d2
    h[:, 0, 1] = h[:, 1, 0] = o2 / 2
    h[:, 0, 2] = h[:, 2, 0] = o1 / 2
    return h


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("mod", BACKENDS)
def test_batch_equals_single(mod):
    o1, o2, d1, d2 = random_params(200, 0)
    e, flags = mod.trig_energies_batch(o1, o2, d1, d2)
    assert not flags.any()
    for i in range(200):
        assert e[i] == pytest.approx(mod.trig_energies(o1[i], o2[i], d1[i], d2[i])[:3], abs=0)
    h = hamiltonians(o1, o2, d1, d2)
    w, v = mod.jacobi_eigh3_batch(h)
    for i in range(200):
        wi, vi = mod.jacobi_eigh3(h[i])
        assert np.array_equal(w[i], wi) and np.array_equal(v[i], vi)


@pytest.mark.parametrize("mod", BACKENDS)
def test_degenerate_flag(mod):
    e, flags = mod.trig_energies_batch([0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0])
    assert flags.tolist() == [True, False]
    assert e[0].tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("mod", BACKENDS)
def test_no_convergence(mod):
    m = np.array([[[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]]])
    with pytest.raises(NoConvergence):
        mod.jacobi_eigh3_batch(m, max_sweeps=0)


@pytest.mark.skipif(compiled is None, reason="extension not built")
def test_backends_agree():
    o1, o2, d1, d2 = random_params(5000, 1)
    ep, _ = _kernels_py.trig_energies_batch(o1, o2, d1, d2)
    ec, _ = compiled.trig_energies_batch(o1, o2, d1, d2)
    scale = np.linalg.norm(hamiltonians(o1, o2, d1, d2), axis=(1, 2))
    assert np.all(np.abs(ep - ec).max(axis=1) <= 1e-13 * scale)
    h = hamiltonians(o1, o2, d1, d2)
    wp, vp = _kernels_py.jacobi_eigh3_batch(h)
    wc, vc = compiled.jacobi_eigh3_batch(h)
    assert np.all(np.abs(wp - wc).max(axis=1) <= 1e-13 * scale)
    # eigenvectors agree up to sign
    dots = np.abs(np.einsum("nki,nki->ni", vp, vc))
    assert np.allclose(dots, 1.0, atol=1e-10)
