"""Backend selection for the hot kernels.

The compiled extension :mod:`nspec._kernels` is used when it has been built;
otherwise the pure-Python twin :mod:`nspec._kernels_py` is imported. Setting
``NSPEC_PURE_PYTHON=1`` forces the fallback.
"""
import os

if os.environ.get("NSPEC_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import jacobi_eigh3, jacobi_eigh3_batch, trig_energies, trig_energies_batch

    BACKEND = "python"
else:
    try:
        from ._kernels import jacobi_eigh3, jacobi_eigh3_batch, trig_energies, trig_energies_batch

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import jacobi_eigh3, jacobi_eigh3_batch, trig_energies, trig_energies_batch

        BACKEND = "python"

__all__ = ["BACKEND", "jacobi_eigh3", "jacobi_eigh3_batch", "trig_energies", "trig_energies_batch"]
