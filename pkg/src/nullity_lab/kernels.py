"""Backend selection for the polynomial jet kernel.

The compiled extension is used when it imports; set
``NULLITY_LAB_BACKEND=python`` to force the numpy fallback.
"""

import os

import numpy as np

from . import _jetcore_py

BACKEND = "python"
_compiled = None
if os.environ.get("NULLITY_LAB_BACKEND", "").lower() != "python":
    try:
        from . import _jetcore as _compiled  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _compiled = None


def _impl(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled jet kernel is not available")
        return _compiled.poly_jet_batch
    return _jetcore_py.poly_jet_batch


def poly_jet(coeffs, powers, comp, ncomp, points, backend=None):
    """Value, gradient and Hessian of a packed polynomial map.

    ``points`` is ``P x m`` complex. Returns arrays of shape ``P x N``,
    ``P x N x m`` and ``P x N x m x m`` (holomorphic derivatives).
    """
    points = np.ascontiguousarray(points, dtype=np.complex128)
    P, m = points.shape
    val = np.zeros((P, ncomp), dtype=np.complex128)
    d1 = np.zeros((P, ncomp, m), dtype=np.complex128)
    d2 = np.zeros((P, ncomp, m, m), dtype=np.complex128)
    _impl(backend)(
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(powers, dtype=np.int64),
        np.ascontiguousarray(comp, dtype=np.int64),
        points, val, d1, d2,
    )
    return val, d1, d2
