"""Elementwise kernels with a compiled core and a pure-numpy fallback.

The compiled extension is preferred when importable; set RISBAMP_PURE_PYTHON=1
to force the numpy backend. ``BACKEND`` names the active implementation.
"""

import os

from . import _numpy_backend

_FUNCS = (
    "observe",
    "residual_step",
    "gaussian_product",
    "gaussian_division",
    "invert_precision",
    "extrinsic_mean",
    "gaussian_posterior",
    "bg_posterior",
    "discrete_posterior",
    "damp",
)


def available_backends():
    """Names of importable backends, compiled one first when present."""
    names = []
    try:
        from . import _cython_backend  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("numpy")
    return names


def get_backend(name):
    """Return the backend module for an explicit name ('cython' or 'numpy')."""
    if name == "numpy":
        return _numpy_backend
    if name == "cython":
        from . import _cython_backend

        return _cython_backend
    raise ValueError(f"unknown kernel backend {name!r}")


if os.environ.get("RISBAMP_PURE_PYTHON", "") not in ("", "0"):
    _active = _numpy_backend
else:
    try:
        from . import _cython_backend as _active
    except ImportError:
        _active = _numpy_backend

BACKEND = _active.NAME

for _name in _FUNCS:
    globals()[_name] = getattr(_active, _name)

__all__ = list(_FUNCS) + ["BACKEND", "available_backends", "get_backend"]
