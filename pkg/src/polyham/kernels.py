"""Backend selection for the solver's time loops.

The compiled extension is used when it imports; setting
``POLYHAM_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("POLYHAM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

kg_hamiltonian_steps = _impl.kg_hamiltonian_steps
kg_reference_steps = _impl.kg_reference_steps


def get_backend(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the selected one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
