"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``BATS_INNER_PURE=1`` to force the pure-Python kernels.
"""
import os

from . import _kernels_py as python_kernels

compiled_kernels = None
if os.environ.get("BATS_INNER_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_kernels  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = kernels.BACKEND
