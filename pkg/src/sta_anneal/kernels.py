"""Backend selection for the RK4 propagators.

The compiled Cython core is used when it was built; otherwise the numpy
implementation is loaded. Set ``STA_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("STA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

dicke_rk4 = _impl.dicke_rk4
bloch_rk4 = _impl.bloch_rk4

__all__ = ["BACKEND", "dicke_rk4", "bloch_rk4"]
