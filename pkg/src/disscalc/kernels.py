"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Set ``DISSCALC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py as python

compiled = None
if not os.environ.get("DISSCALC_PURE_PYTHON"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "numpy"

cardinal_values = _impl.cardinal_values
cardinal_sumsq = _impl.cardinal_sumsq
cardinal_series = _impl.cardinal_series
loewner_apply = _impl.loewner_apply
