"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``POLARITON_CLONE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_fallback as fallback

compiled = None
if not os.environ.get("POLARITON_CLONE_PURE_PYTHON"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else fallback
BACKEND = "cython" if compiled is not None else "python"

fock_mode_sums = _impl.fock_mode_sums
congruence_batch = _impl.congruence_batch
