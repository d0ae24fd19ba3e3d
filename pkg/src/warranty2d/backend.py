"""Kernel backend selection.

The compiled extension ``warranty2d._kernels`` is preferred when it imported
cleanly; the pure-NumPy module ``warranty2d._kernels_py`` is the fallback.
Set the environment variable ``WARRANTY2D_BACKEND`` to ``python`` or ``c``
before import to force one side (``c`` raises if the extension is missing).
"""

import os

from . import _kernels_py

_requested = os.environ.get("WARRANTY2D_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _kernels_py
elif _requested == "c":
    from . import _kernels as _impl  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND_NAME = "c" if _impl.__name__.endswith("._kernels") else "python"

log_reliability = _impl.log_reliability
log_pdf = _impl.log_pdf
log_censor_prob = _impl.log_censor_prob
loglik = _impl.loglik
rect_moments = _impl.rect_moments


def using_compiled():
    """True when the compiled kernels are active."""
    return BACKEND_NAME == "c"
