"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``CSS_SKYLINE_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if os.environ.get("CSS_SKYLINE_BACKEND", "").lower() == "python" or compiled_kernels is None:
    kernels = _pykernels
else:
    kernels = compiled_kernels

BACKEND = kernels.BACKEND
