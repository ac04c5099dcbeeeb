"""Select the integration kernel.

The compiled extension is used when it imports cleanly; setting
``FLOWSHIFT_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

from . import _dopri_py

python_solve = _dopri_py.dopri_solve

try:
    if os.environ.get("FLOWSHIFT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernel requested")
    from ._dopri_ext import dopri_solve as compiled_solve
except ImportError:
    compiled_solve = None

if compiled_solve is not None:
    dopri_solve = compiled_solve
    BACKEND = "cython"
else:
    dopri_solve = python_solve
    BACKEND = "python"
