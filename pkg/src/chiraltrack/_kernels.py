"""Select the compiled kernel if it was built, else the numpy fallback.

Set ``CHIRALTRACK_PURE=1`` to force the fallback.
"""

import os

from . import _core_py

BACKEND = "python"
grid_posterior = _core_py.grid_posterior

if os.environ.get("CHIRALTRACK_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        grid_posterior = _core.grid_posterior
