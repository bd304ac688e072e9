"""Hot loops: hyperbolic angle sums and batched decoration weights.

The compiled extension is used when it was built; otherwise the numpy
fallback is selected.  Set PACKRIG_PURE_PYTHON=1 to force the fallback.
"""
import os

from . import _pykernels as python_backend

try:
    if os.environ.get("PACKRIG_PURE_PYTHON"):
        raise ImportError
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if compiled_backend is not None else "python"

corner_angles = backend.corner_angles
angle_sums = backend.angle_sums
vertex_weights = backend.vertex_weights
triangle_weights = backend.triangle_weights
