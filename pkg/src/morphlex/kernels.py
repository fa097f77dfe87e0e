"""Hot-loop kernels, compiled when available.

``backend`` is the module actually in use; ``BACKENDS`` lists every
importable implementation so tests and benchmarks can compare them.
"""

import logging

from . import _pykernels

logger = logging.getLogger(__name__)

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None
    logger.debug("compiled kernels unavailable, using pure Python")
else:
    BACKENDS["cython"] = _ckernels

backend = _ckernels if _ckernels is not None else _pykernels

substring_counts = backend.substring_counts
build_lattice = backend.build_lattice
bep_all = backend.bep_all
