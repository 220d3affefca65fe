"""Kernel backend selection.

The two hot kernels (weighted top-K reduction, row-wise softmax entropy)
exist twice with identical semantics: a compiled Cython extension
(labelshift.kernels._fast) and a numpy fallback (_fallback). The
extension is used when importable; set LABELSHIFT_KERNELS=py or
LABELSHIFT_KERNELS=c to force a backend at import time.

benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import os

from ._fallback import LINEAR, UNWEIGHTED, ZIPF

_requested = os.environ.get("LABELSHIFT_KERNELS", "").strip().lower()

if _requested in ("py", "python", "fallback"):
    from . import _fallback as _impl

    BACKEND = "python"
elif _requested in ("c", "ext", "fast"):
    from . import _fast as _impl  # hard error if the extension was not built

    BACKEND = "c"
elif _requested:
    raise ValueError(f"unknown LABELSHIFT_KERNELS value: {_requested!r}")
else:
    try:
        from . import _fast as _impl

        BACKEND = "c"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "python"

weighted_topk_mean = _impl.weighted_topk_mean
row_entropy = _impl.row_entropy

WEIGHT_CODES = {"zipf": ZIPF, "linear_decay": LINEAR, "unweighted": UNWEIGHTED}

__all__ = [
    "BACKEND",
    "LINEAR",
    "UNWEIGHTED",
    "WEIGHT_CODES",
    "ZIPF",
    "row_entropy",
    "weighted_topk_mean",
]
