"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Setting ``QUENCHBAT_PURE_PYTHON=1`` forces the fallback.
"""
import os

if os.environ.get("QUENCHBAT_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import (  # noqa: F401
        nonsc_amplitude, oscillation_factor, oscillation_sum, pairwise_sum, sc_amplitude,
    )
    BACKEND = "python"
else:
    try:
        from ._kernels import (  # noqa: F401
            nonsc_amplitude, oscillation_factor, oscillation_sum, pairwise_sum, sc_amplitude,
        )
        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import (  # noqa: F401
            nonsc_amplitude, oscillation_factor, oscillation_sum, pairwise_sum, sc_amplitude,
        )
        BACKEND = "python"
