"""Selects the compiled kernels when available, else the Python reference.

Set ``PLATOONSIM_FORCE_PYTHON=1`` to skip the compiled extension (used by
the parity tests and benchmarks).  Both implementations share signatures
and status codes; see ``_pyref`` for the reference semantics.
"""

import os

from ._pyref import (
    BUFFER_FULL,
    COLLISION,
    PERIOD_DONE,
    REACHED_END,
    RESOLUTION,
    RULE_THEOREM1,
    RULE_THEOREM2,
    STANDSTILL,
)

__all__ = [
    "advance_period",
    "interval_max_dev",
    "BACKEND",
    "PERIOD_DONE",
    "REACHED_END",
    "COLLISION",
    "STANDSTILL",
    "RESOLUTION",
    "BUFFER_FULL",
    "RULE_THEOREM1",
    "RULE_THEOREM2",
]

if os.environ.get("PLATOONSIM_FORCE_PYTHON") == "1":
    from ._pyref import advance_period, interval_max_dev

    BACKEND = "python"
else:
    try:
        from ._speedups import advance_period, interval_max_dev

        BACKEND = "compiled"
    except ImportError:
        from ._pyref import advance_period, interval_max_dev

        BACKEND = "python"
