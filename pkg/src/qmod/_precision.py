"""Working-precision plumbing for the analytic modules.

All extended-precision evaluation runs at >= 40 significant decimal digits;
the default carries guard digits on top.  The QMOD_PRECISION environment
variable overrides the digit count (values below the floor are clamped).
"""

from __future__ import annotations

import os

from mpmath import mp

MIN_DPS = 40
DEFAULT_DPS = 48


def working_dps() -> int:
    raw = os.environ.get("QMOD_PRECISION")
    if raw is None:
        return DEFAULT_DPS
    try:
        val = int(raw)
    except ValueError:
        return DEFAULT_DPS
    return max(MIN_DPS, val)


def workprec():
    """Context manager pinning mpmath to the working precision."""
    return mp.workdps(working_dps())
