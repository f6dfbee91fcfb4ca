"""Unit suffix tables for scenario keys.

Scenario files carry the unit in the key name (waist_um, pump_power_mw,
bandwidth_mhz) so values are never ambiguous; everything is converted to SI
on load.  dB quantities keep an explicit _db suffix and are not scaled.
"""

from __future__ import annotations

import math

LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
POWER = {"w": 1.0, "mw": 1e-3, "uw": 1e-6}
FREQUENCY = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
ANGLE = {"rad": 1.0, "deg": math.pi / 180.0}

TABLES = {
    "length": LENGTH,
    "power": POWER,
    "frequency": FREQUENCY,
    "angle": ANGLE,
}


def split_unit_key(key: str, kind: str) -> tuple[str, float] | None:
    """Split 'base_suffix' into (base, SI factor) for the given dimension.

    Returns None when the key carries no suffix of that dimension.
    """
    table = TABLES[kind]
    base, _, suffix = key.rpartition("_")
    if base and suffix in table:
        return base, table[suffix]
    return None
