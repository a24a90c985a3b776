"""Runtime caps. The partition cap can be overridden with EQ_PARTITION_CAP."""
import os

DEFAULT_PARTITION_CAP = 10
DEFAULT_BUDGET = 10**8


def partition_cap() -> int:
    raw = os.environ.get("EQ_PARTITION_CAP")
    if raw is None:
        return DEFAULT_PARTITION_CAP
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_PARTITION_CAP
    return max(1, value)
