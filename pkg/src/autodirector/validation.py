"""Small input validation helpers used by the value types and estimators."""

import math


def check_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(name, value):
    check_finite(name, value)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value


def check_fraction(name, value, include_zero=False):
    """Validate value in (0, 1], or [0, 1] when include_zero is set."""
    check_finite(name, value)
    lo_ok = value >= 0 if include_zero else value > 0
    if not (lo_ok and value <= 1):
        bounds = "[0, 1]" if include_zero else "(0, 1]"
        raise ValueError(f"{name} must lie in {bounds}, got {value!r}")
    return value


def check_choice(name, value, options):
    if value not in options:
        raise ValueError(f"{name} must be one of {sorted(options)}, got {value!r}")
    return value


def check_known_fields(mapping, allowed, context):
    """Reject unknown keys in a parsed configuration mapping."""
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ValueError(f"{context}: unknown field(s) {sorted(unknown)}")
