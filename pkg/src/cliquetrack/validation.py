"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

import math


def check_k(k) -> int:
    """Validate a clique size parameter: an integer of at least 3."""
    if isinstance(k, bool) or not isinstance(k, int):
        raise ValueError(f"k must be an integer >= 3, got {k!r}")
    if k < 3:
        raise ValueError(f"k must be an integer >= 3, got {k}")
    return k


def check_window(window) -> float:
    window = float(window)
    if not math.isfinite(window) or window <= 0:
        raise ValueError(f"window must be a positive duration, got {window!r}")
    return window


def check_threshold(w_star) -> float:
    w_star = float(w_star)
    if not math.isfinite(w_star) or w_star < 0:
        raise ValueError(f"weight threshold must be non-negative, got {w_star!r}")
    return w_star


def check_probability(p, name: str = "probability") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def check_snapshot(x):
    from .graphs import Snapshot

    if not isinstance(x, Snapshot):
        raise TypeError(f"expected a Snapshot, got {type(x).__name__}")
    return x


def check_series(x):
    from .graphs import SnapshotSeries

    if not isinstance(x, SnapshotSeries):
        raise TypeError(f"expected a SnapshotSeries, got {type(x).__name__}")
    return x
