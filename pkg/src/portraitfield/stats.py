"""Lightweight instrumentation counters.

The render path promises that the non-spatial conditioning block is encoded
once per frame and the coordinate block once per grid; tests assert this via
these counters.
"""

import threading

_lock = threading.Lock()
_counters: dict[str, int] = {}


def bump(name: str, amount: int = 1) -> None:
    with _lock:
        _counters[name] = _counters.get(name, 0) + amount


def get(name: str) -> int:
    with _lock:
        return _counters.get(name, 0)


def reset() -> None:
    with _lock:
        _counters.clear()


def snapshot() -> dict[str, int]:
    with _lock:
        return dict(_counters)
