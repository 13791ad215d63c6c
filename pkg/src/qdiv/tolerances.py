"""Numerical tolerances.

All tolerances live in one frozen record. The active record is held in a
context variable so a diagnostic run can scale every tolerance at once
(``with scaled_tolerances(10): ...``) without threading a parameter through
each call.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    proj: float = 1e-10
    psd: float = 1e-10
    recon: float = 1e-9
    support: float = 1e-10  # relative to the largest eigenvalue
    div: float = 1e-9
    comm: float = 1e-10
    prob: float = 1e-12

    def scaled(self, factor: float) -> "Tolerances":
        if not factor > 0:
            raise ValueError(f"tolerance scale must be positive, got {factor}")
        return replace(self, **{k: v * factor for k, v in asdict(self).items()})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()

_active: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "qdiv_tolerances", default=DEFAULT
)


def tol() -> Tolerances:
    """Return the tolerances in effect for the current context."""
    return _active.get()


@contextlib.contextmanager
def using_tolerances(t: Tolerances):
    token = _active.set(t)
    try:
        yield t
    finally:
        _active.reset(token)


def scaled_tolerances(factor: float):
    """Context manager activating the default tolerances multiplied by ``factor``."""
    return using_tolerances(DEFAULT.scaled(factor))
