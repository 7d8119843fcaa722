"""Change of variables between the moving domain [a, s] and the fixed [0, 1].

The map is affine, y = (z - a)/(s - a), so uniform grids correspond
exactly; resampling between resolutions uses linear interpolation, which
preserves profile bounds and monotonicity (no overshoot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDomainError, InvalidParameterError


def _frozen_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FixedProfile:
    """Samples of a profile on the uniform grid over y in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.m < 8:
            raise InvalidParameterError(f"fixed profile needs M >= 8, got M={self.m}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameterError("fixed profile contains non-finite values")

    @property
    def m(self) -> int:
        return self.values.size - 1

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.values.size)


@dataclass(frozen=True)
class PhysicalProfile:
    """Samples of a profile on the uniform grid over z in [a, s]."""

    values: np.ndarray
    s: float

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameterError("physical profile contains non-finite values")

    def grid(self, a: float) -> np.ndarray:
        return np.linspace(a, self.s, self.values.size)


def to_fixed(u: PhysicalProfile, a: float, m: int | None = None) -> FixedProfile:
    """Map a physical profile onto the fixed domain.

    Node y_j maps to z = (1 - y_j) a + y_j s; values are linearly
    interpolated from the physical grid, with both endpoints copied
    exactly (the map sends y=0 to z=a and y=1 to z=s).
    """
    if not (u.s > a):
        raise DegenerateDomainError(f"front s={u.s!r} must exceed edge a={a!r}")
    n_out = (m if m is not None else u.values.size - 1) + 1
    if n_out == u.values.size:
        return FixedProfile(values=u.values)
    y = np.linspace(0.0, 1.0, n_out)
    z = (1.0 - y) * a + y * u.s
    out = np.interp(z, u.grid(a), u.values)
    out[0] = u.values[0]
    out[-1] = u.values[-1]
    return FixedProfile(values=out)


def to_physical(ut: FixedProfile, s: float, a: float, m: int | None = None) -> PhysicalProfile:
    """Inverse map: fixed-domain profile onto the uniform grid over [a, s]."""
    if not (s > a):
        raise DegenerateDomainError(f"front s={s!r} must exceed edge a={a!r}")
    n_out = (m if m is not None else ut.values.size - 1) + 1
    if n_out == ut.values.size:
        return PhysicalProfile(values=ut.values, s=s)
    z = np.linspace(a, s, n_out)
    y = (z - a) / (s - a)
    out = np.interp(y, ut.grid(), ut.values)
    out[0] = ut.values[0]
    out[-1] = ut.values[-1]
    return PhysicalProfile(values=out, s=s)
