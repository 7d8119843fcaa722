"""Fault injectors for exercising the verifier.

Each function returns a corrupted copy of a RunResult, crafted so that
exactly one check trips: per-step arrays are tampered at non-snapshot
indices (invisible to snapshot-based checks), the flux record is scaled
(read only by the mass audit), and the residual corruption adds the
same smooth bump to every snapshot (invisible to time differences,
mass windows, and bound scans with headroom).
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .frontfix import RunResult, Snapshot
from .verify import VerificationThresholds


def _non_snapshot_index(result: RunResult) -> int:
    if result.stride < 2:
        raise ValueError("need snapshot stride >= 2 to hide a per-step corruption")
    return max(1, result.stride // 2)


def breach_solution_bounds(result: RunResult, th: VerificationThresholds) -> RunResult:
    """Push one recorded edge value above the ceiling."""
    u_left = result.u_left.copy()
    u_left[_non_snapshot_index(result)] = th.u_max + 1.0
    return replace(result, u_left=u_left)


def dip_front_below_floor(result: RunResult, th: VerificationThresholds,
                          pore_edge: float) -> RunResult:
    """Drop one recorded front position halfway between the edge and the floor."""
    fronts = result.fronts.copy()
    fronts[_non_snapshot_index(result)] = 0.5 * (pore_edge + th.sstar)
    return replace(result, fronts=fronts)


def spike_front_speed(result: RunResult, th: VerificationThresholds) -> RunResult:
    """Raise one recorded front speed clearly above the speed bound."""
    speeds = result.speeds.copy()
    speeds[_non_snapshot_index(result)] = 1.5 * th.speed_max + 1e-3
    return replace(result, speeds=speeds)


def break_mass_balance(result: RunResult, factor: float = 1.25) -> RunResult:
    """Scale the recorded inflow flux, breaking the integral identity."""
    return replace(result, flux=result.flux * factor)


def break_residual_scaling(result: RunResult, amplitude: float = 0.01) -> RunResult:
    """Add the same smooth interior bump to every snapshot.

    The full-period sine vanishes at both boundaries, is identical
    across snapshots, and has zero trapezoid mass, so time differences,
    boundary records, mass windows, and bound scans (with headroom)
    barely move; the interior residual gains an O(amplitude) floor that
    does not shrink under refinement.  Apply to both members of a
    coarse/refined pair to emulate a resolution-independent defect.
    """
    snapshots = []
    for snap in result.snapshots:
        y = np.linspace(0.0, 1.0, snap.values.size)
        bumped = snap.values + amplitude * np.sin(2.0 * np.pi * y)
        snapshots.append(Snapshot(step_index=snap.step_index, t=snap.t,
                                  s=snap.s, values=bumped))
    return replace(result, snapshots=tuple(snapshots))


def flip_advection_sign(result: RunResult) -> RunResult:
    """Negate the recorded speeds: the trajectory no longer satisfies the
    equations it claims to (wrong-sign advection), without touching any
    bound magnitude."""
    return replace(result, speeds=-result.speeds)
