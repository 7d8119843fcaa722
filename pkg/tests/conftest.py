"""Shared instance builders for the test suite.

The acceptance battery spans two coefficient families: family A is
growth-dominant (breaking plateau 1.0, moisture at or above the
plateau level), family B is deliberately receding (small plateau 0.3,
weak inflow, u0 below the front threshold).  All battery members pass
assumption validation; the deliberately out-of-assumption vectors
(exact equilibrium, zero moisture) have their own builders.
"""

from __future__ import annotations

import numpy as np
import pytest

import swellfront as sf

BATTERY_T = 0.5


def phi_growth() -> sf.RampFunction:
    return sf.make_ramp(2.0, 1.0)


def phi_receding() -> sf.RampFunction:
    return sf.make_ramp(2.0, 0.3)


def growth_instance(T=BATTERY_T, a0=1.0, H=1.0, k=1.0, h=None, init=None,
                    s0=1.5, u0=0.7) -> sf.ProblemInstance:
    params = sf.ModelParams(a=1.0, a0=a0, H=H, k=k, T=T)
    phi = phi_growth()
    if h is None:
        h = sf.MoistureHistory.constant(1.0 * H, T)
    if init is None:
        init = sf.InitialData.constant(s0, u0, phi, params.a)
    return sf.ProblemInstance(params=params, beta=sf.make_ramp(1.0, 1.0),
                              phi=phi, h=h, init=init)


def receding_instance(T=BATTERY_T, a0=1.0, H=1.0, k=1.0, u0=0.24,
                      init=None) -> sf.ProblemInstance:
    params = sf.ModelParams(a=1.4, a0=a0, H=H, k=k, T=T)
    phi = phi_receding()
    h = sf.MoistureHistory.constant(0.3 * H, T)
    if init is None:
        init = sf.InitialData.constant(1.7, u0, phi, params.a)
    return sf.ProblemInstance(params=params, beta=sf.make_ramp(0.5, 0.5),
                              phi=phi, h=h, init=init)


def canonical_instance(T=1.0) -> sf.ProblemInstance:
    """Recede-then-grow reference case used across the suite."""
    return growth_instance(T=T)


def stationary_instance(T=1.0) -> sf.ProblemInstance:
    """Exact equilibrium: u0 = phi(s0) everywhere, moisture pinned at H*u0.

    All fluxes and the front speed vanish identically, so both solvers
    must preserve it to roundoff.  Deliberately out of assumptions (the
    plateau compatibility bound cannot hold for any equilibrium), so it
    runs through the library, or through the CLI with
    enforce_assumptions = false.
    """
    phi = phi_growth()
    params = sf.ModelParams(a=1.0, a0=1.0, H=1.0, k=1.0, T=T)
    u_star = phi.eval(1.5)
    h = sf.MoistureHistory.constant(params.H * u_star, T)
    init = sf.InitialData.constant(1.5, u_star, phi, params.a)
    return sf.ProblemInstance(params=params, beta=sf.make_ramp(1.0, 1.0),
                              phi=phi, h=h, init=init)


def zero_moisture_instance(T=0.3, u0=0.7) -> sf.ProblemInstance:
    """h = 0: no inflow ever, the front can only recede.

    Violates the plateau compatibility assumption by construction
    (sup(h)/H = 0); used to probe the front floor in the receding
    regime, where the solution bounds are not meaningful.
    """
    phi = phi_growth()
    params = sf.ModelParams(a=1.0, a0=1.0, H=1.0, k=1.0, T=T)
    h = sf.MoistureHistory.constant(0.0, T)
    init = sf.InitialData.constant(1.5, u0, phi, params.a)
    return sf.ProblemInstance(params=params, beta=sf.make_ramp(1.0, 1.0),
                              phi=phi, h=h, init=init)


def zero_moisture_equilibrium(T=0.3) -> sf.ProblemInstance:
    """h = 0 with u0 pinned at phi(s0): a fixed point of the dynamics."""
    phi = phi_growth()
    params = sf.ModelParams(a=1.0, a0=1.0, H=1.0, k=1.0, T=T)
    h = sf.MoistureHistory.constant(0.0, T)
    init = sf.InitialData.constant(1.5, phi.eval(1.5), phi, params.a)
    return sf.ProblemInstance(params=params, beta=sf.make_ramp(1.0, 1.0),
                              phi=phi, h=h, init=init)


def build_battery() -> list:
    """>= 20 valid instances varying a0, H, k, moisture shape, and u0."""
    T = BATTERY_T
    phi_a = phi_growth()
    phi_b = phi_receding()
    zgrid = np.linspace(1.0, 1.5, 41)
    u0_bump = 0.6 + 0.2 * np.sin(np.pi * (zgrid - 1.0) / 0.5) ** 2
    combo = sf.ProblemInstance(
        params=sf.ModelParams(a=1.0, a0=2.0, H=0.5, k=1.5, T=T),
        beta=sf.make_ramp(1.0, 1.0), phi=phi_a,
        h=sf.MoistureHistory.constant(0.5, T),
        init=sf.InitialData.linear(1.5, 0.55, 0.8, phi_a, 1.0))
    return [
        ("A_base", growth_instance()),
        ("A_a0_half", growth_instance(a0=0.5)),
        ("A_a0_double", growth_instance(a0=2.0)),
        ("A_H_half", growth_instance(H=0.5)),
        ("A_H_double", growth_instance(H=2.0)),
        ("A_k_half", growth_instance(k=0.5)),
        ("A_k_larger", growth_instance(k=1.5)),
        ("A_h_linear", growth_instance(h=sf.MoistureHistory.linear(1.0, 0.5, T))),
        ("A_h_sine", growth_instance(
            h=sf.MoistureHistory.sine(1.2, 0.2, 2.0 * np.pi, 0.0, T))),
        ("A_h_table", growth_instance(
            h=sf.MoistureHistory.table([0.0, 0.15, 0.35, 0.5],
                                       [1.0, 1.3, 1.05, 1.2], T))),
        ("A_u0_linear", growth_instance(
            init=sf.InitialData.linear(1.5, 0.6, 0.84, phi_a, 1.0))),
        ("A_u0_table", growth_instance(
            init=sf.InitialData.table(1.5, u0_bump, phi_a, 1.0))),
        ("A_s0_small", growth_instance(
            init=sf.InitialData.constant(1.3, 0.6, phi_a, 1.0))),
        ("A_s0_large", growth_instance(
            init=sf.InitialData.constant(1.8, 0.9, phi_a, 1.0))),
        ("A_near_equilibrium", growth_instance(u0=0.84)),
        ("A_combo", combo),
        ("B_base", receding_instance()),
        ("B_a0_double", receding_instance(a0=2.0)),
        ("B_k_half", receding_instance(k=0.5)),
        ("B_tight_margin", receding_instance(u0=0.2375)),
        ("B_H_double", receding_instance(H=2.0)),
        ("B_u0_linear", receding_instance(
            init=sf.InitialData.linear(1.7, 0.25, 0.27, phi_receding(), 1.4))),
    ]


@pytest.fixture(scope="session")
def battery():
    return build_battery()


@pytest.fixture(scope="session")
def canonical():
    return canonical_instance()
