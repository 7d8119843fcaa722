"""Cross-validation solver on the moving physical grid.

Integrates the physical-domain system directly on a uniform grid over
[a, s(t)]: explicit diffusion update, front moved by the kinetic law,
boundary values imposed through one-sided second-order differences
(scalar Newton at the pore edge for the nonlinear inflow), and linear
re-interpolation onto the new uniform grid after every step.

This is deliberately a different discretization family from the
front-fixed solver (explicit, physical domain, remeshed, versus
implicit, fixed domain): shared bugs across both are unlikely, so
agreement between them is a meaningful oracle.  Explicit stability is
enforced by internal sub-stepping; the sub-step loop is JIT-compiled
with Numba when available (pure NumPy fallback otherwise, same
function body).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BoundarySolveError, ConfigurationError, FrontCollapseError
from .frontfix import RunResult, SchemeConfig, SolverState, _record_run
from .landau import FixedProfile
from .model import ProblemInstance

CFL_FRACTION = 0.4
MAX_SUBSTEPS_PER_STEP = 10**6

# The oracle's state record is the front-fixed solver's: under the affine
# front-fixing map the uniform physical grid over [a, s] and the uniform
# fixed grid correspond node for node, so ``profile.values`` ARE the
# physical samples at spacing (s - a)/M.  TrackedState names that
# identification for the moving-grid view.
TrackedState = SolverState

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAS_NUMBA = False


def _micro_loop(u, s, t, dt_sub, nsub, h_vals, a, a0, big_h, k,
                phi_r, phi_c, beta_r, beta_k0):
    """Run ``nsub`` explicit sub-steps in place; returns (s, status, t).

    status 0: ok; 1: front collapse; 2: edge solve failure.  The ramp
    evaluations mirror model.ramp_value/ramp_slope; they are inlined so
    the whole loop stays compilable in nopython mode.
    """
    m = u.size - 1
    idx = np.arange(m + 1, dtype=np.float64)
    for step_i in range(nsub):
        dz = (s - a) / m
        # phi(s)
        if s <= 0.0:
            phi_s = 0.0
        elif s >= phi_r:
            phi_s = phi_c
        else:
            xi = s / phi_r
            phi_s = phi_c * xi * xi * (3.0 - 2.0 * xi)
        st = a0 * (u[m] - phi_s)
        s_new = s + dt_sub * st
        if s_new <= a:
            return s_new, 1, t + dt_sub
        lam = k * dt_sub / (dz * dz)
        t += dt_sub
        h_now = h_vals[step_i]

        unew = u.copy()
        unew[1:-1] = u[1:-1] + lam * (u[2:] - 2.0 * u[1:-1] + u[:-2])

        # edge value from -k u_z(a) = beta(h - H u(a)), one-sided stencil:
        # g(x) = k(3x - 4 u1 + u2)/(2 dz) - beta(h - H x) is strictly
        # increasing, so Newton from the previous value converges; fall
        # back to bisection on [root(beta=0), root(beta=plateau)]
        slope = 3.0 * k / (2.0 * dz)
        base = k * (4.0 * unew[1] - unew[2]) / (2.0 * dz)
        x = u[0]
        converged = False
        for _ in range(50):
            arg = h_now - big_h * x
            if arg <= 0.0:
                bval = 0.0
                bslope = 0.0
            elif arg >= beta_r:
                bval = beta_k0
                bslope = 0.0
            else:
                xi = arg / beta_r
                bval = beta_k0 * xi * xi * (3.0 - 2.0 * xi)
                bslope = beta_k0 / beta_r * 6.0 * xi * (1.0 - xi)
            g = slope * x - base - bval
            gp = slope + big_h * bslope
            delta = g / gp
            x -= delta
            if abs(delta) <= 1e-13:
                converged = math.isfinite(x)
                break
        if not converged:
            lo = base / slope
            hi = (base + beta_k0) / slope
            if not (math.isfinite(lo) and math.isfinite(hi)):
                return s, 2, t
            for _ in range(200):
                if hi - lo <= 1e-13:
                    break
                mid = 0.5 * (lo + hi)
                arg = h_now - big_h * mid
                if arg <= 0.0:
                    bval = 0.0
                elif arg >= beta_r:
                    bval = beta_k0
                else:
                    xi = arg / beta_r
                    bval = beta_k0 * xi * xi * (3.0 - 2.0 * xi)
                if slope * mid - base - bval < 0.0:
                    lo = mid
                else:
                    hi = mid
            x = 0.5 * (lo + hi)
        unew[0] = x
        unew[m] = k * (4.0 * unew[m - 1] - unew[m - 2]) / (3.0 * k + 2.0 * dz * st)

        # linear remesh onto the uniform grid over [a, s_new]; both grids
        # are uniform, so interpolation is index arithmetic, clamped at
        # the far end exactly like np.interp (no extrapolation/overshoot)
        ratio = (s_new - a) / (s - a)
        for j in range(m + 1):
            pos = idx[j] * ratio
            if pos > m:
                pos = float(m)
            i = int(pos)
            if i > m - 1:
                i = m - 1
            w = pos - i
            u[j] = (1.0 - w) * unew[i] + w * unew[i + 1]
        s = s_new
    return s, 0, t


_micro_loop_py = _micro_loop
if HAS_NUMBA:
    _micro_loop = njit(cache=True)(_micro_loop_py)


def oracle_step(state: SolverState, cfg: SchemeConfig,
                instance: ProblemInstance) -> SolverState:
    """Advance one outer step of size cfg.dt, sub-stepping to satisfy CFL.

    Each sub-step: (1) front moved by the kinetic law evaluated at the
    current front value, (2) explicit interior diffusion, (3) boundary
    values from the one-sided difference conditions, (4) linear remesh
    onto the uniform grid over the new domain.
    """
    if cfg.forcing is not None:
        raise ConfigurationError("the moving-grid oracle does not support forcing terms")
    p = instance.params
    m = state.profile.m
    dz = (state.s - p.a) / m
    dt_cfl = CFL_FRACTION * dz * dz / p.k
    nsub = max(1, math.ceil(cfg.dt / dt_cfl))
    if nsub > MAX_SUBSTEPS_PER_STEP:
        raise ConfigurationError(
            f"CFL sub-step count {nsub} exceeds {MAX_SUBSTEPS_PER_STEP}; "
            "reduce dt or M, or increase k")
    dt_sub = cfg.dt / nsub

    micro_times = state.t + dt_sub * np.arange(1, nsub + 1)
    h_vals = np.asarray(instance.h.eval(micro_times), dtype=float)
    u = state.profile.values.copy()
    s, status, t_stop = _micro_loop(
        u, state.s, state.t, dt_sub, nsub, h_vals,
        p.a, p.a0, p.H, p.k,
        instance.phi.r_threshold, instance.phi.plateau,
        instance.beta.r_threshold, instance.beta.plateau)
    if status == 1:
        raise FrontCollapseError(
            f"front collapsed to {s!r} <= a={p.a!r} at t={t_stop!r}", t=t_stop)
    if status == 2:
        raise BoundarySolveError("edge solve did not converge", t=t_stop)

    return SolverState(t=state.t + cfg.dt, s=s, s_t=(s - state.s) / cfg.dt,
                       profile=FixedProfile(values=u))


def run_oracle(instance: ProblemInstance, cfg: SchemeConfig) -> RunResult:
    """Run the moving-grid oracle from t=0 to t=T.

    Records the same RunResult as the front-fixed solver; the uniform
    physical grid maps onto the uniform fixed grid node for node, so
    snapshots are stored identically.
    """
    return _record_run("oracle", instance, cfg, oracle_step)
