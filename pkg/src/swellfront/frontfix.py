"""Implicit solver on the front-fixed domain.

Solves, on the fixed interval y in [0, 1],

    u_t - k/(s-a)^2 u_yy = y s_t/(s-a) u_y

coupled to the front law s_t = a0 (u(t,1) - phi(s)), with the nonlinear
inflow condition -k/(s-a) u_y(t,0) = beta(h - H u(t,0)) at the pore edge
and the mass-conservation condition -k/(s-a) u_y(t,1) = u(t,1) s_t at
the front.

Scheme: backward Euler in time, second-order centered differences for
u_yy, first-order upwind for the advection term (direction chosen by the
sign of s_t), boundary conditions folded in by ghost-node elimination,
geometry coefficients frozen at the new front position per step.  The
combination gives an M-matrix, so the proven solution bounds hold
discretely without limiters; that is deliberate and outranks formal
order of accuracy.

The linear system is tridiagonal except for the single nonlinear entry
at the edge node.  Each step solves the tridiagonal system for two
right-hand sides (the data and a unit vector), which reduces the edge
nonlinearity to one scalar equation solved by Newton iteration with a
bisection fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import BoundarySolveError, ConfigurationError, FrontCollapseError
from .landau import FixedProfile
from .model import InitialData, ProblemInstance, RampFunction

ITERATED_COUPLING_TOL = 1e-12
ITERATED_COUPLING_MAX_SWEEPS = 25
FRONT_STEP_FRACTION = 0.01   # front moves at most this fraction of (s0 - a) per step
EXACTNESS_FLOOR = 1e-12


@dataclass(frozen=True)
class Forcing:
    """Optional source terms making a prescribed pair an exact solution.

    interior(t, y) is added to the PDE right-hand side; left(t) and
    right(t) shift the edge and front flux conditions; front(t) shifts
    the front law.  All default-off in production runs.
    """

    interior: Callable
    left: Callable
    right: Callable
    front: Callable


@dataclass(frozen=True)
class SchemeConfig:
    m: int = 200
    dt: float = 1e-4
    coupling: str = "explicit"            # "explicit" or "iterated"
    boundary_newton_tol: float = 1e-12
    boundary_newton_max_iter: int = 50
    snapshot_stride: int = 100
    forcing: Optional[Forcing] = None

    def __post_init__(self):
        if self.m < 8:
            raise ConfigurationError(f"need M >= 8 spatial nodes, got {self.m}")
        if not (self.dt > 0.0):
            raise ConfigurationError(f"time step must be positive, got {self.dt!r}")
        if self.coupling not in ("explicit", "iterated"):
            raise ConfigurationError(f"unknown coupling mode {self.coupling!r}")
        if self.snapshot_stride < 1:
            raise ConfigurationError("snapshot stride must be >= 1")


@dataclass(frozen=True)
class SolverState:
    t: float
    s: float
    s_t: float
    profile: FixedProfile


@dataclass(frozen=True)
class Snapshot:
    step_index: int
    t: float
    s: float
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


def _frozen(arr) -> np.ndarray:
    out = np.asarray(arr, dtype=float).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RunResult:
    """Full time series of one run.

    fronts/speeds/boundary values/inflow flux are recorded every step;
    profile snapshots are decimated by ``stride`` (the final step is
    always included).  Profiles are stored on the fixed domain for both
    solvers; the affine front-fixing map sends uniform grids to uniform
    grids, so the physical reconstruction is exact.
    """

    solver: str
    m: int
    dt: float
    stride: int
    coupling: str
    times: np.ndarray
    fronts: np.ndarray
    speeds: np.ndarray
    u_left: np.ndarray
    u_right: np.ndarray
    flux: np.ndarray
    snapshots: tuple

    def __post_init__(self):
        for name in ("times", "fronts", "speeds", "u_left", "u_right", "flux"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.times.size
        for name in ("fronts", "speeds", "u_left", "u_right", "flux"):
            if getattr(self, name).size != n:
                raise ConfigurationError(f"run record {name} length mismatch")
        if n < 2 or self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0.0):
            raise ConfigurationError("run times must increase strictly from 0")

    @property
    def final_front(self) -> float:
        return float(self.fronts[-1])

    @property
    def final_profile(self) -> np.ndarray:
        return self.snapshots[-1].values

    def snapshot_indices(self) -> np.ndarray:
        return np.asarray([snap.step_index for snap in self.snapshots])


_Y_GRID_CACHE: dict = {}


def _y_grid(m: int) -> np.ndarray:
    y = _Y_GRID_CACHE.get(m)
    if y is None:
        y = np.linspace(0.0, 1.0, m + 1)
        y.setflags(write=False)
        _Y_GRID_CACHE[m] = y
    return y


def _assemble(uold: np.ndarray, t_new: float, s_new: float, st_new: float,
              dt: float, instance: ProblemInstance, forcing: Optional[Forcing]):
    """Build the tridiagonal system for one backward-Euler solve.

    Returns (lower, diag, upper, rhs, c_b, h_new); the nonlinear edge
    term -c_b * beta(h_new - H u_0) is NOT in the matrix and must be
    handled by the caller.
    """
    p = instance.params
    m = uold.size - 1
    dy = 1.0 / m
    gap = s_new - p.a
    diffusion = p.k / gap**2
    d2 = diffusion / dy**2
    y = _y_grid(m)
    b = y * (st_new / gap)
    inv_dt = 1.0 / dt

    lower = np.full(m + 1, -d2)
    upper = np.full(m + 1, -d2)
    diag = np.full(m + 1, inv_dt + 2.0 * d2)
    rhs = uold * inv_dt

    # upwind advection on interior rows, direction set by the sign of s_t
    coef = b[1:-1] / dy
    if st_new >= 0.0:
        diag[1:-1] += coef
        upper[1:-1] -= coef
    else:
        diag[1:-1] -= coef
        lower[1:-1] += coef

    # edge row (y = 0): ghost elimination of the inflow condition; the
    # advection coefficient vanishes there (y = 0)
    c_b = 2.0 / (gap * dy)
    upper[0] = -2.0 * d2

    # front row (y = 1): ghost elimination of the flux condition
    # u_ghost = u_{M-1} - gamma u_M - q g1, with the advection term using
    # the ghost when differencing forward
    gamma = 2.0 * dy * gap * st_new / p.k
    b_m = st_new / gap
    lower[m] = -2.0 * d2
    diag[m] = inv_dt + (2.0 + gamma) * d2
    if st_new >= 0.0:
        lower[m] -= b_m / dy
        diag[m] += b_m * (1.0 + gamma) / dy
    else:
        lower[m] += b_m / dy
        diag[m] -= b_m / dy

    h_new = float(instance.h.eval(t_new))
    if forcing is not None:
        rhs = rhs + np.asarray(forcing.interior(t_new, y), dtype=float)
        rhs[0] += c_b * forcing.left(t_new)
        g1 = forcing.right(t_new)
        rhs[m] -= c_b * g1
        if st_new >= 0.0:
            rhs[m] -= b_m * (2.0 * gap / p.k) * g1

    lower[0] = 0.0
    upper[m] = 0.0
    return lower, diag, upper, rhs, c_b, h_new


def _edge_value(x0: float, w0: float, c_b: float, h_new: float,
                beta: RampFunction, big_h: float, start: float,
                tol: float, max_iter: int, t_new: float) -> float:
    """Solve xi = x0 + w0 c_b beta(h - H xi) for the edge node value.

    The residual F(xi) = xi - x0 - w0 c_b beta(h - H xi) is strictly
    increasing (beta' >= 0, w0 > 0 by the M-matrix structure), so Newton
    converges from the previous edge value; a bisection fallback covers
    pathological starts.
    """
    xi = start
    for _ in range(max_iter):
        f = xi - x0 - w0 * c_b * beta.eval(h_new - big_h * xi)
        fp = 1.0 + w0 * c_b * big_h * beta.derivative(h_new - big_h * xi)
        delta = f / fp
        xi -= delta
        if abs(delta) <= tol:
            if math.isfinite(xi):
                return xi
            break
    lo = x0
    hi = x0 + w0 * c_b * beta.plateau
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise BoundarySolveError("edge solve produced non-finite bracket", t=t_new)
    for _ in range(200):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if mid - x0 - w0 * c_b * beta.eval(h_new - big_h * mid) < 0.0:
            lo = mid
        else:
            hi = mid
    raise BoundarySolveError("edge solve did not converge", t=t_new)


def _solve_profile(uold: np.ndarray, t_new: float, s_new: float, st_new: float,
                   dt: float, instance: ProblemInstance,
                   cfg: SchemeConfig) -> np.ndarray:
    lower, diag, upper, rhs, c_b, h_new = _assemble(
        uold, t_new, s_new, st_new, dt, instance, cfg.forcing)
    m = uold.size - 1
    ab = np.zeros((3, m + 1))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    b2 = np.zeros((m + 1, 2))
    b2[:, 0] = rhs
    b2[0, 1] = 1.0
    sol = solve_banded((1, 1), ab, b2, overwrite_ab=True, overwrite_b=True,
                       check_finite=False)
    x = sol[:, 0]
    w = sol[:, 1]
    xi = _edge_value(float(x[0]), float(w[0]), c_b, h_new, instance.beta,
                     instance.params.H, float(uold[0]),
                     cfg.boundary_newton_tol, cfg.boundary_newton_max_iter, t_new)
    return x + w * (c_b * instance.beta.eval(h_new - instance.params.H * xi))


def step_system_residual(state: SolverState, cfg: SchemeConfig,
                         instance: ProblemInstance) -> float:
    """Relative residual of the linear system solved by ``step``.

    Re-assembles the system for the step out of ``state``, solves it the
    same way, and plugs the solution back in (including the nonlinear
    edge term).  Used to audit the tridiagonal solve.
    """
    p = instance.params
    uold = state.profile.values
    gs = cfg.forcing.front(state.t) if cfg.forcing is not None else 0.0
    st_new = p.a0 * (uold[-1] - instance.phi.eval(state.s)) + gs
    s_new = state.s + cfg.dt * st_new
    t_new = state.t + cfg.dt
    lower, diag, upper, rhs, c_b, h_new = _assemble(
        uold, t_new, s_new, st_new, cfg.dt, instance, cfg.forcing)
    unew = _solve_profile(uold, t_new, s_new, st_new, cfg.dt, instance, cfg)
    lhs = diag * unew
    lhs[:-1] += upper[:-1] * unew[1:]
    lhs[1:] += lower[1:] * unew[:-1]
    lhs[0] -= c_b * instance.beta.eval(h_new - p.H * unew[0])
    scale = float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs)) / scale)


def step(state: SolverState, cfg: SchemeConfig,
         instance: ProblemInstance) -> SolverState:
    """Advance one time step of size ``cfg.dt``.

    Explicit-front mode moves the front with the current profile value;
    iterated-coupling mode fixed-point iterates front and profile until
    the front update changes by less than 1e-12 (at most 25 sweeps),
    which makes the front law fully implicit.
    """
    p = instance.params
    dt = cfg.dt
    t_new = state.t + dt
    uold = state.profile.values
    forcing = cfg.forcing

    gs_old = forcing.front(state.t) if forcing is not None else 0.0
    st_new = p.a0 * (uold[-1] - instance.phi.eval(state.s)) + gs_old
    s_new = state.s + dt * st_new
    if s_new <= p.a:
        raise FrontCollapseError(
            f"front collapsed to {s_new!r} <= a={p.a!r} at t={t_new!r}", t=t_new)

    if cfg.coupling == "explicit":
        unew = _solve_profile(uold, t_new, s_new, st_new, dt, instance, cfg)
    else:
        s_guess = s_new
        unew = uold
        for _ in range(ITERATED_COUPLING_MAX_SWEEPS):
            st_guess = (s_guess - state.s) / dt
            unew = _solve_profile(uold, t_new, s_guess, st_guess, dt, instance, cfg)
            gs_new = forcing.front(t_new) if forcing is not None else 0.0
            s_next = state.s + dt * (p.a0 * (unew[-1] - instance.phi.eval(s_guess)) + gs_new)
            if s_next <= p.a:
                raise FrontCollapseError(
                    f"front collapsed to {s_next!r} <= a={p.a!r} at t={t_new!r}", t=t_new)
            done = abs(s_next - s_guess) < ITERATED_COUPLING_TOL
            s_guess = s_next
            if done:
                break
        s_new = s_guess
        st_new = (s_new - state.s) / dt

    return SolverState(t=t_new, s=s_new, s_t=st_new, profile=FixedProfile(values=unew))


def dt_cap(instance: ProblemInstance) -> float:
    """Largest allowed step: the front moves <= 1% of the initial gap per step."""
    sc = instance.speed_cap()
    if sc <= 0.0:
        return math.inf
    return FRONT_STEP_FRACTION * (instance.init.s0 - instance.params.a) / sc


def _effective_time_grid(cfg: SchemeConfig, instance: ProblemInstance):
    T = instance.params.T
    if cfg.dt > T:
        raise ConfigurationError(f"dt={cfg.dt!r} exceeds horizon T={T!r}")
    dt_eff = min(cfg.dt, dt_cap(instance))
    nsteps = max(1, math.ceil(T / dt_eff - 1e-12))
    return np.linspace(0.0, T, nsteps + 1), T / nsteps


def initial_state(instance: ProblemInstance, cfg: SchemeConfig) -> SolverState:
    """Initial solver state: u0 pulled onto the fixed grid through the front map."""
    p = instance.params
    s0 = instance.init.s0
    y = _y_grid(cfg.m)
    z = (1.0 - y) * p.a + y * s0
    values = np.asarray(instance.init.u0_eval(z, p.a), dtype=float)
    gs0 = cfg.forcing.front(0.0) if cfg.forcing is not None else 0.0
    st0 = p.a0 * (values[-1] - instance.phi.eval(s0)) + gs0
    return SolverState(t=0.0, s=s0, s_t=st0, profile=FixedProfile(values=values))


def _record_run(solver: str, instance: ProblemInstance, cfg: SchemeConfig,
                stepper) -> RunResult:
    """Shared recording loop for both solvers.

    ``stepper(state, cfg, instance)`` advances one step of ``cfg.dt``.
    """
    p = instance.params
    times, dt_run = _effective_time_grid(cfg, instance)
    cfg_run = replace(cfg, dt=dt_run)
    nsteps = times.size - 1

    state = initial_state(instance, cfg_run)
    fronts = np.empty(nsteps + 1)
    speeds = np.empty(nsteps + 1)
    u_left = np.empty(nsteps + 1)
    u_right = np.empty(nsteps + 1)
    flux = np.empty(nsteps + 1)
    snapshots = []

    def record(n: int, st: SolverState):
        fronts[n] = st.s
        speeds[n] = st.s_t
        u_left[n] = st.profile.values[0]
        u_right[n] = st.profile.values[-1]
        flux[n] = instance.beta.eval(float(instance.h.eval(times[n])) - p.H * u_left[n])
        if n % cfg_run.snapshot_stride == 0 or n == nsteps:
            snapshots.append(Snapshot(step_index=n, t=float(times[n]), s=float(st.s),
                                      values=st.profile.values))

    record(0, state)
    for n in range(1, nsteps + 1):
        try:
            state = stepper(state, cfg_run, instance)
        except (FrontCollapseError, BoundarySolveError) as exc:
            if exc.t is None:
                exc.t = float(times[n])
            raise
        state = replace(state, t=float(times[n]))  # pin to the exact grid time
        record(n, state)

    return RunResult(solver=solver, m=cfg_run.m, dt=dt_run,
                     stride=cfg_run.snapshot_stride, coupling=cfg_run.coupling,
                     times=times, fronts=fronts, speeds=speeds,
                     u_left=u_left, u_right=u_right, flux=flux,
                     snapshots=tuple(snapshots))


def run(instance: ProblemInstance, cfg: SchemeConfig) -> RunResult:
    """Run the front-fixed solver from t=0 to t=T.

    Deterministic: identical inputs yield bit-identical outputs.  The
    requested dt is capped so the front moves at most 1% of the initial
    gap per step, then rounded down so the grid lands exactly on T.
    """
    return _record_run("frontfix", instance, cfg, step)


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceTable:
    """Errors and observed orders across (M, dt) -> (2M, dt/2) refinement."""

    mode: str                 # "self" or "mms"
    ms: tuple
    dts: tuple
    err_u: tuple              # self: per level vs finest; mms: per level vs exact
    err_s: tuple
    orders_u: tuple
    orders_s: tuple
    exact: bool

    def ratios_u(self) -> tuple:
        return tuple(2.0 ** o for o in self.orders_u)

    def ratios_s(self) -> tuple:
        return tuple(2.0 ** o for o in self.orders_s)

    def to_csv_text(self) -> str:
        lines = ["level,m,dt,err_u,err_s,order_u,order_s"]
        for i, (m, dt) in enumerate(zip(self.ms, self.dts)):
            eu = repr(self.err_u[i]) if i < len(self.err_u) else ""
            es = repr(self.err_s[i]) if i < len(self.err_s) else ""
            ou = repr(self.orders_u[i]) if i < len(self.orders_u) else ""
            os_ = repr(self.orders_s[i]) if i < len(self.orders_s) else ""
            lines.append(f"{i},{m},{dt!r},{eu},{es},{ou},{os_}")
        return "\n".join(lines) + "\n"


def _l2_norm(values: np.ndarray, dy: float) -> float:
    weights = np.full(values.size, dy)
    weights[0] = weights[-1] = 0.5 * dy
    return float(np.sqrt(np.sum(weights * values * values)))


def _orders(errs) -> tuple:
    out = []
    for a, b in zip(errs[:-1], errs[1:]):
        if a <= EXACTNESS_FLOOR or b <= 0.0:
            out.append(math.inf)
        else:
            out.append(math.log2(a / b))
    return tuple(out)


def _refined_cfgs(base_cfg: SchemeConfig, instance: ProblemInstance, levels: int):
    if levels < 3:
        raise ConfigurationError(f"convergence study needs >= 3 levels, got {levels}")
    if base_cfg.dt > dt_cap(instance):
        raise ConfigurationError(
            f"base dt={base_cfg.dt!r} exceeds the front-motion cap "
            f"{dt_cap(instance)!r}; refinement ratios would be skewed")
    return [replace(base_cfg, m=base_cfg.m * 2**lv, dt=base_cfg.dt / 2**lv)
            for lv in range(levels)]


def self_convergence(instance: ProblemInstance, base_cfg: SchemeConfig,
                     levels: int) -> ConvergenceTable:
    """Richardson self-convergence: errors of each level against the finest.

    Profile errors are discrete L2 on the common coarse grid at t=T;
    front errors are absolute values of s(T).
    """
    cfgs = _refined_cfgs(base_cfg, instance, levels)
    results = [run(instance, cfg) for cfg in cfgs]
    finest = results[-1]
    fin_restricted = finest.final_profile[::2 ** (levels - 1)]
    dy0 = 1.0 / base_cfg.m

    err_u, err_s = [], []
    for lv in range(levels - 1):
        coarse = results[lv].final_profile[::2**lv]
        err_u.append(_l2_norm(coarse - fin_restricted, dy0))
        err_s.append(abs(results[lv].final_front - finest.final_front))
    exact = all(e <= EXACTNESS_FLOOR for e in err_u + err_s)
    return ConvergenceTable(mode="self",
                            ms=tuple(c.m for c in cfgs), dts=tuple(c.dt for c in cfgs),
                            err_u=tuple(err_u), err_s=tuple(err_s),
                            orders_u=_orders(err_u), orders_s=_orders(err_s),
                            exact=exact)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManufacturedSolution:
    """A prescribed (front, profile) pair with its exact derivatives."""

    u: Callable        # u(t, y)
    u_t: Callable
    u_y: Callable
    u_yy: Callable
    s: Callable        # s(t)
    s_t: Callable


def polynomial_mms(s0: float, base: float, growth: float = 0.1,
                   curvature: float = 1.0) -> ManufacturedSolution:
    """The canonical pair s(t) = s0 + growth*t, u(t,y) = base + curvature*t*y^2."""
    return ManufacturedSolution(
        u=lambda t, y: base + curvature * t * y * y,
        u_t=lambda t, y: curvature * y * y,
        u_y=lambda t, y: 2.0 * curvature * t * y,
        u_yy=lambda t, y: 2.0 * curvature * t + 0.0 * y,
        s=lambda t: s0 + growth * t,
        s_t=lambda t: growth,
    )


def constant_mms(s0: float, value: float) -> ManufacturedSolution:
    return ManufacturedSolution(
        u=lambda t, y: value + 0.0 * y,
        u_t=lambda t, y: 0.0 * y,
        u_y=lambda t, y: 0.0 * y,
        u_yy=lambda t, y: 0.0 * y,
        s=lambda t: s0,
        s_t=lambda t: 0.0,
    )


def forcing_from_manufactured(ms: ManufacturedSolution,
                              instance: ProblemInstance) -> Forcing:
    """Source terms that make ``ms`` an exact solution for ``instance``."""
    p = instance.params

    def interior(t, y):
        gap = ms.s(t) - p.a
        return (ms.u_t(t, y) - p.k / gap**2 * ms.u_yy(t, y)
                - y * ms.s_t(t) / gap * ms.u_y(t, y))

    def left(t):
        gap = ms.s(t) - p.a
        return (-p.k / gap * float(ms.u_y(t, 0.0))
                - instance.beta.eval(float(instance.h.eval(t)) - p.H * float(ms.u(t, 0.0))))

    def right(t):
        gap = ms.s(t) - p.a
        return -p.k / gap * float(ms.u_y(t, 1.0)) - float(ms.u(t, 1.0)) * ms.s_t(t)

    def front(t):
        return ms.s_t(t) - p.a0 * (float(ms.u(t, 1.0)) - instance.phi.eval(ms.s(t)))

    return Forcing(interior=interior, left=left, right=right, front=front)


def run_mms(instance: ProblemInstance, cfg: SchemeConfig,
            manufactured: ManufacturedSolution, levels: int = 4) -> ConvergenceTable:
    """Convergence against a manufactured exact pair.

    Each level runs with forcing built from ``manufactured`` and the
    manufactured initial data; errors are measured against the exact
    pair at t=T (discrete L2 for the profile, absolute for the front).
    """
    p = instance.params
    probe = np.linspace(0.0, p.T, 1001)
    s_vals = np.asarray([manufactured.s(t) for t in probe])
    if np.any(s_vals <= p.a):
        raise ConfigurationError("manufactured front must stay above the pore edge")

    cfgs = _refined_cfgs(base_cfg=cfg, instance=instance, levels=levels)
    err_u, err_s = [], []
    for cfg_lv in cfgs:
        y = _y_grid(cfg_lv.m)
        s0_m = float(manufactured.s(0.0))
        u0 = np.asarray(manufactured.u(0.0, y), dtype=float)
        init = InitialData(s0=s0_m, kind="table", values=tuple(u0),
                           delta=float(np.min(u0)) - instance.phi.eval(p.a))
        inst_lv = replace(instance, init=init)
        forcing = forcing_from_manufactured(manufactured, inst_lv)
        result = run(inst_lv, replace(cfg_lv, forcing=forcing))
        exact_u = np.asarray(manufactured.u(p.T, y), dtype=float)
        err_u.append(_l2_norm(result.final_profile - exact_u, 1.0 / cfg_lv.m))
        err_s.append(abs(result.final_front - float(manufactured.s(p.T))))

    exact = all(e <= EXACTNESS_FLOOR for e in err_u + err_s)
    return ConvergenceTable(mode="mms",
                            ms=tuple(c.m for c in cfgs), dts=tuple(c.dt for c in cfgs),
                            err_u=tuple(err_u), err_s=tuple(err_s),
                            orders_u=_orders(err_u), orders_s=_orders(err_s),
                            exact=exact)
