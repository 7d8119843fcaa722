"""Model data for the one-dimensional swelling front problem.

Holds the scalar constants, the two ramp-to-plateau coefficient functions
(adsorption at the pore edge and breaking at the front), the boundary
moisture signal, and the initial data.  Also computes the two derived
quantities used by the invariant auditor: the initial margin ``delta``
(infimum of ``u0 - phi(a)``) and the front floor ``s*`` with
``phi(s*) = phi(a) + delta``.

All types are immutable after construction and safe to share across
parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolationError,
    InvalidParameterError,
    NoInverseError,
)

SSTAR_BISECTION_TOL = 1e-12


def ramp_value(r_threshold: float, plateau: float, x: float) -> float:
    """Scalar smoothstep ramp; shared by RampFunction and solver hot loops."""
    if x <= 0.0:
        return 0.0
    if x >= r_threshold:
        return plateau
    xi = x / r_threshold
    return plateau * xi * xi * (3.0 - 2.0 * xi)


def ramp_slope(r_threshold: float, plateau: float, x: float) -> float:
    if x <= 0.0 or x >= r_threshold:
        return 0.0
    xi = x / r_threshold
    return plateau / r_threshold * 6.0 * xi * (1.0 - xi)


@dataclass(frozen=True)
class ModelParams:
    """The five scalar constants of the model.

    a   -- position of the pore edge (length)
    a0  -- front-law rate constant (1/time per concentration)
    H   -- Henry-type constant (dimensionless)
    k   -- diffusion constant (length^2/time)
    T   -- time horizon
    """

    a: float
    a0: float
    H: float
    k: float
    T: float

    def __post_init__(self):
        for name in ("a", "a0", "H", "k", "T"):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise InvalidParameterError(
                    f"parameter {name} must be a positive finite number, got {value!r}"
                )


@dataclass(frozen=True)
class RampFunction:
    """C1 monotone ramp from 0 to a plateau.

    Zero on the nonpositive axis, equal to ``plateau`` at and beyond
    ``r_threshold``, and strictly increasing in between.  The canonical
    profile is the cubic smoothstep ``plateau * (3 x^2 - 2 x^3)`` with
    ``x = input / r_threshold``; its derivative vanishes at both joins,
    so the function is C1 everywhere, and the derivative supremum has
    the closed form ``1.5 * plateau / r_threshold``.
    """

    r_threshold: float
    plateau: float
    profile: str = "smoothstep"

    def __post_init__(self):
        if not (self.r_threshold > 0.0) or not (self.plateau > 0.0):
            raise InvalidParameterError(
                "ramp requires positive r_threshold and plateau, got "
                f"r_threshold={self.r_threshold!r}, plateau={self.plateau!r}"
            )
        if self.profile != "smoothstep":
            raise InvalidParameterError(f"unknown ramp profile {self.profile!r}")

    def eval(self, x):
        """Evaluate the ramp at a scalar or array argument."""
        if isinstance(x, np.ndarray):
            xi = np.clip(x / self.r_threshold, 0.0, 1.0)
            return self.plateau * xi * xi * (3.0 - 2.0 * xi)
        return ramp_value(self.r_threshold, self.plateau, x)

    __call__ = eval

    def derivative(self, x):
        """Derivative of the ramp; zero outside (0, r_threshold)."""
        if isinstance(x, np.ndarray):
            xi = x / self.r_threshold
            inside = (xi > 0.0) & (xi < 1.0)
            xi = np.clip(xi, 0.0, 1.0)
            return np.where(inside, self.plateau / self.r_threshold * 6.0 * xi * (1.0 - xi), 0.0)
        return ramp_slope(self.r_threshold, self.plateau, x)

    def derivative_sup(self) -> float:
        """Supremum of the derivative (attained at the ramp midpoint)."""
        return 1.5 * self.plateau / self.r_threshold


def make_ramp(r_threshold: float, plateau: float) -> RampFunction:
    """Build the canonical smoothstep ramp; both arguments must be > 0."""
    return RampFunction(r_threshold=float(r_threshold), plateau=float(plateau))


@dataclass(frozen=True)
class MoistureHistory:
    """Boundary moisture signal h(t) on [0, T].

    Restricted to representations whose supremum over [0, T] is exact
    and whose time derivative is defined almost everywhere and square
    integrable by construction:

    constant  h(t) = value
    linear    h(t) = offset + slope * t
    sine      h(t) = offset + amplitude * sin(omega * t + phase)
    table     piecewise linear through (times, values), covering [0, T]
    """

    kind: str
    horizon: float
    value: float = 0.0
    offset: float = 0.0
    slope: float = 0.0
    amplitude: float = 0.0
    omega: float = 0.0
    phase: float = 0.0
    times: tuple = ()
    values: tuple = ()
    sup_norm: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "sine", "table"):
            raise InvalidParameterError(f"unknown moisture kind {self.kind!r}")
        if not (self.horizon > 0.0):
            raise InvalidParameterError("moisture horizon must be positive")
        if self.kind == "table":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 2:
                raise InvalidParameterError("moisture table needs matching 1-d times/values")
            if not np.all(np.diff(t) > 0.0):
                raise InvalidParameterError("moisture table times must be strictly increasing")
            if t[0] > 0.0 or t[-1] < self.horizon:
                raise InvalidParameterError("moisture table must cover [0, T]")
        object.__setattr__(self, "sup_norm", self._extremum(np.max))

    @classmethod
    def constant(cls, value: float, horizon: float) -> "MoistureHistory":
        return cls(kind="constant", horizon=horizon, value=float(value))

    @classmethod
    def linear(cls, offset: float, slope: float, horizon: float) -> "MoistureHistory":
        return cls(kind="linear", horizon=horizon, offset=float(offset), slope=float(slope))

    @classmethod
    def sine(cls, offset: float, amplitude: float, omega: float, phase: float,
             horizon: float) -> "MoistureHistory":
        return cls(kind="sine", horizon=horizon, offset=float(offset),
                   amplitude=float(amplitude), omega=float(omega), phase=float(phase))

    @classmethod
    def table(cls, times, values, horizon: float) -> "MoistureHistory":
        return cls(kind="table", horizon=horizon,
                   times=tuple(float(t) for t in times),
                   values=tuple(float(v) for v in values))

    def eval(self, t):
        if self.kind == "constant":
            if isinstance(t, np.ndarray):
                return np.full_like(np.asarray(t, dtype=float), self.value)
            return self.value
        if self.kind == "linear":
            return self.offset + self.slope * t
        if self.kind == "sine":
            return self.offset + self.amplitude * np.sin(self.omega * t + self.phase)
        return np.interp(t, self.times, self.values)

    __call__ = eval

    def eval_derivative(self, t):
        if self.kind == "constant":
            return 0.0 * t if isinstance(t, np.ndarray) else 0.0
        if self.kind == "linear":
            return self.slope + 0.0 * t if isinstance(t, np.ndarray) else self.slope
        if self.kind == "sine":
            return self.amplitude * self.omega * np.cos(self.omega * t + self.phase)
        tt = np.asarray(self.times)
        vv = np.asarray(self.values)
        slopes = np.diff(vv) / np.diff(tt)
        idx = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    def _critical_times(self) -> np.ndarray:
        """Candidate extremum locations of h on [0, T]."""
        ends = [0.0, self.horizon]
        if self.kind == "sine" and self.amplitude != 0.0 and self.omega != 0.0:
            # interior critical points: omega * t + phase = pi/2 + k*pi
            k_lo = math.floor((self.omega * 0.0 + self.phase - math.pi / 2) / math.pi)
            k_hi = math.ceil((self.omega * self.horizon + self.phase - math.pi / 2) / math.pi)
            for k in range(k_lo, k_hi + 1):
                t = (math.pi / 2 + k * math.pi - self.phase) / self.omega
                if 0.0 < t < self.horizon:
                    ends.append(t)
        if self.kind == "table":
            ends.extend(t for t in self.times if 0.0 <= t <= self.horizon)
        return np.asarray(sorted(set(ends)))

    def _extremum(self, reducer) -> float:
        return float(reducer(np.asarray([self.eval(t) for t in self._critical_times()])))

    def infimum(self) -> float:
        """Exact infimum of h over [0, T] (min over nodes for tables)."""
        return self._extremum(np.min)


@dataclass(frozen=True)
class InitialData:
    """Initial front position s0 and water-content profile u0 on [a, s0].

    u0 representations: constant value, affine between the endpoint
    values, or samples on a uniform grid over [a, s0] interpolated
    linearly.  ``delta`` caches the initial margin inf(u0) - phi(a);
    linear interpolation attains its minimum at nodes, so the cached
    value is exact for every representation.
    """

    s0: float
    kind: str
    value: float = 0.0
    left: float = 0.0
    right: float = 0.0
    values: tuple = ()
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "table"):
            raise InvalidParameterError(f"unknown u0 kind {self.kind!r}")
        if self.kind == "table" and len(self.values) < 2:
            raise InvalidParameterError("u0 table needs at least two samples")

    @classmethod
    def constant(cls, s0: float, value: float, phi: RampFunction, a: float) -> "InitialData":
        init = cls(s0=float(s0), kind="constant", value=float(value))
        return cls(s0=float(s0), kind="constant", value=float(value),
                   delta=compute_delta(init, phi, a))

    @classmethod
    def linear(cls, s0: float, left: float, right: float,
               phi: RampFunction, a: float) -> "InitialData":
        init = cls(s0=float(s0), kind="linear", left=float(left), right=float(right))
        return cls(s0=float(s0), kind="linear", left=float(left), right=float(right),
                   delta=compute_delta(init, phi, a))

    @classmethod
    def table(cls, s0: float, values, phi: RampFunction, a: float) -> "InitialData":
        vals = tuple(float(v) for v in values)
        init = cls(s0=float(s0), kind="table", values=vals)
        return cls(s0=float(s0), kind="table", values=vals,
                   delta=compute_delta(init, phi, a))

    def u0_min(self) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "linear":
            return min(self.left, self.right)
        return float(min(self.values))

    def u0_max(self) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "linear":
            return max(self.left, self.right)
        return float(max(self.values))

    def u0_eval(self, z, a: float):
        """Evaluate u0 at physical positions z in [a, s0]."""
        if self.kind == "constant":
            if isinstance(z, np.ndarray):
                return np.full_like(np.asarray(z, dtype=float), self.value)
            return self.value
        if self.kind == "linear":
            frac = (np.asarray(z, dtype=float) - a) / (self.s0 - a)
            return self.left + (self.right - self.left) * frac
        grid = np.linspace(a, self.s0, len(self.values))
        return np.interp(z, grid, np.asarray(self.values))


@dataclass(frozen=True)
class ProblemInstance:
    """One complete problem: constants, coefficient ramps, moisture, initial data."""

    params: ModelParams
    beta: RampFunction
    phi: RampFunction
    h: MoistureHistory
    init: InitialData

    def u_lower_bound(self) -> float:
        """Proven pointwise floor of the solution: phi(a)."""
        return self.phi.eval(self.params.a)

    def u_upper_bound(self) -> float:
        """Proven pointwise ceiling of the solution: sup(h)/H."""
        return self.h.sup_norm / self.params.H

    def speed_cap(self) -> float:
        """Front-speed bound a0 * sup(h)/H."""
        return self.params.a0 * self.u_upper_bound()

    def front_cap(self) -> float:
        """Front-growth bound a0 * sup(h)/H * T + s0."""
        return self.speed_cap() * self.params.T + self.init.s0

    def sstar(self) -> float:
        """Front floor: position where phi equals phi(a) + delta."""
        return compute_sstar(self.phi, self.params.a, self.init.delta)


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    message: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name}: {c.message}")
        return "\n".join(lines)


def _check(name: str, fn) -> ValidationCheck:
    # validation must be total: an exception inside a check is a failed check
    try:
        passed, message = fn()
    except Exception as exc:  # noqa: BLE001
        return ValidationCheck(name, False, f"check raised {type(exc).__name__}: {exc}")
    return ValidationCheck(name, bool(passed), message)


def validate_assumptions(instance: ProblemInstance) -> ValidationReport:
    """Check every structural assumption; never raises, returns a full report.

    A solver run may only start on an all-pass report (the CLI enforces
    this; library callers are trusted to honor it or to deliberately run
    out-of-assumption test vectors).
    """
    p = instance.params
    phi = instance.phi
    beta = instance.beta
    h = instance.h
    init = instance.init

    def params_positive():
        bad = [n for n in ("a", "a0", "H", "k", "T")
               if not (getattr(p, n) > 0.0 and math.isfinite(getattr(p, n)))]
        if bad:
            return False, f"non-positive parameters: {', '.join(bad)}"
        return True, "a, a0, H, k, T all positive"

    def moisture_signal():
        lo = h.infimum()
        if lo < 0.0:
            return False, f"moisture signal dips to {lo!r} < 0 on [0, T]"
        return True, (f"h >= 0 on [0, T] (inf {lo!r}); derivative square-integrable "
                      f"by construction (kind={h.kind})")

    def adsorption_ramp():
        ok = beta.r_threshold > 0.0 and beta.plateau > 0.0
        return ok, (f"adsorption ramp r={beta.r_threshold!r}, plateau={beta.plateau!r}, "
                    f"C1 with bounded derivative (sup {beta.derivative_sup()!r})")

    def breaking_ramp():
        ok = phi.r_threshold > 0.0 and phi.plateau > 0.0
        return ok, (f"breaking ramp r={phi.r_threshold!r}, plateau={phi.plateau!r}, "
                    f"derivative sup {phi.derivative_sup()!r}")

    def plateau_compatibility():
        c0 = phi.plateau
        cap = min(2.0 * phi.eval(p.a), h.sup_norm / p.H)
        if c0 > cap:
            return False, (f"breaking plateau c0={c0!r} exceeds "
                           f"min(2*phi(a), sup(h)/H)={cap!r}")
        return True, f"c0={c0!r} <= min(2*phi(a), sup(h)/H)={cap!r}"

    def initial_front():
        if not (p.a < init.s0):
            return False, f"s0={init.s0!r} does not exceed pore edge a={p.a!r}"
        if not (init.s0 < phi.r_threshold):
            return False, f"s0={init.s0!r} not below breaking threshold {phi.r_threshold!r}"
        return True, f"a < s0 < r_phi ({p.a!r} < {init.s0!r} < {phi.r_threshold!r})"

    def initial_profile():
        lo, hi = phi.eval(p.a), phi.eval(init.s0)
        u_min, u_max = init.u0_min(), init.u0_max()
        if not (u_min > lo):
            return False, f"min u0={u_min!r} not strictly above phi(a)={lo!r}"
        if not (u_max <= hi):
            return False, f"max u0={u_max!r} exceeds phi(s0)={hi!r}"
        return True, f"phi(a)={lo!r} < u0 <= phi(s0)={hi!r}"

    def initial_margin():
        lo, hi = phi.eval(p.a), phi.eval(init.s0)
        if not (init.delta > 0.0):
            return False, f"initial margin delta={init.delta!r} not positive"
        if init.delta > hi - lo + 1e-15:
            return False, f"delta={init.delta!r} exceeds phi(s0)-phi(a)={hi - lo!r}"
        return True, f"delta={init.delta!r} in (0, phi(s0)-phi(a)]"

    checks = (
        _check("params_positive", params_positive),
        _check("moisture_signal", moisture_signal),
        _check("adsorption_ramp", adsorption_ramp),
        _check("breaking_ramp", breaking_ramp),
        _check("plateau_compatibility", plateau_compatibility),
        _check("initial_front", initial_front),
        _check("initial_profile", initial_profile),
        _check("initial_margin", initial_margin),
    )
    return ValidationReport(checks=checks)


def compute_delta(init: InitialData, phi: RampFunction, a: float) -> float:
    """Initial margin: min over the u0 representation of u0 - phi(a).

    Exact for the supported representations (constant and affine attain
    their minimum at an endpoint, table interpolants at a node).
    """
    delta = init.u0_min() - phi.eval(a)
    if delta <= 0.0:
        raise AssumptionViolationError(
            f"initial margin must be positive, got {delta!r} "
            f"(min u0 {init.u0_min()!r}, phi(a) {phi.eval(a)!r})"
        )
    return delta


def compute_sstar(phi: RampFunction, a: float, delta: float) -> float:
    """Invert phi at phi(a) + delta by bisection on [a, r_threshold].

    Bisection rather than Newton: the ramp derivative vanishes at both
    joins, where Newton can stall.  Absolute tolerance 1e-12.
    """
    target = phi.eval(a) + delta
    if target > phi.plateau:
        raise NoInverseError(
            f"target {target!r} above plateau {phi.plateau!r}; no inverse exists"
        )
    lo, hi = a, phi.r_threshold
    if phi.eval(lo) >= target:
        return lo
    while hi - lo > SSTAR_BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if phi.eval(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
