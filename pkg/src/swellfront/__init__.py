"""Simulator and invariant auditor for a one-dimensional swelling front.

Two independent solvers for the same coupled diffusion/front system (an
implicit one on the front-fixed domain and an explicit moving-grid
oracle), plus a verifier that audits every run against the proven
solution bounds, the front floor/cap/speed bounds, the mass-balance
identity, equation residuals, and energy boundedness.
"""

from .errors import (
    AssumptionViolationError,
    BoundarySolveError,
    ConfigError,
    ConfigurationError,
    DegenerateDomainError,
    FrontCollapseError,
    InvalidParameterError,
    NoInverseError,
    SwellfrontError,
)
from .frontfix import (
    ConvergenceTable,
    Forcing,
    ManufacturedSolution,
    RunResult,
    SchemeConfig,
    Snapshot,
    SolverState,
    constant_mms,
    dt_cap,
    forcing_from_manufactured,
    initial_state,
    polynomial_mms,
    run,
    run_mms,
    self_convergence,
    step,
)
from .fronttrack import TrackedState, oracle_step, run_oracle
from .landau import FixedProfile, PhysicalProfile, to_fixed, to_physical
from .model import (
    InitialData,
    ModelParams,
    MoistureHistory,
    ProblemInstance,
    RampFunction,
    ValidationReport,
    compute_delta,
    compute_sstar,
    make_ramp,
    validate_assumptions,
)
from .verify import (
    CheckRecord,
    VerificationReport,
    VerificationThresholds,
    check_bounds,
    check_front_bounds,
    check_mass_balance,
    check_residuals,
    energy_diagnostic,
    verify_run,
)

__version__ = "0.1.0"
