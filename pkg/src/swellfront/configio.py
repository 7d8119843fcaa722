"""Config file schema: TOML in, deterministic TOML out.

Sections:

    [params]    a, a0, H, k, T
    [beta]      r_threshold, plateau        (adsorption ramp)
    [phi]       r_threshold, plateau        (breaking ramp)
    [moisture]  kind = constant|linear|sine|table, plus kind fields
    [init]      s0, u0_kind = constant|linear|table, plus kind fields
    [scheme]    m, dt, coupling, stride, newton_tol, newton_max_iter,
                enforce_assumptions, oracle_m, oracle_dt   (all optional)

The raw config text is echoed verbatim into every run manifest; sweep
cells regenerate an equivalent text through ``dump_config`` with their
overrides applied.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import (
    AssumptionViolationError,
    ConfigError,
    InvalidParameterError,
    SwellfrontError,
)
from .frontfix import SchemeConfig
from .model import (
    InitialData,
    ModelParams,
    MoistureHistory,
    ProblemInstance,
    make_ramp,
)

_MOISTURE_FIELDS = {
    "constant": ("value",),
    "linear": ("offset", "slope"),
    "sine": ("offset", "amplitude", "omega", "phase"),
    "table": ("times", "values"),
}
_U0_FIELDS = {
    "constant": ("value",),
    "linear": ("left", "right"),
    "table": ("values",),
}


@dataclass(frozen=True)
class LoadedConfig:
    instance: ProblemInstance
    scheme: SchemeConfig
    enforce_assumptions: bool
    oracle_m: Optional[int]
    oracle_dt: Optional[float]
    raw_text: str
    data: dict


def _need(section: dict, name: str, key: str):
    if key not in section:
        raise ConfigError(f"config section [{name}] is missing key {key!r}")
    return section[key]


def parse_config_dict(data: dict, raw_text: str = "") -> LoadedConfig:
    try:
        params_sec = data["params"]
        beta_sec = data["beta"]
        phi_sec = data["phi"]
        moist_sec = data["moisture"]
        init_sec = data["init"]
    except KeyError as exc:
        raise ConfigError(f"config is missing section [{exc.args[0]}]") from exc

    try:
        params = ModelParams(a=float(_need(params_sec, "params", "a")),
                             a0=float(_need(params_sec, "params", "a0")),
                             H=float(_need(params_sec, "params", "H")),
                             k=float(_need(params_sec, "params", "k")),
                             T=float(_need(params_sec, "params", "T")))
        beta = make_ramp(float(_need(beta_sec, "beta", "r_threshold")),
                         float(_need(beta_sec, "beta", "plateau")))
        phi = make_ramp(float(_need(phi_sec, "phi", "r_threshold")),
                        float(_need(phi_sec, "phi", "plateau")))

        kind = _need(moist_sec, "moisture", "kind")
        if kind not in _MOISTURE_FIELDS:
            raise ConfigError(f"unknown moisture kind {kind!r}")
        if kind == "constant":
            h = MoistureHistory.constant(moist_sec["value"], params.T)
        elif kind == "linear":
            h = MoistureHistory.linear(moist_sec["offset"], moist_sec["slope"], params.T)
        elif kind == "sine":
            h = MoistureHistory.sine(moist_sec["offset"], moist_sec["amplitude"],
                                     moist_sec["omega"], moist_sec["phase"], params.T)
        else:
            h = MoistureHistory.table(moist_sec["times"], moist_sec["values"], params.T)

        s0 = float(_need(init_sec, "init", "s0"))
        u0_kind = _need(init_sec, "init", "u0_kind")
        if u0_kind not in _U0_FIELDS:
            raise ConfigError(f"unknown u0 kind {u0_kind!r}")
        try:
            if u0_kind == "constant":
                init = InitialData.constant(s0, init_sec["value"], phi, params.a)
            elif u0_kind == "linear":
                init = InitialData.linear(s0, init_sec["left"], init_sec["right"],
                                          phi, params.a)
            else:
                init = InitialData.table(s0, init_sec["values"], phi, params.a)
        except AssumptionViolationError:
            # margin not positive: keep the instance constructible so the
            # failure surfaces through validate_assumptions, not a crash
            if u0_kind == "constant":
                init = InitialData(s0=s0, kind="constant",
                                   value=float(init_sec["value"]), delta=0.0)
            elif u0_kind == "linear":
                init = InitialData(s0=s0, kind="linear",
                                   left=float(init_sec["left"]),
                                   right=float(init_sec["right"]), delta=0.0)
            else:
                init = InitialData(s0=s0, kind="table",
                                   values=tuple(float(v) for v in init_sec["values"]),
                                   delta=0.0)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, InvalidParameterError, SwellfrontError) as exc:
        raise ConfigError(f"config is structurally invalid: {exc}") from exc

    instance = ProblemInstance(params=params, beta=beta, phi=phi, h=h, init=init)

    scheme_sec = data.get("scheme", {})
    try:
        scheme = SchemeConfig(
            m=int(scheme_sec.get("m", 200)),
            dt=float(scheme_sec.get("dt", 1e-4)),
            coupling=scheme_sec.get("coupling", "explicit"),
            boundary_newton_tol=float(scheme_sec.get("newton_tol", 1e-12)),
            boundary_newton_max_iter=int(scheme_sec.get("newton_max_iter", 50)),
            snapshot_stride=int(scheme_sec.get("stride", 100)),
        )
    except SwellfrontError as exc:
        raise ConfigError(f"invalid [scheme] section: {exc}") from exc

    oracle_m = scheme_sec.get("oracle_m")
    oracle_dt = scheme_sec.get("oracle_dt")
    return LoadedConfig(
        instance=instance, scheme=scheme,
        enforce_assumptions=bool(scheme_sec.get("enforce_assumptions", True)),
        oracle_m=None if oracle_m is None else int(oracle_m),
        oracle_dt=None if oracle_dt is None else float(oracle_dt),
        raw_text=raw_text, data=data)


def load_config_text(text: str) -> LoadedConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    return parse_config_dict(data, raw_text=text)


def load_config(path) -> LoadedConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return load_config_text(path.read_text())


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")


def dump_config(data: dict) -> str:
    """Deterministic TOML text for the config schema (flat sections only).

    Section and key order follow the input dict ordering, so dumping a
    parsed-and-overridden config is reproducible byte for byte.
    """
    lines = []
    for section, body in data.items():
        if not isinstance(body, dict):
            raise ConfigError(f"top-level config entry {section!r} must be a section")
        lines.append(f"[{section}]")
        for key, value in body.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def apply_override(data: dict, path: str, value) -> dict:
    """Return a copy of the parsed config with one dotted path replaced."""
    parts = path.split(".")
    if len(parts) != 2:
        raise ConfigError(f"override path must be 'section.key', got {path!r}")
    section, key = parts
    if section not in data or not isinstance(data[section], dict):
        raise ConfigError(f"override path {path!r}: no section [{section}]")
    out = {name: dict(body) if isinstance(body, dict) else body
           for name, body in data.items()}
    out[section][key] = value
    return out
