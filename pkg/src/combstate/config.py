"""Run configuration: flat ``key = value`` files with dotted sections.

Example::

    mu_ceo = 0.3
    mu_rep = 1.0
    sigma_ceo = 0.05
    sigma_rep = 0.03
    nu_c = 5.0
    bandwidth_B = 2.0
    grid.start = 0.0
    grid.step = 0.01
    grid.count = 1001
    trunc.rel_tol = 1e-8
    oracle.n_samples = 100000
    oracle.seed = 20240501

The syntax is TOML, so dotted keys map onto nested tables.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .spectral import (
    CombParams,
    EnvelopeModel,
    FrequencyGrid,
    SpectralError,
    TruncationPolicy,
    check_resolution,
)


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_FORMATS = {"csv", "json", "svg"}

# key -> (type, required)
_SCHEMA: dict[str, tuple[type, bool]] = {
    "mu_ceo": (float, True),
    "mu_rep": (float, True),
    "sigma_ceo": (float, True),
    "sigma_rep": (float, True),
    "nu_c": (float, True),
    "bandwidth_B": (float, True),
    "amplitude_scale": (float, False),
    "grid.start": (float, True),
    "grid.step": (float, True),
    "grid.count": (int, True),
    "trunc.rel_tol": (float, False),
    "oracle.n_samples": (int, False),
    "oracle.seed": (int, False),
    "oracle.reference": (str, False),
    "state.alpha_sq": (float, False),
    "coherence.tau_count": (int, False),
    "output.directory": (str, False),
    "output.formats": (list, False),
}


@dataclass(frozen=True)
class OracleSettings:
    n_samples: int = 100_000
    seed: int = 0
    reference: str | None = None


@dataclass(frozen=True)
class RunConfig:
    comb: CombParams
    envelope: EnvelopeModel
    grid: FrequencyGrid
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    alpha_sq: float | None = None
    tau_count: int | None = None
    output_directory: str = "."
    formats: tuple[str, ...] | None = None

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **kw)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(key: str, value, typ: type):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if typ is list:
        items = [value] if isinstance(value, str) else value
        if not isinstance(items, list) or not all(isinstance(x, str) for x in items):
            raise ConfigError(key, f"expected a list of format names, got {value!r}")
        bad = set(items) - _FORMATS
        if bad:
            raise ConfigError(key, f"unknown formats {sorted(bad)}")
        return tuple(items)
    raise AssertionError(typ)


def _build(path: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except SpectralError as exc:
        raise ConfigError(path, str(exc)) from None


def config_from_mapping(raw: dict) -> RunConfig:
    """Validate a (possibly nested) mapping and build a :class:`RunConfig`.

    Every module-level invariant is checked here, including the grid
    resolution rule, so that no command starts computing on bad input.
    """
    flat = _flatten(raw)
    unknown = sorted(set(flat) - set(_SCHEMA))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    vals = {}
    for key, (typ, required) in _SCHEMA.items():
        if key in flat:
            vals[key] = _coerce(key, flat[key], typ)
        elif required:
            raise ConfigError(key, "missing required key")

    for key in ("sigma_ceo", "sigma_rep"):
        if not vals[key] >= 0:
            raise ConfigError(key, f"must be >= 0, got {vals[key]}")
    if not vals["mu_rep"] > 0:
        raise ConfigError("mu_rep", f"must be > 0, got {vals['mu_rep']}")
    comb = _build(
        "comb",
        CombParams,
        mu_ceo=vals["mu_ceo"],
        mu_rep=vals["mu_rep"],
        sigma_ceo=vals["sigma_ceo"],
        sigma_rep=vals["sigma_rep"],
        nu_c=vals["nu_c"],
    )
    env = _build(
        "bandwidth_B",
        EnvelopeModel,
        nu_c=vals["nu_c"],
        bandwidth_B=vals["bandwidth_B"],
        amplitude_scale=vals.get("amplitude_scale", 1.0),
    )
    if vals["grid.count"] < 1:
        raise ConfigError("grid.count", f"grid must have at least one point, got {vals['grid.count']}")
    grid = _build("grid.step", FrequencyGrid, nu_start=vals["grid.start"], delta_nu=vals["grid.step"], count=vals["grid.count"])
    trunc = _build("trunc.rel_tol", TruncationPolicy, rel_tol=vals.get("trunc.rel_tol", 1e-8))
    if comb.sigma_ceo > 0 or comb.sigma_rep > 0:
        try:
            check_resolution(comb, grid, trunc.resolve(comb, env))
        except SpectralError as exc:
            raise ConfigError("grid.step", str(exc)) from None

    oracle = OracleSettings(
        n_samples=vals.get("oracle.n_samples", OracleSettings.n_samples),
        seed=vals.get("oracle.seed", OracleSettings.seed),
        reference=vals.get("oracle.reference"),
    )
    if oracle.n_samples < 1:
        raise ConfigError("oracle.n_samples", "must be >= 1")
    if oracle.seed < 0:
        raise ConfigError("oracle.seed", "must be >= 0")
    alpha_sq = vals.get("state.alpha_sq")
    if alpha_sq is not None and alpha_sq < 0:
        raise ConfigError("state.alpha_sq", "must be >= 0")
    tau_count = vals.get("coherence.tau_count")
    if tau_count is not None and tau_count < 2:
        raise ConfigError("coherence.tau_count", "must be >= 2")

    return RunConfig(
        comb=comb,
        envelope=env,
        grid=grid,
        trunc=trunc,
        oracle=oracle,
        alpha_sq=alpha_sq,
        tau_count=tau_count,
        output_directory=vals.get("output.directory", "."),
        formats=vals.get("output.formats"),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"parse error: {exc}") from None
    cfg = config_from_mapping(raw)
    ref = cfg.oracle.reference
    if ref is not None and not Path(ref).is_absolute():
        cfg = replace(cfg, oracle=replace(cfg.oracle, reference=str(path.parent / ref)))
    return cfg


FIG1_DEFAULTS = {
    "mu_ceo": 0.3,
    "mu_rep": 1.0,
    "sigma_ceo": 0.05,
    "sigma_rep": 0.03,
    "nu_c": 5.0,
    "bandwidth_B": 2.0,
    "grid": {"start": 0.0, "step": 0.001, "count": 10001},
    "trunc": {"rel_tol": 1e-8},
}


def fig1_config() -> RunConfig:
    return config_from_mapping(FIG1_DEFAULTS)
