"""Scenario configuration: system parameters, node geometry, seeding.

Everything downstream (channel draws, beam selection, swarm search, Monte
Carlo sweeps) is a pure function of one ``SystemConfig`` + ``DeploymentGeometry``
pair and a 64-bit seed. Config values are immutable after validation and safe
to share across workers.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

__all__ = [
    "ConfigError",
    "PsoParams",
    "SystemConfig",
    "DeploymentGeometry",
    "default_config",
    "noise_power",
    "dbm_to_watts",
    "validate",
    "serialize_config",
    "parse_config",
    "config_digest",
    "rng_stream",
    "STREAM_CHANNEL",
    "STREAM_PSO",
    "STREAM_AUX",
]


class ConfigError(ValueError):
    """Raised for invalid configuration values or malformed config files."""


@dataclass(frozen=True)
class PsoParams:
    """Swarm-search coefficients.

    ``social_weight`` scales attraction toward the global best and
    ``cognitive_weight`` toward the particle's personal best. The inertia
    factor decays linearly from ``inertia_start`` at the first iteration to
    ``inertia_end`` at the last. Velocities are clamped per dimension to
    ``velocity_clamp`` in unit-hypercube coordinates.
    """

    swarm_size: int = 10
    iterations: int = 30
    social_weight: float = 2.0
    cognitive_weight: float = 2.0
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    velocity_clamp: float = 0.5


@dataclass(frozen=True)
class SystemConfig:
    """All link-level simulation parameters.

    Antenna counts are (along-x, along-y) URA sizes. ``path_loss_mode``
    selects the distance attenuation convention: ``"alpha"`` (default)
    applies the reference coefficient 32.4 + 20*log10(f_GHz) as a raw
    linear factor on tau^eta, which produces indoor-scale SNRs at the
    default geometry; ``"db"`` interprets the full close-in expression in
    decibels.
    """

    tx_antennas: tuple[int, int] = (8, 8)
    rx_antennas: tuple[int, int] = (8, 8)
    ris_elements: tuple[int, int] = (6, 6)
    carrier_frequency_ghz: float = 28.0
    bandwidth_hz: float = 10e6
    noise_psd_dbm_per_hz: float = -174.0
    tx_power_dbm: float = 30.0
    path_loss_exponent: float = 3.6
    num_paths: int = 10
    angular_spread_deg: tuple[float, float] = (10.0, 10.0)
    element_spacing_wavelengths: float = 0.5
    num_streams: int = 2
    max_rf_chains: int = 16
    path_loss_mode: str = "alpha"
    monte_carlo_trials: int = 50
    rng_seed: int = 12345
    pso: PsoParams = field(default_factory=PsoParams)

    @property
    def num_tx(self) -> int:
        return self.tx_antennas[0] * self.tx_antennas[1]

    @property
    def num_rx(self) -> int:
        return self.rx_antennas[0] * self.rx_antennas[1]

    @property
    def num_ris(self) -> int:
        return self.ris_elements[0] * self.ris_elements[1]

    @property
    def noise_power_watts(self) -> float:
        return noise_power(self.noise_psd_dbm_per_hz, self.bandwidth_hz)

    @property
    def tx_power_watts(self) -> float:
        return dbm_to_watts(self.tx_power_dbm)


@dataclass(frozen=True)
class DeploymentGeometry:
    """Node positions and the 2-D ceiling platform the RIS moves on."""

    tx_position: tuple[float, float, float] = (0.0, 0.0, 2.0)
    ue_position: tuple[float, float, float] = (100.0, 100.0, 2.0)
    platform_x_range: tuple[float, float] = (40.0, 70.0)
    platform_y_range: tuple[float, float] = (40.0, 70.0)
    ris_height_m: float = 5.0

    def platform_center(self) -> tuple[float, float]:
        return (
            0.5 * (self.platform_x_range[0] + self.platform_x_range[1]),
            0.5 * (self.platform_y_range[0] + self.platform_y_range[1]),
        )

    def reference_ris_position(self) -> tuple[float, float, float]:
        cx, cy = self.platform_center()
        return (cx, cy, self.ris_height_m)

    def contains(self, x: float, y: float) -> bool:
        return (
            self.platform_x_range[0] <= x <= self.platform_x_range[1]
            and self.platform_y_range[0] <= y <= self.platform_y_range[1]
        )


def default_config() -> tuple[SystemConfig, DeploymentGeometry]:
    """Baseline indoor scenario: 8x8 arrays at 28 GHz, 100 m room diagonal."""
    return SystemConfig(), DeploymentGeometry()


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_power(noise_psd_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power in watts over the given bandwidth.

    Raises ConfigError for non-positive bandwidth.
    """
    if bandwidth_hz <= 0:
        raise ConfigError(f"bandwidth must be positive, got {bandwidth_hz}")
    return 10.0 ** ((noise_psd_dbm_per_hz + 10.0 * math.log10(bandwidth_hz) - 30.0) / 10.0)


def validate(config: SystemConfig, geometry: DeploymentGeometry) -> list[str]:
    """Return one named error per violated invariant; empty list means ok.

    Never raises: callers decide whether a violation is fatal.
    """
    errors: list[str] = []

    for name, shape in (
        ("tx_antennas", config.tx_antennas),
        ("rx_antennas", config.rx_antennas),
        ("ris_elements", config.ris_elements),
    ):
        if shape[0] < 1 or shape[1] < 1:
            errors.append(f"{name}: counts must be >= 1, got {shape}")

    if config.num_streams < 1:
        errors.append("num_streams must be >= 1")
    if config.max_rf_chains < config.num_streams:
        errors.append(
            f"streams exceed RF chains ({config.num_streams} > {config.max_rf_chains})"
        )
    if config.num_streams > min(config.num_tx, config.num_rx):
        errors.append("streams exceed antennas per side")
    if config.bandwidth_hz <= 0:
        errors.append("bandwidth must be positive")
    if config.path_loss_exponent <= 0:
        errors.append("path loss exponent must be positive")
    if config.num_paths < 1:
        errors.append("num_paths must be >= 1")
    for spread in config.angular_spread_deg:
        if not (0.0 <= spread < 90.0):
            errors.append(f"angular spread must lie in [0, 90) degrees, got {spread}")
            break
    if config.element_spacing_wavelengths <= 0:
        errors.append("element spacing must be positive")
    if config.carrier_frequency_ghz <= 0:
        errors.append("carrier frequency must be positive")
    if config.path_loss_mode not in ("alpha", "db"):
        errors.append(f"unknown path_loss_mode {config.path_loss_mode!r}")
    if config.monte_carlo_trials < 1:
        errors.append("monte_carlo_trials must be >= 1")
    if config.rng_seed < 0:
        errors.append("rng_seed must be a non-negative 64-bit integer")

    pso = config.pso
    if pso.swarm_size < 1:
        errors.append("pso swarm_size must be >= 1")
    if pso.iterations < 0:
        errors.append("pso iterations must be >= 0")
    if pso.social_weight <= 0 or pso.cognitive_weight <= 0:
        errors.append("pso weights must be positive")
    if not (0.0 < pso.velocity_clamp <= 1.0):
        errors.append("pso velocity_clamp must lie in (0, 1]")

    if geometry.platform_x_range[0] >= geometry.platform_x_range[1]:
        errors.append(f"empty range: platform_x_range {geometry.platform_x_range}")
    if geometry.platform_y_range[0] >= geometry.platform_y_range[1]:
        errors.append(f"empty range: platform_y_range {geometry.platform_y_range}")
    if geometry.ris_height_m <= 0:
        errors.append("ris_height_m must be positive")
    if tuple(geometry.tx_position) == tuple(geometry.ue_position):
        errors.append("tx and ue positions coincide")

    return errors


# --- flat key/value config file -------------------------------------------

_CONFIG_SCALARS = {
    "carrier_frequency_ghz": float,
    "bandwidth_hz": float,
    "noise_psd_dbm_per_hz": float,
    "tx_power_dbm": float,
    "path_loss_exponent": float,
    "num_paths": int,
    "element_spacing_wavelengths": float,
    "num_streams": int,
    "max_rf_chains": int,
    "path_loss_mode": str,
    "monte_carlo_trials": int,
    "rng_seed": int,
}

_CONFIG_PAIRS = {
    "tx_antennas": int,
    "rx_antennas": int,
    "ris_elements": int,
    "angular_spread_deg": float,
}

_PSO_FIELDS = {
    "pso_swarm_size": ("swarm_size", int),
    "pso_iterations": ("iterations", int),
    "pso_social_weight": ("social_weight", float),
    "pso_cognitive_weight": ("cognitive_weight", float),
    "pso_inertia_start": ("inertia_start", float),
    "pso_inertia_end": ("inertia_end", float),
    "pso_velocity_clamp": ("velocity_clamp", float),
}

_GEOMETRY_TRIPLES = ("tx_position", "ue_position")
_GEOMETRY_PAIRS = ("platform_x_range", "platform_y_range")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: SystemConfig, geometry: DeploymentGeometry) -> str:
    """Flat ``key = value`` text; floats use repr so parsing round-trips bit-identically."""
    lines = []
    for name in _CONFIG_PAIRS:
        pair = getattr(config, name)
        lines.append(f"{name} = {_fmt(pair[0])} {_fmt(pair[1])}")
    for name in _CONFIG_SCALARS:
        lines.append(f"{name} = {_fmt(getattr(config, name))}")
    for key, (attr, _) in _PSO_FIELDS.items():
        lines.append(f"{key} = {_fmt(getattr(config.pso, attr))}")
    for name in _GEOMETRY_TRIPLES:
        p = getattr(geometry, name)
        lines.append(f"{name} = {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    for name in _GEOMETRY_PAIRS:
        p = getattr(geometry, name)
        lines.append(f"{name} = {_fmt(p[0])} {_fmt(p[1])}")
    lines.append(f"ris_height_m = {_fmt(geometry.ris_height_m)}")
    return "\n".join(lines) + "\n"


def parse_config(
    text: str,
    base: tuple[SystemConfig, DeploymentGeometry] | None = None,
) -> tuple[SystemConfig, DeploymentGeometry]:
    """Parse flat key/value text, overriding ``base`` (defaults if omitted).

    Lines are ``name = value`` with ``#`` comments; unknown keys raise.
    """
    config, geometry = base if base is not None else default_config()
    cfg_updates: dict = {}
    pso_updates: dict = {}
    geo_updates: dict = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'name = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        tokens = value.split()
        try:
            if key in _CONFIG_SCALARS:
                (tok,) = tokens
                cfg_updates[key] = _CONFIG_SCALARS[key](tok)
            elif key in _CONFIG_PAIRS:
                a, b = tokens
                cast = _CONFIG_PAIRS[key]
                cfg_updates[key] = (cast(a), cast(b))
            elif key in _PSO_FIELDS:
                attr, cast = _PSO_FIELDS[key]
                (tok,) = tokens
                pso_updates[attr] = cast(tok)
            elif key in _GEOMETRY_TRIPLES:
                a, b, c = tokens
                geo_updates[key] = (float(a), float(b), float(c))
            elif key in _GEOMETRY_PAIRS:
                a, b = tokens
                geo_updates[key] = (float(a), float(b))
            elif key == "ris_height_m":
                (tok,) = tokens
                geo_updates[key] = float(tok)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value.strip()!r}") from exc

    if pso_updates:
        cfg_updates["pso"] = replace(config.pso, **pso_updates)
    if cfg_updates:
        config = replace(config, **cfg_updates)
    if geo_updates:
        geometry = replace(geometry, **geo_updates)
    return config, geometry


def config_digest(config: SystemConfig, geometry: DeploymentGeometry) -> str:
    """Stable 16-hex-char digest; changes iff any config/geometry field changes."""
    text = serialize_config(config, geometry)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# --- deterministic substreams ----------------------------------------------

STREAM_CHANNEL = 0
STREAM_PSO = 1
STREAM_AUX = 2


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based substream keyed by (seed, *path).

    The same key always yields the same stream, and distinct keys yield
    statistically independent streams, so trials and roles (channel draw,
    swarm search, auxiliary noise) can be split without coordination.
    """
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, *path))))


def scenario_fields(config: SystemConfig, geometry: DeploymentGeometry) -> dict:
    """Plain-dict view of every field, for metadata sidecars."""
    out: dict = {}
    for f in fields(config):
        v = getattr(config, f.name)
        if isinstance(v, PsoParams):
            out["pso"] = {pf.name: getattr(v, pf.name) for pf in fields(v)}
        else:
            out[f.name] = list(v) if isinstance(v, tuple) else v
    for f in fields(geometry):
        v = getattr(geometry, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out
