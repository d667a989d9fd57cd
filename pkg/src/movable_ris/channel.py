"""Geometric mmWave channel generation for the two RIS hops.

Each link is a sum of L plane-wave paths: per-path complex gains, angles
drawn uniformly around geometry-derived means, and a distance attenuation.
The composite end-to-end matrix chains the two hops through the RIS phase
diagonal. All draws come from caller-supplied generators so realizations
are exactly reproducible and the per-trial randomness (gains + angle
offsets) can be frozen while the RIS moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .scenario import DeploymentGeometry, SystemConfig

__all__ = [
    "UP",
    "DOWN",
    "DegenerateGeometryError",
    "LinkAngles",
    "AngleOffsets",
    "PathSet",
    "TrialChannels",
    "ChannelRealization",
    "steering_vector",
    "steering_matrix",
    "path_loss_linear",
    "path_amplitude",
    "mean_angles_from_geometry",
    "draw_angle_offsets",
    "draw_gains",
    "draw_paths",
    "draw_trial",
    "make_path_set",
    "link_channel",
    "composite_channel",
    "translation_phases",
    "wavelength_m",
    "realize_channels",
]

UP = (0.0, 0.0, 1.0)
DOWN = (0.0, 0.0, -1.0)


class DegenerateGeometryError(ValueError):
    """Raised when two nodes coincide and link angles are undefined."""


class LinkAngles(NamedTuple):
    """Mean departure/arrival angles (radians) and length of one link."""

    dep_elevation: float
    dep_azimuth: float
    arr_elevation: float
    arr_azimuth: float
    distance_m: float


class AngleOffsets(NamedTuple):
    """Per-path deviations from the mean angles, one array per angle kind."""

    dep_elevation: np.ndarray
    dep_azimuth: np.ndarray
    arr_elevation: np.ndarray
    arr_azimuth: np.ndarray


@dataclass
class PathSet:
    """L resolved paths of one link: gains plus absolute angles."""

    gains: np.ndarray
    dep_elevation: np.ndarray
    dep_azimuth: np.ndarray
    arr_elevation: np.ndarray
    arr_azimuth: np.ndarray
    distance_m: float
    link: str  # "tx_ris" or "ris_rx"

    @property
    def num_paths(self) -> int:
        return len(self.gains)


@dataclass
class TrialChannels:
    """Frozen per-trial randomness, reusable at any RIS position."""

    gains_tx_ris: np.ndarray
    offsets_tx_ris: AngleOffsets
    gains_ris_rx: np.ndarray
    offsets_ris_rx: AngleOffsets


@dataclass
class ChannelRealization:
    """Both hop matrices at one RIS position plus their source paths."""

    h_tx_ris: np.ndarray  # (M_I, M_1)
    h_ris_rx: np.ndarray  # (M_2, M_I)
    paths_tx_ris: PathSet
    paths_ris_rx: PathSet
    means_tx_ris: LinkAngles
    means_ris_rx: LinkAngles


def steering_vector(
    elevation: float, azimuth: float, m_x: int, m_y: int, spacing: float
) -> np.ndarray:
    """Unit-norm URA steering vector, x-major Kronecker ordering.

    Entry (m_x, m_y) carries phase -2*pi*d*(m_x*sin(el)*cos(az) +
    m_y*sin(el)*sin(az)); the per-entry modulus is 1/sqrt(m_x*m_y).
    """
    v = steering_matrix(
        np.asarray([elevation]), np.asarray([azimuth]), m_x, m_y, spacing
    )[:, 0]
    return v / math.sqrt(m_x * m_y)


def steering_matrix(
    elevations: np.ndarray, azimuths: np.ndarray, m_x: int, m_y: int, spacing: float
) -> np.ndarray:
    """Stack of unnormalized steering vectors, one column per direction.

    Entries have unit modulus; shape (m_x*m_y, len(elevations)).
    """
    el = np.asarray(elevations, dtype=float)
    az = np.asarray(azimuths, dtype=float)
    ux = np.sin(el) * np.cos(az)  # directional cosines
    uy = np.sin(el) * np.sin(az)
    mx = np.arange(m_x)[:, None]
    my = np.arange(m_y)[:, None]
    px = np.exp(-2j * np.pi * spacing * mx * ux[None, :])  # (m_x, L)
    py = np.exp(-2j * np.pi * spacing * my * uy[None, :])  # (m_y, L)
    # x-major: element index n = m_x_index * m_y + m_y_index
    return (px[:, None, :] * py[None, :, :]).reshape(m_x * m_y, -1)


def path_loss_linear(carrier_ghz: float, distance_m: float, exponent: float) -> float:
    """Close-in distance loss as a linear power ratio.

    10^((32.4 + 20*log10(f_GHz) + 10*eta*log10(tau))/10); callers dividing
    amplitudes use its square root.
    """
    db = 32.4 + 20.0 * math.log10(carrier_ghz) + 10.0 * exponent * math.log10(distance_m)
    return 10.0 ** (db / 10.0)


def path_amplitude(
    carrier_ghz: float, distance_m: float, exponent: float, mode: str = "alpha"
) -> float:
    """Per-path amplitude attenuation factor under the chosen convention.

    "alpha": power attenuation = (32.4 + 20*log10(f_GHz)) * tau^eta with the
    reference term applied as a raw coefficient (default; calibrated to the
    indoor operating points the bundled experiments target).
    "db": power attenuation = path_loss_linear(...), i.e. the full close-in
    expression interpreted in decibels.
    """
    if mode == "alpha":
        alpha = 32.4 + 20.0 * math.log10(carrier_ghz)
        return 1.0 / math.sqrt(alpha * distance_m**exponent)
    if mode == "db":
        return 1.0 / math.sqrt(path_loss_linear(carrier_ghz, distance_m, exponent))
    raise ValueError(f"unknown path loss mode {mode!r}")


def mean_angles_from_geometry(
    pos_a, pos_b, boresight_a=UP, boresight_b=UP
) -> LinkAngles:
    """Mean link angles between two nodes with given array boresights.

    Azimuths are measured in the global xy-plane along the direction away
    from each node; elevations are measured from each array's boresight
    normal, so a broadside link has elevation 0.
    """
    a = np.asarray(pos_a, dtype=float)
    b = np.asarray(pos_b, dtype=float)
    v = b - a
    tau = float(np.linalg.norm(v))
    if tau == 0.0:
        raise DegenerateGeometryError(f"coincident positions {pos_a}")
    u = v / tau
    dep_el = math.acos(float(np.clip(np.dot(u, boresight_a), -1.0, 1.0)))
    dep_az = math.atan2(u[1], u[0])
    w = -u
    arr_el = math.acos(float(np.clip(np.dot(w, boresight_b), -1.0, 1.0)))
    arr_az = math.atan2(w[1], w[0])
    return LinkAngles(dep_el, dep_az, arr_el, arr_az, tau)


def draw_angle_offsets(
    spread_el: float, spread_az: float, num_paths: int, rng: np.random.Generator
) -> AngleOffsets:
    """Uniform per-path deviations within +-spread (radians)."""
    return AngleOffsets(
        rng.uniform(-spread_el, spread_el, num_paths),
        rng.uniform(-spread_az, spread_az, num_paths),
        rng.uniform(-spread_el, spread_el, num_paths),
        rng.uniform(-spread_az, spread_az, num_paths),
    )


def draw_gains(num_paths: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. circularly symmetric complex normal gains, unit variance."""
    return (rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths)) / math.sqrt(2.0)


def make_path_set(
    means: LinkAngles, offsets: AngleOffsets, gains: np.ndarray, link: str
) -> PathSet:
    """Combine frozen offsets/gains with (possibly new) mean angles."""
    return PathSet(
        gains=gains,
        dep_elevation=means.dep_elevation + offsets.dep_elevation,
        dep_azimuth=means.dep_azimuth + offsets.dep_azimuth,
        arr_elevation=means.arr_elevation + offsets.arr_elevation,
        arr_azimuth=means.arr_azimuth + offsets.arr_azimuth,
        distance_m=means.distance_m,
        link=link,
    )


def draw_paths(
    means: LinkAngles,
    spread_el: float,
    spread_az: float,
    num_paths: int,
    rng: np.random.Generator,
    link: str = "tx_ris",
) -> PathSet:
    """Draw a full path set: gains first, then the four offset blocks."""
    gains = draw_gains(num_paths, rng)
    offsets = draw_angle_offsets(spread_el, spread_az, num_paths, rng)
    return make_path_set(means, offsets, gains, link)


def draw_trial(config: SystemConfig, rng: np.random.Generator) -> TrialChannels:
    """One Monte Carlo trial's worth of frozen randomness for both links.

    The draw depends only on num_paths and the spreads, never on array or
    RIS sizes, so element-count sweeps reuse identical trials.
    """
    spread_el = math.radians(config.angular_spread_deg[0])
    spread_az = math.radians(config.angular_spread_deg[1])
    gains_ti = draw_gains(config.num_paths, rng)
    offsets_ti = draw_angle_offsets(spread_el, spread_az, config.num_paths, rng)
    gains_ir = draw_gains(config.num_paths, rng)
    offsets_ir = draw_angle_offsets(spread_el, spread_az, config.num_paths, rng)
    return TrialChannels(gains_ti, offsets_ti, gains_ir, offsets_ir)


def translation_phases(
    elevations: np.ndarray,
    azimuths: np.ndarray,
    delta_xy: tuple[float, float],
    wavelength_m: float,
) -> np.ndarray:
    """Per-path phase rotation from translating an array's phase reference.

    Moving an array by delta (meters, in its plane) shifts each incident or
    departing plane wave's phase at the reference element by
    -2*pi/lambda * (delta . u) with u the path's in-plane direction cosines.
    This deterministic geometric term is what makes rates vary on a
    wavelength scale across the platform; without it a platform translation
    would be phase-transparent.
    """
    ux = np.sin(elevations) * np.cos(azimuths)
    uy = np.sin(elevations) * np.sin(azimuths)
    return np.exp(-2j * np.pi * (delta_xy[0] * ux + delta_xy[1] * uy) / wavelength_m)


def wavelength_m(carrier_ghz: float) -> float:
    return 0.299792458 / carrier_ghz


def link_channel(
    paths: PathSet,
    tx_shape: tuple[int, int],
    rx_shape: tuple[int, int],
    carrier_ghz: float,
    exponent: float,
    spacing: float,
    mode: str = "alpha",
) -> np.ndarray:
    """Sum-of-paths channel matrix, shape (num_rx, num_tx).

    Each path contributes amp * z_l * a_r a_t^T with unit-modulus steering
    entries, so a single unit-gain path at unit attenuation has Frobenius
    norm sqrt(num_rx * num_tx).
    """
    a_r = steering_matrix(
        paths.arr_elevation, paths.arr_azimuth, rx_shape[0], rx_shape[1], spacing
    )
    a_t = steering_matrix(
        paths.dep_elevation, paths.dep_azimuth, tx_shape[0], tx_shape[1], spacing
    )
    amp = path_amplitude(carrier_ghz, paths.distance_m, exponent, mode)
    return (a_r * (amp * paths.gains)) @ a_t.T


def composite_channel(
    h_ris_rx: np.ndarray, phases: np.ndarray, h_tx_ris: np.ndarray
) -> np.ndarray:
    """End-to-end matrix H_IR diag(e^{j phi}) H_TI, shape (M_2, M_1)."""
    phases = np.asarray(phases, dtype=float)
    if h_ris_rx.shape[1] != phases.shape[0] or phases.shape[0] != h_tx_ris.shape[0]:
        raise ValueError(
            f"dimension mismatch: {h_ris_rx.shape} x diag({phases.shape[0]}) x {h_tx_ris.shape}"
        )
    return (h_ris_rx * np.exp(1j * phases)) @ h_tx_ris


def realize_channels(
    config: SystemConfig,
    geometry: DeploymentGeometry,
    trial: TrialChannels,
    ris_xy: tuple[float, float],
) -> ChannelRealization:
    """Rebuild both hop matrices for a trial at the given RIS position.

    Mean angles and distances follow the position; the trial's gains and
    angular offsets stay frozen. Each path additionally picks up the
    deterministic translation phase of the moved phase reference (relative
    to the platform center, where the factor is exactly 1), evaluated at the
    RIS-side direction of that path.
    """
    ris_pos = (ris_xy[0], ris_xy[1], geometry.ris_height_m)
    means_ti = mean_angles_from_geometry(geometry.tx_position, ris_pos, UP, DOWN)
    means_ir = mean_angles_from_geometry(ris_pos, geometry.ue_position, DOWN, UP)
    cx, cy = geometry.platform_center()
    delta = (ris_xy[0] - cx, ris_xy[1] - cy)
    lam = wavelength_m(config.carrier_frequency_ghz)
    gains_ti = trial.gains_tx_ris * translation_phases(
        means_ti.arr_elevation + trial.offsets_tx_ris.arr_elevation,
        means_ti.arr_azimuth + trial.offsets_tx_ris.arr_azimuth,
        delta,
        lam,
    )
    gains_ir = trial.gains_ris_rx * translation_phases(
        means_ir.dep_elevation + trial.offsets_ris_rx.dep_elevation,
        means_ir.dep_azimuth + trial.offsets_ris_rx.dep_azimuth,
        delta,
        lam,
    )
    paths_ti = make_path_set(means_ti, trial.offsets_tx_ris, gains_ti, "tx_ris")
    paths_ir = make_path_set(means_ir, trial.offsets_ris_rx, gains_ir, "ris_rx")
    h_ti = link_channel(
        paths_ti,
        config.tx_antennas,
        config.ris_elements,
        config.carrier_frequency_ghz,
        config.path_loss_exponent,
        config.element_spacing_wavelengths,
        config.path_loss_mode,
    )
    h_ir = link_channel(
        paths_ir,
        config.ris_elements,
        config.rx_antennas,
        config.carrier_frequency_ghz,
        config.path_loss_exponent,
        config.element_spacing_wavelengths,
        config.path_loss_mode,
    )
    return ChannelRealization(h_ti, h_ir, paths_ti, paths_ir, means_ti, means_ir)
