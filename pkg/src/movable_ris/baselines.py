"""Reference schemes the movable-RIS link is compared against.

Six kinds: the jointly optimized movable RIS, its random-phase variant,
fixed-position RIS with optimized or random phases, and movable
decode-and-forward relay bounds (full and half duplex). All kinds evaluate
identical frozen channel trials (common random numbers) so per-trial and
mean comparisons are low-variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .beamforming import (
    angle_support,
    build_grid,
    design_rf_stages,
    hybrid_link_rate,
    rf_stages,
    select_beams,
)
from .channel import (
    DOWN,
    UP,
    TrialChannels,
    draw_trial,
    link_channel,
    make_path_set,
    mean_angles_from_geometry,
    translation_phases,
    wavelength_m,
)
from .optimizer import (
    ProblemContext,
    RisState,
    TWO_PI,
    decode_xy,
    run,
    run_pso,
)
from .scenario import (
    STREAM_AUX,
    STREAM_CHANNEL,
    STREAM_PSO,
    DeploymentGeometry,
    SystemConfig,
    rng_stream,
)

__all__ = [
    "BaselineKind",
    "TrialOutcome",
    "ScenarioPack",
    "build_scenario_pack",
    "make_problem_context",
    "fixed_ris_rate",
    "relay_rate",
    "run_baseline",
]


class BaselineKind(str, Enum):
    FIXED_RIS_OPT_PHASE = "fixed_ris_opt_phase"
    FIXED_RIS_RANDOM_PHASE = "fixed_ris_random_phase"
    MOVABLE_RIS_RANDOM_PHASE = "movable_ris_random_phase"
    MOVABLE_RIS_JOINT = "movable_ris_joint"
    FD_RELAY = "fd_relay"
    HD_RELAY = "hd_relay"


# Stable sub-stream tags; FD and HD relays share one search family so the
# half-duplex rate is exactly half the full-duplex rate on matched trials.
_PSO_FAMILY = {
    BaselineKind.MOVABLE_RIS_JOINT: 0,
    BaselineKind.FIXED_RIS_OPT_PHASE: 1,
    BaselineKind.MOVABLE_RIS_RANDOM_PHASE: 2,
    BaselineKind.FD_RELAY: 3,
    BaselineKind.HD_RELAY: 3,
}

_AUX_TAG = {
    BaselineKind.FIXED_RIS_RANDOM_PHASE: 0,
    BaselineKind.MOVABLE_RIS_RANDOM_PHASE: 1,
}


@dataclass
class TrialOutcome:
    """One baseline's result on one frozen channel trial."""

    rate: float
    x: float
    y: float
    phases: np.ndarray | None
    flagged: bool = False


@dataclass
class ScenarioPack:
    """Per-scenario precomputation shared by every trial and baseline kind.

    RF stages depend only on geometry and configuration (supports spanning
    the platform footprint), never on channel draws, so they are built once.
    The relay reuses the transmit precoder toward the platform and carries
    its own receive/transmit stages; its arrays mirror the Rx and Tx antenna
    counts and do not scale with the RIS element count.
    """

    config: SystemConfig
    geometry: DeploymentGeometry
    seed: int
    f1: np.ndarray
    f2: np.ndarray
    relay_f2_hop1: np.ndarray
    relay_f1_hop2: np.ndarray
    tx_power_w: float
    noise_power_w: float
    pso_seed: int = 0


def _relay_stages(
    config: SystemConfig, geometry: DeploymentGeometry
) -> tuple[np.ndarray, np.ndarray]:
    """Receive combiner for hop 1 and transmit precoder for hop 2 at the relay.

    The relay node hangs from the same platform (arrays facing down), so its
    supports at the relay end span every platform position, mirroring the
    main link's RF design.
    """
    spread_el = math.radians(config.angular_spread_deg[0])
    spread_az = math.radians(config.angular_spread_deg[1])
    rx_shape = config.rx_antennas
    tx_shape = config.tx_antennas
    # Hop-1 arrival support at the relay: the relay array looks back at the Tx
    # from anywhere on the platform, which in relay-local terms mirrors the
    # Tx's departure footprint.
    relay_ref = geometry.reference_ris_position()
    means_hop1 = mean_angles_from_geometry(geometry.tx_position, relay_ref, UP, DOWN)
    means_hop2 = mean_angles_from_geometry(relay_ref, geometry.ue_position, DOWN, UP)
    widen_el = _platform_elevation_halfwidth(geometry, geometry.tx_position)
    widen_az = _platform_azimuth_halfwidth(geometry, geometry.tx_position)
    beams_rx = select_beams(
        build_grid(*rx_shape),
        angle_support(
            means_hop1.arr_elevation, means_hop1.arr_azimuth,
            spread_el + widen_el, spread_az + widen_az,
        ),
        config.num_streams,
        min(config.max_rf_chains, rx_shape[0] * rx_shape[1]),
    )
    widen_el2 = _platform_elevation_halfwidth(geometry, geometry.ue_position)
    widen_az2 = _platform_azimuth_halfwidth(geometry, geometry.ue_position)
    beams_tx = select_beams(
        build_grid(*tx_shape),
        angle_support(
            means_hop2.dep_elevation, means_hop2.dep_azimuth,
            spread_el + widen_el2, spread_az + widen_az2,
        ),
        config.num_streams,
        min(config.max_rf_chains, tx_shape[0] * tx_shape[1]),
    )
    f1_hop2, f2_hop1 = rf_stages(
        beams_tx, beams_rx, tx_shape, rx_shape, config.element_spacing_wavelengths
    )
    return f2_hop1, f1_hop2


def _platform_elevation_halfwidth(geometry: DeploymentGeometry, node) -> float:
    """Spread of platform-corner elevations (seen from the platform) around the center."""
    cx, cy = geometry.platform_center()
    z = geometry.ris_height_m
    center = mean_angles_from_geometry((cx, cy, z), node, DOWN, UP).dep_elevation
    worst = 0.0
    for x in geometry.platform_x_range:
        for y in geometry.platform_y_range:
            el = mean_angles_from_geometry((x, y, z), node, DOWN, UP).dep_elevation
            worst = max(worst, abs(el - center))
    return worst


def _platform_azimuth_halfwidth(geometry: DeploymentGeometry, node) -> float:
    cx, cy = geometry.platform_center()
    z = geometry.ris_height_m
    center = mean_angles_from_geometry((cx, cy, z), node, DOWN, UP).dep_azimuth
    worst = 0.0
    for x in geometry.platform_x_range:
        for y in geometry.platform_y_range:
            az = mean_angles_from_geometry((x, y, z), node, DOWN, UP).dep_azimuth
            worst = max(worst, abs(math.remainder(az - center, 2.0 * math.pi)))
    return worst


def build_scenario_pack(
    config: SystemConfig,
    geometry: DeploymentGeometry,
    seed: int,
    pso_seed: int | None = None,
) -> ScenarioPack:
    """Precompute RF stages; ``pso_seed`` re-keys only the search streams."""
    f1, f2 = design_rf_stages(config, geometry)
    relay_f2, relay_f1 = _relay_stages(config, geometry)
    return ScenarioPack(
        config=config,
        geometry=geometry,
        seed=seed,
        f1=f1,
        f2=f2,
        relay_f2_hop1=relay_f2,
        relay_f1_hop2=relay_f1,
        tx_power_w=config.tx_power_watts,
        noise_power_w=config.noise_power_watts,
        pso_seed=seed if pso_seed is None else pso_seed,
    )


def trial_channels(pack: ScenarioPack, trial_index: int) -> TrialChannels:
    """Frozen channel randomness for one trial, identical across kinds."""
    return draw_trial(pack.config, rng_stream(pack.seed, trial_index, STREAM_CHANNEL))


def make_problem_context(pack: ScenarioPack, trial_index: int) -> ProblemContext:
    return ProblemContext(
        config=pack.config,
        geometry=pack.geometry,
        f1=pack.f1,
        f2=pack.f2,
        trial=trial_channels(pack, trial_index),
        tx_power_w=pack.tx_power_w,
        noise_power_w=pack.noise_power_w,
    )


def _random_phases(pack: ScenarioPack, trial_index: int, kind: BaselineKind) -> np.ndarray:
    rng = rng_stream(pack.seed, trial_index, STREAM_AUX, _AUX_TAG[kind])
    return rng.uniform(0.0, TWO_PI, pack.config.num_ris)


def fixed_ris_rate(
    pack: ScenarioPack, trial_index: int, optimize_phase: bool
) -> TrialOutcome:
    """RIS pinned to the platform center; phases optimized or random."""
    context = make_problem_context(pack, trial_index)
    cx, cy = pack.geometry.platform_center()
    if optimize_phase:
        rng = rng_stream(pack.pso_seed, trial_index, STREAM_PSO,
                         _PSO_FAMILY[BaselineKind.FIXED_RIS_OPT_PHASE])

        def phase_fitness(vec: np.ndarray) -> float:
            return context.rate_for(RisState(cx, cy, (TWO_PI * vec) % TWO_PI))

        best_vec, best_val, _ = run_pso(
            phase_fitness, pack.config.num_ris, pack.config.pso, rng
        )
        phases = (TWO_PI * best_vec) % TWO_PI
        return TrialOutcome(best_val, cx, cy, phases, context.saw_rank_deficiency)
    phases = _random_phases(pack, trial_index, BaselineKind.FIXED_RIS_RANDOM_PHASE)
    rate = context.rate_for(RisState(cx, cy, phases))
    return TrialOutcome(rate, cx, cy, phases, context.saw_rank_deficiency)


def _movable_random_phase(pack: ScenarioPack, trial_index: int) -> TrialOutcome:
    """Phases drawn once per trial, position searched over the platform."""
    context = make_problem_context(pack, trial_index)
    phases = _random_phases(pack, trial_index, BaselineKind.MOVABLE_RIS_RANDOM_PHASE)
    rng = rng_stream(pack.pso_seed, trial_index, STREAM_PSO,
                     _PSO_FAMILY[BaselineKind.MOVABLE_RIS_RANDOM_PHASE])

    def position_fitness(vec: np.ndarray) -> float:
        x, y = decode_xy(vec[0], vec[1], pack.geometry)
        return context.rate_for(RisState(x, y, phases))

    best_vec, best_val, _ = run_pso(position_fitness, 2, pack.config.pso, rng)
    x, y = decode_xy(best_vec[0], best_vec[1], pack.geometry)
    return TrialOutcome(best_val, x, y, phases, context.saw_rank_deficiency)


@dataclass
class _RelayContext:
    """Two-hop decode-and-forward evaluation with frozen trial randomness.

    Hop 1 reuses the trial's transmitter-side draw, hop 2 the receiver-side
    draw. No self-interference is modeled: the full-duplex rate is an ideal
    upper bound min(hop rates); half duplex additionally halves it.
    """

    pack: ScenarioPack
    trial: TrialChannels
    rank_deficient: bool = False

    def min_hop_rate(self, x: float, y: float) -> float:
        pack = self.pack
        config = pack.config
        relay_pos = (x, y, pack.geometry.ris_height_m)
        cx, cy = pack.geometry.platform_center()
        delta = (x - cx, y - cy)
        lam = wavelength_m(config.carrier_frequency_ghz)
        means1 = mean_angles_from_geometry(pack.geometry.tx_position, relay_pos, UP, DOWN)
        gains1 = self.trial.gains_tx_ris * translation_phases(
            means1.arr_elevation + self.trial.offsets_tx_ris.arr_elevation,
            means1.arr_azimuth + self.trial.offsets_tx_ris.arr_azimuth,
            delta, lam,
        )
        paths1 = make_path_set(means1, self.trial.offsets_tx_ris, gains1, "tx_ris")
        h1 = link_channel(
            paths1, config.tx_antennas, config.rx_antennas,
            config.carrier_frequency_ghz, config.path_loss_exponent,
            config.element_spacing_wavelengths, config.path_loss_mode,
        )
        rate1, deficient1 = hybrid_link_rate(
            pack.relay_f2_hop1, h1, pack.f1,
            pack.tx_power_w, config.num_streams, pack.noise_power_w,
        )
        means2 = mean_angles_from_geometry(relay_pos, pack.geometry.ue_position, DOWN, UP)
        gains2 = self.trial.gains_ris_rx * translation_phases(
            means2.dep_elevation + self.trial.offsets_ris_rx.dep_elevation,
            means2.dep_azimuth + self.trial.offsets_ris_rx.dep_azimuth,
            delta, lam,
        )
        paths2 = make_path_set(means2, self.trial.offsets_ris_rx, gains2, "ris_rx")
        h2 = link_channel(
            paths2, config.tx_antennas, config.rx_antennas,
            config.carrier_frequency_ghz, config.path_loss_exponent,
            config.element_spacing_wavelengths, config.path_loss_mode,
        )
        rate2, deficient2 = hybrid_link_rate(
            pack.f2, h2, pack.relay_f1_hop2,
            pack.tx_power_w, config.num_streams, pack.noise_power_w,
        )
        if deficient1 or deficient2:
            self.rank_deficient = True
        return min(rate1, rate2)


def relay_rate(pack: ScenarioPack, trial_index: int, duplex: str) -> TrialOutcome:
    """Movable DF relay bound; ``duplex`` is "fd" or "hd" (hd = fd / 2).

    Both duplex modes share the same position search stream, so the
    half-duplex rate is exactly half the full-duplex rate on every trial.
    """
    if duplex not in ("fd", "hd"):
        raise ValueError(f"duplex must be 'fd' or 'hd', got {duplex!r}")
    context = _RelayContext(pack, trial_channels(pack, trial_index))
    rng = rng_stream(pack.pso_seed, trial_index, STREAM_PSO, _PSO_FAMILY[BaselineKind.FD_RELAY])

    def position_fitness(vec: np.ndarray) -> float:
        x, y = decode_xy(vec[0], vec[1], pack.geometry)
        return context.min_hop_rate(x, y)

    best_vec, best_val, _ = run_pso(position_fitness, 2, pack.config.pso, rng)
    x, y = decode_xy(best_vec[0], best_vec[1], pack.geometry)
    rate = best_val if duplex == "fd" else best_val / 2.0
    return TrialOutcome(rate, x, y, None, context.rank_deficient)


def run_baseline(
    kind: BaselineKind, pack: ScenarioPack, trial_index: int
) -> TrialOutcome:
    """Dispatch one baseline kind on one common-random-numbers trial."""
    if kind == BaselineKind.MOVABLE_RIS_JOINT:
        context = make_problem_context(pack, trial_index)
        rng = rng_stream(pack.pso_seed, trial_index, STREAM_PSO, _PSO_FAMILY[kind])
        state, rate, _ = run(context, pack.config.pso, rng)
        return TrialOutcome(rate, state.x, state.y, state.phases, context.saw_rank_deficiency)
    if kind == BaselineKind.FIXED_RIS_OPT_PHASE:
        return fixed_ris_rate(pack, trial_index, optimize_phase=True)
    if kind == BaselineKind.FIXED_RIS_RANDOM_PHASE:
        return fixed_ris_rate(pack, trial_index, optimize_phase=False)
    if kind == BaselineKind.MOVABLE_RIS_RANDOM_PHASE:
        return _movable_random_phase(pack, trial_index)
    if kind == BaselineKind.FD_RELAY:
        return relay_rate(pack, trial_index, "fd")
    if kind == BaselineKind.HD_RELAY:
        return relay_rate(pack, trial_index, "hd")
    raise ValueError(f"unknown baseline kind {kind!r}")
