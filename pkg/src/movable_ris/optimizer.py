"""Joint RIS placement / phase-shift search by particle swarm.

Particles live in the unit hypercube [0,1]^(M_I+2): the first two entries map
affinely onto the platform rectangle, the rest scale to phases in [0, 2pi).
The swarm follows the usual velocity recursion with the social term pulling
toward the global best and the cognitive term toward each particle's personal
best; both bests are strict argmaxes over history, so the global-best value
sequence never decreases. A grid-exhaustive oracle covers tiny instances for
verification.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .beamforming import BeamformerSet, achievable_rate, bb_stages, effective_channel
from .channel import TrialChannels, composite_channel, realize_channels
from .scenario import DeploymentGeometry, PsoParams, SystemConfig

__all__ = [
    "RisState",
    "ProblemContext",
    "SwarmState",
    "decode",
    "decode_xy",
    "encode",
    "fitness",
    "init_swarm",
    "pso_step",
    "run_pso",
    "run",
    "brute_force_joint",
]

TWO_PI = 2.0 * math.pi

# Grid-point budget above which brute_force_joint refuses to run.
MAX_ORACLE_POINTS = 10**7


@dataclass(frozen=True)
class RisState:
    """Decoded platform position and per-element phase shifts."""

    x: float
    y: float
    phases: np.ndarray  # values in [0, 2*pi)


def decode_xy(px: float, py: float, geometry: DeploymentGeometry) -> tuple[float, float]:
    x0, x1 = geometry.platform_x_range
    y0, y1 = geometry.platform_y_range
    # plain floats: positions end up in CSV fields via repr
    return (float(x0 + px * (x1 - x0)), float(y0 + py * (y1 - y0)))


def decode(vector: np.ndarray, geometry: DeploymentGeometry) -> RisState:
    """Map a unit-hypercube point onto the feasible set.

    Positions land in the platform box and phases in [0, 2pi) by
    construction; the single wrap 2pi -> 0 is the only non-injective point.
    """
    v = np.asarray(vector, dtype=float)
    x, y = decode_xy(v[0], v[1], geometry)
    phases = (TWO_PI * v[2:]) % TWO_PI
    return RisState(x, y, phases)


def encode(state: RisState, geometry: DeploymentGeometry) -> np.ndarray:
    """Inverse of decode for in-range states (phases taken mod 2pi)."""
    x0, x1 = geometry.platform_x_range
    y0, y1 = geometry.platform_y_range
    return np.concatenate(
        (
            [(state.x - x0) / (x1 - x0), (state.y - y0) / (y1 - y0)],
            (np.asarray(state.phases) % TWO_PI) / TWO_PI,
        )
    )


@dataclass
class ProblemContext:
    """Everything a fitness evaluation needs, with frozen trial randomness.

    The RF stages are fixed for the whole search; only mean geometry (and
    hence the hop matrices) and the phase diagonal change between calls, so
    the objective is deterministic and the swarm's argmax semantics are well
    defined. Consecutive evaluations at an unchanged position reuse the hop
    matrices, which makes phase-only searches cheap.
    """

    config: SystemConfig
    geometry: DeploymentGeometry
    f1: np.ndarray
    f2: np.ndarray
    trial: TrialChannels
    tx_power_w: float
    noise_power_w: float
    saw_rank_deficiency: bool = False
    _cache_key: tuple[float, float] | None = field(default=None, repr=False)
    _cache: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.config.num_ris + 2

    def hop_matrices(self, x: float, y: float) -> tuple[np.ndarray, np.ndarray]:
        key = (x, y)
        if self._cache_key != key:
            real = realize_channels(self.config, self.geometry, self.trial, key)
            self._cache_key = key
            self._cache = (real.h_tx_ris, real.h_ris_rx)
        return self._cache

    def rate_for(self, state: RisState) -> float:
        h_ti, h_ir = self.hop_matrices(state.x, state.y)
        h = composite_channel(h_ir, state.phases, h_ti)
        eff = effective_channel(self.f2, h, self.f1)
        bb = bb_stages(eff, self.tx_power_w, self.config.num_streams, self.f1)
        if bb.rank_deficient:
            self.saw_rank_deficiency = True
        bf = BeamformerSet(self.f1, bb.b1, self.f2, bb.b2, bb.streams, bb.rank_deficient)
        return achievable_rate(bf, eff, self.noise_power_w)


def fitness(vector: np.ndarray, context: ProblemContext) -> float:
    """Objective value (bps/Hz) of one particle position."""
    return context.rate_for(decode(vector, context.geometry))


@dataclass
class SwarmState:
    positions: np.ndarray       # (Z, D)
    velocities: np.ndarray      # (Z, D)
    best_positions: np.ndarray  # (Z, D)
    best_values: np.ndarray     # (Z,)
    global_best_position: np.ndarray
    global_best_value: float
    history: list[float]        # global best after init and each iteration


def init_swarm(
    fitness_fn, dim: int, params: PsoParams, rng: np.random.Generator
) -> SwarmState:
    """Uniform positions, zero velocities, bests from the initial evaluation."""
    z = params.swarm_size
    positions = rng.random((z, dim))
    velocities = np.zeros((z, dim))
    values = np.array([fitness_fn(positions[i]) for i in range(z)])
    g = int(np.argmax(values))  # first maximum: lowest particle index wins ties
    return SwarmState(
        positions=positions,
        velocities=velocities,
        best_positions=positions.copy(),
        best_values=values.copy(),
        global_best_position=positions[g].copy(),
        global_best_value=float(values[g]),
        history=[float(values[g])],
    )


def _inertia(params: PsoParams, t: int) -> float:
    if params.iterations <= 1:
        return params.inertia_start
    frac = (t - 1) / (params.iterations - 1)
    return params.inertia_start + (params.inertia_end - params.inertia_start) * frac


def pso_step(
    state: SwarmState,
    params: PsoParams,
    t: int,
    rng: np.random.Generator,
    fitness_fn,
) -> SwarmState:
    """One swarm iteration; mutates and returns ``state``.

    Velocity: mu1*Y1*(gbest - p) + mu2*Y2*(pbest - p) + inertia(t)*v with
    fresh per-dimension uniforms Y1 then Y2, clamped to +-velocity_clamp.
    Positions are clamped to [0,1] and the velocity of any clamped dimension
    is zeroed. Bests update only on strict improvement, which keeps the
    earliest iteration and lowest particle index on ties.
    """
    z, dim = state.positions.shape
    y1 = rng.random((z, dim))
    y2 = rng.random((z, dim))
    vel = (
        params.social_weight * y1 * (state.global_best_position[None, :] - state.positions)
        + params.cognitive_weight * y2 * (state.best_positions - state.positions)
        + _inertia(params, t) * state.velocities
    )
    np.clip(vel, -params.velocity_clamp, params.velocity_clamp, out=vel)
    pos = state.positions + vel
    out_of_box = (pos < 0.0) | (pos > 1.0)
    vel[out_of_box] = 0.0
    np.clip(pos, 0.0, 1.0, out=pos)
    state.positions = pos
    state.velocities = vel

    for i in range(z):
        value = fitness_fn(pos[i])
        if value > state.best_values[i]:
            state.best_values[i] = value
            state.best_positions[i] = pos[i].copy()
    for i in range(z):
        if state.best_values[i] > state.global_best_value:
            state.global_best_value = float(state.best_values[i])
            state.global_best_position = state.best_positions[i].copy()
    state.history.append(state.global_best_value)
    return state


def run_pso(
    fitness_fn, dim: int, params: PsoParams, rng: np.random.Generator
) -> tuple[np.ndarray, float, list[float]]:
    """Full search: returns (best vector, best value, history of length T+1)."""
    state = init_swarm(fitness_fn, dim, params, rng)
    for t in range(1, params.iterations + 1):
        pso_step(state, params, t, rng, fitness_fn)
    return state.global_best_position, state.global_best_value, state.history


def run(
    context: ProblemContext, params: PsoParams, rng: np.random.Generator
) -> tuple[RisState, float, list[float]]:
    """Joint position/phase search over the full M_I + 2 dimensions."""
    best_vec, best_val, history = run_pso(
        lambda v: fitness(v, context), context.dimension, params, rng
    )
    return decode(best_vec, context.geometry), best_val, history


def brute_force_joint(
    context: ProblemContext, position_steps: int, phase_steps: int
) -> tuple[RisState, float]:
    """Exhaustive grid maximum over positions x phases (small instances only).

    Positions use ``position_steps`` points per axis spanning [0,1]
    inclusive (the platform midpoint when position_steps == 1); phases use
    ``phase_steps`` points k/phase_steps covering [0, 2pi) without the
    duplicate endpoint. Refuses grids above MAX_ORACLE_POINTS.
    """
    num_phases = context.config.num_ris
    total = position_steps**2 * phase_steps**num_phases
    if total > MAX_ORACLE_POINTS:
        raise ValueError(f"grid too large: {total} points exceeds {MAX_ORACLE_POINTS}")
    pos_grid = np.linspace(0.0, 1.0, position_steps) if position_steps > 1 else np.array([0.5])
    phase_grid = np.arange(phase_steps) / phase_steps

    best_vec = None
    best_val = -math.inf
    axes = [pos_grid, pos_grid] + [phase_grid] * num_phases
    for combo in itertools.product(*axes):
        vec = np.asarray(combo)
        value = fitness(vec, context)
        if value > best_val:
            best_val = value
            best_vec = vec
    return decode(best_vec, context.geometry), float(best_val)
