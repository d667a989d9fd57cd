"""Angular two-stage beamforming and the achievable-rate objective.

The analog stage is a bank of constant-modulus beams picked from a quantized
directional-cosine grid so that the selected cells cover the link's angular
support. The digital stage diagonalizes the reduced effective channel via its
SVD. Rates are log-det mutual information with the combiner-colored noise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import mean_angles_from_geometry, DOWN, UP
from .scenario import DeploymentGeometry, SystemConfig

__all__ = [
    "InvalidBeamError",
    "QuantizedGrid",
    "AngleSupport",
    "BeamformerSet",
    "EffectiveChannel",
    "BbStages",
    "build_grid",
    "angle_support",
    "support_points",
    "select_beams",
    "rf_steering_column",
    "rf_stages",
    "design_rf_stages",
    "effective_channel",
    "bb_stages",
    "achievable_rate",
    "hybrid_link_rate",
]

logger = logging.getLogger(__name__)

# Conditioning threshold above which the rate falls back to the whitened
# eigenvalue evaluation instead of the direct determinant.
_COND_LIMIT = 1e12


class InvalidBeamError(ValueError):
    """Raised for cosine pairs outside the unit disk (no physical direction)."""


@dataclass(frozen=True)
class QuantizedGrid:
    """Directional-cosine beam grid: values -1 + (2u-1)/M for u = 1..M."""

    lambda_x: tuple[float, ...]
    lambda_y: tuple[float, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.lambda_x), len(self.lambda_y)


@dataclass(frozen=True)
class AngleSupport:
    """Elevation/azimuth intervals (radians) defining a cosine-space region.

    The region is the image of the rectangle under
    (el, az) -> sin(el) * (cos(az), sin(az)).
    """

    elevation: tuple[float, float]
    azimuth: tuple[float, float]


@dataclass
class EffectiveChannel:
    """Reduced channel seen by the digital stages, with its SVD."""

    matrix: np.ndarray       # (n_rx_beams, n_tx_beams)
    u: np.ndarray            # left singular vectors
    singular_values: np.ndarray
    vh: np.ndarray           # right singular vectors, conjugate-transposed
    rank: int


@dataclass
class BbStages:
    b1: np.ndarray           # (n_tx_beams, streams)
    b2: np.ndarray           # (streams, n_rx_beams)
    streams: int
    rank_deficient: bool


@dataclass
class BeamformerSet:
    """Analog + digital stages for one link direction."""

    f1: np.ndarray           # (num_tx, n_tx_beams)
    b1: np.ndarray
    f2: np.ndarray           # (n_rx_beams, num_rx)
    b2: np.ndarray
    streams: int
    rank_deficient: bool = False


def build_grid(m_x: int, m_y: int) -> QuantizedGrid:
    """Quantized cosine grid matched to the array dimensions."""
    if m_x < 1 or m_y < 1:
        raise ValueError("grid dimensions must be >= 1")
    lx = tuple(-1.0 + (2 * u - 1) / m_x for u in range(1, m_x + 1))
    ly = tuple(-1.0 + (2 * k - 1) / m_y for k in range(1, m_y + 1))
    return QuantizedGrid(lx, ly)


def angle_support(
    mean_elevation: float,
    mean_azimuth: float,
    spread_elevation: float,
    spread_azimuth: float,
) -> AngleSupport:
    return AngleSupport(
        (mean_elevation - spread_elevation, mean_elevation + spread_elevation),
        (mean_azimuth - spread_azimuth, mean_azimuth + spread_azimuth),
    )


def support_points(support: AngleSupport, per_axis: int = 96) -> np.ndarray:
    """Dense sample of the support region in cosine space, shape (n, 2)."""
    el = np.linspace(support.elevation[0], support.elevation[1], per_axis)
    az = np.linspace(support.azimuth[0], support.azimuth[1], per_axis)
    ee, aa = np.meshgrid(el, az, indexing="ij")
    r = np.sin(ee.ravel())
    return np.column_stack((r * np.cos(aa.ravel()), r * np.sin(aa.ravel())))


def select_beams(
    grid: QuantizedGrid,
    support: AngleSupport,
    min_beams: int,
    max_beams: int,
    per_axis: int = 96,
) -> list[tuple[float, float]]:
    """Grid pairs whose cell intersects the support, clamped to [min, max].

    Each pair covers a cell of size 2/M_x x 2/M_y; intersection is detected by
    dense sampling of the support and pairs are ordered by descending overlap
    (sample hits), ties by grid index. Pairs whose grid point falls outside
    the unit disk are never returned since they map to no physical direction.
    If fewer than ``min_beams`` cells intersect, the nearest disk-interior
    pairs (euclidean distance in cosine space to the support) fill the
    deficit.
    """
    m_x, m_y = grid.shape
    pts = support_points(support, per_axis)
    ix = np.clip(np.floor((pts[:, 0] + 1.0) * m_x / 2.0).astype(int), 0, m_x - 1)
    iy = np.clip(np.floor((pts[:, 1] + 1.0) * m_y / 2.0).astype(int), 0, m_y - 1)
    counts = np.zeros((m_x, m_y), dtype=int)
    np.add.at(counts, (ix, iy), 1)

    lx = np.asarray(grid.lambda_x)
    ly = np.asarray(grid.lambda_y)
    in_disk = (lx[:, None] ** 2 + ly[None, :] ** 2) <= 1.0 + 1e-12

    hits = [
        (-counts[u, k], u, k)
        for u in range(m_x)
        for k in range(m_y)
        if counts[u, k] > 0 and in_disk[u, k]
    ]
    hits.sort()
    selected = [(u, k) for _, u, k in hits[:max_beams]]

    if len(selected) < min_beams:
        chosen = set(selected)
        rest = []
        for u in range(m_x):
            for k in range(m_y):
                if (u, k) in chosen or not in_disk[u, k]:
                    continue
                d = np.min(np.hypot(pts[:, 0] - lx[u], pts[:, 1] - ly[k]))
                rest.append((d, u, k))
        rest.sort()
        selected.extend((u, k) for _, u, k in rest[: min_beams - len(selected)])

    return [(float(lx[u]), float(ly[k])) for u, k in selected]


def rf_steering_column(
    lam_x: float, lam_y: float, m_x: int, m_y: int, spacing: float
) -> np.ndarray:
    """Constant-modulus beam for one cosine pair, per-entry modulus 1/sqrt(M).

    Phases are +2*pi*d*(m_x*lam_x + m_y*lam_y) so the beam coherently matches
    a propagation steering vector at the same direction cosines.
    """
    if lam_x**2 + lam_y**2 > 1.0 + 1e-12:
        raise InvalidBeamError(f"cosine pair ({lam_x}, {lam_y}) outside the unit disk")
    px = np.exp(2j * np.pi * spacing * np.arange(m_x) * lam_x)
    py = np.exp(2j * np.pi * spacing * np.arange(m_y) * lam_y)
    return np.kron(px, py) / math.sqrt(m_x * m_y)


def rf_stages(
    beams_tx: list[tuple[float, float]],
    beams_rx: list[tuple[float, float]],
    tx_shape: tuple[int, int],
    rx_shape: tuple[int, int],
    spacing: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Analog precoder F1 (num_tx x n_tx) and combiner F2 (n_rx x num_rx).

    F2 rows are plain transposes (no conjugation) of the receive beams, which
    pairs them coherently with arriving steering vectors.
    """
    if not beams_tx or not beams_rx:
        raise ValueError("beam lists must be nonempty")
    f1 = np.column_stack(
        [rf_steering_column(lx, ly, tx_shape[0], tx_shape[1], spacing) for lx, ly in beams_tx]
    )
    f2 = np.vstack(
        [rf_steering_column(lx, ly, rx_shape[0], rx_shape[1], spacing) for lx, ly in beams_rx]
    )
    return f1, f2


def platform_support(
    node_position,
    node_boresight,
    geometry: DeploymentGeometry,
    spread_el: float,
    spread_az: float,
    departure: bool,
) -> AngleSupport:
    """Angular support covering the whole movable platform plus path spread.

    The analog stage stays fixed while the RIS moves, so its support must
    span every platform position the search may visit, not just the
    reference center. Azimuths are unwrapped around the center direction to
    keep the interval contiguous.
    """
    cx, cy = geometry.platform_center()
    x0, x1 = geometry.platform_x_range
    y0, y1 = geometry.platform_y_range
    z = geometry.ris_height_m
    anchors = [(cx, cy, z), (x0, y0, z), (x0, y1, z), (x1, y0, z), (x1, y1, z)]

    def link_pair(anchor):
        if departure:
            m = mean_angles_from_geometry(node_position, anchor, node_boresight, DOWN)
            return m.dep_elevation, m.dep_azimuth
        m = mean_angles_from_geometry(anchor, node_position, DOWN, node_boresight)
        return m.arr_elevation, m.arr_azimuth

    center_el, center_az = link_pair(anchors[0])
    els, azs = [], []
    for anchor in anchors:
        el, az = link_pair(anchor)
        els.append(el)
        azs.append(center_az + math.remainder(az - center_az, 2.0 * math.pi))
    return AngleSupport(
        (min(els) - spread_el, max(els) + spread_el),
        (min(azs) - spread_az, max(azs) + spread_az),
    )


def design_rf_stages(
    config: SystemConfig, geometry: DeploymentGeometry
) -> tuple[np.ndarray, np.ndarray]:
    """RF stages for both link ends, covering the platform's angular footprint.

    The analog beams are built once from slowly varying angular statistics
    (platform extent widened by the configured spreads) and stay fixed while
    the RIS moves.
    """
    spread_el = math.radians(config.angular_spread_deg[0])
    spread_az = math.radians(config.angular_spread_deg[1])
    support_tx = platform_support(
        geometry.tx_position, UP, geometry, spread_el, spread_az, departure=True
    )
    support_rx = platform_support(
        geometry.ue_position, UP, geometry, spread_el, spread_az, departure=False
    )
    beams_tx = select_beams(
        build_grid(*config.tx_antennas),
        support_tx,
        config.num_streams,
        min(config.max_rf_chains, config.num_tx),
    )
    beams_rx = select_beams(
        build_grid(*config.rx_antennas),
        support_rx,
        config.num_streams,
        min(config.max_rf_chains, config.num_rx),
    )
    return rf_stages(beams_tx, beams_rx, config.tx_antennas, config.rx_antennas,
                     config.element_spacing_wavelengths)


def effective_channel(f2: np.ndarray, h: np.ndarray, f1: np.ndarray) -> EffectiveChannel:
    """Reduced channel F2 H F1 with a deterministically phased SVD.

    Each right singular vector's first non-negligible entry is rotated to be
    real-positive (the matching left vector absorbs the conjugate), so
    repeated factorizations of the same matrix are identical.
    """
    mat = f2 @ h @ f1
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    for k in range(s.shape[0]):
        v = vh[k]
        nz = np.flatnonzero(np.abs(v) > 1e-12 * max(1.0, float(np.abs(v).max())))
        if nz.size == 0:
            continue
        c = v[nz[0]] / abs(v[nz[0]])
        vh[k] *= np.conj(c)
        u[:, k] *= c
    tol = max(mat.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return EffectiveChannel(mat, u, s, vh, rank)


def bb_stages(
    eff: EffectiveChannel,
    tx_power_w: float,
    num_streams: int,
    f1: np.ndarray | None = None,
) -> BbStages:
    """Digital precoder/combiner from the dominant singular subspace.

    B1 = sqrt(P_T/N_S) * V_1 and B2 = U_1^H. When ``f1`` is supplied, B1 is
    rescaled by a single scalar so that the transmit power ||F1 B1||_F^2
    equals P_T exactly even for non-orthogonal analog beams (the factor is 1
    to machine precision at half-wavelength spacing). Rank-deficient
    channels degrade to rank-many streams and are flagged, not resampled.
    """
    streams = num_streams
    rank_deficient = eff.rank < num_streams
    if rank_deficient:
        streams = max(eff.rank, 1)
    v1 = eff.vh[:streams].conj().T
    u1 = eff.u[:, :streams]
    b1 = math.sqrt(tx_power_w / streams) * v1
    b2 = u1.conj().T
    if f1 is not None:
        actual = float(np.linalg.norm(f1 @ b1) ** 2)
        if actual > 0.0:
            b1 = b1 * math.sqrt(tx_power_w / actual)
    return BbStages(b1, b2, streams, rank_deficient)


def achievable_rate(
    bf: BeamformerSet, eff: EffectiveChannel, noise_power_w: float
) -> float:
    """Spectral efficiency in bps/Hz of the combined two-stage link.

    R = log2 det(I + W^-1 (B2 Heff B1)(B2 Heff B1)^H) with the noise
    covariance W = sigma^2 B2 F2 F2^H B2^H. Ill-conditioned W falls back to
    a whitened eigenvalue evaluation; a singular W is ridge-regularized at
    1e-12 relative to its trace.
    """
    b2f2 = bf.b2 @ bf.f2
    w = noise_power_w * (b2f2 @ b2f2.conj().T)
    g = bf.b2 @ eff.matrix @ bf.b1
    q = g @ g.conj().T

    trace = float(np.trace(w).real)
    if trace <= 0.0 or not np.isfinite(trace):
        logger.warning("noise covariance degenerate; applying ridge")
        w = w + 1e-12 * np.eye(w.shape[0])
        trace = float(np.trace(w).real)

    cond = np.linalg.cond(w)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        # ridge proportional to the noise scale, then whitened eigenvalues
        ridge = 1e-12 * trace / w.shape[0]
        w = w + ridge * np.eye(w.shape[0])
        evals, evecs = np.linalg.eigh(w)
        evals = np.maximum(evals, ridge)
        w_isqrt = (evecs / np.sqrt(evals)) @ evecs.conj().T
        s = w_isqrt @ q @ w_isqrt.conj().T
        lam = np.maximum(np.linalg.eigvalsh(0.5 * (s + s.conj().T)), 0.0)
        return float(np.sum(np.log2(1.0 + lam)))

    m = np.eye(w.shape[0]) + np.linalg.solve(w, q)
    _, logdet = np.linalg.slogdet(m)
    return max(float(logdet / math.log(2.0)), 0.0)


def hybrid_link_rate(
    f2: np.ndarray,
    h: np.ndarray,
    f1: np.ndarray,
    tx_power_w: float,
    num_streams: int,
    noise_power_w: float,
) -> tuple[float, bool]:
    """Full pipeline for one channel matrix: returns (rate, rank_deficient)."""
    eff = effective_channel(f2, h, f1)
    bb = bb_stages(eff, tx_power_w, num_streams, f1)
    bf = BeamformerSet(f1, bb.b1, f2, bb.b2, bb.streams, bb.rank_deficient)
    return achievable_rate(bf, eff, noise_power_w), bb.rank_deficient
