"""Rician mmWave channel synthesis for a transmitter-RIS-receiver link.

The transmitter and receiver are uniform linear arrays, the RIS is a
uniform planar array with ``n_h`` columns and ``n_v`` rows (N = n_h * n_v
elements). Each link (transmitter to RIS, RIS to receiver) is a Rician
mixture of a line-of-sight term and ``L`` non-line-of-sight terms, every
term an outer product of array steering vectors, scaled by a distance
power law.

Transmit-side phase progressions for path l:
    theta_t = 2*pi*(d/lambda)*sin(aod_tx)
    phi_h   = 2*pi*(d/lambda)*sin(azimuth_aoa_ris)
    phi_v   = 2*pi*(d/lambda)*sin(elevation_aoa_ris)
with the RIS vector a_{n_h}(phi_h) kron a_{n_v}(phi_v).

Receive-side phase progressions for path l:
    theta_r = 2*pi*(d/lambda)*sin(aoa_rx)
    phi_v   = 2*pi*(d/lambda)*sin(elevation_aod_ris)
    phi_h   = 2*pi*(d/lambda)*cos(elevation_aod_ris)*sin(azimuth_aod_ris)
with the RIS vector a_{n_v}(phi_v) kron a_{n_h}(phi_h). The two sides
deliberately use different Kronecker orders and the cosine factor appears
only on the receive side; both are kept exactly as modelled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Array sizes and link budget shared by every simulation stage."""

    n_tx: int
    n_rx: int
    n_h: int
    n_v: int
    tx_power_dbm: float
    noise_power_dbm: float
    antenna_spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "n_h", "n_v"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.antenna_spacing_over_wavelength <= 0:
            raise ValueError("antenna_spacing_over_wavelength must be positive")

    @property
    def n_ris(self) -> int:
        return self.n_h * self.n_v

    @property
    def snr_linear(self) -> float:
        """Transmit power over noise power, linear units (dBm difference)."""
        return 10.0 ** ((self.tx_power_dbm - self.noise_power_dbm) / 10.0)


@dataclass(frozen=True)
class LinkGeometry:
    """Propagation parameters of one hop (transmitter-RIS or RIS-receiver)."""

    rician_k: float
    n_nlos_paths: int
    pathloss_exponent: float
    distance_m: float
    ref_pathloss_db: float = -30.0
    ref_distance_m: float = 1.0
    ris_gain_db: float = 5.0

    def __post_init__(self):
        if self.rician_k < 0:
            raise ValueError("rician_k must be >= 0")
        if self.n_nlos_paths < 0:
            raise ValueError("n_nlos_paths must be >= 0")
        if self.distance_m <= 0:
            raise ValueError("distance_m must be positive")
        if self.ref_distance_m <= 0:
            raise ValueError("ref_distance_m must be positive")


@dataclass(frozen=True)
class PathAngles:
    """Per-path angles for one link, index 0 being the line-of-sight path.

    All angle arrays have length L+1; ``nlos_gain`` has length L and holds
    the complex fading gains of the non-line-of-sight paths.
    """

    aod_tx: np.ndarray
    azimuth_aoa_ris: np.ndarray
    elevation_aoa_ris: np.ndarray
    aoa_rx: np.ndarray
    azimuth_aod_ris: np.ndarray
    elevation_aod_ris: np.ndarray
    nlos_gain: np.ndarray

    @property
    def n_nlos(self) -> int:
        return len(self.nlos_gain)


@dataclass(frozen=True)
class ChannelPair:
    """One realization of both hops.

    ``h_t`` is the transmitter-to-RIS matrix (N x n_tx); ``h_r_herm`` is
    the RIS-to-receiver matrix in its conjugate-transposed form
    (n_rx x N), which is the orientation every consumer needs.
    """

    h_t: np.ndarray
    h_r_herm: np.ndarray
    angles_t: PathAngles
    angles_r: PathAngles
    seed: int = -1


def steering_vector(n: int, theta: float) -> np.ndarray:
    """Length-n steering vector with element k equal to exp(-1j*k*theta)."""
    if n < 1:
        raise ValueError(f"steering vector length must be >= 1, got {n}")
    return np.exp(-1j * theta * np.arange(n))


def path_loss_linear(geom: LinkGeometry) -> float:
    """Linear power gain of one hop, including the RIS aperture gain.

    dB budget: ref_pathloss_db - 10*exponent*log10(d/ref_distance) + ris_gain_db.
    """
    loss_db = (
        geom.ref_pathloss_db
        - 10.0 * geom.pathloss_exponent * np.log10(geom.distance_m / geom.ref_distance_m)
        + geom.ris_gain_db
    )
    return float(10.0 ** (loss_db / 10.0))


def sample_path_angles(rng: np.random.Generator, n_nlos: int) -> PathAngles:
    """Draw one set of path angles and fading gains.

    Angles are i.i.d. uniform on [0, pi]. Gains are complex Gaussian with
    zero mean and variance 1/L per path, so the L gains carry unit power
    in total. Draw order is fixed: the six angle families first (one block
    of shape (6, L+1)), then the real and imaginary gain parts.
    """
    angles = rng.uniform(0.0, np.pi, size=(6, n_nlos + 1))
    if n_nlos > 0:
        scale = np.sqrt(1.0 / (2.0 * n_nlos))
        re_im = rng.standard_normal(size=(2, n_nlos))
        gains = scale * (re_im[0] + 1j * re_im[1])
    else:
        gains = np.zeros(0, dtype=complex)
    return PathAngles(
        aod_tx=angles[0],
        azimuth_aoa_ris=angles[1],
        elevation_aoa_ris=angles[2],
        aoa_rx=angles[3],
        azimuth_aod_ris=angles[4],
        elevation_aod_ris=angles[5],
        nlos_gain=gains,
    )


def _tx_path_term(config: SystemConfig, aod_tx, az_aoa, el_aoa) -> np.ndarray:
    """Single-path transmit-side term, shape (N, n_tx)."""
    c = 2.0 * np.pi * config.antenna_spacing_over_wavelength
    a_ris = np.kron(
        steering_vector(config.n_h, c * np.sin(az_aoa)),
        steering_vector(config.n_v, c * np.sin(el_aoa)),
    )
    a_tx = steering_vector(config.n_tx, c * np.sin(aod_tx))
    return np.outer(a_ris.conj(), a_tx)


def _rx_path_term(config: SystemConfig, aoa_rx, az_aod, el_aod) -> np.ndarray:
    """Single-path receive-side term, shape (n_rx, N)."""
    c = 2.0 * np.pi * config.antenna_spacing_over_wavelength
    a_ris = np.kron(
        steering_vector(config.n_v, c * np.sin(el_aod)),
        steering_vector(config.n_h, c * np.cos(el_aod) * np.sin(az_aod)),
    )
    a_rx = steering_vector(config.n_rx, c * np.sin(aoa_rx))
    return np.outer(a_rx.conj(), a_ris)


def _rician_mix(los: np.ndarray, nlos: np.ndarray, k: float, loss: float) -> np.ndarray:
    return np.sqrt(loss) * (np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos)


def tx_channel(config: SystemConfig, geom: LinkGeometry, angles: PathAngles) -> np.ndarray:
    """Transmitter-to-RIS matrix (N x n_tx) from one angle realization."""
    if angles.n_nlos != geom.n_nlos_paths:
        raise ValueError(
            f"angles carry {angles.n_nlos} NLoS paths, geometry expects {geom.n_nlos_paths}"
        )
    los = _tx_path_term(config, angles.aod_tx[0], angles.azimuth_aoa_ris[0], angles.elevation_aoa_ris[0])
    nlos = np.zeros_like(los)
    for l in range(1, angles.n_nlos + 1):
        nlos += angles.nlos_gain[l - 1] * _tx_path_term(
            config, angles.aod_tx[l], angles.azimuth_aoa_ris[l], angles.elevation_aoa_ris[l]
        )
    return _rician_mix(los, nlos, geom.rician_k, path_loss_linear(geom))


def rx_channel(config: SystemConfig, geom: LinkGeometry, angles: PathAngles) -> np.ndarray:
    """RIS-to-receiver matrix in conjugate-transposed form (n_rx x N)."""
    if angles.n_nlos != geom.n_nlos_paths:
        raise ValueError(
            f"angles carry {angles.n_nlos} NLoS paths, geometry expects {geom.n_nlos_paths}"
        )
    los = _rx_path_term(config, angles.aoa_rx[0], angles.azimuth_aod_ris[0], angles.elevation_aod_ris[0])
    nlos = np.zeros_like(los)
    for l in range(1, angles.n_nlos + 1):
        nlos += angles.nlos_gain[l - 1] * _rx_path_term(
            config, angles.aoa_rx[l], angles.azimuth_aod_ris[l], angles.elevation_aod_ris[l]
        )
    return _rician_mix(los, nlos, geom.rician_k, path_loss_linear(geom))


def sample_channel_pair(
    config: SystemConfig,
    geom_t: LinkGeometry,
    geom_r: LinkGeometry,
    rng: np.random.Generator,
    seed: int = -1,
) -> ChannelPair:
    """Draw both hops of one realization from a single random stream.

    The two links use independent angle and gain draws (transmit link
    first). ``seed`` is a provenance tag stored on the result; pass the
    substream index when generating datasets.
    """
    angles_t = sample_path_angles(rng, geom_t.n_nlos_paths)
    angles_r = sample_path_angles(rng, geom_r.n_nlos_paths)
    return ChannelPair(
        h_t=tx_channel(config, geom_t, angles_t),
        h_r_herm=rx_channel(config, geom_r, angles_r),
        angles_t=angles_t,
        angles_r=angles_r,
        seed=seed,
    )
