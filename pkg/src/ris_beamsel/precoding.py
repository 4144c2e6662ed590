"""Effective channels, SVD precoding rates, and codeword selection.

For a channel pair (H_t, H_r^H) and an RIS response vector phi, the
effective channel is H_r^H diag(phi) H_t. Its SVD gives the optimal
precoder (the right singular vectors) and the achievable rate

    R = sum_c log2(1 + rho * tau_c^2 / n_streams),    rho = P / sigma^2,

with equal power split across the active streams. The determinant form
log2 |I + (rho / n_streams) F^H H^H H F| is kept as an independent route
to the same number and as the rate of an arbitrary precoder F.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelPair, SystemConfig
from .codebook import Codebook

# A singular value counts as a stream if it exceeds this fraction of the
# largest one; only guards degenerate draws, generic channels keep full rank.
RANK_TOLERANCE = 1e-10

# Precoders may exceed the power budget by at most this much (numerics).
_POWER_SLACK = 1e-9


@dataclass(frozen=True)
class EffectiveChannel:
    """SVD view of one effective channel.

    ``singular_values`` holds all min(n_rx, n_tx) values in descending
    order; ``left_basis``/``right_basis`` are truncated to the
    ``n_streams`` columns that carry signal.
    """

    h_eff: np.ndarray
    singular_values: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    n_streams: int


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of picking one codeword for one realization."""

    codeword_index: int
    rate_bps_hz: float
    precoder: np.ndarray


@dataclass(frozen=True)
class FeatureMatrix:
    """Composite per-element channel coefficients, shape (N, n_rx * n_tx).

    Column (n, m) sits at index n * n_tx + m and holds the element-wise
    product of receive row n (already conjugated) and transmit column m,
    so phi^T @ h_cal reproduces the row-major flattening of the effective
    channel for any codeword phi.
    """

    h_cal: np.ndarray
    n_tx: int
    n_rx: int


def effective_channel(pair: ChannelPair, codeword: np.ndarray) -> EffectiveChannel:
    """Effective channel H_r^H diag(codeword) H_t with its SVD."""
    codeword = np.asarray(codeword)
    n = pair.h_t.shape[0]
    if codeword.shape != (n,):
        raise ValueError(f"codeword length {codeword.shape} does not match N={n}")
    if not (np.isfinite(pair.h_t).all() and np.isfinite(pair.h_r_herm).all() and np.isfinite(codeword).all()):
        raise ValueError("channel matrices and codeword must be finite")
    h_eff = (pair.h_r_herm * codeword[np.newaxis, :]) @ pair.h_t
    u, s, vh = np.linalg.svd(h_eff, full_matrices=False)
    n_streams = int(np.count_nonzero(s > RANK_TOLERANCE * s[0])) if s[0] > 0 else 0
    return EffectiveChannel(
        h_eff=h_eff,
        singular_values=s,
        left_basis=u[:, :n_streams],
        right_basis=vh[:n_streams].conj().T,
        n_streams=n_streams,
    )


def achievable_rate_svd(eff: EffectiveChannel, config: SystemConfig) -> float:
    """Rate of the SVD-optimal precoder in bits/s/Hz."""
    ns = eff.n_streams
    if ns == 0:
        return 0.0
    tau = eff.singular_values[:ns]
    return float(np.sum(np.log2(1.0 + config.snr_linear * tau**2 / ns)))


def achievable_rate_det(
    pair: ChannelPair,
    codeword: np.ndarray,
    precoder: np.ndarray,
    config: SystemConfig,
) -> float:
    """Determinant-form rate of an arbitrary precoder F (n_tx x n_s).

    Requires ||F||_F^2 <= n_s (equal total power budget). With F equal to
    the right singular basis this reproduces ``achievable_rate_svd``.
    """
    precoder = np.asarray(precoder)
    if precoder.ndim != 2 or precoder.shape[0] != pair.h_t.shape[1]:
        raise ValueError(f"precoder shape {precoder.shape} does not match n_tx")
    ns = precoder.shape[1]
    if ns == 0:
        return 0.0
    power = float(np.sum(np.abs(precoder) ** 2))
    if power > ns + _POWER_SLACK:
        raise ValueError(f"precoder power {power:.6g} exceeds budget {ns}")
    h_eff = (pair.h_r_herm * codeword[np.newaxis, :]) @ pair.h_t
    hf = h_eff @ precoder
    gram = hf.conj().T @ hf
    a = np.eye(ns) + (config.snr_linear / ns) * gram
    _, logdet = np.linalg.slogdet(a)
    return float(logdet / np.log(2.0))


def codeword_rates(pair: ChannelPair, codebook: Codebook, config: SystemConfig) -> np.ndarray:
    """SVD-precoder rate of every codeword at once.

    Vectorized bulk path used for dataset labeling and sweeps; agrees with
    per-codeword ``exhaustive_search`` evaluation exactly.
    """
    h_eff = np.einsum("cn,rn,nt->crt", codebook.codewords, pair.h_r_herm, pair.h_t)
    sv = np.linalg.svd(h_eff, compute_uv=False)
    leading = sv[:, :1]
    streams = sv > RANK_TOLERANCE * np.where(leading > 0, leading, np.inf)
    ns = streams.sum(axis=1)
    rates = np.zeros(len(codebook))
    active = ns > 0
    if np.any(active):
        per_stream = np.log2(1.0 + config.snr_linear * sv[active] ** 2 / ns[active, np.newaxis])
        rates[active] = np.where(streams[active], per_stream, 0.0).sum(axis=1)
    return rates


def exhaustive_search(pair: ChannelPair, codebook: Codebook, config: SystemConfig) -> SelectionResult:
    """Evaluate every codeword and return the rate maximizer.

    Ties go to the lowest index so labels are stable. The per-codeword
    work is one effective channel plus one SVD.
    """
    if len(codebook) == 0:
        raise ValueError("codebook is empty")
    best_index = -1
    best_rate = -np.inf
    best_eff = None
    for idx in range(len(codebook)):
        eff = effective_channel(pair, codebook.codewords[idx])
        rate = achievable_rate_svd(eff, config)
        if rate > best_rate:
            best_index, best_rate, best_eff = idx, rate, eff
    return SelectionResult(
        codeword_index=best_index,
        rate_bps_hz=best_rate,
        precoder=best_eff.right_basis,
    )


def random_select(
    pair: ChannelPair,
    codebook: Codebook,
    config: SystemConfig,
    rng: np.random.Generator,
) -> SelectionResult:
    """Pick a codeword uniformly at random and report its rate."""
    if len(codebook) == 0:
        raise ValueError("codebook is empty")
    idx = int(rng.integers(len(codebook)))
    eff = effective_channel(pair, codebook.codewords[idx])
    return SelectionResult(
        codeword_index=idx,
        rate_bps_hz=achievable_rate_svd(eff, config),
        precoder=eff.right_basis,
    )


def feature_matrix(pair: ChannelPair) -> FeatureMatrix:
    """Composite channel coefficients for the classifier input."""
    n_rx, n = pair.h_r_herm.shape
    n_tx = pair.h_t.shape[1]
    # [k, n*n_tx + m] = h_r_herm[n, k] * h_t[k, m]
    h_cal = (pair.h_r_herm.T[:, :, np.newaxis] * pair.h_t[:, np.newaxis, :]).reshape(n, n_rx * n_tx)
    return FeatureMatrix(h_cal=h_cal, n_tx=n_tx, n_rx=n_rx)


def feature_vector(fm: FeatureMatrix, scale: float = 1.0) -> np.ndarray:
    """Real input vector: all real parts, then all imaginary parts.

    Flattening is column-major over the documented column layout (element
    index within a column runs fastest); output length 2 * N * n_tx * n_rx.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    flat = fm.h_cal.ravel(order="F")
    return scale * np.concatenate([flat.real, flat.imag])


def calibration_scale(feature_rows: np.ndarray, n_calibration: int = 1000) -> float:
    """Reciprocal RMS magnitude of a calibration batch of feature vectors.

    Path loss leaves raw features many orders of magnitude below 1; a
    single global scale keeps the classifier input well conditioned. The
    constant is measured once at the training geometry and stored with
    the model.
    """
    batch = np.asarray(feature_rows)[:n_calibration]
    rms = float(np.sqrt(np.mean(np.square(batch, dtype=np.float64))))
    if rms == 0.0:
        raise ValueError("calibration batch has zero magnitude")
    return 1.0 / rms
