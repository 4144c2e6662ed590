"""RIS response codebooks on a DFT angle grid.

Codewords are Kronecker products of horizontal and vertical steering
vectors evaluated at quantized angles (spacing 2*pi/n_h and 2*pi/n_v), so
the ideal codebook is the column set of a DFT-matrix Kronecker product
and its codewords are mutually orthogonal. The practical codebook scales
each codeword element by a phase-dependent amplitude that models the
non-zero impedance of a real reflective circuit.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .channel import steering_vector

_MODE_CODES = {"ideal": 0, "practical": 1}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}


@dataclass(frozen=True)
class RisProfile:
    """Phase-dependent amplitude model of one RIS element plus array dims.

    beta_min is the amplitude floor, alpha the steepness of the
    amplitude-vs-phase curve, psi_zero the phase of minimum amplitude
    shifted by half a turn. alpha = 0 collapses to the ideal unit
    amplitude.
    """

    beta_min: float
    alpha: float
    psi_zero: float
    n_h: int
    n_v: int

    def __post_init__(self):
        if not 0.0 < self.beta_min <= 1.0:
            raise ValueError("beta_min must lie in (0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("n_h and n_v must be >= 1")

    @property
    def n_ris(self) -> int:
        return self.n_h * self.n_v


@dataclass(frozen=True)
class Codebook:
    """Ordered set of candidate RIS response vectors.

    ``codewords`` has shape (n_h * n_v, N). Codeword (i, j) over the
    horizontal/vertical quantization grid sits at flat index i * n_v + j
    (0-based, row-major); that layout is frozen because it defines the
    classifier's label space.
    """

    mode: str
    codewords: np.ndarray
    n_h: int
    n_v: int

    def __post_init__(self):
        if self.mode not in _MODE_CODES:
            raise ValueError(f"unknown codebook mode {self.mode!r}")
        if self.codewords.shape != (self.n_h * self.n_v, self.n_h * self.n_v):
            raise ValueError("codeword array shape does not match n_h * n_v")

    def __len__(self) -> int:
        return self.codewords.shape[0]

    @property
    def q_h(self) -> float:
        """Horizontal quantization spacing."""
        return 2.0 * np.pi / self.n_h

    @property
    def q_v(self) -> float:
        """Vertical quantization spacing."""
        return 2.0 * np.pi / self.n_v

    def flat_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.n_h and 0 <= j < self.n_v):
            raise ValueError(f"grid index ({i}, {j}) out of range")
        return i * self.n_v + j


def amplitude_response(profile: RisProfile, psi) -> np.ndarray | float:
    """Reflection amplitude for phase shift(s) ``psi`` in (-pi, pi].

    beta(psi) = (1 - beta_min) * ((sin(psi - psi_zero) + 1) / 2)**alpha + beta_min.
    Accepts scalars or arrays; alpha = 0 returns exactly 1.
    """
    psi = np.asarray(psi, dtype=float)
    if profile.alpha == 0.0:
        out = np.ones_like(psi)
    else:
        base = (np.sin(psi - profile.psi_zero) + 1.0) / 2.0
        out = (1.0 - profile.beta_min) * base**profile.alpha + profile.beta_min
    return out if out.ndim else float(out)


def build_ideal_codebook(profile: RisProfile) -> Codebook:
    """Unit-amplitude codebook over the quantized angle grid."""
    n_h, n_v = profile.n_h, profile.n_v
    q_h = 2.0 * np.pi / n_h
    q_v = 2.0 * np.pi / n_v
    codewords = np.empty((n_h * n_v, n_h * n_v), dtype=complex)
    for i in range(n_h):
        a_h = steering_vector(n_h, i * q_h)
        for j in range(n_v):
            codewords[i * n_v + j] = np.kron(a_h, steering_vector(n_v, j * q_v))
    return Codebook(mode="ideal", codewords=codewords, n_h=n_h, n_v=n_v)


def build_practical_codebook(profile: RisProfile) -> Codebook:
    """Ideal codebook with each element rescaled by its amplitude response.

    Element phases are taken as principal arguments in (-pi, pi] before
    evaluating the amplitude curve. Ordering matches the ideal codebook.
    """
    ideal = build_ideal_codebook(profile)
    beta = amplitude_response(profile, np.angle(ideal.codewords))
    return Codebook(
        mode="practical",
        codewords=beta * ideal.codewords,
        n_h=profile.n_h,
        n_v=profile.n_v,
    )


def ris_response_matrix(codeword: np.ndarray) -> np.ndarray:
    """Diagonal response matrix diag(codeword)."""
    codeword = np.asarray(codeword)
    if codeword.ndim != 1 or codeword.size < 1:
        raise ValueError(f"codeword must be a non-empty vector, got shape {codeword.shape}")
    return np.diag(codeword)


def label_layout_hash(codebook: Codebook) -> int:
    """Stable 64-bit fingerprint of the codebook's label space.

    Covers mode, grid dimensions and the flat-index layout convention, so
    a model trained against one codebook refuses labels from another.
    """
    desc = f"ris-codebook-v1|{codebook.mode}|{codebook.n_h}|{codebook.n_v}|row-major(i,j)"
    digest = hashlib.sha256(desc.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def codebook_to_bytes(codebook: Codebook) -> bytes:
    """Deterministic binary layout: mode/dims header, then interleaved
    real/imag little-endian float64 element pairs in flat-index order."""
    header = struct.pack("<BII", _MODE_CODES[codebook.mode], codebook.n_h, codebook.n_v)
    n_codes, n = codebook.codewords.shape
    body = np.empty((n_codes, n, 2), dtype="<f8")
    body[..., 0] = codebook.codewords.real
    body[..., 1] = codebook.codewords.imag
    return header + body.tobytes()


def codebook_from_bytes(raw: bytes) -> Codebook:
    mode_code, n_h, n_v = struct.unpack_from("<BII", raw, 0)
    if mode_code not in _MODE_NAMES:
        raise ValueError(f"unknown codebook mode code {mode_code}")
    n = n_h * n_v
    body = np.frombuffer(raw, dtype="<f8", offset=struct.calcsize("<BII"))
    if body.size != n * n * 2:
        raise ValueError("codebook byte payload has wrong length")
    body = body.reshape(n, n, 2)
    return Codebook(
        mode=_MODE_NAMES[mode_code],
        codewords=body[..., 0] + 1j * body[..., 1],
        n_h=n_h,
        n_v=n_v,
    )


def save_codebook(codebook: Codebook, path) -> None:
    with open(path, "wb") as fh:
        fh.write(codebook_to_bytes(codebook))


def load_codebook(path) -> Codebook:
    with open(path, "rb") as fh:
        return codebook_from_bytes(fh.read())
