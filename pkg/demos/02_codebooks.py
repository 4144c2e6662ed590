"""Inspect the DFT codebooks and the phase-dependent amplitude model.

Run:  python3 demos/02_codebooks.py        (writes demos/output/amplitude.png)
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ris_beamsel import (
    RisProfile,
    amplitude_response,
    build_ideal_codebook,
    build_practical_codebook,
)

profile = RisProfile(beta_min=0.2, alpha=1.6, psi_zero=0.43 * np.pi, n_h=9, n_v=5)

print("== Amplitude response beta(psi) ==")
psi = np.linspace(-np.pi, np.pi, 721)
beta = amplitude_response(profile, psi)
print(f"minimum {beta.min():.3f} at psi = {psi[beta.argmin()] / np.pi:.2f} pi")
print(f"maximum {beta.max():.3f} at psi = {psi[beta.argmax()] / np.pi:.2f} pi")
print("alpha = 0 recovers the ideal unit amplitude:",
      np.all(amplitude_response(RisProfile(0.2, 0.0, profile.psi_zero, 9, 5), psi) == 1.0))

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)
fig, ax = plt.subplots(figsize=(6, 4))
for alpha in (0.0, 0.8, 1.6, 3.0):
    curve = amplitude_response(RisProfile(0.2, alpha, profile.psi_zero, 9, 5), psi)
    ax.plot(psi / np.pi, np.broadcast_to(curve, psi.shape), label=f"alpha = {alpha}")
ax.set_xlabel("phase shift psi (multiples of pi)")
ax.set_ylabel("amplitude beta")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "amplitude.png", dpi=110)
print(f"wrote {out_dir / 'amplitude.png'}")

print("\n== Ideal codebook: 45 orthogonal beams on the quantized angle grid ==")
ideal = build_ideal_codebook(profile)
gram = ideal.codewords.conj() @ ideal.codewords.T
off = np.abs(gram - np.diag(np.diag(gram))).max()
print(f"{len(ideal)} codewords of length {ideal.codewords.shape[1]};"
      f" largest off-diagonal inner product {off:.2e}")

print("\n== Practical codebook: same phases, amplitude follows each element's phase ==")
practical = build_practical_codebook(profile)
moduli = np.abs(practical.codewords)
print(f"element moduli span [{moduli.min():.3f}, {moduli.max():.3f}]"
      f" (ideal codebook is exactly 1.0 everywhere)")
print("mean power per practical codeword:", float(np.mean(moduli**2)))
