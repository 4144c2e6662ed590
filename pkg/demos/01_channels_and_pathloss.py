"""Walk through the channel model: steering vectors, path loss, Rician mixing.

Run:  python3 demos/01_channels_and_pathloss.py
"""

import dataclasses

import numpy as np

from ris_beamsel import (
    LinkGeometry,
    SystemConfig,
    path_loss_linear,
    sample_channel_pair,
    sample_path_angles,
    steering_vector,
    tx_channel,
)

system = SystemConfig(n_tx=10, n_rx=2, n_h=9, n_v=5, tx_power_dbm=20.0, noise_power_dbm=-80.0)
geom_t = LinkGeometry(rician_k=10.0, n_nlos_paths=2, pathloss_exponent=2.0, distance_m=10.0)
geom_r = LinkGeometry(rician_k=10.0, n_nlos_paths=2, pathloss_exponent=2.8, distance_m=30.0)

print("== Steering vectors ==")
print("a_4(pi/2) =", np.round(steering_vector(4, np.pi / 2), 3))
print("every element has unit modulus:", np.allclose(np.abs(steering_vector(16, 1.234)), 1.0))

print("\n== Path loss (linear power gain, includes the RIS aperture gain) ==")
for d in (1, 10, 30, 100):
    gain = path_loss_linear(dataclasses.replace(geom_r, distance_m=d))
    print(f"  d_r = {d:>3} m  ->  {gain:.3e}  ({10 * np.log10(gain):.1f} dB)")

print("\n== One channel realization ==")
rng = np.random.default_rng(0)
pair = sample_channel_pair(system, geom_t, geom_r, rng)
print("H_t shape (RIS x TX):", pair.h_t.shape)
print("H_r^H shape (RX x RIS):", pair.h_r_herm.shape)
print("transmit-side singular values:", np.round(np.linalg.svd(pair.h_t, compute_uv=False)[:4], 6))

print("\n== Rician factor controls how close the link is to a pure beam ==")
for k in (0.1, 10.0, 1e6):
    geom = dataclasses.replace(geom_t, rician_k=k)
    h = tx_channel(system, geom, sample_path_angles(np.random.default_rng(1), 2))
    sv = np.linalg.svd(h, compute_uv=False)
    print(f"  K = {k:>9g}:  sigma_2 / sigma_1 = {sv[1] / sv[0]:.2e}")

print("\nLarger K suppresses the scattered paths, so the matrix collapses toward rank one.")
