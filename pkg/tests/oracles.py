"""Independent straight-line re-implementations used as test oracles.

Everything here is written as plainly as possible (explicit element
loops, no shared helpers with the package) so that agreement with the
production code is meaningful.
"""

import numpy as np


def naive_steering(n, theta):
    return np.array([np.cos(k * theta) - 1j * np.sin(k * theta) for k in range(n)])


def naive_path_loss(geom):
    db = geom.ref_pathloss_db
    db -= 10.0 * geom.pathloss_exponent * np.log10(geom.distance_m / geom.ref_distance_m)
    db += geom.ris_gain_db
    return 10.0 ** (db / 10.0)


def naive_tx_channel(system, geom, angles):
    """Element-by-element evaluation of the transmitter-to-RIS model."""
    c = 2.0 * np.pi * system.antenna_spacing_over_wavelength
    n = system.n_h * system.n_v
    k_fac = geom.rician_k

    def path_term(l):
        theta_t = c * np.sin(angles.aod_tx[l])
        phi_h = c * np.sin(angles.azimuth_aoa_ris[l])
        phi_v = c * np.sin(angles.elevation_aoa_ris[l])
        a_h = naive_steering(system.n_h, phi_h)
        a_v = naive_steering(system.n_v, phi_v)
        a_t = naive_steering(system.n_tx, theta_t)
        term = np.zeros((n, system.n_tx), dtype=complex)
        for p in range(system.n_h):
            for q in range(system.n_v):
                for m in range(system.n_tx):
                    term[p * system.n_v + q, m] = np.conj(a_h[p] * a_v[q]) * a_t[m]
        return term

    los = path_term(0)
    nlos = np.zeros((n, system.n_tx), dtype=complex)
    for l in range(1, geom.n_nlos_paths + 1):
        nlos = nlos + angles.nlos_gain[l - 1] * path_term(l)
    mixed = np.sqrt(k_fac / (k_fac + 1)) * los + np.sqrt(1 / (k_fac + 1)) * nlos
    return np.sqrt(naive_path_loss(geom)) * mixed


def naive_rx_channel(system, geom, angles):
    """Element-by-element evaluation of the RIS-to-receiver model."""
    c = 2.0 * np.pi * system.antenna_spacing_over_wavelength
    n = system.n_h * system.n_v
    k_fac = geom.rician_k

    def path_term(l):
        theta_r = c * np.sin(angles.aoa_rx[l])
        phi_v = c * np.sin(angles.elevation_aod_ris[l])
        phi_h = c * np.cos(angles.elevation_aod_ris[l]) * np.sin(angles.azimuth_aod_ris[l])
        a_v = naive_steering(system.n_v, phi_v)
        a_h = naive_steering(system.n_h, phi_h)
        a_r = naive_steering(system.n_rx, theta_r)
        term = np.zeros((system.n_rx, n), dtype=complex)
        for r in range(system.n_rx):
            for q in range(system.n_v):
                for p in range(system.n_h):
                    term[r, q * system.n_h + p] = np.conj(a_r[r]) * a_v[q] * a_h[p]
        return term

    los = path_term(0)
    nlos = np.zeros((system.n_rx, n), dtype=complex)
    for l in range(1, geom.n_nlos_paths + 1):
        nlos = nlos + angles.nlos_gain[l - 1] * path_term(l)
    mixed = np.sqrt(k_fac / (k_fac + 1)) * los + np.sqrt(1 / (k_fac + 1)) * nlos
    return np.sqrt(naive_path_loss(geom)) * mixed


def naive_rate(h_t, h_r_herm, codeword, snr_linear):
    """Rate of one codeword via an explicit diagonal product and SVD."""
    h_eff = h_r_herm @ np.diag(codeword) @ h_t
    sv = np.linalg.svd(h_eff, compute_uv=False)
    if sv[0] <= 0:
        return 0.0
    active = [s for s in sv if s > 1e-10 * sv[0]]
    ns = len(active)
    return float(sum(np.log2(1.0 + snr_linear * s**2 / ns) for s in active))


def naive_exhaustive_search(h_t, h_r_herm, codewords, snr_linear):
    """Double-loop search returning (best index, best rate)."""
    best_idx, best_rate = -1, -np.inf
    for idx in range(len(codewords)):
        rate = naive_rate(h_t, h_r_herm, codewords[idx], snr_linear)
        if rate > best_rate:
            best_idx, best_rate = idx, rate
    return best_idx, best_rate
