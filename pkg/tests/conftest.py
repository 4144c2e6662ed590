import numpy as np
import pytest

from ris_beamsel import LinkGeometry, RisProfile, SystemConfig


@pytest.fixture
def system():
    """Reference scenario array sizes (45-element RIS, 10x2 MIMO)."""
    return SystemConfig(
        n_tx=10,
        n_rx=2,
        n_h=9,
        n_v=5,
        tx_power_dbm=20.0,
        noise_power_dbm=-80.0,
    )


@pytest.fixture
def geometry_t():
    return LinkGeometry(
        rician_k=10.0,
        n_nlos_paths=2,
        pathloss_exponent=2.0,
        distance_m=10.0,
        ref_pathloss_db=-30.0,
        ref_distance_m=1.0,
        ris_gain_db=5.0,
    )


@pytest.fixture
def geometry_r():
    return LinkGeometry(
        rician_k=10.0,
        n_nlos_paths=2,
        pathloss_exponent=2.8,
        distance_m=30.0,
        ref_pathloss_db=-30.0,
        ref_distance_m=1.0,
        ris_gain_db=5.0,
    )


@pytest.fixture
def profile():
    return RisProfile(beta_min=0.2, alpha=1.6, psi_zero=0.43 * np.pi, n_h=9, n_v=5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
