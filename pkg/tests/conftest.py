import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wiretap_exponents.prob_core import Channel, Distribution, WiretapInstance  # noqa: E402

SPECS = Path(__file__).resolve().parent.parent / "specs"


def random_instance(rng, max_x=4, max_z=4, x_size=None, z_size=None, alpha=1.0):
    """Random full-support (P_X, V, W); V is W-shaped noise on a fresh matrix."""
    kx = x_size or int(rng.integers(2, max_x + 1))
    kz = z_size or int(rng.integers(2, max_z + 1))
    p_x = Distribution(rng.dirichlet(np.full(kx, alpha)))
    w = Channel(rng.dirichlet(np.full(kz, alpha), size=kx))
    v = Channel(rng.dirichlet(np.full(kz, alpha), size=kx))
    return WiretapInstance(p_x, v, w)


def bsc_instance(p=0.1, pv=0.05, rate=0.0, rate_prime=0.0):
    return WiretapInstance(Distribution.uniform(2), Channel.bsc(pv), Channel.bsc(p), rate, rate_prime)


def independent_instance(rate_prime=0.0):
    row = [0.3, 0.7]
    return WiretapInstance(Distribution.uniform(2), Channel.bsc(0.05), Channel([row, row]), 0.0, rate_prime)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def specs_dir():
    return SPECS
