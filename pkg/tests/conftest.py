import numpy as np
import pytest

from qdcsim.topology import ResourceInventory, build_clos, build_rack_star


@pytest.fixture
def inv():
    return ResourceInventory()


@pytest.fixture
def clos_small(inv):
    """Clos n=4 with 2 QPUs per rack: 8 QPUs, 10 switches, 4 racks."""
    return build_clos(4, 2, inv)


@pytest.fixture
def two_rack_star():
    """Two racks of three QPUs behind one core switch, one BSM per switch."""
    return build_rack_star(2, 1, 3, ResourceInventory(
        comm_qubits=2, data_qubits=1, bsm_count=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
