import pytest

from kuranishi.ainfty import AInftyStructure
from kuranishi.cyclic import frobenius_cyclic
from kuranishi.frobenius import exterior_algebra, poincare_algebra
from kuranishi.graded_core import GradedModule, MultilinearMap

from .support import E, element


@pytest.fixture
def uv_module():
    return GradedModule([("u", 1), ("v", 2)])


@pytest.fixture
def uv_toy(uv_module):
    """m_0(1) = T v and m_2(u, u) = -v."""
    m0 = MultilinearMap(uv_module, 0, 2, {(): element(uv_module, v="1*T^(1)")}, E)
    m2 = MultilinearMap(uv_module, 2, 0, {("u", "u"): element(uv_module, v="-1")}, E)
    return AInftyStructure(uv_module, {0: m0, 2: m2}, 6, E)


@pytest.fixture(scope="module")
def torus():
    return frobenius_cyclic(exterior_algebra(4), k_max=6, cutoff=3)


@pytest.fixture(scope="module")
def definite():
    return frobenius_cyclic(poincare_algebra((1, 1, 1, 1, 1), [[1]], [[1]]), k_max=5, cutoff=3)
