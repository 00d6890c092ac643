import pytest

from cellforge.kernel import KernelConfig


@pytest.fixture
def cfg() -> KernelConfig:
    return KernelConfig(seed=1234)
