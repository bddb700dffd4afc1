import pytest

from descriptions import LogicSpec


@pytest.fixture
def mlj():
    return LogicSpec.intuitionistic()


@pytest.fixture
def k():
    return LogicSpec.preset("k")


@pytest.fixture
def kt():
    return LogicSpec.preset("kt")


@pytest.fixture
def s4():
    return LogicSpec.preset("s4")


@pytest.fixture
def kd():
    return LogicSpec.preset("kd")


@pytest.fixture
def bimodal():
    return LogicSpec.preset("bimodal")


@pytest.fixture
def logic_e():
    return LogicSpec.non_normal_e()


@pytest.fixture
def logic_m():
    return LogicSpec.non_normal_m()
