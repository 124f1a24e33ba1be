import pathlib

import pytest

from perivir import IntegratorConfig

CONFIG_DIR = pathlib.Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def spectral_cfg():
    return IntegratorConfig.spectral()


@pytest.fixture(scope="session")
def sim_cfg():
    return IntegratorConfig.simulation()


@pytest.fixture(scope="session")
def config_dir():
    return CONFIG_DIR
