import pytest

import windfeas as wf


@pytest.fixture(scope="session")
def tesla() -> wf.ChargingProfile:
    return wf.load_charging_profile(wf.default_profile_path())


@pytest.fixture(scope="session")
def library() -> wf.TurbineLibrary:
    return wf.load_turbine_library(wf.bundled_library_path())


@pytest.fixture(scope="session")
def no16(library) -> wf.TurbineSpec:
    return library.get("no16")


@pytest.fixture(scope="session")
def sample_library() -> wf.TurbineLibrary:
    return wf.load_turbine_library(
        wf.bundled_library_path("turbines_sample.json"))
