import pytest

from mtsnn.netmodels.chainfire import ChainfireConfig, build_chainfire


@pytest.fixture(scope="session")
def chainfire_small():
    # 4 clusters x 100 neurons; wave visits every neuron once per period
    return build_chainfire(ChainfireConfig(n=100))


@pytest.fixture(scope="session")
def chainfire_2k():
    return build_chainfire(ChainfireConfig())


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
