import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from splitkit import Runtime, make_ctx

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the numba kernels once so timings elsewhere are not skewed
    from splitkit import _kernels
    _kernels.warm_up()


@pytest.fixture(scope="module")
def rt1():
    rt = Runtime(1)
    yield rt
    rt.close()


@pytest.fixture(scope="module")
def rt2():
    rt = Runtime(2)
    yield rt
    rt.close()


@pytest.fixture(scope="module")
def rt4():
    rt = Runtime(4)
    yield rt
    rt.close()


@pytest.fixture
def ctx1(rt1):
    return make_ctx(rt1)


@pytest.fixture
def ctx2(rt2):
    return make_ctx(rt2)


@pytest.fixture
def ctx4(rt4):
    return make_ctx(rt4)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one verdict line per validation gate, independent of capture settings
    rows = {}
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                note = ""
                if status == "skipped":
                    longrepr = getattr(rep, "longrepr", None)
                    if isinstance(longrepr, tuple) and len(longrepr) == 3:
                        note = "  (" + str(longrepr[2]).removeprefix("Skipped: ") + ")"
                if status != "passed" or getattr(rep, "when", "call") == "call":
                    rows.setdefault(name, f"{status.upper():8s} {name}{note}")
    if rows:
        terminalreporter.section("validation gates")
        for name in sorted(rows):
            terminalreporter.write_line(rows[name])
