import numpy as np
import pytest

from mrsampling.geometry import BoxDomain
from mrsampling.reconstruction import assemble_pack
from mrsampling.refinable import gp_mask
from mrsampling.sampling import SamplingSet
from mrsampling.spaces import build_interval_basis, tensor_basis

# strongly nonuniform: a close pair near 1.6 and wide gaps elsewhere
IRREGULAR_NODES = np.array([0.1, 0.9, 1.55, 1.6, 2.4, 3.2, 3.9])


@pytest.fixture(scope="session")
def cubic_basis():
    return build_interval_basis(gp_mask(3, 3), 0, (0, 4))


@pytest.fixture(scope="session")
def cubic_pack(cubic_basis):
    sset = SamplingSet(IRREGULAR_NODES, BoxDomain.interval(0, 4))
    return assemble_pack(cubic_basis, None, sset)


@pytest.fixture(scope="session")
def dense_pack(cubic_basis):
    nodes = np.linspace(0.05, 3.95, 16)
    return assemble_pack(cubic_basis, None, SamplingSet(nodes, BoxDomain.interval(0, 4)))


@pytest.fixture(scope="session")
def quad_tensor_basis():
    b = build_interval_basis(gp_mask(2, 2), 0, (0, 3))
    return tensor_basis(b, b)


@pytest.fixture(scope="session")
def pack_2d(quad_tensor_basis):
    rng = np.random.default_rng(0)
    dom = BoxDomain.square(0, 3)
    return assemble_pack(quad_tensor_basis, None, SamplingSet(dom.uniform(rng, 100), dom))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when not in ("setup", "call"):
        return
    number, title = marker.args
    outcomes = item.config._criteria.setdefault(number, {"title": title, "failed": False, "details": []})
    if call.excinfo is not None:
        outcomes["failed"] = True
    if call.when == "call":
        outcomes["details"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(criteria):
        c = criteria[number]
        line = f"criterion {number} {c['title']}: {'FAIL' if c['failed'] else 'PASS'}"
        if c["details"]:
            line += "  (" + "; ".join(c["details"]) + ")"
        terminalreporter.write_line(line)
