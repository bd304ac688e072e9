import numpy as np
import pytest

from packrig import data_path
from packrig.packing_engine import load_packing
from packrig.rigidity_lab import build_jacobian, jacobian_rank_report
from packrig.surface_complex import load_complex


def fixture_complex(name):
    return load_complex(data_path(f"{name}.json"))


@pytest.fixture(scope="session")
def genus2():
    return fixture_complex("genus2")


@pytest.fixture(scope="session")
def octahedron():
    return fixture_complex("octahedron")


@pytest.fixture(scope="session")
def tetrahedron():
    return fixture_complex("tetrahedron")


@pytest.fixture(scope="session")
def torus7():
    return fixture_complex("torus7")


@pytest.fixture(scope="session")
def fuchsian():
    return load_packing(data_path("genus2_packing.json"))


@pytest.fixture(scope="session")
def model(fuchsian):
    return build_jacobian(fuchsian)


@pytest.fixture(scope="session")
def jreport(model):
    return jacobian_rank_report(model)


def random_moebius(rng, scale=1.0):
    """Random det-1 matrix with moderate condition number."""
    while True:
        B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        B = np.eye(2) + scale * B
        d = np.linalg.det(B)
        if abs(d) > 0.2 and np.linalg.cond(B) < 20:
            return B / np.sqrt(d)


def random_disk(rng):
    from packrig import moebius_geometry as mg
    c = complex(*rng.normal(size=2))
    X = mg.disk_from_center(c, float(rng.uniform(0.2, 2.0)))
    return X if rng.random() < 0.7 else -X


def random_sl2(rng):
    from packrig import moebius_geometry as mg
    return mg.sl2(*(rng.normal(size=3) + 1j * rng.normal(size=3)))


# --- acceptance summary -------------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if report.when == "call" or report.failed:
        prev = _acceptance.get(name, (True, 0.0))
        _acceptance[name] = (prev[0] and report.passed, prev[1] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from test_acceptance import CRITERIA
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        ok, secs = _acceptance[name]
        label = CRITERIA.get(name, name)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name[-2:]}  {label} ({secs:.1f} s)")
