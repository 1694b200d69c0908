import numpy as np
import pytest

from sagraph.dist import make_rng
from sagraph.lattice import build_weights, strip_layout

# five-location strip c1 c2 c1 c2 c1 and its two weight matrices
FIG1_W21 = np.array([
    [0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0.5, 0, 0.5, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0],
])
FIG1_W12 = np.array([
    [0, 0, 0, 0, 0],
    [0.5, 0, 0.5, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0.5, 0, 0.5],
    [0, 0, 0, 0, 0],
])

EXAMPLE_X = np.array([
    [1.6154947, -1.2923845],
    [-0.6613634, 1.4513324],
    [0.2156944, 0.5118063],
    [-0.5619332, -0.8025372],
    [0.2537716, -2.4355581],
])
EXAMPLE_THETA = np.array([[1.0, 0.1], [0.1, 1.0]])
# (psi_{c1,c2}, psi_{c2,c1}) as printed, for the generating and the alternative set
EXAMPLE_SET_A = (np.array([[-0.1, -0.2], [0.0, 0.4]]), np.array([[0.0, 0.4], [-0.4, 0.4]]))
EXAMPLE_SET_B = (
    np.array([[-0.5552457, -0.02928151], [0.1116245, -0.56307484]]),
    np.array([[0.1067707, -0.1474186], [-0.5431019, 0.7314883]]),
)
EXAMPLE_LOGLIK = -7.165605


@pytest.fixture
def rng():
    return make_rng(20240601)


@pytest.fixture
def strip5():
    return build_weights(strip_layout(5))


def random_stable_psi(rng, p, weights, scale=0.3):
    from sagraph.params import stability_check

    while True:
        psi = scale * rng.uniform(-1, 1, (2, p, p))
        if stability_check(psi, weights):
            return psi


# one summary line per acceptance criterion, printed after the run
_CRITERIA = []


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _CRITERIA:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}" + (f"  [{detail}]" if detail else ""))
