import math

import pytest

from grsoliton.chart import define_chart, define_metric

P = "4*exp(y)/(16+exp(2*y))"
MINUS_Q = "exp(2*y)/(16+exp(2*y))"

SASAKIAN_METRIC = [
    [f"({P})^2 + ({MINUS_Q})^2", "0", MINUS_Q],
    ["0", f"({P})^2", "0"],
    [MINUS_Q, "0", "1"],
]
SASAKIAN_PHI = [["0", "-1", "0"], ["1", "0", "0"], ["0", MINUS_Q, "0"]]
SASAKIAN_XI = ["0", "0", "1"]
SASAKIAN_ETA = [MINUS_Q, "0", "1"]
SASAKIAN_F1 = "(ln(16+exp(2*y)) - 2*ln(sin(z)))/2"
SASAKIAN_F2 = "(ln(16+exp(2*y)) - 2*ln(sin(z)))/2"


@pytest.fixture(scope="session")
def hyperbolic_geometry():
    chart = define_chart(["x", "y"], {"y": (0, None)})
    metric = define_metric(chart, [["1/y^2", "0"], ["0", "1/y^2"]])
    return chart, metric


@pytest.fixture(scope="session")
def cone_geometry():
    chart = define_chart(["x", "y", "z"], {"x": (0, None)})
    metric = define_metric(chart, [["1", "0", "0"],
                                   ["0", "x^2", "0"],
                                   ["0", "0", "x^2"]])
    return chart, metric


@pytest.fixture(scope="session")
def sasakian_geometry():
    chart = define_chart(["x", "y", "z"], {"z": (0, math.pi)})
    metric = define_metric(chart, SASAKIAN_METRIC)
    return chart, metric


@pytest.fixture(scope="session")
def euclidean_plane():
    chart = define_chart(["x", "y"], {})
    metric = define_metric(chart, [["1", "0"], ["0", "1"]])
    return chart, metric


@pytest.fixture(scope="session")
def euclidean_space():
    chart = define_chart(["x", "y", "z"], {})
    metric = define_metric(chart, [["1", "0", "0"],
                                   ["0", "1", "0"],
                                   ["0", "0", "1"]])
    return chart, metric
