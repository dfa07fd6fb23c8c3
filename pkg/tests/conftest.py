import pytest

from hopsim.config import bundled_config, load_suite

TABLE1 = {
    "#1": (1.00, float("inf"), 4.53),
    "#2": (0.50, float("inf"), 3.54),
    "#3": (0.25, float("inf"), 4.80),
    "#4": (1.00, 0.5, 2.33),
    "#5": (0.50, 0.5, 4.05),
}

# (v_hx, v_hy, v_h, theta_h)
TABLE2 = {
    "#1": (50.3, 47.2, 69.0, 46.8),
    "#2": (38.7, 32.6, 50.6, 49.9),
    "#3": (32.0, 26.4, 41.4, 50.5),
    "#4": (19.8, 20.5, 28.5, 44.0),
    "#5": (19.8, 21.4, 29.1, 42.8),
}

# (v_hx, v_hy, v_h, theta_h, t_h)
TABLE3 = {
    "#1": (60.5, 50.6, 78.8, 50.1, 0.70),
    "#2": (35.5, 29.9, 46.4, 49.8, 1.14),
    "#3": (28.2, 23.9, 36.9, 49.7, 1.40),
    "#4": (24.8, 23.8, 34.4, 46.2, 0.50),
}


@pytest.fixture(scope="session")
def suite():
    return load_suite(bundled_config())


@pytest.fixture(scope="session")
def case_runs(suite):
    from hopsim.sim import run_hop

    return {label: run_hop(suite.body, suite.env, cmd, suite.motor, suite.sim) for label, cmd in suite.cases}
