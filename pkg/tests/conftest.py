import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rbtc.distribution import RbtcParams

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion number -> one-line PASS/FAIL summary, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])

# The four Monte Carlo study settings.
CASES = {
    "I": RbtcParams(2.0, 1.0, 0.5),
    "II": RbtcParams(0.9, 0.9, 0.9),
    "III": RbtcParams(1.5, 0.5, 0.3),
    "IV": RbtcParams(2.2, 0.7, 0.2),
}


@pytest.fixture(params=list(CASES), ids=list(CASES))
def case(request):
    return CASES[request.param]


def random_params(rng: np.random.Generator, size: int, p_low=0.0, p_high=1.0):
    out = []
    for _ in range(size):
        out.append(RbtcParams(
            float(np.exp(rng.uniform(np.log(0.05), np.log(20.0)))),
            float(np.exp(rng.uniform(np.log(0.2), np.log(4.0)))),
            float(rng.uniform(p_low, p_high)),
        ))
    return out
