from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

# Property suites use a fixed seed so failures reproduce exactly.
settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=1000,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("repro")

FEIGENBAUM_C = -1.4011138049397764
FIBONACCI_C = {2: -1.8705286420872613, 4: -1.2492567458860382, 6: -1.1455757344641495}
CASCADE_4 = -1.1679392129122041


@pytest.fixture(scope="session")
def feigenbaum():
    from polylike.core import PolynomialFamily

    return PolynomialFamily(2, FEIGENBAUM_C)
