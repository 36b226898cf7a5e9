import pytest
from hypothesis import HealthCheck, settings

from spiked_kernel import make_params

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

COUPLINGS = (0.75, 2.0, 6.0)


@pytest.fixture(params=COUPLINGS, ids=lambda A: f"A={A:g}")
def params(request):
    return make_params(request.param)


@pytest.fixture
def p34():
    return make_params(0.75)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
