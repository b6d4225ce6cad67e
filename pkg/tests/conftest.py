import pytest

from mcmsurvey.dynamics import VehicleParams, VehicleState, integrate
from mcmsurvey.geometry import DomainSpec, Rect
from mcmsurvey.optimizer import initial_guess
from mcmsurvey.sensor import SensorParams

UNIT = 100.0


def square_domain(lo=5.0, hi=25.0, xi=0.2) -> DomainSpec:
    return DomainSpec(Rect((lo * UNIT, lo * UNIT), (hi * UNIT, hi * UNIT)), (xi * UNIT, xi * UNIT))


@pytest.fixture(scope="session")
def domain():
    return square_domain()


@pytest.fixture(scope="session")
def lawnmower(domain):
    """The warm-start sweep of the benchmark square, integrated."""
    sensor, vehicle = SensorParams(), VehicleParams()
    start = (5 * UNIT, 5 * UNIT)
    guess = initial_guess(domain, start, sensor, vehicle, 60)
    return integrate(VehicleState(*start, 0.0, 0.0), guess, 4, vehicle)


# acceptance results, printed once at the end of the run
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(number: int, name: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE[number] = (name, bool(ok), detail)
    print(f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}", flush=True)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
