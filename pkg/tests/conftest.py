import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cfinsler.metric import builtin_metric, metric_from_expression

settings.register_profile("ci", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

# Hermitian but not Kähler: the (1,2) coefficient depends on z1.
NON_KAHLER = "abs2(v1) + abs2(v2) + 0.5*(conj(z1)*v1*conj(v2) + z1*v2*conj(v1))"


@pytest.fixture(scope="session")
def euclid2():
    return builtin_metric("EUCLIDEAN", 2)


@pytest.fixture(scope="session")
def poincare1():
    return builtin_metric("POINCARE_BALL", 1)


@pytest.fixture(scope="session")
def poincare2():
    return builtin_metric("POINCARE_BALL", 2)


@pytest.fixture(scope="session")
def quartic():
    return builtin_metric("QUARTIC")


@pytest.fixture(scope="session")
def hermitian_diag():
    return builtin_metric("HERMITIAN_CONST", matrix=np.diag([1.0, 4.0]))


@pytest.fixture(scope="session")
def non_kahler():
    return metric_from_expression(NON_KAHLER, 2)


@pytest.fixture(scope="session")
def builtins4():
    return [builtin_metric("EUCLIDEAN", 2), builtin_metric("HERMITIAN_CONST", matrix=[[2.0, 0.5j], [-0.5j, 1.0]]),
            builtin_metric("POINCARE_BALL", 2), builtin_metric("QUARTIC")]


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
