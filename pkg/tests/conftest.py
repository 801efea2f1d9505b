import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit_frame(rng, m, n, cplx=True):
    F = rng.standard_normal((m, n))
    if cplx:
        F = F + 1j * rng.standard_normal((m, n))
    return F / np.linalg.norm(F, axis=0)


# acceptance verdict lines, echoed live and repeated in the terminal summary
VERDICTS = []


@pytest.fixture(autouse=True)
def _verdict_sink(request):
    capman = request.config.pluginmanager.getplugin("capturemanager")
    yield capman


def emit_verdict(capman, line):
    VERDICTS.append(line)
    if capman is None:
        print(line, flush=True)
        return
    with capman.global_and_fixture_disabled():
        print("\n" + line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)
