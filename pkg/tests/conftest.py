import functools

import numpy as np
import pytest

from qramsim.experiments import decoherence_experiment, transfer_experiment

SQRT_HALF = 2 ** -0.5
DIRECT = (0.0, 1.0)
SUPERPOSITION = (SQRT_HALF, 1j * SQRT_HALF)

_acceptance_key = pytest.StashKey[list]()


@functools.lru_cache(maxsize=None)
def decoherence(eta):
    return decoherence_experiment(eta, keep_record=True)


@functools.lru_cache(maxsize=None)
def transfer(state, eta, calibrate_phase="in-situ"):
    alpha, beta = {"direct": DIRECT, "superposition": SUPERPOSITION}[state]
    return transfer_experiment(alpha, beta, eta, calibrate_phase=calibrate_phase)


def pytest_configure(config):
    config.stash[_acceptance_key] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion, then assert."""
    log = request.config.stash[_acceptance_key]

    def report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        log.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
