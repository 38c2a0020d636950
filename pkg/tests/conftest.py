import math

import pytest

from wgqed import EmitterArray, GaussianPulse, Scenario

LAMBDA = 1e-3


def pair(spacing, gamma_nw=0.0, z0=2.0, dk=None, pulse=None, alpha0=None, nw=True, mode="markovian"):
    arr = EmitterArray.chain(2, spacing, z0=z0, gamma_nw=gamma_nw, dk=dk, lambda_a=LAMBDA)
    return Scenario(arr, pulse, alpha0, nw, mode)


def single(gamma_nw=0.0, z=1.0, pulse=None, alpha0=None, dk=0.0):
    arr = EmitterArray.chain(1, 1.0, z0=z, gamma_nw=gamma_nw, dk=[dk], lambda_a=LAMBDA)
    return Scenario(arr, pulse, alpha0)


@pytest.fixture
def gauss10():
    return GaussianPulse(10.0)


K_A = 2 * math.pi / LAMBDA


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance_line"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
