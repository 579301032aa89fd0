import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from svstab.profile import critical_height, derive_constants

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sub_params():
    return derive_constants(1.5, 0.2)


@pytest.fixture(scope="session")
def smooth_params():
    return derive_constants(1.5, 0.8)


def random_subshock_pairs(n, seed=0, F_range=(0.3, 1.9), margin=0.02):
    """Parameter pairs strictly inside the subshock domain."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        F = rng.uniform(*F_range)
        top = critical_height(F) - margin
        if top <= 0.02:
            continue
        out.append((float(F), float(rng.uniform(0.02, top))))
    return out


def random_smooth_pairs(n, seed=0, F_range=(0.3, 1.9), margin=0.02):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        F = rng.uniform(*F_range)
        lo = critical_height(F) + margin
        if lo >= 0.98:
            continue
        out.append((float(F), float(rng.uniform(lo, 0.98))))
    return out


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
