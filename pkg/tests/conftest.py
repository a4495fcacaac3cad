import numpy as np
import pytest
from hypothesis import settings

from gsqg.spectral import Grid2D

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def grid():
    return Grid2D(64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


# --- acceptance bookkeeping -------------------------------------------------
# test_acceptance.py records (criterion, ok, detail) before asserting; the
# terminal summary prints one line per criterion (all its parts must pass).

ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE.setdefault(number, []).append((bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        ok = all(p[0] for p in parts)
        failed = [d for good, d in parts if not good]
        detail = "; ".join(failed) if failed else "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
