import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from demyerson.dist import DiscreteDist

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record a criterion's outcome for the summary printed at session end."""
    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_discrete(rng: np.random.Generator, max_size: int = 12, integer: bool = False,
                    zero: bool = False) -> DiscreteDist:
    """Random finite law; integer supports make exact ties likely."""
    k = int(rng.integers(1, max_size + 1))
    if integer:
        vals = np.sort(rng.choice(np.arange(0 if zero else 1, 3 * max_size), size=k, replace=False)).astype(float)
    else:
        vals = np.sort(rng.choice(np.arange(1, 1000), size=k, replace=False)) / 100.0
        if zero and rng.random() < 0.5:
            vals[0] = 0.0
    masses = rng.dirichlet(np.ones(k)) + 1e-3
    return DiscreteDist(vals, masses / masses.sum())


@st.composite
def discrete_dists(draw, max_size: int = 8):
    k = draw(st.integers(1, max_size))
    vals = sorted(draw(st.sets(st.integers(0, 40), min_size=k, max_size=k)))
    w = draw(st.lists(st.integers(1, 20), min_size=k, max_size=k))
    w = np.asarray(w, dtype=float)
    return DiscreteDist(np.asarray(vals, dtype=float) / 4.0, w / w.sum())
