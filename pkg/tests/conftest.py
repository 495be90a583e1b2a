import numpy as np
import pytest

from planarswitch.planar import is_hurwitz


def random_hurwitz(rng, n, lo=-3.0, hi=3.0):
    out = []
    while len(out) < n:
        A = rng.uniform(lo, hi, (2, 2))
        if is_hurwitz(A):
            out.append(A)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok = all(r[0] for r in RESULTS[n])
        details = "; ".join(r[1] for r in RESULTS[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {details}")
