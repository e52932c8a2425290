import math

import numpy as np
import pytest
from scipy import integrate

from risrate.channel import QoSConfig, SystemConfig


def ring_config(L=40, rho_db=10.0, **over):
    kw = dict(rho=10 ** (rho_db / 10), delta=3.4, L=L, R1=2.0, R2=5.0, qos=QoSConfig(5.4))
    kw.update(over)
    return SystemConfig(**kw)


def integrate_positive(f, lo, hi, center, rtol=1e-11):
    """int_lo^hi f(x) dx for a density concentrated near ``center`` (log substitution)."""
    pieces = np.log([lo, center / 100, center / 10, center, center * 10, hi])
    pieces = np.unique(np.clip(pieces, math.log(lo), math.log(hi)))
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, _ = integrate.quad(lambda u: float(f(math.exp(u))) * math.exp(u), a, b,
                                epsabs=0.0, epsrel=rtol, limit=400)
        total += val
    return total


@pytest.fixture
def cfg():
    return ring_config()


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail, seconds):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}  [{seconds:.1f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
