import numpy as np
import pytest

from cocyclelab import Frequency, almost_mathieu
from cocyclelab.cocycle import GOLDEN, Cocycle, TrigMatrixPoly

ACCEPTANCE = []


def record(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE.append((name, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def golden():
    return Frequency.irrational(GOLDEN)


@pytest.fixture
def amo3():
    return almost_mathieu(0.0, 3.0)


def constant(C, freq=None):
    freq = Frequency.irrational(GOLDEN) if freq is None else freq
    return Cocycle(freq, TrigMatrixPoly.constant(np.asarray(C, dtype=complex)))


def rotation_cocycle(freq=None):
    """``x -> [[cos 2 pi x, -sin 2 pi x], [sin 2 pi x, cos 2 pi x]]``."""
    freq = Frequency.irrational(GOLDEN) if freq is None else freq
    one = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    return Cocycle(freq, TrigMatrixPoly.from_modes({1: one, -1: one.conj()}))
